#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "ranemu/emulator.hpp"
#include "ranemu/types.hpp"

namespace ranemu {

struct KsResult {
  double d_statistic = 0.0;
  std::size_t n_a = 0;
  std::size_t n_b = 0;
};

// Two-sample Kolmogorov-Smirnov D = sup_x |F_a(x) - F_b(x)|, evaluated exactly
// at every merged sample point. Throws ParameterError if either side is empty.
KsResult ks_two_sample(std::span<const double> a, std::span<const double> b);

// Same, for inputs already sorted ascending.
double ks_statistic_sorted(std::span<const double> a, std::span<const double> b);

// D values of the subset-size experiment. d[i][dim][rep] belongs to sizes[i].
struct SubsampleReport {
  std::vector<std::size_t> sizes;  // ascending
  std::size_t repetitions = 0;
  std::size_t cap = 0;
  std::vector<std::array<std::vector<double>, 3>> d;

  double median(std::size_t size_index, Dimension dim) const;

  // CSV: comment line, header `dimension,n,repetition,D`, one row per value.
  void write_csv(std::ostream& out, std::optional<std::uint64_t> seed) const;
};

// Draws a reference set of exactly `cap` samples (without replacement), then
// for every size n and repetition compares an n-subset of the reference (also
// without replacement) against it, per dimension. Each repetition uses its own
// random substream derived from `seed`.
// Throws ParameterError if the profile has fewer than `cap` samples, any size
// exceeds `cap` or is zero, or repetitions is zero.
SubsampleReport subsample_experiment(std::span<const NetworkSample> profile,
                                     std::vector<std::size_t> sizes, std::size_t repetitions,
                                     std::size_t cap, std::uint64_t seed);

struct DistributionSummary {
  std::size_t count = 0;
  double p5 = 0, q1 = 0, median = 0, q3 = 0, p95 = 0;
  double iqr() const { return q3 - q1; }
};

DistributionSummary summarize(std::span<const double> values);

struct ComparisonReport {
  DistributionSummary observed;
  DistributionSummary emulated;
  double ks_d = 0.0;
  // IQR(emulated) / IQR(observed). 1 when both IQRs are zero, +inf when only
  // the observed one is.
  double iqr_ratio = 0.0;

  void write_text(std::ostream& out) const;
};

ComparisonReport compare_distributions(std::span<const double> observed,
                                       std::span<const double> emulated);

// One simulated download per row.
struct DownloadRow {
  std::size_t index = 0;
  EmulationParams applied;  // latency_ms is the imposed mean
  double rtt_ms = 0.0;      // RTT actually seen by this download
  double duration_s = 0.0;
  double avg_speed_kbps = 0.0;
};

// Repeats: draw parameters, apply them to a fresh simulated link, download
// `size_bytes`, clear. Download i draws from substream (seed, i).
std::vector<DownloadRow> run_download_campaign(const ParamSource& source, std::size_t downloads,
                                               std::uint64_t size_bytes, std::uint64_t seed,
                                               int setup_rtts = 2);

// Average speeds the fluid link yields when each stored tuple is applied as-is.
std::vector<double> fluid_speeds(std::span<const NetworkSample> samples, std::uint64_t size_bytes,
                                 int setup_rtts = 2);

void write_campaign_csv(std::ostream& out, std::span<const DownloadRow> rows,
                        std::optional<std::uint64_t> seed);

}  // namespace ranemu
