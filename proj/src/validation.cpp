#include "ranemu/validation.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>

#include "ranemu/error.hpp"
#include "ranemu/profiles.hpp"

namespace ranemu {

namespace {

std::string num(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

void write_comment(std::ostream& out, std::optional<std::uint64_t> seed) {
  out << "# ranemu " << kVersion << " seed=";
  if (seed) {
    out << *seed;
  } else {
    out << "none";
  }
  out << '\n';
}

}  // namespace

double ks_statistic_sorted(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw ParameterError("ks_two_sample: empty sample");
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  std::size_t i = 0;
  std::size_t j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] == x) ++i;
    while (j < b.size() && b[j] == x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return d;
}

KsResult ks_two_sample(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw ParameterError("ks_two_sample: empty sample");
  std::vector<double> sa(a.begin(), a.end());
  std::vector<double> sb(b.begin(), b.end());
  std::sort(sa.begin(), sa.end());
  std::sort(sb.begin(), sb.end());
  return {ks_statistic_sorted(sa, sb), a.size(), b.size()};
}

double SubsampleReport::median(std::size_t size_index, Dimension dim) const {
  return quantile(d.at(size_index)[static_cast<std::size_t>(dim)], 0.5);
}

void SubsampleReport::write_csv(std::ostream& out, std::optional<std::uint64_t> seed) const {
  write_comment(out, seed);
  out << "dimension,n,repetition,D\n";
  for (auto dim : kDimensions) {
    for (std::size_t i = 0; i < sizes.size(); ++i) {
      const auto& values = d[i][static_cast<std::size_t>(dim)];
      for (std::size_t r = 0; r < values.size(); ++r) {
        out << dimension_name(dim) << ',' << sizes[i] << ',' << r << ',' << num(values[r]) << '\n';
      }
    }
  }
}

SubsampleReport subsample_experiment(std::span<const NetworkSample> profile,
                                     std::vector<std::size_t> sizes, std::size_t repetitions,
                                     std::size_t cap, std::uint64_t seed) {
  if (cap == 0) throw ParameterError("subsample: cap must be positive");
  if (profile.size() < cap) {
    throw ParameterError("subsample: profile has " + std::to_string(profile.size()) +
                         " samples, fewer than the reference size " + std::to_string(cap));
  }
  if (repetitions == 0) throw ParameterError("subsample: repetitions must be positive");
  if (sizes.empty()) throw ParameterError("subsample: no subset sizes given");
  for (auto n : sizes) {
    if (n == 0 || n > cap) {
      throw ParameterError("subsample: subset size " + std::to_string(n) + " outside [1, " +
                           std::to_string(cap) + "]");
    }
  }
  std::sort(sizes.begin(), sizes.end());
  sizes.erase(std::unique(sizes.begin(), sizes.end()), sizes.end());

  std::vector<std::size_t> all(profile.size());
  std::iota(all.begin(), all.end(), 0);
  std::vector<std::size_t> reference;
  reference.reserve(cap);
  auto ref_rng = derive_rng(seed, 0);
  std::sample(all.begin(), all.end(), std::back_inserter(reference), cap, ref_rng);

  std::array<std::vector<double>, 3> ref_sorted;
  for (auto dim : kDimensions) {
    auto& col = ref_sorted[static_cast<std::size_t>(dim)];
    col.reserve(cap);
    for (auto idx : reference) col.push_back(profile[idx][dim]);
    std::sort(col.begin(), col.end());
  }

  SubsampleReport report;
  report.sizes = sizes;
  report.repetitions = repetitions;
  report.cap = cap;
  report.d.resize(sizes.size());

  std::vector<std::size_t> subset;
  std::vector<double> values;
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    const auto n = sizes[i];
    for (auto& per_dim : report.d[i]) per_dim.reserve(repetitions);
    for (std::size_t rep = 0; rep < repetitions; ++rep) {
      auto rng = derive_rng(seed, 1, n, rep);
      subset.clear();
      std::sample(reference.begin(), reference.end(), std::back_inserter(subset), n, rng);
      for (auto dim : kDimensions) {
        values.clear();
        for (auto idx : subset) values.push_back(profile[idx][dim]);
        std::sort(values.begin(), values.end());
        report.d[i][static_cast<std::size_t>(dim)].push_back(
            ks_statistic_sorted(values, ref_sorted[static_cast<std::size_t>(dim)]));
      }
    }
  }
  return report;
}

DistributionSummary summarize(std::span<const double> values) {
  const auto st = dimension_stats(values);
  return {values.size(), st.p5, st.q1, st.median, st.q3, st.p95};
}

ComparisonReport compare_distributions(std::span<const double> observed,
                                       std::span<const double> emulated) {
  ComparisonReport r;
  r.observed = summarize(observed);
  r.emulated = summarize(emulated);
  r.ks_d = ks_two_sample(observed, emulated).d_statistic;
  const double obs = r.observed.iqr();
  const double emu = r.emulated.iqr();
  if (obs > 0.0) {
    r.iqr_ratio = emu / obs;
  } else {
    r.iqr_ratio = emu > 0.0 ? std::numeric_limits<double>::infinity() : 1.0;
  }
  return r;
}

void ComparisonReport::write_text(std::ostream& out) const {
  auto row = [&out](const char* name, const DistributionSummary& s) {
    out << name << '\t' << s.count << '\t' << num(s.p5) << '\t' << num(s.q1) << '\t'
        << num(s.median) << '\t' << num(s.q3) << '\t' << num(s.p95) << '\t' << num(s.iqr()) << '\n';
  };
  out << "series\tn\tp5\tq1\tmedian\tq3\tp95\tiqr\n";
  row("observed", observed);
  row("emulated", emulated);
  out << "ks_d\t" << num(ks_d) << '\n';
  out << "iqr_ratio\t" << num(iqr_ratio) << '\n';
}

std::vector<DownloadRow> run_download_campaign(const ParamSource& source, std::size_t downloads,
                                               std::uint64_t size_bytes, std::uint64_t seed,
                                               int setup_rtts) {
  if (size_bytes == 0) throw ParameterError("download campaign: object size must be positive");
  std::vector<DownloadRow> rows;
  rows.reserve(downloads);
  for (std::size_t i = 0; i < downloads; ++i) {
    auto rng = derive_rng(seed, 1, i);
    auto jitter_rng = derive_rng(seed, 2, i);
    SimulatedBackend link(setup_rtts, jitter_rng());

    const ShapingAction action = source(rng);
    if (action.latency_std_ms) {
      link.apply_gaussian_latency(action.params, action.params.latency_ms, *action.latency_std_ms);
    } else {
      link.apply(action.params);
    }
    DownloadRow row;
    row.index = i;
    row.applied = action.params;
    try {
      const auto result = link.download(size_bytes);
      row.rtt_ms = link.last_rtt_ms();
      row.duration_s = result.duration_s;
      row.avg_speed_kbps = result.avg_speed_kbps;
    } catch (...) {
      link.clear();
      throw;
    }
    link.clear();
    rows.push_back(row);
  }
  return rows;
}

std::vector<double> fluid_speeds(std::span<const NetworkSample> samples, std::uint64_t size_bytes,
                                 int setup_rtts) {
  std::vector<double> out;
  out.reserve(samples.size());
  for (const auto& s : samples) {
    out.push_back(simulate_download({s.download_kbps, s.upload_kbps, s.latency_ms, setup_rtts},
                                    size_bytes)
                      .avg_speed_kbps);
  }
  return out;
}

void write_campaign_csv(std::ostream& out, std::span<const DownloadRow> rows,
                        std::optional<std::uint64_t> seed) {
  write_comment(out, seed);
  out << "download,download_kbps,upload_kbps,latency_ms,rtt_ms,duration_s,avg_speed_kbps\n";
  for (const auto& r : rows) {
    out << r.index << ',' << num(r.applied.download_kbps) << ',' << num(r.applied.upload_kbps)
        << ',' << num(r.applied.latency_ms) << ',' << num(r.rtt_ms) << ',' << num(r.duration_s)
        << ',' << num(r.avg_speed_kbps) << '\n';
  }
}

}  // namespace ranemu
