#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ranemu/ingest.hpp"
#include "ranemu/types.hpp"

namespace ranemu {

enum class ProfileKind { Specific, Universal };

// Aggregation key. Specific keys carry country and operator, universal keys
// carry neither. Rendered as `kind/country/operator/rat/quality`, with `any`
// standing in for the absent fields of a universal key.
struct ProfileKey {
  ProfileKind kind = ProfileKind::Universal;
  std::optional<std::string> country;
  std::optional<std::string> op;
  Rat rat = Rat::G4;
  SignalQuality quality = SignalQuality::Good;

  static ProfileKey specific(std::string country, std::string op, Rat rat, SignalQuality q);
  static ProfileKey universal(Rat rat, SignalQuality q);

  std::string to_string() const;

  // Throws FormatError on malformed input.
  static ProfileKey parse(std::string_view text);

  friend bool operator==(const ProfileKey&, const ProfileKey&) = default;
  // Ordered by rendered string, so maps iterate in canonical key order.
  friend bool operator<(const ProfileKey& a, const ProfileKey& b) {
    return a.to_string() < b.to_string();
  }
};

struct Profile {
  ProfileKey key;
  std::vector<NetworkSample> samples;
};

using ProfileMap = std::map<ProfileKey, Profile>;

// Every record lands in one specific and one universal profile. Sample order
// follows record order.
ProfileMap build_profiles(std::span<const SpeedTestRecord> records);

// Drops profiles with fewer than `min_samples` samples.
ProfileMap filter_profiles(const ProfileMap& profiles, std::size_t min_samples = 100);

struct DimensionStats {
  double p5 = 0, q1 = 0, median = 0, q3 = 0, p95 = 0;
  double mean = 0;
  double stddev = 0;  // sample (n-1) standard deviation; 0 for a single value
};

struct ProfileStats {
  std::size_t count = 0;
  DimensionStats download;
  DimensionStats upload;
  DimensionStats latency;

  const DimensionStats& operator[](Dimension d) const;
};

// Quantile by linear interpolation between closest ranks: position p*(n-1) in
// the sorted data. `sorted` must be ascending and non-empty.
double quantile_sorted(std::span<const double> sorted, double p);

// Same, for unsorted data (copies and sorts).
double quantile(std::span<const double> values, double p);

DimensionStats dimension_stats(std::span<const double> values);

std::vector<double> column(std::span<const NetworkSample> samples, Dimension d);

// Throws ParameterError on an empty profile.
ProfileStats profile_stats(std::span<const NetworkSample> samples);
inline ProfileStats profile_stats(const Profile& p) { return profile_stats(p.samples); }

}  // namespace ranemu
