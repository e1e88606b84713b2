#include "ranemu/profiles.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ranemu/error.hpp"

namespace ranemu {

ProfileKey ProfileKey::specific(std::string country, std::string op, Rat rat, SignalQuality q) {
  return {ProfileKind::Specific, std::move(country), std::move(op), rat, q};
}

ProfileKey ProfileKey::universal(Rat rat, SignalQuality q) {
  return {ProfileKind::Universal, std::nullopt, std::nullopt, rat, q};
}

std::string ProfileKey::to_string() const {
  std::string s = kind == ProfileKind::Specific ? "specific/" : "universal/";
  s += country.value_or("any");
  s += '/';
  s += op.value_or("any");
  s += '/';
  s += rat_name(rat);
  s += '/';
  s += quality_name(quality);
  return s;
}

ProfileKey ProfileKey::parse(std::string_view text) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const auto slash = text.find('/', start);
    parts.push_back(text.substr(start, slash - start));
    if (slash == std::string_view::npos) break;
    start = slash + 1;
  }
  const auto fail = [&](const char* why) {
    return FormatError("bad profile key '" + std::string(text) + "': " + why);
  };
  if (parts.size() != 5) throw fail("expected kind/country/operator/rat/quality");

  const auto rat = parse_rat(parts[3]);
  if (!rat) throw fail("unknown rat");
  const auto quality = parse_quality(parts[4]);
  if (!quality) throw fail("unknown quality");

  if (parts[0] == "universal") {
    if (parts[1] != "any" || parts[2] != "any") throw fail("universal keys use 'any'");
    return universal(*rat, *quality);
  }
  if (parts[0] == "specific") {
    if (parts[1].empty() || parts[2].empty()) throw fail("empty country or operator");
    return specific(std::string(parts[1]), std::string(parts[2]), *rat, *quality);
  }
  throw fail("kind must be 'specific' or 'universal'");
}

ProfileMap build_profiles(std::span<const SpeedTestRecord> records) {
  ProfileMap out;
  auto add = [&](ProfileKey key, const NetworkSample& s) {
    auto [it, inserted] = out.try_emplace(key);
    if (inserted) it->second.key = std::move(key);
    it->second.samples.push_back(s);
  };
  for (const auto& r : records) {
    const auto q = bin_signal(r.rat, r.rssi);
    add(ProfileKey::specific(r.country, r.op, r.rat, q), r.sample());
    add(ProfileKey::universal(r.rat, q), r.sample());
  }
  return out;
}

ProfileMap filter_profiles(const ProfileMap& profiles, std::size_t min_samples) {
  ProfileMap out;
  for (const auto& [key, profile] : profiles) {
    if (profile.samples.size() >= min_samples) out.emplace(key, profile);
  }
  return out;
}

const DimensionStats& ProfileStats::operator[](Dimension d) const {
  switch (d) {
    case Dimension::Download: return download;
    case Dimension::Upload: return upload;
    case Dimension::Latency: return latency;
  }
  return download;
}

double quantile_sorted(std::span<const double> sorted, double p) {
  if (sorted.empty()) throw ParameterError("quantile of empty data");
  const double pos = std::clamp(p, 0.0, 1.0) * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

double quantile(std::span<const double> values, double p) {
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  return quantile_sorted(sorted, p);
}

DimensionStats dimension_stats(std::span<const double> values) {
  if (values.empty()) throw ParameterError("statistics of empty data");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());

  DimensionStats s;
  s.p5 = quantile_sorted(sorted, 0.05);
  s.q1 = quantile_sorted(sorted, 0.25);
  s.median = quantile_sorted(sorted, 0.5);
  s.q3 = quantile_sorted(sorted, 0.75);
  s.p95 = quantile_sorted(sorted, 0.95);

  const double n = static_cast<double>(values.size());
  s.mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.stddev = std::sqrt(ss / (n - 1.0));
  }
  return s;
}

std::vector<double> column(std::span<const NetworkSample> samples, Dimension d) {
  std::vector<double> out;
  out.reserve(samples.size());
  for (const auto& s : samples) out.push_back(s[d]);
  return out;
}

ProfileStats profile_stats(std::span<const NetworkSample> samples) {
  if (samples.empty()) throw ParameterError("profile_stats: empty profile");
  ProfileStats st;
  st.count = samples.size();
  st.download = dimension_stats(column(samples, Dimension::Download));
  st.upload = dimension_stats(column(samples, Dimension::Upload));
  st.latency = dimension_stats(column(samples, Dimension::Latency));
  return st;
}

}  // namespace ranemu
