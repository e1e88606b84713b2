#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "ranemu/error.hpp"
#include "ranemu/validation.hpp"
#include "synthetic.hpp"

using namespace ranemu;

namespace {

// Brute force: |F_a - F_b| at every sample point, by counting.
double ks_oracle(const std::vector<double>& a, const std::vector<double>& b) {
  auto cdf = [](const std::vector<double>& v, double x) {
    return static_cast<double>(std::count_if(v.begin(), v.end(), [x](double y) { return y <= x; })) /
           static_cast<double>(v.size());
  };
  double d = 0.0;
  for (const auto* v : {&a, &b}) {
    for (double x : *v) d = std::max(d, std::abs(cdf(a, x) - cdf(b, x)));
  }
  return d;
}

std::vector<double> random_values(Rng& rng, std::size_t n, int distinct) {
  std::uniform_int_distribution<int> u(0, distinct - 1);
  std::vector<double> v(n);
  for (auto& x : v) x = 0.5 * u(rng) + 1.0;
  return v;
}

}  // namespace

TEST(Ks, Examples) {
  const std::vector<double> a = {3, 1, 2, 2};
  EXPECT_EQ(ks_two_sample(a, a).d_statistic, 0.0);
  EXPECT_EQ(ks_two_sample(std::vector<double>{0, 1}, std::vector<double>{2, 3}).d_statistic, 1.0);
  const auto r = ks_two_sample(std::vector<double>{1, 2, 3, 4}, std::vector<double>{1, 2, 3, 5});
  EXPECT_DOUBLE_EQ(r.d_statistic, 0.25);
  EXPECT_EQ(r.n_a, 4u);
  EXPECT_EQ(r.n_b, 4u);
  EXPECT_THROW(ks_two_sample(std::vector<double>{}, a), ParameterError);
}

TEST(Ks, MatchesBruteForceWithTies) {
  Rng rng(17);
  for (int trial = 0; trial < 300; ++trial) {
    const auto a = random_values(rng, 1 + rng() % 40, 1 + static_cast<int>(rng() % 12));
    const auto b = random_values(rng, 1 + rng() % 40, 1 + static_cast<int>(rng() % 12));
    const double d = ks_two_sample(a, b).d_statistic;
    EXPECT_NEAR(d, ks_oracle(a, b), 1e-12);
    EXPECT_GE(d, 0.0);
    EXPECT_LE(d, 1.0);
  }
}

TEST(Ks, SymmetricAndTransformInvariant) {
  Rng rng(3);
  std::lognormal_distribution<double> ln(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> a(50), b(70);
    for (auto& x : a) x = ln(rng);
    for (auto& x : b) x = ln(rng) * 1.3;
    const double d = ks_two_sample(a, b).d_statistic;
    EXPECT_EQ(d, ks_two_sample(b, a).d_statistic);
    std::vector<double> la(a), lb(b);
    for (auto& x : la) x = std::log(x) * 3.0 + 7.0;
    for (auto& x : lb) x = std::log(x) * 3.0 + 7.0;
    EXPECT_DOUBLE_EQ(d, ks_two_sample(la, lb).d_statistic);
  }
}

TEST(Subsample, FullSizeGivesZero) {
  const auto pts = synth::lognormal_profile(3000, 5);
  const auto r = subsample_experiment(pts, {2000}, 5, 2000, 1);
  for (auto dim : kDimensions) {
    for (double d : r.d[0][static_cast<std::size_t>(dim)]) EXPECT_EQ(d, 0.0);
  }
}

TEST(Subsample, MediansDecreaseWithSize) {
  const auto pts = synth::lognormal_profile(10000, 6);
  const auto r = subsample_experiment(pts, {1000, 10, 100}, 100, 10000, 2);
  ASSERT_EQ(r.sizes, (std::vector<std::size_t>{10, 100, 1000}));
  for (auto dim : kDimensions) {
    EXPECT_GT(r.median(0, dim), r.median(1, dim));
    EXPECT_GT(r.median(1, dim), r.median(2, dim));
  }
}

// Non-increasing medians across many seeds; a few statistical violations allowed.
TEST(Subsample, MonotoneAcrossSeeds) {
  int violations = 0;
  int trials = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto pts = synth::lognormal_profile(2000, 100 + seed);
    const auto r = subsample_experiment(pts, {10, 100, 1000}, 30, 2000, seed);
    for (auto dim : kDimensions) {
      ++trials;
      if (r.median(0, dim) < r.median(1, dim) || r.median(1, dim) < r.median(2, dim)) ++violations;
    }
  }
  EXPECT_LE(violations, trials / 20);
}

TEST(Subsample, SingleRepetitionIsReproducible) {
  const auto pts = synth::lognormal_profile(1000, 8);
  const auto a = subsample_experiment(pts, {50}, 1, 500, 99);
  const auto b = subsample_experiment(pts, {50}, 1, 500, 99);
  ASSERT_EQ(a.d[0][0].size(), 1u);
  EXPECT_EQ(a.d, b.d);
  const auto c = subsample_experiment(pts, {50}, 1, 500, 100);
  EXPECT_NE(a.d, c.d);
}

TEST(Subsample, InputErrors) {
  const auto pts = synth::lognormal_profile(100, 8);
  EXPECT_THROW(subsample_experiment(pts, {10}, 10, 200, 1), ParameterError);
  EXPECT_THROW(subsample_experiment(pts, {101}, 10, 100, 1), ParameterError);
  EXPECT_THROW(subsample_experiment(pts, {0}, 10, 100, 1), ParameterError);
  EXPECT_THROW(subsample_experiment(pts, {10}, 0, 100, 1), ParameterError);
  EXPECT_THROW(subsample_experiment(pts, {}, 10, 100, 1), ParameterError);
}

TEST(Subsample, CsvLayout) {
  const auto pts = synth::lognormal_profile(100, 8);
  const auto r = subsample_experiment(pts, {10, 100}, 2, 100, 4);
  std::ostringstream out;
  r.write_csv(out, 4);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "# ranemu 0.1.0 seed=4");
  std::getline(in, line);
  EXPECT_EQ(line, "dimension,n,repetition,D");
  std::getline(in, line);
  EXPECT_TRUE(line.starts_with("download_kbps,10,0,")) << line;
  std::size_t rows = 0;
  while (std::getline(in, line)) ++rows;
  EXPECT_EQ(rows + 1, 3u * 2u * 2u);
  EXPECT_TRUE(out.str().find("latency_ms,100,1,0\n") != std::string::npos);
}

TEST(Compare, IdenticalInputs) {
  const std::vector<double> v = {1, 5, 2, 8, 3, 9};
  const auto r = compare_distributions(v, v);
  EXPECT_EQ(r.ks_d, 0.0);
  EXPECT_EQ(r.iqr_ratio, 1.0);
  EXPECT_EQ(r.observed.median, r.emulated.median);
}

TEST(Compare, ConstantEmulatedHasZeroIqrRatio) {
  const std::vector<double> observed = {1, 5, 2, 8, 3, 9};
  const std::vector<double> emulated(100, 4.0);
  const auto r = compare_distributions(observed, emulated);
  EXPECT_EQ(r.iqr_ratio, 0.0);
  EXPECT_TRUE(std::isinf(compare_distributions(emulated, observed).iqr_ratio));
  EXPECT_EQ(compare_distributions(emulated, emulated).iqr_ratio, 1.0);
}

TEST(Compare, KdeSamplesMatchSourceMarginals) {
  const auto pts = synth::lognormal_profile(10000, 10);
  const auto model = KdeModel::fit(pts);
  Rng rng(10);
  const auto draws = model.sample(rng, 10000);
  for (auto dim : kDimensions) {
    const auto r = compare_distributions(column(pts, dim), column(draws, dim));
    EXPECT_LE(r.ks_d, 0.05) << dimension_name(dim);
  }
}

TEST(Campaign, SimpleModeHasConstantBandwidth) {
  const auto rows = run_download_campaign(simple_source({{20000, 5000, 40}, 10}), 200, 10'000'000, 3);
  ASSERT_EQ(rows.size(), 200u);
  for (const auto& r : rows) {
    EXPECT_EQ(r.applied.download_kbps, 20000.0);
    EXPECT_LT(r.avg_speed_kbps, 20000.0 + 1e-9);
  }
  // Latency jitter still moves the speeds a little.
  EXPECT_NE(rows[0].rtt_ms, rows[1].rtt_ms);
}

TEST(Campaign, DeterministicAndMatchesFluidModel) {
  const auto model = KdeModel::fit(synth::lognormal_profile(500, 12));
  const auto a = run_download_campaign(model_source(model), 50, 1'000'000, 8);
  const auto b = run_download_campaign(model_source(model), 50, 1'000'000, 8);
  std::ostringstream sa, sb;
  write_campaign_csv(sa, a, 8);
  write_campaign_csv(sb, b, 8);
  EXPECT_EQ(sa.str(), sb.str());
  EXPECT_TRUE(sa.str().starts_with("# ranemu 0.1.0 seed=8\n"
                                   "download,download_kbps,upload_kbps,latency_ms,rtt_ms,duration_s,"
                                   "avg_speed_kbps\n"));
  for (const auto& r : a) {
    const auto expect = simulate_download(
        {r.applied.download_kbps, r.applied.upload_kbps, r.applied.latency_ms, 2}, 1'000'000);
    EXPECT_DOUBLE_EQ(r.avg_speed_kbps, expect.avg_speed_kbps);
    EXPECT_EQ(r.rtt_ms, r.applied.latency_ms);
  }
}

TEST(Campaign, FluidSpeeds) {
  const std::vector<NetworkSample> s = {{20000, 5000, 40}, {20000, 5000, 0}};
  const auto v = fluid_speeds(s, 10'000'000);
  EXPECT_NEAR(v[0], 19607.843137254902, 1e-6);
  EXPECT_DOUBLE_EQ(v[1], 20000.0);
}
