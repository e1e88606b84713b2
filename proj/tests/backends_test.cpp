#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "ranemu/backends.hpp"
#include "ranemu/error.hpp"
#include "tc_state.hpp"

using namespace ranemu;

namespace {

std::string golden(const std::string& name) {
  std::ifstream in(std::string(RANEMU_GOLDEN_DIR) + "/" + name, std::ios::binary);
  EXPECT_TRUE(in) << name;
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::string joined(const std::vector<std::string>& lines) {
  std::string s;
  for (const auto& l : lines) s += l + "\n";
  return s;
}

// Fails the n-th command it is asked to run (1-based), records everything.
class FlakyRunner : public CommandRunner {
 public:
  explicit FlakyRunner(int fail_at) : fail_at_(fail_at) {}
  void run(const std::string& command) override {
    log.push_back(command);
    if (++calls_ == fail_at_) throw BackendError("injected failure: " + command);
  }
  std::vector<std::string> log;

 private:
  int fail_at_;
  int calls_ = 0;
};

}  // namespace

TEST(Render, ReferenceExample) {
  const auto lines = render_commands({20000, 5000, 40}, {"eth0", "ifb0"});
  ASSERT_EQ(lines.size(), 9u);
  EXPECT_EQ(lines[4], "tc class add dev eth0 parent 1: classid 1:1 htb rate 5000kbit");
  EXPECT_EQ(lines[5], "tc qdisc add dev eth0 parent 1:1 handle 10: netem delay 20ms");
  EXPECT_EQ(lines[8], "tc qdisc add dev ifb0 parent 1:1 handle 10: netem delay 20ms");
}

TEST(Render, GoldenFiles) {
  EXPECT_EQ(joined(render_commands({20000, 5000, 40}, {"eth0", "ifb0"})), golden("render_split.txt"));
  EXPECT_EQ(joined(render_commands({780.4, 330.5, 117.5}, {"wlan0", "ifb3"})),
            golden("render_fractional.txt"));
  EXPECT_EQ(joined(render_commands({4000, 3000, 40}, {"eth0", "ifb0"}, 10.0)),
            golden("render_gaussian.txt"));
}

TEST(Render, ClearCommands) {
  EXPECT_EQ(render_clear({"eth0", "ifb0"}),
            (std::vector<std::string>{"tc qdisc del dev eth0 root", "tc qdisc del dev eth0 ingress",
                                      "tc qdisc del dev ifb0 root"}));
}

TEST(Render, GaussianLatencyHalvesMeanAndStd) {
  const auto lines = render_commands({1000, 500, 40}, {"eth0", "ifb0"}, 10.0);
  EXPECT_TRUE(lines[5].ends_with("delay 20ms 5ms distribution normal")) << lines[5];
  EXPECT_TRUE(lines[8].ends_with("delay 20ms 5ms distribution normal")) << lines[8];
}

TEST(Render, AllEgressMode) {
  const auto lines = render_commands({1000, 500, 40}, {"eth0", "ifb0"}, 10.0, LatencyMode::AllEgress);
  EXPECT_EQ(lines[5], "tc qdisc add dev eth0 parent 1:1 handle 10: netem delay 40ms 10ms distribution normal");
  EXPECT_EQ(lines[8], "tc qdisc add dev ifb0 parent 1:1 handle 10: netem delay 0ms");
}

TEST(Render, PureAndValidated) {
  const EmulationParams p{12345.6, 789.01, 33.3333};
  EXPECT_EQ(render_commands(p, {"eth1", "ifb2"}), render_commands(p, {"eth1", "ifb2"}));
  EXPECT_THROW(render_commands({0, 1, 1}, {"eth0", "ifb0"}), ParameterError);
  EXPECT_THROW(render_commands({1, 1, -1}, {"eth0", "ifb0"}), ParameterError);
  EXPECT_THROW(render_commands({1, 1, 1}, {"", "ifb0"}), ParameterError);
}

TEST(Render, NumberFormatting) {
  EXPECT_EQ(format_ms(20), "20");
  EXPECT_EQ(format_ms(22.5), "22.5");
  EXPECT_EQ(format_ms(0.125), "0.125");
  EXPECT_EQ(format_ms(0.0001), "0");
  EXPECT_EQ(format_ms(1.23456), "1.235");
  EXPECT_EQ(round_kbit(0.2), 1);
  EXPECT_EQ(round_kbit(1999.5), 2000);
}

TEST(Render, IfbFromEnvironment) {
  ::setenv("ERRANT_IFB", "ifb7", 1);
  EXPECT_EQ(default_ifb_name(), "ifb7");
  ::setenv("ERRANT_IFB", "", 1);
  EXPECT_EQ(default_ifb_name(), "ifb0");
  ::unsetenv("ERRANT_IFB");
  EXPECT_EQ(default_ifb_name(), "ifb0");
}

TEST(DryRun, ReplaceSemantics) {
  DryRunBackend b({"eth0", "ifb0"});
  b.apply({20000, 5000, 40});
  b.apply({750, 250, 100});
  b.clear();
  const auto& log = b.log();
  ASSERT_EQ(log.size(), 9u + 3u + 9u + 3u);
  // The second install is preceded by the full clear sequence.
  EXPECT_EQ(std::vector<std::string>(log.begin() + 9, log.begin() + 12), render_clear({"eth0", "ifb0"}));

  synth::TcState state;
  for (std::size_t i = 0; i < 21; ++i) state.run(log[i]);
  EXPECT_EQ(state.classes("eth0"), " parent 1: classid 1:1 htb rate 250kbit");
  EXPECT_EQ(state.classes("ifb0"), " parent 1: classid 1:1 htb rate 750kbit");
  EXPECT_EQ(state.netem("ifb0"), " parent 1:1 handle 10: netem delay 50ms");
  for (std::size_t i = 21; i < log.size(); ++i) state.run(log[i]);
  EXPECT_TRUE(state.empty());
  EXPECT_FALSE(b.configured());
}

TEST(DryRun, TakeCommandsDrains) {
  DryRunBackend b({"eth0", "ifb0"});
  b.apply({1000, 500, 10});
  EXPECT_EQ(b.take_commands().size(), 9u);
  EXPECT_TRUE(b.take_commands().empty());
  b.clear();
  b.clear();
  EXPECT_EQ(b.take_commands().size(), 6u);
}

TEST(TcBackend, FailureMidInstallRollsBack) {
  auto runner = std::make_shared<FlakyRunner>(5);
  TcBackend b(runner, {"eth0", "ifb0"});
  EXPECT_THROW(b.apply({1000, 500, 10}), BackendError);
  EXPECT_FALSE(b.configured());
  ASSERT_EQ(runner->log.size(), 5u + 3u);
  EXPECT_EQ(std::vector<std::string>(runner->log.end() - 3, runner->log.end()),
            render_clear({"eth0", "ifb0"}));
}

TEST(TcBackend, ClearToleratesMissingQdiscs) {
  auto runner = std::make_shared<FlakyRunner>(1);
  TcBackend b(runner, {"eth0", "ifb0"});
  EXPECT_NO_THROW(b.clear());
  EXPECT_EQ(runner->log.size(), 3u);
}

TEST(SimulateDownload, ClosedForm) {
  const auto r = simulate_download({20000, 5000, 40, 2}, 10'000'000);
  EXPECT_NEAR(r.duration_s, 4.08, 4.08 * 1e-12);
  EXPECT_NEAR(r.avg_speed_kbps, 19607.843137254902, 1e-6);
}

TEST(SimulateDownload, ZeroRttGivesLinkRate) {
  EXPECT_DOUBLE_EQ(simulate_download({20000, 5000, 0, 2}, 10'000'000).avg_speed_kbps, 20000.0);
  EXPECT_DOUBLE_EQ(simulate_download({20000, 5000, 40, 0}, 10'000'000).avg_speed_kbps, 20000.0);
}

TEST(SimulateDownload, MonotoneInSizeAndBelowRate) {
  double prev = 0.0;
  for (std::uint64_t size = 1000; size < 10'000'000'000ULL; size *= 2) {
    const auto r = simulate_download({5000, 1000, 60, 2}, size);
    EXPECT_GT(r.avg_speed_kbps, prev);
    EXPECT_LT(r.avg_speed_kbps, 5000.0);
    prev = r.avg_speed_kbps;
  }
}

TEST(SimulateDownload, Errors) {
  EXPECT_THROW(simulate_download({20000, 5000, 40, 2}, 0), ParameterError);
  EXPECT_THROW(simulate_download({0, 5000, 40, 2}, 10), ParameterError);
  EXPECT_THROW(simulate_download({1, 5000, -1, 2}, 10), ParameterError);
}

TEST(SimulatedBackend, LinkLifecycle) {
  SimulatedBackend b;
  EXPECT_THROW(b.download(100), BackendError);
  b.apply({20000, 5000, 40});
  EXPECT_NEAR(b.download(10'000'000).duration_s, 4.08, 1e-12);
  EXPECT_EQ(b.last_rtt_ms(), 40.0);
  b.clear();
  EXPECT_FALSE(b.configured());
}

TEST(SimulatedBackend, GaussianLatencyJitterIsSeededAndClamped) {
  SimulatedBackend a(2, 9), b(2, 9);
  a.apply_gaussian_latency({20000, 5000, 0}, 5.0, 20.0);
  b.apply_gaussian_latency({20000, 5000, 0}, 5.0, 20.0);
  bool saw_zero = false;
  for (int i = 0; i < 200; ++i) {
    EXPECT_EQ(a.download(1'000'000).duration_s, b.download(1'000'000).duration_s);
    EXPECT_GE(a.last_rtt_ms(), 0.0);
    saw_zero = saw_zero || a.last_rtt_ms() == 0.0;
  }
  EXPECT_TRUE(saw_zero);
}
