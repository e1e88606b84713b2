#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "ranemu/types.hpp"

namespace ranemu {

// Where the modeled RTT is imposed. Split puts L/2 on egress and L/2 on the
// ifb (ingress) side; AllEgress puts the whole L on egress.
enum class LatencyMode { Split, AllEgress };

struct Interfaces {
  std::string egress;
  std::string ifb = "ifb0";
};

// ifb device name: $ERRANT_IFB when set and non-empty, else "ifb0".
std::string default_ifb_name();

// Formats a millisecond value for tc: at most three decimals, trailing zeros
// trimmed ("20", "22.5", "0.125").
std::string format_ms(double ms);

// Rounds a bandwidth to whole kbit (at least 1).
long long round_kbit(double kbps);

// Full shaping rule set for one parameter tuple. When `latency_std_ms` is set
// the netem lines carry a normal delay distribution.
std::vector<std::string> render_commands(const EmulationParams& params, const Interfaces& ifaces,
                                         std::optional<double> latency_std_ms = std::nullopt,
                                         LatencyMode mode = LatencyMode::Split);

// Removes everything render_commands installs.
std::vector<std::string> render_clear(const Interfaces& ifaces);

// Executes shell command lines. Implementations throw BackendError on failure.
class CommandRunner {
 public:
  virtual ~CommandRunner() = default;
  virtual void run(const std::string& command) = 0;
};

// Runs through /bin/sh; a nonzero exit raises BackendError with the command.
class ShellRunner : public CommandRunner {
 public:
  void run(const std::string& command) override;
};

// Records commands without executing them.
class RecordingRunner : public CommandRunner {
 public:
  void run(const std::string& command) override { log_.push_back(command); }
  const std::vector<std::string>& log() const { return log_; }

 private:
  std::vector<std::string> log_;
};

// Applies or removes shaping. A backend has a single owner at a time.
class ShapingBackend {
 public:
  virtual ~ShapingBackend() = default;

  // Replaces any active configuration.
  virtual void apply(const EmulationParams& params) = 0;
  // As apply, with latency drawn from N(latency_mean_ms, latency_std_ms).
  // params.latency_ms is ignored.
  virtual void apply_gaussian_latency(const EmulationParams& params, double latency_mean_ms,
                                      double latency_std_ms) = 0;
  // Idempotent.
  virtual void clear() = 0;

  virtual bool configured() const = 0;

  // Command lines issued since the previous call (empty for backends that
  // do not render commands).
  virtual std::vector<std::string> take_commands() { return {}; }
};

// Shapes a real interface with tc/ip through a CommandRunner.
class TcBackend : public ShapingBackend {
 public:
  TcBackend(std::shared_ptr<CommandRunner> runner, Interfaces ifaces,
            LatencyMode mode = LatencyMode::Split);

  void apply(const EmulationParams& params) override;
  void apply_gaussian_latency(const EmulationParams& params, double latency_mean_ms,
                              double latency_std_ms) override;
  void clear() override;
  bool configured() const override { return configured_; }
  std::vector<std::string> take_commands() override;

  const Interfaces& interfaces() const { return ifaces_; }

 private:
  void install(const std::vector<std::string>& commands);
  void run_clear();

  std::shared_ptr<CommandRunner> runner_;
  Interfaces ifaces_;
  LatencyMode mode_;
  bool configured_ = false;
  std::vector<std::string> pending_;
};

// TcBackend over a RecordingRunner: renders everything, executes nothing.
class DryRunBackend : public TcBackend {
 public:
  explicit DryRunBackend(Interfaces ifaces, LatencyMode mode = LatencyMode::Split);
  const std::vector<std::string>& log() const { return recorder_->log(); }

 private:
  DryRunBackend(std::shared_ptr<RecordingRunner> recorder, Interfaces ifaces, LatencyMode mode);
  std::shared_ptr<RecordingRunner> recorder_;
};

// Desk-scale link: a fluid model of a rate-limited path.
struct SimulatedLink {
  double download_kbps = 0.0;
  double upload_kbps = 0.0;
  double rtt_ms = 0.0;
  int setup_rtts = 2;
};

struct DownloadResult {
  double duration_s = 0.0;
  double avg_speed_kbps = 0.0;
};

// duration = setup_rtts * rtt + size_bits / rate; avg_speed = size_bits / duration.
// Throws ParameterError for size == 0, nonpositive rate, or negative rtt.
DownloadResult simulate_download(const SimulatedLink& link, std::uint64_t size_bytes);

// Backend that holds a SimulatedLink instead of touching the host. Gaussian
// latency is realized per download from the backend's own random stream,
// clamped at zero like netem does.
class SimulatedBackend : public ShapingBackend {
 public:
  explicit SimulatedBackend(int setup_rtts = 2, std::uint64_t latency_seed = 0);

  void apply(const EmulationParams& params) override;
  void apply_gaussian_latency(const EmulationParams& params, double latency_mean_ms,
                              double latency_std_ms) override;
  void clear() override;
  bool configured() const override { return link_.has_value(); }

  // Throws BackendError when nothing is configured.
  DownloadResult download(std::uint64_t size_bytes);
  // The link the next download will see, before latency jitter.
  const std::optional<SimulatedLink>& link() const { return link_; }
  // RTT used by the most recent download.
  double last_rtt_ms() const { return last_rtt_ms_; }

 private:
  int setup_rtts_;
  std::optional<SimulatedLink> link_;
  double latency_std_ms_ = 0.0;
  double last_rtt_ms_ = 0.0;
  Rng rng_;
};

}  // namespace ranemu
