#include "ranemu/backends.hpp"

#include <sys/wait.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <utility>

#include "ranemu/error.hpp"

namespace ranemu {

namespace {

void validate(const EmulationParams& p) {
  if (!(p.download_kbps > 0.0) || !(p.upload_kbps > 0.0) || !std::isfinite(p.download_kbps) ||
      !std::isfinite(p.upload_kbps)) {
    throw ParameterError("shaping needs positive finite bandwidths");
  }
  if (!(p.latency_ms >= 0.0) || !std::isfinite(p.latency_ms)) {
    throw ParameterError("shaping needs a nonnegative finite latency");
  }
}

std::string netem_delay(double delay_ms, std::optional<double> std_ms) {
  std::string s = "netem delay " + format_ms(delay_ms) + "ms";
  if (std_ms) s += " " + format_ms(*std_ms) + "ms distribution normal";
  return s;
}

}  // namespace

std::string default_ifb_name() {
  const char* env = std::getenv("ERRANT_IFB");
  if (env != nullptr && *env != '\0') return env;
  return "ifb0";
}

std::string format_ms(double ms) {
  const double rounded = std::round(ms * 1000.0) / 1000.0;
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3f", rounded == 0.0 ? 0.0 : rounded);
  std::string s(buf);
  while (s.back() == '0') s.pop_back();
  if (s.back() == '.') s.pop_back();
  return s;
}

long long round_kbit(double kbps) {
  return std::max(1LL, std::llround(kbps));
}

std::vector<std::string> render_commands(const EmulationParams& params, const Interfaces& ifaces,
                                         std::optional<double> latency_std_ms, LatencyMode mode) {
  validate(params);
  if (ifaces.egress.empty() || ifaces.ifb.empty()) {
    throw ParameterError("render_commands: interface names must be non-empty");
  }
  const std::string& eg = ifaces.egress;
  const std::string& ifb = ifaces.ifb;

  std::string egress_netem;
  std::string ingress_netem;
  if (mode == LatencyMode::Split) {
    std::optional<double> half_std;
    if (latency_std_ms) half_std = *latency_std_ms / 2.0;
    egress_netem = netem_delay(params.latency_ms / 2.0, half_std);
    ingress_netem = egress_netem;
  } else {
    egress_netem = netem_delay(params.latency_ms, latency_std_ms);
    ingress_netem = netem_delay(0.0, std::nullopt);
  }

  const auto up = std::to_string(round_kbit(params.upload_kbps));
  const auto down = std::to_string(round_kbit(params.download_kbps));
  return {
      "ip link set dev " + ifb + " up",
      "tc qdisc add dev " + eg + " handle ffff: ingress",
      "tc filter add dev " + eg + " parent ffff: matchall action mirred egress redirect dev " + ifb,
      "tc qdisc add dev " + eg + " root handle 1: htb default 1",
      "tc class add dev " + eg + " parent 1: classid 1:1 htb rate " + up + "kbit",
      "tc qdisc add dev " + eg + " parent 1:1 handle 10: " + egress_netem,
      "tc qdisc add dev " + ifb + " root handle 1: htb default 1",
      "tc class add dev " + ifb + " parent 1: classid 1:1 htb rate " + down + "kbit",
      "tc qdisc add dev " + ifb + " parent 1:1 handle 10: " + ingress_netem,
  };
}

std::vector<std::string> render_clear(const Interfaces& ifaces) {
  return {
      "tc qdisc del dev " + ifaces.egress + " root",
      "tc qdisc del dev " + ifaces.egress + " ingress",
      "tc qdisc del dev " + ifaces.ifb + " root",
  };
}

void ShellRunner::run(const std::string& command) {
  std::fflush(nullptr);
  const int status = std::system(command.c_str());
  if (status == -1) throw BackendError("could not spawn shell for: " + command);
  if (!WIFEXITED(status) || WEXITSTATUS(status) != 0) {
    const int code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    throw BackendError("command failed (exit " + std::to_string(code) + "): " + command);
  }
}

TcBackend::TcBackend(std::shared_ptr<CommandRunner> runner, Interfaces ifaces, LatencyMode mode)
    : runner_(std::move(runner)), ifaces_(std::move(ifaces)), mode_(mode) {
  if (!runner_) throw ParameterError("TcBackend needs a command runner");
  if (ifaces_.egress.empty() || ifaces_.ifb.empty()) {
    throw ParameterError("TcBackend: interface names must be non-empty");
  }
}

void TcBackend::apply(const EmulationParams& params) {
  install(render_commands(params, ifaces_, std::nullopt, mode_));
}

void TcBackend::apply_gaussian_latency(const EmulationParams& params, double latency_mean_ms,
                                       double latency_std_ms) {
  if (!(latency_std_ms >= 0.0)) throw ParameterError("latency std must be nonnegative");
  EmulationParams p = params;
  p.latency_ms = latency_mean_ms;
  install(render_commands(p, ifaces_, latency_std_ms, mode_));
}

void TcBackend::clear() {
  run_clear();
  configured_ = false;
}

std::vector<std::string> TcBackend::take_commands() {
  return std::exchange(pending_, {});
}

void TcBackend::install(const std::vector<std::string>& commands) {
  if (configured_) run_clear();
  configured_ = false;
  for (const auto& cmd : commands) {
    pending_.push_back(cmd);
    try {
      runner_->run(cmd);
    } catch (const BackendError&) {
      run_clear();
      throw;
    }
  }
  configured_ = true;
}

void TcBackend::run_clear() {
  for (const auto& cmd : render_clear(ifaces_)) {
    pending_.push_back(cmd);
    try {
      runner_->run(cmd);
    } catch (const BackendError&) {
      // Absent qdiscs make `tc qdisc del` fail; that is the desired end state.
    }
  }
}

DryRunBackend::DryRunBackend(Interfaces ifaces, LatencyMode mode)
    : DryRunBackend(std::make_shared<RecordingRunner>(), std::move(ifaces), mode) {}

DryRunBackend::DryRunBackend(std::shared_ptr<RecordingRunner> recorder, Interfaces ifaces,
                             LatencyMode mode)
    : TcBackend(recorder, std::move(ifaces), mode), recorder_(std::move(recorder)) {}

DownloadResult simulate_download(const SimulatedLink& link, std::uint64_t size_bytes) {
  if (size_bytes == 0) throw ParameterError("simulate_download: size must be positive");
  if (!(link.download_kbps > 0.0)) throw ParameterError("simulate_download: rate must be positive");
  if (!(link.rtt_ms >= 0.0)) throw ParameterError("simulate_download: rtt must be nonnegative");
  if (link.setup_rtts < 0) throw ParameterError("simulate_download: setup_rtts must be >= 0");

  const double kbits = static_cast<double>(size_bytes) * 8.0 / 1000.0;
  const double duration = link.setup_rtts * (link.rtt_ms / 1000.0) + kbits / link.download_kbps;
  return {duration, kbits / duration};
}

SimulatedBackend::SimulatedBackend(int setup_rtts, std::uint64_t latency_seed)
    : setup_rtts_(setup_rtts), rng_(latency_seed) {
  if (setup_rtts < 0) throw ParameterError("setup_rtts must be >= 0");
}

void SimulatedBackend::apply(const EmulationParams& params) {
  validate(params);
  link_ = SimulatedLink{params.download_kbps, params.upload_kbps, params.latency_ms, setup_rtts_};
  latency_std_ms_ = 0.0;
}

void SimulatedBackend::apply_gaussian_latency(const EmulationParams& params,
                                              double latency_mean_ms, double latency_std_ms) {
  if (!(latency_std_ms >= 0.0)) throw ParameterError("latency std must be nonnegative");
  EmulationParams p = params;
  p.latency_ms = latency_mean_ms;
  apply(p);
  latency_std_ms_ = latency_std_ms;
}

void SimulatedBackend::clear() {
  link_.reset();
  latency_std_ms_ = 0.0;
}

DownloadResult SimulatedBackend::download(std::uint64_t size_bytes) {
  if (!link_) throw BackendError("simulated link is not configured");
  SimulatedLink link = *link_;
  if (latency_std_ms_ > 0.0) {
    std::normal_distribution<double> jitter(link.rtt_ms, latency_std_ms_);
    link.rtt_ms = std::max(0.0, jitter(rng_));
  }
  last_rtt_ms_ = link.rtt_ms;
  return simulate_download(link, size_bytes);
}

}  // namespace ranemu
