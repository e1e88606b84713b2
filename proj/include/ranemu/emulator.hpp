#pragma once

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ranemu/backends.hpp"
#include "ranemu/kde.hpp"
#include "ranemu/model_store.hpp"
#include "ranemu/profiles.hpp"

namespace ranemu {

// Apply events of a periodic run may drift this far from their schedule.
inline constexpr double kSchedulerToleranceS = 0.050;

// ---------------------------------------------------------------------------
// Static baselines

// Default profile of a third-party emulation tool. Bandwidths in kbit/s.
struct StaticPreset {
  std::string tool;
  std::string name;
  double download_kbps = 0.0;
  double upload_kbps = 0.0;
  double latency_ms = 0.0;
  // Set when the tool documents a latency range rather than a value;
  // latency_ms is then its midpoint.
  std::optional<std::pair<double, double>> latency_range_ms;
};

std::span<const StaticPreset> preset_catalog();

// Case-insensitive lookup ("chrome", "3G"). LookupError lists the catalog.
StaticPreset static_preset(std::string_view tool, std::string_view profile_name);

// Mean bandwidths held constant, latency as a Gaussian (mean, sample std).
struct SimpleParams {
  EmulationParams params;  // latency_ms holds the mean
  double latency_std_ms = 0.0;
};

// Throws ParameterError on an empty sample set.
SimpleParams simple_params(std::span<const NetworkSample> samples);
inline SimpleParams simple_params(const Profile& p) { return simple_params(p.samples); }

// ---------------------------------------------------------------------------
// Parameter sources

struct ShapingAction {
  EmulationParams params;
  std::optional<double> latency_std_ms;  // set: Gaussian latency around params.latency_ms
};

using ParamSource = std::function<ShapingAction(Rng&)>;

// One draw from the model.
EmulationParams sample_params(const KdeModel& model, Rng& rng);

// The model must outlive the returned source.
ParamSource model_source(const KdeModel& model);
ParamSource simple_source(const SimpleParams& simple);
ParamSource preset_source(const StaticPreset& preset);

// ---------------------------------------------------------------------------
// Clocks (seconds since an arbitrary origin)

class Clock {
 public:
  virtual ~Clock() = default;
  virtual double now() = 0;
  virtual void sleep_until(double t) = 0;
};

// Time only moves when slept on.
class VirtualClock : public Clock {
 public:
  double now() override { return now_; }
  void sleep_until(double t) override { now_ = std::max(now_, t); }

 private:
  double now_ = 0.0;
};

class SteadyClock : public Clock {
 public:
  double now() override;
  void sleep_until(double t) override;

 private:
  std::chrono::steady_clock::time_point origin_ = std::chrono::steady_clock::now();
};

// ---------------------------------------------------------------------------
// Runs

enum class RunAction { Apply, Clear };

struct RunEvent {
  double time_s = 0.0;  // relative to run start
  RunAction action = RunAction::Apply;
  std::size_t segment = 0;
  std::string label;  // profile key or preset name of the segment
  std::optional<EmulationParams> params;
  std::optional<double> latency_std_ms;
  std::vector<std::string> commands;  // rendered by the backend, if any
};

struct RunReport {
  std::optional<std::uint64_t> seed;
  std::vector<RunEvent> events;

  std::size_t count(RunAction action) const;
  // Structured text: {"seed", "tool_version", "events": [...]}.
  std::string to_json() const;
};

// Sample once, apply, hold for `duration_s`, clear.
RunReport run_fixed(const ParamSource& source, ShapingBackend& backend, double duration_s,
                    Rng& rng, Clock& clock, std::string label = {});
RunReport run_fixed(const KdeModel& model, ShapingBackend& backend, double duration_s, Rng& rng,
                    Clock& clock);

// Fresh sample applied at t = 0, period, 2*period, ... < duration; final clear
// at duration. Requires 0 < period <= duration.
RunReport run_periodic(const ParamSource& source, ShapingBackend& backend, double duration_s,
                       double period_s, Rng& rng, Clock& clock, std::string label = {});
RunReport run_periodic(const KdeModel& model, ShapingBackend& backend, double duration_s,
                       double period_s, Rng& rng, Clock& clock);

// ---------------------------------------------------------------------------
// Trace-driven scenarios

struct ScenarioStep {
  double duration_s = 0.0;
  ProfileKey profile;
  std::optional<double> period_s;  // unset: fixed
};

struct Scenario {
  std::vector<ScenarioStep> steps;
};

// One step per line: `<duration_s>,<profile_key>,<fixed|periodic:<seconds>>`.
// `#` starts a comment. Errors are FormatError with the line number.
Scenario parse_scenario(std::istream& in);

// Throws LookupError naming the first profile missing from the bundle.
void check_scenario(const Scenario& scenario, const ModelBundle& bundle);

// Steps run back to back without clearing in between (each apply replaces the
// previous rules); one clear at the end. All profiles are resolved before the
// backend is touched.
RunReport run_trace(const Scenario& scenario, const ModelBundle& bundle, ShapingBackend& backend,
                    Rng& rng, Clock& clock);

}  // namespace ranemu
