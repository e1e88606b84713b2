#include "ranemu/emulator.hpp"

#include <cmath>
#include <thread>

#include <json.hpp>

#include "ranemu/error.hpp"

namespace ranemu {

SimpleParams simple_params(std::span<const NetworkSample> samples) {
  if (samples.empty()) throw ParameterError("simple_params: empty profile");
  const auto st = profile_stats(samples);
  return {{st.download.mean, st.upload.mean, st.latency.mean}, st.latency.stddev};
}

EmulationParams sample_params(const KdeModel& model, Rng& rng) {
  return model.sample(rng, 1).front();
}

ParamSource model_source(const KdeModel& model) {
  return [&model](Rng& rng) { return ShapingAction{sample_params(model, rng), std::nullopt}; };
}

ParamSource simple_source(const SimpleParams& simple) {
  return [simple](Rng&) { return ShapingAction{simple.params, simple.latency_std_ms}; };
}

ParamSource preset_source(const StaticPreset& preset) {
  const EmulationParams p{preset.download_kbps, preset.upload_kbps, preset.latency_ms};
  return [p](Rng&) { return ShapingAction{p, std::nullopt}; };
}

double SteadyClock::now() {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - origin_).count();
}

void SteadyClock::sleep_until(double t) {
  const auto target =
      origin_ + std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                    std::chrono::duration<double>(t));
  std::this_thread::sleep_until(target);
}

std::size_t RunReport::count(RunAction action) const {
  return static_cast<std::size_t>(std::count_if(
      events.begin(), events.end(), [action](const RunEvent& e) { return e.action == action; }));
}

std::string RunReport::to_json() const {
  using nlohmann::ordered_json;
  ordered_json doc;
  doc["tool_version"] = std::string(kVersion);
  doc["seed"] = seed ? ordered_json(*seed) : ordered_json(nullptr);
  ordered_json events_json = ordered_json::array();
  for (const auto& e : events) {
    ordered_json ev;
    ev["time_s"] = e.time_s;
    ev["action"] = e.action == RunAction::Apply ? "apply" : "clear";
    ev["segment"] = e.segment;
    ev["label"] = e.label;
    if (e.params) {
      ev["download_kbps"] = e.params->download_kbps;
      ev["upload_kbps"] = e.params->upload_kbps;
      ev["latency_ms"] = e.params->latency_ms;
    }
    if (e.latency_std_ms) ev["latency_std_ms"] = *e.latency_std_ms;
    if (!e.commands.empty()) ev["commands"] = e.commands;
    events_json.push_back(std::move(ev));
  }
  doc["events"] = std::move(events_json);
  return doc.dump(2) + "\n";
}

namespace {

struct Segment {
  double duration_s;
  std::optional<double> period_s;
  ParamSource source;
  std::string label;
};

std::size_t applies_in(const Segment& seg) {
  if (!seg.period_s) return 1;
  // k * period < duration, with slack for period values that are not exact in binary.
  const double ratio = seg.duration_s / *seg.period_s;
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(ratio - 1e-9)));
}

void check_timing(double duration_s, std::optional<double> period_s) {
  if (!std::isfinite(duration_s) || duration_s <= 0.0) {
    throw ParameterError("run duration must be positive");
  }
  if (period_s) {
    if (!std::isfinite(*period_s) || *period_s <= 0.0) {
      throw ParameterError("resampling period must be positive");
    }
    if (*period_s > duration_s) throw ParameterError("resampling period exceeds run duration");
  }
}

RunReport run_segments(const std::vector<Segment>& segments, ShapingBackend& backend, Rng& rng,
                       Clock& clock) {
  RunReport report;
  const double start = clock.now();

  auto record = [&](RunAction action, std::size_t seg, const std::string& label,
                    const std::optional<ShapingAction>& applied) {
    RunEvent e;
    e.time_s = clock.now() - start;
    e.action = action;
    e.segment = seg;
    e.label = label;
    if (applied) {
      e.params = applied->params;
      e.latency_std_ms = applied->latency_std_ms;
    }
    e.commands = backend.take_commands();
    report.events.push_back(std::move(e));
  };

  try {
    double offset = 0.0;
    for (std::size_t i = 0; i < segments.size(); ++i) {
      const auto& seg = segments[i];
      const std::size_t applies = applies_in(seg);
      for (std::size_t k = 0; k < applies; ++k) {
        const double at = offset + static_cast<double>(k) * seg.period_s.value_or(0.0);
        clock.sleep_until(start + at);
        const ShapingAction action = seg.source(rng);
        if (action.latency_std_ms) {
          backend.apply_gaussian_latency(action.params, action.params.latency_ms,
                                         *action.latency_std_ms);
        } else {
          backend.apply(action.params);
        }
        record(RunAction::Apply, i, seg.label, action);
      }
      offset += seg.duration_s;
    }
    clock.sleep_until(start + offset);
    backend.clear();
    record(RunAction::Clear, segments.empty() ? 0 : segments.size() - 1,
           segments.empty() ? std::string{} : segments.back().label, std::nullopt);
  } catch (...) {
    try {
      backend.clear();
    } catch (...) {
      // The original failure is the one worth reporting.
    }
    throw;
  }
  return report;
}

}  // namespace

RunReport run_fixed(const ParamSource& source, ShapingBackend& backend, double duration_s,
                    Rng& rng, Clock& clock, std::string label) {
  check_timing(duration_s, std::nullopt);
  return run_segments({{duration_s, std::nullopt, source, std::move(label)}}, backend, rng, clock);
}

RunReport run_fixed(const KdeModel& model, ShapingBackend& backend, double duration_s, Rng& rng,
                    Clock& clock) {
  return run_fixed(model_source(model), backend, duration_s, rng, clock);
}

RunReport run_periodic(const ParamSource& source, ShapingBackend& backend, double duration_s,
                       double period_s, Rng& rng, Clock& clock, std::string label) {
  check_timing(duration_s, period_s);
  return run_segments({{duration_s, period_s, source, std::move(label)}}, backend, rng, clock);
}

RunReport run_periodic(const KdeModel& model, ShapingBackend& backend, double duration_s,
                       double period_s, Rng& rng, Clock& clock) {
  return run_periodic(model_source(model), backend, duration_s, period_s, rng, clock);
}

RunReport run_trace(const Scenario& scenario, const ModelBundle& bundle, ShapingBackend& backend,
                    Rng& rng, Clock& clock) {
  check_scenario(scenario, bundle);
  std::vector<Segment> segments;
  for (const auto& step : scenario.steps) {
    check_timing(step.duration_s, step.period_s);
    segments.push_back({step.duration_s, step.period_s, model_source(bundle.at(step.profile)),
                        step.profile.to_string()});
  }
  return run_segments(segments, backend, rng, clock);
}

}  // namespace ranemu
