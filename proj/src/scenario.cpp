#include <charconv>
#include <cmath>
#include <istream>
#include <string>

#include "ranemu/emulator.hpp"
#include "ranemu/error.hpp"

namespace ranemu {

namespace {

std::string_view trim(std::string_view s) {
  constexpr std::string_view ws = " \t\r\n";
  const auto first = s.find_first_not_of(ws);
  if (first == std::string_view::npos) return {};
  return s.substr(first, s.find_last_not_of(ws) - first + 1);
}

std::optional<double> positive_seconds(std::string_view s) {
  s = trim(s);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v) ||
      v <= 0.0) {
    return std::nullopt;
  }
  return v;
}

}  // namespace

Scenario parse_scenario(std::istream& in) {
  Scenario scenario;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = raw;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    line = trim(line);
    if (line.empty()) continue;

    const auto fail = [&](const std::string& why) {
      return FormatError("scenario line " + std::to_string(line_no) + ": " + why);
    };
    const auto c1 = line.find(',');
    const auto c2 = c1 == std::string_view::npos ? c1 : line.find(',', c1 + 1);
    if (c2 == std::string_view::npos || line.find(',', c2 + 1) != std::string_view::npos) {
      throw fail("expected <duration_s>,<profile_key>,<fixed|periodic:<seconds>>");
    }

    ScenarioStep step;
    const auto duration = positive_seconds(line.substr(0, c1));
    if (!duration) throw fail("duration must be a positive number of seconds");
    step.duration_s = *duration;

    try {
      step.profile = ProfileKey::parse(trim(line.substr(c1 + 1, c2 - c1 - 1)));
    } catch (const FormatError& e) {
      throw fail(e.what());
    }

    const auto mode = trim(line.substr(c2 + 1));
    constexpr std::string_view periodic = "periodic:";
    if (mode == "fixed") {
      // default
    } else if (mode.substr(0, periodic.size()) == periodic) {
      const auto period = positive_seconds(mode.substr(periodic.size()));
      if (!period) throw fail("period must be a positive number of seconds");
      step.period_s = *period;
    } else {
      throw fail("mode must be 'fixed' or 'periodic:<seconds>'");
    }
    scenario.steps.push_back(std::move(step));
  }
  if (scenario.steps.empty()) throw FormatError("scenario has no steps");
  return scenario;
}

void check_scenario(const Scenario& scenario, const ModelBundle& bundle) {
  if (scenario.steps.empty()) throw ParameterError("scenario has no steps");
  for (std::size_t i = 0; i < scenario.steps.size(); ++i) {
    const auto& step = scenario.steps[i];
    if (!bundle.models.contains(step.profile)) {
      throw LookupError("scenario step " + std::to_string(i + 1) + ": no model for profile " +
                        step.profile.to_string());
    }
  }
}

}  // namespace ranemu
