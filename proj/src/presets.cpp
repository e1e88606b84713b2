#include <algorithm>
#include <array>
#include <cctype>
#include <string>

#include "ranemu/emulator.hpp"
#include "ranemu/error.hpp"

namespace ranemu {

namespace {

// Default profiles shipped by common testing tools (kbit/s, kbit/s, ms).
// Cells the tools leave undefined are absent.
const std::array<StaticPreset, 17> kCatalog = {{
    {"chrome", "3G", 750, 250, 100, {}},
    {"chrome", "3G-fast", 1000, 750, 40, {}},
    {"chrome", "4G", 4000, 3000, 20, {}},
    {"webpagetest", "3G", 1600, 768, 300, {}},
    {"webpagetest", "3G-slow", 400, 400, 400, {}},
    {"webpagetest", "3G-fast", 1600, 768, 150, {}},
    {"webpagetest", "4G", 12000, 12000, 70, {}},
    {"browsertime", "3G", 1600, 768, 300, {}},
    {"browsertime", "3G-slow", 780, 330, 200, {}},
    {"browsertime", "3G-fast", 1600, 768, 150, {}},
    {"atc", "3G", 780, 330, 200, {}},
    {"atc", "3G-slow", 850, 420, 190, {}},
    {"android", "3G", 14000, 5760, 0, {}},
    {"android", "3G-slow", 384, 384, 117.5, std::pair{35.0, 200.0}},
    {"android", "4G", 173000, 58000, 0, {}},
    {"nlc", "3G", 780, 330, 100, {}},
    {"nlc", "4G", 51200, 10240, 65, {}},
}};

// "3G Slow", "3g_slow" and "3G-slow" all fold to "3g-slow".
std::string fold(std::string_view s) {
  std::string out;
  for (unsigned char c : s) {
    if (c == ' ' || c == '_') c = '-';
    out += static_cast<char>(std::tolower(c));
  }
  if (out == "android-emulator") out = "android";
  if (out == "network-link-conditioner") out = "nlc";
  return out;
}

}  // namespace

std::span<const StaticPreset> preset_catalog() { return kCatalog; }

StaticPreset static_preset(std::string_view tool, std::string_view profile_name) {
  const auto t = fold(tool);
  const auto p = fold(profile_name);
  const auto it = std::find_if(kCatalog.begin(), kCatalog.end(), [&](const StaticPreset& s) {
    return fold(s.tool) == t && fold(s.name) == p;
  });
  if (it != kCatalog.end()) return *it;

  std::string available;
  for (const auto& s : kCatalog) {
    if (!available.empty()) available += ", ";
    available += s.tool + ":" + s.name;
  }
  throw LookupError("unknown preset '" + std::string(tool) + ":" + std::string(profile_name) +
                    "'; available: " + available);
}

}  // namespace ranemu
