#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <random>
#include <string_view>

namespace ranemu {

inline constexpr std::string_view kVersion = "0.1.0";

// The three modeled network dimensions, in storage order.
enum class Dimension { Download = 0, Upload = 1, Latency = 2 };

inline constexpr std::array<Dimension, 3> kDimensions = {
    Dimension::Download, Dimension::Upload, Dimension::Latency};

constexpr std::string_view dimension_name(Dimension d) {
  switch (d) {
    case Dimension::Download: return "download_kbps";
    case Dimension::Upload: return "upload_kbps";
    case Dimension::Latency: return "latency_ms";
  }
  return "?";
}

// One (B_D, B_U, L) tuple. Bandwidths in kbit/s, latency (RTT) in ms.
struct NetworkSample {
  double download_kbps = 0.0;
  double upload_kbps = 0.0;
  double latency_ms = 0.0;

  double operator[](Dimension d) const {
    switch (d) {
      case Dimension::Download: return download_kbps;
      case Dimension::Upload: return upload_kbps;
      case Dimension::Latency: return latency_ms;
    }
    return 0.0;
  }

  bool all_positive() const {
    return download_kbps > 0.0 && upload_kbps > 0.0 && latency_ms > 0.0;
  }

  friend bool operator==(const NetworkSample&, const NetworkSample&) = default;
};

// Parameters ready to hand to a shaping backend.
using EmulationParams = NetworkSample;

using Rng = std::mt19937_64;

// Independent substream for (seed, stream ids...). Lets repetitions run in any
// order, or in parallel, without changing results.
template <typename... Ids>
Rng derive_rng(std::uint64_t seed, Ids... ids) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed & 0xffffffffu),
                    static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(ids)...};
  return Rng(seq);
}

}  // namespace ranemu
