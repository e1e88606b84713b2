#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ranemu/types.hpp"

namespace ranemu {

enum class Rat { G3, G4 };

std::string_view rat_name(Rat rat);  // "3G" / "4G"
std::optional<Rat> parse_rat(std::string_view text);

enum class SignalQuality { Bad, Ordinary, Good };

std::string_view quality_name(SignalQuality q);  // "bad" / "ordinary" / "good"
std::optional<SignalQuality> parse_quality(std::string_view text);

struct SpeedTestRecord {
  std::int64_t timestamp = 0;  // seconds since epoch, UTC
  std::string country;         // lower-cased, trimmed
  std::string op;              // operator name, lower-cased, trimmed
  Rat rat = Rat::G4;
  double rssi = 0.0;           // dB, <= 0
  double download_kbps = 0.0;
  double upload_kbps = 0.0;
  double latency_ms = 0.0;

  NetworkSample sample() const { return {download_kbps, upload_kbps, latency_ms}; }
};

struct RejectedRow {
  std::size_t line = 0;             // 1-based line number in the source
  std::vector<std::string> fields;  // raw cells as read
  std::string reason;
};

// Header names for each logical column. Defaults to the canonical layout
// `timestamp,country,operator,rat,rssi,download_kbps,upload_kbps,latency_ms`.
struct CsvSchema {
  std::string timestamp = "timestamp";
  std::string country = "country";
  std::string op = "operator";
  std::string rat = "rat";
  std::string rssi = "rssi";
  std::string download_kbps = "download_kbps";
  std::string upload_kbps = "upload_kbps";
  std::string latency_ms = "latency_ms";
};

struct ParseResult {
  std::vector<std::string> header;
  std::vector<SpeedTestRecord> records;
  std::vector<RejectedRow> rejected;
};

// Splits one CSV line. Supports double-quoted cells with "" escapes.
std::vector<std::string> split_csv_line(std::string_view line);

// Reads a speed-test CSV. Throws FormatError when the header is missing or a
// required column is absent; every data row ends up either in `records` or in
// `rejected`. Blank lines are not rows.
ParseResult parse_speedtests(std::istream& source, const CsvSchema& schema = {});

// Writes rejected rows as CSV: the original header plus a trailing `reason`.
void write_rejects(std::ostream& out, const std::vector<std::string>& header,
                   const std::vector<RejectedRow>& rejected);

// Signal-quality bins per RAT (dB):
//   3G: Bad <= -100 < Ordinary <= -85 < Good
//   4G: Bad <=  -85 < Ordinary <= -75 < Good
SignalQuality bin_signal(Rat rat, double rssi);

}  // namespace ranemu
