#include "ranemu/ingest.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>

#include "ranemu/error.hpp"

namespace ranemu {

namespace {

std::string_view trim(std::string_view s) {
  constexpr std::string_view ws = " \t\r\n";
  const auto first = s.find_first_not_of(ws);
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(ws);
  return s.substr(first, last - first + 1);
}

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::optional<double> parse_double(std::string_view s) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  if (s.empty()) return std::nullopt;
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) {
    return std::nullopt;
  }
  return v;
}

std::optional<std::int64_t> parse_timestamp(std::string_view s) {
  s = trim(s);
  std::int64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec == std::errc() && ptr == s.data() + s.size()) return v;
  if (auto d = parse_double(s)) return static_cast<std::int64_t>(std::floor(*d));
  return std::nullopt;
}

std::string csv_escape(const std::string& cell) {
  if (cell.find_first_of(",\"\n") == std::string::npos) return cell;
  std::string out = "\"";
  for (char c : cell) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

enum Column { kTimestamp, kCountry, kOperator, kRat, kRssi, kDownload, kUpload, kLatency, kColumns };

}  // namespace

std::string_view rat_name(Rat rat) { return rat == Rat::G3 ? "3G" : "4G"; }

std::optional<Rat> parse_rat(std::string_view text) {
  const auto t = lower(trim(text));
  if (t == "3g") return Rat::G3;
  if (t == "4g") return Rat::G4;
  return std::nullopt;
}

std::string_view quality_name(SignalQuality q) {
  switch (q) {
    case SignalQuality::Bad: return "bad";
    case SignalQuality::Ordinary: return "ordinary";
    case SignalQuality::Good: return "good";
  }
  return "?";
}

std::optional<SignalQuality> parse_quality(std::string_view text) {
  const auto t = lower(trim(text));
  if (t == "bad") return SignalQuality::Bad;
  if (t == "ordinary" || t == "medium") return SignalQuality::Ordinary;
  if (t == "good") return SignalQuality::Good;
  return std::nullopt;
}

SignalQuality bin_signal(Rat rat, double rssi) {
  const double bad_max = rat == Rat::G3 ? -100.0 : -85.0;
  const double ordinary_max = rat == Rat::G3 ? -85.0 : -75.0;
  if (rssi <= bad_max) return SignalQuality::Bad;
  if (rssi <= ordinary_max) return SignalQuality::Ordinary;
  return SignalQuality::Good;
}

std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> cells;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      cells.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  cells.push_back(std::move(cur));
  return cells;
}

ParseResult parse_speedtests(std::istream& source, const CsvSchema& schema) {
  ParseResult result;
  std::string line;
  std::size_t line_no = 0;

  // Header: first non-blank line.
  while (std::getline(source, line)) {
    ++line_no;
    if (line_no == 1 && line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
    if (!trim(line).empty()) break;
  }
  if (trim(line).empty()) throw FormatError("speed-test csv: missing header row");
  if (!line.empty() && line.back() == '\r') line.pop_back();

  for (auto& cell : split_csv_line(line)) result.header.emplace_back(trim(cell));

  const std::array<const std::string*, kColumns> wanted = {
      &schema.timestamp, &schema.country, &schema.op,          &schema.rat,
      &schema.rssi,      &schema.download_kbps, &schema.upload_kbps, &schema.latency_ms};
  std::array<std::size_t, kColumns> index{};
  for (std::size_t c = 0; c < kColumns; ++c) {
    const auto it = std::find(result.header.begin(), result.header.end(), *wanted[c]);
    if (it == result.header.end()) {
      throw FormatError("speed-test csv: required column '" + *wanted[c] + "' not in header");
    }
    index[c] = static_cast<std::size_t>(it - result.header.begin());
  }

  while (std::getline(source, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;

    auto fields = split_csv_line(line);
    auto reject = [&](std::string reason) {
      result.rejected.push_back({line_no, std::move(fields), std::move(reason)});
    };
    if (fields.size() != result.header.size()) {
      reject("column count mismatch");
      continue;
    }
    auto cell = [&](Column c) { return trim(fields[index[c]]); };

    if (cell(kCountry).empty() || cell(kOperator).empty() || cell(kRat).empty() ||
        cell(kRssi).empty()) {
      reject("missing metadata");
      continue;
    }
    const auto rat = parse_rat(cell(kRat));
    if (!rat) {
      reject("unknown rat");
      continue;
    }
    const auto ts = parse_timestamp(cell(kTimestamp));
    if (!ts) {
      reject("unparseable timestamp");
      continue;
    }

    std::array<double, 4> num{};
    const std::array<Column, 4> num_cols = {kRssi, kDownload, kUpload, kLatency};
    bool ok = true;
    for (std::size_t k = 0; k < num_cols.size(); ++k) {
      const auto v = parse_double(cell(num_cols[k]));
      if (!v) {
        reject("unparseable " + *wanted[num_cols[k]]);
        ok = false;
        break;
      }
      num[k] = *v;
    }
    if (!ok) continue;

    const auto [rssi, down, up, lat] = num;
    if (rssi > 0.0) {
      reject("positive rssi");
    } else if (down <= 0.0) {
      reject("nonpositive download");
    } else if (up <= 0.0) {
      reject("nonpositive upload");
    } else if (lat <= 0.0) {
      reject("nonpositive latency");
    } else {
      result.records.push_back({*ts, lower(cell(kCountry)), lower(cell(kOperator)), *rat,
                                rssi, down, up, lat});
    }
  }
  return result;
}

void write_rejects(std::ostream& out, const std::vector<std::string>& header,
                   const std::vector<RejectedRow>& rejected) {
  for (const auto& h : header) out << csv_escape(h) << ',';
  out << "reason\n";
  for (const auto& row : rejected) {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (i < row.fields.size()) out << csv_escape(row.fields[i]);
      out << ',';
    }
    out << csv_escape(row.reason) << '\n';
  }
}

}  // namespace ranemu
