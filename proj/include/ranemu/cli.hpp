#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace ranemu::cli {

enum ExitCode : int {
  kOk = 0,
  kUsage = 1,
  kDataError = 2,
  kBackendFailure = 3,
};

// Entry point shared by the executable and the tests. `args` excludes the
// program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// "10MB" -> 10'000'000. Decimal (kB, MB, GB) and binary (KiB, MiB, GiB)
// suffixes, case-insensitive; a bare number is bytes.
std::optional<std::uint64_t> parse_size(std::string_view text);

}  // namespace ranemu::cli
