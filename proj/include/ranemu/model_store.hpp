#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>

#include "ranemu/kde.hpp"
#include "ranemu/profiles.hpp"

namespace ranemu {

inline constexpr int kModelFormatVersion = 1;

struct ModelBundle {
  int format_version = kModelFormatVersion;
  std::int64_t created = 0;  // seconds since epoch, UTC
  std::map<ProfileKey, KdeModel> models;

  const KdeModel& at(const ProfileKey& key) const;  // LookupError if absent
};

// Canonical JSON text: sorted keys, fixed field order, shortest round-trip
// number formatting. Identical bundles serialize to identical bytes.
std::string serialize_bundle(const ModelBundle& bundle);
ModelBundle parse_bundle(std::string_view text);

// File variants; I/O failures throw IoError naming the path.
void save_bundle(const ModelBundle& bundle, const std::filesystem::path& path);
ModelBundle load_bundle(const std::filesystem::path& path);

}  // namespace ranemu
