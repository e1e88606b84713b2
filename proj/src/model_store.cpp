#include "ranemu/model_store.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "ranemu/error.hpp"

namespace ranemu {

using nlohmann::json;

const KdeModel& ModelBundle::at(const ProfileKey& key) const {
  const auto it = models.find(key);
  if (it == models.end()) throw LookupError("no model for profile " + key.to_string());
  return it->second;
}

std::string serialize_bundle(const ModelBundle& bundle) {
  json models = json::object();
  for (const auto& [key, model] : bundle.models) {
    json cov = json::array();
    for (Eigen::Index r = 0; r < 3; ++r) {
      for (Eigen::Index c = 0; c < 3; ++c) cov.push_back(model.covariance()(r, c));
    }
    json points = json::array();
    for (const auto& p : model.points()) {
      points.push_back(json::array({p.download_kbps, p.upload_kbps, p.latency_ms}));
    }
    models[key.to_string()] = {
        {"n", model.n()},
        {"bandwidth_factor", model.bandwidth_factor()},
        {"covariance", std::move(cov)},
        {"points", std::move(points)},
    };
  }
  const json doc = {
      {"format_version", bundle.format_version},
      {"created", bundle.created},
      {"models", std::move(models)},
  };
  return doc.dump(1) + "\n";
}

ModelBundle parse_bundle(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw FormatError(std::string("model file is not valid JSON: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("format_version") || !doc["format_version"].is_number_integer()) {
    throw FormatError("model file: missing integer format_version");
  }
  ModelBundle bundle;
  bundle.format_version = doc["format_version"].get<int>();
  if (bundle.format_version != kModelFormatVersion) {
    throw VersionError("model file: unsupported format_version " +
                       std::to_string(bundle.format_version) + " (expected " +
                       std::to_string(kModelFormatVersion) + ")");
  }
  if (!doc.contains("created") || !doc["created"].is_number_integer()) {
    throw FormatError("model file: missing integer 'created'");
  }
  bundle.created = doc["created"].get<std::int64_t>();
  if (!doc.contains("models") || !doc["models"].is_object()) {
    throw FormatError("model file: missing 'models' object");
  }

  for (const auto& [name, body] : doc["models"].items()) {
    const auto corrupt = [&name](const std::string& why) {
      return CorruptModelError("model '" + name + "': " + why);
    };
    ProfileKey key;
    try {
      key = ProfileKey::parse(name);
    } catch (const FormatError& e) {
      throw corrupt(e.what());
    }
    try {
      const auto n = body.at("n").get<std::size_t>();
      const auto factor = body.at("bandwidth_factor").get<double>();
      const auto& cov_json = body.at("covariance");
      if (!cov_json.is_array() || cov_json.size() != 9) throw corrupt("covariance needs 9 numbers");
      Eigen::Matrix3d cov;
      for (Eigen::Index i = 0; i < 9; ++i) {
        cov(i / 3, i % 3) = cov_json[static_cast<std::size_t>(i)].get<double>();
      }
      const auto& pts_json = body.at("points");
      if (!pts_json.is_array()) throw corrupt("points must be an array");
      std::vector<NetworkSample> points;
      points.reserve(pts_json.size());
      for (const auto& row : pts_json) {
        if (!row.is_array() || row.size() != 3) throw corrupt("each point needs 3 columns");
        points.push_back({row[0].get<double>(), row[1].get<double>(), row[2].get<double>()});
      }
      if (points.size() != n) {
        throw corrupt("n = " + std::to_string(n) + " but " + std::to_string(points.size()) +
                      " points stored");
      }
      bundle.models.emplace(key, KdeModel::from_parts(std::move(points), cov, factor));
    } catch (const ParameterError& e) {
      throw corrupt(e.what());
    } catch (const json::exception& e) {
      throw corrupt(e.what());
    }
  }
  return bundle;
}

void save_bundle(const ModelBundle& bundle, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << serialize_bundle(bundle);
  out.flush();
  if (!out) throw IoError("failed writing " + path.string());
}

ModelBundle load_bundle(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw IoError("failed reading " + path.string());
  try {
    return parse_bundle(buf.str());
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

}  // namespace ranemu
