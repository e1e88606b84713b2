#include <gtest/gtest.h>

#include <rapidjson/document.h>

#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>

#include "ranemu/error.hpp"
#include "ranemu/model_store.hpp"
#include "synthetic.hpp"

using namespace ranemu;

namespace {

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() /
         ("ranemu_store_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) +
          "_" + name);
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

ModelBundle sample_bundle() {
  ModelBundle b;
  b.created = 1700000000;
  b.models.emplace(ProfileKey::specific("norway", "telia", Rat::G4, SignalQuality::Good),
                   KdeModel::fit(synth::lognormal_profile(100, 1)));
  b.models.emplace(ProfileKey::universal(Rat::G4, SignalQuality::Good),
                   KdeModel::fit(synth::lognormal_profile(250, 2, 15000, 5000, 60)));
  b.models.emplace(ProfileKey::specific("sweden", "tre", Rat::G3, SignalQuality::Bad),
                   KdeModel::fit(synth::lognormal_profile(120, 3, 3000.123456789, 700, 95.5)));
  return b;
}

void expect_bitwise_equal(const ModelBundle& a, const ModelBundle& b) {
  ASSERT_EQ(a.format_version, b.format_version);
  ASSERT_EQ(a.created, b.created);
  ASSERT_EQ(a.models.size(), b.models.size());
  for (auto ia = a.models.begin(), ib = b.models.begin(); ia != a.models.end(); ++ia, ++ib) {
    EXPECT_EQ(ia->first, ib->first);
    EXPECT_EQ(ia->second.bandwidth_factor(), ib->second.bandwidth_factor());
    EXPECT_EQ(ia->second.covariance(), ib->second.covariance());
    EXPECT_EQ(ia->second.kernel_covariance(), ib->second.kernel_covariance());
    EXPECT_EQ(ia->second.points(), ib->second.points());
  }
}

}  // namespace

TEST(ModelStore, SaveLoadRoundTripIsBitwise) {
  const auto bundle = sample_bundle();
  const auto path = temp_file("rt.json");
  save_bundle(bundle, path);
  const auto loaded = load_bundle(path);
  expect_bitwise_equal(bundle, loaded);

  // save . load . save is byte-identical.
  const auto path2 = temp_file("rt2.json");
  save_bundle(loaded, path2);
  EXPECT_EQ(slurp(path), slurp(path2));
  std::filesystem::remove(path);
  std::filesystem::remove(path2);
}

TEST(ModelStore, CanonicalKeyOrder) {
  const auto text = serialize_bundle(sample_bundle());
  const auto a = text.find("specific/norway/telia/4G/good");
  const auto b = text.find("specific/sweden/tre/3G/bad");
  const auto c = text.find("universal/any/any/4G/good");
  ASSERT_NE(a, std::string::npos);
  EXPECT_LT(a, b);
  EXPECT_LT(b, c);
  EXPECT_LT(text.find("\"created\""), text.find("\"format_version\""));
}

TEST(ModelStore, EmptyBundle) {
  ModelBundle empty;
  empty.created = 5;
  const auto loaded = parse_bundle(serialize_bundle(empty));
  EXPECT_TRUE(loaded.models.empty());
  EXPECT_EQ(loaded.created, 5);
  EXPECT_EQ(loaded.format_version, kModelFormatVersion);
}

// Read the file with an unrelated JSON parser.
TEST(ModelStore, ReadableByIndependentParser) {
  ModelBundle b;
  b.created = 1;
  const auto key = ProfileKey::specific("norway", "telia", Rat::G4, SignalQuality::Good);
  const auto pts = synth::lognormal_profile(100, 4);
  b.models.emplace(key, KdeModel::fit(pts));
  const auto text = serialize_bundle(b);

  rapidjson::Document doc;
  doc.Parse<rapidjson::kParseFullPrecisionFlag>(text.c_str());
  ASSERT_FALSE(doc.HasParseError());
  EXPECT_EQ(doc["format_version"].GetInt(), 1);
  const auto& model = doc["models"]["specific/norway/telia/4G/good"];
  EXPECT_EQ(model["n"].GetUint(), 100u);
  EXPECT_EQ(model["covariance"].Size(), 9u);
  const auto& points = model["points"];
  ASSERT_EQ(points.Size(), 100u);
  for (rapidjson::SizeType i = 0; i < points.Size(); ++i) {
    ASSERT_EQ(points[i].Size(), 3u);
    EXPECT_EQ(points[i][0].GetDouble(), pts[i].download_kbps);
    EXPECT_EQ(points[i][2].GetDouble(), pts[i].latency_ms);
  }
}

TEST(ModelStore, NegativeFactorIsCorrupt) {
  auto text = serialize_bundle(sample_bundle());
  const std::regex first_factor("\"bandwidth_factor\": ([0-9.e-]+)");
  text = std::regex_replace(text, first_factor, "\"bandwidth_factor\": -0.5",
                            std::regex_constants::format_first_only);
  try {
    parse_bundle(text);
    FAIL() << "expected CorruptModelError";
  } catch (const CorruptModelError& e) {
    EXPECT_NE(std::string(e.what()).find("specific/norway/telia/4G/good"), std::string::npos)
        << e.what();
  }
}

TEST(ModelStore, UnknownVersion) {
  auto text = serialize_bundle(sample_bundle());
  text = std::regex_replace(text, std::regex("\"format_version\": 1"), "\"format_version\": 99");
  EXPECT_THROW(parse_bundle(text), VersionError);
}

TEST(ModelStore, OtherCorruption) {
  const auto text = serialize_bundle(sample_bundle());
  EXPECT_THROW(parse_bundle(std::regex_replace(text, std::regex("\"n\": 100"), "\"n\": 101")),
               CorruptModelError);
  EXPECT_THROW(parse_bundle(std::regex_replace(text, std::regex("specific/norway"), "bogus/norway")),
               CorruptModelError);
  EXPECT_THROW(parse_bundle("{ not json"), FormatError);
  EXPECT_THROW(parse_bundle(R"({"format_version": 1, "created": 0})"), FormatError);
}

TEST(ModelStore, IoErrorsNamePath) {
  try {
    load_bundle("/nonexistent/dir/models.json");
    FAIL();
  } catch (const IoError& e) {
    EXPECT_NE(std::string(e.what()).find("/nonexistent/dir/models.json"), std::string::npos);
  }
  EXPECT_THROW(save_bundle(sample_bundle(), "/nonexistent/dir/out.json"), IoError);
}

TEST(ModelStore, BundleLookup) {
  const auto b = sample_bundle();
  EXPECT_EQ(b.at(ProfileKey::universal(Rat::G4, SignalQuality::Good)).n(), 250u);
  EXPECT_THROW(b.at(ProfileKey::universal(Rat::G3, SignalQuality::Good)), LookupError);
}
