#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "test_util.hpp"

using namespace mcs;
using mcs::testing::slurp;
using mcs::testing::spit;
using mcs::testing::TempDir;

namespace {

Container sample() {
  Container c;
  c.manifest = {{"format_version", kFormatVersion}, {"blob_bytes", 32}, {"note", "x"}};
  c.blob = {1.0, -0.0, std::numeric_limits<double>::denorm_min(), std::nextafter(1.0, 2.0)};
  return c;
}

}  // namespace

TEST(Container, RoundTripPreservesBits) {
  TempDir dir("cont");
  write_container(dir.file("c.bin"), "TESTBLOB", sample());
  const auto back = read_container(dir.file("c.bin"), "TESTBLOB");
  EXPECT_EQ(back.manifest, sample().manifest);
  ASSERT_EQ(back.blob.size(), 4u);
  EXPECT_EQ(0, std::memcmp(back.blob.data(), sample().blob.data(), 32));
  EXPECT_TRUE(std::signbit(back.blob[1]));
}

TEST(Container, HeaderChecks) {
  TempDir dir("conthdr");
  write_container(dir.file("c.bin"), "TESTBLOB", sample());
  EXPECT_THROW(read_container(dir.file("c.bin"), "OTHERONE"), ParseError);
  spit(dir.file("short.bin"), "TEST");
  EXPECT_THROW(read_container(dir.file("short.bin"), "TESTBLOB"), ParseError);
  EXPECT_THROW(read_container(dir.file("none.bin"), "TESTBLOB"), std::runtime_error);
  EXPECT_THROW(write_container(dir.file("x.bin"), "SHORT", sample()), std::invalid_argument);
}

TEST(Container, TruncationAndSizeMismatch) {
  TempDir dir("conttr");
  write_container(dir.file("c.bin"), "TESTBLOB", sample());
  const auto bytes = slurp(dir.file("c.bin"));
  spit(dir.file("t1.bin"), bytes.substr(0, 30));  // inside the manifest
  EXPECT_THROW(read_container(dir.file("t1.bin"), "TESTBLOB"), ParseError);
  spit(dir.file("t2.bin"), bytes.substr(0, bytes.size() - 1));
  EXPECT_THROW(read_container(dir.file("t2.bin"), "TESTBLOB"), ParseError);
  spit(dir.file("t3.bin"), bytes + "extra");
  EXPECT_THROW(read_container(dir.file("t3.bin"), "TESTBLOB"), ParseError);
}

TEST(Container, VersionAndManifestErrors) {
  TempDir dir("contver");
  auto c = sample();
  c.manifest["format_version"] = kFormatVersion + 1;
  write_container(dir.file("v.bin"), "TESTBLOB", c);
  try {
    read_container(dir.file("v.bin"), "TESTBLOB");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("version"), std::string::npos);
  }
  c.manifest.erase("format_version");
  write_container(dir.file("n.bin"), "TESTBLOB", c);
  EXPECT_THROW(read_container(dir.file("n.bin"), "TESTBLOB"), ParseError);

  auto bytes = slurp(dir.file("v.bin"));
  bytes[17] = '#';  // breaks the JSON text
  spit(dir.file("j.bin"), bytes);
  EXPECT_THROW(read_container(dir.file("j.bin"), "TESTBLOB"), ParseError);
}

TEST(Csv, SeventeenDigitsRoundTrip) {
  TempDir dir("csv17");
  RowMatrix m(3, 2);
  m << 0.1, 1.0 / 3.0, -1e-300, 123456789.123456789, std::nextafter(0.5, 1.0), -0.0;
  save_csv(PointCloud(m), dir.file("m.csv"));
  const auto back = load_csv(dir.file("m.csv")).points();
  EXPECT_EQ(0, std::memcmp(back.data(), m.data(), sizeof(double) * 6));
}

TEST(Csv, LoadErrorCarriesPathAndLine) {
  TempDir dir("csverr");
  spit(dir.file("bad.csv"), "1,2\n3,4\n5\n");
  try {
    load_csv(dir.file("bad.csv"));
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
    EXPECT_NE(std::string(e.what()).find("bad.csv"), std::string::npos);
  }
  spit(dir.file("empty.csv"), "\n\n");
  EXPECT_THROW(load_csv(dir.file("empty.csv")), ParseError);
}

TEST(Csv, SphereRoundTrip) {
  TempDir dir("csvsph");
  const auto c = gen_sphere(10, 2, 4);
  save_csv(c, dir.file("s.csv"));
  const auto back = load_csv(dir.file("s.csv"));
  EXPECT_LE((back.points() - c.points()).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_TRUE(back.points() == c.points());
}

TEST(Provenance, DictionaryRecordsSourceHash) {
  const auto cloud = mcs::testing::uniform_circle(128);
  const auto dict = mcs::testing::circle_dictionary(128, 3);
  EXPECT_EQ(dict.provenance().at("source_hash").get<std::string>(), hash_string(content_hash(cloud.points())));
  RowMatrix other = cloud.points();
  other(0, 0) = std::nextafter(other(0, 0), 2.0);
  EXPECT_NE(content_hash(other), content_hash(cloud.points()));
}
