// Manifest, checksum and sweep-report plumbing.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <json.hpp>

#include "qcorr/errors.hpp"
#include "qcorr/manifest.hpp"
#include "qcorr/sweep.hpp"

using namespace qcorr;

namespace {

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc | std::ios::binary);
  out << text;
}

}  // namespace

TEST_CASE("file checksum is content-determined") {
  const std::string a = temp_path("qcorr_sum_a.bin");
  const std::string b = temp_path("qcorr_sum_b.bin");
  write_file(a, "identical bytes");
  write_file(b, "identical bytes");
  CHECK(file_checksum(a) == file_checksum(b));
  write_file(b, "different bytes!");
  CHECK(file_checksum(a) != file_checksum(b));
  CHECK(file_checksum(a).size() == 16);
  CHECK_THROWS_AS(file_checksum(temp_path("qcorr_sum_missing.bin")), IoError);
  std::remove(a.c_str());
  std::remove(b.c_str());
}

TEST_CASE("manifests record config and artifact checksums as JSON") {
  const std::string artifact = temp_path("qcorr_manifest_artifact.bin");
  write_file(artifact, "payload");
  const std::string path = temp_path("qcorr_manifest.json");

  RunManifest manifest("gen", {{"seed", "42"}, {"count", "10"}});
  manifest.add_output(artifact);
  manifest.write(path);

  std::ifstream in(path);
  const auto j = nlohmann::json::parse(in);
  CHECK(j["command"] == "gen");
  CHECK(j["config"]["seed"] == "42");
  REQUIRE(j["outputs"].size() == 1);
  CHECK(j["outputs"][0]["path"] == artifact);
  CHECK(j["outputs"][0]["fnv1a64"] == file_checksum(artifact));
  CHECK(j.contains("started_utc"));
  std::remove(artifact.c_str());
  std::remove(path.c_str());
}

TEST_CASE("sweep tables include the n=0 chance baseline") {
  SweepResult result;
  SweepRow row;
  row.n = 10;
  row.point.accuracy.mean = 0.9;
  row.point.relaxed_accuracy.mean = 0.97;
  row.subsets.accuracy.mean = 0.9;
  row.subsets.accuracy.std = 0.003;
  row.subsets.relaxed_accuracy.mean = 0.97;
  row.subsets.relaxed_accuracy.std = 0.002;
  for (int c = 0; c < kClassCount; ++c) {
    row.subsets.f1[c].mean = 0.8;
    row.subsets.f1[c].std = 0.01;
  }
  result.rows.push_back(row);

  const std::string acc = accuracy_vs_n_csv(result);
  CHECK(acc.find("n,accuracy,") == 0);
  CHECK(acc.find("\n10,0.9,") != std::string::npos);
  CHECK(acc.find("\n0,0.2,") != std::string::npos);

  const std::string f1 = f1_vs_n_csv(result);
  CHECK(f1.find("f1_sep") != std::string::npos);
  CHECK(f1.find("f1_Bell") != std::string::npos);
  CHECK(f1.find("\n10,0.8,") != std::string::npos);
}
