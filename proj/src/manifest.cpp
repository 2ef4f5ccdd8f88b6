#include "qcorr/manifest.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>

#include <json.hpp>

#include "qcorr/errors.hpp"

namespace qcorr {

std::string file_checksum(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("checksum: cannot open " + path);
  std::uint64_t hash = 0xcbf29ce484222325ull;
  char buf[1 << 16];
  while (in) {
    in.read(buf, sizeof(buf));
    const std::streamsize got = in.gcount();
    for (std::streamsize i = 0; i < got; ++i) {
      hash ^= static_cast<unsigned char>(buf[i]);
      hash *= 0x100000001b3ull;
    }
  }
  char hex[17];
  std::snprintf(hex, sizeof(hex), "%016llx", static_cast<unsigned long long>(hash));
  return hex;
}

namespace {

std::string utc_now() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  char buf[32];
  std::tm tm_utc{};
  gmtime_r(&t, &tm_utc);
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
  return buf;
}

}  // namespace

RunManifest::RunManifest(std::string command, std::map<std::string, std::string> config)
    : command_(std::move(command)),
      config_(std::move(config)),
      started_utc_(utc_now()) {}

void RunManifest::add_input(const std::string& path) {
  inputs_.emplace_back(path, file_checksum(path));
}

void RunManifest::add_output(const std::string& path) {
  outputs_.emplace_back(path, file_checksum(path));
}

void RunManifest::write(const std::string& path) const {
  nlohmann::json j;
  j["command"] = command_;
  j["started_utc"] = started_utc_;
  j["config"] = config_;
  auto files = [](const std::vector<std::pair<std::string, std::string>>& list) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& [p, sum] : list) arr.push_back({{"path", p}, {"fnv1a64", sum}});
    return arr;
  };
  j["inputs"] = files(inputs_);
  j["outputs"] = files(outputs_);

  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open for writing: " + path);
  out << j.dump(2) << '\n';
  if (!out) throw IoError("write failed: " + path);
}

}  // namespace qcorr
