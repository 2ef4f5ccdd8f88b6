#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace qcorr {

// FNV-1a 64-bit over a file's bytes, hex encoded.
std::string file_checksum(const std::string& path);

// Per-run provenance: resolved configuration plus checksums of everything
// read and written. Re-running with the same manifest must reproduce the
// output checksums (deterministic mode).
class RunManifest {
 public:
  RunManifest(std::string command, std::map<std::string, std::string> config);

  void add_input(const std::string& path);
  void add_output(const std::string& path);

  // JSON, written next to the primary output as <path>.
  void write(const std::string& path) const;

 private:
  std::string command_;
  std::map<std::string, std::string> config_;
  std::string started_utc_;
  std::vector<std::pair<std::string, std::string>> inputs_;   // path, checksum
  std::vector<std::pair<std::string, std::string>> outputs_;  // path, checksum
};

}  // namespace qcorr
