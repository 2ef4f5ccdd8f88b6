#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "qcorr/collective.hpp"
#include "qcorr/correlations.hpp"
#include "qcorr/states.hpp"

namespace qcorr {

// One labelled state: the 10 collective features, the four analytical
// quantities (N, FEF_w, S3, B) and the class label.
struct SampleRecord {
  std::array<double, kFeatureCount> features{};
  std::array<double, 4> quantities{};
  std::uint8_t label = 0;

  bool operator==(const SampleRecord&) const = default;
};

// On disk: little-endian, 72-byte header (8-byte magic, u32 version,
// u32 reserved pad so records stay 8-byte aligned, u64 record count,
// 5 x u64 class counts, u64 generator seed) followed by 120-byte records
// (10 + 4 f64, u8 label, 7 pad bytes).
struct DatasetHeader {
  static constexpr std::array<char, 8> kMagic{'Q', 'C', 'O', 'R', 'R', 'D', 'S', '1'};
  static constexpr std::uint32_t kVersion = 1;
  static constexpr std::size_t kBytes = 72;
  static constexpr std::size_t kRecordBytes = 120;

  std::uint64_t record_count = 0;
  std::array<std::uint64_t, kClassCount> class_counts{};
  std::uint64_t generator_seed = 0;
};

struct Dataset {
  DatasetHeader header;
  std::vector<SampleRecord> records;
};

// Recomputes header.class_counts from the records.
void refresh_class_counts(Dataset& ds);

// Generates `count` random states, featurizes and labels them. Record i is
// drawn from stream (seed.seed, seed.stream_index + i), so output bytes do
// not depend on the thread count.
Dataset generate(std::uint64_t count, StateSeed seed, int threads = 1);

void write_dataset(const Dataset& ds, const std::string& path);
Dataset read_dataset(const std::string& path);

// CSV export, one row per record, columns p11..p34,N,FEFw,S3,B,label.
void write_csv(const Dataset& ds, const std::string& path);

// Subsamples so every class appears exactly min-class-count times. Surplus
// records are dropped uniformly at random (seeded shuffle, first-seen kept).
Dataset equalize(const Dataset& raw, std::uint64_t shuffle_seed);

struct SplitResult {
  Dataset train;
  Dataset validation;
  Dataset test;
};

// Stratified 12:3:1 split: global part sizes floor(3k/16) and floor(k/16)
// with the remainder in train, per-class quotas by largest remainder.
SplitResult split(const Dataset& equalized, std::uint64_t shuffle_seed);

}  // namespace qcorr
