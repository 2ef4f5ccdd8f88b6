#include "qcorr/dataset.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <numeric>
#include <random>

#include "qcorr/errors.hpp"
#include "qcorr/parallel.hpp"

static_assert(std::endian::native == std::endian::little,
              "dataset serialization assumes a little-endian host");

namespace qcorr {

namespace {

template <typename T>
void put(std::string& buf, T value) {
  char raw[sizeof(T)];
  std::memcpy(raw, &value, sizeof(T));
  buf.append(raw, sizeof(T));
}

template <typename T>
T take(const char*& p) {
  T value;
  std::memcpy(&value, p, sizeof(T));
  p += sizeof(T);
  return value;
}

std::string encode_header(const DatasetHeader& h) {
  std::string buf;
  buf.reserve(DatasetHeader::kBytes);
  buf.append(h.kMagic.data(), h.kMagic.size());
  put<std::uint32_t>(buf, DatasetHeader::kVersion);
  put<std::uint32_t>(buf, 0);  // reserved, keeps records 8-byte aligned
  put<std::uint64_t>(buf, h.record_count);
  for (std::uint64_t c : h.class_counts) put<std::uint64_t>(buf, c);
  put<std::uint64_t>(buf, h.generator_seed);
  return buf;
}

void encode_record(std::string& buf, const SampleRecord& rec) {
  for (double v : rec.features) put<double>(buf, v);
  for (double v : rec.quantities) put<double>(buf, v);
  buf.push_back(static_cast<char>(rec.label));
  buf.append(7, '\0');
}

SampleRecord decode_record(const char* p) {
  SampleRecord rec;
  for (double& v : rec.features) v = take<double>(p);
  for (double& v : rec.quantities) v = take<double>(p);
  rec.label = static_cast<std::uint8_t>(*p);
  return rec;
}

}  // namespace

void refresh_class_counts(Dataset& ds) {
  ds.header.class_counts.fill(0);
  for (const auto& rec : ds.records) {
    if (rec.label >= kClassCount)
      throw IoError("dataset record has label out of range");
    ++ds.header.class_counts[rec.label];
  }
  ds.header.record_count = ds.records.size();
}

Dataset generate(std::uint64_t count, StateSeed seed, int threads) {
  if (count < 1) throw PreconditionError("generate: count must be >= 1");
  Dataset ds;
  ds.header.generator_seed = seed.seed;
  ds.records.resize(count);

  SampleRecord* out = ds.records.data();
  parallel_for(count, threads, [&](std::uint64_t begin, std::uint64_t end) {
    for (std::uint64_t i = begin; i < end; ++i) {
      const ComplexMatrix4 rho =
          random_state(StateSeed{seed.seed, seed.stream_index + i});
      const FeatureVector f = features(rho);
      const QuantRecord q = analyze(rho);
      SampleRecord& rec = out[i];
      rec.features = f.values;
      rec.quantities = {q.negativity, q.fef_witness, q.steering, q.bell};
      rec.label = static_cast<std::uint8_t>(q.label);
    }
  });

  refresh_class_counts(ds);
  return ds;
}

void write_dataset(const Dataset& ds, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open for writing: " + path);

  DatasetHeader h = ds.header;
  h.record_count = ds.records.size();
  std::string buf = encode_header(h);
  buf.reserve(DatasetHeader::kBytes + ds.records.size() * DatasetHeader::kRecordBytes);
  for (const auto& rec : ds.records) encode_record(buf, rec);
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!out) throw IoError("write failed: " + path);
}

Dataset read_dataset(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open: " + path);
  std::string bytes((std::istreambuf_iterator<char>(in)),
                    std::istreambuf_iterator<char>());
  if (bytes.size() < DatasetHeader::kBytes)
    throw IoError("dataset too short: " + path);

  const char* p = bytes.data();
  if (std::memcmp(p, DatasetHeader::kMagic.data(), 8) != 0)
    throw IoError("bad magic, not a dataset file: " + path);
  p += 8;
  const auto version = take<std::uint32_t>(p);
  if (version != DatasetHeader::kVersion)
    throw IoError("unsupported dataset version " + std::to_string(version));
  take<std::uint32_t>(p);  // reserved

  Dataset ds;
  ds.header.record_count = take<std::uint64_t>(p);
  for (auto& c : ds.header.class_counts) c = take<std::uint64_t>(p);
  ds.header.generator_seed = take<std::uint64_t>(p);

  const std::uint64_t expected =
      DatasetHeader::kBytes + ds.header.record_count * DatasetHeader::kRecordBytes;
  if (bytes.size() != expected)
    throw IoError("dataset size mismatch (truncated or corrupted): " + path);

  const std::uint64_t total = std::accumulate(ds.header.class_counts.begin(),
                                              ds.header.class_counts.end(),
                                              std::uint64_t{0});
  if (total != ds.header.record_count)
    throw IoError("dataset header class counts are inconsistent: " + path);

  ds.records.reserve(ds.header.record_count);
  for (std::uint64_t i = 0; i < ds.header.record_count; ++i)
    ds.records.push_back(decode_record(bytes.data() + DatasetHeader::kBytes +
                                       i * DatasetHeader::kRecordBytes));

  Dataset check = ds;
  refresh_class_counts(check);
  if (check.header.class_counts != ds.header.class_counts)
    throw IoError("dataset class counts do not match records: " + path);
  return ds;
}

void write_csv(const Dataset& ds, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open for writing: " + path);
  for (int i = 0; i < kFeatureCount; ++i) out << kFeatureNames[i] << ',';
  out << "N,FEFw,S3,B,label\n";
  char line[512];
  for (const auto& rec : ds.records) {
    int len = 0;
    for (double v : rec.features)
      len += std::snprintf(line + len, sizeof(line) - len, "%.17g,", v);
    for (double v : rec.quantities)
      len += std::snprintf(line + len, sizeof(line) - len, "%.17g,", v);
    len += std::snprintf(line + len, sizeof(line) - len, "%u\n", rec.label);
    out.write(line, len);
  }
  if (!out) throw IoError("write failed: " + path);
}

Dataset equalize(const Dataset& raw, std::uint64_t shuffle_seed) {
  const std::uint64_t floor_count =
      *std::min_element(raw.header.class_counts.begin(), raw.header.class_counts.end());
  if (floor_count == 0)
    throw PreconditionError("equalize: at least one class has no records");

  std::vector<std::uint64_t> order(raw.records.size());
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(shuffle_seed);
  std::shuffle(order.begin(), order.end(), rng);

  Dataset out;
  out.header.generator_seed = raw.header.generator_seed;
  out.records.reserve(floor_count * kClassCount);
  std::array<std::uint64_t, kClassCount> quota{};
  for (std::uint64_t idx : order) {
    const auto& rec = raw.records[idx];
    if (quota[rec.label] < floor_count) {
      ++quota[rec.label];
      out.records.push_back(rec);
    }
  }
  refresh_class_counts(out);
  return out;
}

SplitResult split(const Dataset& equalized, std::uint64_t shuffle_seed) {
  const std::uint64_t total = equalized.records.size();
  if (total < 16) throw PreconditionError("split: need at least 16 records");

  const std::uint64_t test_size = total / 16;
  const std::uint64_t val_size = 3 * total / 16;

  std::mt19937_64 rng(shuffle_seed);
  std::vector<std::vector<std::uint64_t>> by_class(kClassCount);
  for (std::uint64_t i = 0; i < total; ++i)
    by_class[equalized.records[i].label].push_back(i);
  for (auto& idxs : by_class) std::shuffle(idxs.begin(), idxs.end(), rng);

  // per-class quotas for a part of size `part`, matched exactly by
  // distributing the shortfall to the largest fractional remainders
  auto quotas = [&](std::uint64_t part) {
    std::array<std::uint64_t, kClassCount> q{};
    std::vector<std::pair<double, int>> rem;
    std::uint64_t assigned = 0;
    for (int c = 0; c < kClassCount; ++c) {
      const double exact =
          static_cast<double>(by_class[c].size()) * static_cast<double>(part) /
          static_cast<double>(total);
      q[c] = static_cast<std::uint64_t>(exact);
      assigned += q[c];
      rem.push_back({exact - static_cast<double>(q[c]), c});
    }
    std::sort(rem.begin(), rem.end(), [](const auto& a, const auto& b) {
      return a.first > b.first || (a.first == b.first && a.second < b.second);
    });
    for (std::uint64_t k = 0; k < part - assigned; ++k) ++q[rem[k].second];
    return q;
  };

  const auto test_quota = quotas(test_size);
  const auto val_quota = quotas(val_size);

  SplitResult parts;
  for (Dataset* ds : {&parts.train, &parts.validation, &parts.test})
    ds->header.generator_seed = equalized.header.generator_seed;

  for (int c = 0; c < kClassCount; ++c) {
    const auto& idxs = by_class[c];
    if (test_quota[c] + val_quota[c] > idxs.size())
      throw PreconditionError("split: class " + std::string(kClassNames[c]) +
                              " has too few records");
    std::uint64_t k = 0;
    for (; k < test_quota[c]; ++k)
      parts.test.records.push_back(equalized.records[idxs[k]]);
    for (; k < test_quota[c] + val_quota[c]; ++k)
      parts.validation.records.push_back(equalized.records[idxs[k]]);
    for (; k < idxs.size(); ++k)
      parts.train.records.push_back(equalized.records[idxs[k]]);
  }

  for (Dataset* ds : {&parts.train, &parts.validation, &parts.test}) {
    std::shuffle(ds->records.begin(), ds->records.end(), rng);
    refresh_class_counts(*ds);
  }
  return parts;
}

}  // namespace qcorr
