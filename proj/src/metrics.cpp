#include "qcorr/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "qcorr/errors.hpp"

namespace qcorr {

std::uint64_t ConfusionMatrix::total() const {
  std::uint64_t t = 0;
  for (const auto& row : counts)
    for (std::uint64_t v : row) t += v;
  return t;
}

std::uint64_t ConfusionMatrix::diagonal() const {
  std::uint64_t t = 0;
  for (int c = 0; c < kClassCount; ++c) t += counts[c][c];
  return t;
}

std::uint64_t ConfusionMatrix::row_sum(int c) const {
  std::uint64_t t = 0;
  for (std::uint64_t v : counts[c]) t += v;
  return t;
}

std::uint64_t ConfusionMatrix::col_sum(int c) const {
  std::uint64_t t = 0;
  for (const auto& row : counts) t += row[c];
  return t;
}

ConfusionMatrix& ConfusionMatrix::operator+=(const ConfusionMatrix& other) {
  for (int i = 0; i < kClassCount; ++i)
    for (int j = 0; j < kClassCount; ++j) counts[i][j] += other.counts[i][j];
  return *this;
}

ConfusionMatrix confusion(std::span<const std::uint8_t> truth,
                          std::span<const std::uint8_t> predicted) {
  if (truth.size() != predicted.size())
    throw PreconditionError("confusion: label sequences differ in length");
  ConfusionMatrix cm;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (truth[i] >= kClassCount || predicted[i] >= kClassCount)
      throw PreconditionError("confusion: label out of range");
    ++cm.counts[truth[i]][predicted[i]];
  }
  return cm;
}

ScoreReport scores(const ConfusionMatrix& cm) {
  const std::uint64_t total = cm.total();
  if (total == 0) throw PreconditionError("scores: empty confusion matrix");

  ScoreReport rep;
  rep.accuracy.mean = static_cast<double>(cm.diagonal()) / static_cast<double>(total);

  std::uint64_t relaxed = cm.diagonal();
  relaxed += cm.counts[static_cast<int>(ClassLabel::Sep)][static_cast<int>(ClassLabel::Ent)];
  relaxed += cm.counts[static_cast<int>(ClassLabel::Ent)][static_cast<int>(ClassLabel::Sep)];
  rep.relaxed_accuracy.mean = static_cast<double>(relaxed) / static_cast<double>(total);

  for (int c = 0; c < kClassCount; ++c) {
    const std::uint64_t row = cm.row_sum(c);
    const std::uint64_t col = cm.col_sum(c);
    rep.empty_row[c] = (row == 0);
    rep.empty_col[c] = (col == 0);
    const double recall =
        row ? static_cast<double>(cm.counts[c][c]) / static_cast<double>(row) : 0.0;
    const double precision =
        col ? static_cast<double>(cm.counts[c][c]) / static_cast<double>(col) : 0.0;
    rep.recall[c].mean = recall;
    rep.precision[c].mean = precision;
    rep.f1[c].mean =
        (recall + precision > 0.0) ? 2.0 * recall * precision / (recall + precision) : 0.0;
  }
  return rep;
}

ScoreReport subset_scores(std::span<const std::uint8_t> truth,
                          std::span<const std::uint8_t> predicted, int k,
                          std::uint64_t shuffle_seed) {
  if (truth.size() != predicted.size())
    throw PreconditionError("subset_scores: label sequences differ in length");
  if (k < 1) throw PreconditionError("subset_scores: k must be >= 1");
  if (truth.size() < static_cast<std::size_t>(k) * 25)
    throw PreconditionError("subset_scores: need at least 25k samples for k shards");

  std::vector<std::uint64_t> order(truth.size());
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(shuffle_seed);
  std::shuffle(order.begin(), order.end(), rng);

  std::vector<ScoreReport> shard_reports;
  shard_reports.reserve(k);
  const std::uint64_t base = truth.size() / k;
  const std::uint64_t extra = truth.size() % k;
  std::uint64_t cursor = 0;
  for (int shard = 0; shard < k; ++shard) {
    const std::uint64_t size = base + (static_cast<std::uint64_t>(shard) < extra ? 1 : 0);
    ConfusionMatrix cm;
    for (std::uint64_t i = 0; i < size; ++i, ++cursor)
      ++cm.counts[truth[order[cursor]]][predicted[order[cursor]]];
    shard_reports.push_back(scores(cm));
  }

  auto stat = [&](auto getter) {
    ScoreStat s;
    double sum = 0.0;
    for (const auto& r : shard_reports) sum += getter(r);
    s.mean = sum / k;
    if (k >= 2) {
      double sq = 0.0;
      for (const auto& r : shard_reports) {
        const double d = getter(r) - s.mean;
        sq += d * d;
      }
      s.std = std::sqrt(sq / (k - 1));
    }
    return s;
  };

  ScoreReport rep;
  rep.accuracy = stat([](const ScoreReport& r) { return r.accuracy.mean; });
  rep.relaxed_accuracy = stat([](const ScoreReport& r) { return r.relaxed_accuracy.mean; });
  for (int c = 0; c < kClassCount; ++c) {
    rep.recall[c] = stat([c](const ScoreReport& r) { return r.recall[c].mean; });
    rep.precision[c] = stat([c](const ScoreReport& r) { return r.precision[c].mean; });
    rep.f1[c] = stat([c](const ScoreReport& r) { return r.f1[c].mean; });
    for (const auto& r : shard_reports) {
      rep.empty_row[c] = rep.empty_row[c] || r.empty_row[c];
      rep.empty_col[c] = rep.empty_col[c] || r.empty_col[c];
    }
  }
  return rep;
}

std::string confusion_csv(const ConfusionMatrix& cm) {
  std::ostringstream out;
  out << "true\\pred";
  for (const char* name : kClassNames) out << ',' << name;
  out << '\n';
  for (int c = 0; c < kClassCount; ++c) {
    out << kClassNames[c];
    for (int p = 0; p < kClassCount; ++p) out << ',' << cm.counts[c][p];
    out << '\n';
  }
  return out.str();
}

namespace {

void append_stat_csv(std::ostringstream& out, const std::string& name,
                     const ScoreStat& s) {
  out << name << ',' << s.mean << ',';
  if (s.std) out << *s.std;
  out << '\n';
}

}  // namespace

std::string scores_csv(const ScoreReport& rep) {
  std::ostringstream out;
  out.precision(10);
  out << "metric,mean,std\n";
  append_stat_csv(out, "accuracy", rep.accuracy);
  append_stat_csv(out, "relaxed_accuracy", rep.relaxed_accuracy);
  for (int c = 0; c < kClassCount; ++c) {
    append_stat_csv(out, std::string("recall_") + kClassNames[c], rep.recall[c]);
    append_stat_csv(out, std::string("precision_") + kClassNames[c], rep.precision[c]);
    append_stat_csv(out, std::string("f1_") + kClassNames[c], rep.f1[c]);
  }
  return out.str();
}

std::string format_report(const ScoreReport& rep) {
  char line[256];
  std::string out;
  auto pct = [](const ScoreStat& s) {
    char buf[64];
    if (s.std)
      std::snprintf(buf, sizeof(buf), "%6.2f +- %4.2f", 100.0 * s.mean, 100.0 * *s.std);
    else
      std::snprintf(buf, sizeof(buf), "%6.2f", 100.0 * s.mean);
    return std::string(buf);
  };
  std::snprintf(line, sizeof(line), "accuracy: %s %%   relaxed: %s %%\n",
                pct(rep.accuracy).c_str(), pct(rep.relaxed_accuracy).c_str());
  out += line;
  std::snprintf(line, sizeof(line), "%-8s %-16s %-16s %-16s\n", "class", "recall(%)",
                "precision(%)", "F1(%)");
  out += line;
  for (int c = 0; c < kClassCount; ++c) {
    std::snprintf(line, sizeof(line), "%-8s %-16s %-16s %-16s\n", kClassNames[c],
                  pct(rep.recall[c]).c_str(), pct(rep.precision[c]).c_str(),
                  pct(rep.f1[c]).c_str());
    out += line;
  }
  return out;
}

}  // namespace qcorr
