#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qcorr/correlations.hpp"

namespace qcorr {

// counts[c][c'] = number of states with true class c predicted as c'.
struct ConfusionMatrix {
  std::array<std::array<std::uint64_t, kClassCount>, kClassCount> counts{};

  std::uint64_t total() const;
  std::uint64_t diagonal() const;
  std::uint64_t row_sum(int c) const;
  std::uint64_t col_sum(int c) const;
  ConfusionMatrix& operator+=(const ConfusionMatrix& other);
};

ConfusionMatrix confusion(std::span<const std::uint8_t> truth,
                          std::span<const std::uint8_t> predicted);

struct ScoreStat {
  double mean = 0.0;
  std::optional<double> std;  // absent when computed from a single sample
};

struct ScoreReport {
  std::array<ScoreStat, kClassCount> recall;
  std::array<ScoreStat, kClassCount> precision;
  std::array<ScoreStat, kClassCount> f1;
  ScoreStat accuracy;
  ScoreStat relaxed_accuracy;  // sep/ent confusions count as correct
  // true when the class never occurs / is never predicted, in which case the
  // corresponding score is reported as 0 by convention
  std::array<bool, kClassCount> empty_row{};
  std::array<bool, kClassCount> empty_col{};
};

// Point scores of one confusion matrix; no uncertainties.
ScoreReport scores(const ConfusionMatrix& cm);

// Shard-based uncertainties: seeded shuffle, k near-equal contiguous shards,
// per-shard scores, mean and sample standard deviation.
ScoreReport subset_scores(std::span<const std::uint8_t> truth,
                          std::span<const std::uint8_t> predicted, int k = 12,
                          std::uint64_t shuffle_seed = 0);

std::string confusion_csv(const ConfusionMatrix& cm);
std::string scores_csv(const ScoreReport& report);
std::string format_report(const ScoreReport& report);

}  // namespace qcorr
