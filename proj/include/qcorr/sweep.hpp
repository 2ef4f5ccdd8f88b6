#pragma once

#include <string>
#include <vector>

#include "qcorr/ann.hpp"
#include "qcorr/metrics.hpp"

namespace qcorr {

struct TrainedModel {
  MlpModel model;
  TrainResult result;
};

// Trains one classifier on the given feature subset (canonical indices).
TrainedModel train_on(const Dataset& train, const Dataset& validation,
                      const std::vector<int>& retained, const TrainConfig& cfg,
                      bool bn_input = true);

struct EvalOutput {
  ConfusionMatrix cm;
  ScoreReport point;    // scores of the full-test confusion matrix
  ScoreReport subsets;  // shard mean +- std
  std::vector<std::uint8_t> predictions;
};

EvalOutput evaluate_on(const MlpModel& model, const Dataset& test, int subsets = 12,
                       std::uint64_t shard_seed = 0);

struct SweepRow {
  int n = 0;
  ScoreReport point;
  ScoreReport subsets;
  ConfusionMatrix cm;
  int epochs = 0;
  double train_seconds = 0.0;
};

struct SweepOptions {
  bool bn_input = true;
  int subsets = 12;
  std::string out_dir;  // per-n artifacts written here when non-empty
  bool verbose = true;
};

struct SweepResult {
  std::vector<SweepRow> rows;  // n = 10 down to 1
};

// Full reduction study: one model per feature-vector length n = 10..1,
// following the optimal reduction plan, each evaluated on the test split.
SweepResult sweep(const Dataset& train, const Dataset& validation,
                  const Dataset& test, const TrainConfig& cfg,
                  const SweepOptions& opts);

// Plot-ready tables. Both include the hypothetical n=0 chance baseline row
// at 20% accuracy.
std::string accuracy_vs_n_csv(const SweepResult& result);
std::string f1_vs_n_csv(const SweepResult& result);

}  // namespace qcorr
