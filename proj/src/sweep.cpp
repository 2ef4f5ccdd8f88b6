#include "qcorr/sweep.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "qcorr/errors.hpp"

namespace qcorr {

TrainedModel train_on(const Dataset& train_ds, const Dataset& val_ds,
                      const std::vector<int>& retained, const TrainConfig& cfg,
                      bool bn_input) {
  const LabeledData tr = dataset_matrix(train_ds, retained);
  const LabeledData val = dataset_matrix(val_ds, retained);
  MlpModel model(MlpConfig::for_features(retained, cfg.seed, bn_input));
  TrainResult result = train(model, tr.x, tr.y, val.x, val.y, cfg);
  return {std::move(model), std::move(result)};
}

EvalOutput evaluate_on(const MlpModel& model, const Dataset& test, int subsets,
                       std::uint64_t shard_seed) {
  const LabeledData te = dataset_matrix(test, model.config().feature_indices);
  EvalOutput out;
  out.predictions.reserve(te.y.size());
  constexpr Eigen::Index kChunk = 16384;
  for (Eigen::Index start = 0; start < te.x.cols(); start += kChunk) {
    const Eigen::Index m = std::min<Eigen::Index>(kChunk, te.x.cols() - start);
    const auto pred = model.predict_batch(te.x.middleCols(start, m));
    out.predictions.insert(out.predictions.end(), pred.begin(), pred.end());
  }
  out.cm = confusion(te.y, out.predictions);
  out.point = scores(out.cm);
  out.subsets = subset_scores(te.y, out.predictions, subsets, shard_seed);
  return out;
}

namespace {

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open for writing: " + path);
  out << text;
  if (!out) throw IoError("write failed: " + path);
}

}  // namespace

SweepResult sweep(const Dataset& train_ds, const Dataset& val_ds,
                  const Dataset& test_ds, const TrainConfig& cfg,
                  const SweepOptions& opts) {
  namespace fs = std::filesystem;
  if (!opts.out_dir.empty()) fs::create_directories(opts.out_dir);

  SweepResult result;
  const ReductionPlan& plan = reduction_plan();
  for (int n = kFeatureCount; n >= 1; --n) {
    const auto& retained = plan.retained_set(n);
    TrainConfig run_cfg = cfg;
    run_cfg.seed = cfg.seed + static_cast<std::uint64_t>(n);

    const auto t0 = std::chrono::steady_clock::now();
    TrainedModel trained = [&] {
      try {
        return train_on(train_ds, val_ds, retained, run_cfg, opts.bn_input);
      } catch (const NumericsError& err) {
        throw NumericsError("sweep: training diverged at n=" + std::to_string(n) +
                            ": " + err.what());
      }
    }();
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    EvalOutput eval = evaluate_on(trained.model, test_ds, opts.subsets, cfg.seed);

    SweepRow row;
    row.n = n;
    row.point = eval.point;
    row.subsets = eval.subsets;
    row.cm = eval.cm;
    row.epochs = static_cast<int>(trained.result.history.size());
    row.train_seconds = seconds;
    result.rows.push_back(row);

    if (!opts.out_dir.empty()) {
      const std::string base = opts.out_dir + "/";
      trained.model.save(base + "model_n" + std::to_string(n) + ".qnn");
      write_text(base + "history_n" + std::to_string(n) + ".csv",
                 history_csv(trained.result));
      write_text(base + "scores_n" + std::to_string(n) + ".csv",
                 scores_csv(eval.subsets));
      write_text(base + "confusion_n" + std::to_string(n) + ".csv",
                 confusion_csv(eval.cm));
    }
    if (opts.verbose) {
      std::printf("n=%2d  acc=%6.2f%%  relaxed=%6.2f%%  epochs=%d  (%.0f s)\n", n,
                  100.0 * eval.point.accuracy.mean,
                  100.0 * eval.point.relaxed_accuracy.mean, row.epochs, seconds);
      std::fflush(stdout);
    }
  }

  if (!opts.out_dir.empty()) {
    write_text(opts.out_dir + "/accuracy_vs_n.csv", accuracy_vs_n_csv(result));
    write_text(opts.out_dir + "/f1_vs_n.csv", f1_vs_n_csv(result));
  }
  return result;
}

std::string accuracy_vs_n_csv(const SweepResult& result) {
  std::ostringstream out;
  out.precision(10);
  out << "n,accuracy,accuracy_subset_mean,accuracy_subset_std,relaxed_accuracy,"
         "relaxed_subset_std,epochs,train_seconds\n";
  for (const auto& row : result.rows) {
    out << row.n << ',' << row.point.accuracy.mean << ','
        << row.subsets.accuracy.mean << ',';
    if (row.subsets.accuracy.std) out << *row.subsets.accuracy.std;
    out << ',' << row.point.relaxed_accuracy.mean << ',';
    if (row.subsets.relaxed_accuracy.std) out << *row.subsets.relaxed_accuracy.std;
    out << ',' << row.epochs << ',' << row.train_seconds << '\n';
  }
  out << "0,0.2,,,,,,\n";  // no measurements: random guessing
  return out.str();
}

std::string f1_vs_n_csv(const SweepResult& result) {
  std::ostringstream out;
  out.precision(10);
  out << 'n';
  for (const char* name : kClassNames) out << ",f1_" << name << ",f1_" << name << "_std";
  out << '\n';
  for (const auto& row : result.rows) {
    out << row.n;
    for (int c = 0; c < kClassCount; ++c) {
      out << ',' << row.subsets.f1[c].mean << ',';
      if (row.subsets.f1[c].std) out << *row.subsets.f1[c].std;
    }
    out << '\n';
  }
  out << "0";
  for (int c = 0; c < kClassCount; ++c) out << ",0.2,";
  out << '\n';
  return out.str();
}

}  // namespace qcorr
