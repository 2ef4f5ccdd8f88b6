// Slow end-to-end training checks on generated data. Kept out of the fast
// unit suite; the acceptance binary covers the full-scale protocol.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Core>
#include <algorithm>
#include <random>

#include "qcorr/ann.hpp"
#include "qcorr/dataset.hpp"
#include "qcorr/metrics.hpp"
#include "qcorr/sweep.hpp"

using namespace qcorr;

namespace {

SplitResult make_splits(std::uint64_t raw_count, std::uint64_t seed) {
  const Dataset raw = generate(raw_count, StateSeed{seed, 0}, 2);
  const Dataset eq = equalize(raw, seed + 1);
  return split(eq, seed + 2);
}

}  // namespace

TEST_CASE("labels shuffled uniformly train to chance accuracy") {
  SplitResult parts = make_splits(60000, 301);
  std::mt19937_64 rng(302);
  // break any feature-label relation; the label marginal stays uniform
  std::vector<std::uint8_t> shuffled;
  for (const auto& rec : parts.train.records) shuffled.push_back(rec.label);
  std::shuffle(shuffled.begin(), shuffled.end(), rng);
  for (std::size_t i = 0; i < shuffled.size(); ++i)
    parts.train.records[i].label = shuffled[i];
  refresh_class_counts(parts.train);

  TrainConfig cfg;
  cfg.seed = 303;
  cfg.max_epochs = 12;
  cfg.patience = 12;
  const auto& retained = reduction_plan().retained_set(10);
  TrainedModel trained = train_on(parts.train, parts.validation, retained, cfg);

  const LabeledData val = dataset_matrix(parts.validation, retained);
  const auto pred = trained.model.predict_batch(val.x);
  double correct = 0;
  for (std::size_t j = 0; j < val.y.size(); ++j)
    if (pred[j] == val.y[j]) ++correct;
  const double acc = correct / static_cast<double>(val.y.size());
  CHECK(acc == doctest::Approx(0.2).epsilon(0.02 / 0.2));
}

TEST_CASE("a 1e5-state equalized run reaches 85% validation accuracy") {
  // about 3.2e5 raw states equalize to roughly 1e5
  SplitResult parts = make_splits(320000, 304);
  REQUIRE(parts.train.records.size() +
              parts.validation.records.size() + parts.test.records.size() >=
          90000);

  TrainConfig cfg;
  cfg.seed = 305;
  TrainedModel trained =
      train_on(parts.train, parts.validation, reduction_plan().retained_set(10), cfg);

  const EvalOutput eval = evaluate_on(trained.model, parts.test, 12, 306);
  CHECK(eval.point.accuracy.mean >= 0.85);

  // the singlet sits deep inside the Bell class
  Eigen::Vector4cd psi;
  psi << 0, 1, -1, 0;
  psi /= std::sqrt(2.0);
  const FeatureVector f = features(ComplexMatrix4(psi * psi.adjoint()));
  const auto [label, probs] = trained.model.predict(f);
  CHECK(label == ClassLabel::Bell);
  CHECK(probs[static_cast<int>(ClassLabel::Bell)] > 0.5);
}
