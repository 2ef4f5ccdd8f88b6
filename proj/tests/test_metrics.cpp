#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "qcorr/errors.hpp"
#include "qcorr/metrics.hpp"

using namespace qcorr;

TEST_CASE("confusion counts hand-tallied triples") {
  const std::vector<std::uint8_t> truth{0, 0, 1, 2, 4, 4, 3, 2, 2};
  const std::vector<std::uint8_t> pred{0, 1, 1, 2, 4, 3, 3, 2, 0};
  const ConfusionMatrix cm = confusion(truth, pred);
  CHECK(cm.counts[0][0] == 1);
  CHECK(cm.counts[0][1] == 1);
  CHECK(cm.counts[1][1] == 1);
  CHECK(cm.counts[2][2] == 2);
  CHECK(cm.counts[2][0] == 1);
  CHECK(cm.counts[4][4] == 1);
  CHECK(cm.counts[4][3] == 1);
  CHECK(cm.counts[3][3] == 1);
  CHECK(cm.total() == truth.size());

  CHECK_THROWS_AS(confusion(truth, std::vector<std::uint8_t>{0}), PreconditionError);
}

TEST_CASE("perfect predictions give a diagonal matrix and unit scores") {
  std::vector<std::uint8_t> truth;
  for (int c = 0; c < kClassCount; ++c)
    for (int k = 0; k < 7; ++k) truth.push_back(static_cast<std::uint8_t>(c));
  const ConfusionMatrix cm = confusion(truth, truth);
  for (int i = 0; i < kClassCount; ++i)
    for (int j = 0; j < kClassCount; ++j)
      CHECK(cm.counts[i][j] == (i == j ? 7u : 0u));

  const ScoreReport rep = scores(cm);
  CHECK(rep.accuracy.mean == 1.0);
  CHECK(rep.relaxed_accuracy.mean == 1.0);
  for (int c = 0; c < kClassCount; ++c) {
    CHECK(rep.recall[c].mean == 1.0);
    CHECK(rep.precision[c].mean == 1.0);
    CHECK(rep.f1[c].mean == 1.0);
  }
}

TEST_CASE("constant predictor fills a single column") {
  std::vector<std::uint8_t> truth{0, 1, 2, 3, 4, 0, 1, 2, 3, 4};
  std::vector<std::uint8_t> pred(truth.size(), 0);  // everything "sep"
  const ConfusionMatrix cm = confusion(truth, pred);
  for (int c = 0; c < kClassCount; ++c) {
    CHECK(cm.counts[c][0] == 2);
    for (int p = 1; p < kClassCount; ++p) CHECK(cm.counts[c][p] == 0);
  }
  const ScoreReport rep = scores(cm);
  CHECK(rep.accuracy.mean == doctest::Approx(0.2));
  // sep/ent merge credits true-ent-predicted-sep
  CHECK(rep.relaxed_accuracy.mean == doctest::Approx(0.4));
  for (int c = 1; c < kClassCount; ++c) {
    CHECK(rep.empty_col[c]);
    CHECK(rep.f1[c].mean == 0.0);
  }
}

TEST_CASE("scores reproduce the published steer row at n=10") {
  // recall 99.50 %, precision 99.27 % => F1 99.39 %
  ConfusionMatrix cm;
  cm.counts[3][3] = 9950;
  cm.counts[3][0] = 50;       // steer row sums to 10000
  cm.counts[2][3] = 73;       // predicted-steer column sums to 10023
  cm.counts[2][2] = 9000;
  cm.counts[0][0] = 9000;
  const ScoreReport rep = scores(cm);
  CHECK(rep.recall[3].mean * 100 == doctest::Approx(99.50).epsilon(5e-3));
  CHECK(rep.precision[3].mean * 100 == doctest::Approx(99.27).epsilon(5e-3));
  CHECK(rep.f1[3].mean * 100 == doctest::Approx(99.39).epsilon(5e-3));
}

TEST_CASE("zero predicted-FEF column reports F1 = 0") {
  ConfusionMatrix cm;
  for (int c = 0; c < kClassCount; ++c) cm.counts[c][c] = 10;
  cm.counts[2][2] = 0;
  cm.counts[2][1] = 10;  // all FEF states land elsewhere, none predicted FEF
  const ScoreReport rep = scores(cm);
  CHECK(rep.empty_col[2]);
  CHECK(rep.precision[2].mean == 0.0);
  CHECK(rep.recall[2].mean == 0.0);
  CHECK(rep.f1[2].mean == 0.0);
}

TEST_CASE("relaxed accuracy complements its error rate exactly") {
  std::mt19937_64 rng(5);
  std::vector<std::uint8_t> truth(1000), pred(1000);
  for (auto& v : truth) v = static_cast<std::uint8_t>(rng() % kClassCount);
  for (auto& v : pred) v = static_cast<std::uint8_t>(rng() % kClassCount);
  const ConfusionMatrix cm = confusion(truth, pred);
  const ScoreReport rep = scores(cm);

  std::uint64_t relaxed_errors = 0;
  for (int c = 0; c < kClassCount; ++c)
    for (int p = 0; p < kClassCount; ++p)
      if (c != p && !(c <= 1 && p <= 1)) relaxed_errors += cm.counts[c][p];
  CHECK(rep.relaxed_accuracy.mean +
            static_cast<double>(relaxed_errors) / static_cast<double>(cm.total()) ==
        doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("micro recall equals accuracy on equalized data") {
  std::mt19937_64 rng(6);
  std::vector<std::uint8_t> truth, pred;
  for (int c = 0; c < kClassCount; ++c)
    for (int k = 0; k < 200; ++k) {
      truth.push_back(static_cast<std::uint8_t>(c));
      pred.push_back(static_cast<std::uint8_t>(rng() % kClassCount));
    }
  const ScoreReport rep = scores(confusion(truth, pred));
  double mean_recall = 0.0;
  for (int c = 0; c < kClassCount; ++c) mean_recall += rep.recall[c].mean;
  CHECK(mean_recall / kClassCount == doctest::Approx(rep.accuracy.mean).epsilon(1e-12));
}

TEST_CASE("subset scores: identical shards have zero spread") {
  std::vector<std::uint8_t> truth, pred;
  for (int k = 0; k < 1200; ++k) {
    truth.push_back(static_cast<std::uint8_t>(k % kClassCount));
    pred.push_back(static_cast<std::uint8_t>(k % kClassCount));
  }
  const ScoreReport rep = subset_scores(truth, pred, 12, 3);
  REQUIRE(rep.accuracy.std.has_value());
  CHECK(*rep.accuracy.std == 0.0);
  for (int c = 0; c < kClassCount; ++c) {
    CHECK(rep.f1[c].mean == 1.0);
    CHECK(*rep.f1[c].std == 0.0);
  }
}

TEST_CASE("subset scores on noisy predictions have F1 spread of order 1e-2") {
  std::mt19937_64 rng(7);
  std::vector<std::uint8_t> truth(24000), pred;
  for (auto& v : truth) v = static_cast<std::uint8_t>(rng() % kClassCount);
  for (auto v : truth)
    pred.push_back(rng() % 10 == 0 ? static_cast<std::uint8_t>(rng() % kClassCount) : v);
  const ScoreReport rep = subset_scores(truth, pred, 12, 8);
  for (int c = 0; c < kClassCount; ++c) {
    REQUIRE(rep.f1[c].std.has_value());
    CHECK(*rep.f1[c].std > 1e-4);
    CHECK(*rep.f1[c].std < 2e-2);
  }
}

TEST_CASE("k=1 reports no standard deviation") {
  std::vector<std::uint8_t> truth(100), pred(100);
  for (int k = 0; k < 100; ++k)
    truth[k] = pred[k] = static_cast<std::uint8_t>(k % kClassCount);
  const ScoreReport rep = subset_scores(truth, pred, 1, 0);
  CHECK_FALSE(rep.accuracy.std.has_value());
  CHECK_FALSE(rep.f1[0].std.has_value());
}

TEST_CASE("subset scores demand enough data") {
  std::vector<std::uint8_t> tiny(100, 0);
  CHECK_THROWS_AS(subset_scores(tiny, tiny, 12, 0), PreconditionError);
}

TEST_CASE("scores of summed shard matrices equal full-set scores") {
  std::mt19937_64 rng(9);
  std::vector<std::uint8_t> truth(6000), pred(6000);
  for (auto& v : truth) v = static_cast<std::uint8_t>(rng() % kClassCount);
  for (auto& v : pred) v = static_cast<std::uint8_t>(rng() % kClassCount);

  ConfusionMatrix sum;
  for (int shard = 0; shard < 12; ++shard) {
    const std::size_t lo = shard * 500, hi = lo + 500;
    sum += confusion(std::span(truth).subspan(lo, hi - lo),
                     std::span(pred).subspan(lo, hi - lo));
  }
  const ConfusionMatrix full = confusion(truth, pred);
  CHECK(sum.counts == full.counts);
  CHECK(scores(sum).accuracy.mean == scores(full).accuracy.mean);
}

TEST_CASE("csv emitters produce one line per metric") {
  ConfusionMatrix cm;
  for (int c = 0; c < kClassCount; ++c) cm.counts[c][c] = 5;
  const std::string grid = confusion_csv(cm);
  CHECK(std::count(grid.begin(), grid.end(), '\n') == kClassCount + 1);
  const std::string table = scores_csv(scores(cm));
  CHECK(std::count(table.begin(), table.end(), '\n') == 2 + 3 * kClassCount + 1);
}
