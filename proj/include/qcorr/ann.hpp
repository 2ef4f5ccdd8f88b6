#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "qcorr/collective.hpp"
#include "qcorr/correlations.hpp"
#include "qcorr/dataset.hpp"

namespace qcorr {

struct MlpConfig {
  int input_dim = kFeatureCount;
  std::array<int, 2> hidden{512, 512};
  bool bn_input = true;  // batch normalization in front of the first dense layer
  std::vector<int> feature_indices;  // canonical indices consumed, ascending
  std::uint64_t init_seed = 0;

  static MlpConfig for_features(const std::vector<int>& retained,
                                std::uint64_t seed, bool bn_input = true,
                                std::array<int, 2> hidden = {512, 512});
};

struct TrainConfig {
  double learning_rate = 1e-4;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  int batch_phase1 = 4096;
  int batch_phase2 = 1 << 18;  // capped at the training-set size
  int max_epochs = 4096;       // per phase
  int patience = 10;           // epochs without validation improvement
  std::uint64_t seed = 0;
  bool verbose = false;  // per-epoch progress on stdout
};

struct EpochStats {
  int epoch = 0;  // 1-based, global across phases
  int phase = 1;
  double train_loss = 0.0;
  double val_loss = 0.0;
  double val_acc = 0.0;
};

struct TrainResult {
  std::vector<EpochStats> history;
  double best_val_loss = 0.0;
  int best_epoch = 0;
};

// Feed-forward classifier: [BN] -> dense(h0) -> ReLU -> BN -> dense(h1)
// -> ReLU -> BN -> dense(5) -> softmax. Samples are matrix columns.
template <typename Scalar>
class Mlp {
 public:
  using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  struct Dense {
    Mat w;  // out x in
    Vec b;
  };
  struct BatchNorm {
    Vec gamma, beta, running_mean, running_var;
  };
  // Trainable tensors in checkpoint order; running stats live beside them.
  struct Params {
    std::vector<BatchNorm> bn;
    std::vector<Dense> dense;
  };

  explicit Mlp(MlpConfig cfg);

  const MlpConfig& config() const { return cfg_; }
  Params& params() { return params_; }
  const Params& params() const { return params_; }

  // Class probabilities (kClassCount x batch). Training mode uses batch
  // statistics (batch >= 2) and, unless disabled, updates running stats.
  Mat forward(const Mat& x, bool training, bool update_running = true) const;

  // Mean cross-entropy and parameter gradients for one batch.
  Scalar forward_backward(const Mat& x, std::span<const std::uint8_t> labels,
                          Params& grads, bool update_running = true);

  Scalar loss(const Mat& x, std::span<const std::uint8_t> labels) const;

  std::vector<std::uint8_t> predict_batch(const Mat& x) const;
  std::pair<ClassLabel, std::array<double, kClassCount>> predict(
      const FeatureVector& f) const;

  void save(const std::string& path) const;
  static Mlp load(const std::string& path);

 private:
  Mat logits(const Mat& x, bool training, bool update_running,
             std::vector<Mat>* cache) const;

  MlpConfig cfg_;
  Params params_;
};

using MlpModel = Mlp<float>;

namespace detail {

// Batch-normalization primitives, shared by the network and its tests.
template <typename S>
Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic> bn_forward_train(
    typename Mlp<S>::BatchNorm& bn,
    const Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>& x, bool update_running,
    Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>& xhat_out,
    Eigen::Matrix<S, Eigen::Dynamic, 1>& inv_std_out);

template <typename S>
Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic> bn_forward_eval(
    const typename Mlp<S>::BatchNorm& bn,
    const Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>& x);

}  // namespace detail

// Trains in two phases (mini-batch, then large-batch fine-tuning), early
// stopping on validation loss, returns with the best-validation parameters
// restored into `model`.
template <typename Scalar>
TrainResult train(Mlp<Scalar>& model, const typename Mlp<Scalar>::Mat& train_x,
                  std::span<const std::uint8_t> train_y,
                  const typename Mlp<Scalar>::Mat& val_x,
                  std::span<const std::uint8_t> val_y, const TrainConfig& cfg);

// Max relative deviation between analytic and central-finite-difference
// gradients over every parameter. Meant for small double-precision models.
double gradient_check(Mlp<double>& model, const Eigen::MatrixXd& x,
                      std::span<const std::uint8_t> labels, double step = 1e-5);

// Feature columns (selected by canonical index) and labels of a dataset.
struct LabeledData {
  Eigen::MatrixXf x;  // features x samples
  std::vector<std::uint8_t> y;
};
LabeledData dataset_matrix(const Dataset& ds, const std::vector<int>& retained);

std::string history_csv(const TrainResult& result);

}  // namespace qcorr
