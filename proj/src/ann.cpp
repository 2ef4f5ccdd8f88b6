#include "qcorr/ann.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <random>
#include <sstream>

#include "qcorr/errors.hpp"

namespace qcorr {

namespace {

constexpr double kBnEps = 1e-5;
constexpr double kBnMomentum = 0.1;
constexpr int kEvalChunk = 16384;

template <typename S>
using MatT = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;
template <typename S>
using VecT = Eigen::Matrix<S, Eigen::Dynamic, 1>;

template <typename S>
MatT<S> softmax_columns(const MatT<S>& z) {
  MatT<S> p = z;
  for (Eigen::Index j = 0; j < p.cols(); ++j) {
    auto col = p.col(j);
    col.array() -= col.maxCoeff();
    col = col.array().exp();
    col /= col.sum();
  }
  return p;
}

template <typename S>
double ce_from_logits(const MatT<S>& z, std::span<const std::uint8_t> labels) {
  double loss = 0.0;
  for (Eigen::Index j = 0; j < z.cols(); ++j) {
    const S zmax = z.col(j).maxCoeff();
    double sum = 0.0;
    for (Eigen::Index r = 0; r < z.rows(); ++r)
      sum += std::exp(static_cast<double>(z(r, j) - zmax));
    loss += std::log(sum) + static_cast<double>(zmax) -
            static_cast<double>(z(labels[j], j));
  }
  return loss / static_cast<double>(z.cols());
}

template <typename S>
int argmax_low_tie(const VecT<S>& col) {
  int best = 0;
  for (int r = 1; r < col.size(); ++r)
    if (col(r) > col(best)) best = r;
  return best;
}

}  // namespace

MlpConfig MlpConfig::for_features(const std::vector<int>& retained,
                                  std::uint64_t seed, bool bn_input,
                                  std::array<int, 2> hidden) {
  MlpConfig cfg;
  cfg.input_dim = static_cast<int>(retained.size());
  cfg.hidden = hidden;
  cfg.bn_input = bn_input;
  cfg.feature_indices = retained;
  std::sort(cfg.feature_indices.begin(), cfg.feature_indices.end());
  cfg.init_seed = seed;
  return cfg;
}

template <typename S>
Mlp<S>::Mlp(MlpConfig cfg) : cfg_(std::move(cfg)) {
  if (cfg_.input_dim < 1) throw PreconditionError("Mlp: input_dim must be >= 1");

  const std::array<int, 3> in_dims{cfg_.input_dim, cfg_.hidden[0], cfg_.hidden[1]};
  const std::array<int, 3> out_dims{cfg_.hidden[0], cfg_.hidden[1], kClassCount};

  std::mt19937_64 rng(cfg_.init_seed);
  for (int k = 0; k < 3; ++k) {
    Dense d;
    d.w.resize(out_dims[k], in_dims[k]);
    // uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)): keeps the initial logits
    // small enough that the starting loss sits at ln(classes)
    const double limit = 1.0 / std::sqrt(static_cast<double>(in_dims[k]));
    std::uniform_real_distribution<double> dist(-limit, limit);
    for (Eigen::Index i = 0; i < d.w.size(); ++i)
      d.w.data()[i] = static_cast<S>(dist(rng));
    d.b = Vec::Zero(out_dims[k]);
    params_.dense.push_back(std::move(d));
  }
  for (int k = 0; k < 3; ++k) {
    if (k == 0 && !cfg_.bn_input) continue;
    BatchNorm bn;
    bn.gamma = Vec::Ones(in_dims[k]);
    bn.beta = Vec::Zero(in_dims[k]);
    bn.running_mean = Vec::Zero(in_dims[k]);
    bn.running_var = Vec::Ones(in_dims[k]);
    params_.bn.push_back(std::move(bn));
  }
}

template <typename S>
struct Caches {
  std::vector<MatT<S>> xhat;      // per BN layer
  std::vector<VecT<S>> inv_std;   // per BN layer
  std::array<MatT<S>, 3> dense_in;
  std::array<MatT<S>, 2> pre_act;
};

namespace detail {

template <typename S>
MatT<S> bn_forward_train(typename Mlp<S>::BatchNorm& bn, const MatT<S>& x,
                         bool update_running, MatT<S>& xhat_out,
                         VecT<S>& inv_std_out) {
  const auto m = static_cast<S>(x.cols());
  const VecT<S> mu = x.rowwise().mean();
  MatT<S> xc = x.colwise() - mu;
  const VecT<S> var = xc.array().square().rowwise().mean();
  inv_std_out = (var.array() + static_cast<S>(kBnEps)).rsqrt();
  xhat_out = xc.array().colwise() * inv_std_out.array();
  if (update_running) {
    const S mom = static_cast<S>(kBnMomentum);
    bn.running_mean = (S(1) - mom) * bn.running_mean + mom * mu;
    const VecT<S> unbiased = var * (m / (m - S(1)));
    bn.running_var = (S(1) - mom) * bn.running_var + mom * unbiased;
  }
  return (xhat_out.array().colwise() * bn.gamma.array()).colwise() +
         bn.beta.array();
}

template <typename S>
MatT<S> bn_forward_eval(const typename Mlp<S>::BatchNorm& bn, const MatT<S>& x) {
  const VecT<S> scale =
      bn.gamma.array() * (bn.running_var.array() + static_cast<S>(kBnEps)).rsqrt();
  const VecT<S> shift = bn.beta.array() - bn.running_mean.array() * scale.array();
  return (x.array().colwise() * scale.array()).colwise() + shift.array();
}

template MatT<float> bn_forward_train<float>(Mlp<float>::BatchNorm&, const MatT<float>&,
                                             bool, MatT<float>&, VecT<float>&);
template MatT<double> bn_forward_train<double>(Mlp<double>::BatchNorm&,
                                               const MatT<double>&, bool,
                                               MatT<double>&, VecT<double>&);
template MatT<float> bn_forward_eval<float>(const Mlp<float>::BatchNorm&,
                                            const MatT<float>&);
template MatT<double> bn_forward_eval<double>(const Mlp<double>::BatchNorm&,
                                              const MatT<double>&);

}  // namespace detail

namespace {

using detail::bn_forward_eval;
using detail::bn_forward_train;

template <typename S>
MatT<S> bn_backward(const typename Mlp<S>::BatchNorm& bn, const MatT<S>& xhat,
                    const VecT<S>& inv_std, const MatT<S>& dy,
                    typename Mlp<S>::BatchNorm& grad) {
  const S inv_m = S(1) / static_cast<S>(dy.cols());
  grad.gamma = (dy.array() * xhat.array()).rowwise().sum();
  grad.beta = dy.rowwise().sum();
  const MatT<S> dxhat = dy.array().colwise() * bn.gamma.array();
  const VecT<S> mean_dxhat = dxhat.rowwise().sum() * inv_m;
  const VecT<S> mean_dxhat_xhat =
      (dxhat.array() * xhat.array()).rowwise().sum() * inv_m;
  MatT<S> dx = dxhat;
  dx.colwise() -= mean_dxhat;
  dx.array() -= xhat.array().colwise() * mean_dxhat_xhat.array();
  dx.array().colwise() *= inv_std.array();
  return dx;
}

}  // namespace

template <typename S>
typename Mlp<S>::Mat Mlp<S>::forward(const Mat& x, bool training,
                                     bool update_running) const {
  if (x.rows() != cfg_.input_dim)
    throw PreconditionError("forward: feature dimension mismatch");
  if (!training) {
    Mat cur = x;
    int bn_idx = 0;
    for (int k = 0; k < 3; ++k) {
      if (k > 0 || cfg_.bn_input)
        cur = bn_forward_eval<S>(params_.bn[bn_idx++], cur);
      cur = (params_.dense[k].w * cur).colwise() + params_.dense[k].b;
      if (k < 2) cur = cur.cwiseMax(S(0));
    }
    return softmax_columns<S>(cur);
  }

  if (x.cols() < 2)
    throw PreconditionError("forward: training mode needs batch size >= 2");
  auto& self = const_cast<Mlp<S>&>(*this);  // running-stat update only
  Mat cur = x;
  int bn_idx = 0;
  for (int k = 0; k < 3; ++k) {
    if (k > 0 || cfg_.bn_input) {
      MatT<S> xhat;
      VecT<S> inv_std;
      cur = bn_forward_train<S>(self.params_.bn[bn_idx++], cur, update_running,
                                xhat, inv_std);
    }
    cur = (params_.dense[k].w * cur).colwise() + params_.dense[k].b;
    if (k < 2) cur = cur.cwiseMax(S(0));
  }
  if (!cur.allFinite()) throw NumericsError("forward: non-finite activations");
  return softmax_columns<S>(cur);
}

template <typename S>
S Mlp<S>::forward_backward(const Mat& x, std::span<const std::uint8_t> labels,
                           Params& grads, bool update_running) {
  if (x.rows() != cfg_.input_dim)
    throw PreconditionError("forward_backward: feature dimension mismatch");
  if (x.cols() < 2)
    throw PreconditionError("forward_backward: batch size must be >= 2");
  if (static_cast<Eigen::Index>(labels.size()) != x.cols())
    throw PreconditionError("forward_backward: label count mismatch");

  Caches<S> c;
  c.xhat.resize(params_.bn.size());
  c.inv_std.resize(params_.bn.size());
  grads.bn.resize(params_.bn.size());
  grads.dense.resize(3);

  Mat cur = x;
  int bn_idx = 0;
  for (int k = 0; k < 3; ++k) {
    if (k > 0 || cfg_.bn_input) {
      cur = bn_forward_train<S>(params_.bn[bn_idx], cur, update_running,
                                c.xhat[bn_idx], c.inv_std[bn_idx]);
      ++bn_idx;
    }
    c.dense_in[k] = cur;
    cur = (params_.dense[k].w * cur).colwise() + params_.dense[k].b;
    if (k < 2) {
      c.pre_act[k] = cur;
      cur = cur.cwiseMax(S(0));
    }
  }

  const double loss = ce_from_logits<S>(cur, labels);

  // d(loss)/d(logits) = (softmax - onehot) / batch
  Mat dy = softmax_columns<S>(cur);
  const S inv_m = S(1) / static_cast<S>(x.cols());
  for (Eigen::Index j = 0; j < dy.cols(); ++j) dy(labels[j], j) -= S(1);
  dy *= inv_m;

  for (int k = 2; k >= 0; --k) {
    grads.dense[k].w.noalias() = dy * c.dense_in[k].transpose();
    grads.dense[k].b = dy.rowwise().sum();
    Mat dx = params_.dense[k].w.transpose() * dy;
    if (k > 0 || cfg_.bn_input) {
      --bn_idx;
      dx = bn_backward<S>(params_.bn[bn_idx], c.xhat[bn_idx], c.inv_std[bn_idx],
                          dx, grads.bn[bn_idx]);
    }
    if (k > 0)
      dy = dx.array() * (c.pre_act[k - 1].array() > S(0)).template cast<S>();
  }
  return static_cast<S>(loss);
}

template <typename S>
S Mlp<S>::loss(const Mat& x, std::span<const std::uint8_t> labels) const {
  // inference-mode cross entropy; probabilities are safe to log here only
  // because logits go through the stable path below
  if (static_cast<Eigen::Index>(labels.size()) != x.cols())
    throw PreconditionError("loss: label count mismatch");
  Mat cur = x;
  int bn_idx = 0;
  for (int k = 0; k < 3; ++k) {
    if (k > 0 || cfg_.bn_input)
      cur = bn_forward_eval<S>(params_.bn[bn_idx++], cur);
    cur = (params_.dense[k].w * cur).colwise() + params_.dense[k].b;
    if (k < 2) cur = cur.cwiseMax(S(0));
  }
  return static_cast<S>(ce_from_logits<S>(cur, labels));
}

template <typename S>
std::vector<std::uint8_t> Mlp<S>::predict_batch(const Mat& x) const {
  const Mat probs = forward(x, /*training=*/false);
  std::vector<std::uint8_t> out(x.cols());
  for (Eigen::Index j = 0; j < x.cols(); ++j)
    out[j] = static_cast<std::uint8_t>(argmax_low_tie<S>(probs.col(j)));
  return out;
}

template <typename S>
std::pair<ClassLabel, std::array<double, kClassCount>> Mlp<S>::predict(
    const FeatureVector& f) const {
  for (int i = 0; i < kFeatureCount; ++i) {
    const bool retained =
        std::find(cfg_.feature_indices.begin(), cfg_.feature_indices.end(), i) !=
        cfg_.feature_indices.end();
    if (f.mask[i] != retained)
      throw PreconditionError("predict: feature mask does not match the model");
  }
  Mat x(cfg_.input_dim, 1);
  int r = 0;
  for (int idx : cfg_.feature_indices) x(r++, 0) = static_cast<S>(f.values[idx]);
  const Mat probs = forward(x, /*training=*/false);
  std::array<double, kClassCount> p{};
  for (int c = 0; c < kClassCount; ++c) p[c] = static_cast<double>(probs(c, 0));
  return {static_cast<ClassLabel>(argmax_low_tie<S>(probs.col(0))), p};
}

// ---------------------------------------------------------------------------
// checkpoint I/O: little-endian, f32 parameter payload

namespace {

static_assert(std::endian::native == std::endian::little,
              "checkpoint serialization assumes a little-endian host");

constexpr char kModelMagic[8] = {'Q', 'C', 'O', 'R', 'R', 'N', 'N', '1'};
constexpr std::uint32_t kModelVersion = 1;

template <typename T>
void put(std::ostream& out, T value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T take(std::istream& in) {
  T value;
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  return value;
}

template <typename S, typename Derived>
void put_array_f32(std::ostream& out, const Eigen::MatrixBase<Derived>& m) {
  for (Eigen::Index i = 0; i < m.size(); ++i)
    put<float>(out, static_cast<float>(m.derived().data()[i]));
}

template <typename S, typename Derived>
void take_array_f32(std::istream& in, Eigen::MatrixBase<Derived>& m) {
  for (Eigen::Index i = 0; i < m.size(); ++i)
    m.derived().data()[i] = static_cast<S>(take<float>(in));
}

}  // namespace

template <typename S>
void Mlp<S>::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open for writing: " + path);
  out.write(kModelMagic, 8);
  put<std::uint32_t>(out, kModelVersion);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(cfg_.input_dim));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(cfg_.hidden[0]));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(cfg_.hidden[1]));
  put<std::uint32_t>(out, kClassCount);
  put<std::uint8_t>(out, cfg_.bn_input ? 1 : 0);
  for (int i = 0; i < kFeatureCount; ++i) {
    const bool retained =
        std::find(cfg_.feature_indices.begin(), cfg_.feature_indices.end(), i) !=
        cfg_.feature_indices.end();
    put<std::uint8_t>(out, retained ? 1 : 0);
  }
  put<std::uint64_t>(out, cfg_.init_seed);
  for (const auto& bn : params_.bn) {
    put_array_f32<S>(out, bn.gamma);
    put_array_f32<S>(out, bn.beta);
    put_array_f32<S>(out, bn.running_mean);
    put_array_f32<S>(out, bn.running_var);
  }
  for (const auto& d : params_.dense) {
    put_array_f32<S>(out, d.w);
    put_array_f32<S>(out, d.b);
  }
  if (!out) throw IoError("write failed: " + path);
}

template <typename S>
Mlp<S> Mlp<S>::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open: " + path);
  char magic[8];
  in.read(magic, 8);
  if (!in || std::memcmp(magic, kModelMagic, 8) != 0)
    throw IoError("bad magic, not a model checkpoint: " + path);
  if (take<std::uint32_t>(in) != kModelVersion)
    throw IoError("unsupported checkpoint version: " + path);

  MlpConfig cfg;
  cfg.input_dim = static_cast<int>(take<std::uint32_t>(in));
  cfg.hidden[0] = static_cast<int>(take<std::uint32_t>(in));
  cfg.hidden[1] = static_cast<int>(take<std::uint32_t>(in));
  const auto classes = take<std::uint32_t>(in);
  if (classes != kClassCount) throw IoError("unexpected class count: " + path);
  cfg.bn_input = take<std::uint8_t>(in) != 0;
  for (int i = 0; i < kFeatureCount; ++i)
    if (take<std::uint8_t>(in) != 0) cfg.feature_indices.push_back(i);
  cfg.init_seed = take<std::uint64_t>(in);
  if (!cfg.feature_indices.empty() &&
      static_cast<int>(cfg.feature_indices.size()) != cfg.input_dim)
    throw IoError("retained-feature mask does not match input size: " + path);

  Mlp<S> model(cfg);
  for (auto& bn : model.params_.bn) {
    take_array_f32<S>(in, bn.gamma);
    take_array_f32<S>(in, bn.beta);
    take_array_f32<S>(in, bn.running_mean);
    take_array_f32<S>(in, bn.running_var);
  }
  for (auto& d : model.params_.dense) {
    take_array_f32<S>(in, d.w);
    take_array_f32<S>(in, d.b);
  }
  if (!in) throw IoError("checkpoint truncated: " + path);
  in.peek();
  if (!in.eof()) throw IoError("checkpoint has trailing bytes: " + path);
  return model;
}

// ---------------------------------------------------------------------------
// training

namespace {

template <typename S>
typename Mlp<S>::Params zeros_like(const typename Mlp<S>::Params& p) {
  typename Mlp<S>::Params z;
  for (const auto& bn : p.bn) {
    typename Mlp<S>::BatchNorm g;
    g.gamma = VecT<S>::Zero(bn.gamma.size());
    g.beta = VecT<S>::Zero(bn.beta.size());
    z.bn.push_back(std::move(g));
  }
  for (const auto& d : p.dense) {
    typename Mlp<S>::Dense g;
    g.w = MatT<S>::Zero(d.w.rows(), d.w.cols());
    g.b = VecT<S>::Zero(d.b.size());
    z.dense.push_back(std::move(g));
  }
  return z;
}

// visits every trainable tensor (not the running statistics)
template <typename S, typename Fn>
void for_each_trainable(typename Mlp<S>::Params& p, Fn&& fn) {
  for (std::size_t i = 0; i < p.bn.size(); ++i) {
    fn(p.bn[i].gamma);
    fn(p.bn[i].beta);
  }
  for (std::size_t i = 0; i < p.dense.size(); ++i) {
    fn(p.dense[i].w);
    fn(p.dense[i].b);
  }
}

template <typename S>
struct AdamState {
  typename Mlp<S>::Params m, v;
  long long t = 0;
};

template <typename S>
void adam_step(typename Mlp<S>::Params& params, typename Mlp<S>::Params& grads,
               AdamState<S>& st, const TrainConfig& cfg) {
  ++st.t;
  const S b1 = static_cast<S>(cfg.adam_beta1);
  const S b2 = static_cast<S>(cfg.adam_beta2);
  const S eps = static_cast<S>(cfg.adam_eps);
  const S bc1 = S(1) - static_cast<S>(std::pow(cfg.adam_beta1, st.t));
  const S bc2 = S(1) - static_cast<S>(std::pow(cfg.adam_beta2, st.t));
  const S step = static_cast<S>(cfg.learning_rate) / bc1;

  // walk the three containers in lockstep
  auto update = [&](auto& p, const auto& g, auto& m, auto& v) {
    m.array() = b1 * m.array() + (S(1) - b1) * g.array();
    v.array() = b2 * v.array() + (S(1) - b2) * g.array().square();
    p.array() -= step * m.array() / ((v.array() / bc2).sqrt() + eps);
  };
  for (std::size_t i = 0; i < params.bn.size(); ++i) {
    update(params.bn[i].gamma, grads.bn[i].gamma, st.m.bn[i].gamma, st.v.bn[i].gamma);
    update(params.bn[i].beta, grads.bn[i].beta, st.m.bn[i].beta, st.v.bn[i].beta);
  }
  for (std::size_t i = 0; i < params.dense.size(); ++i) {
    update(params.dense[i].w, grads.dense[i].w, st.m.dense[i].w, st.v.dense[i].w);
    update(params.dense[i].b, grads.dense[i].b, st.m.dense[i].b, st.v.dense[i].b);
  }
}

template <typename S>
std::pair<double, double> evaluate(const Mlp<S>& model,
                                   const typename Mlp<S>::Mat& x,
                                   std::span<const std::uint8_t> y) {
  double loss_sum = 0.0;
  std::uint64_t correct = 0;
  for (Eigen::Index start = 0; start < x.cols(); start += kEvalChunk) {
    const Eigen::Index m = std::min<Eigen::Index>(kEvalChunk, x.cols() - start);
    const typename Mlp<S>::Mat chunk = x.middleCols(start, m);
    loss_sum += static_cast<double>(
                    model.loss(chunk, y.subspan(start, m))) *
                static_cast<double>(m);
    const auto pred = model.predict_batch(chunk);
    for (Eigen::Index j = 0; j < m; ++j)
      if (pred[j] == y[start + j]) ++correct;
  }
  return {loss_sum / static_cast<double>(x.cols()),
          static_cast<double>(correct) / static_cast<double>(x.cols())};
}

}  // namespace

template <typename S>
TrainResult train(Mlp<S>& model, const typename Mlp<S>::Mat& train_x,
                  std::span<const std::uint8_t> train_y,
                  const typename Mlp<S>::Mat& val_x,
                  std::span<const std::uint8_t> val_y, const TrainConfig& cfg) {
  const Eigen::Index n = train_x.cols();
  if (static_cast<Eigen::Index>(train_y.size()) != n ||
      static_cast<Eigen::Index>(val_y.size()) != val_x.cols())
    throw PreconditionError("train: label count mismatch");
  if (n < 2) throw PreconditionError("train: need at least 2 training samples");
  if (cfg.patience < 1) throw PreconditionError("train: patience must be >= 1");

  TrainResult result;
  typename Mlp<S>::Params best = model.params();
  double best_loss = std::numeric_limits<double>::infinity();
  int best_epoch = 0;
  int global_epoch = 0;

  std::vector<Eigen::Index> perm(n);
  std::iota(perm.begin(), perm.end(), Eigen::Index{0});

  for (int phase = 1; phase <= 2; ++phase) {
    const Eigen::Index batch = std::min<Eigen::Index>(
        phase == 1 ? cfg.batch_phase1 : cfg.batch_phase2, n);
    if (batch < 2) throw PreconditionError("train: batch size must be >= 2");

    std::mt19937_64 rng(cfg.seed * 2 + phase - 1);
    AdamState<S> adam;
    adam.m = zeros_like<S>(model.params());
    adam.v = zeros_like<S>(model.params());
    auto grads = zeros_like<S>(model.params());

    typename Mlp<S>::Mat batch_x(train_x.rows(), batch);
    std::vector<std::uint8_t> batch_y(batch);

    int bad_epochs = 0;
    for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
      std::shuffle(perm.begin(), perm.end(), rng);
      double loss_sum = 0.0;
      Eigen::Index seen = 0;
      for (Eigen::Index start = 0; start < n; start += batch) {
        const Eigen::Index m = std::min<Eigen::Index>(batch, n - start);
        if (m < 2) continue;  // batch-norm cannot use a singleton remainder
        for (Eigen::Index j = 0; j < m; ++j) {
          batch_x.col(j) = train_x.col(perm[start + j]);
          batch_y[j] = train_y[perm[start + j]];
        }
        const auto view_x = batch_x.leftCols(m);
        const S loss = model.forward_backward(
            view_x, std::span<const std::uint8_t>(batch_y.data(), m), grads);
        adam_step<S>(model.params(), grads, adam, cfg);
        loss_sum += static_cast<double>(loss) * static_cast<double>(m);
        seen += m;
      }
      const double train_loss = loss_sum / static_cast<double>(seen);
      const auto [val_loss, val_acc] = evaluate<S>(model, val_x, val_y);
      ++global_epoch;
      if (!std::isfinite(train_loss) || !std::isfinite(val_loss))
        throw NumericsError("train: non-finite loss at epoch " +
                            std::to_string(global_epoch));
      result.history.push_back({global_epoch, phase, train_loss, val_loss, val_acc});
      if (cfg.verbose) {
        std::printf("epoch %4d  phase %d  train %.5f  val %.5f  acc %.4f\n",
                    global_epoch, phase, train_loss, val_loss, val_acc);
        std::fflush(stdout);
      }

      if (val_loss < best_loss) {
        best_loss = val_loss;
        best = model.params();
        best_epoch = global_epoch;
        bad_epochs = 0;
      } else if (++bad_epochs >= cfg.patience) {
        break;
      }
    }
    model.params() = best;  // phase 2 fine-tunes the phase-1 optimum
  }

  result.best_val_loss = best_loss;
  result.best_epoch = best_epoch;
  return result;
}

double gradient_check(Mlp<double>& model, const Eigen::MatrixXd& x,
                      std::span<const std::uint8_t> labels, double step) {
  auto grads = zeros_like<double>(model.params());
  model.forward_backward(x, labels, grads, /*update_running=*/false);

  // training-mode loss with frozen running statistics
  auto loss_at = [&]() {
    const Eigen::MatrixXd probs = model.forward(x, true, false);
    double loss = 0.0;
    for (Eigen::Index j = 0; j < x.cols(); ++j)
      loss -= std::log(std::max(probs(labels[j], j), 1e-300));
    return loss / static_cast<double>(x.cols());
  };

  double max_rel = 0.0;
  auto check_tensor = [&](auto& param, const auto& grad) {
    for (Eigen::Index i = 0; i < param.size(); ++i) {
      const double orig = param.data()[i];
      param.data()[i] = orig + step;
      const double up = loss_at();
      param.data()[i] = orig - step;
      const double down = loss_at();
      param.data()[i] = orig;
      const double numeric = (up - down) / (2.0 * step);
      const double analytic = grad.data()[i];
      const double rel = std::abs(numeric - analytic) /
                         std::max(std::abs(numeric) + std::abs(analytic), 1e-8);
      max_rel = std::max(max_rel, rel);
    }
  };
  for (std::size_t i = 0; i < model.params().bn.size(); ++i) {
    check_tensor(model.params().bn[i].gamma, grads.bn[i].gamma);
    check_tensor(model.params().bn[i].beta, grads.bn[i].beta);
  }
  for (std::size_t i = 0; i < model.params().dense.size(); ++i) {
    check_tensor(model.params().dense[i].w, grads.dense[i].w);
    check_tensor(model.params().dense[i].b, grads.dense[i].b);
  }
  return max_rel;
}

LabeledData dataset_matrix(const Dataset& ds, const std::vector<int>& retained) {
  for (int idx : retained)
    if (idx < 0 || idx >= kFeatureCount)
      throw PreconditionError("dataset_matrix: feature index out of range");
  LabeledData out;
  out.x.resize(static_cast<Eigen::Index>(retained.size()),
               static_cast<Eigen::Index>(ds.records.size()));
  out.y.resize(ds.records.size());
  for (std::size_t j = 0; j < ds.records.size(); ++j) {
    const auto& rec = ds.records[j];
    for (std::size_t r = 0; r < retained.size(); ++r)
      out.x(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j)) =
          static_cast<float>(rec.features[retained[r]]);
    out.y[j] = rec.label;
  }
  return out;
}

std::string history_csv(const TrainResult& result) {
  std::ostringstream out;
  out.precision(10);
  out << "epoch,phase,train_loss,val_loss,val_acc\n";
  for (const auto& row : result.history)
    out << row.epoch << ',' << row.phase << ',' << row.train_loss << ','
        << row.val_loss << ',' << row.val_acc << '\n';
  return out.str();
}

template class Mlp<float>;
template class Mlp<double>;
template TrainResult train<float>(Mlp<float>&, const Mlp<float>::Mat&,
                                  std::span<const std::uint8_t>,
                                  const Mlp<float>::Mat&,
                                  std::span<const std::uint8_t>,
                                  const TrainConfig&);
template TrainResult train<double>(Mlp<double>&, const Mlp<double>::Mat&,
                                   std::span<const std::uint8_t>,
                                   const Mlp<double>::Mat&,
                                   std::span<const std::uint8_t>,
                                   const TrainConfig&);

}  // namespace qcorr
