#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <istream>
#include <numbers>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>
#include <vector>

#include <Eigen/Core>

#include "a2lc/types.hpp"

namespace a2lc {

namespace detail {

template <typename Scalar>
Scalar activate(Activation act, Scalar z) {
  switch (act) {
    case Activation::kRelu:
      return z > Scalar(0) ? z : Scalar(0);
    case Activation::kGelu:
      // x * Phi(x), exact erf form
      return Scalar(0.5) * z * (Scalar(1) + std::erf(z / std::sqrt(Scalar(2))));
    case Activation::kMish:
      return z * std::tanh(std::log1p(std::exp(z)));
  }
  return z;
}

template <typename Scalar>
Scalar activate_grad(Activation act, Scalar z) {
  switch (act) {
    case Activation::kRelu:
      return z > Scalar(0) ? Scalar(1) : Scalar(0);
    case Activation::kGelu: {
      const Scalar phi =
          std::exp(-z * z / Scalar(2)) / std::sqrt(Scalar(2) * std::numbers::pi_v<Scalar>);
      return Scalar(0.5) * (Scalar(1) + std::erf(z / std::sqrt(Scalar(2)))) + z * phi;
    }
    case Activation::kMish: {
      const Scalar sp = std::log1p(std::exp(z));       // softplus
      const Scalar t = std::tanh(sp);
      const Scalar sig = Scalar(1) / (Scalar(1) + std::exp(-z));
      return t + z * sig * (Scalar(1) - t * t);
    }
  }
  return Scalar(1);
}

}  // namespace detail

template <typename Scalar>
Eigen::Vector<Scalar, Eigen::Dynamic> softmax(
    const Eigen::Ref<const Eigen::Vector<Scalar, Eigen::Dynamic>>& logits) {
  const Scalar m = logits.maxCoeff();
  Eigen::Vector<Scalar, Eigen::Dynamic> p = (logits.array() - m).exp();
  p /= p.sum();
  return p;
}

/// Plain fully connected network: dims[0] -> ... -> dims.back(), the last
/// layer is linear (softmax applied by probs()). Weights are He-style
/// Gaussian, deterministic given the seed.
template <typename Scalar>
class Mlp {
 public:
  using Vector = Eigen::Vector<Scalar, Eigen::Dynamic>;
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

  Mlp() = default;

  Mlp(std::vector<Eigen::Index> dims, Activation act, std::uint64_t seed)
      : dims_(std::move(dims)), act_(act) {
    if (dims_.size() < 2) throw std::invalid_argument("Mlp: need at least input and output dims");
    std::mt19937_64 rng(seed);
    std::normal_distribution<Scalar> gauss(Scalar(0), Scalar(1));
    weights_.reserve(dims_.size() - 1);
    biases_.reserve(dims_.size() - 1);
    for (std::size_t l = 0; l + 1 < dims_.size(); ++l) {
      Matrix w(dims_[l + 1], dims_[l]);
      const Scalar scale = std::sqrt(Scalar(2) / Scalar(dims_[l]));
      for (Eigen::Index i = 0; i < w.rows(); ++i)
        for (Eigen::Index j = 0; j < w.cols(); ++j) w(i, j) = scale * gauss(rng);
      weights_.push_back(std::move(w));
      biases_.push_back(Vector::Zero(dims_[l + 1]));
    }
  }

  Eigen::Index input_dim() const { return dims_.front(); }
  Eigen::Index output_dim() const { return dims_.back(); }
  std::size_t num_layers() const { return weights_.size(); }
  Activation activation() const { return act_; }
  const std::vector<Eigen::Index>& dims() const { return dims_; }

  std::vector<Matrix>& weights() { return weights_; }
  std::vector<Vector>& biases() { return biases_; }
  const std::vector<Matrix>& weights() const { return weights_; }
  const std::vector<Vector>& biases() const { return biases_; }

  Vector logits(const Eigen::Ref<const Vector>& x) const {
    check_input(x);
    Vector h = x;
    for (std::size_t l = 0; l < weights_.size(); ++l) {
      Vector z = weights_[l] * h + biases_[l];
      if (l + 1 < weights_.size())
        h = z.unaryExpr([this](Scalar v) { return detail::activate(act_, v); });
      else
        h = std::move(z);
    }
    return h;
  }

  Vector probs(const Eigen::Ref<const Vector>& x) const {
    Vector z = logits(x);
    return softmax<Scalar>(z);
  }

  /// Activation of the last hidden layer; the raw input when the net has no
  /// hidden layer.
  Vector last_hidden(const Eigen::Ref<const Vector>& x) const {
    check_input(x);
    Vector h = x;
    for (std::size_t l = 0; l + 1 < weights_.size(); ++l) {
      Vector z = weights_[l] * h + biases_[l];
      h = z.unaryExpr([this](Scalar v) { return detail::activate(act_, v); });
    }
    return h;
  }

 private:
  void check_input(const Eigen::Ref<const Vector>& x) const {
    if (x.size() != input_dim())
      throw std::invalid_argument("Mlp: input dimension mismatch, got " +
                                  std::to_string(x.size()) + " expected " +
                                  std::to_string(input_dim()));
  }

  std::vector<Eigen::Index> dims_;
  Activation act_ = Activation::kRelu;
  std::vector<Matrix> weights_;
  std::vector<Vector> biases_;
};

template <typename Scalar>
struct MlpGradients {
  std::vector<typename Mlp<Scalar>::Matrix> dw;
  std::vector<typename Mlp<Scalar>::Vector> db;
  Scalar loss = Scalar(0);
};

/// Mean weighted cross-entropy over the columns of x:
///   L = (1/N) sum_i w_i * CE(y_i, softmax(net(x_i))).
/// CE computed via logsumexp for stability.
template <typename Scalar>
Scalar weighted_ce_loss(const Mlp<Scalar>& net,
                        const typename Mlp<Scalar>::Matrix& x,
                        const std::vector<int>& y,
                        const typename Mlp<Scalar>::Vector& sample_weights) {
  const Eigen::Index n = x.cols();
  if (n == 0) throw std::invalid_argument("weighted_ce_loss: empty batch");
  Scalar total = Scalar(0);
  for (Eigen::Index i = 0; i < n; ++i) {
    typename Mlp<Scalar>::Vector z = net.logits(x.col(i));
    const Scalar m = z.maxCoeff();
    const Scalar lse = m + std::log((z.array() - m).exp().sum());
    total += sample_weights(i) * (lse - z(y[static_cast<std::size_t>(i)]));
  }
  return total / Scalar(n);
}

/// Analytic gradients of weighted_ce_loss w.r.t. every weight and bias.
template <typename Scalar>
MlpGradients<Scalar> backprop(const Mlp<Scalar>& net,
                              const typename Mlp<Scalar>::Matrix& x,
                              const std::vector<int>& y,
                              const typename Mlp<Scalar>::Vector& sample_weights) {
  using Vector = typename Mlp<Scalar>::Vector;
  const Eigen::Index n = x.cols();
  if (n == 0) throw std::invalid_argument("backprop: empty batch");
  const std::size_t layers = net.num_layers();

  MlpGradients<Scalar> g;
  g.dw.reserve(layers);
  g.db.reserve(layers);
  for (std::size_t l = 0; l < layers; ++l) {
    g.dw.emplace_back(Mlp<Scalar>::Matrix::Zero(net.weights()[l].rows(), net.weights()[l].cols()));
    g.db.emplace_back(Vector::Zero(net.biases()[l].size()));
  }

  std::vector<Vector> acts(layers + 1);   // post-activation per layer, acts[0] = input
  std::vector<Vector> pre(layers);        // pre-activation
  for (Eigen::Index i = 0; i < n; ++i) {
    acts[0] = x.col(i);
    for (std::size_t l = 0; l < layers; ++l) {
      pre[l] = net.weights()[l] * acts[l] + net.biases()[l];
      if (l + 1 < layers)
        acts[l + 1] = pre[l].unaryExpr(
            [&net](Scalar v) { return detail::activate(net.activation(), v); });
      else
        acts[l + 1] = pre[l];
    }
    Vector p = softmax<Scalar>(acts[layers]);
    const int yi = y[static_cast<std::size_t>(i)];
    const Scalar wi = sample_weights(i);

    const Scalar m = pre[layers - 1].maxCoeff();
    const Scalar lse = m + std::log((pre[layers - 1].array() - m).exp().sum());
    g.loss += wi * (lse - pre[layers - 1](yi));

    Vector delta = p;                     // dL_i/dlogits = w_i/N * (p - onehot)
    delta(yi) -= Scalar(1);
    delta *= wi / Scalar(n);
    for (std::size_t l = layers; l-- > 0;) {
      g.dw[l].noalias() += delta * acts[l].transpose();
      g.db[l] += delta;
      if (l > 0) {
        Vector back = net.weights()[l].transpose() * delta;
        delta = back.cwiseProduct(pre[l - 1].unaryExpr(
            [&net](Scalar v) { return detail::activate_grad(net.activation(), v); }));
      }
    }
  }
  g.loss /= Scalar(n);
  return g;
}

struct SgdOptions {
  int epochs = 30;
  double learning_rate = 0.05;
  int batch_size = 64;
  std::uint64_t seed = 1;
};

/// Plain mini-batch SGD, no momentum. Per-epoch shuffle is seeded; batches
/// are consecutive chunks of the permutation, indices sorted within a batch
/// so full-batch gradients accumulate in a fixed order. When epoch_loss is
/// given it receives the full-set loss before training and after each epoch.
template <typename Scalar>
void sgd_train(Mlp<Scalar>& net,
               const typename Mlp<Scalar>::Matrix& x,
               const std::vector<int>& y,
               const typename Mlp<Scalar>::Vector& sample_weights,
               const SgdOptions& opt,
               std::vector<double>* epoch_loss = nullptr) {
  const Eigen::Index n = x.cols();
  if (n == 0) throw std::invalid_argument("sgd_train: empty training set");
  if (opt.epochs < 0 || opt.batch_size <= 0 || opt.learning_rate <= 0)
    throw std::invalid_argument("sgd_train: bad options");

  std::mt19937_64 rng(opt.seed);
  std::vector<Eigen::Index> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), Eigen::Index(0));
  const Eigen::Index bs = std::min<Eigen::Index>(opt.batch_size, n);

  if (epoch_loss) epoch_loss->push_back(weighted_ce_loss(net, x, y, sample_weights));
  for (int e = 0; e < opt.epochs; ++e) {
    std::shuffle(perm.begin(), perm.end(), rng);
    for (Eigen::Index start = 0; start < n; start += bs) {
      const Eigen::Index count = std::min(bs, n - start);
      std::vector<Eigen::Index> idx(perm.begin() + start, perm.begin() + start + count);
      std::sort(idx.begin(), idx.end());  // canonical accumulation order
      typename Mlp<Scalar>::Matrix bx(x.rows(), count);
      std::vector<int> by(static_cast<std::size_t>(count));
      typename Mlp<Scalar>::Vector bw(count);
      for (Eigen::Index k = 0; k < count; ++k) {
        bx.col(k) = x.col(idx[static_cast<std::size_t>(k)]);
        by[static_cast<std::size_t>(k)] = y[static_cast<std::size_t>(idx[static_cast<std::size_t>(k)])];
        bw(k) = sample_weights(idx[static_cast<std::size_t>(k)]);
      }
      MlpGradients<Scalar> g = backprop(net, bx, by, bw);
      for (std::size_t l = 0; l < net.num_layers(); ++l) {
        net.weights()[l] -= Scalar(opt.learning_rate) * g.dw[l];
        net.biases()[l] -= Scalar(opt.learning_rate) * g.db[l];
      }
    }
    if (epoch_loss) epoch_loss->push_back(weighted_ce_loss(net, x, y, sample_weights));
  }
}

// --- flat text serialization ---------------------------------------------
// Header: magic, activation tag, dims; then one W/b block per layer,
// row-major, %.17g so doubles round-trip exactly.

template <typename Scalar>
void save_mlp(std::ostream& os, const Mlp<Scalar>& net) {
  os << "a2lc-mlp 1\n";
  os << "activation " << to_string(net.activation()) << "\n";
  os << "dims";
  for (auto d : net.dims()) os << ' ' << d;
  os << '\n';
  os.precision(17);
  for (std::size_t l = 0; l < net.num_layers(); ++l) {
    os << "W" << l << '\n';
    const auto& w = net.weights()[l];
    for (Eigen::Index i = 0; i < w.rows(); ++i) {
      for (Eigen::Index j = 0; j < w.cols(); ++j) os << (j ? " " : "") << w(i, j);
      os << '\n';
    }
    os << "b" << l << '\n';
    const auto& b = net.biases()[l];
    for (Eigen::Index i = 0; i < b.size(); ++i) os << (i ? " " : "") << b(i);
    os << '\n';
  }
}

template <typename Scalar>
Mlp<Scalar> load_mlp(std::istream& is) {
  std::string magic;
  int version = 0;
  is >> magic >> version;
  if (magic != "a2lc-mlp" || version != 1)
    throw std::runtime_error("load_mlp: bad header '" + magic + "'");
  std::string key, act_name;
  is >> key >> act_name;
  if (key != "activation") throw std::runtime_error("load_mlp: expected activation tag");
  const Activation act = parse_activation(act_name);
  is >> key;
  if (key != "dims") throw std::runtime_error("load_mlp: expected dims");
  std::vector<Eigen::Index> dims;
  {
    std::string rest;
    std::getline(is, rest);
    std::istringstream ds(rest);
    Eigen::Index d;
    while (ds >> d) dims.push_back(d);
  }
  if (dims.size() < 2) throw std::runtime_error("load_mlp: need at least two dims");

  Mlp<Scalar> net(dims, act, /*seed=*/0);
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    is >> key;
    if (key != "W" + std::to_string(l)) throw std::runtime_error("load_mlp: expected W block");
    auto& w = net.weights()[l];
    for (Eigen::Index i = 0; i < w.rows(); ++i)
      for (Eigen::Index j = 0; j < w.cols(); ++j)
        if (!(is >> w(i, j))) throw std::runtime_error("load_mlp: truncated W block");
    is >> key;
    if (key != "b" + std::to_string(l)) throw std::runtime_error("load_mlp: expected b block");
    auto& b = net.biases()[l];
    for (Eigen::Index i = 0; i < b.size(); ++i)
      if (!(is >> b(i))) throw std::runtime_error("load_mlp: truncated b block");
  }
  return net;
}

}  // namespace a2lc
