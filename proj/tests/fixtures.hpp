// Shared test fixtures: hand-built datasets with controlled prototypes and
// noise patterns, plus a central-difference gradient oracle.
#pragma once

#include <random>
#include <vector>

#include "a2lc/dataset.hpp"
#include "a2lc/mlp.hpp"

namespace a2lc::testing {

struct MaskSpec {
  int pixels = 1;
  ClassId true_label = 0;
  ClassId pseudo_label = 0;
};

// Axis-aligned prototypes (spacing * e_c), Gaussian pixels around the true
// class. feature_dim must be >= num_classes.
inline DatasetState make_dataset(const std::vector<MaskSpec>& specs, int num_classes,
                                 int feature_dim = 4, double sigma = 0.5,
                                 double spacing = 5.0, std::uint64_t seed = 7) {
  DatasetState ds;
  ds.num_classes = num_classes;
  ds.prototypes = Mat::Zero(feature_dim, num_classes);
  for (int c = 0; c < num_classes; ++c) ds.prototypes(c % feature_dim, c) = spacing;

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (const MaskSpec& spec : specs) {
    Mask m;
    m.mask_id = static_cast<MaskId>(ds.masks.size());
    m.true_label = spec.true_label;
    m.pseudo_label = spec.pseudo_label;
    for (int p = 0; p < spec.pixels; ++p) {
      PixelSample px;
      px.pixel_id = static_cast<PixelId>(ds.pixels.size());
      px.mask_id = m.mask_id;
      px.true_class = spec.true_label;
      px.feature = ds.prototypes.col(spec.true_label);
      for (int i = 0; i < feature_dim; ++i) px.feature(i) += sigma * gauss(rng);
      m.pixel_ids.push_back(px.pixel_id);
      ds.pixels.push_back(std::move(px));
    }
    ds.masks.push_back(std::move(m));
  }
  return ds;
}

// Two populous head classes (0, 1) whose prototypes are mutual nearest
// neighbours and whose pseudo-labels are flipped into each other at rate
// rho; two small clean tail classes (2, 3) far away.
inline DatasetState make_confusable_pair(int head_masks, int tail_masks, double rho,
                                         std::uint64_t seed, int pixels_per_mask = 5) {
  const int dim = 4;
  DatasetState ds;
  ds.num_classes = 4;
  ds.prototypes = Mat::Zero(dim, 4);
  ds.prototypes.col(0) << 2.0, 0.0, 0.0, 0.0;
  ds.prototypes.col(1) << -2.0, 0.0, 0.0, 0.0;
  ds.prototypes.col(2) << 0.0, 12.0, 0.0, 0.0;
  ds.prototypes.col(3) << 0.0, -12.0, 0.0, 0.0;

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  const auto add_mask = [&](ClassId truth, ClassId pseudo) {
    Mask m;
    m.mask_id = static_cast<MaskId>(ds.masks.size());
    m.true_label = truth;
    m.pseudo_label = pseudo;
    for (int p = 0; p < pixels_per_mask; ++p) {
      PixelSample px;
      px.pixel_id = static_cast<PixelId>(ds.pixels.size());
      px.mask_id = m.mask_id;
      px.true_class = truth;
      px.feature = ds.prototypes.col(truth);
      for (int i = 0; i < dim; ++i) px.feature(i) += 0.6 * gauss(rng);
      m.pixel_ids.push_back(px.pixel_id);
      ds.pixels.push_back(std::move(px));
    }
    ds.masks.push_back(std::move(m));
  };

  for (ClassId c : {0, 1})
    for (int k = 0; k < head_masks; ++k)
      add_mask(c, unit(rng) < rho ? (1 - c) : c);
  for (ClassId c : {2, 3})
    for (int k = 0; k < tail_masks; ++k) add_mask(c, c);
  return ds;
}

// Central finite differences over every weight and bias; returns the largest
// relative error against the analytic gradients.
inline double max_gradcheck_error(Mlp<double>& net, const Mat& x, const std::vector<int>& y,
                                  const Vec& w, double step = 1e-5) {
  const MlpGradients<double> analytic = backprop(net, x, y, w);
  double worst = 0.0;
  const auto probe = [&](double& param, double analytic_grad) {
    const double saved = param;
    param = saved + step;
    const double up = weighted_ce_loss(net, x, y, w);
    param = saved - step;
    const double down = weighted_ce_loss(net, x, y, w);
    param = saved;
    const double numeric = (up - down) / (2.0 * step);
    const double rel = std::abs(numeric - analytic_grad) / std::max(std::abs(numeric), 1e-6);
    worst = std::max(worst, rel);
  };
  for (std::size_t l = 0; l < net.num_layers(); ++l) {
    auto& wmat = net.weights()[l];
    for (Eigen::Index i = 0; i < wmat.rows(); ++i)
      for (Eigen::Index j = 0; j < wmat.cols(); ++j) probe(wmat(i, j), analytic.dw[l](i, j));
    auto& bias = net.biases()[l];
    for (Eigen::Index i = 0; i < bias.size(); ++i) probe(bias(i), analytic.db[l](i));
  }
  return worst;
}

}  // namespace a2lc::testing
