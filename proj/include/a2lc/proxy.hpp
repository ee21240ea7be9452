#pragma once

#include <cstdint>
#include <iosfwd>

#include "a2lc/dataset.hpp"
#include "a2lc/mlp.hpp"
#include "a2lc/types.hpp"

namespace a2lc {

/// Which layer stands in for the model representation f(x): the final hidden
/// activation (default) or the raw input feature (debug control).
enum class FeatureSource { kHidden, kInput };

struct ProxyHyper {
  int hidden_dim = 32;
  int epochs = 30;
  double learning_rate = 0.05;
  int batch_size = 64;
  std::uint64_t seed = 1;
  Activation activation = Activation::kRelu;
  FeatureSource feature_source = FeatureSource::kHidden;
  bool warm_start = false;  // consumed by the orchestrator
};

/// Small trainable stand-in for the segmentation network: one hidden layer,
/// input_dim -> hidden_dim -> num_classes. Immutable once trained.
struct ProxyModel {
  Mlp<double> net;
  FeatureSource feature_source = FeatureSource::kHidden;
  int trained_on_round = -1;

  int feature_dim() const {
    return static_cast<int>(feature_source == FeatureSource::kHidden
                                ? net.dims()[net.dims().size() - 2]
                                : net.input_dim());
  }
  int num_classes() const { return static_cast<int>(net.output_dim()); }
};

ProxyModel make_proxy(int input_dim, int num_classes, const ProxyHyper& hyper);

/// Trains on every pixel of the dataset against its mask's current
/// pseudo-label (mean cross-entropy, plain SGD). Fresh initialization unless
/// `init` is given.
ProxyModel train_proxy(const DatasetState& ds, const ProxyHyper& hyper,
                       const ProxyModel* init = nullptr);

Vec pixel_probs(const ProxyModel& model, const PixelSample& pixel);
Vec pixel_feature(const ProxyModel& model, const PixelSample& pixel);

/// Mean of pixel_feature over the mask's pixels.
Vec mask_feature(const ProxyModel& model, const Mask& mask, const DatasetState& ds);

/// Most frequently predicted class within the mask, ties to the lowest id.
ClassId dominant_label(const ProxyModel& model, const Mask& mask, const DatasetState& ds);

void save_proxy(std::ostream& os, const ProxyModel& model);
ProxyModel load_proxy(std::istream& is);

}  // namespace a2lc
