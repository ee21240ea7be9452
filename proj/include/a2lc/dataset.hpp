#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "a2lc/types.hpp"

namespace a2lc {

enum class ConfusionMode { kNearestPrototype, kUniformRandom };

/// Knobs for the synthetic mask-labeled dataset. Class k receives a mask
/// count proportional to (k+1)^-zipf_exponent; pixel features are Gaussian
/// around a per-class prototype; pseudo-labels are flipped with probability
/// noise_rate, by default to the confusable (nearest-prototype) class.
struct SynthConfig {
  int num_classes = 10;
  int feature_dim = 8;
  double zipf_exponent = 1.2;
  int total_masks = 400;
  int pixels_per_mask_min = 4;
  int pixels_per_mask_max = 12;
  double prototype_separation = 4.0;
  double within_mask_sigma = 1.0;
  double noise_rate = 0.3;
  ConfusionMode confusion_mode = ConfusionMode::kNearestPrototype;
  std::uint64_t seed = 1;
};

struct PixelSample {
  PixelId pixel_id = -1;
  MaskId mask_id = -1;
  Vec feature;
  ClassId true_class = -1;  // visible only to the oracle and to metrics
};

enum class MaskStatus { kUnqueried, kHumanCorrected, kLcmCorrected };

struct Mask {
  MaskId mask_id = -1;
  std::vector<PixelId> pixel_ids;  // nonempty
  ClassId pseudo_label = -1;       // the working label; pixels inherit it
  ClassId true_label = -1;
  MaskStatus status = MaskStatus::kUnqueried;
  bool ever_queried = false;       // never reverts once set
};

/// The single mutable truth for one run: mask and pixel stores are indexed
/// by their own ids.
struct DatasetState {
  std::vector<Mask> masks;
  std::vector<PixelSample> pixels;
  int num_classes = 0;
  int round = 0;
  Mat prototypes;  // feature_dim x num_classes, kept for diagnostics
};

/// Zipf mask allocation: largest-remainder rounding of total * (k+1)^-s
/// shares, then every class is topped up to at least one mask (taken from
/// the largest class). Throws if total < num_classes.
std::vector<int> zipf_mask_counts(int num_classes, double s, int total);

DatasetState generate(const SynthConfig& config);

/// Exact simulated annotator; one call is one click against the budget.
ClassId oracle_label(const DatasetState& ds, MaskId mask_id);

/// Pixel counts per pseudo-label class over the given mask pool.
VecI class_pixel_counts(const DatasetState& ds, std::span<const MaskId> pool);

/// rank[c] = 0-based position of class c after a descending sort of counts,
/// ties broken by ascending class id.
std::vector<int> rank_classes(const VecI& counts);

std::vector<MaskId> all_mask_ids(const DatasetState& ds);
std::vector<MaskId> unqueried_mask_ids(const DatasetState& ds);

}  // namespace a2lc
