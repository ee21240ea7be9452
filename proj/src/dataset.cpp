#include "a2lc/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>

namespace a2lc {

std::vector<int> zipf_mask_counts(int num_classes, double s, int total) {
  if (num_classes < 2) throw std::invalid_argument("zipf_mask_counts: need at least 2 classes");
  if (total < num_classes)
    throw std::invalid_argument("zipf_mask_counts: total mask count below class count");
  if (s < 0) throw std::invalid_argument("zipf_mask_counts: negative exponent");

  std::vector<double> share(static_cast<std::size_t>(num_classes));
  double norm = 0;
  for (int k = 0; k < num_classes; ++k) {
    share[static_cast<std::size_t>(k)] = std::pow(static_cast<double>(k + 1), -s);
    norm += share[static_cast<std::size_t>(k)];
  }

  std::vector<int> counts(static_cast<std::size_t>(num_classes));
  std::vector<std::pair<double, int>> remainder;  // (fractional part, class)
  int assigned = 0;
  for (int k = 0; k < num_classes; ++k) {
    const double quota = total * share[static_cast<std::size_t>(k)] / norm;
    counts[static_cast<std::size_t>(k)] = static_cast<int>(std::floor(quota));
    assigned += counts[static_cast<std::size_t>(k)];
    remainder.emplace_back(quota - std::floor(quota), k);
  }
  std::sort(remainder.begin(), remainder.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });
  for (int i = 0; i < total - assigned; ++i)
    ++counts[static_cast<std::size_t>(remainder[static_cast<std::size_t>(i)].second)];

  // every class must exist in truth
  for (int k = 0; k < num_classes; ++k) {
    if (counts[static_cast<std::size_t>(k)] > 0) continue;
    const auto donor = std::max_element(counts.begin(), counts.end());
    --*donor;
    counts[static_cast<std::size_t>(k)] = 1;
  }
  return counts;
}

namespace {

void validate(const SynthConfig& c) {
  if (c.num_classes < 2) throw std::invalid_argument("synth: num_classes must be >= 2");
  if (c.feature_dim < 1) throw std::invalid_argument("synth: feature_dim must be positive");
  if (c.total_masks < c.num_classes)
    throw std::invalid_argument("synth: total_masks below num_classes");
  if (c.pixels_per_mask_min < 1 || c.pixels_per_mask_max < c.pixels_per_mask_min)
    throw std::invalid_argument("synth: bad pixels_per_mask range");
  if (c.prototype_separation <= 0) throw std::invalid_argument("synth: prototype_separation must be positive");
  if (c.within_mask_sigma <= 0) throw std::invalid_argument("synth: within_mask_sigma must be positive");
  if (c.noise_rate < 0 || c.noise_rate > 1) throw std::invalid_argument("synth: noise_rate not a probability");
  if (c.zipf_exponent < 0) throw std::invalid_argument("synth: zipf_exponent must be >= 0");
}

// Gaussian prototypes rescaled so the minimum pairwise distance is at least
// the requested separation.
Mat draw_prototypes(int dim, int classes, double separation, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Mat proto(dim, classes);
  double min_dist = 0;
  for (int attempt = 0; attempt < 16; ++attempt) {
    for (int c = 0; c < classes; ++c)
      for (int i = 0; i < dim; ++i) proto(i, c) = gauss(rng);
    min_dist = std::numeric_limits<double>::infinity();
    for (int a = 0; a < classes; ++a)
      for (int b = a + 1; b < classes; ++b)
        min_dist = std::min(min_dist, (proto.col(a) - proto.col(b)).norm());
    if (min_dist > 1e-9) break;
  }
  if (min_dist < separation) proto *= separation / min_dist;
  return proto;
}

ClassId nearest_prototype(const Mat& proto, ClassId from) {
  double best = std::numeric_limits<double>::infinity();
  ClassId arg = -1;
  for (ClassId c = 0; c < proto.cols(); ++c) {
    if (c == from) continue;
    const double d = (proto.col(c) - proto.col(from)).norm();
    if (d < best) {
      best = d;
      arg = c;
    }
  }
  return arg;
}

}  // namespace

DatasetState generate(const SynthConfig& config) {
  validate(config);
  std::mt19937_64 rng(config.seed);

  DatasetState ds;
  ds.num_classes = config.num_classes;
  ds.round = 0;
  ds.prototypes = draw_prototypes(config.feature_dim, config.num_classes,
                                  config.prototype_separation, rng);

  const std::vector<int> per_class =
      zipf_mask_counts(config.num_classes, config.zipf_exponent, config.total_masks);

  std::uniform_int_distribution<int> size_dist(config.pixels_per_mask_min,
                                               config.pixels_per_mask_max);
  std::normal_distribution<double> gauss(0.0, 1.0);
  ds.masks.reserve(static_cast<std::size_t>(config.total_masks));
  for (ClassId c = 0; c < config.num_classes; ++c) {
    for (int k = 0; k < per_class[static_cast<std::size_t>(c)]; ++k) {
      Mask m;
      m.mask_id = static_cast<MaskId>(ds.masks.size());
      m.true_label = c;
      m.pseudo_label = c;
      const int size = size_dist(rng);
      m.pixel_ids.reserve(static_cast<std::size_t>(size));
      for (int p = 0; p < size; ++p) {
        PixelSample px;
        px.pixel_id = static_cast<PixelId>(ds.pixels.size());
        px.mask_id = m.mask_id;
        px.true_class = c;
        px.feature = ds.prototypes.col(c);
        for (int i = 0; i < config.feature_dim; ++i)
          px.feature(i) += config.within_mask_sigma * gauss(rng);
        m.pixel_ids.push_back(px.pixel_id);
        ds.pixels.push_back(std::move(px));
      }
      ds.masks.push_back(std::move(m));
    }
  }

  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<int> other(0, config.num_classes - 2);
  for (Mask& m : ds.masks) {
    if (unit(rng) >= config.noise_rate) continue;
    if (config.confusion_mode == ConfusionMode::kNearestPrototype) {
      m.pseudo_label = nearest_prototype(ds.prototypes, m.true_label);
    } else {
      int pick = other(rng);
      if (pick >= m.true_label) ++pick;  // skip the true class
      m.pseudo_label = pick;
    }
  }
  return ds;
}

ClassId oracle_label(const DatasetState& ds, MaskId mask_id) {
  if (mask_id < 0 || static_cast<std::size_t>(mask_id) >= ds.masks.size())
    throw std::out_of_range("oracle_label: unknown mask id " + std::to_string(mask_id));
  return ds.masks[static_cast<std::size_t>(mask_id)].true_label;
}

VecI class_pixel_counts(const DatasetState& ds, std::span<const MaskId> pool) {
  VecI counts = VecI::Zero(ds.num_classes);
  for (MaskId id : pool) {
    if (id < 0 || static_cast<std::size_t>(id) >= ds.masks.size())
      throw std::out_of_range("class_pixel_counts: unknown mask id " + std::to_string(id));
    const Mask& m = ds.masks[static_cast<std::size_t>(id)];
    counts(m.pseudo_label) += static_cast<int>(m.pixel_ids.size());
  }
  return counts;
}

std::vector<int> rank_classes(const VecI& counts) {
  const int c = static_cast<int>(counts.size());
  std::vector<int> order(static_cast<std::size_t>(c));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&counts](int a, int b) {
    if (counts(a) != counts(b)) return counts(a) > counts(b);
    return a < b;
  });
  std::vector<int> ranks(static_cast<std::size_t>(c));
  for (int pos = 0; pos < c; ++pos) ranks[static_cast<std::size_t>(order[static_cast<std::size_t>(pos)])] = pos;
  return ranks;
}

std::vector<MaskId> all_mask_ids(const DatasetState& ds) {
  std::vector<MaskId> ids(ds.masks.size());
  std::iota(ids.begin(), ids.end(), MaskId(0));
  return ids;
}

std::vector<MaskId> unqueried_mask_ids(const DatasetState& ds) {
  std::vector<MaskId> ids;
  for (const Mask& m : ds.masks)
    if (!m.ever_queried) ids.push_back(m.mask_id);
  return ids;
}

}  // namespace a2lc
