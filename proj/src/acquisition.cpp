#include "a2lc/acquisition.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace a2lc {

std::string to_string(Scorer s) {
  switch (s) {
    case Scorer::kRandom: return "random";
    case Scorer::kEntropy: return "entropy";
    case Scorer::kMargin: return "margin";
    case Scorer::kCil: return "cil";
    case Scorer::kAbc: return "abc";
  }
  return "abc";
}

Scorer parse_scorer(const std::string& name) {
  if (name == "random") return Scorer::kRandom;
  if (name == "entropy") return Scorer::kEntropy;
  if (name == "margin") return Scorer::kMargin;
  if (name == "cil") return Scorer::kCil;
  if (name == "abc") return Scorer::kAbc;
  throw std::invalid_argument("unknown scorer '" + name + "'");
}

Vec class_rarity(const VecI& counts) {
  int min_present = std::numeric_limits<int>::max();
  for (Eigen::Index c = 0; c < counts.size(); ++c)
    if (counts(c) > 0) min_present = std::min(min_present, counts(c));
  if (min_present == std::numeric_limits<int>::max())
    throw std::invalid_argument("class_rarity: empty pool");

  Vec rarity(counts.size());
  for (Eigen::Index c = 0; c < counts.size(); ++c)
    rarity(c) = counts(c) > 0 ? static_cast<double>(min_present) / counts(c) : 1.0;
  return rarity;
}

double dataset_imbalance(const VecI& counts) {
  const long total = counts.cast<long>().sum();
  if (total <= 0) throw std::invalid_argument("dataset_imbalance: empty pool");
  const auto c = static_cast<double>(counts.size());
  double kl = 0.0;
  for (Eigen::Index k = 0; k < counts.size(); ++k) {
    if (counts(k) == 0) continue;  // 0*log 0 convention
    const double p = static_cast<double>(counts(k)) / static_cast<double>(total);
    // P(c)/U(c) formed in one division so a uniform P gives exactly ln(1)=0
    const double ratio = static_cast<double>(counts(k)) * c / static_cast<double>(total);
    kl += p * std::log(ratio);
  }
  return kl;
}

Vec adaptive_weight_from(const Vec& rarity, double kl, int kl_exponent) {
  if (kl_exponent < 1) throw std::invalid_argument("adaptive_weight: kl_exponent must be positive");
  const double exponent = std::pow(kl, kl_exponent);
  return rarity.array().pow(exponent);
}

Vec adaptive_weight(const VecI& counts, int kl_exponent) {
  return adaptive_weight_from(class_rarity(counts), dataset_imbalance(counts), kl_exponent);
}

double entropy_of(const Vec& probs) {
  double h = 0.0;
  for (Eigen::Index c = 0; c < probs.size(); ++c)
    if (probs(c) > 0) h -= probs(c) * std::log(probs(c));
  return h;
}

double margin_score_of(const Vec& probs) {
  Vec p = probs;
  Eigen::Index top;
  const double p1 = p.maxCoeff(&top);
  p(top) = -1.0;
  const double p2 = p.maxCoeff();
  return 1.0 - (p1 - p2);
}

double score_pixel_cil(const ProxyModel& model, const PixelSample& pixel, ClassId pseudo_label) {
  return 1.0 - pixel_probs(model, pixel)(pseudo_label);
}

double score_pixel_abc(const ProxyModel& model, const PixelSample& pixel, ClassId pseudo_label,
                       const Vec& weights) {
  return weights(pseudo_label) * score_pixel_cil(model, pixel, pseudo_label);
}

namespace {

double cosine(const Vec& u, const Vec& v) {
  const double nu = u.norm();
  const double nv = v.norm();
  if (nu == 0.0 || nv == 0.0) return 0.0;
  return u.dot(v) / (nu * nv);
}

// One forward pass per pixel, shared by the cosine-aggregated scorers.
double aggregate_mask(const ProxyModel& model, const Mask& mask, const DatasetState& ds,
                      const Vec& weights) {
  const std::size_t n = mask.pixel_ids.size();
  std::vector<Vec> feats(n);
  std::vector<int> preds(n);
  std::vector<double> pixel_scores(n);
  VecI pred_counts = VecI::Zero(model.num_classes());
  for (std::size_t i = 0; i < n; ++i) {
    const PixelSample& px = ds.pixels[static_cast<std::size_t>(mask.pixel_ids[i])];
    const Vec p = pixel_probs(model, px);
    Eigen::Index arg;
    p.maxCoeff(&arg);
    preds[i] = static_cast<int>(arg);
    ++pred_counts(arg);
    feats[i] = pixel_feature(model, px);
    pixel_scores[i] = weights(mask.pseudo_label) * (1.0 - p(mask.pseudo_label));
  }
  Eigen::Index dominant;
  pred_counts.maxCoeff(&dominant);

  Vec subset_mean = Vec::Zero(model.feature_dim());
  int subset_size = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (preds[i] != static_cast<int>(dominant)) continue;
    subset_mean += feats[i];
    ++subset_size;
  }
  subset_mean /= static_cast<double>(subset_size);  // nonempty by construction

  double score = 0.0;
  for (std::size_t i = 0; i < n; ++i) score += cosine(feats[i], subset_mean) * pixel_scores[i];
  return score;
}

}  // namespace

double score_mask_abc(const ProxyModel& model, const Mask& mask, const DatasetState& ds,
                      const Vec& weights) {
  if (mask.pixel_ids.empty()) throw std::invalid_argument("score_mask_abc: empty mask");
  return aggregate_mask(model, mask, ds, weights);
}

double score_mask_baseline(const ProxyModel& model, const Mask& mask, const DatasetState& ds,
                           Scorer scorer, std::uint64_t seed) {
  if (mask.pixel_ids.empty()) throw std::invalid_argument("score_mask_baseline: empty mask");
  switch (scorer) {
    case Scorer::kRandom: {
      // order-independent seeded draw so masks can be scored concurrently
      const std::uint64_t h = splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(mask.mask_id)));
      return static_cast<double>(h >> 11) * 0x1.0p-53;
    }
    case Scorer::kEntropy: {
      double total = 0.0;
      for (PixelId pid : mask.pixel_ids)
        total += entropy_of(pixel_probs(model, ds.pixels[static_cast<std::size_t>(pid)]));
      return total / static_cast<double>(mask.pixel_ids.size());
    }
    case Scorer::kMargin: {
      double total = 0.0;
      for (PixelId pid : mask.pixel_ids)
        total += margin_score_of(pixel_probs(model, ds.pixels[static_cast<std::size_t>(pid)]));
      return total / static_cast<double>(mask.pixel_ids.size());
    }
    case Scorer::kCil:
      return aggregate_mask(model, mask, ds, Vec::Ones(model.num_classes()));
    case Scorer::kAbc:
      break;
  }
  throw std::invalid_argument("score_mask_baseline: not a baseline scorer");
}

std::vector<MaskScore> score_pool(const ProxyModel& model, const DatasetState& ds,
                                  std::span<const MaskId> pool, const AcquisitionConfig& config,
                                  const Vec& weights) {
  std::vector<MaskScore> scores;
  scores.reserve(pool.size());
  for (MaskId id : pool) {
    const Mask& m = ds.masks[static_cast<std::size_t>(id)];
    const double s = config.scorer == Scorer::kAbc
                         ? score_mask_abc(model, m, ds, weights)
                         : score_mask_baseline(model, m, ds, config.scorer, config.seed);
    scores.push_back({id, s});
  }
  return scores;
}

std::vector<MaskId> select_top_b(std::vector<MaskScore> scores, int budget,
                                 const std::unordered_set<MaskId>& excluded) {
  if (budget < 0) throw std::invalid_argument("select_top_b: negative budget");
  std::sort(scores.begin(), scores.end(), [](const MaskScore& a, const MaskScore& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.mask_id < b.mask_id;
  });
  std::vector<MaskId> out;
  std::unordered_set<MaskId> seen;
  for (const MaskScore& s : scores) {
    if (static_cast<int>(out.size()) >= budget) break;
    if (excluded.contains(s.mask_id) || !seen.insert(s.mask_id).second) continue;
    out.push_back(s.mask_id);
  }
  return out;
}

}  // namespace a2lc
