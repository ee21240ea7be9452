#pragma once

#include <cstdint>
#include <span>
#include <unordered_set>
#include <vector>

#include "a2lc/dataset.hpp"
#include "a2lc/proxy.hpp"
#include "a2lc/types.hpp"

namespace a2lc {

enum class Scorer { kRandom, kEntropy, kMargin, kCil, kAbc };

std::string to_string(Scorer s);
Scorer parse_scorer(const std::string& name);

struct AcquisitionConfig {
  Scorer scorer = Scorer::kAbc;
  int kl_exponent = 3;       // exponent on the KL term of the adaptive weight
  std::uint64_t seed = 1;    // only the random scorer consumes this
};

struct MaskScore {
  MaskId mask_id = -1;
  double score = 0.0;
};

/// Class rarity: min positive pixel count over present classes divided by
/// count(c). Present classes land in (0, 1] with the rarest at exactly 1;
/// absent classes are reported as 1 (no pixel ever consults them).
/// Throws when every count is zero.
Vec class_rarity(const VecI& counts);

/// KL(P || U) with P the pseudo-label pixel distribution and U uniform,
/// natural log, 0*log 0 = 0. Exactly zero for a uniform P.
double dataset_imbalance(const VecI& counts);

/// The weight identity on its own: rarity ^ (kl ^ kl_exponent).
Vec adaptive_weight_from(const Vec& rarity, double kl, int kl_exponent);

/// w(c) = rarity(c) ^ (KL^kl_exponent), both terms from the pool counts.
Vec adaptive_weight(const VecI& counts, int kl_exponent);

/// -sum p ln p and 1 - (top1 - top2) over one predictive distribution.
double entropy_of(const Vec& probs);
double margin_score_of(const Vec& probs);

/// 1 - p(pseudo_label | pixel): low confidence in the current label reads as
/// likely mislabeled.
double score_pixel_cil(const ProxyModel& model, const PixelSample& pixel, ClassId pseudo_label);

double score_pixel_abc(const ProxyModel& model, const PixelSample& pixel, ClassId pseudo_label,
                       const Vec& weights);

/// Mask score: sum over pixels of cos(f(x), f(m')) * w * (1 - p(pseudo)),
/// where m' is the subset of pixels predicted as the mask's dominant class
/// and f(m') its mean feature. A zero-norm vector makes its cosine term 0.
double score_mask_abc(const ProxyModel& model, const Mask& mask, const DatasetState& ds,
                      const Vec& weights);

/// Control scorers: random (seeded hash of the mask id), mean pixel entropy,
/// mean (1 - margin), and the unweighted CIL aggregation.
double score_mask_baseline(const ProxyModel& model, const Mask& mask, const DatasetState& ds,
                           Scorer scorer, std::uint64_t seed = 0);

/// Scores every mask in the pool with the configured scorer. `weights` is
/// consulted only by the abc scorer.
std::vector<MaskScore> score_pool(const ProxyModel& model, const DatasetState& ds,
                                  std::span<const MaskId> pool, const AcquisitionConfig& config,
                                  const Vec& weights);

/// The `budget` highest-scoring candidates not in `excluded`, score
/// descending with ties broken by ascending mask id. Returns fewer when the
/// candidate set is smaller than the budget.
std::vector<MaskId> select_top_b(std::vector<MaskScore> scores, int budget,
                                 const std::unordered_set<MaskId>& excluded);

}  // namespace a2lc
