#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "a2lc/dataset.hpp"
#include "a2lc/mlp.hpp"
#include "a2lc/proxy.hpp"
#include "a2lc/types.hpp"

namespace a2lc {

/// Confidence/tail gates for automatic correction. tau grows linearly per
/// round up to tau_cap; alpha fixes the tail fraction; j1..j3 switch the
/// individual criteria on and off.
struct SelectionConfig {
  double tau_initial = 0.99;
  double tau_increment = 0.002;
  double tau_cap = 0.999;
  double alpha = 0.5;
  bool j1 = true;
  bool j2 = true;
  bool j3 = true;
};

struct LcmHyper {
  std::vector<int> hidden_dims = {256, 128, 64};
  Activation activation = Activation::kRelu;
  int epochs = 100;
  double learning_rate = 0.05;
  int batch_size = 16;
  std::uint64_t seed = 1;
};

/// The correction network: mask feature -> hidden stack -> class probs.
struct LcmModel {
  Mlp<double> net;
};

enum class CorrectionSource { kHuman, kLcm };

struct CorrectionEvent {
  MaskId mask_id = -1;
  ClassId old_label = -1;
  ClassId new_label = -1;
  CorrectionSource source = CorrectionSource::kHuman;
  int round = 0;
  double confidence = 1.0;          // lcm prediction max-prob; 1 for human
  bool was_correct_before = false;  // resolved against hidden truth by metrics
  bool is_correct_after = false;
};

using QueriedMask = std::pair<MaskId, ClassId>;  // (mask, annotator label)

/// Normalized inverse-frequency weights over classes present in the queried
/// set: lambda_k = (N/N_k) / sum_c (N/N_c). Absent classes get 0 (they never
/// appear in the loss). Present weights sum to 1.
Vec class_weights(const std::vector<QueriedMask>& queried, int num_classes);

/// Trains the correction network on the queried masks' features (mean proxy
/// feature per mask) with class-weighted cross-entropy.
LcmModel train_lcm(const std::vector<QueriedMask>& queried, const ProxyModel& proxy,
                   const DatasetState& ds, const LcmHyper& hyper);

Vec lcm_predict(const LcmModel& lcm, const Vec& mask_feature);

/// Conjunction of the enabled gates:
///   j1: max prob >= tau
///   j2: predicted class not in {c : rank(c) >= (1-alpha)*C}
///   j3: pseudo label is not the rarest class (rank C-1)
bool selection_criteria(const Vec& prediction, ClassId pseudo_label, const std::vector<int>& ranks,
                        double tau, double alpha, bool j1, bool j2, bool j3);

/// tau for round r >= 1: min(cap, initial + increment*(r-1)).
double next_tau(const SelectionConfig& selection, int round);

/// Predicts every unqueried mask and emits a relabeling event for those that
/// pass the enabled criteria and whose prediction differs from the current
/// pseudo-label. Ranks come from the pixel counts of `stats_pool` (the
/// round's full pool), computed once per invocation. Pure: events are not
/// applied here.
std::vector<CorrectionEvent> correct_unqueried(const LcmModel& lcm, const ProxyModel& proxy,
                                               const DatasetState& ds,
                                               std::span<const MaskId> unqueried_ids,
                                               std::span<const MaskId> stats_pool,
                                               const SelectionConfig& selection, int round);

}  // namespace a2lc
