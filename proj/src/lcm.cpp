#include "a2lc/lcm.hpp"

#include <algorithm>
#include <stdexcept>

namespace a2lc {

Vec class_weights(const std::vector<QueriedMask>& queried, int num_classes) {
  if (queried.empty()) throw std::invalid_argument("class_weights: empty queried set");
  VecI counts = VecI::Zero(num_classes);
  for (const auto& [id, label] : queried) {
    if (label < 0 || label >= num_classes)
      throw std::invalid_argument("class_weights: label out of range");
    ++counts(label);
  }
  const double n = static_cast<double>(queried.size());
  double norm = 0.0;
  for (int c = 0; c < num_classes; ++c)
    if (counts(c) > 0) norm += n / counts(c);
  Vec lambda = Vec::Zero(num_classes);
  for (int c = 0; c < num_classes; ++c)
    if (counts(c) > 0) lambda(c) = (n / counts(c)) / norm;
  return lambda;
}

LcmModel train_lcm(const std::vector<QueriedMask>& queried, const ProxyModel& proxy,
                   const DatasetState& ds, const LcmHyper& hyper) {
  if (queried.empty()) throw std::invalid_argument("train_lcm: empty queried set");

  const int in_dim = proxy.feature_dim();
  std::vector<Eigen::Index> dims;
  dims.push_back(in_dim);
  for (int h : hyper.hidden_dims) {
    if (h < 1) throw std::invalid_argument("train_lcm: bad hidden dim");
    dims.push_back(h);
  }
  dims.push_back(ds.num_classes);

  LcmModel lcm;
  lcm.net = Mlp<double>(dims, hyper.activation, hyper.seed);
  if (hyper.epochs == 0) return lcm;

  const Vec lambda = class_weights(queried, ds.num_classes);
  Mat x(in_dim, static_cast<Eigen::Index>(queried.size()));
  std::vector<int> y(queried.size());
  Vec w(static_cast<Eigen::Index>(queried.size()));
  for (std::size_t i = 0; i < queried.size(); ++i) {
    const auto& [id, label] = queried[i];
    x.col(static_cast<Eigen::Index>(i)) =
        mask_feature(proxy, ds.masks[static_cast<std::size_t>(id)], ds);
    y[i] = label;
    w(static_cast<Eigen::Index>(i)) = lambda(label);
  }

  SgdOptions opt;
  opt.epochs = hyper.epochs;
  opt.learning_rate = hyper.learning_rate;
  opt.batch_size = hyper.batch_size;
  opt.seed = hyper.seed;
  sgd_train(lcm.net, x, y, w, opt);
  return lcm;
}

Vec lcm_predict(const LcmModel& lcm, const Vec& mask_feature) {
  return lcm.net.probs(mask_feature);
}

bool selection_criteria(const Vec& prediction, ClassId pseudo_label, const std::vector<int>& ranks,
                        double tau, double alpha, bool j1, bool j2, bool j3) {
  const auto c = static_cast<double>(ranks.size());
  Eigen::Index predicted;
  const double max_prob = prediction.maxCoeff(&predicted);

  if (j1 && !(max_prob >= tau)) return false;
  if (j2 && static_cast<double>(ranks[static_cast<std::size_t>(predicted)]) >= (1.0 - alpha) * c)
    return false;
  if (j3 && ranks[static_cast<std::size_t>(pseudo_label)] == static_cast<int>(ranks.size()) - 1)
    return false;
  return true;
}

double next_tau(const SelectionConfig& selection, int round) {
  if (round < 1) throw std::invalid_argument("next_tau: round must be >= 1");
  return std::min(selection.tau_cap,
                  selection.tau_initial + selection.tau_increment * (round - 1));
}

std::vector<CorrectionEvent> correct_unqueried(const LcmModel& lcm, const ProxyModel& proxy,
                                               const DatasetState& ds,
                                               std::span<const MaskId> unqueried_ids,
                                               std::span<const MaskId> stats_pool,
                                               const SelectionConfig& selection, int round) {
  std::vector<CorrectionEvent> events;
  if (unqueried_ids.empty()) return events;

  const std::vector<int> ranks = rank_classes(class_pixel_counts(ds, stats_pool));
  const double tau = next_tau(selection, round);

  for (MaskId id : unqueried_ids) {
    const Mask& m = ds.masks[static_cast<std::size_t>(id)];
    const Vec pred = lcm_predict(lcm, mask_feature(proxy, m, ds));
    if (!selection_criteria(pred, m.pseudo_label, ranks, tau, selection.alpha, selection.j1,
                            selection.j2, selection.j3))
      continue;
    Eigen::Index predicted;
    const double confidence = pred.maxCoeff(&predicted);
    if (static_cast<ClassId>(predicted) == m.pseudo_label) continue;

    CorrectionEvent ev;
    ev.mask_id = id;
    ev.old_label = m.pseudo_label;
    ev.new_label = static_cast<ClassId>(predicted);
    ev.source = CorrectionSource::kLcm;
    ev.round = round;
    ev.confidence = confidence;
    events.push_back(ev);
  }
  std::sort(events.begin(), events.end(),
            [](const CorrectionEvent& a, const CorrectionEvent& b) { return a.mask_id < b.mask_id; });
  return events;
}

}  // namespace a2lc
