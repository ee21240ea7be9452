#include "a2lc/orchestrator.hpp"

#include <algorithm>
#include <stdexcept>
#include <unordered_set>

namespace a2lc {

std::vector<CorrectionEvent> apply_manual_corrections(DatasetState& ds,
                                                      std::span<const MaskId> selected, int round) {
  std::unordered_set<MaskId> batch;
  for (MaskId id : selected) {
    if (id < 0 || static_cast<std::size_t>(id) >= ds.masks.size())
      throw std::out_of_range("apply_manual_corrections: unknown mask id " + std::to_string(id));
    if (!batch.insert(id).second)
      throw std::invalid_argument("apply_manual_corrections: duplicate mask id " +
                                  std::to_string(id));
    if (ds.masks[static_cast<std::size_t>(id)].ever_queried)
      throw std::invalid_argument("apply_manual_corrections: mask " + std::to_string(id) +
                                  " was already queried");
  }

  std::vector<CorrectionEvent> events;
  events.reserve(selected.size());
  for (MaskId id : selected) {
    Mask& m = ds.masks[static_cast<std::size_t>(id)];
    CorrectionEvent ev;
    ev.mask_id = id;
    ev.old_label = m.pseudo_label;
    ev.new_label = oracle_label(ds, id);
    ev.source = CorrectionSource::kHuman;
    ev.round = round;
    m.pseudo_label = ev.new_label;
    m.status = MaskStatus::kHumanCorrected;
    m.ever_queried = true;
    events.push_back(ev);
  }
  return events;
}

namespace {

std::vector<MaskId> sorted_difference(const std::vector<MaskId>& pool,
                                      std::vector<MaskId> removed) {
  std::sort(removed.begin(), removed.end());
  std::vector<MaskId> out;
  out.reserve(pool.size());
  std::set_difference(pool.begin(), pool.end(), removed.begin(), removed.end(),
                      std::back_inserter(out));
  return out;
}

}  // namespace

RoundOutcome run_round(RoundState& state, DatasetState& ds, const RunConfig& config) {
  const int r = state.round;
  ds.round = r;

  RoundOutcome outcome;
  RoundReport& report = outcome.report;
  report.round = r;
  report.sampled_per_class.assign(static_cast<std::size_t>(ds.num_classes), 0);

  const std::vector<MaskId> pool = state.pool;  // M_{r-1}

  std::vector<MaskId> selected;
  if (!pool.empty() && config.budget > 0) {
    const VecI counts = class_pixel_counts(ds, pool);
    Vec weights = Vec::Ones(ds.num_classes);
    if (config.acquisition.scorer == Scorer::kAbc)
      weights = adaptive_weight(counts, config.acquisition.kl_exponent);

    AcquisitionConfig acq = config.acquisition;
    acq.seed = derive_seed(config.master_seed, SeedTag::kScorer, r);
    std::vector<MaskScore> scores = score_pool(state.proxy, ds, pool, acq, weights);

    std::unordered_set<MaskId> ever_queried;
    for (const Mask& m : ds.masks)
      if (m.ever_queried) ever_queried.insert(m.mask_id);
    selected = select_top_b(std::move(scores), config.budget, ever_queried);
  }

  for (MaskId id : selected)
    ++report.sampled_per_class[static_cast<std::size_t>(
        ds.masks[static_cast<std::size_t>(id)].pseudo_label)];

  outcome.events = apply_manual_corrections(ds, selected, r);
  report.clicks_used = static_cast<long>(selected.size());
  state.clicks_used += report.clicks_used;

  const std::vector<MaskId> unqueried = sorted_difference(pool, selected);

  if (config.lcm_enabled && !selected.empty()) {
    std::vector<QueriedMask> pairs;
    pairs.reserve(selected.size());
    for (MaskId id : selected)
      pairs.emplace_back(id, ds.masks[static_cast<std::size_t>(id)].pseudo_label);

    LcmHyper lcm_hyper = config.lcm;
    lcm_hyper.seed = derive_seed(config.master_seed, SeedTag::kLcm, r);
    const LcmModel lcm = train_lcm(pairs, state.proxy, ds, lcm_hyper);

    // audit trail recorded before events mutate the labels
    report.tau = next_tau(config.selection, r);
    report.lcm_ranks = rank_classes(class_pixel_counts(ds, pool));

    std::vector<CorrectionEvent> lcm_events =
        correct_unqueried(lcm, state.proxy, ds, unqueried, pool, config.selection, r);
    for (const CorrectionEvent& ev : lcm_events) {
      Mask& m = ds.masks[static_cast<std::size_t>(ev.mask_id)];
      m.pseudo_label = ev.new_label;
      m.status = MaskStatus::kLcmCorrected;
    }
    report.lcm_corrected_count = static_cast<int>(lcm_events.size());
    outcome.events.insert(outcome.events.end(), lcm_events.begin(), lcm_events.end());
  }

  resolve_correctness(outcome.events, ds);
  std::tie(report.lcm_oa_before, report.lcm_oa_after) = lcm_oa(outcome.events);

  ProxyHyper proxy_hyper = config.proxy;
  proxy_hyper.seed = derive_seed(config.master_seed, SeedTag::kProxy, r);
  state.proxy =
      train_proxy(ds, proxy_hyper, config.proxy.warm_start ? &state.proxy : nullptr);

  state.queried = selected;
  state.unqueried = unqueried;
  state.pool = unqueried;  // M_r = M_{r-1} \ M_r^Q
  report.pool_size_after = static_cast<long>(state.pool.size());
  report.data_accuracy = data_accuracy(ds);
  report.data_miou = data_miou(ds);
  return outcome;
}

RunReport run_experiment_on(DatasetState ds, const RunConfig& config) {
  validate_run_config(config);
  if (ds.masks.empty()) throw std::invalid_argument("run_experiment_on: empty dataset");

  ds.round = 0;
  ProxyHyper proxy_hyper = config.proxy;
  proxy_hyper.seed = derive_seed(config.master_seed, SeedTag::kProxy, 0);

  RoundState state;
  state.round = 0;
  state.pool = all_mask_ids(ds);
  state.proxy = train_proxy(ds, proxy_hyper);  // theta_0 on initial pseudo-labels

  RunReport run;
  run.master_seed = config.master_seed;
  run.config_echo = normalize_config(config);
  run.config_hash = config_hash_hex(config);

  for (int r = 1; r <= config.rounds; ++r) {
    state.round = r;
    RoundOutcome outcome = run_round(state, ds, config);
    run.rounds.push_back(std::move(outcome.report));
    run.events.insert(run.events.end(), outcome.events.begin(), outcome.events.end());
  }
  return run;
}

SynthConfig effective_synth_config(const RunConfig& config) {
  SynthConfig synth = config.synth;
  if (!config.synth_seed_explicit)
    synth.seed = derive_seed(config.master_seed, SeedTag::kSynth, 0);
  return synth;
}

RunReport run_experiment(const RunConfig& config) {
  validate_run_config(config);
  return run_experiment_on(generate(effective_synth_config(config)), config);
}

ScoreSnapshot scores_at_round(const RunConfig& config, int round) {
  validate_run_config(config);
  if (round < 1 || round > config.rounds)
    throw std::invalid_argument("scores_at_round: round out of range");

  DatasetState ds = generate(effective_synth_config(config));
  ds.round = 0;
  ProxyHyper proxy_hyper = config.proxy;
  proxy_hyper.seed = derive_seed(config.master_seed, SeedTag::kProxy, 0);

  RoundState state;
  state.round = 0;
  state.pool = all_mask_ids(ds);
  state.proxy = train_proxy(ds, proxy_hyper);
  for (int r = 1; r < round; ++r) {
    state.round = r;
    run_round(state, ds, config);
  }

  ScoreSnapshot snapshot;
  if (state.pool.empty()) return snapshot;
  const VecI counts = class_pixel_counts(ds, state.pool);
  Vec weights = Vec::Ones(ds.num_classes);
  if (config.acquisition.scorer == Scorer::kAbc)
    weights = adaptive_weight(counts, config.acquisition.kl_exponent);
  AcquisitionConfig acq = config.acquisition;
  acq.seed = derive_seed(config.master_seed, SeedTag::kScorer, round);
  snapshot.scores = score_pool(state.proxy, ds, state.pool, acq, weights);
  snapshot.pseudo_labels.reserve(snapshot.scores.size());
  for (const MaskScore& s : snapshot.scores)
    snapshot.pseudo_labels.push_back(ds.masks[static_cast<std::size_t>(s.mask_id)].pseudo_label);
  return snapshot;
}

}  // namespace a2lc
