#pragma once

#include <span>
#include <vector>

#include "a2lc/reporting.hpp"
#include "a2lc/run_config.hpp"

namespace a2lc {

/// Per-round bookkeeping. `pool` is the never-queried mask set entering the
/// round; queried/unqueried hold the round's split after selection.
struct RoundState {
  int round = 0;
  std::vector<MaskId> pool;       // ascending mask ids
  std::vector<MaskId> queried;    // this round's query batch
  std::vector<MaskId> unqueried;  // pool minus the batch
  ProxyModel proxy;               // the model that scored this round
  long clicks_used = 0;           // cumulative over the run
};

struct RoundOutcome {
  RoundReport report;
  std::vector<CorrectionEvent> events;  // human first (selection order), then lcm by mask id
};

/// Sets each selected mask's pseudo-label to the oracle answer and marks it
/// queried. One event per mask, one click each. Throws on duplicate or
/// already-queried ids (non-redundancy).
std::vector<CorrectionEvent> apply_manual_corrections(DatasetState& ds,
                                                      std::span<const MaskId> selected, int round);

/// One full round: score the pool, query the top-B, correct manually, run
/// the correction module on the remainder, retrain the proxy, shrink the
/// pool. state.round must already hold the 1-based round index.
RoundOutcome run_round(RoundState& state, DatasetState& ds, const RunConfig& config);

/// Trains the initial proxy and executes config.rounds rounds on the given
/// dataset. Exposed separately from run_experiment so callers can supply a
/// hand-built DatasetState.
RunReport run_experiment_on(DatasetState ds, const RunConfig& config);

RunReport run_experiment(const RunConfig& config);

/// The synth config a run actually uses: seed derived from master_seed
/// unless the config named one explicitly.
SynthConfig effective_synth_config(const RunConfig& config);

/// Scores for one round's pool (rounds before it are executed in full);
/// backs the `score` subcommand.
struct ScoreSnapshot {
  std::vector<MaskScore> scores;
  std::vector<ClassId> pseudo_labels;  // parallel to scores
};
ScoreSnapshot scores_at_round(const RunConfig& config, int round);

}  // namespace a2lc
