#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "a2lc/config.hpp"
#include "a2lc/dataset.hpp"
#include "a2lc/lcm.hpp"

namespace a2lc {

/// Label-quality snapshot after one round's corrections.
struct RoundReport {
  int round = 0;
  long clicks_used = 0;
  double data_accuracy = 0.0;  // fraction of pixels whose pseudo-label is true
  double data_miou = 0.0;
  int lcm_corrected_count = 0;
  std::optional<double> lcm_oa_before;  // absent when the round had no lcm events
  std::optional<double> lcm_oa_after;
  std::vector<int> sampled_per_class;  // queried masks by pseudo-label at query time
  // criteria audit trail for the round's lcm invocation
  double tau = 0.0;
  std::vector<int> lcm_ranks;
  long pool_size_after = 0;
};

struct RunReport {
  ConfigSections config_echo;
  std::string config_hash;
  std::uint64_t master_seed = 0;
  std::vector<RoundReport> rounds;
  std::vector<CorrectionEvent> events;
  std::string events_path;  // set once emitted
};

double data_accuracy(const DatasetState& ds);

/// Mean over classes of pixel IoU between pseudo-labels and truth; classes
/// absent from both sides are excluded from the mean.
double data_miou(const DatasetState& ds);

/// Overall accuracy of lcm-corrected masks before and after correction.
/// Absent (not zero) when there are no lcm events.
std::pair<std::optional<double>, std::optional<double>> lcm_oa(
    std::span<const CorrectionEvent> events);

/// Fills was_correct_before / is_correct_after against hidden truth.
void resolve_correctness(std::vector<CorrectionEvent>& events, const DatasetState& ds);

/// Cumulative per-class tally of queried masks across rounds.
std::vector<int> class_sampling_report(std::span<const RoundReport> rounds, int num_classes);

/// Writes rounds.csv, events.csv and manifest.json (LF line endings, 6
/// decimal places, empty cells for absent metrics). Returns the events path.
std::string emit_outputs(const RunReport& run, const std::filesystem::path& out_dir,
                         const std::string& tool_version);

}  // namespace a2lc
