#include "a2lc/reporting.hpp"

#include <cstdio>
#include <fstream>

#include <json.hpp>

namespace a2lc {

double data_accuracy(const DatasetState& ds) {
  if (ds.pixels.empty()) throw std::invalid_argument("data_accuracy: empty dataset");
  long correct = 0;
  for (const PixelSample& px : ds.pixels)
    if (ds.masks[static_cast<std::size_t>(px.mask_id)].pseudo_label == px.true_class) ++correct;
  return static_cast<double>(correct) / static_cast<double>(ds.pixels.size());
}

double data_miou(const DatasetState& ds) {
  if (ds.pixels.empty()) throw std::invalid_argument("data_miou: empty dataset");
  VecI intersection = VecI::Zero(ds.num_classes);
  VecI pseudo_count = VecI::Zero(ds.num_classes);
  VecI true_count = VecI::Zero(ds.num_classes);
  for (const PixelSample& px : ds.pixels) {
    const ClassId pseudo = ds.masks[static_cast<std::size_t>(px.mask_id)].pseudo_label;
    ++pseudo_count(pseudo);
    ++true_count(px.true_class);
    if (pseudo == px.true_class) ++intersection(pseudo);
  }
  double total = 0.0;
  int classes_in_mean = 0;
  for (int c = 0; c < ds.num_classes; ++c) {
    const int uni = pseudo_count(c) + true_count(c) - intersection(c);
    if (uni == 0) continue;  // absent from both pseudo and truth
    total += static_cast<double>(intersection(c)) / uni;
    ++classes_in_mean;
  }
  return classes_in_mean > 0 ? total / classes_in_mean : 0.0;
}

std::pair<std::optional<double>, std::optional<double>> lcm_oa(
    std::span<const CorrectionEvent> events) {
  long n = 0, before = 0, after = 0;
  for (const CorrectionEvent& ev : events) {
    if (ev.source != CorrectionSource::kLcm) continue;
    ++n;
    if (ev.was_correct_before) ++before;
    if (ev.is_correct_after) ++after;
  }
  if (n == 0) return {std::nullopt, std::nullopt};
  return {static_cast<double>(before) / static_cast<double>(n),
          static_cast<double>(after) / static_cast<double>(n)};
}

void resolve_correctness(std::vector<CorrectionEvent>& events, const DatasetState& ds) {
  for (CorrectionEvent& ev : events) {
    const ClassId truth = ds.masks[static_cast<std::size_t>(ev.mask_id)].true_label;
    ev.was_correct_before = ev.old_label == truth;
    ev.is_correct_after = ev.new_label == truth;
  }
}

std::vector<int> class_sampling_report(std::span<const RoundReport> rounds, int num_classes) {
  std::vector<int> total(static_cast<std::size_t>(num_classes), 0);
  for (const RoundReport& r : rounds)
    for (std::size_t c = 0; c < r.sampled_per_class.size() && c < total.size(); ++c)
      total[c] += r.sampled_per_class[c];
  return total;
}

namespace {

std::string fixed6(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

std::ofstream open_for_write(const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary);  // binary: LF endings everywhere
  if (!os) throw std::runtime_error("cannot open for writing: " + path.string());
  return os;
}

}  // namespace

std::string emit_outputs(const RunReport& run, const std::filesystem::path& out_dir,
                         const std::string& tool_version) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw std::runtime_error("cannot create output directory " + out_dir.string() + ": " +
                                   ec.message());

  const auto rounds_path = out_dir / "rounds.csv";
  {
    auto os = open_for_write(rounds_path);
    os << "round,clicks_used,data_accuracy,data_miou,lcm_corrected,lcm_oa_before,lcm_oa_after\n";
    for (const RoundReport& r : run.rounds) {
      os << r.round << ',' << r.clicks_used << ',' << fixed6(r.data_accuracy) << ','
         << fixed6(r.data_miou) << ',' << r.lcm_corrected_count << ','
         << (r.lcm_oa_before ? fixed6(*r.lcm_oa_before) : std::string()) << ','
         << (r.lcm_oa_after ? fixed6(*r.lcm_oa_after) : std::string()) << '\n';
    }
    if (!os) throw std::runtime_error("write failed: " + rounds_path.string());
  }

  const auto events_path = out_dir / "events.csv";
  {
    auto os = open_for_write(events_path);
    os << "round,mask_id,source,old_label,new_label\n";
    for (const CorrectionEvent& ev : run.events) {
      os << ev.round << ',' << ev.mask_id << ','
         << (ev.source == CorrectionSource::kHuman ? "human" : "lcm") << ',' << ev.old_label << ','
         << ev.new_label << '\n';
    }
    if (!os) throw std::runtime_error("write failed: " + events_path.string());
  }

  const auto manifest_path = out_dir / "manifest.json";
  {
    nlohmann::json manifest;
    manifest["tool_version"] = tool_version;
    manifest["master_seed"] = run.master_seed;
    manifest["config_hash"] = run.config_hash;
    nlohmann::json cfg = nlohmann::json::object();
    for (const auto& [section, kv] : run.config_echo) {
      nlohmann::json sec = nlohmann::json::object();
      for (const auto& [key, value] : kv) sec[key] = value;
      cfg[section] = sec;
    }
    manifest["config"] = cfg;
    manifest["files"] = {{"rounds", "rounds.csv"}, {"events", "events.csv"}};
    auto os = open_for_write(manifest_path);
    os << manifest.dump(2) << '\n';
    if (!os) throw std::runtime_error("write failed: " + manifest_path.string());
  }
  return events_path.string();
}

}  // namespace a2lc
