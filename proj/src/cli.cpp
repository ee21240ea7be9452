#include "a2lc/cli.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "a2lc/config.hpp"
#include "a2lc/orchestrator.hpp"

namespace a2lc {

namespace {

struct CliOptions {
  std::string config_path;
  std::string out_dir = "out";
  int score_round = 1;
  // overrides, applied only when the flag was actually given
  std::uint64_t seed = 0;
  std::string scorer;
  int rounds = 0;
  int budget = 0;
  bool no_lcm = false;
};

void add_common(CLI::App* sub, CliOptions& opts, bool with_out) {
  sub->add_option("--config", opts.config_path, "path to the run configuration file")->required();
  if (with_out) sub->add_option("--out", opts.out_dir, "output directory (default: out)");
  sub->add_option("--seed", opts.seed, "override run.master_seed");
  sub->add_option("--scorer", opts.scorer, "override acquisition.scorer");
  sub->add_option("--rounds", opts.rounds, "override run.rounds");
  sub->add_option("--budget", opts.budget, "override run.budget");
  sub->add_flag("--no-lcm", opts.no_lcm, "disable the label correction module");
}

RunConfig load_config(const CliOptions& opts, const CLI::App* sub) {
  RunConfig cfg = make_run_config(parse_config_file(opts.config_path));
  if (sub->count("--seed")) cfg.master_seed = opts.seed;
  if (sub->count("--scorer")) {
    try {
      cfg.acquisition.scorer = parse_scorer(opts.scorer);
    } catch (const std::exception&) {
      throw ConfigError("config: key acquisition.scorer: unknown scorer '" + opts.scorer + "'");
    }
  }
  if (sub->count("--rounds")) cfg.rounds = opts.rounds;
  if (sub->count("--budget")) cfg.budget = opts.budget;
  if (opts.no_lcm) cfg.lcm_enabled = false;
  validate_run_config(cfg);
  return cfg;
}

int cmd_validate(const CliOptions& opts, const CLI::App* sub) {
  const RunConfig cfg = load_config(opts, sub);
  std::cout << config_to_text(normalize_config(cfg));
  std::cout << "# config_hash " << config_hash_hex(cfg) << "\n";
  return 0;
}

int cmd_run(const CliOptions& opts, const CLI::App* sub) {
  const RunConfig cfg = load_config(opts, sub);
  RunReport run = run_experiment(cfg);
  run.events_path = emit_outputs(run, opts.out_dir, kToolVersion);
  for (const RoundReport& r : run.rounds) {
    std::printf("round %d: clicks=%ld accuracy=%.6f miou=%.6f lcm_corrected=%d\n", r.round,
                r.clicks_used, r.data_accuracy, r.data_miou, r.lcm_corrected_count);
  }
  std::printf("wrote %s/{rounds.csv,events.csv,manifest.json}\n", opts.out_dir.c_str());
  return 0;
}

int cmd_score(const CliOptions& opts, const CLI::App* sub) {
  const RunConfig cfg = load_config(opts, sub);
  const ScoreSnapshot snapshot = scores_at_round(cfg, opts.score_round);

  std::filesystem::create_directories(opts.out_dir);
  const auto path = std::filesystem::path(opts.out_dir) / "scores.csv";
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open for writing: " + path.string());
  os << "mask_id,score,pseudo_label\n";
  char buf[64];
  for (std::size_t i = 0; i < snapshot.scores.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.6f", snapshot.scores[i].score);
    os << snapshot.scores[i].mask_id << ',' << buf << ',' << snapshot.pseudo_labels[i] << '\n';
  }
  std::printf("wrote %s (%zu masks)\n", path.string().c_str(), snapshot.scores.size());
  return 0;
}

int cmd_synth(const CliOptions& opts, const CLI::App* sub) {
  const RunConfig cfg = load_config(opts, sub);
  const SynthConfig synth = effective_synth_config(cfg);
  const DatasetState ds = generate(synth);

  std::vector<int> truth_masks(static_cast<std::size_t>(ds.num_classes), 0);
  std::vector<int> pseudo_masks(static_cast<std::size_t>(ds.num_classes), 0);
  int noisy = 0;
  for (const Mask& m : ds.masks) {
    ++truth_masks[static_cast<std::size_t>(m.true_label)];
    ++pseudo_masks[static_cast<std::size_t>(m.pseudo_label)];
    if (m.pseudo_label != m.true_label) ++noisy;
  }
  std::printf("classes=%d feature_dim=%d masks=%zu pixels=%zu seed=%llu\n", ds.num_classes,
              synth.feature_dim, ds.masks.size(), ds.pixels.size(),
              static_cast<unsigned long long>(synth.seed));
  std::printf("noisy_masks=%d (%.4f of all masks)\n", noisy,
              static_cast<double>(noisy) / static_cast<double>(ds.masks.size()));
  std::printf("initial data_accuracy=%.6f data_miou=%.6f\n", data_accuracy(ds), data_miou(ds));
  std::printf("class truth_masks pseudo_masks\n");
  for (int c = 0; c < ds.num_classes; ++c)
    std::printf("%5d %11d %12d\n", c, truth_masks[static_cast<std::size_t>(c)],
                pseudo_masks[static_cast<std::size_t>(c)]);
  return 0;
}

}  // namespace

int cli_main(const std::vector<std::string>& args) {
  CLI::App app{"desk-scale active and automated label correction simulator", "a2lc"};
  app.require_subcommand(1);

  CliOptions opts;
  CLI::App* run = app.add_subcommand("run", "execute a full experiment and emit reports");
  add_common(run, opts, true);
  CLI::App* score = app.add_subcommand("score", "dump per-mask acquisition scores for one round");
  add_common(score, opts, true);
  score->add_option("--round", opts.score_round, "round whose pool to score (default 1)");
  CLI::App* synth = app.add_subcommand("synth", "generate the dataset and print a summary");
  add_common(synth, opts, false);
  CLI::App* validate = app.add_subcommand("validate", "check the config and print it normalized");
  add_common(validate, opts, false);

  std::vector<const char*> argv;
  argv.push_back("a2lc");
  for (const std::string& a : args) argv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n";
    return 2;
  }

  try {
    if (run->parsed()) return cmd_run(opts, run);
    if (score->parsed()) return cmd_score(opts, score);
    if (synth->parsed()) return cmd_synth(opts, synth);
    if (validate->parsed()) return cmd_validate(opts, validate);
  } catch (const ConfigError& e) {
    std::cerr << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;  // unreachable with require_subcommand(1)
}

}  // namespace a2lc
