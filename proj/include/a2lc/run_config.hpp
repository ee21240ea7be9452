#pragma once

#include <cstdint>

#include "a2lc/acquisition.hpp"
#include "a2lc/dataset.hpp"
#include "a2lc/lcm.hpp"
#include "a2lc/proxy.hpp"

namespace a2lc {

/// Everything one experiment needs. All component seeds are derived from
/// master_seed (see derive_seed); an explicit synth.seed in the config file
/// overrides the derived one.
struct RunConfig {
  int rounds = 5;
  int budget = 20;  // clicks per round; one click = one mask query
  bool lcm_enabled = true;
  AcquisitionConfig acquisition;
  SelectionConfig selection;
  ProxyHyper proxy;
  LcmHyper lcm;
  SynthConfig synth;
  bool synth_seed_explicit = false;
  std::uint64_t master_seed = 1;
};

/// Throws ConfigError (see config.hpp) naming the offending key.
void validate_run_config(const RunConfig& config);

}  // namespace a2lc
