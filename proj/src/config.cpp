#include "a2lc/config.hpp"

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <sstream>

namespace a2lc {

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

std::vector<std::string> split_csv(const std::string& s) {
  std::vector<std::string> parts;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) parts.push_back(item);
  }
  return parts;
}

int parse_int(const std::string& key, const std::string& value) {
  try {
    std::size_t pos = 0;
    const int v = std::stoi(value, &pos);
    if (pos != value.size()) throw std::invalid_argument("");
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config: key " + key + ": expected integer, got '" + value + "'");
  }
}

std::uint64_t parse_u64(const std::string& key, const std::string& value) {
  try {
    std::size_t pos = 0;
    const unsigned long long v = std::stoull(value, &pos);
    if (pos != value.size()) throw std::invalid_argument("");
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config: key " + key + ": expected unsigned integer, got '" + value + "'");
  }
}

double parse_real(const std::string& key, const std::string& value) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(value, &pos);
    if (pos != value.size()) throw std::invalid_argument("");
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config: key " + key + ": expected number, got '" + value + "'");
  }
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  throw ConfigError("config: key " + key + ": expected true/false, got '" + value + "'");
}

Activation parse_activation_key(const std::string& key, const std::string& value) {
  try {
    return parse_activation(value);
  } catch (const std::exception&) {
    throw ConfigError("config: key " + key + ": unknown activation '" + value + "'");
  }
}

}  // namespace

ConfigSections parse_config_text(const std::string& text) {
  ConfigSections sections;
  std::istringstream is(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError("config: line " + std::to_string(lineno) + ": malformed section header");
      section = trim(line.substr(1, line.size() - 2));
      if (section.empty())
        throw ConfigError("config: line " + std::to_string(lineno) + ": empty section name");
      sections[section];
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config: line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty())
      throw ConfigError("config: line " + std::to_string(lineno) + ": empty key");
    if (section.empty())
      throw ConfigError("config: line " + std::to_string(lineno) + ": key outside any section");
    sections[section][key] = value;
  }
  return sections;
}

ConfigSections parse_config_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ConfigError("config: cannot open file: " + path);
  std::ostringstream buf;
  buf << is.rdbuf();
  return parse_config_text(buf.str());
}

RunConfig make_run_config(const ConfigSections& sections) {
  RunConfig cfg;
  for (const auto& [section, kv] : sections) {
    for (const auto& [key, value] : kv) {
      const std::string full = section + "." + key;
      if (section == "run") {
        if (key == "rounds") cfg.rounds = parse_int(full, value);
        else if (key == "budget") cfg.budget = parse_int(full, value);
        else if (key == "lcm_enabled") cfg.lcm_enabled = parse_bool(full, value);
        else if (key == "master_seed") cfg.master_seed = parse_u64(full, value);
        else throw ConfigError("config: unknown key " + full);
      } else if (section == "synth") {
        if (key == "num_classes") cfg.synth.num_classes = parse_int(full, value);
        else if (key == "feature_dim") cfg.synth.feature_dim = parse_int(full, value);
        else if (key == "zipf_exponent") cfg.synth.zipf_exponent = parse_real(full, value);
        else if (key == "total_masks") cfg.synth.total_masks = parse_int(full, value);
        else if (key == "pixels_per_mask_min") cfg.synth.pixels_per_mask_min = parse_int(full, value);
        else if (key == "pixels_per_mask_max") cfg.synth.pixels_per_mask_max = parse_int(full, value);
        else if (key == "prototype_separation") cfg.synth.prototype_separation = parse_real(full, value);
        else if (key == "within_mask_sigma") cfg.synth.within_mask_sigma = parse_real(full, value);
        else if (key == "noise_rate") cfg.synth.noise_rate = parse_real(full, value);
        else if (key == "confusion_mode") {
          if (value == "nearest_prototype") cfg.synth.confusion_mode = ConfusionMode::kNearestPrototype;
          else if (value == "uniform_random") cfg.synth.confusion_mode = ConfusionMode::kUniformRandom;
          else throw ConfigError("config: key " + full + ": unknown confusion mode '" + value + "'");
        } else if (key == "seed") {
          cfg.synth.seed = parse_u64(full, value);
          cfg.synth_seed_explicit = true;
        } else throw ConfigError("config: unknown key " + full);
      } else if (section == "acquisition") {
        if (key == "scorer") {
          try {
            cfg.acquisition.scorer = parse_scorer(value);
          } catch (const std::exception&) {
            throw ConfigError("config: key " + full + ": unknown scorer '" + value + "'");
          }
        } else if (key == "kl_exponent") cfg.acquisition.kl_exponent = parse_int(full, value);
        else throw ConfigError("config: unknown key " + full);
      } else if (section == "selection") {
        if (key == "tau_initial") cfg.selection.tau_initial = parse_real(full, value);
        else if (key == "tau_increment") cfg.selection.tau_increment = parse_real(full, value);
        else if (key == "tau_cap") cfg.selection.tau_cap = parse_real(full, value);
        else if (key == "alpha") cfg.selection.alpha = parse_real(full, value);
        else if (key == "criteria") {
          cfg.selection.j1 = cfg.selection.j2 = cfg.selection.j3 = false;
          if (value != "none") {
            for (const std::string& c : split_csv(value)) {
              if (c == "j1") cfg.selection.j1 = true;
              else if (c == "j2") cfg.selection.j2 = true;
              else if (c == "j3") cfg.selection.j3 = true;
              else throw ConfigError("config: key " + full + ": unknown criterion '" + c + "'");
            }
          }
        } else throw ConfigError("config: unknown key " + full);
      } else if (section == "proxy") {
        if (key == "hidden_dim") cfg.proxy.hidden_dim = parse_int(full, value);
        else if (key == "epochs") cfg.proxy.epochs = parse_int(full, value);
        else if (key == "learning_rate") cfg.proxy.learning_rate = parse_real(full, value);
        else if (key == "batch_size") cfg.proxy.batch_size = parse_int(full, value);
        else if (key == "activation") cfg.proxy.activation = parse_activation_key(full, value);
        else if (key == "feature_source") {
          if (value == "hidden") cfg.proxy.feature_source = FeatureSource::kHidden;
          else if (value == "input") cfg.proxy.feature_source = FeatureSource::kInput;
          else throw ConfigError("config: key " + full + ": unknown feature source '" + value + "'");
        } else if (key == "warm_start") cfg.proxy.warm_start = parse_bool(full, value);
        else throw ConfigError("config: unknown key " + full);
      } else if (section == "lcm") {
        if (key == "hidden_dims") {
          cfg.lcm.hidden_dims.clear();
          for (const std::string& d : split_csv(value))
            cfg.lcm.hidden_dims.push_back(parse_int(full, d));
          if (cfg.lcm.hidden_dims.empty())
            throw ConfigError("config: key " + full + ": need at least one hidden dim");
        } else if (key == "activation") cfg.lcm.activation = parse_activation_key(full, value);
        else if (key == "epochs") cfg.lcm.epochs = parse_int(full, value);
        else if (key == "learning_rate") cfg.lcm.learning_rate = parse_real(full, value);
        else if (key == "batch_size") cfg.lcm.batch_size = parse_int(full, value);
        else throw ConfigError("config: unknown key " + full);
      } else {
        throw ConfigError("config: unknown section [" + section + "]");
      }
    }
  }
  validate_run_config(cfg);
  return cfg;
}

void validate_run_config(const RunConfig& c) {
  const auto fail = [](const std::string& key, const std::string& why) {
    throw ConfigError("config: key " + key + ": " + why);
  };
  if (c.rounds < 1) fail("run.rounds", "must be >= 1");
  if (c.budget < 0) fail("run.budget", "must be >= 0");
  if (c.synth.num_classes < 2) fail("synth.num_classes", "must be >= 2");
  if (c.synth.feature_dim < 1) fail("synth.feature_dim", "must be positive");
  if (c.synth.zipf_exponent < 0) fail("synth.zipf_exponent", "must be >= 0");
  if (c.synth.total_masks < c.synth.num_classes)
    fail("synth.total_masks", "must cover every class");
  if (c.synth.pixels_per_mask_min < 1) fail("synth.pixels_per_mask_min", "must be positive");
  if (c.synth.pixels_per_mask_max < c.synth.pixels_per_mask_min)
    fail("synth.pixels_per_mask_max", "must be >= pixels_per_mask_min");
  if (c.synth.prototype_separation <= 0) fail("synth.prototype_separation", "must be positive");
  if (c.synth.within_mask_sigma <= 0) fail("synth.within_mask_sigma", "must be positive");
  if (c.synth.noise_rate < 0 || c.synth.noise_rate > 1)
    fail("synth.noise_rate", "must be a probability");
  if (c.acquisition.kl_exponent < 1) fail("acquisition.kl_exponent", "must be >= 1");
  if (c.selection.tau_initial <= 0 || c.selection.tau_initial >= 1)
    fail("selection.tau_initial", "must be in (0, 1)");
  if (c.selection.tau_increment < 0) fail("selection.tau_increment", "must be >= 0");
  if (c.selection.tau_cap <= 0 || c.selection.tau_cap >= 1)
    fail("selection.tau_cap", "must be in (0, 1)");
  if (c.selection.alpha <= 0 || c.selection.alpha > 1)
    fail("selection.alpha", "must be in (0, 1]");
  if (c.proxy.hidden_dim < 1) fail("proxy.hidden_dim", "must be positive");
  if (c.proxy.epochs < 0) fail("proxy.epochs", "must be >= 0");
  if (c.proxy.learning_rate <= 0) fail("proxy.learning_rate", "must be positive");
  if (c.proxy.batch_size < 1) fail("proxy.batch_size", "must be positive");
  if (c.lcm.hidden_dims.empty()) fail("lcm.hidden_dims", "need at least one hidden dim");
  for (int d : c.lcm.hidden_dims)
    if (d < 1) fail("lcm.hidden_dims", "dims must be positive");
  if (c.lcm.epochs < 0) fail("lcm.epochs", "must be >= 0");
  if (c.lcm.learning_rate <= 0) fail("lcm.learning_rate", "must be positive");
  if (c.lcm.batch_size < 1) fail("lcm.batch_size", "must be positive");
}

std::string format_double(double value) {
  for (int precision = 1; precision <= 17; ++precision) {
    std::ostringstream os;
    os.precision(precision);
    os << value;
    if (std::stod(os.str()) == value) return os.str();
  }
  return std::to_string(value);
}

ConfigSections normalize_config(const RunConfig& c) {
  ConfigSections s;
  s["run"]["rounds"] = std::to_string(c.rounds);
  s["run"]["budget"] = std::to_string(c.budget);
  s["run"]["lcm_enabled"] = c.lcm_enabled ? "true" : "false";
  s["run"]["master_seed"] = std::to_string(c.master_seed);

  const std::uint64_t synth_seed = c.synth_seed_explicit
                                       ? c.synth.seed
                                       : derive_seed(c.master_seed, SeedTag::kSynth, 0);
  s["synth"]["num_classes"] = std::to_string(c.synth.num_classes);
  s["synth"]["feature_dim"] = std::to_string(c.synth.feature_dim);
  s["synth"]["zipf_exponent"] = format_double(c.synth.zipf_exponent);
  s["synth"]["total_masks"] = std::to_string(c.synth.total_masks);
  s["synth"]["pixels_per_mask_min"] = std::to_string(c.synth.pixels_per_mask_min);
  s["synth"]["pixels_per_mask_max"] = std::to_string(c.synth.pixels_per_mask_max);
  s["synth"]["prototype_separation"] = format_double(c.synth.prototype_separation);
  s["synth"]["within_mask_sigma"] = format_double(c.synth.within_mask_sigma);
  s["synth"]["noise_rate"] = format_double(c.synth.noise_rate);
  s["synth"]["confusion_mode"] = c.synth.confusion_mode == ConfusionMode::kNearestPrototype
                                     ? "nearest_prototype"
                                     : "uniform_random";
  s["synth"]["seed"] = std::to_string(synth_seed);

  s["acquisition"]["scorer"] = to_string(c.acquisition.scorer);
  s["acquisition"]["kl_exponent"] = std::to_string(c.acquisition.kl_exponent);

  s["selection"]["tau_initial"] = format_double(c.selection.tau_initial);
  s["selection"]["tau_increment"] = format_double(c.selection.tau_increment);
  s["selection"]["tau_cap"] = format_double(c.selection.tau_cap);
  s["selection"]["alpha"] = format_double(c.selection.alpha);
  std::string criteria;
  if (c.selection.j1) criteria = "j1";
  if (c.selection.j2) criteria += (criteria.empty() ? "" : ",") + std::string("j2");
  if (c.selection.j3) criteria += (criteria.empty() ? "" : ",") + std::string("j3");
  s["selection"]["criteria"] = criteria.empty() ? "none" : criteria;

  s["proxy"]["hidden_dim"] = std::to_string(c.proxy.hidden_dim);
  s["proxy"]["epochs"] = std::to_string(c.proxy.epochs);
  s["proxy"]["learning_rate"] = format_double(c.proxy.learning_rate);
  s["proxy"]["batch_size"] = std::to_string(c.proxy.batch_size);
  s["proxy"]["activation"] = to_string(c.proxy.activation);
  s["proxy"]["feature_source"] =
      c.proxy.feature_source == FeatureSource::kHidden ? "hidden" : "input";
  s["proxy"]["warm_start"] = c.proxy.warm_start ? "true" : "false";

  std::string dims;
  for (int d : c.lcm.hidden_dims) dims += (dims.empty() ? "" : ",") + std::to_string(d);
  s["lcm"]["hidden_dims"] = dims;
  s["lcm"]["activation"] = to_string(c.lcm.activation);
  s["lcm"]["epochs"] = std::to_string(c.lcm.epochs);
  s["lcm"]["learning_rate"] = format_double(c.lcm.learning_rate);
  s["lcm"]["batch_size"] = std::to_string(c.lcm.batch_size);
  return s;
}

std::string config_to_text(const ConfigSections& sections) {
  std::string out;
  bool first = true;
  for (const auto& [section, kv] : sections) {
    if (!first) out += '\n';
    first = false;
    out += "[" + section + "]\n";
    for (const auto& [key, value] : kv) out += key + " = " + value + "\n";
  }
  return out;
}

std::string config_hash_hex(const RunConfig& config) {
  const std::string text = config_to_text(normalize_config(config));
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace a2lc
