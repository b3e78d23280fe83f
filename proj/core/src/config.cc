/*
 * Copyright 2026 The bla-lab Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "blalab/config.h"

#include <fmt/format.h>
#include <yaml-cpp/yaml.h>

#include <fstream>
#include <sstream>

#include "blalab/error.h"

namespace blalab {
namespace {

namespace fs = std::filesystem;

std::string slurp(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot open {}", path.string()));
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

YAML::Node parse_yaml(const std::string& text) {
  try {
    return YAML::Load(text);
  } catch (const YAML::Exception& e) {
    throw ConfigError(fmt::format("invalid YAML: {}", e.what()));
  }
}

// yaml-cpp throws its own exception types on conversion; keep the key in the
// message.
template <typename T>
T get(const YAML::Node& node, const std::string& key) {
  const YAML::Node v = node[key];
  if (!v) throw ConfigError(fmt::format("missing key '{}'", key));
  try {
    return v.as<T>();
  } catch (const YAML::Exception&) {
    throw ConfigError(fmt::format("bad value for '{}'", key));
  }
}

template <typename T>
T get_or(const YAML::Node& node, const std::string& key, T fallback) {
  return node[key] ? get<T>(node, key) : fallback;
}

LtiSystem parse_lti(const YAML::Node& node, const std::string& key) {
  const YAML::Node n = node[key];
  if (!n || !n.IsMap()) {
    throw ConfigError(fmt::format("'{}' must be a mapping with num and den", key));
  }
  LtiSystem sys{get<std::vector<double>>(n, "num"),
                get<std::vector<double>>(n, "den")};
  try {
    sys.validate();
  } catch (const Error& e) {
    throw ConfigError(fmt::format("'{}': {}", key, e.what()));
  }
  return sys;
}

LtiSystem parse_lti_or(const YAML::Node& node, const std::string& key,
                       const LtiSystem& fallback) {
  return node[key] ? parse_lti(node, key) : LtiSystem{fallback};
}

StaticNl parse_nl(const YAML::Node& node, const std::string& key) {
  StaticNl nl{get<std::vector<double>>(node, key)};
  nl.validate();
  return nl;
}

WienerHammerstein parse_wh(const YAML::Node& node) {
  return {parse_lti_or(node, "front", LtiSystem{}), parse_nl(node, "nl"),
          parse_lti_or(node, "back", LtiSystem{})};
}

SystemModel parse_system(const YAML::Node& root) {
  const auto type = get<std::string>(root, "type");
  if (type == "wiener_hammerstein" || type == "wh") return parse_wh(root);
  if (type == "parallel_wh") {
    const YAML::Node branches = root["branches"];
    if (!branches || !branches.IsSequence() || branches.size() == 0) {
      throw ConfigError("parallel_wh needs a non-empty 'branches' list");
    }
    ParallelWH p;
    for (const auto& b : branches) p.branches.push_back(parse_wh(b));
    return p;
  }
  if (type == "nl_feedback") {
    return NlFeedback{parse_lti(root, "forward"),
                      parse_lti_or(root, "fb_front", LtiSystem{}),
                      parse_nl(root, "nl"),
                      parse_lti_or(root, "fb_back", LtiSystem{})};
  }
  if (type == "nl_msd") {
    NlMsdParams p = NlMsdParams::defaults();
    p.m = get_or(root, "m", p.m);
    p.d = get_or(root, "d", p.d);
    p.k1 = get_or(root, "k1", p.k1);
    p.k3 = get_or(root, "k3", p.k3);
    p.validate();
    return p;
  }
  if (type == "nl_xfb") {
    NlXfbParams p = NlXfbParams::defaults();
    p.forward = parse_lti_or(root, "forward", p.forward);
    p.lowpass = parse_lti_or(root, "lowpass", p.lowpass);
    p.gain = get_or(root, "gain", p.gain);
    p.validate();
    return p;
  }
  throw ConfigError(fmt::format("unknown model type '{}'", type));
}

ModelConfig model_from_node(const YAML::Node& root) {
  if (!root.IsMap()) throw ConfigError("model config must be a mapping");
  ModelConfig cfg;
  cfg.model = parse_system(root);
  if (const YAML::Node sim = root["simulation"]) {
    cfg.sim.oversample = get_or(sim, "oversample", cfg.sim.oversample);
    cfg.sim.transient_periods =
        get_or(sim, "transient_periods", cfg.sim.transient_periods);
    cfg.sim.max_settle_periods =
        get_or(sim, "max_settle_periods", cfg.sim.max_settle_periods);
  }
  if (cfg.sim.oversample < 1 || cfg.sim.transient_periods < 0) {
    throw ConfigError("simulation: oversample >= 1, transient_periods >= 0");
  }
  return cfg;
}

DoeRegion region_from_node(const YAML::Node& root) {
  if (!root.IsMap()) throw ConfigError("region config must be a mapping");
  const double dc_min = get<double>(root, "dc_min");
  const double dc_max = get<double>(root, "dc_max");
  const double std_min = get<double>(root, "std_min");
  const double std_max = get<double>(root, "std_max");
  DoeRegion r = DoeRegion::centered(dc_min, dc_max, std_min, std_max,
                                    get_or(root, "l_center", 4));
  r.dc_c = get_or(root, "dc_c", r.dc_c);
  r.std_c = get_or(root, "std_c", r.std_c);
  r.validate();
  return r;
}

std::string harmonics_text(const YAML::Node& node) {
  const YAML::Node h = node["harmonics"];
  if (!h) throw ConfigError("missing key 'harmonics'");
  if (h.IsSequence()) {
    std::string out;
    for (const auto& v : h) {
      if (!out.empty()) out += ',';
      out += v.as<std::string>();
    }
    return out;
  }
  return h.as<std::string>();
}

fs::path resolve(const fs::path& base, const std::string& p) {
  const fs::path path(p);
  return path.is_absolute() ? path : base / path;
}

}  // namespace

ModelConfig parse_model_config(const std::string& yaml_text) {
  return model_from_node(parse_yaml(yaml_text));
}

ModelConfig load_model_config(const fs::path& path) {
  try {
    return parse_model_config(slurp(path));
  } catch (const ConfigError& e) {
    throw ConfigError(fmt::format("{}: {}", path.string(), e.what()));
  }
}

DoeRegion parse_region_config(const std::string& yaml_text) {
  return region_from_node(parse_yaml(yaml_text));
}

DoeRegion load_region_config(const fs::path& path) {
  try {
    return parse_region_config(slurp(path));
  } catch (const ConfigError& e) {
    throw ConfigError(fmt::format("{}: {}", path.string(), e.what()));
  }
}

void PipelineConfig::validate() const {
  signal.validate();
  if (realizations < 2 || periods < 2) {
    throw ConfigError("realizations and periods must both be >= 2");
  }
  if (!(noise_std >= 0.0)) throw ConfigError("noise_std must be >= 0");
  if (num_order < 0 || den_order < 1) {
    throw ConfigError("fit orders: nb >= 0, na >= 1");
  }
  if (!(k_sigma > 0.0)) throw ConfigError("k_sigma must be positive");
  switch (mode) {
    case PipelineMode::kSingle:
      if (sweep || design) {
        throw ConfigError("single mode takes neither a sweep nor a design");
      }
      break;
    case PipelineMode::kSweep:
      if (!sweep || design) {
        throw ConfigError("sweep mode needs a sweep section and no design");
      }
      if (sweep->levels.size() < 3) {
        throw ConfigError(fmt::format(
            "a sweep needs at least 3 levels for structure detection, got {}",
            sweep->levels.size()));
      }
      for (double v : sweep->levels) {
        if (sweep->axis == SweepAxis::kStd && !(v > 0.0)) {
          throw ConfigError("std levels must be positive");
        }
      }
      if (n_boot < 20) throw ConfigError("bootstrap must be >= 20");
      if (realizations < 4) {
        throw ConfigError("sweep mode needs >= 4 realizations for the bootstrap");
      }
      break;
    case PipelineMode::kDesign:
      if (!design || sweep) {
        throw ConfigError("design mode needs a design section and no sweep");
      }
      design->region.validate();
      if (design->n_points < 2) throw ConfigError("n_points must be >= 2");
      if (design->grid_dc.empty() != design->grid_std.empty()) {
        throw ConfigError("grid needs both dc and std levels");
      }
      break;
  }
}

PipelineConfig parse_pipeline_config(const std::string& yaml_text,
                                     const fs::path& base_dir) {
  const YAML::Node root = parse_yaml(yaml_text);
  if (!root.IsMap()) throw ConfigError("pipeline config must be a mapping");
  PipelineConfig cfg;

  const auto mode = get_or<std::string>(root, "mode", "single");
  if (mode == "single") {
    cfg.mode = PipelineMode::kSingle;
  } else if (mode == "sweep") {
    cfg.mode = PipelineMode::kSweep;
  } else if (mode == "design") {
    cfg.mode = PipelineMode::kDesign;
  } else {
    throw ConfigError(fmt::format("unknown mode '{}'", mode));
  }

  const YAML::Node sig = root["signal"];
  if (!sig || !sig.IsMap()) throw ConfigError("missing 'signal' section");
  cfg.signal.n_samples = get<std::size_t>(sig, "n");
  cfg.signal.fs = get<double>(sig, "fs");
  cfg.signal.excited_harmonics = parse_harmonics(harmonics_text(sig));
  cfg.signal.dc = get_or(sig, "dc", 0.0);
  cfg.signal.std = get_or(sig, "std", 0.0);

  const YAML::Node model = root["model"];
  if (!model) throw ConfigError("missing 'model'");
  if (model.IsScalar()) {
    cfg.model = load_model_config(resolve(base_dir, model.as<std::string>()));
  } else {
    cfg.model = model_from_node(model);
  }

  cfg.noise_std = get_or(root, "noise_std", 0.0);
  cfg.realizations = get_or<std::size_t>(root, "realizations", 8);
  cfg.periods = get_or<std::size_t>(root, "periods", 2);
  if (const YAML::Node fit = root["fit"]) {
    cfg.den_order = get_or(fit, "na", cfg.den_order);
    cfg.num_order = get_or(fit, "nb", cfg.num_order);
  }
  cfg.n_boot = get_or(root, "bootstrap", cfg.n_boot);
  cfg.k_sigma = get_or(root, "k_sigma", cfg.k_sigma);
  cfg.seed = get_or<std::uint64_t>(root, "seed", cfg.seed);
  cfg.output = resolve(base_dir, get_or<std::string>(root, "output", "out"));

  if (const YAML::Node sw = root["sweep"]) {
    SweepDefinition def;
    const auto axis = get<std::string>(sw, "axis");
    if (axis == "dc") {
      def.axis = SweepAxis::kDc;
    } else if (axis == "std") {
      def.axis = SweepAxis::kStd;
    } else {
      throw ConfigError(fmt::format("sweep axis must be dc or std, got '{}'", axis));
    }
    def.levels = get<std::vector<double>>(sw, "levels");
    cfg.sweep = def;
  }
  if (const YAML::Node d = root["design"]) {
    DesignDefinition def;
    const YAML::Node region = d["region"];
    if (!region) throw ConfigError("design: missing 'region'");
    def.region = region.IsScalar()
                     ? load_region_config(resolve(base_dir, region.as<std::string>()))
                     : region_from_node(region);
    def.n_points = get_or(d, "n_points", def.n_points);
    if (const YAML::Node grid = d["grid"]) {
      def.grid_dc = get<std::vector<double>>(grid, "dc");
      def.grid_std = get<std::vector<double>>(grid, "std");
    }
    cfg.design = def;
  }
  cfg.validate();
  return cfg;
}

PipelineConfig load_pipeline_config(const fs::path& path) {
  try {
    return parse_pipeline_config(slurp(path), path.parent_path());
  } catch (const ConfigError& e) {
    throw ConfigError(fmt::format("{}: {}", path.string(), e.what()));
  }
}

}  // namespace blalab
