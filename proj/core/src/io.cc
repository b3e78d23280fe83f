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

#include "blalab/io.h"

#include <fmt/format.h>
#include <openssl/evp.h>

#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include "blalab/error.h"
#include "json.hpp"

namespace blalab {
namespace {

using json = nlohmann::json;

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  for (std::string item; std::getline(ss, item, sep);) {
    const auto b = item.find_first_not_of(" \t\r");
    const auto e = item.find_last_not_of(" \t\r");
    out.push_back(b == std::string::npos ? "" : item.substr(b, e - b + 1));
  }
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

double parse_double(const std::string& s, const fs::path& where) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ConfigError(
        fmt::format("{}: cannot parse number '{}'", where.string(), s));
  }
}

std::ifstream open_in(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot open {}", path.string()));
  return in;
}

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError(fmt::format("cannot write {}", path.string()));
  return out;
}

// Header row plus numeric rows; '#' lines are returned as key=value pairs.
struct Table {
  std::map<std::string, std::string> meta;
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

Table read_table(const fs::path& path) {
  auto in = open_in(path);
  Table t;
  for (std::string line; std::getline(in, line);) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto eq = line.find('=');
      if (eq != std::string::npos) {
        auto key = line.substr(1, eq - 1);
        key.erase(0, key.find_first_not_of(' '));
        t.meta[key] = line.substr(eq + 1);
      }
      continue;
    }
    if (t.header.empty()) {
      t.header = split(line, ',');
      continue;
    }
    const auto cells = split(line, ',');
    if (cells.size() != t.header.size()) {
      throw ConfigError(fmt::format("{}: row has {} columns, header has {}",
                                    path.string(), cells.size(),
                                    t.header.size()));
    }
    std::vector<double> row;
    row.reserve(cells.size());
    for (const auto& c : cells) row.push_back(parse_double(c, path));
    t.rows.push_back(std::move(row));
  }
  return t;
}

std::size_t column(const Table& t, const std::string& name,
                   const fs::path& path) {
  for (std::size_t i = 0; i < t.header.size(); ++i) {
    if (t.header[i] == name) return i;
  }
  throw ConfigError(
      fmt::format("{}: missing column '{}'", path.string(), name));
}

json complex_list(const std::vector<Complex>& v) {
  json out = json::array();
  for (const auto& c : v) out.push_back({c.real(), c.imag()});
  return out;
}

std::vector<Complex> complex_list(const json& j) {
  std::vector<Complex> out;
  for (const auto& c : j) {
    out.emplace_back(c.at(0).get<double>(), c.at(1).get<double>());
  }
  return out;
}

json finite_or_null(double v) {
  return std::isfinite(v) ? json(v) : json(nullptr);
}

}  // namespace

std::string format_double(double v) { return fmt::format("{:.17g}", v); }

void write_signal_csv(const fs::path& path, const SignalRealization& real) {
  const auto& s = real.spec();
  std::string text;
  text += fmt::format("# n={}\n", s.n_samples);
  text += fmt::format("# fs={}\n", format_double(s.fs));
  text += fmt::format("# harmonics={}\n", format_harmonics(s.excited_harmonics));
  text += fmt::format("# dc={}\n", format_double(s.dc));
  text += fmt::format("# std={}\n", format_double(s.std));
  text += fmt::format("# seed={}\n", s.seed);
  text += fmt::format("# periods={}\n", real.periods());
  text += "sample\n";
  for (double v : real.samples()) {
    text += format_double(v);
    text += '\n';
  }
  write_text(path, text);
}

SignalFile read_signal_csv(const fs::path& path) {
  const Table t = read_table(path);
  auto meta = [&](const std::string& key) -> const std::string& {
    auto it = t.meta.find(key);
    if (it == t.meta.end()) {
      throw ConfigError(
          fmt::format("{}: missing metadata '{}'", path.string(), key));
    }
    return it->second;
  };
  SignalFile f;
  try {
    f.spec.n_samples = std::stoull(meta("n"));
    f.spec.seed = std::stoull(meta("seed"));
    f.periods = std::stoull(meta("periods"));
  } catch (const std::logic_error&) {
    throw ConfigError(fmt::format("{}: bad integer metadata", path.string()));
  }
  f.spec.fs = parse_double(meta("fs"), path);
  f.spec.excited_harmonics = parse_harmonics(meta("harmonics"));
  f.spec.dc = parse_double(meta("dc"), path);
  f.spec.std = parse_double(meta("std"), path);
  f.spec.validate();
  const std::size_t col = column(t, "sample", path);
  for (const auto& row : t.rows) f.samples.push_back(row[col]);
  if (f.samples.size() != f.periods * f.spec.n_samples) {
    throw ConfigError(fmt::format(
        "{}: {} samples, expected periods * n = {}", path.string(),
        f.samples.size(), f.periods * f.spec.n_samples));
  }
  return f;
}

void write_record_dir(const fs::path& dir, const RecordMeta& meta,
                      std::size_t periods,
                      const std::vector<TimeRecord>& realizations) {
  fs::create_directories(dir);
  const std::size_t n = meta.n_samples;
  json manifest = {
      {"realizations", realizations.size()},
      {"periods", periods},
      {"n_samples", n},
      {"fs", meta.fs},
      {"harmonics", format_harmonics(meta.excited_harmonics)},
      {"dc", meta.dc},
      {"std", meta.std},
      {"seeds", meta.seeds},
  };
  write_text(dir / "manifest.json", manifest.dump(2) + "\n");
  for (std::size_t m = 0; m < realizations.size(); ++m) {
    const auto& r = realizations[m];
    if (r.u.size() != periods * n || r.y.size() != periods * n) {
      throw ConfigError("write_record_dir: time record has the wrong length");
    }
    for (std::size_t p = 0; p < periods; ++p) {
      std::string text = "time,u,y\n";
      for (std::size_t i = 0; i < n; ++i) {
        const std::size_t idx = p * n + i;
        text += fmt::format("{},{},{}\n",
                            format_double(static_cast<double>(idx) / meta.fs),
                            format_double(r.u[idx]), format_double(r.y[idx]));
      }
      write_text(dir / fmt::format("m{:03d}_p{:02d}.csv", m, p), text);
    }
  }
}

ExperimentRecord read_record_dir(const fs::path& dir) {
  json manifest;
  try {
    manifest = json::parse(read_text(dir / "manifest.json"));
  } catch (const json::exception& e) {
    throw ConfigError(
        fmt::format("{}: bad manifest: {}", dir.string(), e.what()));
  }
  RecordMeta meta;
  std::size_t M = 0, P = 0;
  try {
    M = manifest.at("realizations").get<std::size_t>();
    P = manifest.at("periods").get<std::size_t>();
    meta.n_samples = manifest.at("n_samples").get<std::size_t>();
    meta.fs = manifest.at("fs").get<double>();
    meta.excited_harmonics =
        parse_harmonics(manifest.at("harmonics").get<std::string>());
    meta.dc = manifest.at("dc").get<double>();
    meta.std = manifest.at("std").get<double>();
    if (manifest.contains("seeds")) {
      meta.seeds = manifest.at("seeds").get<std::vector<std::uint64_t>>();
    }
  } catch (const json::exception& e) {
    throw ConfigError(
        fmt::format("{}: bad manifest: {}", dir.string(), e.what()));
  }
  const std::size_t n = meta.n_samples;
  ExperimentRecord rec(M, P, meta);
  for (std::size_t m = 0; m < M; ++m) {
    std::vector<double> u, y;
    u.reserve(P * n);
    y.reserve(P * n);
    for (std::size_t p = 0; p < P; ++p) {
      const auto path = dir / fmt::format("m{:03d}_p{:02d}.csv", m, p);
      const Table t = read_table(path);
      const auto cu = column(t, "u", path);
      const auto cy = column(t, "y", path);
      if (t.rows.size() != n) {
        throw ConfigError(fmt::format("{}: {} rows, expected {}",
                                      path.string(), t.rows.size(), n));
      }
      for (const auto& row : t.rows) {
        u.push_back(row[cu]);
        y.push_back(row[cy]);
      }
    }
    rec.set_realization(m, u, y);
  }
  return rec;
}

void write_bla_csv(const fs::path& path, const BlaEstimate& est) {
  std::string text;
  text += fmt::format("# realizations={}\n", est.realizations);
  text += fmt::format("# periods={}\n", est.periods);
  text += "f_hz,re_g,im_g,var_total,var_noise,var_stoch_nl\n";
  for (std::size_t k = 0; k < est.bins(); ++k) {
    text += fmt::format("{},{},{},{},{},{}\n", format_double(est.freqs[k]),
                        format_double(est.g_bla[k].real()),
                        format_double(est.g_bla[k].imag()),
                        format_double(est.var_total[k]),
                        format_double(est.var_noise[k]),
                        format_double(est.var_stoch_nl[k]));
  }
  write_text(path, text);
}

BlaTable read_bla_csv(const fs::path& path) {
  const Table t = read_table(path);
  const auto cf = column(t, "f_hz", path);
  const auto cr = column(t, "re_g", path);
  const auto ci = column(t, "im_g", path);
  const auto ct = column(t, "var_total", path);
  const auto cn = column(t, "var_noise", path);
  const auto cs = column(t, "var_stoch_nl", path);
  BlaTable b;
  for (const auto& row : t.rows) {
    b.freqs.push_back(row[cf]);
    b.g.emplace_back(row[cr], row[ci]);
    b.var_total.push_back(row[ct]);
    b.var_noise.push_back(row[cn]);
    b.var_stoch_nl.push_back(row[cs]);
  }
  if (b.freqs.empty()) {
    throw ConfigError(fmt::format("{}: no BLA rows", path.string()));
  }
  return b;
}

std::vector<double> weight_from_table(const BlaTable& table) {
  BlaEstimate est;
  est.var_total = table.var_total;
  return weight_from_variance(est);
}

void write_model_json(const fs::path& path, const ModelFile& file) {
  const auto& m = file.model;
  json j = {
      {"num_order", file.num_order},
      {"den_order", file.den_order},
      {"num", m.num},
      {"den", m.den},
      {"poles", complex_list(m.poles)},
      {"zeros", complex_list(m.zeros)},
      {"weighted_rms_residual", finite_or_null(m.weighted_rms_residual)},
      {"converged", m.converged},
      {"iterations", m.iterations},
      {"stable", m.stable},
  };
  if (file.uncertainty) {
    j["root_uncertainty"] = {{"pole_std", file.uncertainty->pole_std},
                             {"zero_std", file.uncertainty->zero_std},
                             {"ambiguous", file.uncertainty->ambiguous}};
  }
  if (file.setting) {
    j["setting"] = {{"dc", file.setting->dc}, {"std", file.setting->std}};
  }
  write_text(path, j.dump(2) + "\n");
}

ModelFile read_model_json(const fs::path& path) {
  ModelFile f;
  try {
    const json j = json::parse(read_text(path));
    f.num_order = j.at("num_order").get<int>();
    f.den_order = j.at("den_order").get<int>();
    f.model.num = j.at("num").get<std::vector<double>>();
    f.model.den = j.at("den").get<std::vector<double>>();
    f.model.poles = complex_list(j.at("poles"));
    f.model.zeros = complex_list(j.at("zeros"));
    const auto& r = j.at("weighted_rms_residual");
    f.model.weighted_rms_residual =
        r.is_null() ? std::numeric_limits<double>::infinity() : r.get<double>();
    f.model.converged = j.at("converged").get<bool>();
    f.model.iterations = j.value("iterations", 0);
    f.model.stable = j.value("stable", true);
    if (j.contains("root_uncertainty")) {
      const auto& u = j.at("root_uncertainty");
      RootUncertainty ru;
      ru.pole_std = u.at("pole_std").get<std::vector<double>>();
      ru.zero_std = u.at("zero_std").get<std::vector<double>>();
      ru.ambiguous = u.value("ambiguous", false);
      f.uncertainty = ru;
    }
    if (j.contains("setting")) {
      f.setting = SweepSetting{j.at("setting").at("dc").get<double>(),
                               j.at("setting").at("std").get<double>()};
    }
  } catch (const json::exception& e) {
    throw ConfigError(
        fmt::format("{}: bad model file: {}", path.string(), e.what()));
  }
  return f;
}

void write_settings_csv(const fs::path& path,
                        const std::vector<SweepSetting>& settings) {
  std::string text = "dc,std\n";
  for (const auto& s : settings) {
    text += fmt::format("{},{}\n", format_double(s.dc), format_double(s.std));
  }
  write_text(path, text);
}

std::vector<SweepSetting> read_settings_csv(const fs::path& path) {
  const Table t = read_table(path);
  const auto cd = column(t, "dc", path);
  const auto cs = column(t, "std", path);
  std::vector<SweepSetting> out;
  for (const auto& row : t.rows) out.push_back({row[cd], row[cs]});
  return out;
}

void write_verdict_json(const fs::path& path, const StructureVerdict& verdict,
                        double k_sigma) {
  json tracks = json::array();
  for (const auto& t : verdict.tracks) {
    tracks.push_back({{"kind", t.is_pole ? "pole" : "zero"},
                      {"roots", complex_list(t.roots)},
                      {"score", finite_or_null(t.score)},
                      {"moved", t.score > k_sigma}});
  }
  json j = {
      {"label", std::string(structure_name(verdict.label))},
      {"pole_moved", verdict.pole_moved},
      {"zero_moved", verdict.zero_moved},
      {"k_sigma", k_sigma},
      {"ambiguous_matching", verdict.ambiguous_matching},
      {"tracks", tracks},
      {"caveat", verdict.caveat},
  };
  write_text(path, j.dump(2) + "\n");
}

std::string sha256_file(const fs::path& path) {
  const std::string data = read_text(path);
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(),
                 nullptr) != 1) {
    throw NumericError("sha256 failed");
  }
  std::string hex;
  for (unsigned int i = 0; i < len; ++i) hex += fmt::format("{:02x}", digest[i]);
  return hex;
}

void write_text(const fs::path& path, const std::string& text) {
  auto out = open_out(path);
  out << text;
  if (!out) throw ConfigError(fmt::format("write failed: {}", path.string()));
}

std::string read_text(const fs::path& path) {
  auto in = open_in(path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace blalab
