#pragma once

#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "waveobs/csv.hpp"
#include "waveobs/inverse.hpp"
#include "waveobs/presets.hpp"

namespace waveobs::cli {

/// One experiment configuration: flat key=value text file plus command-line
/// overrides. Every key is documented in --help; a reference file ships in
/// tools/waveobs.cfg.
struct RunConfig {
  int n = 99;
  std::string n_list = "9,19,39,79,159,319";
  double t_final = 3.0;
  double dt = 0.0; // 0 selects the default policy dt = h
  std::string potential = "smooth-sine"; // smooth-sine | step | constant:<v> | table:<path>
  std::string source = "f-discontinuous"; // f-discontinuous | g-smooth | none | table:<path>
  std::string intensity = "constant:1";
  std::string init_w0 = "none"; // none | eigenmode:<k> | sine:<k> | bump
  std::string init_w1 = "none";
  std::string deltas = "0.05,0.1,0.25";
  std::uint64_t seed = 1u;
  int fine_factor = 4;
  int noise_seeds = 5;
  bool reference_mesh = false; // include the n = 999 rows in table presets
  bool first_term_only = false;
  std::string strategy = "eigenmodes"; // eigenmodes | random | rayleigh
  std::string out_dir = ".";

  bool operator==(const RunConfig&) const = default;
};

inline std::string serialize(const RunConfig& c) {
  std::ostringstream out;
  out << "n=" << c.n << '\n'
      << "n_list=" << c.n_list << '\n'
      << "t_final=" << format_double(c.t_final) << '\n'
      << "dt=" << format_double(c.dt) << '\n'
      << "potential=" << c.potential << '\n'
      << "source=" << c.source << '\n'
      << "intensity=" << c.intensity << '\n'
      << "init_w0=" << c.init_w0 << '\n'
      << "init_w1=" << c.init_w1 << '\n'
      << "deltas=" << c.deltas << '\n'
      << "seed=" << c.seed << '\n'
      << "fine_factor=" << c.fine_factor << '\n'
      << "noise_seeds=" << c.noise_seeds << '\n'
      << "reference_mesh=" << (c.reference_mesh ? "true" : "false") << '\n'
      << "first_term_only=" << (c.first_term_only ? "true" : "false") << '\n'
      << "strategy=" << c.strategy << '\n'
      << "out_dir=" << c.out_dir << '\n';
  return out.str();
}

inline RunConfig parse(const std::string& text) {
  RunConfig c;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config: expected key=value, got '" + line + "'");
    const std::string key = line.substr(0, eq);
    const std::string val = line.substr(eq + 1);
    if (key == "n") c.n = std::stoi(val);
    else if (key == "n_list") c.n_list = val;
    else if (key == "t_final") c.t_final = std::stod(val);
    else if (key == "dt") c.dt = std::stod(val);
    else if (key == "potential") c.potential = val;
    else if (key == "source") c.source = val;
    else if (key == "intensity") c.intensity = val;
    else if (key == "init_w0") c.init_w0 = val;
    else if (key == "init_w1") c.init_w1 = val;
    else if (key == "deltas") c.deltas = val;
    else if (key == "seed") c.seed = std::stoull(val);
    else if (key == "fine_factor") c.fine_factor = std::stoi(val);
    else if (key == "noise_seeds") c.noise_seeds = std::stoi(val);
    else if (key == "reference_mesh") c.reference_mesh = (val == "true" || val == "1");
    else if (key == "first_term_only") c.first_term_only = (val == "true" || val == "1");
    else if (key == "strategy") c.strategy = val;
    else if (key == "out_dir") c.out_dir = val;
    else throw std::invalid_argument("config: unknown key '" + key + "'");
  }
  return c;
}

inline std::vector<int> parse_int_list(const std::string& s) {
  std::vector<int> out;
  std::istringstream in(s);
  std::string tok;
  while (std::getline(in, tok, ',')) {
    if (!tok.empty()) out.push_back(std::stoi(tok));
  }
  if (out.empty()) throw std::invalid_argument("empty integer list");
  return out;
}

inline std::vector<double> parse_double_list(const std::string& s) {
  std::vector<double> out;
  std::istringstream in(s);
  std::string tok;
  while (std::getline(in, tok, ','))
    if (!tok.empty()) out.push_back(std::stod(tok));
  return out;
}

/// Two-column x,value CSV loaded as a piecewise-linear interpolant.
inline ScalarFn load_table(const std::string& path, double* max_abs = nullptr) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open table: " + path);
  std::vector<double> xs, vs;
  std::string line;
  std::getline(in, line); // header
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw io_error("malformed table row in " + path);
    xs.push_back(std::stod(line.substr(0, comma)));
    vs.push_back(std::stod(line.substr(comma + 1)));
  }
  if (xs.size() < 2) throw io_error("table needs at least two rows: " + path);
  if (max_abs) {
    *max_abs = 0.0;
    for (double v : vs) *max_abs = std::max(*max_abs, std::abs(v));
  }
  return [xs, vs](double x) {
    if (x <= xs.front()) return vs.front();
    if (x >= xs.back()) return vs.back();
    const auto it = std::upper_bound(xs.begin(), xs.end(), x);
    const std::size_t i = static_cast<std::size_t>(it - xs.begin());
    const double w = (x - xs[i - 1]) / (xs[i] - xs[i - 1]);
    return (1 - w) * vs[i - 1] + w * vs[i];
  };
}

inline PotentialSpec resolve_potential(const std::string& selector) {
  if (selector == "smooth-sine") return presets::smooth_sine_potential();
  if (selector == "step") return presets::step_potential();
  if (selector.rfind("constant:", 0) == 0) {
    const double v = std::stod(selector.substr(9));
    return presets::constant_potential(v);
  }
  if (selector.rfind("table:", 0) == 0) {
    double sup = 0.0;
    ScalarFn fn = load_table(selector.substr(6), &sup);
    return PotentialSpec{std::move(fn), PotentialSpec::Kind::Tabulated, sup, {}, selector};
  }
  throw std::invalid_argument("unknown potential selector '" + selector + "'");
}

inline SourceSpec resolve_source(const std::string& selector) {
  if (selector == "f-discontinuous") return presets::discontinuous_source();
  if (selector == "g-smooth") return presets::smooth_source();
  if (selector.rfind("table:", 0) == 0)
    return SourceSpec{load_table(selector.substr(6)), {}, selector};
  throw std::invalid_argument("unknown source selector '" + selector + "'");
}

inline ScalarFn resolve_intensity(const std::string& selector) {
  if (selector.rfind("constant:", 0) == 0) {
    const double v = std::stod(selector.substr(9));
    return [v](double) { return v; };
  }
  throw std::invalid_argument("unknown intensity selector '" + selector + "'");
}

} // namespace waveobs::cli
