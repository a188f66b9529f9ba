#include "rdl/config.hpp"

#include <algorithm>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <cmath>
#include <fstream>
#include <map>
#include <nlohmann/json.hpp>
#include <set>
#include <sstream>

#include "rdl/error.hpp"

namespace rdl {

namespace {

namespace pt = boost::property_tree;
using json = nlohmann::json;

std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

const std::map<std::string, std::set<std::string>>& known_keys() {
  static const std::map<std::string, std::set<std::string>> keys = {
      {"geometry", {"d", "cell_length", "bc_bottom", "bc_top"}},
      {"manifold", {"kind", "center_x", "center_y", "radius"}},
      {"coupling", {"f_kind", "f_const", "t0"}},
      {"disorder", {"density", "a", "seed"}},
      {"numerics", {"nodes_per_cell", "tol", "quadrature_order", "nodes_per_crossing", "threads"}},
      {"experiment",
       {"eps", "cells", "trials", "include_extremal", "band_c", "tau", "c0", "window_factor", "delta_scales",
        "resolvent_trials", "energy", "energy0", "c2", "kappas", "ceiling_margin", "min_events", "ct_cells", "lambda_offsets",
        "probes"}},
      {"cell", {"etas", "eps_sweep"}},
      {"output", {"out_dir"}},
  };
  return keys;
}

class Reader {
 public:
  Reader(const pt::ptree& tree, std::vector<std::string>& violations) : tree_(tree), violations_(violations) {}

  template <class T>
  void read(const std::string& path, T& target) {
    const auto node = tree_.get_optional<std::string>(pt::ptree::path_type(path, '.'));
    if (!node) return;
    const std::string text = trim(*node);
    try {
      target = convert<T>(text);
    } catch (const std::exception&) {
      violations_.push_back(path + ": cannot parse '" + text + "'");
    }
  }

 private:
  template <class T>
  static T convert(const std::string& text) {
    std::size_t used = 0;
    if constexpr (std::is_same_v<T, double>) {
      const double v = std::stod(text, &used);
      if (used != text.size()) throw std::invalid_argument(text);
      return v;
    } else if constexpr (std::is_same_v<T, int>) {
      const int v = std::stoi(text, &used);
      if (used != text.size()) throw std::invalid_argument(text);
      return v;
    } else if constexpr (std::is_same_v<T, std::uint64_t>) {
      if (!text.empty() && text[0] == '-') throw std::invalid_argument(text);
      const unsigned long long v = std::stoull(text, &used, 0);
      if (used != text.size()) throw std::invalid_argument(text);
      return v;
    } else if constexpr (std::is_same_v<T, bool>) {
      if (text == "true" || text == "1" || text == "yes") return true;
      if (text == "false" || text == "0" || text == "no") return false;
      throw std::invalid_argument(text);
    } else if constexpr (std::is_same_v<T, std::string>) {
      return text;
    } else if constexpr (std::is_same_v<T, BoundaryKind>) {
      return boundary_kind_from_string(text);
    } else if constexpr (std::is_same_v<T, std::vector<double>>) {
      std::vector<double> out;
      std::stringstream ss(text);
      std::string item;
      while (std::getline(ss, item, ',')) out.push_back(convert<double>(trim(item)));
      return out;
    } else {
      static_assert(std::is_same_v<T, std::vector<int>>);
      std::vector<int> out;
      std::stringstream ss(text);
      std::string item;
      while (std::getline(ss, item, ',')) out.push_back(convert<int>(trim(item)));
      return out;
    }
  }

  const pt::ptree& tree_;
  std::vector<std::string>& violations_;
};

RunConfig from_tree(const pt::ptree& tree) {
  std::vector<std::string> violations;
  for (const auto& [section, body] : tree) {
    const auto it = known_keys().find(section);
    if (it == known_keys().end()) {
      violations.push_back("unknown section [" + section + "]");
      continue;
    }
    for (const auto& [key, value] : body) {
      if (!it->second.count(key)) violations.push_back("unknown key " + section + "." + key);
    }
  }

  RunConfig c;
  Reader r(tree, violations);
  r.read("geometry.d", c.geom.width);
  r.read("geometry.cell_length", c.geom.cell_length);
  r.read("geometry.bc_bottom", c.geom.bottom);
  r.read("geometry.bc_top", c.geom.top);
  r.read("manifold.kind", c.manifold_kind);
  r.read("manifold.center_x", c.center_x);
  r.read("manifold.center_y", c.center_y);
  r.read("manifold.radius", c.radius);
  r.read("coupling.f_kind", c.f_kind);
  r.read("coupling.f_const", c.f_const);
  r.read("coupling.t0", c.t0);
  r.read("disorder.density", c.density);
  r.read("disorder.a", c.a);
  r.read("disorder.seed", c.seed);
  r.read("numerics.nodes_per_cell", c.numerics.nodes_per_cell);
  r.read("numerics.tol", c.numerics.tol);
  r.read("numerics.quadrature_order", c.numerics.quadrature_order);
  r.read("numerics.nodes_per_crossing", c.numerics.nodes_per_crossing);
  r.read("numerics.threads", c.numerics.threads);
  ExperimentParams& e = c.experiment;
  r.read("experiment.eps", e.eps);
  r.read("experiment.cells", e.cells);
  r.read("experiment.trials", e.trials);
  r.read("experiment.include_extremal", e.include_extremal);
  r.read("experiment.band_c", e.band_c);
  r.read("experiment.tau", e.tau);
  r.read("experiment.c0", e.c0);
  r.read("experiment.window_factor", e.window_factor);
  r.read("experiment.delta_scales", e.delta_scales);
  r.read("experiment.resolvent_trials", e.resolvent_trials);
  r.read("experiment.energy", e.energy);
  r.read("experiment.energy0", e.energy0);
  r.read("experiment.c2", e.c2);
  r.read("experiment.kappas", e.kappas);
  r.read("experiment.ceiling_margin", e.ceiling_margin);
  r.read("experiment.min_events", e.min_events);
  r.read("experiment.ct_cells", e.ct_cells);
  r.read("experiment.lambda_offsets", e.lambda_offsets);
  r.read("experiment.probes", e.probes);
  r.read("cell.etas", c.cell_etas);
  r.read("cell.eps_sweep", c.eps_sweep);
  r.read("output.out_dir", c.out_dir);

  const std::vector<std::string> more = config_violations(c);
  violations.insert(violations.end(), more.begin(), more.end());
  if (!violations.empty()) throw ValidationError(violations);
  return c;
}

std::string scalar_text(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_array()) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + v[i].dump();
    return out;
  }
  return v.dump();
}

pt::ptree tree_from_json(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    // byte offset -> line number
    const std::size_t upto = std::min<std::size_t>(e.byte, text.size());
    const auto line = static_cast<std::size_t>(std::count(text.begin(), text.begin() + upto, '\n')) + 1;
    throw ParseError(line, e.what());
  }
  const json& cfg = doc.contains("config") ? doc["config"] : doc;
  if (!cfg.is_object()) throw ParseError(1, "config is not an object");
  pt::ptree tree;
  for (const auto& [section, body] : cfg.items()) {
    if (!body.is_object()) throw ParseError(1, "section " + section + " is not an object");
    pt::ptree sub;
    for (const auto& [key, value] : body.items()) sub.put(pt::ptree::path_type(key, '\0'), scalar_text(value));
    tree.add_child(pt::ptree::path_type(section, '\0'), sub);
  }
  return tree;
}

std::string bc_name(BoundaryKind k) { return std::string(to_string(k)); }

}  // namespace

Manifold RunConfig::manifold() const {
  if (manifold_kind == "separable_line") return Manifold::separable_line(center_y, geom.cell_length);
  return Manifold::circle({center_x, center_y}, radius);
}

CouplingFunction RunConfig::coupling() const { return CouplingFunction::constant(f_const, t0); }

Disorder RunConfig::disorder() const {
  if (density == "triangular") return Disorder::triangular(a, seed);
  return Disorder::smoothed_uniform(a, seed);
}

ModelSetup RunConfig::setup() const { return ModelSetup{geom, manifold(), coupling(), disorder()}; }

ExperimentParams RunConfig::params() const {
  ExperimentParams p = experiment;
  p.seed = seed;
  return p;
}

std::vector<std::string> config_violations(const RunConfig& c) {
  std::vector<std::string> v;
  if (!(c.geom.width > 0.0)) v.push_back("geometry.d must be positive");
  if (!(c.geom.cell_length > 0.0)) v.push_back("geometry.cell_length must be positive");
  if (c.manifold_kind != "circle" && c.manifold_kind != "separable_line") {
    v.push_back("manifold.kind must be circle or separable_line");
  } else if (c.manifold_kind == "circle") {
    if (!(c.radius > 0.0)) {
      v.push_back("manifold.radius must be positive");
    } else if (!(c.center_x - c.radius > 0.0 && c.center_x + c.radius < c.geom.cell_length &&
                 c.center_y - c.radius > 0.0 && c.center_y + c.radius < c.geom.width)) {
      v.push_back("manifold: the circle must lie inside the open cell (0, cell_length) x (0, d)");
    }
  } else if (!(c.center_y > 0.0 && c.center_y < c.geom.width)) {
    v.push_back("manifold.center_y: separable line height must lie in (0, d)");
  }
  if (c.f_kind != "constant") v.push_back("coupling.f_kind must be constant");
  if (!std::isfinite(c.f_const)) v.push_back("coupling.f_const must be finite");
  if (!(c.t0 > 0.0)) v.push_back("coupling.t0 must be positive");
  if (c.density != "smoothed_uniform" && c.density != "triangular") {
    v.push_back("disorder.density must be smoothed_uniform or triangular");
  }
  if (!(c.a >= -1.0 && c.a < 1.0)) {
    v.push_back("disorder.a = " + std::to_string(c.a) +
                " violates the support constraint a = min supp mu < max supp mu = 1 with a in [-1, 1)");
  }
  const ExperimentParams& e = c.experiment;
  const double max_abs_omega = std::max(1.0, std::abs(c.a));
  if (!(e.eps >= 0.0)) v.push_back("experiment.eps must be non-negative");
  if (e.eps * max_abs_omega > c.t0) {
    v.push_back("experiment.eps = " + std::to_string(e.eps) + " leaves the coupling range: eps * max|omega| must not exceed t0 = " +
                std::to_string(c.t0));
  }
  for (double eta : c.cell_etas) {
    if (std::abs(eta) > c.t0) v.push_back("cell.etas value " + std::to_string(eta) + " leaves the coupling range |eta| <= t0");
  }
  if (c.numerics.nodes_per_cell < 8) v.push_back("numerics.nodes_per_cell must be at least 8");
  if (!(c.numerics.tol >= 1e-12 && c.numerics.tol <= 1e-4)) v.push_back("numerics.tol must lie in [1e-12, 1e-4]");
  if (c.numerics.quadrature_order < 8) v.push_back("numerics.quadrature_order must be at least 8");
  if (c.numerics.nodes_per_crossing < 1) v.push_back("numerics.nodes_per_crossing must be positive");
  if (c.numerics.threads < 1) v.push_back("numerics.threads must be positive");
  if (e.trials < 1) v.push_back("experiment.trials must be positive");
  if (e.cells.empty()) v.push_back("experiment.cells must list at least one box size");
  for (int n : e.cells) {
    if (n < 1) v.push_back("experiment.cells entries must be positive");
  }
  if (e.tau < 5) v.push_back("experiment.tau must be at least 5");
  if (!(e.c0 > 0.0)) v.push_back("experiment.c0 must be positive");
  if (!(e.window_factor >= 1.0)) v.push_back("experiment.window_factor must be at least 1");
  for (double k : e.kappas) {
    if (k < 0.0) v.push_back("experiment.kappas entries must be non-negative");
    const TransverseMode mode = transverse_mode(c.geom.width > 0 && c.geom.cell_length > 0 ? c.geom : LayerGeometry{});
    if (k > 0.25 * std::abs(mode.lambda0 - e.energy0)) {
      v.push_back("experiment.kappas value " + std::to_string(k) + " exceeds |Lambda_0 - E0| / 4");
    }
  }
  if (e.min_events < 0) v.push_back("experiment.min_events must be non-negative");
  if (e.ct_cells < 6) v.push_back("experiment.ct_cells must be at least 6");
  if (e.probes < 1) v.push_back("experiment.probes must be positive");
  if (!(c.eps_sweep > 0.0)) v.push_back("cell.eps_sweep must be positive");
  if (c.out_dir.empty()) v.push_back("output.out_dir must not be empty");
  return v;
}

void validate_config(const RunConfig& config) {
  const std::vector<std::string> v = config_violations(config);
  if (!v.empty()) throw ValidationError(v);
}

RunConfig parse_config_text(std::string_view text) {
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string_view::npos && text[first] == '{') return from_tree(tree_from_json(text));
  pt::ptree tree;
  std::istringstream in{std::string(text)};
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ParseError(e.line(), e.message());
  }
  return from_tree(tree);
}

RunConfig parse_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(0, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

std::string config_to_json(const RunConfig& c) {
  const ExperimentParams& e = c.experiment;
  json j;
  j["geometry"] = {{"d", c.geom.width},
                   {"cell_length", c.geom.cell_length},
                   {"bc_bottom", bc_name(c.geom.bottom)},
                   {"bc_top", bc_name(c.geom.top)}};
  j["manifold"] = {{"kind", c.manifold_kind}, {"center_x", c.center_x}, {"center_y", c.center_y}, {"radius", c.radius}};
  j["coupling"] = {{"f_kind", c.f_kind}, {"f_const", c.f_const}, {"t0", c.t0}};
  j["disorder"] = {{"density", c.density}, {"a", c.a}, {"seed", c.seed}};
  j["numerics"] = {{"nodes_per_cell", c.numerics.nodes_per_cell},
                   {"tol", c.numerics.tol},
                   {"quadrature_order", c.numerics.quadrature_order},
                   {"nodes_per_crossing", c.numerics.nodes_per_crossing},
                   {"threads", c.numerics.threads}};
  j["experiment"] = {{"eps", e.eps},
                     {"cells", e.cells},
                     {"trials", e.trials},
                     {"include_extremal", e.include_extremal},
                     {"band_c", e.band_c},
                     {"tau", e.tau},
                     {"c0", e.c0},
                     {"window_factor", e.window_factor},
                     {"delta_scales", e.delta_scales},
                     {"resolvent_trials", e.resolvent_trials},
                     {"energy", e.energy},
                     {"energy0", e.energy0},
                     {"c2", e.c2},
                     {"kappas", e.kappas},
                     {"ceiling_margin", e.ceiling_margin},
                     {"min_events", e.min_events},
                     {"ct_cells", e.ct_cells},
                     {"lambda_offsets", e.lambda_offsets},
                     {"probes", e.probes}};
  j["cell"] = {{"etas", c.cell_etas}, {"eps_sweep", c.eps_sweep}};
  j["output"] = {{"out_dir", c.out_dir}};
  return j.dump(2);
}

}  // namespace rdl
