#include "roscert/problem.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

namespace roscert::problem {

ProblemError::ProblemError(int line, const std::string& what)
    : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}

namespace {

int line_of(const YAML::Node& node) { return node.Mark().is_null() ? 0 : node.Mark().line + 1; }

[[noreturn]] void fail(const YAML::Node& node, const std::string& what) { throw ProblemError(line_of(node), what); }

void check_keys(const YAML::Node& map, const std::string& where, const std::set<std::string>& allowed) {
  if (!map.IsMap()) fail(map, where + " must be a mapping");
  for (const auto& kv : map) {
    const std::string key = kv.first.as<std::string>();
    if (!allowed.contains(key)) fail(kv.first, "unknown key '" + key + "' in " + where);
  }
}

YAML::Node require(const YAML::Node& map, const std::string& key, const std::string& where) {
  const YAML::Node child = map[key];
  if (!child) fail(map, where + " needs '" + key + "'");
  return child;
}

template <class T>
T scalar(const YAML::Node& node, const std::string& what) {
  if (!node.IsScalar()) fail(node, what + " must be a scalar");
  try {
    return node.as<T>();
  } catch (const YAML::Exception&) {
    fail(node, what + ": cannot read '" + node.Scalar() + "'");
  }
}

template <class T>
std::vector<T> scalar_list(const YAML::Node& node, const std::string& what) {
  std::vector<T> out;
  if (node.IsScalar()) {
    out.push_back(scalar<T>(node, what));
    return out;
  }
  if (!node.IsSequence() || node.size() == 0) fail(node, what + " must be a value or a non-empty list");
  for (const auto& item : node) out.push_back(scalar<T>(item, what));
  return out;
}

std::vector<poly::Poly> poly_list(const YAML::Node& node, int dim, const std::string& what) {
  if (!node.IsSequence() || node.size() == 0) fail(node, what + " must be a non-empty list of polynomials");
  std::vector<poly::Poly> out;
  for (const auto& item : node) {
    const std::string text = scalar<std::string>(item, what);
    try {
      out.push_back(poly::parse(text, dim));
    } catch (const std::exception& e) {
      fail(item, what + ": " + e.what());
    }
  }
  return out;
}

void parse_network(const YAML::Node& node, Problem& p) {
  check_keys(node, "network", {"n", "N", "f", "g", "L", "c", "row_sum_exempt"});
  netmodel::NetworkSpec& s = p.network;
  s.n = scalar<int>(require(node, "n", "network"), "network.n");
  s.N = scalar<int>(require(node, "N", "network"), "network.N");
  if (s.n < 1 || s.N < 1) fail(node, "network.n and network.N must be positive");
  const YAML::Node f = require(node, "f", "network");
  const YAML::Node g = require(node, "g", "network");
  s.f = poly_list(f, s.n, "network.f");
  s.g = poly_list(g, s.n, "network.g");
  if (static_cast<int>(s.f.size()) != s.n) fail(f, "network.f needs n = " + std::to_string(s.n) + " components");
  if (static_cast<int>(s.g.size()) != s.n) fail(g, "network.g needs n = " + std::to_string(s.n) + " components");
  const YAML::Node L = require(node, "L", "network");
  if (!L.IsSequence() || static_cast<int>(L.size()) != s.N) fail(L, "network.L needs N rows");
  s.L = Eigen::MatrixXd(s.N, s.N);
  for (int i = 0; i < s.N; ++i) {
    const YAML::Node row = L[i];
    if (!row.IsSequence() || static_cast<int>(row.size()) != s.N) fail(row, "network.L rows need N entries");
    for (int j = 0; j < s.N; ++j) s.L(i, j) = scalar<double>(row[j], "network.L entry");
  }
  s.c = scalar<double>(require(node, "c", "network"), "network.c");
  if (node["row_sum_exempt"]) s.row_sum_exempt = scalar<bool>(node["row_sum_exempt"], "network.row_sum_exempt");
  try {
    s.validate();
  } catch (const std::invalid_argument& e) {
    fail(node, e.what());
  }
}

void parse_region(const YAML::Node& node, Problem& p) {
  check_keys(node, "region", {"mode", "state", "target_epsilon", "target", "node_box"});
  const YAML::Node mode = require(node, "mode", "region");
  const std::string m = scalar<std::string>(mode, "region.mode");
  if (m == "manifold") {
    p.kind = synth::ProgramKind::kManifold;
    p.region.variables = netmodel::RegionVariables::kErrorPair;
  } else if (m == "equilibrium") {
    p.kind = synth::ProgramKind::kEquilibrium;
    p.region.variables = netmodel::RegionVariables::kFullState;
  } else {
    fail(mode, "region.mode must be 'manifold' or 'equilibrium'");
  }
  const int dim = p.region.dim(p.network);
  p.region.state_ineqs = poly_list(require(node, "state", "region"), dim, "region.state");
  const bool has_eps = static_cast<bool>(node["target_epsilon"]);
  const bool has_polys = static_cast<bool>(node["target"]);
  if (has_eps == has_polys) fail(node, "region needs exactly one of 'target_epsilon' and 'target'");
  if (has_eps) {
    p.region.epsilon = scalar<double>(node["target_epsilon"], "region.target_epsilon");
    if (!(p.region.epsilon > 0.0)) fail(node["target_epsilon"], "region.target_epsilon must be positive");
  } else {
    p.region.target_polys = poly_list(node["target"], dim, "region.target");
  }
  if (node["node_box"]) p.region.node_box = scalar<double>(node["node_box"], "region.node_box");
  try {
    p.region.validate(p.network);
  } catch (const std::invalid_argument& e) {
    fail(node, e.what());
  }
}

void parse_synthesis(const YAML::Node& node, Problem& p) {
  check_keys(node, "synthesis",
             {"lambda", "deg_V", "pair_mode", "multiplier_degree", "normalization", "trace_penalty"});
  p.lambdas = scalar_list<double>(require(node, "lambda", "synthesis"), "synthesis.lambda");
  p.degrees = scalar_list<int>(require(node, "deg_V", "synthesis"), "synthesis.deg_V");
  synth::SynthesisConfig& cfg = p.synthesis;
  if (const YAML::Node pm = node["pair_mode"]) {
    const std::string v = scalar<std::string>(pm, "synthesis.pair_mode");
    if (v == "ordered") {
      cfg.pair_mode = synth::PairMode::kOrdered;
    } else if (v == "unordered") {
      cfg.pair_mode = synth::PairMode::kUnordered;
    } else {
      fail(pm, "synthesis.pair_mode must be 'ordered' or 'unordered'");
    }
  }
  if (const YAML::Node md = node["multiplier_degree"]) {
    if (md.IsScalar() && md.Scalar() == "auto") {
      cfg.deg_multipliers = 0;
    } else {
      cfg.deg_multipliers = scalar<int>(md, "synthesis.multiplier_degree");
    }
  }
  if (const YAML::Node nm = node["normalization"]) {
    const std::string v = scalar<std::string>(nm, "synthesis.normalization");
    if (v == "origin_value") {
      cfg.normalization = synth::Normalization::kOriginValue;
    } else if (v == "upper_bound") {
      cfg.normalization = synth::Normalization::kUpperBound;
    } else {
      fail(nm, "synthesis.normalization must be 'origin_value' or 'upper_bound'");
    }
  }
  if (node["trace_penalty"]) cfg.trace_penalty = scalar<double>(node["trace_penalty"], "synthesis.trace_penalty");
  for (double lambda : p.lambdas) {
    for (int deg : p.degrees) {
      synth::SynthesisConfig trial = cfg;
      trial.lambda = lambda;
      trial.deg_V = deg;
      try {
        trial.validate();
      } catch (const std::invalid_argument& e) {
        fail(node, e.what());
      }
    }
  }
}

void parse_validation(const YAML::Node& node, Problem& p) {
  check_keys(node, "validation",
             {"trials", "seed", "step", "t_max", "verification_samples", "initial_conditions"});
  ValidationSettings& v = p.validation;
  if (node["trials"]) v.trials = scalar<int>(node["trials"], "validation.trials");
  if (node["seed"]) v.seed = scalar<std::uint64_t>(node["seed"], "validation.seed");
  if (node["step"]) v.step = scalar<double>(node["step"], "validation.step");
  if (node["t_max"]) v.t_max = scalar<double>(node["t_max"], "validation.t_max");
  if (node["verification_samples"]) {
    v.verification_samples = scalar<int>(node["verification_samples"], "validation.verification_samples");
  }
  if (v.trials < 0 || v.verification_samples < 0) {
    fail(node, "validation counts must be non-negative");
  }
  if (!(v.step > 0.0) || !(v.t_max > v.step)) fail(node, "validation needs step > 0 and t_max > step");
  if (const YAML::Node ics = node["initial_conditions"]) {
    if (!ics.IsSequence()) fail(ics, "validation.initial_conditions must be a list of states");
    for (const auto& ic : ics) {
      auto x = scalar_list<double>(ic, "initial condition");
      if (static_cast<int>(x.size()) != p.network.state_dim()) {
        fail(ic, "initial condition needs nN = " + std::to_string(p.network.state_dim()) + " entries");
      }
      v.initial_conditions.push_back(std::move(x));
    }
  }
}

void parse_output(const YAML::Node& node, Problem& p) {
  check_keys(node, "output", {"directory", "contour"});
  if (node["directory"]) p.output_dir = scalar<std::string>(node["directory"], "output.directory");
  if (const YAML::Node c = node["contour"]) {
    check_keys(c, "output.contour", {"resolution", "range", "axes"});
    ContourSettings& s = p.contour;
    if (c["resolution"]) s.resolution = scalar<int>(c["resolution"], "output.contour.resolution");
    if (s.resolution < 2) fail(c, "output.contour.resolution must be at least 2");
    if (const YAML::Node r = c["range"]) {
      const auto range = scalar_list<double>(r, "output.contour.range");
      if (range.size() != 2 || !(range[0] < range[1])) fail(r, "output.contour.range must be [lo, hi] with lo < hi");
      s.lo = range[0];
      s.hi = range[1];
    }
    if (const YAML::Node a = c["axes"]) {
      const auto axes = scalar_list<int>(a, "output.contour.axes");
      const int dim = p.region.dim(p.network);
      if (axes.size() != 2 || axes[0] == axes[1] || std::min(axes[0], axes[1]) < 1 ||
          std::max(axes[0], axes[1]) > dim) {
        fail(a, "output.contour.axes must name two distinct variables in 1.." + std::to_string(dim));
      }
      s.axis_x = axes[0] - 1;
      s.axis_y = axes[1] - 1;
    }
  }
}

void parse_checks(const YAML::Node& node, Problem& p) {
  check_keys(node, "checks", {"contains_ball"});
  if (node["contains_ball"]) {
    const double r = scalar<double>(node["contains_ball"], "checks.contains_ball");
    if (!(r > 0.0)) fail(node["contains_ball"], "checks.contains_ball must be positive");
    p.contains_ball = r;
  }
}

}  // namespace

Problem parse(const std::string& text) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ProblemError(e.mark.line + 1, e.msg);
  }
  if (!root || root.IsNull()) throw ProblemError(1, "empty problem file");
  check_keys(root, "problem", {"name", "network", "region", "synthesis", "validation", "output", "checks"});
  Problem p;
  if (root["name"]) p.name = scalar<std::string>(root["name"], "name");
  parse_network(require(root, "network", "problem"), p);
  parse_region(require(root, "region", "problem"), p);
  parse_synthesis(require(root, "synthesis", "problem"), p);
  if (root["validation"]) parse_validation(root["validation"], p);
  if (root["output"]) parse_output(root["output"], p);
  if (root["checks"]) parse_checks(root["checks"], p);
  return p;
}

Problem load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ProblemError(0, "cannot open problem file '" + path + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return parse(text.str());
}

}  // namespace roscert::problem
