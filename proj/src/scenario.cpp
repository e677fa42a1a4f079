#include "esc/scenario.hpp"

#include "esc/errors.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace esc {

using nlohmann::json;

namespace {

const json* child(const json& obj, const char* key) {
  if (!obj.is_object()) return nullptr;
  auto it = obj.find(key);
  return it == obj.end() ? nullptr : &*it;
}

const json& require(const json& obj, const std::string& path, const char* key) {
  const json* v = child(obj, key);
  if (!v) throw ConfigError(path + "." + key, "missing");
  return *v;
}

double as_number(const json& v, const std::string& path) {
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) {
    const auto s = v.get<std::string>();
    if (s == "inf" || s == "+inf" || s == "infinity") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
  }
  throw ConfigError(path, "expected a number");
}

double number_or(const json& obj, const std::string& path, const char* key, double fallback) {
  const json* v = child(obj, key);
  return v ? as_number(*v, path + "." + key) : fallback;
}

Vector as_vector(const json& v, const std::string& path) {
  if (!v.is_array()) throw ConfigError(path, "expected an array of numbers");
  Vector out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) {
    out[static_cast<Eigen::Index>(i)] = as_number(v[i], path + "[" + std::to_string(i) + "]");
  }
  return out;
}

Matrix as_matrix(const json& v, const std::string& path) {
  if (!v.is_array() || v.empty() || !v[0].is_array()) {
    throw ConfigError(path, "expected a row-major array of rows");
  }
  const auto rows = v.size();
  const auto cols = v[0].size();
  Matrix out(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (std::size_t r = 0; r < rows; ++r) {
    const std::string rp = path + "[" + std::to_string(r) + "]";
    if (!v[r].is_array() || v[r].size() != cols) throw ConfigError(rp, "ragged matrix row");
    for (std::size_t c = 0; c < cols; ++c) {
      out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          as_number(v[r][c], rp + "[" + std::to_string(c) + "]");
    }
  }
  return out;
}

json number_to_json(double x) {
  if (std::isinf(x)) return x > 0 ? json("inf") : json("-inf");
  return x;
}

json vector_to_json(const Vector& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

json matrix_to_json(const Matrix& M) {
  json out = json::array();
  for (Eigen::Index r = 0; r < M.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < M.cols(); ++c) row.push_back(M(r, c));
    out.push_back(std::move(row));
  }
  return out;
}

bool same(const Matrix& a, const Matrix& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() && (a.array() == b.array()).all();
}

bool same(const Vector& a, const Vector& b) {
  return a.size() == b.size() && (a.array() == b.array()).all();
}

bool parse_bool(const json& v, const std::string& path) {
  if (!v.is_boolean()) throw ConfigError(path, "expected true or false");
  return v.get<bool>();
}

int parse_int(const json& v, const std::string& path) {
  if (!v.is_number_integer()) throw ConfigError(path, "expected an integer");
  return v.get<int>();
}

MapSpec parse_map(const json& m) {
  const std::string path = "plant.map";
  MapSpec spec;
  spec.kind = require(m, path, "kind").get<std::string>();
  if (spec.kind == "quadratic" || spec.kind == "coupled_quadratic") {
    spec.y_star = as_number(require(m, path, "y_star"), path + ".y_star");
    spec.z_star = as_vector(require(m, path, "z_star"), path + ".z_star");
    if (spec.kind == "quadratic") {
      spec.H = as_matrix(require(m, path, "H"), path + ".H");
    } else {
      spec.coupling = as_number(require(m, path, "coupling"), path + ".coupling");
    }
  } else if (spec.kind == "linear") {
    spec.c = as_vector(require(m, path, "c"), path + ".c");
    spec.offset = number_or(m, path, "offset", 0.0);
  } else {
    throw ConfigError(path + ".kind", "unknown map kind \"" + spec.kind +
                                          "\" (quadratic, coupled_quadratic, linear)");
  }
  return spec;
}

json map_to_json(const MapSpec& spec) {
  json m;
  m["kind"] = spec.kind;
  if (spec.kind == "linear") {
    m["c"] = vector_to_json(spec.c);
    m["offset"] = spec.offset;
  } else {
    m["y_star"] = spec.y_star;
    m["z_star"] = vector_to_json(spec.z_star);
    if (spec.kind == "quadratic") m["H"] = matrix_to_json(spec.H);
    else m["coupling"] = spec.coupling;
  }
  return m;
}

// Collects every leaf path whose last component equals `leaf`.
void find_leaf(const json& node, const std::string& prefix, const std::string& leaf,
               std::vector<std::string>& hits) {
  if (!node.is_object()) return;
  for (auto it = node.begin(); it != node.end(); ++it) {
    const std::string path = prefix.empty() ? it.key() : prefix + "." + it.key();
    if (it.key() == leaf) hits.push_back(path);
    find_leaf(it.value(), path, leaf, hits);
  }
}

// Known fields that may be absent from a file but still be overridden.
const char* const kKnownPaths[] = {
    "controller.p", "controller.p0", "controller.y_sat", "controller.lambda",
    "controller.epsilon_sw", "controller.gamma", "controller.L_h", "controller.eta",
    "controller.T_s", "controller.ts_scale", "controller.n_dirs", "controller.scaling_mode",
    "sim.dt", "sim.horizon", "sim.x0", "sim.v0", "sim.quasi_steady", "sim.log_stride",
    "sim.dt_guard", "plant.time_scale", "analysis.delta", "analysis.trailing_fraction",
    "analysis.c_bound"};

const char* const kNumericPaths[] = {
    "controller.p", "controller.p0", "controller.y_sat", "controller.lambda",
    "controller.epsilon_sw", "controller.gamma", "controller.L_h", "controller.eta",
    "controller.T_s", "controller.ts_scale", "sim.dt", "sim.horizon", "plant.time_scale",
    "plant.map.coupling", "plant.map.y_star", "analysis.delta", "analysis.trailing_fraction",
    "analysis.c_bound"};

}  // namespace

std::optional<std::string> resolve_numeric_field(const std::string& name) {
  std::optional<std::string> hit;
  for (const char* known : kNumericPaths) {
    const std::string k(known);
    const bool leaf = k.size() > name.size() &&
                      k.compare(k.size() - name.size(), name.size(), name) == 0 &&
                      k[k.size() - name.size() - 1] == '.';
    if (k == name) return k;
    if (leaf) {
      if (hit) return std::nullopt;  // ambiguous
      hit = k;
    }
  }
  return hit;
}

StaticMap MapSpec::build() const {
  if (kind == "quadratic") return StaticMap::quadratic(y_star, z_star, H);
  if (kind == "coupled_quadratic") return StaticMap::coupled_quadratic(y_star, z_star, coupling);
  if (kind == "linear") return StaticMap::linear(c, offset);
  throw ConfigError("plant.map.kind", "unknown map kind \"" + kind + "\"");
}

std::optional<Optimum> MapSpec::optimum() const {
  if (kind == "linear") return std::nullopt;
  return Optimum{z_star, y_star};
}

bool operator==(const Scenario& a, const Scenario& b) {
  const auto& pa = a.plant;
  const auto& pb = b.plant;
  const auto& ma = pa.map;
  const auto& mb = pb.map;
  const auto& ca = a.controller;
  const auto& cb = b.controller;
  const auto& sa = a.sim;
  const auto& sb = b.sim;
  return a.name == b.name && a.description == b.description && same(pa.A, pb.A) &&
         same(pa.B, pb.B) && same(pa.C, pb.C) && pa.time_scale == pb.time_scale &&
         ma.kind == mb.kind && ma.y_star == mb.y_star && same(ma.z_star, mb.z_star) &&
         same(ma.H, mb.H) && ma.coupling == mb.coupling && same(ma.c, mb.c) &&
         ma.offset == mb.offset && ca.p == cb.p && ca.p0 == cb.p0 && ca.y_sat == cb.y_sat &&
         ca.lambda == cb.lambda && ca.epsilon_sw == cb.epsilon_sw && ca.gamma == cb.gamma &&
         ca.L_h == cb.L_h && ca.eta == cb.eta && ca.T_s == cb.T_s &&
         ca.ts_scale == cb.ts_scale && ca.n_dirs == cb.n_dirs &&
         ca.scaling_mode == cb.scaling_mode && sa.dt == sb.dt && sa.horizon == sb.horizon &&
         same(sa.x0, sb.x0) && same(sa.v0, sb.v0) && sa.quasi_steady == sb.quasi_steady &&
         sa.log_stride == sb.log_stride && sa.dt_guard == sb.dt_guard &&
         sa.allow_unstable == sb.allow_unstable && a.analysis.delta == b.analysis.delta &&
         a.analysis.trailing_fraction == b.analysis.trailing_fraction &&
         a.analysis.c_bound == b.analysis.c_bound;
}

void apply_override(json& doc, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw ConfigError("--override", "expected key=value, got \"" + assignment + "\"");
  }
  std::string key = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);

  if (key.find('.') == std::string::npos) {
    std::vector<std::string> hits;
    find_leaf(doc, "", key, hits);
    for (const char* known : kKnownPaths) {
      const std::string k(known);
      if (k.size() > key.size() && k.compare(k.size() - key.size(), key.size(), key) == 0 &&
          k[k.size() - key.size() - 1] == '.' &&
          std::find(hits.begin(), hits.end(), k) == hits.end()) {
        hits.push_back(k);
      }
    }
    if (hits.empty()) throw ConfigError(key, "unknown scenario field");
    if (hits.size() > 1) {
      throw ConfigError(key, "ambiguous field name; use a dot-path such as " + hits.front());
    }
    key = hits.front();
  }

  json value;
  try {
    value = json::parse(text);
  } catch (const json::parse_error&) {
    value = text;
  }

  json* node = &doc;
  std::istringstream parts(key);
  std::string part;
  std::vector<std::string> path;
  while (std::getline(parts, part, '.')) path.push_back(part);
  for (std::size_t i = 0; i + 1 < path.size(); ++i) {
    if (!node->is_object()) throw ConfigError(key, "path does not name an object");
    node = &(*node)[path[i]];
  }
  (*node)[path.back()] = std::move(value);
}

namespace {

Scenario parse_scenario(json doc, const LoadOptions& options);

}  // namespace

Scenario scenario_from_json(json doc, const LoadOptions& options) {
  try {
    return parse_scenario(std::move(doc), options);
  } catch (const json::exception& e) {
    throw ConfigError("", std::string("malformed scenario: ") + e.what());
  }
}

namespace {

Scenario parse_scenario(json doc, const LoadOptions& options) {
  for (const auto& o : options.overrides) apply_override(doc, o);
  if (!doc.is_object()) throw ConfigError("", "scenario must be an object");

  Scenario sc;
  if (const json* v = child(doc, "name")) sc.name = v->get<std::string>();
  if (const json* v = child(doc, "description")) sc.description = v->get<std::string>();

  const json& plant = require(doc, "", "plant");
  sc.plant.A = as_matrix(require(plant, "plant", "A"), "plant.A");
  sc.plant.B = as_matrix(require(plant, "plant", "B"), "plant.B");
  sc.plant.C = as_matrix(require(plant, "plant", "C"), "plant.C");
  sc.plant.time_scale = number_or(plant, "plant", "time_scale", 1.0);
  sc.plant.map = parse_map(require(plant, "plant", "map"));

  const json& ctl = require(doc, "", "controller");
  auto& cp = sc.controller;
  const std::string c = "controller";
  cp.p = as_number(require(ctl, c, "p"), "controller.p");
  cp.p0 = number_or(ctl, c, "p0", 0.0);
  cp.y_sat = number_or(ctl, c, "y_sat", std::numeric_limits<double>::infinity());
  if (const json* v = child(ctl, "y_sat"); v && v->is_null()) {
    cp.y_sat = std::numeric_limits<double>::infinity();
  }
  cp.lambda = as_number(require(ctl, c, "lambda"), "controller.lambda");
  cp.epsilon_sw = as_number(require(ctl, c, "epsilon_sw"), "controller.epsilon_sw");
  cp.gamma = as_number(require(ctl, c, "gamma"), "controller.gamma");
  cp.L_h = as_number(require(ctl, c, "L_h"), "controller.L_h");
  cp.eta = number_or(ctl, c, "eta", 1.0);
  cp.T_s = as_number(require(ctl, c, "T_s"), "controller.T_s");
  cp.ts_scale = number_or(ctl, c, "ts_scale", 1.0);
  cp.n_dirs = child(ctl, "n_dirs") ? parse_int(ctl["n_dirs"], "controller.n_dirs")
                                   : static_cast<int>(sc.plant.B.cols());
  if (const json* v = child(ctl, "scaling_mode")) {
    cp.scaling_mode = scaling_mode_from_string(v->get<std::string>());
  }

  const json& sim = require(doc, "", "sim");
  auto& sp = sc.sim;
  sp.dt = number_or(sim, "sim", "dt", 1e-3);
  sp.horizon = as_number(require(sim, "sim", "horizon"), "sim.horizon");
  sp.x0 = as_vector(require(sim, "sim", "x0"), "sim.x0");
  if (const json* v = child(sim, "v0"); v && !v->is_null()) sp.v0 = as_vector(*v, "sim.v0");
  if (const json* v = child(sim, "quasi_steady")) sp.quasi_steady = parse_bool(*v, "sim.quasi_steady");
  if (const json* v = child(sim, "log_stride")) sp.log_stride = parse_int(*v, "sim.log_stride");
  if (const json* v = child(sim, "dt_guard")) sp.dt_guard = parse_bool(*v, "sim.dt_guard");
  if (options.dt_guard) sp.dt_guard = *options.dt_guard;
  sp.allow_unstable = options.allow_unstable;

  if (const json* a = child(doc, "analysis")) {
    if (const json* v = child(*a, "delta"); v && !v->is_null()) {
      sc.analysis.delta = as_number(*v, "analysis.delta");
    }
    sc.analysis.trailing_fraction = number_or(*a, "analysis", "trailing_fraction", 0.1);
    sc.analysis.c_bound = number_or(*a, "analysis", "c_bound", 2.5);
  }

  validate(sc);
  return sc;
}

}  // namespace

void validate(const Scenario& sc) {
  sc.controller.validate();
  sc.sim.validate();

  const auto n = sc.plant.A.rows();
  if (sc.sim.x0.size() != n) {
    throw ConfigError("sim.x0", "expected dimension " + std::to_string(n) + ", got " +
                                    std::to_string(sc.sim.x0.size()));
  }
  if (sc.sim.v0.size() != 0 && sc.sim.v0.size() != sc.plant.B.cols()) {
    throw ConfigError("sim.v0", "expected dimension " + std::to_string(sc.plant.B.cols()) +
                                    ", got " + std::to_string(sc.sim.v0.size()));
  }
  if (sc.controller.n_dirs != sc.plant.B.cols()) {
    throw ConfigError("controller.n_dirs", "must equal the number of plant inputs (" +
                                               std::to_string(sc.plant.B.cols()) + ")");
  }
  const auto& a = sc.analysis;
  if (a.delta && !(*a.delta > 0.0)) throw ConfigError("analysis.delta", "must be positive");
  if (!(a.trailing_fraction > 0.0 && a.trailing_fraction <= 1.0)) {
    throw ConfigError("analysis.trailing_fraction", "must lie in (0, 1]");
  }
  if (!(a.c_bound > 0.0)) throw ConfigError("analysis.c_bound", "must be positive");

  const CascadePlant plant = build_plant(sc);
  if (sc.sim.allow_unstable) return;
  const HypothesisReport report = check_hypotheses(plant, sc.controller.L_h);
  if (const auto* h4 = report.find("H4"); h4 && h4->status == HypothesisCheck::Status::kFail) {
    throw ConfigError("plant.map", "H4 (unique maximum) fails: " + h4->detail);
  }
}

CascadePlant build_plant(const Scenario& sc) {
  LtiSubsystem lti(sc.plant.A, sc.plant.B, sc.plant.C, sc.plant.time_scale,
                   sc.sim.allow_unstable);
  return CascadePlant(std::move(lti), sc.plant.map.build());
}

json to_json(const Scenario& sc) {
  json doc;
  doc["name"] = sc.name;
  doc["description"] = sc.description;
  doc["plant"] = {{"A", matrix_to_json(sc.plant.A)},
                  {"B", matrix_to_json(sc.plant.B)},
                  {"C", matrix_to_json(sc.plant.C)},
                  {"time_scale", sc.plant.time_scale},
                  {"map", map_to_json(sc.plant.map)}};
  const auto& cp = sc.controller;
  doc["controller"] = {{"p", cp.p},
                       {"p0", cp.p0},
                       {"y_sat", number_to_json(cp.y_sat)},
                       {"lambda", cp.lambda},
                       {"epsilon_sw", cp.epsilon_sw},
                       {"gamma", cp.gamma},
                       {"L_h", cp.L_h},
                       {"eta", cp.eta},
                       {"T_s", cp.T_s},
                       {"ts_scale", cp.ts_scale},
                       {"n_dirs", cp.n_dirs},
                       {"scaling_mode", to_string(cp.scaling_mode)}};
  const auto& sp = sc.sim;
  doc["sim"] = {{"dt", sp.dt},
                {"horizon", sp.horizon},
                {"x0", vector_to_json(sp.x0)},
                {"v0", sp.v0.size() ? vector_to_json(sp.v0) : json(nullptr)},
                {"quasi_steady", sp.quasi_steady},
                {"log_stride", sp.log_stride},
                {"dt_guard", sp.dt_guard}};
  doc["analysis"] = {{"delta", sc.analysis.delta ? json(*sc.analysis.delta) : json(nullptr)},
                     {"trailing_fraction", sc.analysis.trailing_fraction},
                     {"c_bound", sc.analysis.c_bound}};
  return doc;
}

Scenario load_scenario(const std::filesystem::path& path, const LoadOptions& options) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open scenario file: " + path.string());
  json doc;
  try {
    doc = json::parse(in, /*cb=*/nullptr, /*allow_exceptions=*/true, /*ignore_comments=*/true);
  } catch (const json::parse_error& e) {
    throw ConfigError("", "malformed scenario file " + path.string() + ": " + e.what());
  }
  return scenario_from_json(std::move(doc), options);
}

void save_scenario(const Scenario& sc, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write scenario file: " + path.string());
  out << to_json(sc).dump(2) << "\n";
}

}  // namespace esc
