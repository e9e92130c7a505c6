#include "qcert/config.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "json.hpp"

#include "qcert/errors.hpp"
#include "qcert_josephson_config.hpp"

namespace qcert {

using nlohmann::ordered_json;

SearchConfig Tau1Settings::search() const {
  SearchConfig s;
  s.grid_min = grid_min;
  s.grid_max = grid_max;
  s.grid_points = grid_points;
  s.refine_iters = refine_iters;
  return s;
}

CertifyOptions AnalysisConfig::certify_options() const {
  CertifyOptions o;
  o.kappa_mode = kappa_mode;
  o.eps = solver.eps_margin;
  o.solver.tol = solver.tol;
  o.solver.max_iter = solver.max_iter;
  return o;
}

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw ConfigError(path.empty() ? what : path + ": " + what);
}

std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

/// A JSON object together with its location in the document. Every key must
/// be consumed or the object is rejected in finish().
class Node {
 public:
  Node(const ordered_json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) fail(path_, "expected an object");
  }

  bool has(const std::string& key) const { return j_.contains(key); }

  const ordered_json& get(const std::string& key) {
    if (!j_.contains(key)) fail(join(path_, key), "missing required key");
    seen_.insert(key);
    return j_.at(key);
  }

  const ordered_json* find(const std::string& key) {
    if (!j_.contains(key)) return nullptr;
    seen_.insert(key);
    return &j_.at(key);
  }

  std::string at(const std::string& key) const { return join(path_, key); }
  const std::string& path() const { return path_; }

  void finish() const {
    for (const auto& item : j_.items()) {
      if (!seen_.count(item.key())) fail(join(path_, item.key()), "unknown key");
    }
  }

 private:
  const ordered_json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

double as_number(const ordered_json& j, const std::string& path) {
  if (!j.is_number()) fail(path, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) fail(path, "expected a finite number");
  return v;
}

int as_int(const ordered_json& j, const std::string& path) {
  if (!j.is_number_integer()) fail(path, "expected an integer");
  const auto v = j.get<long long>();
  if (v < -2147483647LL || v > 2147483647LL) fail(path, "integer out of range");
  return static_cast<int>(v);
}

std::string as_string(const ordered_json& j, const std::string& path) {
  if (!j.is_string()) fail(path, "expected a string");
  return j.get<std::string>();
}

Complex as_complex(const ordered_json& j, const std::string& path) {
  if (j.is_number()) return {as_number(j, path), 0.0};
  if (!j.is_object()) fail(path, "expected a number or {re, im}");
  Node n(j, path);
  const double re = as_number(n.get("re"), n.at("re"));
  const double im = as_number(n.get("im"), n.at("im"));
  n.finish();
  return {re, im};
}

ComplexMatrix as_matrix(const ordered_json& j, const std::string& path) {
  if (!j.is_array() || j.empty()) fail(path, "expected a non-empty array of rows");
  const auto rows = static_cast<Eigen::Index>(j.size());
  Eigen::Index cols = -1;
  ComplexMatrix out;
  for (Eigen::Index r = 0; r < rows; ++r) {
    const auto& row = j[static_cast<std::size_t>(r)];
    const std::string rp = path + "[" + std::to_string(r) + "]";
    if (!row.is_array() || row.empty()) fail(rp, "expected a non-empty row array");
    if (cols < 0) {
      cols = static_cast<Eigen::Index>(row.size());
      out.resize(rows, cols);
    } else if (static_cast<Eigen::Index>(row.size()) != cols) {
      fail(rp, "ragged matrix: rows have different lengths");
    }
    for (Eigen::Index c = 0; c < cols; ++c) {
      out(r, c) = as_complex(row[static_cast<std::size_t>(c)], rp + "[" + std::to_string(c) + "]");
    }
  }
  return out;
}

std::vector<double> as_number_list(const ordered_json& j, const std::string& path) {
  if (!j.is_array()) fail(path, "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    out.push_back(as_number(j[i], path + "[" + std::to_string(i) + "]"));
  }
  return out;
}

template <class F>
auto rethrow_as_config(const std::string& path, F&& f) {
  try {
    return f();
  } catch (const ValidationError& e) {
    fail(path, e.what());
  }
}

void read_plant(Node n, AnalysisConfig& cfg, const LoadOptions& opts) {
  RawPlant raw;
  if (const auto* v = n.find("n_modes")) raw.n_modes = as_int(*v, n.at("n_modes"));
  if (const auto* v = n.find("m_channels")) raw.m_channels = as_int(*v, n.at("m_channels"));
  if (const auto* v = n.find("M1")) raw.M1 = as_matrix(*v, n.at("M1"));
  if (const auto* v = n.find("M2")) raw.M2 = as_matrix(*v, n.at("M2"));
  if (const auto* v = n.find("M")) raw.M = as_matrix(*v, n.at("M"));
  raw.N1 = as_matrix(n.get("N1"), n.at("N1"));
  raw.N2 = as_matrix(n.get("N2"), n.at("N2"));
  raw.E1 = as_matrix(n.get("E1"), n.at("E1"));
  raw.E2 = as_matrix(n.get("E2"), n.at("E2"));
  n.finish();
  PlantValidationOptions v;
  v.symmetrize = opts.symmetrize;
  cfg.plant = rethrow_as_config(n.path(), [&] { return validate_plant(raw, v); });
  cfg.plant_as_blocks = !raw.M.has_value();
}

void read_sector(Node n, SectorConstants& s) {
  auto num = [&n](const char* key, double& dst) {
    if (const auto* v = n.find(key)) dst = as_number(*v, n.at(key));
  };
  num("gamma0", s.gamma0);
  num("gamma1", s.gamma1);
  num("gamma2", s.gamma2);
  num("delta0", s.delta0);
  num("delta1", s.delta1);
  num("delta2", s.delta2);
  num("delta3", s.delta3);
  n.finish();
  rethrow_as_config(n.path(), [&] {
    s.validate();
    return 0;
  });
}

CostSpec read_cost(const ordered_json& j, const std::string& path) {
  Node n(j, path);
  if (const auto* kind = n.find("kind")) {
    const std::string k = as_string(*kind, n.at("kind"));
    n.finish();
    if (k != "josephson") fail(n.at("kind"), "unknown cost kind \"" + k + "\"");
    return CostSpec::josephson();
  }
  const double c_w = as_number(n.get("c_w"), n.at("c_w"));
  const std::string g = as_string(n.get("g_w"), n.at("g_w"));
  std::vector<double> coeffs;
  CostSpec::GwKind kind = CostSpec::GwKind::Zero;
  if (g == "neg_sin2") {
    kind = CostSpec::GwKind::NegSin2;
  } else if (g == "zero") {
    kind = CostSpec::GwKind::Zero;
  } else if (g == "polynomial") {
    kind = CostSpec::GwKind::Polynomial;
    coeffs = as_number_list(n.get("coeffs"), n.at("coeffs"));
  } else {
    fail(n.at("g_w"), "unknown g_w tag \"" + g + "\"");
  }
  n.finish();
  return rethrow_as_config(path, [&] { return CostSpec::make(c_w, kind, coeffs); });
}

NonlinearitySpec read_nonlinearity(const ordered_json& j, const std::string& path) {
  if (j.is_string()) return NonlinearitySpec::from_tag(j.get<std::string>());
  Node n(j, path);
  const std::string kind = as_string(n.get("kind"), n.at("kind"));
  if (kind == "polynomial_q") {
    auto coeffs = as_number_list(n.get("coeffs"), n.at("coeffs"));
    n.finish();
    return NonlinearitySpec::polynomial_q(std::move(coeffs));
  }
  n.finish();
  return NonlinearitySpec::from_tag(kind);
}

void read_tau1(const ordered_json& j, const std::string& path, Tau1Settings& t) {
  Node n(j, path);
  const auto* fixed = n.find("fixed");
  const auto* search = n.find("search");
  n.finish();
  if (fixed && search) fail(path, "give either fixed or search, not both");
  if (fixed) {
    const double v = as_number(*fixed, n.at("fixed"));
    if (!(v > 0.0)) fail(n.at("fixed"), "tau1 must be positive");
    t.fixed = v;
  }
  if (search) {
    Node s(*search, n.at("search"));
    if (const auto* v = s.find("grid_min")) t.grid_min = as_number(*v, s.at("grid_min"));
    if (const auto* v = s.find("grid_max")) t.grid_max = as_number(*v, s.at("grid_max"));
    if (const auto* v = s.find("grid_points")) t.grid_points = as_int(*v, s.at("grid_points"));
    if (const auto* v = s.find("refine_iters")) t.refine_iters = as_int(*v, s.at("refine_iters"));
    s.finish();
    rethrow_as_config(s.path(), [&] {
      t.search().validate();
      return 0;
    });
  }
}

void read_solver(Node n, SolverSettings& s) {
  if (const auto* v = n.find("eps_margin")) s.eps_margin = as_number(*v, n.at("eps_margin"));
  if (const auto* v = n.find("tol")) s.tol = as_number(*v, n.at("tol"));
  if (const auto* v = n.find("max_iter")) s.max_iter = as_int(*v, n.at("max_iter"));
  n.finish();
  if (!(s.eps_margin > 0.0)) fail(n.at("eps_margin"), "eps_margin must be positive");
  if (!(s.tol > 0.0)) fail(n.at("tol"), "tol must be positive");
  if (s.max_iter < 1) fail(n.at("max_iter"), "max_iter must be >= 1");
}

void read_simulate(Node n, SimulationOptions& s) {
  if (const auto* v = n.find("cutoff")) s.cutoff = as_int(*v, n.at("cutoff"));
  if (const auto* v = n.find("interior_cutoff")) {
    s.interior_cutoff = as_int(*v, n.at("interior_cutoff"));
  }
  if (const auto* v = n.find("t_final")) s.t_final = as_number(*v, n.at("t_final"));
  if (const auto* v = n.find("dt")) s.dt = as_number(*v, n.at("dt"));
  if (const auto* v = n.find("max_dim")) s.max_dim = as_int(*v, n.at("max_dim"));
  if (const auto* v = n.find("ordering")) {
    const std::string o = as_string(*v, n.at("ordering"));
    s.ordering = rethrow_as_config(n.at("ordering"), [&] { return ordering_from_string(o); });
  }
  if (const auto* v = n.find("initial_state")) {
    const std::string p = n.at("initial_state");
    if (v->is_string()) {
      if (v->get<std::string>() != "vacuum") fail(p, "expected \"vacuum\" or {\"fock\": [...]}");
      s.initial.occupations.clear();
    } else {
      Node st(*v, p);
      const auto& occ = st.get("fock");
      st.finish();
      if (!occ.is_array()) fail(st.at("fock"), "expected an array of occupation numbers");
      s.initial.occupations.clear();
      for (std::size_t i = 0; i < occ.size(); ++i) {
        s.initial.occupations.push_back(as_int(occ[i], st.at("fock") + "[" + std::to_string(i) + "]"));
      }
    }
  }
  n.finish();
  rethrow_as_config(n.path(), [&] {
    s.validate();
    return 0;
  });
}

void read_grid(Node n, SectorGrid& g) {
  if (const auto* v = n.find("radius")) g.radius = as_number(*v, n.at("radius"));
  if (const auto* v = n.find("n_radial")) g.n_radial = as_int(*v, n.at("n_radial"));
  if (const auto* v = n.find("n_angular")) g.n_angular = as_int(*v, n.at("n_angular"));
  n.finish();
  rethrow_as_config(n.path(), [&] {
    g.validate();
    return 0;
  });
}

std::string position_text(std::string_view text, std::size_t byte) {
  std::size_t line = 1;
  std::size_t col = 1;
  for (std::size_t i = 0; i < std::min(byte, text.size()); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  // nlohmann reports the position one past the offending character.
  if (col > 1) --col;
  std::ostringstream os;
  os << "line " << line << ", column " << col;
  return os.str();
}

ordered_json complex_json(Complex z) { return ordered_json{{"re", z.real()}, {"im", z.imag()}}; }

ordered_json matrix_json(const ComplexMatrix& A) {
  ordered_json rows = ordered_json::array();
  for (Eigen::Index r = 0; r < A.rows(); ++r) {
    ordered_json row = ordered_json::array();
    for (Eigen::Index c = 0; c < A.cols(); ++c) row.push_back(complex_json(A(r, c)));
    rows.push_back(std::move(row));
  }
  return rows;
}

ordered_json cost_json(const CostSpec& c) {
  if (c.is_josephson()) return ordered_json{{"kind", "josephson"}};
  ordered_json j{{"c_w", c.c_w()}, {"g_w", std::string(to_string(c.g_kind()))}};
  if (c.g_kind() == CostSpec::GwKind::Polynomial) j["coeffs"] = c.g_coeffs();
  return j;
}

ordered_json nonlinearity_json(const NonlinearitySpec& f) {
  if (f.kind() == NonlinearitySpec::Kind::Custom) {
    throw ConfigError("nonlinearity: custom callables cannot be serialised");
  }
  ordered_json j{{"kind", f.tag()}};
  if (f.kind() == NonlinearitySpec::Kind::PolynomialQ) j["coeffs"] = f.coeffs();
  return j;
}

}  // namespace

AnalysisConfig load_config(std::string_view text, const LoadOptions& options) {
  ordered_json doc;
  try {
    doc = ordered_json::parse(text.begin(), text.end());
  } catch (const ordered_json::parse_error& e) {
    std::string msg = e.what();
    const auto colon = msg.find("syntax error");
    if (colon != std::string::npos) msg = msg.substr(colon);
    throw ConfigError("parse error at " + position_text(text, e.byte) + ": " + msg);
  }

  AnalysisConfig cfg;
  Node root(doc, "");
  read_plant(Node(root.get("plant"), "plant"), cfg, options);
  if (const auto* v = root.find("sector")) read_sector(Node(*v, "sector"), cfg.sector);
  if (const auto* v = root.find("cost")) cfg.cost = read_cost(*v, "cost");
  if (const auto* v = root.find("nonlinearity")) {
    try {
      cfg.nonlinearity = read_nonlinearity(*v, "nonlinearity");
    } catch (const ConfigError& e) {
      const std::string what = e.what();
      if (what.rfind("nonlinearity", 0) == 0) throw;
      fail("nonlinearity", what);
    }
  }
  if (const auto* v = root.find("tau1")) read_tau1(*v, "tau1", cfg.tau1);
  if (const auto* v = root.find("solver")) read_solver(Node(*v, "solver"), cfg.solver);
  if (const auto* v = root.find("kappa_mode")) {
    const std::string m = as_string(*v, "kappa_mode");
    cfg.kappa_mode = rethrow_as_config("kappa_mode", [&] { return kappa_mode_from_string(m); });
  }
  if (const auto* v = root.find("simulate")) read_simulate(Node(*v, "simulate"), cfg.simulate);
  if (const auto* v = root.find("sector_grid")) read_grid(Node(*v, "sector_grid"), cfg.sector_grid);
  root.finish();
  return cfg;
}

std::string serialize_config(const AnalysisConfig& c) {
  ordered_json plant;
  plant["n_modes"] = c.plant.n_modes();
  plant["m_channels"] = c.plant.m_channels();
  if (c.plant_as_blocks && c.plant.block_structured()) {
    plant["M1"] = matrix_json(c.plant.M1());
    plant["M2"] = matrix_json(c.plant.M2());
  } else {
    plant["M"] = matrix_json(c.plant.M());
  }
  plant["N1"] = matrix_json(c.plant.N1());
  plant["N2"] = matrix_json(c.plant.N2());
  plant["E1"] = matrix_json(c.plant.E1());
  plant["E2"] = matrix_json(c.plant.E2());

  const SectorConstants& s = c.sector;
  ordered_json sector{{"gamma0", s.gamma0}, {"gamma1", s.gamma1}, {"gamma2", s.gamma2},
                      {"delta0", s.delta0}, {"delta1", s.delta1}, {"delta2", s.delta2},
                      {"delta3", s.delta3}};

  ordered_json tau1;
  if (c.tau1.fixed) tau1["fixed"] = *c.tau1.fixed;
  tau1["search"] = {{"grid_min", c.tau1.grid_min},
                    {"grid_max", c.tau1.grid_max},
                    {"grid_points", c.tau1.grid_points},
                    {"refine_iters", c.tau1.refine_iters}};
  if (c.tau1.fixed) tau1.erase("search");

  ordered_json sim{{"cutoff", c.simulate.cutoff},
                   {"interior_cutoff", c.simulate.interior_cutoff},
                   {"t_final", c.simulate.t_final},
                   {"dt", c.simulate.dt},
                   {"max_dim", c.simulate.max_dim},
                   {"ordering", std::string(to_string(c.simulate.ordering))}};
  if (c.simulate.initial.occupations.empty()) {
    sim["initial_state"] = "vacuum";
  } else {
    sim["initial_state"] = {{"fock", c.simulate.initial.occupations}};
  }

  ordered_json doc;
  doc["plant"] = std::move(plant);
  doc["sector"] = std::move(sector);
  doc["cost"] = cost_json(c.cost);
  doc["nonlinearity"] = nonlinearity_json(c.nonlinearity);
  doc["tau1"] = std::move(tau1);
  doc["solver"] = {{"eps_margin", c.solver.eps_margin},
                   {"tol", c.solver.tol},
                   {"max_iter", c.solver.max_iter}};
  doc["kappa_mode"] = std::string(to_string(c.kappa_mode));
  doc["simulate"] = std::move(sim);
  doc["sector_grid"] = {{"radius", c.sector_grid.radius},
                        {"n_radial", c.sector_grid.n_radial},
                        {"n_angular", c.sector_grid.n_angular}};
  return doc.dump(2) + "\n";
}

std::string_view josephson_config_text() { return kJosephsonConfigText; }

AnalysisConfig josephson_config() { return load_config(josephson_config_text()); }

}  // namespace qcert
