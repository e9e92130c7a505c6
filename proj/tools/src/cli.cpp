#include "qcert/cli.hpp"

#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <openssl/evp.h>

#include "CLI11.hpp"
#include "json.hpp"
#include "qcert/acceptance.hpp"
#include "qcert/analysis.hpp"
#include "qcert/config.hpp"
#include "qcert/errors.hpp"
#include "qcert/fock.hpp"
#include "qcert/sector.hpp"

#ifndef QCERT_VERSION
#define QCERT_VERSION "0.0.0"
#endif

namespace qcert::cli {

std::string sha256_hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("SHA-256 digest failed");
  }
  std::ostringstream os;
  for (unsigned int i = 0; i < len; ++i) {
    os << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[i]);
  }
  return os.str();
}

namespace {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

constexpr double kSectorTolerance = 1e-12;
constexpr const char* kComparisonNote =
    "The reported bound 6.0965 is about half of the bound evaluated as written at the reported P "
    "(trace term 16 (P11 + P22) = 12.192 with N = 4I). 6.0965 is close to 8 (P11 + P22), i.e. an "
    "effective coupling coefficient of 8 instead of 16: a factor of about 2. The bound in this "
    "document is computed as written; no alternative convention is applied.";

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

json complex_json(Complex z) { return json{{"re", z.real()}, {"im", z.imag()}}; }

json matrix_json(const ComplexMatrix& A) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < A.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < A.cols(); ++c) row.push_back(complex_json(A(r, c)));
    rows.push_back(std::move(row));
  }
  return rows;
}

json plant_echo(const PlantModel& p) {
  return json{{"n_modes", p.n_modes()},       {"m_channels", p.m_channels()},
              {"block_structured", p.block_structured()},
              {"M", matrix_json(p.M())},      {"N1", matrix_json(p.N1())},
              {"N2", matrix_json(p.N2())},    {"E1", matrix_json(p.E1())},
              {"E2", matrix_json(p.E2())}};
}

json sector_echo(const SectorConstants& s) {
  return json{{"gamma0", s.gamma0}, {"gamma1", s.gamma1}, {"gamma2", s.gamma2},
              {"delta0", s.delta0}, {"delta1", s.delta1}, {"delta2", s.delta2},
              {"delta3", s.delta3}};
}

json sector_report_json(const SectorReport& rep, double tol) {
  json conds = json::array();
  for (const auto* c : rep.conditions()) {
    conds.push_back(json{{"name", c->name},
                         {"max_violation", c->max_violation},
                         {"witness", complex_json(c->witness)},
                         {"samples", c->samples},
                         {"passed", c->passed(tol)}});
  }
  return json{{"kind", SectorReport::kKind},
              {"ordering_note", SectorReport::kOrderingNote},
              {"tolerance", tol},
              {"passed", rep.passed(tol)},
              {"conditions", std::move(conds)}};
}

json solver_json(const SolverDiagnostics& d) {
  return json{{"status", std::string(to_string(d.status))},
              {"iterations", d.iterations},
              {"duality_gap", d.duality_gap},
              {"dual_bound", d.dual_bound},
              {"message", d.message}};
}

json manifest_json(const std::string& command, const std::string& config_path,
                   const std::string& config_hash, const std::string& started,
                   const std::vector<std::string>& outputs) {
  return json{{"command", command},
              {"config_path", config_path},
              {"config_sha256", config_hash},
              {"tool_version", QCERT_VERSION},
              {"started_at", started},
              {"finished_at", utc_now()},
              {"outputs", outputs}};
}

json paper_comparison_json(const AnalysisConfig& cfg) {
  json computed = nullptr;
  if (cfg.plant.n_modes() == 2) computed = bound_from(reported_P(), kReportedTau1, cfg.plant, cfg.sector);
  return json{{"reported", kReportedBound},
              {"reported_tau1", kReportedTau1},
              {"computed_eq14_at_paper_P", computed},
              {"note", kComparisonNote}};
}

struct LoadedConfig {
  std::string path;
  std::string text;
  std::string hash;
  AnalysisConfig config;
};

LoadedConfig load(const std::string& path, bool symmetrize) {
  LoadedConfig lc;
  lc.path = path;
  lc.text = read_file(path);
  lc.hash = sha256_hex(lc.text);
  LoadOptions opts;
  opts.symmetrize = symmetrize;
  lc.config = load_config(lc.text, opts);
  return lc;
}

void print_sector_summary(std::ostream& os, const SectorReport& rep, double tol) {
  os << "sector check (" << SectorReport::kKind << ")\n";
  for (const auto* c : rep.conditions()) {
    os << "  " << std::left << std::setw(12) << c->name << " max violation " << std::setprecision(6)
       << c->max_violation << " at z = (" << c->witness.real() << ", " << c->witness.imag() << ")  "
       << (c->passed(tol) ? "ok" : "VIOLATED") << "\n";
  }
  os << std::right;
}

// ---- analyze -------------------------------------------------------------

struct AnalyzeArgs {
  std::string config;
  std::string kappa_mode;
  std::optional<double> tau1;
  bool strict_sector = false;
  bool symmetrize = false;
  std::string out_dir = ".";
};

int cmd_analyze(const AnalyzeArgs& a, std::ostream& out, std::ostream& err) {
  const std::string started = utc_now();
  LoadedConfig lc = load(a.config, a.symmetrize);
  AnalysisConfig& cfg = lc.config;
  if (!a.kappa_mode.empty()) cfg.kappa_mode = kappa_mode_from_string(a.kappa_mode);
  if (a.tau1) {
    if (!(*a.tau1 > 0.0)) throw ValidationError("tau1 must be positive");
    cfg.tau1.fixed = *a.tau1;
  }

  const SectorReport sector = verify_sector(cfg.cost, cfg.nonlinearity, cfg.sector, cfg.sector_grid);
  if (!sector.passed(kSectorTolerance)) {
    print_sector_summary(err, sector, kSectorTolerance);
    if (a.strict_sector) {
      err << "error: sector conditions violated (--strict-sector)\n";
      return kSectorViolation;
    }
    err << "warning: sector conditions violated; the bound below assumes they hold\n";
  }

  const CertifyOptions opts = cfg.certify_options();
  Certificate cert;
  std::vector<TraceEntry> trace;
  if (cfg.tau1.fixed) {
    const CertifyOutcome outcome = certify_fixed_tau(*cfg.tau1.fixed, cfg.plant, cfg.sector, opts);
    if (const auto* inf = std::get_if<Infeasible>(&outcome)) {
      err << "infeasible at tau1 = " << inf->tau1 << ": " << inf->solver.message << "\n";
      return kInfeasible;
    }
    cert = std::get<Certificate>(outcome);
    trace.push_back({cert.tau1, cert.bound, false});
  } else {
    try {
      SearchResult s = minimize_bound(cfg.plant, cfg.sector, cfg.tau1.search(), opts);
      cert = std::move(s.best);
      trace = std::move(s.trace);
    } catch (const AllInfeasible&) {
      err << "no feasible τ₁ on grid\n";
      return kInfeasible;
    }
  }

  json tjson = json::array();
  for (const auto& e : trace) {
    tjson.push_back(json::array({e.tau1, e.bound ? json(*e.bound) : json("infeasible")}));
  }
  const fs::path cert_path = fs::path(a.out_dir) / "certificate.json";
  json doc;
  doc["manifest"] = nullptr;
  doc["status"] = "certified";
  doc["plant_echo"] = plant_echo(cfg.plant);
  doc["sector_echo"] = sector_echo(cfg.sector);
  doc["kappa_mode"] = std::string(to_string(cert.kappa_mode));
  doc["tau1"] = cert.tau1;
  doc["kappa"] = cert.kappa;
  doc["zeta"] = cert.zeta;
  doc["mu"] = complex_json(cert.mu);
  doc["trace_term"] = cert.trace_term;
  doc["bound"] = cert.bound;
  doc["feasibility_margin"] = cert.feasibility_margin;
  doc["P"] = matrix_json(cert.P);
  doc["tau1_trace"] = std::move(tjson);
  doc["sector_report"] = sector_report_json(sector, kSectorTolerance);
  doc["solver"] = solver_json(cert.solver);
  doc["paper_comparison"] = paper_comparison_json(cfg);
  doc["manifest"] = manifest_json("analyze", lc.path, lc.hash, started, {cert_path.string()});
  write_file(cert_path, doc.dump(2) + "\n");

  out << std::setprecision(10);
  out << "certified: bound " << cert.bound << " at tau1 = " << cert.tau1 << " ("
      << to_string(cert.kappa_mode) << " kappa = " << cert.kappa << ")\n"
      << "  trace term " << cert.trace_term << ", zeta " << cert.zeta << ", |mu| " << std::abs(cert.mu)
      << "\n  feasibility margin " << cert.feasibility_margin << "\n"
      << "  certificate written to " << cert_path.string() << "\n";
  return kSuccess;
}

// ---- verify-sector -------------------------------------------------------

struct VerifyArgs {
  std::string config;
  std::string csv;
  bool json_out = false;
  double tol = kSectorTolerance;
};

int cmd_verify_sector(const VerifyArgs& a, std::ostream& out, std::ostream& err) {
  const LoadedConfig lc = load(a.config, false);
  const AnalysisConfig& cfg = lc.config;
  const SectorReport rep = verify_sector(cfg.cost, cfg.nonlinearity, cfg.sector, cfg.sector_grid);
  if (!a.csv.empty()) {
    std::ostringstream os;
    write_sector_csv(os, [&](Complex z) { return cfg.cost.scalar(z); }, cfg.nonlinearity.f_z_fn(),
                     cfg.nonlinearity.f_zz_fn(), cfg.sector, cfg.sector_grid);
    write_file(a.csv, os.str());
  }
  if (a.json_out) {
    json doc = sector_report_json(rep, a.tol);
    doc["config_sha256"] = lc.hash;
    out << doc.dump(2) << "\n";
  } else {
    print_sector_summary(out, rep, a.tol);
    if (rep.passed(a.tol)) out << "pass\n";
  }
  if (!rep.passed(a.tol)) {
    for (const auto* c : rep.conditions()) {
      if (!c->passed(a.tol)) {
        err << std::setprecision(6) << "violation: " << c->name << " exceeds by " << c->max_violation
            << " at witness z = (" << c->witness.real() << ", " << c->witness.imag() << ")\n";
      }
    }
    return kSectorViolation;
  }
  return kSuccess;
}

// ---- simulate ------------------------------------------------------------

struct SimulateArgs {
  std::string config;
  std::string against;
  bool strict_truncation = false;
  std::string out_dir = ".";
  std::optional<int> cutoff;
  std::optional<double> t_final;
  std::optional<double> dt;
};

int cmd_simulate(const SimulateArgs& a, std::ostream& out, std::ostream& err) {
  const std::string started = utc_now();
  LoadedConfig lc = load(a.config, false);
  SimulationOptions so = lc.config.simulate;
  if (a.cutoff) {
    so.cutoff = *a.cutoff;
    so.interior_cutoff = std::max(0, std::min(so.interior_cutoff, so.cutoff - 2));
  }
  if (a.t_final) so.t_final = *a.t_final;
  if (a.dt) so.dt = *a.dt;

  std::optional<double> bound;
  if (!a.against.empty()) {
    const std::string text = read_file(a.against);
    json cert;
    try {
      cert = json::parse(text);
    } catch (const json::parse_error& e) {
      throw ConfigError("cannot parse certificate " + a.against + ": " + e.what());
    }
    if (!cert.contains("bound") || !cert["bound"].is_number()) {
      throw ConfigError("certificate " + a.against + " has no numeric bound");
    }
    bound = cert["bound"].get<double>();
  }

  const AnalysisConfig& cfg = lc.config;
  const SimulationResult r = simulate(cfg.plant, cfg.nonlinearity, cfg.cost, so);

  const fs::path csv_path = fs::path(a.out_dir) / "simulation.csv";
  const fs::path summary_path = fs::path(a.out_dir) / "simulation_summary.json";
  std::ostringstream csv;
  csv << "t,expW,running_avg,top_level_population\n" << std::setprecision(17);
  for (const auto& row : r.series) {
    csv << row.t << ',' << row.expW << ',' << row.running_avg << ',' << row.top_level_population << '\n';
  }
  write_file(csv_path, csv.str());

  json summary;
  summary["manifest"] = nullptr;
  summary["cutoff"] = so.cutoff;
  summary["t_final"] = so.t_final;
  summary["dt"] = so.dt;
  summary["ordering"] = std::string(to_string(so.ordering));
  summary["steps"] = r.steps;
  summary["final_average"] = r.final_average;
  summary["final_expW"] = r.final_expW;
  summary["max_trace_drift"] = r.max_trace_drift;
  summary["min_eigenvalue"] = r.min_eigenvalue;
  summary["max_top_level_population"] = r.max_top_level_population;
  summary["truncation_warning"] = r.truncation_warning;
  if (bound) {
    summary["comparison"] = json{{"certificate", a.against},
                                 {"bound", *bound},
                                 {"passed", r.final_average <= *bound}};
  }
  summary["manifest"] =
      manifest_json("simulate", lc.path, lc.hash, started, {csv_path.string(), summary_path.string()});
  write_file(summary_path, summary.dump(2) + "\n");

  out << std::setprecision(10) << "running average A(" << so.t_final << ") = " << r.final_average
      << "\n  <W>(t_final) = " << r.final_expW << ", trace drift " << r.max_trace_drift
      << ", min eigenvalue " << r.min_eigenvalue << "\n  top-level population max "
      << r.max_top_level_population << "\n";
  if (bound) {
    const bool ok = r.final_average <= *bound;
    out << "  certified bound " << *bound << ": " << (ok ? "PASS" : "FAIL") << " (A <= bound)\n";
  }
  out << "  series written to " << csv_path.string() << "\n";

  int code = kSuccess;
  if (r.truncation_warning) {
    err << "warning: truncation leak, top-level population " << r.max_top_level_population
        << " exceeds " << kTruncationLeakThreshold << "; increase the cutoff\n";
    if (a.strict_truncation) code = kError;
  }
  if (bound && !(r.final_average <= *bound)) {
    err << "error: running average exceeds the certified bound\n";
    code = kError;
  }
  return code;
}

// ---- plot-w --------------------------------------------------------------

struct PlotArgs {
  std::string config;
  double x_max = 3.0;
  int points = 601;
  std::string out_path;
};

int cmd_plot_w(const PlotArgs& a, std::ostream& out) {
  const LoadedConfig lc = load(a.config, false);
  if (!(a.x_max > 0.0)) throw ValidationError("--x-max must be positive");
  if (a.points < 2) throw ValidationError("--points must be >= 2");
  std::ostringstream csv;
  csv << "x,W\n" << std::setprecision(17);
  for (int i = 0; i < a.points; ++i) {
    const double x = a.x_max * (2 * i - (a.points - 1)) / (a.points - 1);
    csv << x << ',' << lc.config.cost.scalar(Complex(x, 0.0)) << '\n';
  }
  if (a.out_path.empty()) {
    out << csv.str();
  } else {
    write_file(a.out_path, csv.str());
  }
  return kSuccess;
}

// ---- check-paper-example -------------------------------------------------

struct CheckArgs {
  bool json_out = false;
  std::vector<std::string> only;
};

int cmd_check(const CheckArgs& a, std::ostream& out) {
  const AcceptanceInputs inputs;
  const std::vector<CriterionResult> results = run_acceptance(inputs, a.only);
  bool all = true;
  for (const auto& r : results) all = all && r.passed;
  if (a.json_out) {
    json rows = json::array();
    for (const auto& r : results) {
      rows.push_back(json{{"id", r.id},
                          {"title", r.title},
                          {"passed", r.passed},
                          {"requirement", r.requirement},
                          {"measured", r.measured},
                          {"seconds", r.seconds}});
    }
    out << json{{"config_sha256", sha256_hex(josephson_config_text())},
                {"all_passed", all},
                {"criteria", std::move(rows)}}
               .dump(2)
        << "\n";
  } else {
    for (const auto& r : results) {
      out << r.id << "  " << (r.passed ? "PASS" : "FAIL") << "  " << std::fixed << std::setprecision(2)
          << r.seconds << " s  " << r.title << "\n"
          << std::defaultfloat << "      requirement: " << r.requirement << "\n"
          << "      measured:    " << r.measured << "\n";
    }
    out << (all ? "all criteria passed" : "some criteria failed") << "\n";
  }
  return all ? kSuccess : kError;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Robust cost-bound certificates for open quantum systems with sector-bounded perturbations",
               "qcert"};
  app.set_version_flag("--version", QCERT_VERSION);
  app.require_subcommand(1);

  AnalyzeArgs analyze;
  auto* c_an = app.add_subcommand("analyze", "Certify a cost bound and write certificate.json");
  c_an->add_option("config", analyze.config, "Configuration file")->required();
  c_an->add_option("--kappa-mode", analyze.kappa_mode, "literal or derivation_consistent")
      ->check(CLI::IsMember({"literal", "derivation_consistent"}));
  c_an->add_option("--tau1", analyze.tau1, "Certify at this tau1 instead of searching");
  c_an->add_flag("--strict-sector", analyze.strict_sector, "Fail (exit 3) when the sector check fails");
  c_an->add_flag("--symmetrize", analyze.symmetrize, "Average M with its adjoint before validation");
  c_an->add_option("--out-dir", analyze.out_dir, "Output directory");

  VerifyArgs verify;
  auto* c_vs = app.add_subcommand("verify-sector", "Check the scalar sector conditions on a grid");
  c_vs->add_option("config", verify.config, "Configuration file")->required();
  c_vs->add_option("--csv", verify.csv, "Write every grid sample to this CSV file");
  c_vs->add_flag("--json", verify.json_out, "Print the report as JSON");
  c_vs->add_option("--tol", verify.tol, "Violation tolerance");

  SimulateArgs sim;
  auto* c_sim = app.add_subcommand("simulate", "Integrate the master equation and report the running average");
  c_sim->add_option("config", sim.config, "Configuration file")->required();
  c_sim->add_option("--against", sim.against, "Certificate to compare the running average against");
  c_sim->add_flag("--strict-truncation", sim.strict_truncation, "Fail on a truncation-leak warning");
  c_sim->add_option("--out-dir", sim.out_dir, "Output directory");
  c_sim->add_option("--cutoff", sim.cutoff, "Override the Fock cutoff");
  c_sim->add_option("--t-final", sim.t_final, "Override the final time");
  c_sim->add_option("--dt", sim.dt, "Override the time step");

  PlotArgs plot;
  auto* c_plot = app.add_subcommand("plot-w", "Sample the cost W(x, x) along the real axis as CSV");
  c_plot->add_option("config", plot.config, "Configuration file")->required();
  c_plot->add_option("--x-max", plot.x_max, "Half-width of the sampled interval");
  c_plot->add_option("--points", plot.points, "Number of samples");
  c_plot->add_option("--out", plot.out_path, "Write to this file instead of standard output");

  CheckArgs check;
  auto* c_chk = app.add_subcommand("check-paper-example", "Run the acceptance checks on the bundled example");
  c_chk->add_flag("--json", check.json_out, "Print a JSON result document");
  c_chk->add_option("--only", check.only, "Criteria to run (e.g. A1,A3)")->delimiter(',');

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kSuccess : kError;
  }

  try {
    if (*c_an) return cmd_analyze(analyze, out, err);
    if (*c_vs) return cmd_verify_sector(verify, out, err);
    if (*c_sim) return cmd_simulate(sim, out, err);
    if (*c_plot) return cmd_plot_w(plot, out);
    if (*c_chk) return cmd_check(check, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kError;
  }
  return kError;
}

}  // namespace qcert::cli
