// floquet-ap: monodromy spectra, resonance verdicts, and almost periodic
// responses of 1-periodic delay systems. Reads JSON model files, writes
// JSON/CSV artifacts with fixed 17-digit formatting, so identical inputs
// produce byte-identical outputs.
//
// Exit codes: 0 success (check: non_resonant), 1 failed verification or demo
// tolerance, 2 configuration or input problem, 3 numerical failure,
// 10 near_resonant, 11 resonant.

#include <cmath>
#include <complex>
#include <cstdio>
#include <filesystem>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include <floquet_ap/builtin_models.hpp>
#include <floquet_ap/model_io.hpp>

namespace {

using namespace floq;
using io::json;

const double pi = std::numbers::pi;

struct Options {
  std::string model;
  std::string out = "out";
  std::string solution;  // verify input; defaults to <out>/solution.json
  std::string signal;    // decompose input
  std::string filter;    // demo row selector
  NumericsConfig num;
  bool force = false;
  unsigned seed = 1;
  double horizon = 2.0;
};

void emit(const Options& o, const std::string& name, const std::string& text) {
  std::filesystem::create_directories(o.out);
  io::write_text(o.out + "/" + name, text);
}

std::string cstr(complexd z) {
  char b[64];
  std::snprintf(b, sizeof b, "%.10g%+.10gi", z.real(), z.imag());
  return b;
}

// ---------------------------------------------------------------------------

int cmd_spectrum(const Options& o) {
  o.num.validate();
  FDEModel model = io::load_model(o.model);
  MonodromyOperator op = assemble(model, 1.0, o.num);
  UnitCircleReport rep = unit_circle_spectrum(model, op, o.num);
  emit(o, "spectrum.json", io::dump(io::spectrum_to_json(op, rep)));
  std::printf("spectrum: %ld eigenvalues, %zu on the unit circle, %zu spurious -> %s/spectrum.json\n",
              long(op.eigenvalues.size()), rep.set.size(), rep.spurious.size(),
              o.out.c_str());
  return 0;
}

int cmd_check(const Options& o) {
  o.num.validate();
  FDEModel model = io::load_model(o.model);
  ResonanceReport rep = check_resonance(model, o.num);
  emit(o, "check.json", io::dump(io::resonance_to_json(rep)));
  if (std::isfinite(rep.min_separation))
    std::printf("check: %s (min separation %.3e) -> %s/check.json\n",
                classification_name(rep.classification), rep.min_separation,
                o.out.c_str());
  else
    std::printf("check: %s (no unit-circle spectrum) -> %s/check.json\n",
                classification_name(rep.classification), o.out.c_str());
  switch (rep.classification) {
    case ResonanceClass::non_resonant: return 0;
    case ResonanceClass::near_resonant: return 10;
    default: return 11;
  }
}

int cmd_solve(const Options& o) {
  o.num.validate();
  FDEModel model = io::load_model(o.model);
  APSolution sol = solve_ap(model, o.num, o.force);
  // everything is computed before the first byte is written
  const std::string doc = io::dump(io::solution_to_json(sol));
  const std::string csv =
      io::solution_to_csv(sol, o.horizon, o.num.stepper.h_out);
  emit(o, "solution.json", doc);
  emit(o, "trajectory.csv", csv);
  double gap = 0.0;
  for (const auto& c : sol.components())
    gap = std::max(gap, c.fixed_point_gap);
  std::printf("solve: %zu component(s), max fixed-point gap %.3e -> %s/solution.json, %s/trajectory.csv\n",
              sol.components().size(), gap, o.out.c_str(), o.out.c_str());
  return 0;
}

int cmd_verify(const Options& o) {
  o.num.validate();
  FDEModel model = io::load_model(o.model);
  const std::string path =
      o.solution.empty() ? o.out + "/solution.json" : o.solution;
  APSolution sol = io::load_solution(path);
  if (sol.model_tag() != model_fingerprint(model))
    throw config_error("solution in " + path +
                       " was produced for a different model");

  const double res = residual(model, sol, o.horizon, o.num);
  std::vector<double> probes;
  for (double p : {0.0, pi / 2, std::sqrt(3.0)}) {
    bool clash = false;
    for (const auto& term : model.forcing().terms())
      clash = clash || std::abs(term.frequency - p) < 1e-6;
    if (!clash) probes.push_back(p);
  }
  const double cont =
      spectrum_containment_check(sol, probes, o.num.bohr_T, o.num);
  double gap = 0.0;
  for (const auto& c : sol.components())
    gap = std::max(gap, c.fixed_point_gap);
  const double eps = 0.05;
  CertificateResult cert = ap_certificate(model, sol, eps, o.num);

  const double res_tol = 1e-7, cont_tol = 1e-4, witness_tol = 0.1;
  const bool res_ok = res <= res_tol;
  const bool cont_ok = cont <= cont_tol;
  const bool gap_ok = gap <= o.num.solve_tol;
  const bool cert_ok = cert.witness <= witness_tol;
  const bool all = res_ok && cont_ok && gap_ok && cert_ok;

  json doc{{"residual", json{{"value", res}, {"tol", res_tol}, {"pass", res_ok}}},
           {"containment",
            json{{"value", cont}, {"tol", cont_tol}, {"pass", cont_ok}}},
           {"fixed_point_gap",
            json{{"value", gap}, {"tol", o.num.solve_tol}, {"pass", gap_ok}}},
           {"ap_certificate", io::certificate_to_json(cert, eps)},
           {"pass", all}};
  doc["ap_certificate"]["tol"] = witness_tol;
  doc["ap_certificate"]["pass"] = cert_ok;
  emit(o, "verify.json", io::dump(doc));

  auto line = [](const char* name, double v, double tol, bool ok) {
    std::printf("  %-16s %.3e  (tol %.0e)  %s\n", name, v, tol,
                ok ? "ok" : "FAIL");
  };
  std::printf("verify: %s\n", path.c_str());
  line("residual", res, res_tol, res_ok);
  line("containment", cont, cont_tol, cont_ok);
  line("fixed-point gap", gap, o.num.solve_tol, gap_ok);
  line("ap witness", cert.witness, witness_tol, cert_ok);
  std::printf("verdict: %s -> %s/verify.json\n", all ? "pass" : "FAIL",
              o.out.c_str());
  return all ? 0 : 1;
}

int cmd_decompose(const Options& o) {
  o.num.validate();
  FDEModel model = io::load_model(o.model);
  TrigPolynomial u = io::trig_from_json(io::load_json(o.signal));
  ResonanceReport rep = check_resonance(model, o.num);
  auto [pu, qu] =
      decompose_solution(u, rep.forcing_image, rep.sigma_gamma, o.num.guard);
  json doc{{"forcing_part", io::trig_to_json(pu)},
           {"multiplier_part", io::trig_to_json(qu)}};
  emit(o, "decompose.json", io::dump(doc));
  std::printf("decompose: %zu term(s) on the forcing spectrum, %zu on the remaining multipliers -> %s/decompose.json\n",
              pu.terms().size(), qu.terms().size(), o.out.c_str());
  return 0;
}

// ---------------------------------------------------------------------------
// oracle fleet: closed forms recomputed here, independent of the library

struct DemoRow {
  std::string label;
  complexd computed;
  complexd oracle;
  double tol;
  double error() const { return std::abs(computed - oracle); }
  bool pass() const { return error() <= tol; }
};

complexd leading(const Eigen::VectorXcd& mu) {
  complexd best = mu(0);
  for (Eigen::Index i = 1; i < mu.size(); ++i)
    if (std::abs(mu(i)) > std::abs(best)) best = mu(i);
  return best;
}

complexd nearest(const Eigen::VectorXcd& mu, complexd target) {
  complexd best = mu(0);
  for (Eigen::Index i = 1; i < mu.size(); ++i)
    if (std::abs(mu(i) - target) < std::abs(best - target)) best = mu(i);
  return best;
}

complexd pure_delay_root() {  // principal root of lambda = -e^{-lambda}
  complexd lam(-0.3, 1.3);
  for (int i = 0; i < 60; ++i) lam -= (lam + std::exp(-lam)) / (1.0 - std::exp(-lam));
  return lam;
}

int cmd_demo(const Options& o) {
  o.num.validate();
  auto want = [&](const std::string& label) {
    return o.filter.empty() || label.find(o.filter) != std::string::npos;
  };
  std::vector<DemoRow> rows;
  auto mono = [&](const FDEModel& m) {
    return assemble(m, 1.0, o.num).eigenvalues;
  };

  if (std::string l = "(a) x' = -x, leading multiplier"; want(l))
    rows.push_back({l, leading(mono(models::decay())), std::exp(-1.0), 1e-8});
  if (std::string l = "(b) x' = (-1+cos 2pi t)x, leading multiplier"; want(l))
    rows.push_back(
        {l, leading(mono(models::periodic_decay())), std::exp(-1.0), 1e-8});
  if (std::string l = "(c) x' = -x(t-1), dominant multiplier"; want(l)) {
    const complexd target = std::exp(pure_delay_root());
    rows.push_back({l, nearest(mono(models::pure_delay()), target), target, 1e-6});
  }
  if (std::string l = "(d) x' = -(pi/2)x(t-1), multiplier at i"; want(l))
    rows.push_back({l,
                    nearest(mono(models::quarter_turn(0.0, 0.0)), complexd(0, 1)),
                    complexd(0, 1), 1e-6});
  if (std::string l = "(e) x' = -x + e^{it}, amplitude"; want(l)) {
    APSolution sol = solve_ap(models::forced_decay(), o.num);
    rows.push_back({l, sol.amplitude(0)(0), 1.0 / complexd(1, 1), 1e-7});
  }
  if (std::string l = "(f) x' = -0.5x(t-1) + e^{it} + 0.4e^{i sqrt2 t}"; want(l)) {
    APSolution sol = solve_ap(models::two_tone_delay(), o.num);
    const complexd c1 = 1.0 / (complexd(0, 1) + 0.5 * std::exp(complexd(0, -1)));
    const double s2 = std::sqrt(2.0);
    const complexd c2 =
        0.4 / (complexd(0, s2) + 0.5 * std::exp(complexd(0, -s2)));
    // report the worse of the two tones as the row error
    const complexd a1 = sol.amplitude(0)(0), a2 = sol.amplitude(1)(0);
    rows.push_back(std::abs(a1 - c1) >= std::abs(a2 - c2)
                       ? DemoRow{l, a1, c1, 1e-6}
                       : DemoRow{l, a2, c2, 1e-6});
  }

  if (!rows.empty()) {
    std::printf("%-48s %-28s %-28s %-10s %-8s\n", "model", "computed", "oracle",
                "|error|", "tol");
    for (const auto& r : rows)
      std::printf("%-48s %-28s %-28s %-10.2e %-8.0e %s\n", r.label.c_str(),
                  cstr(r.computed).c_str(), cstr(r.oracle).c_str(), r.error(),
                  r.tol, r.pass() ? "ok" : "FAIL");
  }

  // seeded two-leg composition against the direct run, the process axiom on
  // data the flow itself produced
  bool proc_pass = true;
  double proc_gap = 0.0;
  const std::string proc_label = "process composition";
  const bool run_proc = want(proc_label);
  if (run_proc) {
    FDEModel m = models::periodic_decay();
    GridPtr grid = make_segment_grid(o.num.m, m.horizon());
    std::mt19937 rng(o.seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Segment raw = Segment::sample(grid, [&](double) {
      return (Eigen::VectorXcd(1) << complexd(u(rng), u(rng))).finished();
    });
    const double rho = 0.3, s = 1.1, t = 2.4;
    Segment phi = evolution_apply(m, raw, rho - 5.0, rho, o.num.stepper);
    Segment via = evolution_apply(
        m, evolution_apply(m, phi, rho, s, o.num.stepper), s, t, o.num.stepper);
    Segment direct = evolution_apply(m, phi, rho, t, o.num.stepper);
    proc_gap = (via - direct).sup_norm();
    proc_pass = proc_gap <= 1e-8;
    std::printf("%s (seed %u): gap %.2e (tol 1e-08) %s\n", proc_label.c_str(),
                o.seed, proc_gap, proc_pass ? "ok" : "FAIL");
  }

  json jrows = json::array();
  for (const auto& r : rows)
    jrows.push_back(
        json{{"label", r.label},
             {"computed", json::array({r.computed.real(), r.computed.imag()})},
             {"oracle", json::array({r.oracle.real(), r.oracle.imag()})},
             {"error", r.error()},
             {"tol", r.tol},
             {"pass", r.pass()}});
  bool all = proc_pass;
  for (const auto& r : rows) all = all && r.pass();
  json doc{{"seed", o.seed}, {"rows", std::move(jrows)}, {"pass", all}};
  if (run_proc)
    doc["process"] =
        json{{"gap", proc_gap}, {"tol", 1e-8}, {"pass", proc_pass}};
  emit(o, "demo.json", io::dump(doc));

  if (!all) {
    std::printf("demo: tolerances missed on:\n");
    for (const auto& r : rows)
      if (!r.pass()) std::printf("  %s\n", r.label.c_str());
    if (!proc_pass) std::printf("  %s\n", proc_label.c_str());
    return 1;
  }
  std::printf("demo: %zu row(s), all within tolerance -> %s/demo.json\n",
              rows.size(), o.out.c_str());
  return 0;
}

void add_resolution_flags(CLI::App* cmd, Options& o) {
  cmd->add_option("--m", o.num.m, "segment collocation degree");
  cmd->add_option("--substeps", o.num.stepper.substeps, "integration steps per unit time");
  cmd->add_option("--n-gamma", o.num.n_gamma, "tent resolution of the embedding oracle");
  cmd->add_option("--tol-band", o.num.unit_band_tol, "unit-circle membership band");
  cmd->add_option("--tol-res", o.num.resonance_tol, "near-resonance distance");
  cmd->add_option("--out", o.out, "artifact directory (default: out)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "almost periodic solutions of 1-periodic delay differential equations"};
  app.require_subcommand(1);
  Options o;

  CLI::App* spectrum = app.add_subcommand(
      "spectrum", "characteristic multipliers and the unit-circle part");
  spectrum->add_option("--model", o.model, "model JSON file")->required();
  add_resolution_flags(spectrum, o);

  CLI::App* check = app.add_subcommand(
      "check", "classify forcing frequencies against the circle spectrum");
  check->add_option("--model", o.model, "model JSON file")->required();
  add_resolution_flags(check, o);

  CLI::App* solve =
      app.add_subcommand("solve", "construct the almost periodic response");
  solve->add_option("--model", o.model, "model JSON file")->required();
  solve->add_flag("--force", o.force, "proceed on a near_resonant verdict");
  solve->add_option("--horizon", o.horizon, "trajectory CSV length (default 2)");
  add_resolution_flags(solve, o);

  CLI::App* verify = app.add_subcommand(
      "verify", "re-check a stored solution against its model");
  verify->add_option("--model", o.model, "model JSON file")->required();
  verify->add_option("--solution", o.solution,
                     "solution JSON (default: <out>/solution.json)");
  verify->add_option("--horizon", o.horizon, "residual horizon (default 2)");
  add_resolution_flags(verify, o);

  CLI::App* decompose = app.add_subcommand(
      "decompose", "split a signal along forcing and multiplier spectra");
  decompose->add_option("--model", o.model, "model JSON file")->required();
  decompose->add_option("--signal", o.signal, "trig polynomial JSON")->required();
  add_resolution_flags(decompose, o);

  CLI::App* demo = app.add_subcommand(
      "demo", "run the built-in fleet against its closed-form oracles");
  demo->add_option("--filter", o.filter, "only rows whose label contains this");
  demo->add_option("--seed", o.seed, "seed for the randomized fixture");
  add_resolution_flags(demo, o);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;  // --help stays 0; any parse problem is 2
  }

  try {
    if (spectrum->parsed()) return cmd_spectrum(o);
    if (check->parsed()) return cmd_check(o);
    if (solve->parsed()) return cmd_solve(o);
    if (verify->parsed()) return cmd_verify(o);
    if (decompose->parsed()) return cmd_decompose(o);
    return cmd_demo(o);
  } catch (const resonance_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return e.near_only ? 10 : 11;
  } catch (const numerics_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  } catch (const io_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const config_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const classification_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const domain_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  }
}
