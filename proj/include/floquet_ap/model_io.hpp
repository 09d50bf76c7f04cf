#pragma once

// File formats: JSON model/signal/solution documents and CSV trajectory
// export. Every floating-point number is emitted with 17 significant digits
// through one code path, so identical inputs produce byte-identical files.

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include <floquet_ap/monodromy.hpp>
#include <floquet_ap/phasespace.hpp>
#include <floquet_ap/propagator.hpp>
#include <floquet_ap/solver.hpp>

namespace floq::io {

using json = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// canonical emission

inline std::string format_double(double x) {
  if (!std::isfinite(x)) throw io_error("cannot serialize a non-finite number");
  if (x == 0.0) return "0";  // merge the signed zeros
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

namespace detail {

inline bool flat(const json& j) {
  for (const auto& el : j)
    if (el.is_structured()) return false;
  return true;
}

inline void dump_rec(const json& j, std::string& out, int depth) {
  const std::string pad(2 * std::size_t(depth), ' ');
  const std::string pad1(2 * std::size_t(depth + 1), ' ');
  switch (j.type()) {
    case json::value_t::number_float:
      out += format_double(j.get<double>());
      break;
    case json::value_t::array:
      if (j.empty()) {
        out += "[]";
      } else if (flat(j)) {
        out += '[';
        for (std::size_t i = 0; i < j.size(); ++i) {
          if (i) out += ", ";
          dump_rec(j[i], out, depth);
        }
        out += ']';
      } else {
        out += "[\n";
        for (std::size_t i = 0; i < j.size(); ++i) {
          out += pad1;
          dump_rec(j[i], out, depth + 1);
          if (i + 1 < j.size()) out += ',';
          out += '\n';
        }
        out += pad + ']';
      }
      break;
    case json::value_t::object:
      if (j.empty()) {
        out += "{}";
      } else {
        out += "{\n";
        std::size_t i = 0;
        for (auto it = j.begin(); it != j.end(); ++it, ++i) {
          out += pad1 + nlohmann::json(it.key()).dump() + ": ";
          dump_rec(it.value(), out, depth + 1);
          if (i + 1 < j.size()) out += ',';
          out += '\n';
        }
        out += pad + '}';
      }
      break;
    default:
      out += j.dump();  // null, bool, integers, strings
      break;
  }
}

}  // namespace detail

inline std::string dump(const json& j) {
  std::string out;
  detail::dump_rec(j, out, 0);
  out += '\n';
  return out;
}

// ---------------------------------------------------------------------------
// files

inline std::string read_text(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw io_error("cannot open " + path);
  std::string s((std::istreambuf_iterator<char>(f)),
                std::istreambuf_iterator<char>());
  if (f.bad()) throw io_error("read failed on " + path);
  return s;
}

// write-then-rename, so a failed run never leaves a partial artifact behind
inline void write_text(const std::string& path, const std::string& text) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw io_error("cannot open " + tmp + " for writing");
    f << text;
    f.flush();
    if (!f.good()) throw io_error("write failed on " + tmp);
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0)
    throw io_error("cannot move " + tmp + " into place");
}

inline json parse(const std::string& text, const std::string& where) {
  try {
    return json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw io_error(where + ": " + e.what());
  }
}

inline json load_json(const std::string& path) {
  return parse(read_text(path), path);
}

// ---------------------------------------------------------------------------
// field access with named errors

namespace detail {

inline const json& field(const json& j, const char* key) {
  if (!j.is_object()) throw io_error(std::string("expected an object holding '") + key + "'");
  auto it = j.find(key);
  if (it == j.end()) throw io_error(std::string("missing field '") + key + "'");
  return *it;
}

inline double number(const json& j, const char* what) {
  if (!j.is_number()) throw io_error(std::string(what) + " must be a number");
  return j.get<double>();
}

inline int integer(const json& j, const char* what) {
  if (!j.is_number_integer())
    throw io_error(std::string(what) + " must be an integer");
  return j.get<int>();
}

inline const json& array(const json& j, const char* what) {
  if (!j.is_array()) throw io_error(std::string(what) + " must be an array");
  return j;
}

inline std::string text(const json& j, const char* what) {
  if (!j.is_string()) throw io_error(std::string(what) + " must be a string");
  return j.get<std::string>();
}

}  // namespace detail

// ---------------------------------------------------------------------------
// complex containers. Vectors split into re/im lists; matrices flatten to a
// row-major list of [re, im] pairs.

inline json cvec_to_json(const Eigen::VectorXcd& v) {
  json re = json::array(), im = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    re.push_back(v(i).real());
    im.push_back(v(i).imag());
  }
  return json{{"re", std::move(re)}, {"im", std::move(im)}};
}

inline Eigen::VectorXcd cvec_from_json(const json& j, int expected_dim) {
  const json& re = detail::array(detail::field(j, "re"), "re");
  const json& im = detail::array(detail::field(j, "im"), "im");
  if (re.size() != im.size()) throw io_error("re/im lists differ in length");
  if (expected_dim >= 0 && static_cast<int>(re.size()) != expected_dim)
    throw io_error("coefficient vector has the wrong dimension");
  Eigen::VectorXcd v(re.size());
  for (std::size_t i = 0; i < re.size(); ++i)
    v(static_cast<Eigen::Index>(i)) =
        complexd(detail::number(re[i], "re entry"), detail::number(im[i], "im entry"));
  return v;
}

inline json matrix_to_json(const Eigen::MatrixXcd& M) {
  json out = json::array();
  for (Eigen::Index i = 0; i < M.rows(); ++i)
    for (Eigen::Index j = 0; j < M.cols(); ++j)
      out.push_back(json::array({M(i, j).real(), M(i, j).imag()}));
  return out;
}

inline Eigen::MatrixXcd matrix_from_json(const json& j, int rows, int cols) {
  detail::array(j, "matrix");
  if (static_cast<int>(j.size()) != rows * cols)
    throw io_error("matrix entry count does not match its dimensions");
  Eigen::MatrixXcd M(rows, cols);
  for (int k = 0; k < rows * cols; ++k) {
    const json& p = j[std::size_t(k)];
    if (!p.is_array() || p.size() != 2)
      throw io_error("matrix entries must be [re, im] pairs");
    M(k / cols, k % cols) = complexd(detail::number(p[0], "matrix entry"),
                                     detail::number(p[1], "matrix entry"));
  }
  return M;
}

// ---------------------------------------------------------------------------
// trig polynomials: {"dimension": n, "terms": [{"frequency", "re", "im"}]}

inline json trig_to_json(const TrigPolynomial& f) {
  json terms = json::array();
  for (const auto& t : f.terms()) {
    json entry = cvec_to_json(t.coeff);
    json row{{"frequency", t.frequency}};
    row["re"] = std::move(entry["re"]);
    row["im"] = std::move(entry["im"]);
    terms.push_back(std::move(row));
  }
  return json{{"dimension", f.dimension()}, {"terms", std::move(terms)}};
}

inline TrigPolynomial trig_from_json(const json& j) {
  const int dim = detail::integer(detail::field(j, "dimension"), "dimension");
  std::vector<TrigTerm> terms;
  for (const json& t : detail::array(detail::field(j, "terms"), "terms"))
    terms.push_back({detail::number(detail::field(t, "frequency"), "frequency"),
                     cvec_from_json(t, dim)});
  try {
    return TrigPolynomial(dim, std::move(terms));
  } catch (const config_error& e) {
    throw io_error(std::string("invalid trig polynomial: ") + e.what());
  }
}

// ---------------------------------------------------------------------------
// periodic matrices: {"constant": M} or {"fourier_terms": [{"harmonic", "matrix"}]}

inline json time_matrix_to_json(const TimeMatrix& A) {
  if (A.is_constant()) return json{{"constant", matrix_to_json(A(0.0))}};
  if (!A.fourier_terms().empty()) {
    json terms = json::array();
    for (const auto& [k, M] : A.fourier_terms())
      terms.push_back(json{{"harmonic", k}, {"matrix", matrix_to_json(M)}});
    return json{{"fourier_terms", std::move(terms)}};
  }
  throw io_error("callable matrix coefficients have no file form");
}

inline TimeMatrix time_matrix_from_json(const json& j, int dim) {
  if (j.contains("constant"))
    return TimeMatrix::constant(matrix_from_json(j["constant"], dim, dim));
  if (j.contains("fourier_terms")) {
    std::vector<std::pair<int, Eigen::MatrixXcd>> terms;
    for (const json& t : detail::array(j["fourier_terms"], "fourier_terms"))
      terms.emplace_back(
          detail::integer(detail::field(t, "harmonic"), "harmonic"),
          matrix_from_json(detail::field(t, "matrix"), dim, dim));
    return TimeMatrix::fourier(std::move(terms));
  }
  throw io_error("matrix must provide 'constant' or 'fourier_terms'");
}

// ---------------------------------------------------------------------------
// model documents. An optional "period" field (default 1) feeds the model's
// own renormalization; the file always reads back as a 1-periodic system.

inline json model_to_json(const FDEModel& m) {
  json doc;
  doc["dimension"] = m.dimension();
  doc["horizon_r"] = m.horizon();
  doc["A"] = time_matrix_to_json(m.A());
  json delays = json::array();
  for (const auto& d : m.delays().discrete)
    delays.push_back(json{{"tau", d.tau}, {"B", time_matrix_to_json(d.B)}});
  doc["delays"] = std::move(delays);
  if (m.delays().kernel) {
    // only kernels that are constant in both arguments have a file form
    const Eigen::MatrixXcd K0 = m.delays().kernel->K(0.0, -0.5 * m.horizon());
    for (double t : {0.0, 0.4})
      for (double th : {-m.horizon(), -0.25 * m.horizon(), 0.0})
        if ((m.delays().kernel->K(t, th) - K0).norm() >
            1e-12 * std::max(1.0, K0.norm()))
          throw io_error("only constant kernels have a file form");
    doc["kernel"] = json{{"constant", matrix_to_json(K0)}};
  }
  doc["forcing"] = trig_to_json(m.forcing());
  return doc;
}

inline FDEModel model_from_json(const json& j) {
  const int dim = detail::integer(detail::field(j, "dimension"), "dimension");
  const double r = detail::number(detail::field(j, "horizon_r"), "horizon_r");
  double period = 1.0;
  if (j.contains("period")) period = detail::number(j["period"], "period");
  TimeMatrix A = time_matrix_from_json(detail::field(j, "A"), dim);
  DelayStructure delays;
  for (const json& d : detail::array(detail::field(j, "delays"), "delays"))
    delays.discrete.push_back(
        {detail::number(detail::field(d, "tau"), "tau"),
         time_matrix_from_json(detail::field(d, "B"), dim)});
  if (j.contains("kernel")) {
    Eigen::MatrixXcd K0 =
        matrix_from_json(detail::field(j["kernel"], "constant"), dim, dim);
    delays.kernel = DistributedKernel{
        [K0](double, double) -> Eigen::MatrixXcd { return K0; }};
  }
  TrigPolynomial forcing = trig_from_json(detail::field(j, "forcing"));
  return FDEModel(dim, r, std::move(A), std::move(delays), std::move(forcing),
                  period);
}

inline FDEModel load_model(const std::string& path) {
  return model_from_json(load_json(path));
}

inline void save_model(const FDEModel& m, const std::string& path) {
  write_text(path, dump(model_to_json(m)));
}

// ---------------------------------------------------------------------------
// fingerprint tags as fixed-width hex

inline std::string tag_to_hex(std::uint64_t tag) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(tag));
  return buf;
}

inline std::uint64_t tag_from_hex(const std::string& s) {
  if (s.size() != 16 || s.find_first_not_of("0123456789abcdef") != std::string::npos)
    throw io_error("malformed model tag '" + s + "'");
  return std::strtoull(s.c_str(), nullptr, 16);
}

// ---------------------------------------------------------------------------
// segments and trajectories

inline json segment_to_json(const Segment& phi) {
  json values = json::array();
  for (const auto& v : phi.values()) values.push_back(cvec_to_json(v));
  return json{{"m", phi.grid().degree()},
              {"a", phi.grid().a()},
              {"b", phi.grid().b()},
              {"values", std::move(values)}};
}

inline Segment segment_from_json(const json& j, int dim) {
  const int m = detail::integer(detail::field(j, "m"), "segment degree");
  const double a = detail::number(detail::field(j, "a"), "segment left end");
  const double b = detail::number(detail::field(j, "b"), "segment right end");
  std::vector<Eigen::VectorXcd> values;
  for (const json& v : detail::array(detail::field(j, "values"), "segment values"))
    values.push_back(cvec_from_json(v, dim));
  try {
    return Segment(std::make_shared<const ChebGrid>(m, a, b), std::move(values));
  } catch (const config_error& e) {
    throw io_error(std::string("invalid segment: ") + e.what());
  }
}

inline json trajectory_to_json(const Trajectory& tr) {
  json times = json::array(), values = json::array(), derivs = json::array();
  for (double t : tr.times()) times.push_back(t);
  for (const auto& v : tr.values()) values.push_back(cvec_to_json(v));
  for (const auto& v : tr.derivs()) derivs.push_back(cvec_to_json(v));
  return json{{"model", tag_to_hex(tr.model_tag())},
              {"start", tr.start()},
              {"end", tr.end()},
              {"substeps", tr.config().substeps},
              {"h_out", tr.config().h_out},
              {"initial", segment_to_json(tr.initial_segment())},
              {"times", std::move(times)},
              {"values", std::move(values)},
              {"derivs", std::move(derivs)}};
}

inline Trajectory trajectory_from_json(const json& j, int dim) {
  Segment initial = segment_from_json(detail::field(j, "initial"), dim);
  std::vector<double> times;
  for (const json& t : detail::array(detail::field(j, "times"), "times"))
    times.push_back(detail::number(t, "time sample"));
  std::vector<Eigen::VectorXcd> values, derivs;
  for (const json& v : detail::array(detail::field(j, "values"), "values"))
    values.push_back(cvec_from_json(v, dim));
  for (const json& v : detail::array(detail::field(j, "derivs"), "derivs"))
    derivs.push_back(cvec_from_json(v, dim));
  StepperConfig cfg{detail::integer(detail::field(j, "substeps"), "substeps"),
                    detail::number(detail::field(j, "h_out"), "h_out")};
  try {
    return Trajectory(std::move(initial),
                      detail::number(detail::field(j, "start"), "start"),
                      detail::number(detail::field(j, "end"), "end"),
                      std::move(times), std::move(values), std::move(derivs),
                      tag_from_hex(detail::text(detail::field(j, "model"), "model")),
                      cfg);
  } catch (const config_error& e) {
    throw io_error(std::string("invalid trajectory: ") + e.what());
  }
}

// ---------------------------------------------------------------------------
// solution bundles: everything needed to re-verify without re-solving

inline json solution_to_json(const APSolution& sol) {
  json components = json::array();
  for (const auto& c : sol.components())
    components.push_back(json{{"frequency", c.frequency},
                              {"coeff", cvec_to_json(c.coeff)},
                              {"phi", segment_to_json(c.phi)},
                              {"y", trajectory_to_json(c.y)},
                              {"fixed_point_gap", c.fixed_point_gap},
                              {"rcond", c.rcond}});
  return json{{"model", tag_to_hex(sol.model_tag())},
              {"dimension", sol.dim()},
              {"forcing", trig_to_json(sol.forcing())},
              {"components", std::move(components)}};
}

inline APSolution solution_from_json(const json& j) {
  const int dim = detail::integer(detail::field(j, "dimension"), "dimension");
  std::vector<APComponent> components;
  for (const json& c :
       detail::array(detail::field(j, "components"), "components"))
    components.push_back(
        {detail::number(detail::field(c, "frequency"), "frequency"),
         cvec_from_json(detail::field(c, "coeff"), dim),
         segment_from_json(detail::field(c, "phi"), dim),
         trajectory_from_json(detail::field(c, "y"), dim),
         detail::number(detail::field(c, "fixed_point_gap"), "fixed_point_gap"),
         detail::number(detail::field(c, "rcond"), "rcond")});
  try {
    return APSolution(
        dim, tag_from_hex(detail::text(detail::field(j, "model"), "model")),
        trig_from_json(detail::field(j, "forcing")), std::move(components));
  } catch (const config_error& e) {
    throw io_error(std::string("invalid solution: ") + e.what());
  }
}

inline APSolution load_solution(const std::string& path) {
  return solution_from_json(load_json(path));
}

inline void save_solution(const APSolution& sol, const std::string& path) {
  write_text(path, dump(solution_to_json(sol)));
}

// ---------------------------------------------------------------------------
// CSV export on the dense-output grid, history segment included

inline std::string trajectory_to_csv(const Trajectory& tr) {
  const int n = tr.dim();
  const double lo = tr.start() - tr.horizon();
  const double h = tr.config().h_out;
  std::string out = "# model=" + tag_to_hex(tr.model_tag()) +
                    " substeps=" + std::to_string(tr.config().substeps) +
                    " h_out=" + format_double(h) +
                    " segment_m=" + std::to_string(tr.initial_segment().grid().degree()) +
                    "\n";
  out += "t";
  for (int c = 1; c <= n; ++c) out += ",re_u" + std::to_string(c);
  for (int c = 1; c <= n; ++c) out += ",im_u" + std::to_string(c);
  out += '\n';
  const int rows = static_cast<int>(std::floor((tr.end() - lo) / h + 1e-9));
  auto emit = [&](double t) {
    Eigen::VectorXcd u = tr.eval(t);
    out += format_double(t);
    for (int c = 0; c < n; ++c) out += "," + format_double(u(c).real());
    for (int c = 0; c < n; ++c) out += "," + format_double(u(c).imag());
    out += '\n';
  };
  for (int i = 0; i <= rows; ++i) emit(lo + i * h);
  if (lo + rows * h < tr.end() - 1e-9) emit(tr.end());
  return out;
}

inline std::string solution_to_csv(const APSolution& sol, double horizon,
                                   double h) {
  if (!(horizon > 0) || !(h > 0)) throw config_error("csv grid must be positive");
  const int n = sol.dim();
  std::string out = "# model=" + tag_to_hex(sol.model_tag()) +
                    " horizon=" + format_double(horizon) +
                    " h_out=" + format_double(h) + "\n";
  out += "t";
  for (int c = 1; c <= n; ++c) out += ",re_u" + std::to_string(c);
  for (int c = 1; c <= n; ++c) out += ",im_u" + std::to_string(c);
  out += '\n';
  const int rows = static_cast<int>(std::floor(horizon / h + 1e-9));
  auto emit = [&](double t) {
    Eigen::VectorXcd u = sol.eval(t);
    out += format_double(t);
    for (int c = 0; c < n; ++c) out += "," + format_double(u(c).real());
    for (int c = 0; c < n; ++c) out += "," + format_double(u(c).imag());
    out += '\n';
  };
  for (int i = 0; i <= rows; ++i) emit(i * h);
  if (rows * h < horizon - 1e-9) emit(horizon);
  return out;
}

// ---------------------------------------------------------------------------
// report documents (emit-only)

inline json spectrum_to_json(const MonodromyOperator& op,
                             const UnitCircleReport& rep) {
  json eig = json::array();
  for (Eigen::Index i = 0; i < op.eigenvalues.size(); ++i)
    eig.push_back(json::array(
        {op.eigenvalues(i).real(), op.eigenvalues(i).imag()}));
  json circle = json::array();
  for (double a : rep.set.angles()) circle.push_back(a);
  json spurious = json::array();
  for (complexd z : rep.spurious)
    spurious.push_back(json::array({z.real(), z.imag()}));
  return json{{"eigenvalues", std::move(eig)},
              {"unit_circle", std::move(circle)},
              {"flags", json{{"spurious", std::move(spurious)}}},
              {"resolution", json{{"m", op.m}, {"substeps", op.substeps}}}};
}

inline json resonance_to_json(const ResonanceReport& rep) {
  json doc;
  doc["classification"] = classification_name(rep.classification);
  doc["min_separation"] = std::isfinite(rep.min_separation)
                              ? json(rep.min_separation)
                              : json(nullptr);
  json gamma = json::array();
  for (double a : rep.sigma_gamma.angles()) gamma.push_back(a);
  doc["sigma_gamma"] = std::move(gamma);
  json image = json::array();
  for (double a : rep.forcing_image.angles()) image.push_back(a);
  doc["forcing_image"] = std::move(image);
  json conditions = json::array();
  for (const auto& c : rep.conditions)
    conditions.push_back(json{
        {"frequency", c.frequency},
        {"circle_distance",
         std::isfinite(c.circle_distance) ? json(c.circle_distance) : json(nullptr)},
        {"spectral_gap", c.spectral_gap}});
  doc["conditions"] = std::move(conditions);
  json spurious = json::array();
  for (complexd z : rep.spurious)
    spurious.push_back(json::array({z.real(), z.imag()}));
  doc["spurious"] = std::move(spurious);
  if (rep.classification != ResonanceClass::non_resonant)
    doc["offending"] = json{{"frequency", rep.offending_frequency},
                            {"angle", rep.offending_angle}};
  return doc;
}

inline json certificate_to_json(const CertificateResult& cert, double eps) {
  return json{{"epsilon", eps},
              {"tau", cert.tau},
              {"witness", cert.witness},
              {"constant", cert.constant}};
}

}  // namespace floq::io
