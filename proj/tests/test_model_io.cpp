#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <numbers>

#include <floquet_ap/builtin_models.hpp>
#include <floquet_ap/model_io.hpp>

using namespace floq;
using floq::io::json;

namespace {

const double pi = std::numbers::pi;

Eigen::VectorXcd unit(complexd v) {
  Eigen::VectorXcd x(1);
  x << v;
  return x;
}

struct TempDir {
  std::string path;
  TempDir() {
    char tmpl[] = "/tmp/floq_io_XXXXXX";
    char* d = mkdtemp(tmpl);
    if (!d) throw std::runtime_error("mkdtemp failed");
    path = d;
  }
  ~TempDir() { std::filesystem::remove_all(path); }
  std::string file(const std::string& name) const { return path + "/" + name; }
};

FDEModel kernel_model() {
  DelayStructure d;
  d.kernel = DistributedKernel{[](double, double) {
    return (Eigen::MatrixXcd(1, 1) << complexd(0.25, 0.1)).finished();
  }};
  return FDEModel(1, 1.0,
                  TimeMatrix::constant((Eigen::MatrixXcd(1, 1) << -1.0).finished()),
                  std::move(d), TrigPolynomial::zero(1));
}

}  // namespace

TEST_CASE("seventeen significant digits round-trip exactly") {
  for (double x : {1.0 / 3, std::sqrt(2.0), pi, 1e-300, 0.1, -2.5, 1.0}) {
    const std::string s = io::format_double(x);
    REQUIRE(std::strtod(s.c_str(), nullptr) == x);
  }
  REQUIRE(io::format_double(0.5) == "0.5");
  REQUIRE(io::format_double(1.0) == "1");
  REQUIRE(io::format_double(-0.0) == "0");
  REQUIRE(io::format_double(1.0 / 3) == "0.33333333333333331");
  REQUIRE_THROWS_AS(io::format_double(std::nan("")), io_error);
  REQUIRE_THROWS_AS(io::format_double(HUGE_VAL), io_error);
}

TEST_CASE("trig polynomials round-trip through their JSON form") {
  TrigPolynomial f(2, {{1.0, (Eigen::VectorXcd(2) << complexd(0.5, -0.25),
                         complexd(0.0, 1.0 / 3)).finished()},
                       {std::sqrt(2.0), (Eigen::VectorXcd(2) << complexd(0.4, 0),
                                         complexd(-1, 2)).finished()}});
  json doc = io::trig_to_json(f);
  TrigPolynomial g = io::trig_from_json(doc);
  REQUIRE(g.dimension() == 2);
  REQUIRE(g.terms().size() == f.terms().size());
  for (std::size_t i = 0; i < f.terms().size(); ++i) {
    REQUIRE(g.terms()[i].frequency == f.terms()[i].frequency);
    REQUIRE((g.terms()[i].coeff - f.terms()[i].coeff).norm() == 0.0);
  }
  // the serialized text itself parses back to the identical document
  json again = io::parse(io::dump(doc), "inline");
  REQUIRE(io::dump(again) == io::dump(doc));
}

TEST_CASE("trig JSON schema violations are reported as I/O errors") {
  json good = io::trig_to_json(TrigPolynomial::zero(1));
  SECTION("missing dimension") {
    json j = good;
    j.erase("dimension");
    REQUIRE_THROWS_AS(io::trig_from_json(j), io_error);
  }
  SECTION("mismatched re/im lengths") {
    json j{{"dimension", 1},
           {"terms", json::array({json{{"frequency", 1.0},
                                       {"re", json::array({1.0, 2.0})},
                                       {"im", json::array({0.0})}}})}};
    REQUIRE_THROWS_AS(io::trig_from_json(j), io_error);
  }
  SECTION("frequency of the wrong type") {
    json j{{"dimension", 1},
           {"terms", json::array({json{{"frequency", "fast"},
                                       {"re", json::array({1.0})},
                                       {"im", json::array({0.0})}}})}};
    REQUIRE_THROWS_AS(io::trig_from_json(j), io_error);
  }
  SECTION("coefficient dimension clash") {
    json j{{"dimension", 2},
           {"terms", json::array({json{{"frequency", 1.0},
                                       {"re", json::array({1.0})},
                                       {"im", json::array({0.0})}}})}};
    REQUIRE_THROWS_AS(io::trig_from_json(j), io_error);
  }
}

TEST_CASE("model files round-trip byte for byte") {
  auto roundtrip = [](const FDEModel& m) {
    const std::string text = io::dump(io::model_to_json(m));
    FDEModel back = io::model_from_json(io::parse(text, "inline"));
    REQUIRE(model_fingerprint(back) == model_fingerprint(m));
    REQUIRE(io::dump(io::model_to_json(back)) == text);
  };
  roundtrip(models::decay());
  roundtrip(models::periodic_decay());
  roundtrip(models::pure_delay());
  roundtrip(models::quarter_turn(1.0, 1.0));
  roundtrip(models::forced_decay());
  roundtrip(models::two_tone_delay());
  roundtrip(models::constant_forcing());
  roundtrip(kernel_model());
}

TEST_CASE("a declared period rescales the loaded model") {
  json doc = io::model_to_json(models::decay());
  doc["period"] = 2.0;
  FDEModel m = io::model_from_json(doc);
  REQUIRE(m.horizon() == 0.5);
  REQUIRE(m.A()(0.3)(0, 0) == complexd(-2.0, 0.0));
}

TEST_CASE("non-serializable coefficients are refused") {
  SECTION("genuinely time-dependent kernel") {
    DelayStructure d;
    d.kernel = DistributedKernel{[](double t, double) {
      return (Eigen::MatrixXcd(1, 1)
              << 1.0 + 0.5 * std::cos(2 * pi * t)).finished();
    }};
    FDEModel m(1, 1.0, TimeMatrix::zero(1), std::move(d),
               TrigPolynomial::zero(1));
    REQUIRE_THROWS_AS(io::model_to_json(m), io_error);
  }
  SECTION("callable matrix coefficient") {
    FDEModel m(1, 1.0,
               TimeMatrix::callable(
                   [](double t) {
                     return (Eigen::MatrixXcd(1, 1)
                             << -1.0 + std::sin(2 * pi * t)).finished();
                   },
                   1),
               DelayStructure{}, TrigPolynomial::zero(1));
    REQUIRE_THROWS_AS(io::model_to_json(m), io_error);
  }
}

TEST_CASE("model schema violations are reported as I/O errors") {
  json good = io::model_to_json(models::forced_decay());
  SECTION("missing A") {
    json j = good;
    j.erase("A");
    REQUIRE_THROWS_AS(io::model_from_json(j), io_error);
  }
  SECTION("matrix form with neither constant nor fourier_terms") {
    json j = good;
    j["A"] = json{{"random", 1}};
    REQUIRE_THROWS_AS(io::model_from_json(j), io_error);
  }
  SECTION("matrix entry count mismatch") {
    json j = good;
    j["A"]["constant"] = json::array(
        {json::array({1.0, 0.0}), json::array({2.0, 0.0})});
    REQUIRE_THROWS_AS(io::model_from_json(j), io_error);
  }
  SECTION("matrix entries that are not pairs") {
    json j = good;
    j["A"]["constant"] = json::array({json::array({1.0})});
    REQUIRE_THROWS_AS(io::model_from_json(j), io_error);
  }
  SECTION("semantic violations surface from the model constructor") {
    json j = good;
    j["horizon_r"] = -1.0;
    REQUIRE_THROWS_AS(io::model_from_json(j), config_error);
  }
}

TEST_CASE("fingerprints are stable and sensitive") {
  const std::uint64_t base = model_fingerprint(models::decay());
  REQUIRE(model_fingerprint(models::decay()) == base);
  REQUIRE(model_fingerprint(models::forced_decay()) != base);
  REQUIRE(model_fingerprint(models::pure_delay()) != base);
  const std::string hex = io::tag_to_hex(base);
  REQUIRE(hex.size() == 16);
  REQUIRE(io::tag_from_hex(hex) == base);
  REQUIRE_THROWS_AS(io::tag_from_hex("xyz"), io_error);
  REQUIRE_THROWS_AS(io::tag_from_hex("0123"), io_error);
}

TEST_CASE("trajectories round-trip with their interpolation intact") {
  auto model = models::forced_decay();
  Segment phi = Segment::constant(make_segment_grid(24, 1.0), unit(1.0));
  Trajectory tr = propagate(model, phi, 0.0, 2.0, true);
  Trajectory back = io::trajectory_from_json(
      io::trajectory_to_json(tr), model.dimension());
  REQUIRE(back.start() == tr.start());
  REQUIRE(back.end() == tr.end());
  REQUIRE(back.model_tag() == tr.model_tag());
  REQUIRE(back.config().substeps == tr.config().substeps);
  REQUIRE(back.times().size() == tr.times().size());
  for (double t : {-1.0, -0.37, 0.0, 0.5, 1.318, 2.0})
    REQUIRE((back.eval(t) - tr.eval(t)).norm() == 0.0);
}

TEST_CASE("solution bundles re-verify after a round-trip") {
  auto model = models::two_tone_delay();
  APSolution sol = solve_ap(model);
  json doc = io::solution_to_json(sol);
  APSolution back = io::solution_from_json(doc);
  REQUIRE(back.model_tag() == model_fingerprint(model));
  REQUIRE(back.components().size() == sol.components().size());
  for (double t : {0.0, 0.4, 1.7, 5.3})
    REQUIRE((back.eval(t) - sol.eval(t)).norm() == 0.0);
  REQUIRE(residual(model, back, 2.0) <= 1e-7);

  SECTION("tampered sample data fails the re-verification") {
    json bad = doc;
    for (auto& v : bad["components"][0]["y"]["values"])
      for (auto& x : v["re"]) x = x.get<double>() * 1.01;
    APSolution tampered = io::solution_from_json(bad);
    REQUIRE(residual(model, tampered, 2.0) >= 1e-4);
  }

  SECTION("structurally broken documents are refused") {
    json bad = doc;
    bad.erase("forcing");
    REQUIRE_THROWS_AS(io::solution_from_json(bad), io_error);
    json bad2 = doc;
    bad2["model"] = "not-a-tag";
    REQUIRE_THROWS_AS(io::solution_from_json(bad2), io_error);
  }
}

TEST_CASE("CSV export covers history and run on the dense grid") {
  auto model = models::forced_decay();
  Segment phi = Segment::constant(make_segment_grid(24, 1.0), unit(1.0));
  Trajectory tr = propagate(model, phi, 0.0, 2.0, true);
  const std::string csv = io::trajectory_to_csv(tr);

  std::vector<std::string> lines;
  for (std::size_t p = 0; p < csv.size();) {
    auto q = csv.find('\n', p);
    lines.push_back(csv.substr(p, q - p));
    p = q + 1;
  }
  REQUIRE(lines[0].rfind("# model=" + io::tag_to_hex(tr.model_tag()), 0) == 0);
  REQUIRE(lines[0].find("substeps=256") != std::string::npos);
  REQUIRE(lines[1] == "t,re_u1,im_u1");
  // [-1, 2] at spacing 1/512 is 1537 samples plus the two header lines
  REQUIRE(lines.size() == 2 + 1537);
  REQUIRE(lines[2].rfind("-1,", 0) == 0);
  REQUIRE(lines.back().rfind("2,", 0) == 0);

  // spot-check one row against the trajectory itself
  const std::string& row = lines[2 + 512];  // t = 0
  const double t = std::strtod(row.c_str(), nullptr);
  REQUIRE(t == 0.0);
  auto comma = row.find(',');
  const double re = std::strtod(row.c_str() + comma + 1, nullptr);
  REQUIRE(re == tr.eval(0.0)(0).real());
}

TEST_CASE("atomic writes leave either the file or nothing") {
  TempDir dir;
  const std::string path = dir.file("out.json");
  io::write_text(path, "{\"x\": 1}\n");
  REQUIRE(io::read_text(path) == "{\"x\": 1}\n");
  REQUIRE_FALSE(std::filesystem::exists(path + ".tmp"));
  io::write_text(path, "second\n");
  REQUIRE(io::read_text(path) == "second\n");
  REQUIRE_THROWS_AS(io::write_text(dir.path + "/nope/out.json", "x"), io_error);
  REQUIRE_THROWS_AS(io::read_text(dir.file("missing.json")), io_error);
}

TEST_CASE("model save and load through the filesystem") {
  TempDir dir;
  const std::string path = dir.file("model.json");
  io::save_model(models::two_tone_delay(), path);
  FDEModel m = io::load_model(path);
  REQUIRE(model_fingerprint(m) == model_fingerprint(models::two_tone_delay()));
  io::write_text(dir.file("broken.json"), "{ not json");
  REQUIRE_THROWS_AS(io::load_model(dir.file("broken.json")), io_error);
  REQUIRE_THROWS_AS(io::load_model(dir.file("absent.json")), io_error);
}

TEST_CASE("report documents are valid JSON with the promised fields") {
  SECTION("spectrum report") {
    auto model = models::quarter_turn(0.0, 0.0);
    auto op = assemble(model, 1.0);
    auto rep = unit_circle_spectrum(model, op);
    json doc = io::parse(io::dump(io::spectrum_to_json(op, rep)), "inline");
    REQUIRE(doc["resolution"]["m"] == op.m);
    REQUIRE(doc["eigenvalues"].size() == std::size_t(op.eigenvalues.size()));
    REQUIRE(doc["unit_circle"].size() == 2);
    REQUIRE(std::abs(doc["unit_circle"][0].get<double>() - pi / 2) < 1e-6);
    REQUIRE(doc["flags"]["spurious"].is_array());
  }
  SECTION("resonance report with an infinite separation") {
    json doc = io::parse(
        io::dump(io::resonance_to_json(check_resonance(models::forced_decay()))),
        "inline");
    REQUIRE(doc["classification"] == "non_resonant");
    REQUIRE(doc["min_separation"].is_null());
    REQUIRE_FALSE(doc.contains("offending"));
  }
  SECTION("resonance report with an offender") {
    json doc = io::parse(
        io::dump(io::resonance_to_json(
            check_resonance(models::constant_forcing()))),
        "inline");
    REQUIRE(doc["classification"] == "resonant");
    REQUIRE(doc["offending"]["frequency"] == 0.0);
  }
  SECTION("certificate document") {
    auto model = models::forced_decay();
    auto sol = solve_ap(model);
    json doc = io::certificate_to_json(ap_certificate(model, sol, 1e-6), 1e-6);
    REQUIRE(doc["epsilon"].get<double>() == 1e-6);
    REQUIRE(doc["tau"].get<double>() > 0.0);
  }
}
