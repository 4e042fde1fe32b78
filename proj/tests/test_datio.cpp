#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>

#include "cqed/datio.hpp"
#include "cqed/errors.hpp"

using namespace cqed;
namespace fs = std::filesystem;

namespace {

fs::path tmp_dir() {
  static fs::path d = [] {
    fs::path p = fs::temp_directory_path() / "cqed_datio_test";
    fs::create_directories(p);
    return p;
  }();
  return d;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

ComplexTrace random_trace(int n, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  ComplexTrace t;
  t.f.resize(n);
  t.s21.resize(n);
  for (int i = 0; i < n; ++i) {
    t.f[i] = 4e9 + 1e6 * i + uni(rng);
    t.s21[i] = cplx(uni(rng) * std::pow(10.0, int(6 * uni(rng))),
                    uni(rng) * std::pow(10.0, int(6 * uni(rng))));
  }
  return t;
}

}  // namespace

TEST_CASE("fmt17 round-trips doubles through text") {
  for (double v : {3.141592653589793, -2.2250738585072014e-308, 1.0 / 3.0,
                   6.62607015e-34, 0.0, -1.7976931348623157e308}) {
    CHECK(std::strtod(fmt17(v).c_str(), nullptr) == v);
  }
}

TEST_CASE("trace CSV round-trip is bit exact") {
  const ComplexTrace t = random_trace(137, 11);
  const fs::path p = tmp_dir() / "trace.csv";
  write_trace_csv(p.string(), t);
  const ComplexTrace r = read_trace_csv(p.string());
  REQUIRE(r.f.size() == t.f.size());
  for (int i = 0; i < t.f.size(); ++i) {
    CHECK(r.f[i] == t.f[i]);
    CHECK(r.s21[i] == t.s21[i]);
  }
  // writing the reread trace reproduces the file byte for byte
  const fs::path p2 = tmp_dir() / "trace2.csv";
  write_trace_csv(p2.string(), r);
  CHECK(slurp(p) == slurp(p2));
}

TEST_CASE("map CSV round-trip is bit exact and keeps labels") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  Map2D m;
  m.x = Eigen::VectorXd::LinSpaced(23, 0.4, 0.6);
  m.y = Eigen::VectorXd::LinSpaced(41, 4.0e9, 4.4e9);
  m.cells.resize(23, 41);
  for (int i = 0; i < 23; ++i)
    for (int j = 0; j < 41; ++j) m.cells(i, j) = uni(rng);
  m.x_label = "v_pl_v";
  const fs::path p = tmp_dir() / "map.csv";
  write_map_csv(p.string(), m);
  const Map2D r = read_map_csv(p.string());
  CHECK(r.x_label == "v_pl_v");
  REQUIRE(r.x.size() == m.x.size());
  REQUIRE(r.y.size() == m.y.size());
  CHECK((r.x - m.x).cwiseAbs().maxCoeff() == 0.0);
  CHECK((r.y - m.y).cwiseAbs().maxCoeff() == 0.0);
  CHECK((r.cells - m.cells).cwiseAbs().maxCoeff() == 0.0);
  CHECK_THROWS_AS(read_map_csv((tmp_dir() / "absent.csv").string()), config_error);
}

TEST_CASE("content hash is order independent and input sensitive") {
  json a = {{"f_r_hz", 4.149e9}, {"kappa_hz", 19e6}};
  json b = {{"kappa_hz", 19e6}, {"f_r_hz", 4.149e9}};
  CHECK(content_hash(a) == content_hash(b));
  b["kappa_hz"] = 19e6 + 1.0;
  CHECK(content_hash(a) != content_hash(b));
  CHECK(content_hash(a).size() == 16);
  CHECK(fnv1a64("") == 0xcbf29ce484222325ull);
}

TEST_CASE("sidecar write/read/verify and tamper detection") {
  json inputs = {{"command", "simulate"}, {"seed", 42}, {"f_r_hz", 4.149e9}};
  const fs::path p = tmp_dir() / "out.meta.json";
  write_sidecar(p.string(), inputs);
  json side = read_sidecar(p.string());
  CHECK(side.at("schema").get<std::string>() == "cqedsim-meta/1");
  CHECK(verify_sidecar(side));
  side["inputs"]["seed"] = 43;
  CHECK_FALSE(verify_sidecar(side));
}

TEST_CASE("background normalization divides and is idempotent at unity") {
  ComplexTrace data;
  data.f = Eigen::VectorXd::LinSpaced(64, 4.0e9, 4.1e9);
  data.s21.resize(64);
  for (int i = 0; i < 64; ++i) data.s21[i] = cplx(0.5 + 0.001 * i, -0.2);

  ComplexTrace unity;
  unity.f = Eigen::VectorXd::LinSpaced(7, 3.9e9, 4.2e9);
  unity.s21 = Eigen::VectorXcd::Ones(7);
  const ComplexTrace once = normalize_background(data, unity);
  for (int i = 0; i < 64; ++i) CHECK(std::abs(once.s21[i] - data.s21[i]) == 0.0);

  ComplexTrace bg;
  bg.f = data.f;
  bg.s21.resize(64);
  for (int i = 0; i < 64; ++i) bg.s21[i] = cplx(2.0, 1.0);
  const ComplexTrace n = normalize_background(data, bg);
  for (int i = 0; i < 64; ++i)
    CHECK(std::abs(n.s21[i] - data.s21[i] / cplx(2.0, 1.0)) < 1e-15);

  // background must cover the data span and stay away from zero
  ComplexTrace narrow = bg;
  narrow.f = Eigen::VectorXd::LinSpaced(64, 4.02e9, 4.1e9);
  CHECK_THROWS_AS(normalize_background(data, narrow), config_error);
  ComplexTrace zero = bg;
  zero.s21[30] = cplx(0.0, 0.0);
  CHECK_THROWS_AS(normalize_background(data, zero), numeric_error);
}

TEST_CASE("map normalization divides by |background|^2") {
  Map2D m;
  m.x = Eigen::VectorXd::LinSpaced(3, 0.0, 1.0);
  m.y = Eigen::VectorXd::LinSpaced(5, 4.0e9, 4.4e9);
  m.cells = Eigen::MatrixXd::Constant(3, 5, 8.0);
  ComplexTrace bg;
  bg.f = m.y;
  bg.s21 = Eigen::VectorXcd::Constant(5, cplx(0.0, 2.0));
  const Map2D n = normalize_background(m, bg);
  CHECK((n.cells.array() - 2.0).abs().maxCoeff() < 1e-15);
}

TEST_CASE("linecut nearest and linear agree with hand values") {
  Map2D m;
  m.x = Eigen::VectorXd::LinSpaced(5, 0.0, 4.0);
  m.y = Eigen::VectorXd::LinSpaced(9, 0.0, 8.0);
  m.cells.resize(5, 9);
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 9; ++j) m.cells(i, j) = 10.0 * m.x[i] + m.y[j];

  const ComplexTrace cx = linecut(m, 'x', 1.5, Interp::linear);
  REQUIRE(cx.f.size() == 9);
  for (int j = 0; j < 9; ++j) CHECK(cx.s21[j].real() == doctest::Approx(15.0 + m.y[j]).epsilon(1e-14));
  const ComplexTrace cn = linecut(m, 'x', 1.4, Interp::nearest);
  for (int j = 0; j < 9; ++j) CHECK(cn.s21[j].real() == doctest::Approx(10.0 + m.y[j]).epsilon(1e-14));

  const ComplexTrace cy = linecut(m, 'y', 6.5, Interp::linear);
  REQUIRE(cy.f.size() == 5);
  for (int i = 0; i < 5; ++i) CHECK(cy.s21[i].real() == doctest::Approx(10.0 * m.x[i] + 6.5).epsilon(1e-14));

  CHECK_THROWS_AS(linecut(m, 'z', 1.0), config_error);
  CHECK_THROWS_AS(linecut(m, 'x', -0.5), config_error);
  CHECK_THROWS_AS(linecut(m, 'y', 9.0), config_error);
}

TEST_CASE("voltage axis to detuning and back is exact to 1e-12") {
  DetuningCal cal{0.0238, 0.016, 0.5, 0.3};
  const Eigen::VectorXd v = Eigen::VectorXd::LinSpaced(101, 0.46, 0.54);
  const Eigen::VectorXd eps = voltage_axis_to_detuning(v, cal);
  const Eigen::VectorXd back = detuning_axis_to_voltage(eps, cal);
  CHECK((back - v).cwiseAbs().maxCoeff() < 1e-12);
  // center voltage maps to zero detuning
  CHECK(std::abs(voltage_axis_to_detuning(Eigen::VectorXd::Constant(1, 0.5), cal)[0]) == 0.0);
}
