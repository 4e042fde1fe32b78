#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <complex>

#include "cqed/chargeq.hpp"
#include "cqed/errors.hpp"

using namespace cqed;

namespace {

Eigen::VectorXd linspace(double lo, double hi, int n) {
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v[i] = lo + (hi - lo) * i / (n - 1);
  return v;
}

// dip position of |s21|^2 on a grid, refined by a 3-point parabola
double dip_position(const ResonatorParams& r, const EnvParams& env,
                    const ChargeQubitParams& q, double eps, double f_lo,
                    double f_hi, int n) {
  const Eigen::VectorXd f = linspace(f_lo, f_hi, n);
  const Eigen::VectorXcd s = s21_coupled(r, env, q, eps, f);
  int k = 0;
  double best = 1e300;
  for (int i = 0; i < n; ++i) {
    const double y = std::norm(s[i]);
    if (y < best) {
      best = y;
      k = i;
    }
  }
  if (k == 0 || k == n - 1) return f[k];
  const double y0 = std::norm(s[k - 1]), y1 = std::norm(s[k]), y2 = std::norm(s[k + 1]);
  const double den = y0 - 2.0 * y1 + y2;
  if (den <= 0.0) return f[k];
  return f[k] + 0.5 * (y0 - y2) / den * (f[1] - f[0]);
}

}  // namespace

TEST_CASE("qubit frequency is even in detuning with minimum 2 t_c") {
  const double t_c = 2.072e9;
  CHECK(qubit_frequency(0.0, t_c) == doctest::Approx(2.0 * t_c).epsilon(1e-15));
  for (double eps : {1e8, 3e9, 1.7e10}) {
    CHECK(qubit_frequency(eps, t_c) == qubit_frequency(-eps, t_c));
    CHECK(qubit_frequency(eps, t_c) > 2.0 * t_c);
  }
  CHECK(qubit_frequency(3e9, t_c) ==
        doctest::Approx(std::sqrt(9e18 + 4.0 * t_c * t_c)).epsilon(1e-15));
}

TEST_CASE("g_eff * f_q is identically 2 g0 t_c") {
  const double g0 = 165e6, t_c = 2.072e9;
  for (double eps : {0.0, 1e6, 5e8, 4e9, 6e10}) {
    const double lhs = effective_coupling(g0, eps, t_c) * qubit_frequency(eps, t_c);
    CHECK(lhs == doctest::Approx(2.0 * g0 * t_c).epsilon(1e-14));
  }
}

TEST_CASE("coupled transmission reduces to the bare resonator") {
  ResonatorParams r{4.149e9, 19e6, 8e6, 0.0};
  EnvParams env{0.9, 0.2, 10e-9};
  const Eigen::VectorXd f = linspace(r.f_r - 2e8, r.f_r + 2e8, 201);
  const Eigen::VectorXcd bare = s21_bare(r, env, f);

  ChargeQubitParams off{2.072e9, 0.0, 57e6, 164e6};
  const Eigen::VectorXcd s_off = s21_coupled(r, env, off, 1e9, f);
  for (int i = 0; i < f.size(); ++i) CHECK(std::abs(s_off[i] - bare[i]) == 0.0);

  // |f_q - f_r| = 1000 g0: the largest residual is the dispersive pull
  // g_eff^2/(f_q - f_r) spread over the half linewidth kappa/2
  ChargeQubitParams far{2.072e9, 165e6, 57e6, 164e6};
  const double f_q = r.f_r + 1000.0 * far.g0;
  const double eps = std::sqrt(f_q * f_q - 4.0 * far.t_c * far.t_c);
  const double g_eff = effective_coupling(far.g0, eps, far.t_c);
  const double bound = 4.0 * g_eff * g_eff / ((f_q - r.f_r) * 0.5 * r.kappa);
  const Eigen::VectorXcd s_far = s21_coupled(r, env, far, eps, f);
  for (int i = 0; i < f.size(); ++i) CHECK(std::abs(s_far[i] - bare[i]) < bound);
}

TEST_CASE("dispersive dip shift matches g_eff^2/(f_q - f_r) within 5%") {
  ResonatorParams r{4.149e9, 19e6, 8e6, 0.0};
  EnvParams env;
  ChargeQubitParams q{2.072e9, 165e6, 1e6, 0.0};
  const double f_q = r.f_r + 2.0e9;
  const double eps = std::sqrt(f_q * f_q - 4.0 * q.t_c * q.t_c);
  const double g_eff = effective_coupling(q.g0, eps, q.t_c);
  const double predicted = g_eff * g_eff / (f_q - r.f_r);

  const double bare_dip = dip_position(r, env, ChargeQubitParams{q.t_c, 0, 1e6, 0},
                                       eps, r.f_r - 5e7, r.f_r + 5e7, 100001);
  const double pulled_dip = dip_position(r, env, q, eps, r.f_r - 5e7, r.f_r + 5e7, 100001);
  const double shift = bare_dip - pulled_dip;  // qubit above pushes the mode down
  CHECK(shift == doctest::Approx(predicted).epsilon(0.05));
}

TEST_CASE("vacuum-Rabi dips are symmetric about f_r when f_q = f_r") {
  ResonatorParams r{4.149e9, 19e6, 8e6, 0.0};
  EnvParams env;
  ChargeQubitParams q{r.f_r / 2.0, 165e6, 20e6, 0.0};  // f_q(0) = f_r
  const int n = 40001;
  const Eigen::VectorXd f = linspace(r.f_r - 1e9, r.f_r + 1e9, n);
  const double df = f[1] - f[0];
  const Eigen::VectorXcd s = s21_coupled(r, env, q, 0.0, f);
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) y[i] = std::norm(s[i]);
  int lo = 0, hi = n - 1;
  for (int i = 0; i < n; ++i) {
    if (f[i] < r.f_r && y[i] < y[lo]) lo = i;
    if (f[i] > r.f_r && y[i] < y[hi]) hi = i;
  }
  CHECK(std::abs((f[hi] - r.f_r) - (r.f_r - f[lo])) <= 2.0 * df);
  // splitting close to 2 g_eff = 2 g0 at the sweet spot
  CHECK(f[hi] - f[lo] == doctest::Approx(2.0 * q.g0).epsilon(0.05));
}

TEST_CASE("cooperativity values for the two reported devices") {
  CHECK(cooperativity(165e6, 19e6, 57e6) == doctest::Approx(100.554).epsilon(1e-4));
  CHECK(cooperativity(260e6, 63e6, 192e6) == doctest::Approx(22.354).epsilon(1e-3));
  CHECK_THROWS_AS(cooperativity(165e6, 0.0, 57e6), config_error);
  CHECK_THROWS_AS(cooperativity(165e6, 19e6, -1.0), config_error);
}

TEST_CASE("gate-voltage to detuning conversion and round trip") {
  DetuningCal cal{0.031, 0.016, 0.5, 0.3};
  // 1 mV on the left plunger alone: eps = 31 ueV = 7.4958 GHz
  const double eps = detuning_from_voltages(cal, 0.501, 0.3);
  CHECK(eps == doctest::Approx(31e-6 * ev_to_hz).epsilon(1e-12));
  CHECK(eps == doctest::Approx(7.4958e9).epsilon(1e-4));
  // both gates moved: contributions subtract
  const double eps2 = detuning_from_voltages(cal, 0.501, 0.302);
  CHECK(eps2 == doctest::Approx((0.031e-3 - 0.016 * 2e-3) * ev_to_hz).epsilon(1e-12));
  CHECK(detuning_from_voltages(cal, cal.v_pl0, cal.v_pr0) == 0.0);
}

TEST_CASE("g0 scaling law and lever-arm calibration chain") {
  const double coeff = 155e6 / std::sqrt(4.156e9);
  CHECK(g0_frequency_law(coeff, 4.156e9) == doctest::Approx(155e6).epsilon(1e-12));
  CHECK(g0_frequency_law(coeff, 4.983e9) == doctest::Approx(169.7e6).epsilon(1e-3));

  // beta_r from the measured g0 and vacuum voltage, and back
  const double v0 = vacuum_voltage(4.149e9, 1600.0);
  const double beta = lever_arm_from_g0(165e6, v0);
  CHECK(beta == doctest::Approx(0.1803).epsilon(1e-3));
  CHECK(g0_from_lever_arm(beta, v0) == doctest::Approx(165e6).epsilon(1e-12));
  const double v0b = vacuum_voltage(5.432e9, 1200.0);
  CHECK(lever_arm_from_g0(260e6, v0b) == doctest::Approx(0.2505).epsilon(1e-3));
}
