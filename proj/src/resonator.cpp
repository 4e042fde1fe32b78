#include "cqed/resonator.hpp"

#include <cmath>

namespace cqed {

static void check_resonator(const ResonatorParams& r) {
  if (!(r.f_r > 0.0)) throw config_error("resonator: f_r must be positive");
  if (!(r.kappa > 0.0)) throw config_error("resonator: kappa must be positive");
  if (r.kappa_ext < 0.0) throw config_error("resonator: kappa_ext must be non-negative");
}

cplx env_prefactor(const EnvParams& env, double f_d) {
  return env.a * std::exp(cplx(0.0, env.alpha - two_pi * f_d * env.tau));
}

cplx s21_bare(const ResonatorParams& r, const EnvParams& env, double f_d) {
  check_resonator(r);
  if (r.kappa_ext == 0.0) return env_prefactor(env, f_d);
  const double dr = two_pi * (r.f_r - f_d);
  const double ka = two_pi * r.kappa;
  const cplx ke = two_pi * r.kappa_ext * std::exp(cplx(0.0, r.phi));
  const cplx num = dr - cplx(0.0, 0.5) * (ka - ke);
  const cplx den = cplx(dr, -0.5 * ka);
  return env_prefactor(env, f_d) * num / den;
}

Eigen::VectorXcd s21_bare(const ResonatorParams& r, const EnvParams& env,
                          const Eigen::VectorXd& f_d) {
  Eigen::VectorXcd out(f_d.size());
  for (Eigen::Index i = 0; i < f_d.size(); ++i) out[i] = s21_bare(r, env, f_d[i]);
  return out;
}

LcDerived impedance(double inductance, double capacitance) {
  if (!(inductance > 0.0)) throw config_error("impedance: inductance must be positive");
  if (!(capacitance > 0.0)) throw config_error("impedance: capacitance must be positive");
  LcDerived d;
  d.z_r = std::sqrt(inductance / capacitance);
  d.f_r = 1.0 / (two_pi * std::sqrt(inductance * capacitance));
  return d;
}

double vacuum_voltage(double f_r, double z_r) {
  if (!(f_r > 0.0) || !(z_r > 0.0))
    throw config_error("vacuum_voltage: f_r and z_r must be positive");
  return two_pi * f_r * std::sqrt(hbar * z_r / 2.0);
}

double flux_to_inductance(const SquidArrayCal& cal, double phi_over_phi0) {
  if (cal.n_squid < 1) throw config_error("squid array: n_squid must be >= 1");
  if (!(cal.l0 > 0.0)) throw config_error("squid array: l0 must be positive");
  const double c = std::abs(std::cos(pi * phi_over_phi0));
  if (c <= 1e-3)
    throw numeric_error("flux out of tuning range: |cos(pi phi/phi0)| <= 1e-3");
  return cal.n_squid * cal.l0 / c;
}

double flux_to_frequency(const SquidArrayCal& cal, double phi_over_phi0) {
  if (!(cal.c_r > 0.0)) throw config_error("squid array: c_r must be positive");
  return impedance(flux_to_inductance(cal, phi_over_phi0), cal.c_r).f_r;
}

}  // namespace cqed
