#include "cqed/chargeq.hpp"

#include <cmath>

namespace cqed {

static void check_qubit(const ChargeQubitParams& q) {
  if (!(q.t_c > 0.0)) throw config_error("charge qubit: t_c must be positive");
  if (q.g0 < 0.0) throw config_error("charge qubit: g0 must be non-negative");
  if (q.gamma0 < 0.0 || q.gamma_eps < 0.0)
    throw config_error("charge qubit: decoherence rates must be non-negative");
}

double qubit_frequency(double eps, double t_c) {
  return std::hypot(eps, 2.0 * t_c);
}

double effective_coupling(double g0, double eps, double t_c) {
  return g0 * 2.0 * t_c / qubit_frequency(eps, t_c);
}

double decoherence(const ChargeQubitParams& q, double eps) {
  check_qubit(q);
  return q.gamma0 + q.gamma_eps * std::abs(eps) / qubit_frequency(eps, q.t_c);
}

cplx qubit_susceptibility(const ChargeQubitParams& q, double eps, double f_d) {
  const double f_q = qubit_frequency(eps, q.t_c);
  const double dq = two_pi * (f_q - f_d);
  const double ga = two_pi * effective_coupling(q.g0, eps, q.t_c);
  const double gm = two_pi * decoherence(q, eps);
  return ga / cplx(-dq, gm);
}

cplx s21_coupled(const ResonatorParams& r, const EnvParams& env,
                 const ChargeQubitParams& q, double eps, double f_d) {
  const double dr = two_pi * (r.f_r - f_d);
  const double ka = two_pi * r.kappa;
  const cplx ke = two_pi * r.kappa_ext * std::exp(cplx(0.0, r.phi));
  const cplx gchi = two_pi * effective_coupling(q.g0, eps, q.t_c) *
                    qubit_susceptibility(q, eps, f_d);
  const cplx num = dr - cplx(0.0, 0.5) * (ka - ke) + gchi;
  const cplx den = cplx(dr, -0.5 * ka) + gchi;
  return env_prefactor(env, f_d) * num / den;
}

Eigen::VectorXcd s21_coupled(const ResonatorParams& r, const EnvParams& env,
                             const ChargeQubitParams& q, double eps,
                             const Eigen::VectorXd& f_d) {
  Eigen::VectorXcd out(f_d.size());
  for (Eigen::Index i = 0; i < f_d.size(); ++i)
    out[i] = s21_coupled(r, env, q, eps, f_d[i]);
  return out;
}

double cooperativity(double g0, double kappa, double gamma) {
  if (!(kappa > 0.0) || !(gamma > 0.0))
    throw config_error("cooperativity: kappa and gamma must be positive");
  return 4.0 * g0 * g0 / (kappa * gamma);
}

double detuning_from_voltages(const DetuningCal& cal, double v_pl, double v_pr) {
  const double e_ev =
      cal.beta_pl * (v_pl - cal.v_pl0) - cal.beta_pr * (v_pr - cal.v_pr0);
  return e_ev * ev_to_hz;
}

double g0_frequency_law(double coeff, double f_r) {
  if (!(f_r > 0.0)) throw config_error("g0_frequency_law: f_r must be positive");
  return coeff * std::sqrt(f_r);
}

double g0_from_lever_arm(double beta_r_ev_per_v, double v0_rms) {
  // g0(angular) = beta_r V0 / (2 hbar); report as /2pi Hz
  return 0.5 * beta_r_ev_per_v * e_charge * v0_rms / hbar / two_pi;
}

double lever_arm_from_g0(double g0_hz, double v0_rms) {
  return 2.0 * hbar * two_pi * g0_hz / v0_rms / e_charge;
}

}  // namespace cqed
