#pragma once

#include <Eigen/Dense>

#include "cqed/resonator.hpp"

namespace cqed {

// Two-level double-quantum-dot charge qubit, H = (eps/2) sigma_z + t_c sigma_x.
// eps and t_c are energies as E/h in Hz; g0, gamma0, gamma_eps are /2pi rates
// in Hz.  The qubit is assumed thermally polarized in its ground state
// (<sigma_z> = 1), valid for f_q of a few GHz at ~10 mK.
struct ChargeQubitParams {
  double t_c = 0.0;        // tunnel coupling, h*Hz
  double g0 = 0.0;         // bare charge-photon coupling, Hz
  double gamma0 = 0.0;     // detuning-independent decoherence, Hz
  double gamma_eps = 0.0;  // detuning-noise decoherence scale, Hz
};

// f_q = sqrt(eps^2 + 4 t_c^2)  (all as E/h in Hz)
double qubit_frequency(double eps, double t_c);

// g_eff = g0 * 2 t_c / sqrt(eps^2 + 4 t_c^2); identically g_eff * f_q = 2 g0 t_c.
double effective_coupling(double g0, double eps, double t_c);

// Gamma(eps) = gamma0 + gamma_eps * |eps| / (h f_q)
double decoherence(const ChargeQubitParams& q, double eps);

// Qubit susceptibility chi = g_eff / (-dq + i Gamma), dq = 2pi (f_q - f_d),
// with g_eff and Gamma promoted to angular frequency.
cplx qubit_susceptibility(const ChargeQubitParams& q, double eps, double f_d);

// Transmission of the coupled resonator-qubit system,
//   S21 = env * (dr - i(k - |k_ext| e^{i phi})/2 + g_eff chi)
//             / (dr - i k/2 + g_eff chi).
cplx s21_coupled(const ResonatorParams& r, const EnvParams& env,
                 const ChargeQubitParams& q, double eps, double f_d);
Eigen::VectorXcd s21_coupled(const ResonatorParams& r, const EnvParams& env,
                             const ChargeQubitParams& q, double eps,
                             const Eigen::VectorXd& f_d);

// C = 4 g0^2 / (kappa Gamma); kappa and gamma must be positive.
double cooperativity(double g0, double kappa, double gamma);

// Plunger-gate lever arms [eV/V] and reference voltages for converting gate
// voltages to dot detuning.
struct DetuningCal {
  double beta_pl = 0.0;  // eV/V
  double beta_pr = 0.0;  // eV/V
  double v_pl0 = 0.0;    // V
  double v_pr0 = 0.0;    // V
};

// eps = [beta_pl (V_pl - V_pl0) - beta_pr (V_pr - V_pr0)] * e/h  ->  h*Hz
double detuning_from_voltages(const DetuningCal& cal, double v_pl, double v_pr);

// Scaling law g0(f_r) = coeff * sqrt(f_r) for a fixed-capacitance resonator.
double g0_frequency_law(double coeff, double f_r);

// Coupling calibration: g0 = (1/2) beta_r V0,rms / hbar with beta_r in eV/V,
// returned as a /2pi rate in Hz (and its inverse).
double g0_from_lever_arm(double beta_r_ev_per_v, double v0_rms);
double lever_arm_from_g0(double g0_hz, double v0_rms);

}  // namespace cqed
