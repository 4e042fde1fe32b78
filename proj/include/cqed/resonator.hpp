#pragma once

#include <Eigen/Dense>
#include <complex>

#include "cqed/constants.hpp"
#include "cqed/errors.hpp"

namespace cqed {

using cplx = std::complex<double>;

// Feedline environment seen by a notch-type resonator: overall amplitude a,
// phase offset alpha [rad] and electrical delay tau [s].
struct EnvParams {
  double a = 1.0;
  double alpha = 0.0;
  double tau = 0.0;
};

// Hanger-geometry resonator.  kappa is the total linewidth, kappa_ext the
// magnitude of the (complex) external linewidth, both as /2pi rates in Hz.
// phi is the impedance-mismatch phase of the external rate.
struct ResonatorParams {
  double f_r = 0.0;        // Hz
  double kappa = 0.0;      // Hz
  double kappa_ext = 0.0;  // Hz
  double phi = 0.0;        // rad
};

// a * e^{i alpha} * e^{-2 pi i f_d tau}
cplx env_prefactor(const EnvParams& env, double f_d);

// Environment-corrected bare transmission
//   S21 = env * (dr - i(k - |k_ext| e^{i phi})/2) / (dr - i k/2),
// dr = 2pi (f_r - f_d).  With kappa_ext = 0 this is exactly the env factor.
cplx s21_bare(const ResonatorParams& r, const EnvParams& env, double f_d);
Eigen::VectorXcd s21_bare(const ResonatorParams& r, const EnvParams& env,
                          const Eigen::VectorXd& f_d);

struct LcDerived {
  double z_r;  // sqrt(L/C) [ohm]
  double f_r;  // 1 / (2 pi sqrt(L C)) [Hz]
};
LcDerived impedance(double inductance, double capacitance);

// Root-mean-square vacuum voltage of the resonator mode,
// V0 = 2 pi f_r sqrt(hbar Z_r / 2).
double vacuum_voltage(double f_r, double z_r);

// Flux tuning of an n_squid-junction SQUID array,
//   L(phi) = n_squid * l0 / |cos(pi phi/phi0)|.
// phi is passed in units of the flux quantum.  Near half flux the Josephson
// inductance diverges; |cos| <= 1e-3 is treated as out of tuning range.
struct SquidArrayCal {
  int n_squid = 1;
  double l0 = 0.0;  // per-SQUID zero-flux inductance [H]
  double c_r = 0.0;  // total resonator capacitance [F]
};
double flux_to_inductance(const SquidArrayCal& cal, double phi_over_phi0);
double flux_to_frequency(const SquidArrayCal& cal, double phi_over_phi0);

}  // namespace cqed
