#pragma once

#include <Eigen/Dense>

#include "cqed/datio.hpp"
#include "cqed/resonator.hpp"

namespace cqed {

// Four-level model of a double dot whose (1,1)/(2,0)-like charge states each
// carry a low-lying orbital excitation.  Position basis ordering:
//   0: left ground   1: left excited   2: right ground   3: right excited
// Diagonal (E/h in Hz): (eps/2, eta_l eps/2 + delta_l, -eps/2, -eta_r eps/2 + delta_r);
// tunneling t11 couples 0-2, t12 couples 0-3, t21 couples 1-2, t22 couples 1-3.
// The resonator couples to tau_z = diag(1, eta_l, -1, -eta_r) with bare rate g0.
struct ScsParams {
  double delta_l = 0.0;  // h*Hz
  double delta_r = 0.0;  // h*Hz
  double eta_l = 1.0;
  double eta_r = 1.0;
  double t11 = 0.0, t12 = 0.0, t21 = 0.0, t22 = 0.0;  // h*Hz
  double g0 = 0.0;           // Hz
  double temperature = 0.010;  // K
};

// Even-parity configuration: the (1,1)-like states are degenerate
// (delta_r = 0) and there is no cross tunneling between ground and excited
// orbitals (t12 = t21 = 0), leaving two decoupled two-level branches.
ScsParams scs_even(double delta_l, double t11, double t22, double g0);

// Noise model: one detuning-noise channel of strength gamma_eps acting through
// tau_z (pure dephasing) plus bare relaxation channels gamma_br(i,j) acting
// through |i><j| + |j><i| in the position basis.  All rates /2pi in Hz.
// Dephasing is linear in the dipole splitting by default; the quadratic
// variant is selectable.
struct NoiseRates {
  double gamma_eps = 0.0;
  Eigen::Matrix4d gamma_br = Eigen::Matrix4d::Zero();
  bool quadratic_dephasing = false;
};

Eigen::Matrix4d build_hamiltonian(const ScsParams& p, double eps);

// Ascending eigenvalues; eigenvector columns sign-fixed so that the
// largest-magnitude component of each is positive.
struct Eigensystem4 {
  Eigen::Vector4d e;  // h*Hz
  Eigen::Matrix4d u;  // columns are eigenvectors in the position basis
};
Eigensystem4 eigensystem(const Eigen::Matrix4d& h);

// d = U^T tau_z U.  U must be orthogonal to 1e-10.
Eigen::Matrix4d dipole_matrix(const Eigen::Matrix4d& u, double eta_l, double eta_r);

// Max-shifted Boltzmann weights of the eigenenergies (E/h in Hz) at T [K].
Eigen::Vector4d populations(const Eigen::Vector4d& e, double temperature);

// gamma_nm = Gamma^phi_nm + Gamma^r_nm / 2 where
//   Gamma^r_nm  = sum over channels |U^T A_ij U|_nm^2,  A_ij = sqrt(rate)(|i><j|+|j><i|)
//   Gamma^phi_nm = gamma_eps |d_nn - d_mm| / 2   (linear; quadratic: (d_nn-d_mm)^2/2)
Eigen::Matrix4d decoherence_matrix(const Eigensystem4& sys,
                                   const Eigen::Matrix4d& dipole,
                                   const NoiseRates& noise);

// Generalized transmission: the resonator denominator/numerator acquire
// g0 * sum_{n>m} d_nm chi_nm with
//   chi_nm = g0 d_nm (rho_m - rho_n) / (-(w_n - w_m - w_d) + i gamma_nm).
// Only co-rotating transition terms (upper state n, lower state m) enter, so
// the expression reduces exactly to the two-level transmission when the
// excited orbitals decouple.
cplx s21_multilevel(const ResonatorParams& r, const EnvParams& env,
                    const ScsParams& p, const NoiseRates& noise, double eps,
                    double f_d);
Eigen::VectorXcd s21_multilevel(const ResonatorParams& r, const EnvParams& env,
                                const ScsParams& p, const NoiseRates& noise,
                                double eps, const Eigen::VectorXd& f_d);

// Excitation energies dE_k = E_k - E_0 (k = 1..3) along a detuning axis.
Eigen::Vector3d excitation_spectrum(const ScsParams& p, double eps);
Eigen::Matrix3Xd excitation_spectra(const ScsParams& p, const Eigen::VectorXd& eps);

// Lorentzian fit of the single dominant dip/peak of a real-valued trace
// restricted to [f_lo, f_hi]; raises numeric_error when no feature is found.
struct Linewidth {
  double center = 0.0;  // Hz
  double fwhm = 0.0;    // Hz
};
Linewidth linewidth_extract(const Eigen::VectorXd& f, const Eigen::VectorXd& y,
                            double f_lo, double f_hi);

// JSON (de)serialization of the model blocks, shared by presets and run
// configs.
ScsParams scs_from_json(const json& j);
NoiseRates noise_rates_from_json(const json& j);
json scs_to_json(const ScsParams& p);
json noise_rates_to_json(const NoiseRates& n);

// Preset bundle (four-level parameters + noise + label) loaded from JSON.
struct ScsPreset {
  std::string name;
  ScsParams scs;
  NoiseRates noise;
};
ScsPreset load_preset(const std::string& path);

}  // namespace cqed
