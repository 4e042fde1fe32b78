#pragma once

#include <Eigen/Dense>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "cqed/datio.hpp"

namespace cqed {

// ---------------------------------------------------------------------------
// Bounded Levenberg-Marquardt trust-region least squares.  Residuals are
// real; complex data is stacked as (re, im) pairs via stack_complex().  The
// Jacobian defaults to central finite differences; an analytic Jacobian can
// be registered instead.  The iteration never accepts a step that increases
// the cost, and it is fully deterministic (no internal randomness).
// ---------------------------------------------------------------------------

using ResidualFn = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;
using JacobianFn = std::function<Eigen::MatrixXd(const Eigen::VectorXd&)>;

struct FitOptions {
  int max_iter = 500;
  double rel_cost_tol = 1e-10;  // stop when the relative cost change drops below
  double grad_tol = 1e-8;       // ... or the scaled gradient norm does
  double fd_rel_step = 1e-6;    // central-difference step, relative to x_scale
  // Parameters whose Jacobian column norm falls below 1e-12 of the largest
  // column are unidentifiable.  Default: freeze at the current value and
  // report; with throw_on_degenerate they raise numeric_error instead.
  bool throw_on_degenerate = false;
  Eigen::VectorXd x_scale;  // typical magnitudes; default max(|p0|, 1)
};

struct FitResult {
  Eigen::VectorXd p;           // best parameters
  Eigen::VectorXd sigma2;      // 2-sigma intervals (0 for frozen parameters)
  Eigen::MatrixXd covariance;  // frozen rows/cols zero
  double cost = 0.0;           // sum of squared residuals
  int iterations = 0;
  bool converged = false;
  std::vector<int> frozen;           // indices frozen by the identifiability guard
  std::vector<std::string> names;    // optional parameter names (joint fits)
};

FitResult fit(const ResidualFn& residual, const Eigen::VectorXd& p0,
              const Eigen::VectorXd& lower, const Eigen::VectorXd& upper,
              const FitOptions& opts = {}, const JacobianFn* jacobian = nullptr,
              const std::vector<std::string>* names = nullptr);

// Central-difference Jacobian used internally; exposed so tests can compare
// an independently stepped version against it.
Eigen::MatrixXd fd_jacobian(const ResidualFn& residual, const Eigen::VectorXd& p,
                            const Eigen::VectorXd& x_scale, double rel_step);

Eigen::VectorXd stack_complex(const Eigen::VectorXcd& z);  // [re0, im0, re1, ...]

// ---------------------------------------------------------------------------
// Model-specific front ends
// ---------------------------------------------------------------------------

// Bare hanger trace fit for {f_r, kappa, kappa_ext, phi, a, alpha, tau}.
// Initial values are derived from the trace (tau from the mean phase slope);
// featureless traces (kappa_ext ~ 0) raise a singular-Jacobian error naming
// the dead parameters.
struct BareFit {
  ResonatorParams resonator;
  EnvParams env;
  FitResult raw;  // parameter order: f_r, kappa, kappa_ext, phi, a, alpha, tau
};
BareFit fit_bare(const ComplexTrace& trace, const FitOptions& opts = {});

// Joint fit of several |A/A0|^2 maps (x = plunger voltage, y = drive
// frequency) sharing {t_c, beta_pl, gamma_eps and optionally gamma0} with
// per-map {g0, v_pl0}.  Resonator parameters are held fixed per map.
struct JointMapFit {
  double t_c = 0.0, beta_pl = 0.0, gamma0 = 0.0, gamma_eps = 0.0;
  std::vector<double> g0, v_pl0;
  FitResult raw;  // layout: [t_c, beta_pl, gamma_eps, (gamma0), g0..., v_pl0...]
};
struct JointMapInit {
  double t_c = 0.0, beta_pl = 0.0, gamma0 = 0.0, gamma_eps = 0.0;
  std::vector<double> g0, v_pl0;
  bool fix_gamma0 = true;
};
JointMapFit fit_2d_joint(const std::vector<Map2D>& maps,
                         const std::vector<ResonatorParams>& resonators,
                         const JointMapInit& init, const FitOptions& opts = {});

// Coulomb-peak thermometry G(V) = g_max / cosh^2(alpha (V - v0) / (2 kB Te)) + c
// with the lever arm alpha [eV/V] known.  Traces without a discernible peak
// raise numeric_error.
struct ThermometryFit {
  double g_max = 0.0, v0 = 0.0, t_e = 0.0, offset = 0.0;
  FitResult raw;  // order: g_max, v0, t_e, offset
};
ThermometryFit fit_thermometry(const Eigen::VectorXd& v_g,
                               const Eigen::VectorXd& g, double alpha_ev_per_v,
                               const FitOptions& opts = {});
double coulomb_peak_model(double v, double g_max, double v0, double t_e,
                          double offset, double alpha_ev_per_v);

// Lorentzian y = offset + amp / (1 + 4 (f - center)^2 / fwhm^2); amp < 0 fits
// a dip.  Used by the linewidth extractor.
struct LorentzianFit {
  double center = 0.0, fwhm = 0.0, amp = 0.0, offset = 0.0;
  FitResult raw;
};
LorentzianFit fit_lorentzian(const Eigen::VectorXd& f, const Eigen::VectorXd& y,
                             const FitOptions& opts = {});

// Weighted one-parameter fit of g0 = coeff * sqrt(f_r).
struct SqrtLawFit {
  double coeff = 0.0;
  double sigma2_coeff = 0.0;
  FitResult raw;
};
SqrtLawFit fit_sqrt_law(const Eigen::VectorXd& f_r, const Eigen::VectorXd& g0,
                        const Eigen::VectorXd& sigma_g0);

// ---------------------------------------------------------------------------
// Synthetic data.  Same seed => bit-identical output (single deterministic
// mt19937_64 stream consumed in axis order).
// ---------------------------------------------------------------------------
enum class NoiseMode { additive, multiplicative };

// Gaussian noise of width sigma on each quadrature.
ComplexTrace synthesize_trace(const std::function<cplx(double)>& model,
                              const Eigen::VectorXd& f, double sigma,
                              std::uint64_t seed);
// Real map cells; additive: +sigma*N(0,1), multiplicative: *(1+sigma*N(0,1)).
Map2D synthesize_map(const std::function<double(double, double)>& model,
                     const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                     double sigma, NoiseMode mode, std::uint64_t seed);

}  // namespace cqed
