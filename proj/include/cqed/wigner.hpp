#pragma once

#include <Eigen/Dense>
#include <Eigen/SparseCore>
#include <limits>
#include <string>
#include <vector>

#include "cqed/errors.hpp"

namespace cqed {

// Relative-motion problem of two interacting particles in an anisotropic 2D
// harmonic trap, in oscillator units of the soft (x) axis:
//   H / (hbar w_orb) = p^2/2 + (x^2 + y^2/alpha^2)/2 + lambda_w / sqrt(r^2 + s^2)
// with alpha = (l_y/l_x)^2 <= 1 and lambda_w the interaction-to-confinement
// ratio.  Spatial parity (x,y) -> (-x,-y) of the relative wavefunction labels
// the spin sector: even <-> singlet, odd <-> triplet.
struct RelativeProblem {
  double lambda_w = 0.0;
  double alpha = 1.0;
};

// Node-staggered square grid (no node at r = 0): x_i = (i + 1/2 - n/2) h,
// h = 2 half_extent / points.  softcore < 0 selects the default s = h/2.
struct GridSpec {
  double half_extent = 8.0;
  int points = 384;
  double softcore = -1.0;
};

struct RelativeSolution {
  RelativeProblem problem;
  GridSpec grid;
  std::vector<double> energy;  // ascending, units hbar*w_orb
  std::vector<int> parity;     // +1 even, -1 odd
  Eigen::MatrixXd psi;         // columns: grid eigenvectors (x-major), L2-normalized on the grid
  double delta_st = 0.0;       // first odd-parity level minus ground level
  int iterations = 0;
};

// hbar^2/(m* l^2) as E/h in Hz; m_over_me is the effective mass in units of
// the free electron mass.
double orbital_energy(double m_over_me, double l_meters);

// lambda_w = [e^2 / (4 pi eps0 eps_r l_x)] / [hbar w_orb(m*, l_x)]
double wigner_ratio(double eps_r, double m_over_me, double l_x_meters);

// 5-point finite-difference Hamiltonian on the node-staggered grid
// (x-major ordering, matching RelativeSolution::psi rows).
Eigen::SparseMatrix<double> relative_hamiltonian(const RelativeProblem& prob,
                                                 const GridSpec& grid = {});

// Lowest n_levels eigenpairs via shift-invert blocked subspace iteration on
// the 5-point finite-difference Hamiltonian.  Throws numeric_error on
// non-convergence and config_error when the grid cannot resolve the problem.
RelativeSolution solve_relative(const RelativeProblem& prob,
                                const GridSpec& grid = {}, int n_levels = 8);

struct SweepPoint {
  double alpha = 0.0;
  double delta_st = 0.0;  // hbar*w_orb units
  bool ok = false;
  std::string error;
};
struct AnisotropySweep {
  std::vector<SweepPoint> points;
  // first alpha (scanning from 1 downward) whose splitting scaled by
  // orbital_hz falls inside [band_lo_hz, band_hi_hz]; nan when none does
  double alpha_in_band = std::numeric_limits<double>::quiet_NaN();
  bool band_found = false;
};
AnisotropySweep anisotropy_sweep(double lambda_w, const std::vector<double>& alphas,
                                 const GridSpec& grid, double orbital_hz,
                                 double band_lo_hz, double band_hi_hz,
                                 int n_threads = 1);

// Two-particle density of the chosen relative eigenstate: convolution of the
// center-of-mass ground-state gaussian with |psi_rel|^2 mapped through
// r1 = (R + r)/sqrt(2).  Integrates to 2 particles on the returned grid.
struct ChargeDensity {
  Eigen::VectorXd axis;    // single-particle coordinate, oscillator units
  Eigen::MatrixXd density; // axis.size() x axis.size(), x-major like psi
};
ChargeDensity charge_density(const RelativeSolution& sol, int state_index);

}  // namespace cqed
