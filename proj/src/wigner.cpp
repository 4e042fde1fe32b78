#include "cqed/wigner.hpp"

#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>
#include <algorithm>
#include <atomic>
#include <cmath>
#include <random>
#include <thread>

#include "cqed/constants.hpp"

namespace cqed {

double orbital_energy(double m_over_me, double l_meters) {
  if (!(m_over_me > 0.0) || !(l_meters > 0.0))
    throw config_error("orbital_energy: mass and length must be positive");
  const double m = m_over_me * m_electron;
  return hbar * hbar / (m * l_meters * l_meters) / h_planck;
}

double wigner_ratio(double eps_r, double m_over_me, double l_x_meters) {
  if (!(eps_r > 0.0)) throw config_error("wigner_ratio: eps_r must be positive");
  const double e_ee_hz =
      e_charge * e_charge / (4.0 * pi * eps0 * eps_r * l_x_meters) / h_planck;
  return e_ee_hz / orbital_energy(m_over_me, l_x_meters);
}

static void check_problem(const RelativeProblem& prob, const GridSpec& grid) {
  if (!(prob.alpha > 0.0) || prob.alpha > 1.0)
    throw config_error("solve_relative: alpha must lie in (0, 1]");
  if (prob.lambda_w < 0.0)
    throw config_error("solve_relative: lambda_w must be >= 0");
  if (grid.points < 32 || grid.points % 2 != 0)
    throw config_error("solve_relative: points must be even and >= 32");
  if (!(grid.half_extent > 0.0))
    throw config_error("solve_relative: half_extent must be positive");
  const double h = 2.0 * grid.half_extent / grid.points;
  if (h > 0.35)
    throw config_error(
        "solve_relative: grid too coarse for the oscillator length "
        "(decrease half_extent or increase points)");
  // classical turning radius of the interacting problem must fit in the box
  const double reach = std::cbrt(std::max(prob.lambda_w, 1.0)) + 4.0;
  if (grid.half_extent < reach)
    throw config_error("solve_relative: half_extent too small for lambda_w");
}

Eigen::SparseMatrix<double> relative_hamiltonian(const RelativeProblem& prob,
                                                 const GridSpec& grid_in) {
  GridSpec grid = grid_in;
  check_problem(prob, grid);
  const int n = grid.points;
  const double h = 2.0 * grid.half_extent / n;
  if (grid.softcore < 0.0) grid.softcore = 0.5 * h;
  const double s2 = grid.softcore * grid.softcore;
  const Eigen::Index dim = static_cast<Eigen::Index>(n) * n;

  auto node = [&](int i) { return (i + 0.5 - 0.5 * n) * h; };
  auto idx = [&](int ix, int iy) { return static_cast<Eigen::Index>(ix) * n + iy; };

  // 5-point finite-difference stencil
  Eigen::SparseMatrix<double> ham(dim, dim);
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<size_t>(dim) * 5);
  const double t = 0.5 / (h * h);  // hopping of -1/2 d^2/du^2
  for (int ix = 0; ix < n; ++ix) {
    const double x = node(ix);
    for (int iy = 0; iy < n; ++iy) {
      const double y = node(iy);
      const double r2 = x * x + y * y;
      const double v = 0.5 * (x * x + y * y / (prob.alpha * prob.alpha)) +
                       prob.lambda_w / std::sqrt(r2 + s2);
      trip.emplace_back(idx(ix, iy), idx(ix, iy), 4.0 * t + v);
      if (ix + 1 < n) {
        trip.emplace_back(idx(ix, iy), idx(ix + 1, iy), -t);
        trip.emplace_back(idx(ix + 1, iy), idx(ix, iy), -t);
      }
      if (iy + 1 < n) {
        trip.emplace_back(idx(ix, iy), idx(ix, iy + 1), -t);
        trip.emplace_back(idx(ix, iy + 1), idx(ix, iy), -t);
      }
    }
  }
  ham.setFromTriplets(trip.begin(), trip.end());
  return ham;
}

RelativeSolution solve_relative(const RelativeProblem& prob, const GridSpec& grid_in,
                                int n_levels) {
  GridSpec grid = grid_in;
  check_problem(prob, grid);
  if (n_levels < 1) throw config_error("solve_relative: n_levels must be >= 1");
  const int n = grid.points;
  const double h = 2.0 * grid.half_extent / n;
  if (grid.softcore < 0.0) grid.softcore = 0.5 * h;
  const Eigen::Index dim = static_cast<Eigen::Index>(n) * n;

  auto idx = [&](int ix, int iy) { return static_cast<Eigen::Index>(ix) * n + iy; };

  Eigen::SparseMatrix<double> ham = relative_hamiltonian(prob, grid);

  // shift-invert blocked subspace iteration; H is positive definite here so
  // the shift can stay at zero
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(ham);
  if (solver.info() != Eigen::Success)
    throw numeric_error("solve_relative: factorization of the Hamiltonian failed");

  const int block = n_levels + 6;
  Eigen::MatrixXd q(dim, block);
  {
    std::mt19937_64 rng(0x5eed);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    for (Eigen::Index i = 0; i < dim; ++i)
      for (int b = 0; b < block; ++b) q(i, b) = uni(rng);
    q = Eigen::HouseholderQR<Eigen::MatrixXd>(q).householderQ() *
        Eigen::MatrixXd::Identity(dim, block);
  }

  // Gershgorin bound used to scale the residual tolerance
  const double vmax = 0.5 * (grid.half_extent * grid.half_extent) *
                          (1.0 + 1.0 / (prob.alpha * prob.alpha)) +
                      prob.lambda_w / grid.softcore;
  const double hnorm = vmax + 4.0 / (h * h);
  const double tol = 1e-10 * hnorm;

  Eigen::VectorXd theta(block);
  Eigen::MatrixXd hq;
  int it = 0;
  const int max_it = 400;
  bool done = false;
  for (; it < max_it; ++it) {
    Eigen::MatrixXd y = solver.solve(q);
    q = Eigen::HouseholderQR<Eigen::MatrixXd>(y).householderQ() *
        Eigen::MatrixXd::Identity(dim, block);
    hq = ham * q;
    const Eigen::MatrixXd t_small = q.transpose() * hq;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(
        0.5 * (t_small + t_small.transpose()));
    q = q * es.eigenvectors();
    hq = hq * es.eigenvectors();
    theta = es.eigenvalues();
    double worst = 0.0;
    for (int k = 0; k < n_levels; ++k)
      worst = std::max(worst, (hq.col(k) - theta[k] * q.col(k)).norm());
    if (worst < tol) {
      done = true;
      break;
    }
  }
  if (!done)
    throw numeric_error("solve_relative: eigensolver did not converge in " +
                        std::to_string(max_it) + " iterations");

  // parity operator on the staggered grid: (ix, iy) -> (n-1-ix, n-1-iy)
  auto apply_parity = [&](const Eigen::VectorXd& v) {
    Eigen::VectorXd out(dim);
    for (int ix = 0; ix < n; ++ix)
      for (int iy = 0; iy < n; ++iy)
        out[idx(ix, iy)] = v[idx(n - 1 - ix, n - 1 - iy)];
    return out;
  };

  // rotate degenerate clusters into parity eigenstates so the labels are
  // deterministic even at accidental even/odd degeneracies
  {
    int a = 0;
    while (a < n_levels) {
      int b = a + 1;
      while (b < block && std::abs(theta[b] - theta[a]) < 1e-7 * std::max(1.0, std::abs(theta[a])))
        ++b;
      if (b - a > 1) {
        Eigen::MatrixXd pq(dim, b - a);
        for (int k = a; k < b; ++k) pq.col(k - a) = apply_parity(q.col(k));
        Eigen::MatrixXd w = q.middleCols(a, b - a).transpose() * pq;
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (w + w.transpose()));
        q.middleCols(a, b - a) = q.middleCols(a, b - a) * es.eigenvectors();
      }
      a = b;
    }
  }

  RelativeSolution sol;
  sol.problem = prob;
  sol.grid = grid;
  sol.iterations = it + 1;
  sol.psi.resize(dim, n_levels);
  for (int k = 0; k < n_levels; ++k) {
    Eigen::VectorXd v = q.col(k) / q.col(k).norm();
    const double overlap = v.dot(apply_parity(v));
    if (std::abs(overlap) < 0.999)
      throw numeric_error("solve_relative: eigenstate " + std::to_string(k) +
                          " is not a parity eigenstate (overlap " +
                          std::to_string(overlap) + ")");
    sol.energy.push_back(theta[k]);
    sol.parity.push_back(overlap > 0 ? 1 : -1);
    sol.psi.col(k) = v;
  }

  sol.delta_st = std::numeric_limits<double>::quiet_NaN();
  for (int k = 0; k < n_levels; ++k) {
    if (sol.parity[static_cast<size_t>(k)] < 0) {
      sol.delta_st = sol.energy[static_cast<size_t>(k)] - sol.energy[0];
      break;
    }
  }
  if (!std::isfinite(sol.delta_st))
    throw numeric_error(
        "solve_relative: no odd-parity level among the computed states; "
        "increase n_levels");
  return sol;
}

AnisotropySweep anisotropy_sweep(double lambda_w, const std::vector<double>& alphas,
                                 const GridSpec& grid, double orbital_hz,
                                 double band_lo_hz, double band_hi_hz,
                                 int n_threads) {
  if (alphas.empty()) throw config_error("anisotropy_sweep: no alpha values");
  if (!(orbital_hz > 0.0))
    throw config_error("anisotropy_sweep: orbital energy must be positive");
  if (!(band_lo_hz < band_hi_hz))
    throw config_error("anisotropy_sweep: band must be ordered");

  AnisotropySweep sweep;
  sweep.points.resize(alphas.size());
  const int nt = std::max(1, n_threads);
  std::atomic<size_t> next{0};
  auto worker = [&]() {
    for (;;) {
      const size_t i = next.fetch_add(1);
      if (i >= alphas.size()) return;
      SweepPoint& pt = sweep.points[i];
      pt.alpha = alphas[i];
      try {
        pt.delta_st = solve_relative({lambda_w, alphas[i]}, grid).delta_st;
        pt.ok = true;
      } catch (const std::exception& e) {
        pt.ok = false;
        pt.error = e.what();
      }
    }
  };
  if (nt == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < nt; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  std::vector<size_t> order(sweep.points.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    return sweep.points[a].alpha > sweep.points[b].alpha;
  });
  for (size_t i : order) {
    const SweepPoint& pt = sweep.points[i];
    if (!pt.ok) continue;
    const double split = pt.delta_st * orbital_hz;
    if (split >= band_lo_hz && split <= band_hi_hz) {
      sweep.alpha_in_band = pt.alpha;
      sweep.band_found = true;
      break;
    }
  }
  return sweep;
}

ChargeDensity charge_density(const RelativeSolution& sol, int state_index) {
  if (state_index < 0 ||
      state_index >= static_cast<int>(sol.energy.size()))
    throw config_error("charge_density: state index out of range");
  const int n = sol.grid.points;
  const double h = 2.0 * sol.grid.half_extent / n;
  const double alpha = sol.problem.alpha;
  auto node = [&](int i) { return (i + 0.5 - 0.5 * n) * h; };

  // |psi|^2 on the grid (grid-normalized, so entries sum to 1)
  Eigen::MatrixXd p2(n, n);
  for (int ix = 0; ix < n; ++ix)
    for (int iy = 0; iy < n; ++iy)
      p2(ix, iy) = sol.psi(static_cast<Eigen::Index>(ix) * n + iy, state_index) *
                   sol.psi(static_cast<Eigen::Index>(ix) * n + iy, state_index);

  // separable COM gaussian |Phi|^2 = [e^{-X^2}/sqrt(pi)] [e^{-Y^2/alpha}/sqrt(pi alpha)]
  const double sq2 = std::sqrt(2.0);
  auto kx = [](double u) { return std::exp(-u * u) / std::sqrt(pi); };
  auto ky = [&](double u) { return std::exp(-u * u / alpha) / std::sqrt(pi * alpha); };

  ChargeDensity out;
  out.axis.resize(n);
  for (int i = 0; i < n; ++i) out.axis[i] = node(i);

  Eigen::MatrixXd kxm(n, n), kym(n, n);  // (out, in) kernel samples
  for (int o = 0; o < n; ++o) {
    for (int i = 0; i < n; ++i) {
      kxm(o, i) = kx(sq2 * node(o) - node(i));
      kym(o, i) = ky(sq2 * node(o) - node(i));
    }
  }
  out.density = 4.0 * (kxm * p2 * kym.transpose());
  return out;
}

}  // namespace cqed
