#include "cqed/multilevel.hpp"

#include <cmath>
#include <fstream>

#include "cqed/fitkit.hpp"

namespace cqed {

Eigen::Matrix4d build_hamiltonian(const ScsParams& p, double eps) {
  Eigen::Matrix4d h = Eigen::Matrix4d::Zero();
  h(0, 0) = 0.5 * eps;
  h(1, 1) = 0.5 * p.eta_l * eps + p.delta_l;
  h(2, 2) = -0.5 * eps;
  h(3, 3) = -0.5 * p.eta_r * eps + p.delta_r;
  h(0, 2) = h(2, 0) = p.t11;
  h(0, 3) = h(3, 0) = p.t12;
  h(1, 2) = h(2, 1) = p.t21;
  h(1, 3) = h(3, 1) = p.t22;
  return h;
}

Eigensystem4 eigensystem(const Eigen::Matrix4d& h) {
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> es(h);
  if (es.info() != Eigen::Success)
    throw numeric_error("eigensystem: diagonalization failed");
  Eigensystem4 sys{es.eigenvalues(), es.eigenvectors()};
  // deterministic gauge: largest-magnitude component of each column positive
  for (int c = 0; c < 4; ++c) {
    int imax = 0;
    for (int r = 1; r < 4; ++r)
      if (std::abs(sys.u(r, c)) > std::abs(sys.u(imax, c))) imax = r;
    if (sys.u(imax, c) < 0.0) sys.u.col(c) = -sys.u.col(c);
  }
  return sys;
}

static Eigen::Vector4d tau_z_diag(double eta_l, double eta_r) {
  return Eigen::Vector4d(1.0, eta_l, -1.0, -eta_r);
}

Eigen::Matrix4d dipole_matrix(const Eigen::Matrix4d& u, double eta_l, double eta_r) {
  if ((u.transpose() * u - Eigen::Matrix4d::Identity()).cwiseAbs().maxCoeff() > 1e-10)
    throw config_error("dipole_matrix: basis matrix is not orthogonal");
  return u.transpose() * tau_z_diag(eta_l, eta_r).asDiagonal() * u;
}

Eigen::Vector4d populations(const Eigen::Vector4d& e, double temperature) {
  if (temperature < 0.0) throw config_error("populations: temperature must be >= 0");
  Eigen::Vector4d rho;
  const double e0 = e.minCoeff();
  if (temperature == 0.0) {
    // split evenly over the (possibly degenerate) ground manifold
    rho = (e.array() - e0 < 1e-9 * std::max(1.0, std::abs(e0))).cast<double>();
  } else {
    const double kt = k_boltzmann * temperature / h_planck;  // Hz
    rho = (-(e.array() - e0) / kt).exp();
  }
  return rho / rho.sum();
}

Eigen::Matrix4d decoherence_matrix(const Eigensystem4& sys,
                                   const Eigen::Matrix4d& dipole,
                                   const NoiseRates& noise) {
  if (noise.gamma_eps < 0.0)
    throw config_error("decoherence_matrix: gamma_eps must be >= 0");
  Eigen::Matrix4d relax = Eigen::Matrix4d::Zero();
  for (int i = 0; i < 4; ++i) {
    for (int j = i + 1; j < 4; ++j) {
      const double rate = noise.gamma_br(i, j);
      if (rate == 0.0) continue;
      if (rate < 0.0)
        throw config_error("decoherence_matrix: relaxation rates must be >= 0");
      Eigen::Matrix4d a = Eigen::Matrix4d::Zero();
      a(i, j) = a(j, i) = std::sqrt(rate);
      const Eigen::Matrix4d abar = sys.u.transpose() * a * sys.u;
      relax += abar.cwiseProduct(abar);
    }
  }
  Eigen::Matrix4d gamma;
  for (int n = 0; n < 4; ++n) {
    for (int m = 0; m < 4; ++m) {
      const double split = dipole(n, n) - dipole(m, m);
      const double dephase = noise.quadratic_dephasing
                                 ? 0.5 * noise.gamma_eps * split * split
                                 : 0.5 * noise.gamma_eps * std::abs(split);
      gamma(n, m) = dephase + 0.5 * relax(n, m);
    }
    gamma(n, n) = 0.0;
  }
  return gamma;
}

cplx s21_multilevel(const ResonatorParams& r, const EnvParams& env,
                    const ScsParams& p, const NoiseRates& noise, double eps,
                    double f_d) {
  const Eigensystem4 sys = eigensystem(build_hamiltonian(p, eps));
  const Eigen::Matrix4d d = dipole_matrix(sys.u, p.eta_l, p.eta_r);
  const Eigen::Vector4d rho = populations(sys.e, p.temperature);
  const Eigen::Matrix4d gamma = decoherence_matrix(sys, d, noise);

  const double g0a = two_pi * p.g0;
  cplx coupling(0.0, 0.0);
  for (int n = 0; n < 4; ++n) {
    for (int m = 0; m < n; ++m) {  // co-rotating transitions: E_n >= E_m
      const double wnm = two_pi * (sys.e[n] - sys.e[m]);
      const cplx chi = g0a * d(n, m) * (rho[m] - rho[n]) /
                       cplx(-(wnm - two_pi * f_d), two_pi * gamma(n, m));
      coupling += g0a * d(n, m) * chi;
    }
  }
  const double dr = two_pi * (r.f_r - f_d);
  const double ka = two_pi * r.kappa;
  const cplx ke = two_pi * r.kappa_ext * std::exp(cplx(0.0, r.phi));
  const cplx num = dr - cplx(0.0, 0.5) * (ka - ke) + coupling;
  const cplx den = cplx(dr, -0.5 * ka) + coupling;
  return env_prefactor(env, f_d) * num / den;
}

Eigen::VectorXcd s21_multilevel(const ResonatorParams& r, const EnvParams& env,
                                const ScsParams& p, const NoiseRates& noise,
                                double eps, const Eigen::VectorXd& f_d) {
  // the eigenproblem depends on eps only; solve once per trace
  const Eigensystem4 sys = eigensystem(build_hamiltonian(p, eps));
  const Eigen::Matrix4d d = dipole_matrix(sys.u, p.eta_l, p.eta_r);
  const Eigen::Vector4d rho = populations(sys.e, p.temperature);
  const Eigen::Matrix4d gamma = decoherence_matrix(sys, d, noise);
  const double g0a = two_pi * p.g0;
  const double ka = two_pi * r.kappa;
  const cplx ke = two_pi * r.kappa_ext * std::exp(cplx(0.0, r.phi));

  Eigen::VectorXcd out(f_d.size());
  for (Eigen::Index i = 0; i < f_d.size(); ++i) {
    cplx coupling(0.0, 0.0);
    for (int n = 0; n < 4; ++n) {
      for (int m = 0; m < n; ++m) {
        const double wnm = two_pi * (sys.e[n] - sys.e[m]);
        const cplx chi = g0a * d(n, m) * (rho[m] - rho[n]) /
                         cplx(-(wnm - two_pi * f_d[i]), two_pi * gamma(n, m));
        coupling += g0a * d(n, m) * chi;
      }
    }
    const double dr = two_pi * (r.f_r - f_d[i]);
    const cplx num = dr - cplx(0.0, 0.5) * (ka - ke) + coupling;
    const cplx den = cplx(dr, -0.5 * ka) + coupling;
    out[i] = env_prefactor(env, f_d[i]) * num / den;
  }
  return out;
}

Eigen::Vector3d excitation_spectrum(const ScsParams& p, double eps) {
  const Eigensystem4 sys = eigensystem(build_hamiltonian(p, eps));
  return Eigen::Vector3d(sys.e[1] - sys.e[0], sys.e[2] - sys.e[0],
                         sys.e[3] - sys.e[0]);
}

Eigen::Matrix3Xd excitation_spectra(const ScsParams& p, const Eigen::VectorXd& eps) {
  Eigen::Matrix3Xd out(3, eps.size());
  for (Eigen::Index i = 0; i < eps.size(); ++i) out.col(i) = excitation_spectrum(p, eps[i]);
  return out;
}

Linewidth linewidth_extract(const Eigen::VectorXd& f, const Eigen::VectorXd& y,
                            double f_lo, double f_hi) {
  if (f.size() != y.size()) throw config_error("linewidth_extract: axis mismatch");
  std::vector<double> fw, yw;
  for (Eigen::Index i = 0; i < f.size(); ++i) {
    if (f[i] >= f_lo && f[i] <= f_hi) {
      fw.push_back(f[i]);
      yw.push_back(y[i]);
    }
  }
  if (fw.size() < 6)
    throw config_error("linewidth_extract: window contains too few points");
  const Eigen::Map<Eigen::VectorXd> fv(fw.data(), static_cast<Eigen::Index>(fw.size()));
  const Eigen::Map<Eigen::VectorXd> yv(yw.data(), static_cast<Eigen::Index>(yw.size()));
  const LorentzianFit lf = fit_lorentzian(fv, yv);
  return Linewidth{lf.center, std::abs(lf.fwhm)};
}

ScsParams scs_even(double delta_l, double t11, double t22, double g0) {
  ScsParams p;
  p.delta_l = delta_l;
  p.delta_r = 0.0;
  p.t11 = t11;
  p.t12 = 0.0;
  p.t21 = 0.0;
  p.t22 = t22;
  p.g0 = g0;
  return p;
}

ScsParams scs_from_json(const json& s) {
  ScsParams p;
  try {
    p.delta_l = s.at("delta_l_hz").get<double>();
    p.delta_r = s.at("delta_r_hz").get<double>();
    p.eta_l = s.at("eta_l").get<double>();
    p.eta_r = s.at("eta_r").get<double>();
    p.t11 = s.at("t11_hz").get<double>();
    p.t12 = s.at("t12_hz").get<double>();
    p.t21 = s.at("t21_hz").get<double>();
    p.t22 = s.at("t22_hz").get<double>();
    p.g0 = s.at("g0_hz").get<double>();
    p.temperature = s.value("temperature_k", 0.010);
  } catch (const json::exception& e) {
    throw config_error(std::string("bad scs block: ") + e.what());
  }
  return p;
}

NoiseRates noise_rates_from_json(const json& nz) {
  NoiseRates n;
  try {
    n.gamma_eps = nz.at("gamma_eps_hz").get<double>();
    n.quadratic_dephasing = nz.value("quadratic_dephasing", false);
    const auto& m = nz.at("gamma_br_hz");
    if (!m.is_array() || m.size() != 4)
      throw config_error("gamma_br_hz must be a 4x4 array");
    for (int i = 0; i < 4; ++i)
      for (int k = 0; k < 4; ++k) n.gamma_br(i, k) = m.at(i).at(k).get<double>();
  } catch (const json::exception& e) {
    throw config_error(std::string("bad noise block: ") + e.what());
  }
  if ((n.gamma_br - n.gamma_br.transpose()).cwiseAbs().maxCoeff() > 0)
    throw config_error("gamma_br_hz must be symmetric");
  return n;
}

json scs_to_json(const ScsParams& p) {
  return json{{"delta_l_hz", p.delta_l}, {"delta_r_hz", p.delta_r},
              {"eta_l", p.eta_l},        {"eta_r", p.eta_r},
              {"t11_hz", p.t11},         {"t12_hz", p.t12},
              {"t21_hz", p.t21},         {"t22_hz", p.t22},
              {"g0_hz", p.g0},           {"temperature_k", p.temperature}};
}

json noise_rates_to_json(const NoiseRates& n) {
  json m = json::array();
  for (int i = 0; i < 4; ++i) {
    json row = json::array();
    for (int k = 0; k < 4; ++k) row.push_back(n.gamma_br(i, k));
    m.push_back(row);
  }
  return json{{"gamma_eps_hz", n.gamma_eps},
              {"gamma_br_hz", m},
              {"quadratic_dephasing", n.quadratic_dephasing}};
}

ScsPreset load_preset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw config_error("cannot open preset: " + path);
  json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw config_error("malformed preset " + path + ": " + e.what());
  }
  if (j.value("schema", "") != "cqedsim-scs/1")
    throw config_error("unsupported preset schema in " + path);
  ScsPreset pre;
  pre.name = j.value("name", "");
  if (!j.contains("scs") || !j.contains("noise"))
    throw config_error("preset missing scs/noise block: " + path);
  pre.scs = scs_from_json(j["scs"]);
  pre.noise = noise_rates_from_json(j["noise"]);
  return pre;
}

}  // namespace cqed
