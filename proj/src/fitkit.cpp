#include "cqed/fitkit.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace cqed {

Eigen::VectorXd stack_complex(const Eigen::VectorXcd& z) {
  Eigen::VectorXd out(2 * z.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    out[2 * i] = z[i].real();
    out[2 * i + 1] = z[i].imag();
  }
  return out;
}

Eigen::MatrixXd fd_jacobian(const ResidualFn& residual, const Eigen::VectorXd& p,
                            const Eigen::VectorXd& x_scale, double rel_step) {
  const Eigen::Index n = p.size();
  Eigen::MatrixXd j;
  for (Eigen::Index k = 0; k < n; ++k) {
    const double h = rel_step * x_scale[k];
    Eigen::VectorXd pp = p, pm = p;
    pp[k] += h;
    pm[k] -= h;
    const Eigen::VectorXd rp = residual(pp), rm = residual(pm);
    if (j.size() == 0) j.resize(rp.size(), n);
    j.col(k) = (rp - rm) / (2.0 * h);
  }
  return j;
}

static std::string param_name(const std::vector<std::string>* names, Eigen::Index i) {
  if (names && i < static_cast<Eigen::Index>(names->size()))
    return (*names)[static_cast<size_t>(i)];
  return "p[" + std::to_string(i) + "]";
}

FitResult fit(const ResidualFn& residual, const Eigen::VectorXd& p0,
              const Eigen::VectorXd& lower, const Eigen::VectorXd& upper,
              const FitOptions& opts, const JacobianFn* jacobian,
              const std::vector<std::string>* names) {
  const Eigen::Index n = p0.size();
  if (lower.size() != n || upper.size() != n)
    throw config_error("fit: bounds must match the parameter count");
  for (Eigen::Index i = 0; i < n; ++i)
    if (lower[i] > upper[i]) throw config_error("fit: lower bound above upper bound");

  Eigen::VectorXd scale = opts.x_scale;
  if (scale.size() == 0) scale = p0.cwiseAbs().cwiseMax(1.0);
  if (scale.size() != n) throw config_error("fit: x_scale must match parameter count");

  auto clamp = [&](Eigen::VectorXd v) {
    return v.cwiseMax(lower).cwiseMin(upper);
  };
  // FD probes are clamped so models stay inside their validity domain; at an
  // active bound this degrades gracefully to a one-sided difference
  ResidualFn clamped = [&](const Eigen::VectorXd& p) { return residual(clamp(p)); };
  auto jac = [&](const Eigen::VectorXd& p) {
    return jacobian ? (*jacobian)(p)
                    : fd_jacobian(clamped, p, scale, opts.fd_rel_step);
  };

  FitResult res;
  if (names) res.names = *names;
  res.p = clamp(p0);
  Eigen::VectorXd r = residual(res.p);
  const Eigen::Index m = r.size();
  res.cost = r.squaredNorm();

  std::vector<bool> frozen(static_cast<size_t>(n), false);
  double lambda = 1e-3;
  Eigen::MatrixXd j;
  double gnorm = 0.0;

  for (res.iterations = 0; res.iterations < opts.max_iter; ++res.iterations) {
    // work on the column-scaled Jacobian d r / d (p_i / scale_i): parameters
    // in different units (volts vs Hz) become comparable
    j = jac(res.p) * scale.asDiagonal();
    if (j.rows() != m) throw config_error("fit: jacobian row count mismatch");

    // identifiability guard: dead columns are frozen at their current value
    const Eigen::VectorXd colnorm = j.colwise().norm();
    const double cmax = colnorm.maxCoeff();
    for (Eigen::Index i = 0; i < n; ++i) {
      if (!frozen[static_cast<size_t>(i)] && colnorm[i] < 1e-12 * cmax) {
        if (opts.throw_on_degenerate)
          throw numeric_error("singular Jacobian: parameter " +
                              param_name(names, i) + " is unidentifiable");
        frozen[static_cast<size_t>(i)] = true;
      }
    }
    std::vector<Eigen::Index> free;
    for (Eigen::Index i = 0; i < n; ++i)
      if (!frozen[static_cast<size_t>(i)]) free.push_back(i);
    if (free.empty())
      throw numeric_error("singular Jacobian: no identifiable parameters");

    const Eigen::Index nf = static_cast<Eigen::Index>(free.size());
    Eigen::MatrixXd jf(m, nf);
    for (Eigen::Index k = 0; k < nf; ++k) jf.col(k) = j.col(free[static_cast<size_t>(k)]);
    const Eigen::VectorXd g = jf.transpose() * r;
    gnorm = g.cwiseAbs().maxCoeff();
    if (gnorm < opts.grad_tol * (1.0 + res.cost)) {
      res.converged = true;
      break;
    }

    const Eigen::MatrixXd jtj = jf.transpose() * jf;
    const Eigen::VectorXd diag =
        jtj.diagonal().cwiseMax(1e-30 * jtj.diagonal().maxCoeff());

    bool accepted = false;
    while (lambda < 1e15) {
      Eigen::MatrixXd a = jtj;
      a.diagonal() += lambda * diag;
      const Eigen::VectorXd step = a.ldlt().solve(-g);
      Eigen::VectorXd trial = res.p;
      for (Eigen::Index k = 0; k < nf; ++k) {
        const Eigen::Index i = free[static_cast<size_t>(k)];
        trial[i] += scale[i] * step[k];
      }
      trial = clamp(trial);
      const Eigen::VectorXd rt = residual(trial);
      const double ct = rt.squaredNorm();
      if (ct < res.cost) {  // monotone: never accept an uphill step
        const double drop = (res.cost - ct) / std::max(res.cost, 1e-300);
        res.p = trial;
        r = rt;
        res.cost = ct;
        lambda = std::max(lambda / 3.0, 1e-14);
        accepted = true;
        if (drop < opts.rel_cost_tol) res.converged = true;
        break;
      }
      lambda *= 4.0;
    }
    if (res.converged) break;
    if (!accepted) {
      // no downhill step found at any damping: either we are at the optimum
      // or the problem is numerically stuck
      if (gnorm < opts.grad_tol * (1.0 + res.cost) * 1e4) {
        res.converged = true;
        break;
      }
      std::ostringstream msg;
      msg << "fit did not converge: no decreasing step, |grad| = " << gnorm;
      throw numeric_error(msg.str());
    }
  }
  if (!res.converged) {
    std::ostringstream msg;
    msg << "fit did not converge within " << opts.max_iter
        << " iterations, |grad| = " << gnorm;
    throw numeric_error(msg.str());
  }

  // covariance of the free parameters from the final Jacobian
  res.covariance = Eigen::MatrixXd::Zero(n, n);
  res.sigma2 = Eigen::VectorXd::Zero(n);
  std::vector<Eigen::Index> free;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (frozen[static_cast<size_t>(i)])
      res.frozen.push_back(static_cast<int>(i));
    else
      free.push_back(i);
  }
  const Eigen::Index nf = static_cast<Eigen::Index>(free.size());
  j = jac(res.p) * scale.asDiagonal();
  Eigen::MatrixXd jf(m, nf);
  for (Eigen::Index k = 0; k < nf; ++k) jf.col(k) = j.col(free[static_cast<size_t>(k)]);
  const Eigen::Index dof = m - nf;
  if (dof > 0) {
    const double s2 = res.cost / static_cast<double>(dof);
    Eigen::MatrixXd cov_f =
        s2 * (jf.transpose() * jf)
                 .ldlt()
                 .solve(Eigen::MatrixXd::Identity(nf, nf));
    // undo the column scaling: cov(p) = S cov(p/S) S
    for (Eigen::Index a = 0; a < nf; ++a) {
      const Eigen::Index ia = free[static_cast<size_t>(a)];
      for (Eigen::Index b = 0; b < nf; ++b) {
        const Eigen::Index ib = free[static_cast<size_t>(b)];
        res.covariance(ia, ib) = scale[ia] * scale[ib] * cov_f(a, b);
      }
      res.sigma2[ia] = 2.0 * scale[ia] * std::sqrt(std::max(cov_f(a, a), 0.0));
    }
  }
  return res;
}

// ---------------------------------------------------------------------------

static double median_of(std::vector<double> v) {
  if (v.empty()) return 0.0;
  const size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<long>(mid), v.end());
  return v[mid];
}

// robust noise scale from successive differences
static double diff_noise(const Eigen::VectorXd& y) {
  if (y.size() < 3) return 0.0;
  std::vector<double> d;
  d.reserve(static_cast<size_t>(y.size() - 1));
  for (Eigen::Index i = 1; i < y.size(); ++i) d.push_back(std::abs(y[i] - y[i - 1]));
  return median_of(std::move(d)) / (0.6745 * std::sqrt(2.0));
}

BareFit fit_bare(const ComplexTrace& trace, const FitOptions& user_opts) {
  const Eigen::Index n = trace.f.size();
  if (n < 8) throw config_error("fit_bare: trace too short");
  const double span = trace.f[n - 1] - trace.f[0];
  if (!(span > 0.0)) throw config_error("fit_bare: frequency axis must ascend");

  // tau from the mean phase slope of the raw trace
  Eigen::VectorXd phase(n);
  double prev = std::arg(trace.s21[0]), acc = prev;
  phase[0] = prev;
  for (Eigen::Index i = 1; i < n; ++i) {
    double ph = std::arg(trace.s21[i]);
    double d = ph - prev;
    while (d > pi) d -= two_pi;
    while (d < -pi) d += two_pi;
    acc += d;
    phase[i] = acc;
    prev = ph;
  }
  const double fbar = trace.f.mean(), pbar = phase.mean();
  double sxx = 0.0, sxy = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    sxx += (trace.f[i] - fbar) * (trace.f[i] - fbar);
    sxy += (trace.f[i] - fbar) * (phase[i] - pbar);
  }
  const double tau0 = -sxy / sxx / two_pi;

  // amplitude, then the dip after removing the delay
  std::vector<double> mags(static_cast<size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) mags[static_cast<size_t>(i)] = std::abs(trace.s21[i]);
  const double a0 = std::max(median_of(mags), 1e-300);

  Eigen::VectorXd w(n);
  Eigen::VectorXcd z(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    z[i] = trace.s21[i] * std::exp(cplx(0.0, two_pi * trace.f[i] * tau0)) / a0;
    w[i] = std::abs(z[i]);
  }
  Eigen::Index imin = 0;
  for (Eigen::Index i = 1; i < n; ++i)
    if (w[i] < w[imin]) imin = i;
  const double depth = 1.0 - w[imin];
  const double noise = diff_noise(w);
  if (depth < std::max(0.02, 5.0 * noise))
    throw numeric_error(
        "singular Jacobian: parameters kappa_ext, phi are unidentifiable "
        "(no resonance dip in trace)");

  const double f_r0 = trace.f[imin];
  const double half = 1.0 - 0.5 * depth;
  Eigen::Index lo = imin, hi = imin;
  while (lo > 0 && w[lo] < half) --lo;
  while (hi < n - 1 && w[hi] < half) ++hi;
  double kappa0 = trace.f[hi] - trace.f[lo];
  if (!(kappa0 > 0.0)) kappa0 = span / 10.0;
  const double kext0 = depth * kappa0;
  // phase offset from the off-resonant ends of the delay-corrected trace
  const cplx edges = z[0] + z[n - 1];
  const double alpha0 = std::abs(edges) > 0 ? std::arg(edges) : 0.0;

  Eigen::VectorXd p0(7), lb(7), ub(7), xs(7);
  p0 << f_r0, kappa0, kext0, 0.0, a0, alpha0, tau0;
  lb << trace.f[0], span / (4.0 * static_cast<double>(n)), 0.0, -pi, 0.1 * a0,
      alpha0 - two_pi, tau0 - 20.0 / span;
  ub << trace.f[n - 1], 4.0 * span, 4.0 * span, pi, 10.0 * a0, alpha0 + two_pi,
      tau0 + 20.0 / span;
  xs << span, std::max(kappa0, span / 100.0), std::max(kappa0, span / 100.0), 1.0,
      a0, 1.0, 1.0 / span;

  FitOptions opts = user_opts;
  opts.throw_on_degenerate = true;
  opts.x_scale = xs;
  const std::vector<std::string> names = {"f_r",   "kappa", "kappa_ext", "phi",
                                          "a",     "alpha", "tau"};
  ResidualFn residual = [&trace](const Eigen::VectorXd& p) {
    ResonatorParams r{p[0], p[1], p[2], p[3]};
    EnvParams e{p[4], p[5], p[6]};
    Eigen::VectorXcd model = s21_bare(r, e, trace.f);
    return stack_complex(model - trace.s21);
  };
  BareFit out;
  out.raw = fit(residual, p0, lb, ub, opts, nullptr, &names);
  out.resonator = ResonatorParams{out.raw.p[0], out.raw.p[1], out.raw.p[2], out.raw.p[3]};
  out.env = EnvParams{out.raw.p[4], out.raw.p[5], out.raw.p[6]};
  return out;
}

JointMapFit fit_2d_joint(const std::vector<Map2D>& maps,
                         const std::vector<ResonatorParams>& resonators,
                         const JointMapInit& init, const FitOptions& user_opts) {
  const size_t nk = maps.size();
  if (nk == 0) throw config_error("fit_2d_joint: no maps");
  if (resonators.size() != nk)
    throw config_error("fit_2d_joint: one resonator parameter set per map required");
  if (init.g0.size() != nk || init.v_pl0.size() != nk)
    throw config_error("fit_2d_joint: per-map initial values must match map count");

  const bool fg = init.fix_gamma0;
  const Eigen::Index nshared = fg ? 3 : 4;
  const Eigen::Index n = nshared + 2 * static_cast<Eigen::Index>(nk);
  Eigen::VectorXd p0(n), lb(n), ub(n), xs(n);
  std::vector<std::string> names = {"t_c", "beta_pl", "gamma_eps"};
  p0[0] = init.t_c;
  p0[1] = init.beta_pl;
  p0[2] = init.gamma_eps;
  if (!fg) {
    names.push_back("gamma0");
    p0[3] = init.gamma0;
  }
  for (size_t k = 0; k < nk; ++k) {
    names.push_back("g0[" + std::to_string(k) + "]");
    p0[nshared + static_cast<Eigen::Index>(k)] = init.g0[k];
  }
  for (size_t k = 0; k < nk; ++k) {
    names.push_back("v_pl0[" + std::to_string(k) + "]");
    p0[nshared + static_cast<Eigen::Index>(nk + k)] = init.v_pl0[k];
  }
  lb.setConstant(-1e30);
  ub.setConstant(1e30);
  lb[0] = 0.05 * init.t_c;
  ub[0] = 20.0 * init.t_c;
  lb[1] = 0.05 * init.beta_pl;
  ub[1] = 20.0 * init.beta_pl;
  lb[2] = 0.0;
  ub[2] = std::max(100.0 * init.gamma_eps, 1e9);
  if (!fg) {
    lb[3] = 0.0;
    ub[3] = std::max(100.0 * init.gamma0, 1e9);
  }
  for (size_t k = 0; k < nk; ++k) {
    lb[nshared + static_cast<Eigen::Index>(k)] = 0.0;
    ub[nshared + static_cast<Eigen::Index>(k)] = 20.0 * init.g0[k];
    lb[nshared + static_cast<Eigen::Index>(nk + k)] = init.v_pl0[k] - 0.05;
    ub[nshared + static_cast<Eigen::Index>(nk + k)] = init.v_pl0[k] + 0.05;
  }
  for (Eigen::Index i = 0; i < n; ++i) xs[i] = std::max(std::abs(p0[i]), 1.0);
  for (size_t k = 0; k < nk; ++k)
    xs[nshared + static_cast<Eigen::Index>(nk + k)] = 1e-3;  // volts

  Eigen::Index total = 0;
  for (const auto& m : maps) total += m.cells.size();
  const double gamma0_fixed = init.gamma0;

  ResidualFn residual = [&, fg, nshared, gamma0_fixed](const Eigen::VectorXd& p) {
    Eigen::VectorXd r(total);
    Eigen::Index off = 0;
    const double t_c = p[0], beta = p[1], geps = p[2];
    const double g0_base_gamma = fg ? gamma0_fixed : p[3];
    const EnvParams env;  // maps are already background-normalized
    for (size_t k = 0; k < maps.size(); ++k) {
      const Map2D& m = maps[k];
      ChargeQubitParams q{t_c, p[nshared + static_cast<Eigen::Index>(k)],
                          g0_base_gamma, geps};
      const double v0 = p[nshared + static_cast<Eigen::Index>(maps.size() + k)];
      for (Eigen::Index i = 0; i < m.x.size(); ++i) {
        const double eps = beta * (m.x[i] - v0) * ev_to_hz;
        for (Eigen::Index j = 0; j < m.y.size(); ++j) {
          const double model =
              std::norm(s21_coupled(resonators[k], env, q, eps, m.y[j]));
          r[off++] = model - m.cells(i, j);
        }
      }
    }
    return r;
  };

  FitOptions opts = user_opts;
  opts.x_scale = xs;
  JointMapFit out;
  out.raw = fit(residual, p0, lb, ub, opts, nullptr, &names);
  out.t_c = out.raw.p[0];
  out.beta_pl = out.raw.p[1];
  out.gamma_eps = out.raw.p[2];
  out.gamma0 = fg ? gamma0_fixed : out.raw.p[3];
  for (size_t k = 0; k < nk; ++k) {
    out.g0.push_back(out.raw.p[nshared + static_cast<Eigen::Index>(k)]);
    out.v_pl0.push_back(out.raw.p[nshared + static_cast<Eigen::Index>(nk + k)]);
  }
  return out;
}

double coulomb_peak_model(double v, double g_max, double v0, double t_e,
                          double offset, double alpha_ev_per_v) {
  const double kb_ev = k_boltzmann / e_charge;
  const double arg = alpha_ev_per_v * (v - v0) / (2.0 * kb_ev * t_e);
  const double c = std::cosh(arg);
  return g_max / (c * c) + offset;
}

ThermometryFit fit_thermometry(const Eigen::VectorXd& v_g,
                               const Eigen::VectorXd& g, double alpha_ev_per_v,
                               const FitOptions& user_opts) {
  const Eigen::Index n = v_g.size();
  if (n < 8 || g.size() != n) throw config_error("fit_thermometry: bad inputs");
  if (!(alpha_ev_per_v > 0.0))
    throw config_error("fit_thermometry: lever arm must be positive");

  Eigen::Index imax = 0;
  for (Eigen::Index i = 1; i < n; ++i)
    if (g[i] > g[imax]) imax = i;
  const double gmin = g.minCoeff();
  const double height = g[imax] - gmin;
  const double noise = diff_noise(g);
  if (height < std::max(5.0 * noise, 1e-12) || imax == 0 || imax == n - 1)
    throw numeric_error("fit_thermometry: no conductance peak found");

  const double half = gmin + 0.5 * height;
  Eigen::Index lo = imax, hi = imax;
  while (lo > 0 && g[lo] > half) --lo;
  while (hi < n - 1 && g[hi] > half) ++hi;
  double fwhm = v_g[hi] - v_g[lo];
  const double span = v_g[n - 1] - v_g[0];
  if (!(fwhm > 0.0)) fwhm = span / 10.0;
  const double kb_ev = k_boltzmann / e_charge;
  const double te0 = alpha_ev_per_v * fwhm / (3.5255 * kb_ev);

  Eigen::VectorXd p0(4), lb(4), ub(4), xs(4);
  p0 << height, v_g[imax], te0, gmin;
  lb << 0.0, v_g[0], 1e-4, gmin - 10.0 * height;
  ub << 100.0 * height, v_g[n - 1], 100.0, g[imax] + 10.0 * height;
  xs << std::max(height, 1e-12), span, std::max(te0, 1e-3), std::max(height, 1e-12);

  FitOptions opts = user_opts;
  opts.x_scale = xs;
  const std::vector<std::string> names = {"g_max", "v0", "t_e", "offset"};
  ResidualFn residual = [&](const Eigen::VectorXd& p) {
    Eigen::VectorXd r(n);
    for (Eigen::Index i = 0; i < n; ++i)
      r[i] = coulomb_peak_model(v_g[i], p[0], p[1], p[2], p[3], alpha_ev_per_v) - g[i];
    return r;
  };
  ThermometryFit out;
  out.raw = fit(residual, p0, lb, ub, opts, nullptr, &names);
  out.g_max = out.raw.p[0];
  out.v0 = out.raw.p[1];
  out.t_e = out.raw.p[2];
  out.offset = out.raw.p[3];
  return out;
}

LorentzianFit fit_lorentzian(const Eigen::VectorXd& f, const Eigen::VectorXd& y,
                             const FitOptions& user_opts) {
  const Eigen::Index n = f.size();
  if (n < 6 || y.size() != n) throw config_error("fit_lorentzian: bad inputs");
  const double base = median_of(std::vector<double>(y.data(), y.data() + n));
  Eigen::Index iext = 0;
  for (Eigen::Index i = 1; i < n; ++i)
    if (std::abs(y[i] - base) > std::abs(y[iext] - base)) iext = i;
  const double amp0 = y[iext] - base;
  const double noise = diff_noise(y);
  if (std::abs(amp0) < std::max(5.0 * noise, 1e-14))
    throw numeric_error("fit_lorentzian: no dip or peak found");

  const double half = base + 0.5 * amp0;
  Eigen::Index lo = iext, hi = iext;
  auto inside = [&](Eigen::Index i) {
    return amp0 > 0 ? y[i] > half : y[i] < half;
  };
  while (lo > 0 && inside(lo)) --lo;
  while (hi < n - 1 && inside(hi)) ++hi;
  const double span = f[n - 1] - f[0];
  double fwhm0 = f[hi] - f[lo];
  if (!(fwhm0 > 0.0)) fwhm0 = span / 10.0;

  Eigen::VectorXd p0(4), lb(4), ub(4), xs(4);
  p0 << f[iext], fwhm0, amp0, base;
  const double df = span / static_cast<double>(n - 1);
  lb << f[0], 0.2 * df, (amp0 > 0 ? 0.0 : 20.0 * amp0), base - 20.0 * std::abs(amp0);
  ub << f[n - 1], 4.0 * span, (amp0 > 0 ? 20.0 * amp0 : 0.0), base + 20.0 * std::abs(amp0);
  xs << span, std::max(fwhm0, df), std::abs(amp0), std::max(std::abs(base), std::abs(amp0));

  FitOptions opts = user_opts;
  opts.x_scale = xs;
  const std::vector<std::string> names = {"center", "fwhm", "amp", "offset"};
  ResidualFn residual = [&](const Eigen::VectorXd& p) {
    Eigen::VectorXd r(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double u = 2.0 * (f[i] - p[0]) / p[1];
      r[i] = p[3] + p[2] / (1.0 + u * u) - y[i];
    }
    return r;
  };
  LorentzianFit out;
  out.raw = fit(residual, p0, lb, ub, opts, nullptr, &names);
  out.center = out.raw.p[0];
  out.fwhm = out.raw.p[1];
  out.amp = out.raw.p[2];
  out.offset = out.raw.p[3];
  return out;
}

SqrtLawFit fit_sqrt_law(const Eigen::VectorXd& f_r, const Eigen::VectorXd& g0,
                        const Eigen::VectorXd& sigma_g0) {
  const Eigen::Index n = f_r.size();
  if (n < 1 || g0.size() != n || sigma_g0.size() != n)
    throw config_error("fit_sqrt_law: bad inputs");
  double num = 0.0, den = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!(f_r[i] > 0.0)) throw config_error("fit_sqrt_law: f_r must be positive");
    if (!(sigma_g0[i] > 0.0)) throw config_error("fit_sqrt_law: sigma must be positive");
    const double w = 1.0 / (sigma_g0[i] * sigma_g0[i]);
    num += w * g0[i] * std::sqrt(f_r[i]);
    den += w * f_r[i];
  }
  SqrtLawFit out;
  out.coeff = num / den;
  out.sigma2_coeff = 2.0 / std::sqrt(den);
  return out;
}

ComplexTrace synthesize_trace(const std::function<cplx(double)>& model,
                              const Eigen::VectorXd& f, double sigma,
                              std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  ComplexTrace t;
  t.f = f;
  t.s21.resize(f.size());
  for (Eigen::Index i = 0; i < f.size(); ++i) {
    const cplx clean = model(f[i]);
    const double nr = sigma > 0 ? sigma * gauss(rng) : 0.0;
    const double ni = sigma > 0 ? sigma * gauss(rng) : 0.0;
    t.s21[i] = clean + cplx(nr, ni);
  }
  return t;
}

Map2D synthesize_map(const std::function<double(double, double)>& model,
                     const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                     double sigma, NoiseMode mode, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Map2D m;
  m.x = x;
  m.y = y;
  m.cells.resize(x.size(), y.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    for (Eigen::Index j = 0; j < y.size(); ++j) {
      const double clean = model(x[i], y[j]);
      double v = clean;
      if (sigma > 0) {
        const double n = sigma * gauss(rng);
        v = (mode == NoiseMode::additive) ? clean + n : clean * (1.0 + n);
      }
      m.cells(i, j) = v;
    }
  }
  return m;
}

}  // namespace cqed
