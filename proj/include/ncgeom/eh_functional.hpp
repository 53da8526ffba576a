#pragma once

// Action functional built from the two leading heat coefficients,
// S = -(12 A1 + 2 Lambda A0) / (16 pi G N), together with a Fourier-slot
// parameter space over geometries, finite-difference gradients, a
// box-constrained descent loop, and the commutative field-equation residual.

#include <functional>
#include <limits>

#include "heat_invariants.hpp"

namespace ncgeom {

inline double action_value(double A0, double A1, double G, double Lambda, int N) {
  if (G <= 0.0) throw InputError("gravitational coupling must be positive");
  return -(12.0 * A1 + 2.0 * Lambda * A0) / (16.0 * M_PI * G * N);
}

// mean squared asymmetry between the first-order operator and its adjoint
// over deterministic probe sections; a diagnostic, optionally a penalty
inline double adjointness_defect_probe(const NCFields& f, int probes = 4) {
  SplitMix64 rng(0x5eedULL);
  const int N = f.rep.N;
  double acc = 0.0;
  for (int k = 0; k < probes; ++k) {
    GridMatrix psi(f.grid.npoints);
    for (int pt = 0; pt < f.grid.npoints; ++pt) {
      Matrix m(N, 1);
      for (int r = 0; r < N; ++r) m(r, 0) = cdouble(rng.normal(), rng.normal());
      psi[pt] = m;
    }
    const GridMatrix d = apply_dirac(f, psi);
    const GridMatrix db = apply_dirac_adjoint(f, psi);
    GridMatrix diff(f.grid.npoints);
    for (int pt = 0; pt < f.grid.npoints; ++pt) diff[pt] = d[pt] - db[pt];
    acc += section_inner(f, diff, diff).real() / section_inner(f, psi, psi).real();
  }
  return acc / probes;
}

struct ActionReport {
  double S = 0.0;  // pure action; any penalty is reported separately
  double A0 = 0.0;
  double A1 = 0.0;
  double penalty = 0.0;  // weighted self-adjointness probe
  double G = 1.0;
  double Lambda = 0.0;
};

inline ActionReport eh_action(const NCFields& f, double G, double Lambda,
                              const QuadratureSpec& q, double penalty_mu = 0.0) {
  const InvariantReport inv = global_invariants(f, q);
  ActionReport rep;
  rep.A0 = inv.A0;
  rep.A1 = inv.A1;
  rep.G = G;
  rep.Lambda = Lambda;
  rep.S = action_value(inv.A0, inv.A1, G, Lambda, f.rep.N);
  if (penalty_mu < 0.0) throw InputError("penalty weight must be non-negative");
  if (penalty_mu > 0.0) rep.penalty = penalty_mu * adjointness_defect_probe(f);
  return rep;
}

// --------------------------------------------------------------------------
// parameter space: each entry of theta feeds one declared slot
// --------------------------------------------------------------------------

enum class SlotKind {
  volume_log,       // constant shift of the conformal exponent
  conformal_mode,   // one Fourier mode of the conformal exponent
  symbol_mode,      // Dirac-matrix deformation mode (axis, component, mode)
  density_mode,     // log-density deformation mode
  connection_mode,  // connection deformation mode
};

struct ParameterSlot {
  SlotKind kind = SlotKind::conformal_mode;
  int mu = 0;              // axis, for symbol/connection slots
  std::vector<int> blade;  // Clifford component, for symbol/connection slots
  std::vector<int> mode;   // Fourier mode; ignored for volume_log
  double phase = 0.0;
  double lower = -1.0;
  double upper = 1.0;
};

struct ParameterSpace {
  MetricField base_metric;
  GammaRep rep;
  int stencil_order = 4;
  std::vector<ParameterSlot> slots;

  RealVector lower_bounds() const {
    RealVector b(slots.size());
    for (size_t i = 0; i < slots.size(); ++i) b[i] = slots[i].lower;
    return b;
  }
  RealVector upper_bounds() const {
    RealVector b(slots.size());
    for (size_t i = 0; i < slots.size(); ++i) b[i] = slots[i].upper;
    return b;
  }

  NCFields decode(const RealVector& theta) const {
    if (theta.size() != static_cast<Eigen::Index>(slots.size()))
      throw InputError("parameter vector length does not match the declared slots");
    const TorusGrid& grid = base_metric.grid;
    GridReal sigma(grid.npoints, 0.0);
    DeformationSpec spec;
    spec.kappa = 1.0;  // slot values are the amplitudes themselves
    for (size_t i = 0; i < slots.size(); ++i) {
      const ParameterSlot& s = slots[i];
      const double v = theta[static_cast<Eigen::Index>(i)];
      switch (s.kind) {
        case SlotKind::volume_log:
          for (double& x : sigma) x += v;
          break;
        case SlotKind::conformal_mode: {
          const GridReal m = mode_field(grid, v, s.mode, s.phase);
          for (int pt = 0; pt < grid.npoints; ++pt) sigma[pt] += m[pt];
          break;
        }
        case SlotKind::symbol_mode:
          spec.alpha.push_back({s.mu, s.blade, v, s.mode, s.phase});
          break;
        case SlotKind::density_mode:
          spec.phi.push_back({v, s.mode, s.phase});
          break;
        case SlotKind::connection_mode:
          spec.b.push_back({s.mu, s.blade, v, s.mode, s.phase});
          break;
      }
    }
    MetricField metric = base_metric;
    for (int pt = 0; pt < grid.npoints; ++pt) metric.g[pt] *= std::exp(2.0 * sigma[pt]);
    NCFields f = commutative_fields(metric, rep, stencil_order);
    if (!spec.alpha.empty() || !spec.phi.empty() || !spec.b.empty())
      f = apply_deformation(f, spec);
    require_elliptic(f);
    return f;
  }
};

// --------------------------------------------------------------------------
// finite-difference gradients with box awareness
// --------------------------------------------------------------------------

struct GradientReport {
  RealVector gradient;
  std::vector<char> boundary_limited;  // entries probed one-sided
  double fd_step = 0.0;
};

namespace detail {

// central difference falling back to one-sided probes at box edges or where a
// probe is rejected as non-elliptic
inline GradientReport fd_gradient(const std::function<double(const RealVector&)>& fn,
                                  const RealVector& theta, const RealVector& lower,
                                  const RealVector& upper, double h) {
  const int k = static_cast<int>(theta.size());
  GradientReport rep;
  rep.gradient = RealVector::Zero(k);
  rep.boundary_limited.assign(k, 0);
  rep.fd_step = h;
  double base = 0.0;
  bool have_base = false;
  for (int i = 0; i < k; ++i) {
    double up = theta[i] + h;
    double dn = theta[i] - h;
    bool clipped = false;
    if (up > upper[i]) {
      up = upper[i];
      clipped = true;
    }
    if (dn < lower[i]) {
      dn = lower[i];
      clipped = true;
    }
    double f_up = 0.0, f_dn = 0.0;
    bool ok_up = up > theta[i], ok_dn = dn < theta[i];
    RealVector probe = theta;
    if (ok_up) {
      probe[i] = up;
      try {
        f_up = fn(probe);
      } catch (const EllipticityError&) {
        ok_up = false;
      }
    }
    if (ok_dn) {
      probe[i] = dn;
      try {
        f_dn = fn(probe);
      } catch (const EllipticityError&) {
        ok_dn = false;
      }
    }
    if (ok_up && ok_dn) {
      rep.gradient[i] = (f_up - f_dn) / (up - dn);
      if (clipped) rep.boundary_limited[i] = 1;
      continue;
    }
    if (!ok_up && !ok_dn) {
      rep.boundary_limited[i] = 1;  // pinched entry: no admissible probe
      continue;
    }
    if (!have_base) {
      base = fn(theta);
      have_base = true;
    }
    rep.boundary_limited[i] = 1;
    rep.gradient[i] = ok_up ? (f_up - base) / (up - theta[i]) : (base - f_dn) / (theta[i] - dn);
  }
  return rep;
}

}  // namespace detail

inline GradientReport action_gradient(const ParameterSpace& space, const RealVector& theta,
                                      double G, double Lambda, const QuadratureSpec& q,
                                      double fd_step = 1e-4, double penalty_mu = 0.0) {
  const auto fn = [&](const RealVector& th) {
    const ActionReport rep = eh_action(space.decode(th), G, Lambda, q, penalty_mu);
    return rep.S + rep.penalty;
  };
  return detail::fd_gradient(fn, theta, space.lower_bounds(), space.upper_bounds(), fd_step);
}

// --------------------------------------------------------------------------
// box-constrained descent with backtracking line search
// --------------------------------------------------------------------------

struct DescentOptions {
  int max_iters = 100;
  double grad_tol = 1e-6;   // infinity norm of the projected gradient
  double fd_step = 1e-4;
  double initial_step = 1.0;
  int max_shrinks = 40;
  double armijo = 1e-4;
};

enum class DescentStatus { converged, bounds_limited, max_iterations, stalled };

struct DescentStep {
  int iteration = 0;
  double value = 0.0;
  double grad_norm = 0.0;
  double step = 0.0;
};

struct DescentResult {
  RealVector theta;
  double value = 0.0;
  DescentStatus status = DescentStatus::max_iterations;
  std::vector<DescentStep> history;
  int evaluations = 0;
};

inline DescentResult extremize_objective(const std::function<double(const RealVector&)>& fn,
                                         const RealVector& theta0, const RealVector& lower,
                                         const RealVector& upper,
                                         const DescentOptions& options = {}) {
  if (theta0.size() != lower.size() || theta0.size() != upper.size())
    throw InputError("bound vectors do not match the parameter length");
  const auto clamp = [&](RealVector v) {
    for (int i = 0; i < v.size(); ++i) v[i] = std::min(std::max(v[i], lower[i]), upper[i]);
    return v;
  };
  const auto fn_or_inf = [&](const RealVector& v, int& evals) {
    ++evals;
    try {
      return fn(v);
    } catch (const EllipticityError&) {
      return std::numeric_limits<double>::infinity();
    }
  };

  DescentResult res;
  res.theta = clamp(theta0);
  int evals = 0;
  double value = fn_or_inf(res.theta, evals);
  if (std::isinf(value)) throw InputError("starting point is not evaluable");
  double last_step = 0.0;
  RealVector prev_theta, prev_grad;
  bool have_prev = false;

  for (int iter = 0; iter < options.max_iters; ++iter) {
    const GradientReport grad =
        detail::fd_gradient(fn, res.theta, lower, upper, options.fd_step);
    evals += 2 * static_cast<int>(res.theta.size());

    // project the descent direction onto the feasible box
    RealVector dir = -grad.gradient;
    for (int i = 0; i < dir.size(); ++i) {
      const bool at_lower = res.theta[i] <= lower[i] && dir[i] < 0.0;
      const bool at_upper = res.theta[i] >= upper[i] && dir[i] > 0.0;
      if (at_lower || at_upper) dir[i] = 0.0;
    }
    const double proj_norm = dir.cwiseAbs().maxCoeff();
    const double raw_norm = grad.gradient.cwiseAbs().maxCoeff();
    res.history.push_back({iter, value, proj_norm, last_step});
    if (proj_norm < options.grad_tol) {
      res.status =
          raw_norm < options.grad_tol ? DescentStatus::converged : DescentStatus::bounds_limited;
      break;
    }

    // a two-point secant step seeds the search where curvature information
    // exists; plain steepest descent with a fixed trial step zigzags badly on
    // stiff convex problems, while concave directions fall back to the
    // configured step
    double step = options.initial_step;
    if (have_prev) {
      const RealVector s = res.theta - prev_theta;
      const RealVector y = grad.gradient - prev_grad;
      const double sy = s.dot(y);
      if (sy > 0.0 && std::isfinite(sy)) {
        const double bb = s.dot(s) / sy;
        step = std::min(std::max(bb, 1e-6 * options.initial_step),
                        1e6 * options.initial_step);
      }
    }
    prev_theta = res.theta;
    prev_grad = grad.gradient;
    have_prev = true;

    bool accepted = false;
    for (int shrink = 0; shrink <= options.max_shrinks; ++shrink) {
      const RealVector trial = clamp(res.theta + step * dir);
      const double moved = (trial - res.theta).cwiseAbs().maxCoeff();
      if (moved == 0.0) break;  // fully clipped: no admissible motion survives
      const double predicted = grad.gradient.dot(trial - res.theta);
      const double trial_value = fn_or_inf(trial, evals);
      if (trial_value <= value + options.armijo * predicted) {
        res.theta = trial;
        value = trial_value;
        last_step = step;
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      res.status = DescentStatus::stalled;
      break;
    }
  }
  res.value = value;
  res.evaluations = evals;
  return res;
}

struct ExtremizeResult {
  DescentResult descent;
  ActionReport action;  // evaluated at the final iterate, penalty included
};

inline ExtremizeResult extremize(const ParameterSpace& space, const RealVector& theta0, double G,
                                 double Lambda, const QuadratureSpec& q,
                                 const DescentOptions& options = {}, double penalty_mu = 0.0) {
  const auto fn = [&](const RealVector& th) {
    const ActionReport rep = eh_action(space.decode(th), G, Lambda, q, penalty_mu);
    return rep.S + rep.penalty;
  };
  ExtremizeResult out;
  out.descent =
      extremize_objective(fn, theta0, space.lower_bounds(), space.upper_bounds(), options);
  out.action = eh_action(space.decode(out.descent.theta), G, Lambda, q, penalty_mu);
  return out;
}

// --------------------------------------------------------------------------
// commutative field-equation residual
// --------------------------------------------------------------------------

inline GridRealMatrix einstein_residual(const MetricField& metric, double Lambda, int order = 4) {
  const int min_size = (order <= 2) ? 4 : (order == 4 ? 8 : 12);
  for (int mu = 0; mu < metric.grid.n; ++mu)
    if (metric.grid.sizes[mu] < min_size)
      throw ConfigError("grid too coarse for the curvature residual at this stencil order");
  const GridRealMatrix ric = ricci_tensor(metric, order);
  GridRealMatrix out(metric.g.size());
  for (std::size_t p = 0; p < metric.g.size(); ++p) out[p] = ric[p] - Lambda * metric.g[p];
  return out;
}

}  // namespace ncgeom
