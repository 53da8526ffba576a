#pragma once

// Uniform periodic grids on flat tori.  Fields are flat vectors indexed
// lexicographically (last axis fastest); derivatives are central difference
// stencils of order 2, 4 or 6 with periodic wrap-around, optionally picking up
// a constant phase per boundary crossing (twisted spin structures).

#include "core.hpp"

namespace ncgeom {

struct Stencil {
  int order = 4;
  int radius = 2;
  std::vector<double> taps;  // taps[j-1] multiplies f(x + j e_axis) - f(x - j e_axis)

  static Stencil central(int order) {
    Stencil s;
    s.order = order;
    switch (order) {
      case 2: s.radius = 1; s.taps = {1.0 / 2.0}; break;
      case 4: s.radius = 2; s.taps = {8.0 / 12.0, -1.0 / 12.0}; break;
      case 6: s.radius = 3; s.taps = {45.0 / 60.0, -9.0 / 60.0, 1.0 / 60.0}; break;
      default: throw InputError("stencil order must be 2, 4 or 6");
    }
    return s;
  }

  // symbol: derivative of exp(i k x) comes out as i * symbol(k h) / h * exp(i k x)
  double symbol(double theta) const {
    double s = 0.0;
    for (std::size_t j = 0; j < taps.size(); ++j) s += 2.0 * taps[j] * std::sin((j + 1) * theta);
    return s;
  }
};

struct TorusGrid {
  int n = 0;
  std::vector<int> sizes;
  std::vector<double> lengths;
  std::vector<double> spacing;
  int npoints = 0;

  TorusGrid() = default;
  TorusGrid(std::vector<int> sizes_, std::vector<double> lengths_)
      : n(static_cast<int>(sizes_.size())), sizes(std::move(sizes_)), lengths(std::move(lengths_)) {
    if (lengths.size() != sizes.size() || n == 0) throw InputError("grid sizes and lengths must match and be nonempty");
    npoints = 1;
    spacing.resize(n);
    for (int mu = 0; mu < n; ++mu) {
      if (sizes[mu] < 4) throw InputError("grid needs at least 4 points per axis");
      if (lengths[mu] <= 0.0) throw InputError("grid lengths must be positive");
      npoints *= sizes[mu];
      spacing[mu] = lengths[mu] / sizes[mu];
    }
  }

  void require_order(int order) const {
    const int min_size = (order <= 2) ? 4 : (order == 4 ? 8 : 12);
    for (int mu = 0; mu < n; ++mu)
      if (sizes[mu] < min_size)
        throw InputError("grid size " + std::to_string(sizes[mu]) + " too small for stencil order " +
                         std::to_string(order));
  }

  int flatten(const std::vector<int>& c) const {
    int idx = 0;
    for (int mu = 0; mu < n; ++mu) idx = idx * sizes[mu] + c[mu];
    return idx;
  }

  std::vector<int> coords(int idx) const {
    std::vector<int> c(n);
    for (int mu = n - 1; mu >= 0; --mu) {
      c[mu] = idx % sizes[mu];
      idx /= sizes[mu];
    }
    return c;
  }

  double coordinate(int axis, int i) const { return spacing[axis] * i; }

  std::vector<double> point(int idx) const {
    const auto c = coords(idx);
    std::vector<double> x(n);
    for (int mu = 0; mu < n; ++mu) x[mu] = coordinate(mu, c[mu]);
    return x;
  }

  double cell_volume() const {
    double v = 1.0;
    for (int mu = 0; mu < n; ++mu) v *= spacing[mu];
    return v;
  }

  // neighbor index after moving `step` sites along `axis`, together with the
  // phase accumulated from twisted boundary crossings (+twist per upper wrap)
  std::pair<int, cdouble> neighbor(int idx, int axis, int step, const std::vector<double>& twist) const {
    auto c = coords(idx);
    int v = c[axis] + step;
    int wraps = 0;
    const int s = sizes[axis];
    while (v >= s) { v -= s; ++wraps; }
    while (v < 0) { v += s; --wraps; }
    c[axis] = v;
    cdouble phase(1.0, 0.0);
    if (!twist.empty() && wraps != 0) phase = std::exp(II * (2.0 * M_PI * twist[axis] * wraps));
    return {flatten(c), phase};
  }
};

// grid fields: one value per point
using GridReal = std::vector<double>;
using GridComplex = std::vector<cdouble>;
using GridMatrix = std::vector<Matrix>;        // complex matrix per point
using GridRealMatrix = std::vector<RealMatrix>;

// central-difference derivative of a real scalar field (periodic, no twist)
inline GridReal derivative(const TorusGrid& g, const GridReal& f, int axis, int order) {
  g.require_order(order);
  const Stencil st = Stencil::central(order);
  GridReal out(g.npoints, 0.0);
  const double invh = 1.0 / g.spacing[axis];
  for (int p = 0; p < g.npoints; ++p) {
    double acc = 0.0;
    for (int j = 1; j <= st.radius; ++j) {
      const int fwd = g.neighbor(p, axis, j, {}).first;
      const int bwd = g.neighbor(p, axis, -j, {}).first;
      acc += st.taps[j - 1] * (f[fwd] - f[bwd]);
    }
    out[p] = acc * invh;
  }
  return out;
}

// derivative of a complex matrix field with optional twisted wrap phases
inline GridMatrix derivative(const TorusGrid& g, const GridMatrix& f, int axis, int order,
                             const std::vector<double>& twist = {}) {
  g.require_order(order);
  const Stencil st = Stencil::central(order);
  GridMatrix out(g.npoints);
  const double invh = 1.0 / g.spacing[axis];
  for (int p = 0; p < g.npoints; ++p) {
    Matrix acc = Matrix::Zero(f[p].rows(), f[p].cols());
    for (int j = 1; j <= st.radius; ++j) {
      const auto [fwd, ph_f] = g.neighbor(p, axis, j, twist);
      const auto [bwd, ph_b] = g.neighbor(p, axis, -j, twist);
      acc += st.taps[j - 1] * (ph_f * f[fwd] - ph_b * f[bwd]);
    }
    out[p] = acc * invh;
  }
  return out;
}

}  // namespace ncgeom
