#pragma once

// Exact momentum-space spectra of flat-torus Dirac operators.  Modes are
// enumerated inside a cutoff box; each carries its spinor multiplicity and the
// split under the chirality grading, so heat traces and the chirality-weighted
// supertrace (index counting) come out of the same table.

#include "core.hpp"

namespace ncgeom {

struct SpectrumEntry {
  double lambda2 = 0.0;       // eigenvalue of the squared Dirac operator
  std::vector<int> momentum;  // integer mode numbers per axis
  int multiplicity = 0;       // spinor multiplicity carried by this mode
  int chirality_plus = 0;
  int chirality_minus = 0;
};

struct SpectrumData {
  int n = 0;
  int spinor_dim = 0;
  std::vector<SpectrumEntry> entries;  // ascending in lambda2

  // sum small terms first for rounding stability
  double heat_trace(double t) const {
    double acc = 0.0;
    for (auto it = entries.rbegin(); it != entries.rend(); ++it)
      acc += it->multiplicity * std::exp(-t * it->lambda2);
    return acc;
  }

  double index_supertrace(double t) const {
    double acc = 0.0;
    for (auto it = entries.rbegin(); it != entries.rend(); ++it)
      acc += (it->chirality_plus - it->chirality_minus) * std::exp(-t * it->lambda2);
    return acc;
  }

  // collapse numerically degenerate levels into (lambda2, total multiplicity)
  std::vector<std::pair<double, int>> degenerate_levels(double tol = 1e-9) const {
    std::vector<std::pair<double, int>> out;
    for (const SpectrumEntry& e : entries) {
      if (!out.empty() && std::abs(e.lambda2 - out.back().first) <= tol * (1.0 + out.back().first))
        out.back().second += e.multiplicity;
      else
        out.emplace_back(e.lambda2, e.multiplicity);
    }
    return out;
  }
};

inline SpectrumData flat_torus_spectrum(int n, const std::vector<double>& lengths,
                                        const std::vector<double>& twist, int cutoff) {
  if (n < 1 || static_cast<int>(lengths.size()) != n)
    throw InputError("spectrum needs one length per axis");
  if (!twist.empty() && static_cast<int>(twist.size()) != n)
    throw InputError("twist must be empty or match the dimension");
  if (cutoff < 0) throw InputError("spectrum cutoff must be nonnegative");
  double total = 1.0;
  for (int mu = 0; mu < n; ++mu) total *= 2.0 * cutoff + 1.0;
  if (total > 2.0e7) throw InputError("spectrum cutoff box too large");

  const int N = 1 << (n / 2);
  const bool even_dim = (n % 2 == 0);
  // odd dimensions: the chirality element is a global sign (-1)^m on the block
  const int odd_sign = ((n / 2) % 2 == 0) ? 1 : -1;

  SpectrumData data;
  data.n = n;
  data.spinor_dim = N;
  data.entries.reserve(static_cast<std::size_t>(total));

  std::vector<int> k(n, -cutoff);
  while (true) {
    double lam2 = 0.0;
    for (int mu = 0; mu < n; ++mu) {
      const double nu = twist.empty() ? 0.0 : twist[mu];
      const double w = 2.0 * M_PI * (k[mu] + nu) / lengths[mu];
      lam2 += w * w;
    }
    SpectrumEntry e;
    e.lambda2 = lam2;
    e.momentum = k;
    e.multiplicity = N;
    if (even_dim) {
      e.chirality_plus = N / 2;
      e.chirality_minus = N / 2;
    } else if (odd_sign > 0) {
      e.chirality_plus = N;
    } else {
      e.chirality_minus = N;
    }
    data.entries.push_back(std::move(e));
    int mu = n - 1;
    while (mu >= 0 && k[mu] == cutoff) { k[mu] = -cutoff; --mu; }
    if (mu < 0) break;
    ++k[mu];
  }
  std::sort(data.entries.begin(), data.entries.end(), [](const SpectrumEntry& a, const SpectrumEntry& b) {
    if (a.lambda2 != b.lambda2) return a.lambda2 < b.lambda2;
    return a.momentum < b.momentum;
  });
  return data;
}

// upper bound on the heat-trace mass outside the cutoff box: union bound over
// the axis whose mode number escapes, full line sums on the remaining axes
inline double heat_trace_truncation_bound(int n, const std::vector<double>& lengths,
                                          const std::vector<double>& twist, int cutoff, double t) {
  if (t <= 0.0) throw InputError("heat trace bound needs t > 0");
  const int N = 1 << (n / 2);
  std::vector<double> line(n, 0.0), tail(n, 0.0);
  for (int mu = 0; mu < n; ++mu) {
    const double nu = twist.empty() ? 0.0 : twist[mu];
    auto term = [&](int kk) {
      const double w = 2.0 * M_PI * (kk + nu) / lengths[mu];
      return std::exp(-t * w * w);
    };
    double s = term(0);
    double tl = 0.0;
    for (int kk = 1; kk <= cutoff + 4000000; ++kk) {
      const double add = term(kk) + term(-kk);
      s += add;
      if (kk > cutoff) {
        tl += add;
        if (add < 1e-300 * (1.0 + s)) break;
      }
    }
    line[mu] = s;
    tail[mu] = tl;
  }
  double bound = 0.0;
  for (int mu = 0; mu < n; ++mu) {
    double prod = tail[mu];
    for (int nu2 = 0; nu2 < n; ++nu2)
      if (nu2 != mu) prod *= line[nu2];
    bound += prod;
  }
  return N * bound;
}

}  // namespace ncgeom
