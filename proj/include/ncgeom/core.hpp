#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace ncgeom {

using cdouble = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;

inline constexpr cdouble II{0.0, 1.0};

// ---------------------------------------------------------------------------
// error taxonomy: every failure mode raised by the library derives from Error
// so callers (and the CLI) can distinguish usage errors from internal ones.
// ---------------------------------------------------------------------------

struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

#define NCGEOM_DEFINE_ERROR(name)                                   \
  struct name : Error {                                             \
    explicit name(const std::string& msg) : Error(#name ": " + msg) {} \
  }

NCGEOM_DEFINE_ERROR(InputError);          // malformed arguments, shape mismatches
NCGEOM_DEFINE_ERROR(ConfigError);         // invalid run configuration values
NCGEOM_DEFINE_ERROR(SchemaError);         // config JSON fails schema validation
NCGEOM_DEFINE_ERROR(MetricError);         // metric not symmetric positive definite
NCGEOM_DEFINE_ERROR(EllipticityError);    // principal symbol not positive definite
NCGEOM_DEFINE_ERROR(SingularAMap);        // metric p-form map not invertible
NCGEOM_DEFINE_ERROR(NonPositiveEta);      // eta lacks a positive definite root
NCGEOM_DEFINE_ERROR(DimensionCapExceeded);// dense assembly above the size cap
NCGEOM_DEFINE_ERROR(ThresholdAmbiguity);  // eigenvalue too close to kernel cutoff
NCGEOM_DEFINE_ERROR(QuadratureDivergence);// refinement delta grows instead of shrinking
NCGEOM_DEFINE_ERROR(ParityError);         // element has mixed even/odd grading
NCGEOM_DEFINE_ERROR(DegenerateBranch);    // eigenvalue branch gap too small
NCGEOM_DEFINE_ERROR(LineSearchStall);     // descent line search failed to progress
NCGEOM_DEFINE_ERROR(CacheError);          // result cache I/O failure

#undef NCGEOM_DEFINE_ERROR

// ---------------------------------------------------------------------------
// small combinatorics helpers shared by the Clifford and p-form code paths
// ---------------------------------------------------------------------------

inline std::int64_t binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  std::int64_t r = 1;
  for (int i = 0; i < k; ++i) r = r * (n - i) / (i + 1);
  return r;
}

// all strictly increasing p-tuples drawn from {0,...,n-1}, lexicographic order
inline std::vector<std::vector<int>> increasing_tuples(int n, int p) {
  std::vector<std::vector<int>> out;
  if (p < 0 || p > n) return out;
  std::vector<int> idx(p);
  for (int i = 0; i < p; ++i) idx[i] = i;
  while (true) {
    out.push_back(idx);
    if (p == 0) break;
    int i = p - 1;
    while (i >= 0 && idx[i] == n - p + i) --i;
    if (i < 0) break;
    ++idx[i];
    for (int j = i + 1; j < p; ++j) idx[j] = idx[j - 1] + 1;
  }
  return out;
}

// lexicographic rank of an increasing tuple among all C(n,p) tuples
inline int tuple_rank(const std::vector<int>& idx, int n) {
  const int p = static_cast<int>(idx.size());
  std::int64_t rank = 0;
  int prev = -1;
  for (int i = 0; i < p; ++i) {
    for (int v = prev + 1; v < idx[i]; ++v) rank += binomial(n - 1 - v, p - 1 - i);
    prev = idx[i];
  }
  return static_cast<int>(rank);
}

// sorts idx ascending in place; returns the permutation sign, or 0 on duplicates
inline int sort_sign(std::vector<int>& idx) {
  int sign = 1;
  const int m = static_cast<int>(idx.size());
  for (int i = 0; i < m; ++i)
    for (int j = i + 1; j < m; ++j) {
      if (idx[i] == idx[j]) return 0;
      if (idx[i] > idx[j]) {
        std::swap(idx[i], idx[j]);
        sign = -sign;
      }
    }
  return sign;
}

// sign of the permutation obtained by concatenating two disjoint sorted tuples
inline int merge_sign(const std::vector<int>& a, const std::vector<int>& b) {
  int inversions = 0;
  for (int x : a)
    for (int y : b)
      if (x > y) ++inversions;
  return (inversions % 2 == 0) ? 1 : -1;
}

inline double relative_diff(double a, double b) {
  const double scale = std::max(std::abs(a), std::abs(b));
  if (scale == 0.0) return 0.0;
  return std::abs(a - b) / scale;
}

// deterministic 64-bit stream generator used for reproducible sampling
struct SplitMix64 {
  std::uint64_t state;
  explicit SplitMix64(std::uint64_t seed) : state(seed) {}
  std::uint64_t next() {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }
  // uniform in [0,1)
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
  // standard normal via Box-Muller
  double normal() {
    double u1 = uniform(), u2 = uniform();
    while (u1 <= 1e-300) u1 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }
};

}  // namespace ncgeom
