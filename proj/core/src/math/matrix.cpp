#include "steerlab/math/matrix.hpp"

#include <algorithm>

namespace steerlab {

bool solve_linear(Matrix a, Vec b, Vec& x) {
  const std::size_t n = a.rows();
  assert(a.cols() == n && b.size() == n);

  double scale = 0.0;
  for (std::size_t i = 0; i < n * n; ++i) scale = std::max(scale, std::fabs(a.data()[i]));
  const double tiny = std::max(scale, 1.0) * 1e-13;

  std::vector<std::size_t> perm(n);
  for (std::size_t i = 0; i < n; ++i) perm[i] = i;

  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    double best = std::fabs(a(perm[col], col));
    for (std::size_t r = col + 1; r < n; ++r) {
      const double v = std::fabs(a(perm[r], col));
      if (v > best) {
        best = v;
        pivot = r;
      }
    }
    if (best < tiny) return false;
    std::swap(perm[col], perm[pivot]);

    const double diag = a(perm[col], col);
    for (std::size_t r = col + 1; r < n; ++r) {
      const double factor = a(perm[r], col) / diag;
      if (factor == 0.0) continue;
      a(perm[r], col) = 0.0;
      for (std::size_t c = col + 1; c < n; ++c) a(perm[r], c) -= factor * a(perm[col], c);
      b[perm[r]] -= factor * b[perm[col]];
    }
  }

  x.assign(n, 0.0);
  for (std::size_t i = n; i-- > 0;) {
    double acc = b[perm[i]];
    for (std::size_t c = i + 1; c < n; ++c) acc -= a(perm[i], c) * x[c];
    x[i] = acc / a(perm[i], i);
  }
  return true;
}

}  // namespace steerlab
