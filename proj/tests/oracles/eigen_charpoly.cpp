#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "oracles.hpp"

namespace oracle {

namespace {

using Poly = std::vector<double>;  // coefficients, highest degree first

double eval(const Poly& p, double x) {
  double v = 0;
  for (double c : p) v = v * x + c;
  return v;
}

Poly derivative(const Poly& p) {
  Poly d;
  const std::size_t n = p.size() - 1;
  for (std::size_t i = 0; i < n; ++i) d.push_back(p[i] * static_cast<double>(n - i));
  return d;
}

// Monic characteristic polynomial det(xI - A) by Faddeev-LeVerrier.
Poly charpoly(const Rows& A) {
  const std::size_t n = A.size();
  Rows M(n, std::vector<double>(n, 0.0));
  Poly c(n + 1, 0.0);
  c[0] = 1;
  for (std::size_t k = 1; k <= n; ++k) {
    // M_k = A M_{k-1} + c_{k-1} I, with M_0 = 0
    Rows next(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        double s = 0;
        for (std::size_t t = 0; t < n; ++t) s += A[i][t] * M[t][j];
        next[i][j] = s + (i == j ? c[k - 1] : 0.0);
      }
    }
    M = next;
    double tr = 0;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t t = 0; t < n; ++t) tr += A[i][t] * M[t][i];
    }
    c[k] = -tr / static_cast<double>(k);
  }
  return c;
}

double bisect(const Poly& p, double lo, double hi) {
  double flo = eval(p, lo);
  for (int it = 0; it < 400 && hi - lo > 0; ++it) {
    const double mid = lo + (hi - lo) / 2;
    if (mid <= lo || mid >= hi) break;
    const double fm = eval(p, mid);
    if (fm == 0) return mid;
    if ((fm < 0) == (flo < 0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return lo + (hi - lo) / 2;
}

// All real roots of p inside [lo, hi], assuming they are all real. Between
// consecutive critical points p is monotone, so each interval holds at most
// one root.
std::vector<double> real_roots(const Poly& p, double lo, double hi) {
  if (p.size() == 2) return {-p[1] / p[0]};
  auto crit = real_roots(derivative(p), lo, hi);
  std::vector<double> knots{lo};
  for (double c : crit) knots.push_back(std::clamp(c, lo, hi));
  knots.push_back(hi);
  std::sort(knots.begin(), knots.end());
  std::vector<double> roots;
  for (std::size_t i = 0; i + 1 < knots.size(); ++i) {
    const double a = knots[i], b = knots[i + 1];
    const double fa = eval(p, a), fb = eval(p, b);
    if (fa == 0) {
      roots.push_back(a);
    } else if ((fa < 0) != (fb < 0) && fb != 0) {
      roots.push_back(bisect(p, a, b));
    }
  }
  if (eval(p, hi) == 0) roots.push_back(hi);
  // A double root touches zero at a critical point without a sign change.
  const std::size_t degree = p.size() - 1;
  if (roots.size() < degree) {
    for (double c : crit) {
      bool have = false;
      for (double r : roots) have = have || std::fabs(r - c) <= 1e-9 * (1 + std::fabs(c));
      const double scale = std::fabs(eval(derivative(derivative(p)), c)) + 1;
      if (!have && std::fabs(eval(p, c)) <= 1e-12 * scale) roots.push_back(c);
    }
  }
  std::sort(roots.begin(), roots.end());
  return roots;
}

}  // namespace

std::vector<double> symmetric_eigenvalues(const Rows& A) {
  const std::size_t n = A.size();
  if (n == 0 || n > 6) throw std::invalid_argument("oracle handles 1..6 dimensions");
  // Gershgorin bound on the spectrum.
  double bound = 0;
  for (const auto& row : A) {
    double s = 0;
    for (double v : row) s += std::fabs(v);
    bound = std::max(bound, s);
  }
  bound = bound * 1.01 + 1e-12;
  if (n == 1) return {A[0][0]};
  auto roots = real_roots(charpoly(A), -bound, bound);
  std::sort(roots.begin(), roots.end(), std::greater<>());
  return roots;
}

Rows population_covariance(const Rows& X) {
  const std::size_t n = X.size(), d = X[0].size();
  std::vector<double> mean(d, 0.0);
  for (const auto& r : X) {
    for (std::size_t j = 0; j < d; ++j) mean[j] += r[j];
  }
  for (auto& m : mean) m /= static_cast<double>(n);
  Rows C(d, std::vector<double>(d, 0.0));
  for (const auto& r : X) {
    for (std::size_t a = 0; a < d; ++a) {
      for (std::size_t b = 0; b < d; ++b) C[a][b] += (r[a] - mean[a]) * (r[b] - mean[b]);
    }
  }
  for (auto& row : C) {
    for (auto& v : row) v /= static_cast<double>(n);
  }
  return C;
}

}  // namespace oracle
