#include "multispin/quadrature.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "multispin/errors.hpp"

namespace multispin {

namespace {

// Beyond this the standard normal density underflows.
constexpr double kTailCut = 38.5;
constexpr double kPanelWidth = 0.05;
constexpr std::size_t kPanelPoints = 24;

struct Legendre {
  std::vector<double> nodes, weights;  // on [-1, 1]
};

Legendre gauss_legendre(std::size_t n) {
  Legendre out{std::vector<double>(n), std::vector<double>(n)};
  for (std::size_t i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) / (static_cast<double>(n) + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (std::size_t k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / static_cast<double>(k);
        p0 = p1;
        p1 = p2;
      }
      dp = static_cast<double>(n) * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    out.nodes[i] = -x;
    out.nodes[n - 1 - i] = x;
    out.weights[i] = out.weights[n - 1 - i] = w;
  }
  return out;
}

double density(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi); }

QuadratureRule golub_welsch(const std::vector<double>& alpha, const std::vector<double>& beta_sqrt,
                            double mass) {
  const auto d = static_cast<Eigen::Index>(alpha.size());
  Eigen::VectorXd diag(d), sub(std::max<Eigen::Index>(d - 1, 0));
  for (Eigen::Index i = 0; i < d; ++i) diag[i] = alpha[static_cast<std::size_t>(i)];
  for (Eigen::Index i = 0; i + 1 < d; ++i) sub[i] = beta_sqrt[static_cast<std::size_t>(i)];
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
  solver.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
  if (solver.info() != Eigen::Success) throw ConvergenceError("tridiagonal eigensolver failed");
  QuadratureRule rule;
  rule.nodes_per_axis = alpha.size();
  for (Eigen::Index i = 0; i < d; ++i) {
    rule.nodes.push_back(solver.eigenvalues()[i]);
    const double v = solver.eigenvectors()(0, i);
    rule.weights.push_back(mass * v * v);
  }
  return rule;
}

}  // namespace

double gaussian_mass(double lo, double hi) {
  if (!(hi > lo)) return 0.0;
  const double s = 1.0 / std::numbers::sqrt2;
  if (lo >= 0.0) return 0.5 * (std::erfc(lo * s) - std::erfc(hi * s));
  if (hi <= 0.0) return 0.5 * (std::erfc(-hi * s) - std::erfc(-lo * s));
  return 1.0 - 0.5 * std::erfc(hi * s) - 0.5 * std::erfc(-lo * s);
}

QuadratureRule gauss_hermite_rule(std::size_t d) {
  if (d == 0) throw DomainError("quadrature needs at least one node");
  std::vector<double> alpha(d, 0.0), beta_sqrt(d > 0 ? d - 1 : 0);
  for (std::size_t k = 1; k < d; ++k) beta_sqrt[k - 1] = std::sqrt(static_cast<double>(k));
  QuadratureRule rule = golub_welsch(alpha, beta_sqrt, 1.0);
  // Symmetrize so odd moments cancel exactly.
  for (std::size_t i = 0; i < d / 2; ++i) {
    const std::size_t j = d - 1 - i;
    const double x = 0.5 * (rule.nodes[j] - rule.nodes[i]);
    const double w = 0.5 * (rule.weights[i] + rule.weights[j]);
    rule.nodes[i] = -x;
    rule.nodes[j] = x;
    rule.weights[i] = rule.weights[j] = w;
  }
  if (d % 2 == 1) rule.nodes[d / 2] = 0.0;
  double total = 0.0;
  for (double w : rule.weights) total += w;
  for (double& w : rule.weights) w /= total;
  return rule;
}

QuadratureRule restricted_gaussian_rule(std::size_t d, double lo, double hi) {
  if (d == 0) throw DomainError("quadrature needs at least one node");
  const double a = std::max(lo, -kTailCut);
  const double b = std::min(hi, kTailCut);
  if (!(b > a)) throw DomainError("interval carries no Gaussian mass");
  const double mass = gaussian_mass(lo, hi);

  // Discretize the restricted density with composite Gauss-Legendre panels.
  static const Legendre panel = gauss_legendre(kPanelPoints);
  const auto panels = std::max(static_cast<std::size_t>(std::ceil((b - a) / kPanelWidth)),
                               (4 * d + kPanelPoints - 1) / kPanelPoints);
  const double h = (b - a) / static_cast<double>(panels);
  std::vector<double> t, omega;
  t.reserve(panels * kPanelPoints);
  omega.reserve(panels * kPanelPoints);
  for (std::size_t p = 0; p < panels; ++p) {
    const double mid = a + (static_cast<double>(p) + 0.5) * h;
    for (std::size_t i = 0; i < kPanelPoints; ++i) {
      const double x = mid + 0.5 * h * panel.nodes[i];
      const double w = 0.5 * h * panel.weights[i] * density(x);
      if (w > 0.0) {
        t.push_back(x);
        omega.push_back(w);
      }
    }
  }
  double total = 0.0;
  for (double w : omega) total += w;
  for (double& w : omega) w /= total;
  if (t.size() < 2 * d) throw DomainError("interval too narrow for the requested node count");

  // Orthonormal Stieltjes recurrence on the discrete measure.
  std::vector<double> alpha(d), beta_sqrt(d > 0 ? d - 1 : 0);
  std::vector<double> prev(t.size(), 0.0), cur(t.size(), 1.0), next(t.size());
  double prev_b = 0.0;
  for (std::size_t k = 0; k < d; ++k) {
    double a_k = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) a_k += omega[i] * t[i] * cur[i] * cur[i];
    alpha[k] = a_k;
    if (k + 1 == d) break;
    double norm = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) {
      next[i] = (t[i] - a_k) * cur[i] - prev_b * prev[i];
      norm += omega[i] * next[i] * next[i];
    }
    const double b_k = std::sqrt(norm);
    for (std::size_t i = 0; i < t.size(); ++i) next[i] /= b_k;
    beta_sqrt[k] = b_k;
    prev_b = b_k;
    std::swap(prev, cur);
    std::swap(cur, next);
  }
  QuadratureRule rule = golub_welsch(alpha, beta_sqrt, mass);
  rule.breakpoints = {};
  return rule;
}

QuadratureRule piecewise_gaussian_rule(std::size_t d, std::span<const double> breakpoints) {
  std::vector<double> cuts(breakpoints.begin(), breakpoints.end());
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  cuts.erase(std::remove_if(cuts.begin(), cuts.end(),
                            [](double x) { return !std::isfinite(x) || std::abs(x) >= kTailCut - 1.0; }),
             cuts.end());
  if (cuts.empty()) return gauss_hermite_rule(d);
  const std::size_t pieces = cuts.size() + 1;
  const std::size_t per_piece = std::max<std::size_t>(1, (d + pieces - 1) / pieces);
  QuadratureRule rule;
  rule.breakpoints = cuts;
  const double inf = std::numeric_limits<double>::infinity();
  for (std::size_t p = 0; p < pieces; ++p) {
    const double lo = p == 0 ? -inf : cuts[p - 1];
    const double hi = p == cuts.size() ? inf : cuts[p];
    auto part = restricted_gaussian_rule(per_piece, lo, hi);
    rule.nodes.insert(rule.nodes.end(), part.nodes.begin(), part.nodes.end());
    rule.weights.insert(rule.weights.end(), part.weights.begin(), part.weights.end());
  }
  rule.nodes_per_axis = rule.nodes.size();
  return rule;
}

}  // namespace multispin
