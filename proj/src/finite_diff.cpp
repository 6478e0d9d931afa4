#include "annlab/finite_diff.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace annlab::fd {

// Fornberg (1988) recurrence for arbitrary-node differentiation weights.
std::vector<double> stencil_weights(std::span<const double> nodes, double x0,
                                    int order) {
  const int n = static_cast<int>(nodes.size());
  if (n < order + 1)
    throw std::invalid_argument("stencil has too few nodes for order");
  const int m = order;
  std::vector<std::vector<double>> delta(
      static_cast<std::size_t>(m + 1),
      std::vector<double>(static_cast<std::size_t>(n), 0.0));
  delta[0][0] = 1.0;
  double c1 = 1.0;
  for (int i = 1; i < n; ++i) {
    double c2 = 1.0;
    const double xi = nodes[i] - x0;
    const int mn = std::min(i, m);
    for (int j = 0; j < i; ++j) {
      const double xj = nodes[j] - x0;
      const double c3 = xi - xj;
      c2 *= c3;
      if (j == i - 1) {
        for (int k = mn; k >= 1; --k)
          delta[k][i] = c1 * (k * delta[k - 1][i - 1] - xj * delta[k][i - 1]) / c2;
        delta[0][i] = -c1 * xj * delta[0][i - 1] / c2;
      }
      for (int k = mn; k >= 1; --k)
        delta[k][j] = (xi * delta[k][j] - k * delta[k - 1][j]) / c3;
      delta[0][j] = xi * delta[0][j] / c3;
    }
    c1 = c2;
  }
  return delta[m];
}

std::vector<int> central_offsets(int deriv_order, int accuracy) {
  if (deriv_order < 0) throw std::invalid_argument("negative derivative order");
  if (accuracy < 2 || accuracy % 2 != 0)
    throw std::invalid_argument("accuracy must be a positive even integer");
  const int p = (deriv_order + 1) / 2 - 1 + accuracy / 2;
  std::vector<int> off;
  for (int j = -p; j <= p; ++j) off.push_back(j);
  return off;
}

namespace {

double apply_stencil(const std::function<double(double)>& f, double x,
                     int deriv_order, double h, int accuracy) {
  const auto off = central_offsets(deriv_order, accuracy);
  std::vector<double> nodes(off.size());
  for (std::size_t i = 0; i < off.size(); ++i) nodes[i] = x + off[i] * h;
  const auto w = stencil_weights(nodes, x, deriv_order);
  double s = 0.0;
  for (std::size_t i = 0; i < off.size(); ++i) s += w[i] * f(nodes[i]);
  return s;
}

}  // namespace

double derivative(const std::function<double(double)>& f, double x,
                  int deriv_order, double h, int accuracy) {
  if (deriv_order == 0) return f(x);
  const double coarse = apply_stencil(f, x, deriv_order, h, accuracy);
  const double fine = apply_stencil(f, x, deriv_order, h / 2.0, accuracy);
  // central stencils have even error expansions: one Richardson step
  // lifts accuracy p to p+2
  const double factor = std::pow(2.0, accuracy);
  return (factor * fine - coarse) / (factor - 1.0);
}

GridJet grid_jet(std::span<const double> ys, double spacing, int max_order,
                 int accuracy) {
  if (spacing <= 0.0) throw std::invalid_argument("grid spacing must be > 0");
  const int n = static_cast<int>(ys.size());
  const auto widest = central_offsets(max_order, accuracy);
  const int p = widest.back();
  if (n < 2 * p + 1)
    throw std::invalid_argument("grid too short for requested stencil");

  // per-order weights at unit spacing, rescaled by spacing^-k
  std::vector<std::vector<double>> weights(
      static_cast<std::size_t>(max_order + 1));
  std::vector<std::vector<int>> offs(static_cast<std::size_t>(max_order + 1));
  for (int k = 0; k <= max_order; ++k) {
    offs[k] = central_offsets(k, accuracy);
    std::vector<double> nodes(offs[k].size());
    for (std::size_t i = 0; i < offs[k].size(); ++i)
      nodes[i] = static_cast<double>(offs[k][i]);
    weights[k] = stencil_weights(nodes, 0.0, k);
    const double scale = std::pow(spacing, -k);
    for (double& w : weights[k]) w *= scale;
  }

  GridJet jet;
  for (int i = p; i < n - p; ++i) {
    std::vector<double> row(static_cast<std::size_t>(max_order + 1));
    for (int k = 0; k <= max_order; ++k) {
      double s = 0.0;
      for (std::size_t j = 0; j < offs[k].size(); ++j)
        s += weights[k][j] * ys[static_cast<std::size_t>(i + offs[k][j])];
      row[static_cast<std::size_t>(k)] = s;
    }
    jet.indices.push_back(i);
    jet.rows.push_back(std::move(row));
  }
  return jet;
}

double grid_consistency(std::span<const double> ys, double spacing,
                        int max_order) {
  const GridJet coarse = grid_jet(ys, spacing, max_order, 2);
  const GridJet fine = grid_jet(ys, spacing, max_order, 4);
  // align on shared indices (fine interior is a subset of coarse's)
  double worst = 0.0;
  std::size_t ci = 0;
  for (std::size_t fi = 0; fi < fine.indices.size(); ++fi) {
    while (ci < coarse.indices.size() && coarse.indices[ci] < fine.indices[fi])
      ++ci;
    if (ci == coarse.indices.size()) break;
    if (coarse.indices[ci] != fine.indices[fi]) continue;
    for (int k = 1; k <= max_order; ++k) {
      const double a = coarse.rows[ci][static_cast<std::size_t>(k)];
      const double b = fine.rows[fi][static_cast<std::size_t>(k)];
      worst = std::max(worst, std::abs(a - b) / (1.0 + std::abs(b)));
    }
  }
  return worst;
}

}  // namespace annlab::fd
