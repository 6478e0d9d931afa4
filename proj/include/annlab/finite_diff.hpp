#pragma once

// Finite-difference derivative machinery shared by the annihilator
// verification path and the sampled-function classifiers. Central
// stencils (Fornberg weights), optional Richardson extrapolation,
// and a dual-width consistency check for sampled grids.

#include <functional>
#include <span>
#include <vector>

namespace annlab::fd {

// Fornberg weights: applied to f(nodes[i]) they approximate f^(order)(x0).
std::vector<double> stencil_weights(std::span<const double> nodes, double x0,
                                    int order);

// Symmetric central stencil offsets (in grid units) for the k-th
// derivative at the stated even accuracy order.
std::vector<int> central_offsets(int deriv_order, int accuracy);

// k-th derivative of a callable at x: central stencil of the given
// accuracy, Richardson-extrapolated from steps h and h/2.
double derivative(const std::function<double(double)>& f, double x,
                  int deriv_order, double h, int accuracy = 2);

// Derivatives of a uniformly sampled function at every grid point where
// the stencil fits. rows[i] = (f, f', ..., f^(max_order)) at grid index
// indices[i].
struct GridJet {
  std::vector<int> indices;
  std::vector<std::vector<double>> rows;
};

GridJet grid_jet(std::span<const double> ys, double spacing, int max_order,
                 int accuracy = 4);

// Max discrepancy between accuracy-2 and accuracy-4 stencils over the
// shared interior, per derivative order; used to reject noisy input.
double grid_consistency(std::span<const double> ys, double spacing,
                        int max_order);

}  // namespace annlab::fd
