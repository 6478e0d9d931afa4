#pragma once

// Computational realization of the differential-annihilator pipeline for
// tanh/sigmoid MLPs: the polynomial vector field governing the stacked
// hidden activations, the Lie-derivative jet chain giving output
// derivatives as polynomials of the hidden state, numerical discovery of
// an annihilating polynomial by SVD nullspace fitting, equilibrium
// (constant-solution) enumeration, and exponential saturation fits at
// the training-domain boundary.

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "annlab/net.hpp"
#include "annlab/poly.hpp"

namespace annlab::annihilator {

using poly::MultiPoly;

struct HiddenVectorField {
  int n_vars = 0;  // M, total hidden width
  net::Activation activation = net::Activation::Tanh;
  std::vector<MultiPoly> components;   // dY_i/dx as polynomials in Y
  std::vector<int> layer_offsets;      // start of each layer's Y-block
};

// Capacity error if M exceeds cap: the downstream elimination is meant
// for small probe nets.
HiddenVectorField hidden_vector_field(const net::NetworkParams& net,
                                      int cap = 8);

struct JetChain {
  HiddenVectorField field;
  std::vector<MultiPoly> jets;  // H[0]..H[k_max]; H[k](Y(x)) = f^(k)(x)
  std::optional<net::NetworkParams> source;  // enables dynamics sampling
};

JetChain jet_chain(const HiddenVectorField& field,
                   const Eigen::VectorXd& alpha, double beta, int k_max,
                   std::size_t term_budget = 2000000);
JetChain jet_chain(const net::NetworkParams& net, int k_max,
                   int cap = 8);

// Shared implicit-relation fitter: rows are jet tuples (t_0..t_order);
// fits a unit-norm polynomial in monomial_basis(order+1, degree)
// vanishing on the rows, accepting when the trailing singular value of
// the column-scaled evaluation matrix drops below tol * leading.
struct FitResult {
  MultiPoly P{1};                     // unit coefficient norm
  double sigma_ratio = 0.0;           // trailing/leading singular value
  std::vector<double> singular_tail;  // up to 5 trailing ratios
};

std::optional<FitResult> fit_implicit_relation(
    const std::vector<std::vector<double>>& tuples, int order, int degree,
    double tol);

struct RelationResult {
  MultiPoly P{1};  // unit coefficient norm, variables T0..T_order
  double residual_max = 0.0;   // over a fresh verification sample
  double residual_mean = 0.0;
  double sigma_ratio = 0.0;
  std::vector<double> singular_tail;
};

// Samples jet tuples, fits, and re-checks on a fresh sample. When the
// chain carries its source net, tuples come from the hidden trajectory
// Y(x) (mixed near/far inputs) plus the exact saturation equilibria, so
// the relation is anchored where the dynamics actually live; otherwise
// the activation-range box (margin 0.05 per side) is sampled. Returns
// nothing when no candidate passes both the singular-value gate and the
// fresh-sample residual check (< 10*tol).
std::optional<RelationResult> find_relation(const JetChain& chain, int order,
                                            int degree, int samples,
                                            double tol, std::uint64_t seed);

struct Saturation {
  double f_inf = 0.0;
  double kappa = 0.0;   // decay rate; +inf sentinel when constant
  double log_c = 0.0;
  double r2 = 0.0;
  bool constant = false;
};

struct SaturationProfile {
  Saturation left;   // x below the training domain
  Saturation right;  // x above
};

// Probes f on [b, b + probe_multiplier*(b-a)] (and the mirrored left
// side) and fits log|f - f_inf| against distance beyond the border.
SaturationProfile saturation_profile(const std::function<double(double)>& f,
                                     double a, double b,
                                     double probe_multiplier, int grid);

// Equilibrium constants: every first-layer saturation vector propagated
// through the remaining layers. Sorted, near-duplicates merged.
std::vector<double> constant_solutions(const net::NetworkParams& net,
                                       int first_layer_cap = 16);

struct VerifyReport {
  double residual_max = 0.0;
  double residual_mean = 0.0;
  bool trimmed = false;  // grid points dropped near the domain ends
};

// Independent of the discovery path: derivatives come from
// Richardson-extrapolated central differences, not the jet chain.
VerifyReport verify_annihilator(
    const MultiPoly& P, const std::function<double(double)>& f,
    std::span<const double> x_grid, double fd_step,
    std::optional<std::pair<double, double>> domain = std::nullopt);

struct SweepOptions {
  int degree_cap = 4;
  double tol = 1e-8;
  int samples_factor = 5;  // samples = factor * basis size
  std::uint64_t seed = 0;
  int m_cap = 8;
};

struct AnnihilatorReport {
  bool found = false;
  int order = -1;
  int degree = -1;
  MultiPoly P{1};
  double residual_max = 0.0;
  std::vector<double> singular_tail;
  std::vector<double> constants;
};

// Order/degree sweep (order 0..M, degree 1..cap), first success wins;
// the reported order is the first at which the fit succeeds, with no
// minimality certificate.
AnnihilatorReport minimal_annihilator(const net::NetworkParams& net,
                                      const SweepOptions& opts = {});

}  // namespace annlab::annihilator
