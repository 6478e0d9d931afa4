#pragma once

// Structural-variability measures for ODE classes: minimal polynomial-ODE
// order of sampled functions, companion-polynomial root spectra for
// linear constant-coefficient ODEs, Sylvester inertia classification of
// quadratic forms, canonical quadratic-class trajectory integration,
// common-annihilator (variability-deficit) detection, and a bit-count
// description length for annihilating ODEs.

#include <Eigen/Dense>
#include <complex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "annlab/poly.hpp"

namespace annlab::variability {

using poly::MultiPoly;

// --- Minimal ODE order of a uniformly sampled function ---------------------

struct MinimalOdeResult {
  int order = -1;
  MultiPoly P{1};  // unit coefficient norm, variables T0..T_order
  double residual_max = 0.0;
};

// Derivatives via central differences (accuracy 4), relation fitting via
// the shared SVD nullspace oracle. Throws on FD inconsistency between
// stencil accuracies (noisy / non-smooth input).
std::optional<MinimalOdeResult> minimal_ode_order(std::span<const double> ys,
                                                  double spacing,
                                                  int max_order, int degree,
                                                  double tol = 1e-8);

// --- Companion polynomial spectrum ------------------------------------------

enum class RootClass {
  Decaying,
  Growing,
  OscillatoryPure,
  OscillatoryDamped,
  OscillatoryGrowing,
  Polynomial,  // zero root (possibly multiple)
};

const char* root_class_name(RootClass c);

struct CompanionSpectrum {
  // p(D) = D^n + c_n D^(n-1) + ... + c_1; coeffs[k-1] holds c_k, so the
  // constant coefficient is coeffs[0]. (Indexing follows the companion
  // convention where subscripts count up from the constant term.)
  std::vector<double> coeffs;
  std::vector<std::complex<double>> roots;  // sorted by (real, imag)
  std::vector<RootClass> class_labels;
};

CompanionSpectrum companion_roots(const std::vector<double>& coeffs);

// --- Sylvester inertia -------------------------------------------------------

struct InertiaSignature {
  int n_plus = 0;
  int n_minus = 0;
  int n_zero = 0;
  bool symmetrized_input = false;  // input failed the symmetry check

  bool operator==(const InertiaSignature& o) const {
    return n_plus == o.n_plus && n_minus == o.n_minus && n_zero == o.n_zero;
  }
};

InertiaSignature inertia_signature(const Eigen::MatrixXd& a);

struct QuadraticClass {
  InertiaSignature signature;      // of the degree-2 part
  std::vector<int> pattern;        // diagonalized coefficients in {-1,0,1}
  bool linear = false;             // zero quadratic part
};

QuadraticClass quadratic_ode_class(const MultiPoly& q);

// --- Canonical quadratic-class trajectories ---------------------------------

struct Trajectory {
  double y0 = 0.0;
  std::vector<double> t;
  std::vector<double> y;
  std::optional<double> blowup_time;
};

struct TrajectoryBundle {
  int eps0 = 0, eps1 = 0, eps2 = 0;  // y' = eps0 + eps1*y + eps2*y^2
  std::vector<Trajectory> trajectories;
};

TrajectoryBundle integrate_class_trajectories(int eps0, int eps1, int eps2,
                                              std::span<const double> y0s,
                                              double t_end, double step,
                                              double blowup_guard = 1e6);

// --- Common annihilator (variability deficit) -------------------------------

struct DeficitReport {
  int max_order_tested = 0;
  int operator_order = 0;                 // effective order when found
  std::optional<std::vector<double>> op;  // c_1..c_r of the monic operator
  std::vector<double> per_block_residuals;
};

DeficitReport common_annihilator(
    const std::vector<std::vector<double>>& blocks, double spacing,
    int max_order, double tol = 1e-8);

// --- Description length ------------------------------------------------------

// Elias-gamma code length of a positive integer.
int elias_gamma_bits(std::uint64_t k);

// Bits to encode P: gamma(n_vars) + gamma(term count) + per term
// (gamma(exponent+1) for each variable + coeff_precision_bits).
int ode_description_length(const MultiPoly& p, int coeff_precision_bits);

}  // namespace annlab::variability
