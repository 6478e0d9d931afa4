#include "annlab/variability.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "annlab/annihilator.hpp"
#include "annlab/finite_diff.hpp"

namespace annlab::variability {

std::optional<MinimalOdeResult> minimal_ode_order(std::span<const double> ys,
                                                  double spacing,
                                                  int max_order, int degree,
                                                  double tol) {
  if (static_cast<int>(ys.size()) < 4 * max_order + 1)
    throw std::invalid_argument("grid too sparse for requested order");
  if (fd::grid_consistency(ys, spacing, max_order) > 1e-2)
    throw std::runtime_error(
        "unreliable input: finite-difference stencils disagree (noisy or "
        "non-smooth samples)");
  const fd::GridJet jet = fd::grid_jet(ys, spacing, max_order, 4);
  // ODE order starts at 1: constants report order 1 (y' = 0), not a
  // degenerate order-0 "relation in f alone".
  for (int k = 1; k <= max_order; ++k) {
    const std::size_t basis = poly::monomial_basis_size(k + 1, degree);
    if (jet.rows.size() < basis) continue;
    auto fit = annihilator::fit_implicit_relation(jet.rows, k, degree, tol);
    if (!fit) continue;
    MinimalOdeResult res;
    res.order = k;
    res.P = fit->P;
    for (const auto& row : jet.rows) {
      const std::span<const double> head(row.data(),
                                         static_cast<std::size_t>(k + 1));
      res.residual_max =
          std::max(res.residual_max, std::abs(poly::poly_eval(res.P, head)));
    }
    return res;
  }
  return std::nullopt;
}

const char* root_class_name(RootClass c) {
  switch (c) {
    case RootClass::Decaying: return "decaying";
    case RootClass::Growing: return "growing";
    case RootClass::OscillatoryPure: return "oscillatory-pure";
    case RootClass::OscillatoryDamped: return "oscillatory-damped";
    case RootClass::OscillatoryGrowing: return "oscillatory-growing";
    case RootClass::Polynomial: return "polynomial";
  }
  return "?";
}

CompanionSpectrum companion_roots(const std::vector<double>& coeffs) {
  const int n = static_cast<int>(coeffs.size());
  if (n < 1) throw std::invalid_argument("companion degree must be >= 1");
  // p(D) = D^n + c_n D^(n-1) + ... + c_1: c_k multiplies D^(k-1), so the
  // constant coefficient sits at coeffs[0].
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i + 1 < n; ++i) c(i, i + 1) = 1.0;
  for (int k = 0; k < n; ++k) c(n - 1, k) = -coeffs[static_cast<std::size_t>(k)];

  CompanionSpectrum spec;
  spec.coeffs = coeffs;
  Eigen::EigenSolver<Eigen::MatrixXd> es(c);
  for (int i = 0; i < n; ++i)
    spec.roots.push_back(es.eigenvalues()(i));
  std::sort(spec.roots.begin(), spec.roots.end(),
            [](const std::complex<double>& x, const std::complex<double>& y) {
              if (x.real() != y.real()) return x.real() < y.real();
              return x.imag() < y.imag();
            });

  double mag = 0.0;
  for (const auto& r : spec.roots) mag = std::max(mag, std::abs(r));
  const double eps = 1e-9 * (1.0 + mag);
  for (const auto& r : spec.roots) {
    const bool re0 = std::abs(r.real()) < eps;
    const bool im0 = std::abs(r.imag()) < eps;
    if (re0 && im0)
      spec.class_labels.push_back(RootClass::Polynomial);
    else if (im0)
      spec.class_labels.push_back(r.real() > 0 ? RootClass::Growing
                                               : RootClass::Decaying);
    else if (re0)
      spec.class_labels.push_back(RootClass::OscillatoryPure);
    else
      spec.class_labels.push_back(r.real() > 0 ? RootClass::OscillatoryGrowing
                                               : RootClass::OscillatoryDamped);
  }
  return spec;
}

InertiaSignature inertia_signature(const Eigen::MatrixXd& a) {
  if (a.rows() != a.cols()) throw std::invalid_argument("matrix not square");
  InertiaSignature sig;
  Eigen::MatrixXd s = a;
  const double norm = a.norm();
  if ((a - a.transpose()).norm() > 1e-12 * std::max(norm, 1.0)) {
    s = 0.5 * (a + a.transpose());
    sig.symmetrized_input = true;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(s);
  const auto& ev = es.eigenvalues();
  const double spectral = ev.cwiseAbs().maxCoeff();
  const double eps = 1e-10 * (1.0 + spectral);
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    if (ev(i) > eps)
      ++sig.n_plus;
    else if (ev(i) < -eps)
      ++sig.n_minus;
    else
      ++sig.n_zero;
  }
  return sig;
}

QuadraticClass quadratic_ode_class(const MultiPoly& q) {
  if (q.degree() > 2)
    throw std::invalid_argument("polynomial degree exceeds 2");
  const int n = q.n_vars();
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  for (const auto& [e, c] : q.terms()) {
    if (poly::total_degree(e) != 2) continue;
    int i = -1, j = -1;
    for (int v = 0; v < n; ++v) {
      if (e[static_cast<std::size_t>(v)] == 2) { i = j = v; break; }
      if (e[static_cast<std::size_t>(v)] == 1) { (i < 0 ? i : j) = v; }
    }
    if (i == j) {
      a(i, i) = c;
    } else {
      a(i, j) = c / 2.0;
      a(j, i) = c / 2.0;
    }
  }
  QuadraticClass cls;
  cls.signature = inertia_signature(a);
  cls.linear = a.isZero(0.0);
  for (int i = 0; i < cls.signature.n_plus; ++i) cls.pattern.push_back(1);
  for (int i = 0; i < cls.signature.n_minus; ++i) cls.pattern.push_back(-1);
  for (int i = 0; i < cls.signature.n_zero; ++i) cls.pattern.push_back(0);
  return cls;
}

TrajectoryBundle integrate_class_trajectories(int eps0, int eps1, int eps2,
                                              std::span<const double> y0s,
                                              double t_end, double step,
                                              double blowup_guard) {
  if (step <= 0.0) throw std::invalid_argument("step must be positive");
  TrajectoryBundle bundle;
  bundle.eps0 = eps0;
  bundle.eps1 = eps1;
  bundle.eps2 = eps2;
  auto rhs = [&](double y) {
    return static_cast<double>(eps0) + eps1 * y + eps2 * y * y;
  };
  for (double y0 : y0s) {
    Trajectory tr;
    tr.y0 = y0;
    double y = y0, t = 0.0;
    tr.t.push_back(t);
    tr.y.push_back(y);
    while (t < t_end - step / 2.0) {
      const double k1 = rhs(y);
      const double k2 = rhs(y + step / 2.0 * k1);
      const double k3 = rhs(y + step / 2.0 * k2);
      const double k4 = rhs(y + step * k3);
      y += step / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      t += step;
      if (!std::isfinite(y) || std::abs(y) > blowup_guard) {
        tr.blowup_time = t;
        break;
      }
      tr.t.push_back(t);
      tr.y.push_back(y);
    }
    bundle.trajectories.push_back(std::move(tr));
  }
  return bundle;
}

DeficitReport common_annihilator(
    const std::vector<std::vector<double>>& blocks, double spacing,
    int max_order, double tol) {
  if (blocks.empty()) throw std::invalid_argument("no blocks");
  if (max_order < 1) throw std::invalid_argument("max_order must be >= 1");
  DeficitReport rep;
  rep.max_order_tested = max_order;

  std::vector<fd::GridJet> jets;
  std::size_t rows = 0;
  for (const auto& block : blocks) {
    if (fd::grid_consistency(block, spacing, max_order) > 1e-2)
      throw std::runtime_error(
          "unreliable input: finite-difference stencils disagree");
    jets.push_back(fd::grid_jet(block, spacing, max_order, 4));
    rows += jets.back().rows.size();
  }

  const Eigen::Index cols = max_order + 1;
  Eigen::MatrixXd a(static_cast<Eigen::Index>(rows), cols);
  Eigen::Index r = 0;
  for (const auto& jet : jets)
    for (const auto& row : jet.rows) {
      for (Eigen::Index k = 0; k < cols; ++k)
        a(r, k) = row[static_cast<std::size_t>(k)];
      ++r;
    }
  Eigen::VectorXd scale(cols);
  for (Eigen::Index k = 0; k < cols; ++k) {
    const double nrm = a.col(k).norm();
    scale(k) = nrm > 0.0 ? nrm : 1.0;
    a.col(k) /= scale(k);
  }
  Eigen::BDCSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  if (!(sv(sv.size() - 1) < tol * sv(0))) return rep;

  Eigen::VectorXd v = svd.matrixV().col(cols - 1);
  for (Eigen::Index k = 0; k < cols; ++k) v(k) /= scale(k);
  // effective order: highest derivative with non-negligible weight
  Eigen::Index top = 0;
  const double vmax = v.cwiseAbs().maxCoeff();
  for (Eigen::Index k = 0; k < cols; ++k)
    if (std::abs(v(k)) > 1e-6 * vmax) top = k;
  if (top == 0) return rep;  // degenerate: relation in f alone
  v /= v(top);

  rep.operator_order = static_cast<int>(top);
  std::vector<double> op;
  for (Eigen::Index k = 0; k < top; ++k) op.push_back(v(k));  // c_1..c_r
  rep.op = op;

  for (const auto& jet : jets) {
    double worst = 0.0;
    for (const auto& row : jet.rows) {
      double s = row[static_cast<std::size_t>(top)];
      for (Eigen::Index k = 0; k < top; ++k)
        s += v(k) * row[static_cast<std::size_t>(k)];
      worst = std::max(worst, std::abs(s));
    }
    rep.per_block_residuals.push_back(worst);
  }
  return rep;
}

int elias_gamma_bits(std::uint64_t k) {
  if (k == 0) throw std::invalid_argument("Elias gamma needs k >= 1");
  int bits = 0;
  while (k >> (bits + 1)) ++bits;  // floor(log2 k)
  return 2 * bits + 1;
}

int ode_description_length(const MultiPoly& p, int coeff_precision_bits) {
  if (p.is_zero()) throw std::invalid_argument("zero polynomial");
  if (coeff_precision_bits < 1)
    throw std::invalid_argument("precision must be >= 1 bit");
  int bits = elias_gamma_bits(static_cast<std::uint64_t>(p.n_vars())) +
             elias_gamma_bits(p.term_count());
  for (const auto& [e, c] : p.terms()) {
    for (int k : e)
      bits += elias_gamma_bits(static_cast<std::uint64_t>(k) + 1);
    bits += coeff_precision_bits;
  }
  return bits;
}

}  // namespace annlab::variability
