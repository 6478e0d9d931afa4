#include "annlab/annihilator.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "annlab/finite_diff.hpp"
#include "annlab/rng.hpp"

namespace annlab::annihilator {

namespace {

// P(y) = 1 - y^2 for tanh, y(1 - y) for sigmoid: the derivative of the
// activation expressed through its own value.
MultiPoly activation_rate(net::Activation act, int n_vars, int var) {
  MultiPoly p(n_vars);
  poly::Exponents e(n_vars, 0);
  if (act == net::Activation::Tanh) {
    p.add_term(e, 1.0);
    e[var] = 2;
    p.add_term(e, -1.0);
  } else {
    e[var] = 1;
    p.add_term(e, 1.0);
    e[var] = 2;
    p.add_term(e, -1.0);
  }
  return p;
}

}  // namespace

HiddenVectorField hidden_vector_field(const net::NetworkParams& net, int cap) {
  net.validate();
  const int m = net.hidden_size();
  if (m > cap)
    throw std::runtime_error(
        "hidden width M=" + std::to_string(m) + " exceeds cap " +
        std::to_string(cap) + "; use a smaller probe net");
  HiddenVectorField field;
  field.n_vars = m;
  field.activation = net.activation;
  int offset = 0;
  for (const auto& w : net.weights) {
    field.layer_offsets.push_back(offset);
    offset += static_cast<int>(w.rows());
  }
  // layer 1: dY_j/dx = w_j * P(Y_j)
  for (Eigen::Index j = 0; j < net.weights[0].rows(); ++j) {
    field.components.push_back(
        activation_rate(net.activation, m, static_cast<int>(j))
            .scaled(net.weights[0](j, 0)));
  }
  // layer l >= 2: dY_g/dx = Q(Y_g) * sum_j W(k,j) dY_prev_j/dx
  for (std::size_t l = 1; l < net.weights.size(); ++l) {
    const int prev_off = field.layer_offsets[l - 1];
    const int cur_off = field.layer_offsets[l];
    for (Eigen::Index k = 0; k < net.weights[l].rows(); ++k) {
      MultiPoly inner(m);
      for (Eigen::Index j = 0; j < net.weights[l].cols(); ++j) {
        const double w = net.weights[l](k, j);
        if (w == 0.0) continue;
        inner = poly_add(inner,
                         field.components[static_cast<std::size_t>(prev_off + j)]
                             .scaled(w));
      }
      field.components.push_back(poly_mul(
          activation_rate(net.activation, m, cur_off + static_cast<int>(k)),
          inner));
    }
  }
  return field;
}

JetChain jet_chain(const HiddenVectorField& field, const Eigen::VectorXd& alpha,
                   double beta, int k_max, std::size_t term_budget) {
  JetChain chain;
  chain.field = field;
  const int m = field.n_vars;
  const int last_off = field.layer_offsets.back();
  if (last_off + alpha.size() != m)
    throw std::invalid_argument("readout size does not match last layer");
  MultiPoly h = MultiPoly::constant(m, beta);
  for (Eigen::Index i = 0; i < alpha.size(); ++i) {
    if (alpha(i) != 0.0)
      h = poly_add(h, MultiPoly::variable(m, last_off + static_cast<int>(i))
                          .scaled(alpha(i)));
  }
  chain.jets.push_back(h);
  for (int k = 0; k < k_max; ++k) {
    MultiPoly next(m);
    for (int i = 0; i < m; ++i) {
      MultiPoly d = poly_partial(chain.jets.back(), i);
      if (d.is_zero()) continue;
      next = poly_add(next, poly_mul(d, field.components[static_cast<std::size_t>(i)]));
    }
    if (next.term_count() > term_budget)
      throw std::runtime_error("jet H[" + std::to_string(k + 1) +
                               "] exceeds the term budget");
    chain.jets.push_back(std::move(next));
  }
  return chain;
}

JetChain jet_chain(const net::NetworkParams& net, int k_max, int cap) {
  JetChain chain =
      jet_chain(hidden_vector_field(net, cap), net.alpha, net.beta, k_max);
  chain.source = net;
  return chain;
}

std::optional<FitResult> fit_implicit_relation(
    const std::vector<std::vector<double>>& tuples, int order, int degree,
    double tol) {
  if (tol <= 0.0) throw std::invalid_argument("tol must be positive");
  const auto basis = poly::monomial_basis(order + 1, degree);
  const Eigen::Index b = static_cast<Eigen::Index>(basis.size());
  const Eigen::Index n = static_cast<Eigen::Index>(tuples.size());
  if (n < b)
    throw std::invalid_argument("underdetermined: " + std::to_string(n) +
                                " samples for a basis of " +
                                std::to_string(b));
  Eigen::MatrixXd a(n, b);
  for (Eigen::Index s = 0; s < n; ++s) {
    const auto& t = tuples[static_cast<std::size_t>(s)];
    if (static_cast<int>(t.size()) < order + 1)
      throw std::invalid_argument("tuple shorter than order+1");
    for (Eigen::Index m = 0; m < b; ++m) {
      double v = 1.0;
      const auto& e = basis[static_cast<std::size_t>(m)];
      for (int k = 0; k <= order; ++k)
        for (int rep = 0; rep < e[static_cast<std::size_t>(k)]; ++rep)
          v *= t[static_cast<std::size_t>(k)];
      a(s, m) = v;
    }
  }
  Eigen::VectorXd scale(b);
  for (Eigen::Index m = 0; m < b; ++m) {
    const double nrm = a.col(m).norm();
    scale(m) = nrm > 0.0 ? nrm : 1.0;
    a.col(m) /= scale(m);
  }
  Eigen::BDCSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  const double s_max = sv(0);
  const double s_min = sv(sv.size() - 1);
  FitResult fit;
  const int tail = static_cast<int>(std::min<Eigen::Index>(5, sv.size()));
  for (int i = tail; i >= 1; --i)
    fit.singular_tail.push_back(sv(sv.size() - i) / s_max);
  fit.sigma_ratio = s_min / s_max;
  if (!(s_min < tol * s_max)) return std::nullopt;

  Eigen::VectorXd coeffs = svd.matrixV().col(sv.size() - 1);
  for (Eigen::Index m = 0; m < b; ++m) coeffs(m) /= scale(m);
  coeffs /= coeffs.norm();
  // sign convention: largest-magnitude coefficient positive
  Eigen::Index imax = 0;
  coeffs.cwiseAbs().maxCoeff(&imax);
  if (coeffs(imax) < 0.0) coeffs = -coeffs;

  MultiPoly p(order + 1);
  for (Eigen::Index m = 0; m < b; ++m)
    if (coeffs(m) != 0.0) p.add_term(basis[static_cast<std::size_t>(m)], coeffs(m));
  fit.P = p;
  return fit;
}

namespace {

std::pair<double, double> sampling_range(net::Activation act) {
  // activation range shrunk by margin 0.05 per side
  if (act == net::Activation::Tanh) return {-0.95, 0.95};
  return {0.05, 0.95};
}

std::vector<std::vector<double>> sample_jet_tuples(const JetChain& chain,
                                                   int order, int samples,
                                                   std::uint64_t stream) {
  const int m = chain.field.n_vars;
  const auto [lo, hi] = sampling_range(chain.field.activation);
  std::mt19937_64 eng(stream);
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<std::vector<double>> tuples;
  tuples.reserve(static_cast<std::size_t>(samples));
  std::vector<double> y(static_cast<std::size_t>(m));
  for (int s = 0; s < samples; ++s) {
    for (double& v : y) v = u(eng);
    std::vector<double> t(static_cast<std::size_t>(order + 1));
    for (int k = 0; k <= order; ++k)
      t[static_cast<std::size_t>(k)] =
          poly_eval(chain.jets[static_cast<std::size_t>(k)], y);
    tuples.push_back(std::move(t));
  }
  return tuples;
}

// Full hidden-state vectors at the 2^{m1} first-layer saturation limits.
// These are limit points of the trajectory image, so any honest relation
// must vanish at (c, 0, ..., 0); including them anchors the fit there.
std::vector<std::vector<double>> equilibrium_states(
    const net::NetworkParams& net) {
  const int m1 = static_cast<int>(net.weights[0].rows());
  const double lo = net.activation == net::Activation::Tanh ? -1.0 : 0.0;
  std::vector<std::vector<double>> states;
  if (m1 > 16) return states;
  for (std::uint64_t mask = 0; mask < (1ULL << m1); ++mask) {
    Eigen::VectorXd s(m1);
    for (int j = 0; j < m1; ++j) s(j) = (mask >> j) & 1 ? 1.0 : lo;
    std::vector<double> y(s.data(), s.data() + s.size());
    for (std::size_t l = 1; l < net.weights.size(); ++l) {
      Eigen::VectorXd z = net.weights[l] * s + net.biases[l];
      s.resize(z.size());
      for (Eigen::Index i = 0; i < z.size(); ++i)
        s(i) = net::activate(net.activation, z(i));
      y.insert(y.end(), s.data(), s.data() + s.size());
    }
    states.push_back(std::move(y));
  }
  return states;
}

std::vector<double> jets_at(const JetChain& chain, int order,
                            const std::vector<double>& y) {
  std::vector<double> t(static_cast<std::size_t>(order + 1));
  for (int k = 0; k <= order; ++k)
    t[static_cast<std::size_t>(k)] =
        poly_eval(chain.jets[static_cast<std::size_t>(k)], y);
  return t;
}

// Jets evaluated along the actual hidden trajectory Y(x) of the source
// net, mixing near-origin and far-field inputs so both the active region
// and the saturation tails constrain the fit; the saturation equilibria
// themselves are appended exactly.
std::vector<std::vector<double>> sample_dynamics_tuples(const JetChain& chain,
                                                        int order, int samples,
                                                        std::uint64_t stream) {
  const net::NetworkParams& src = *chain.source;
  const int m = chain.field.n_vars;
  std::mt19937_64 eng(stream);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  static constexpr double kRanges[4] = {5.0, 5.0, 20.0, 100.0};
  std::vector<std::vector<double>> tuples;
  tuples.reserve(static_cast<std::size_t>(samples) + 16);
  std::vector<double> y(static_cast<std::size_t>(m));
  for (int s = 0; s < samples; ++s) {
    const double x = kRanges[s % 4] * u(eng);
    const auto trace = net::forward(src, x);
    std::size_t off = 0;
    for (const auto& h : trace.hidden) {
      for (Eigen::Index i = 0; i < h.size(); ++i) y[off++] = h(i);
    }
    tuples.push_back(jets_at(chain, order, y));
  }
  for (const auto& eq : equilibrium_states(src))
    tuples.push_back(jets_at(chain, order, eq));
  return tuples;
}

double tuple_residual_max(const MultiPoly& p,
                          const std::vector<std::vector<double>>& tuples,
                          double* mean_out) {
  double worst = 0.0, sum = 0.0;
  for (const auto& t : tuples) {
    const double r = std::abs(poly_eval(p, t));
    worst = std::max(worst, r);
    sum += r;
  }
  if (mean_out) *mean_out = tuples.empty() ? 0.0 : sum / tuples.size();
  return worst;
}

}  // namespace

std::optional<RelationResult> find_relation(const JetChain& chain, int order,
                                            int degree, int samples,
                                            double tol, std::uint64_t seed) {
  if (order > static_cast<int>(chain.jets.size()) - 1)
    throw std::invalid_argument("order exceeds chain length - 1");
  const bool dynamics = chain.source.has_value();
  const auto tuples =
      dynamics
          ? sample_dynamics_tuples(chain, order, samples,
                                   rng::split(seed, "fit"))
          : sample_jet_tuples(chain, order, samples, rng::split(seed, "fit"));
  auto fit = fit_implicit_relation(tuples, order, degree, tol);
  if (!fit) return std::nullopt;

  const auto fresh =
      dynamics ? sample_dynamics_tuples(chain, order, samples,
                                        rng::split(seed, "verify"))
               : sample_jet_tuples(chain, order, samples,
                                   rng::split(seed, "verify"));
  RelationResult res;
  res.residual_max = tuple_residual_max(fit->P, fresh, &res.residual_mean);
  if (res.residual_max >= 10.0 * tol) return std::nullopt;
  res.P = std::move(fit->P);
  res.sigma_ratio = fit->sigma_ratio;
  res.singular_tail = std::move(fit->singular_tail);
  return res;
}

SaturationProfile saturation_profile(const std::function<double(double)>& f,
                                     double a, double b,
                                     double probe_multiplier, int grid) {
  if (!(b > a)) throw std::invalid_argument("domain must satisfy b > a");
  if (!(probe_multiplier > 1.0))
    throw std::invalid_argument("probe_multiplier must exceed 1");
  if (grid < 4) throw std::invalid_argument("grid too small");
  const double span = probe_multiplier * (b - a);

  auto fit_side = [&](double border, int direction) {
    Saturation sat;
    std::vector<double> dist, dev;
    const double far = border + direction * span;
    sat.f_inf = f(far);
    for (int i = 0; i < grid; ++i) {
      const double d = span * static_cast<double>(i) / (grid - 1);
      const double v = std::abs(f(border + direction * d) - sat.f_inf);
      if (v > 1e-12) {
        dist.push_back(d);
        dev.push_back(std::log(v));
      }
    }
    if (dist.size() < 2) {
      sat.constant = true;
      sat.kappa = std::numeric_limits<double>::infinity();
      sat.r2 = 1.0;
      return sat;
    }
    // least squares log|f - f_inf| = log C - kappa * d
    const double n = static_cast<double>(dist.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < dist.size(); ++i) {
      sx += dist[i];
      sy += dev[i];
      sxx += dist[i] * dist[i];
      sxy += dist[i] * dev[i];
    }
    const double denom = n * sxx - sx * sx;
    const double slope = (n * sxy - sx * sy) / denom;
    const double intercept = (sy - slope * sx) / n;
    sat.kappa = -slope;
    sat.log_c = intercept;
    double ss_res = 0, ss_tot = 0;
    const double ybar = sy / n;
    for (std::size_t i = 0; i < dist.size(); ++i) {
      const double pred = intercept + slope * dist[i];
      ss_res += (dev[i] - pred) * (dev[i] - pred);
      ss_tot += (dev[i] - ybar) * (dev[i] - ybar);
    }
    sat.r2 = ss_tot > 0 ? 1.0 - ss_res / ss_tot : 1.0;
    return sat;
  };

  SaturationProfile prof;
  prof.right = fit_side(b, +1);
  prof.left = fit_side(a, -1);
  return prof;
}

std::vector<double> constant_solutions(const net::NetworkParams& net,
                                       int first_layer_cap) {
  net.validate();
  const int m1 = static_cast<int>(net.weights[0].rows());
  if (m1 > first_layer_cap)
    throw std::runtime_error("first layer width " + std::to_string(m1) +
                             " exceeds enumeration cap " +
                             std::to_string(first_layer_cap));
  const double lo = net.activation == net::Activation::Tanh ? -1.0 : 0.0;
  std::vector<double> constants;
  for (std::uint64_t mask = 0; mask < (1ULL << m1); ++mask) {
    Eigen::VectorXd s(m1);
    for (int j = 0; j < m1; ++j) s(j) = (mask >> j) & 1 ? 1.0 : lo;
    for (std::size_t l = 1; l < net.weights.size(); ++l) {
      Eigen::VectorXd z = net.weights[l] * s + net.biases[l];
      s.resize(z.size());
      for (Eigen::Index i = 0; i < z.size(); ++i)
        s(i) = net::activate(net.activation, z(i));
    }
    constants.push_back(net.alpha.dot(s) + net.beta);
  }
  std::sort(constants.begin(), constants.end());
  std::vector<double> merged;
  for (double c : constants)
    if (merged.empty() || std::abs(c - merged.back()) > 1e-12)
      merged.push_back(c);
  return merged;
}

VerifyReport verify_annihilator(
    const MultiPoly& P, const std::function<double(double)>& f,
    std::span<const double> x_grid, double fd_step,
    std::optional<std::pair<double, double>> domain) {
  const int order = P.n_vars() - 1;
  // widest Richardson stencil half-width at step h (fine pass uses h/2)
  const double reach =
      fd_step * static_cast<double>(fd::central_offsets(order, 2).back());
  VerifyReport rep;
  std::vector<double> jets(static_cast<std::size_t>(order + 1));
  double sum = 0.0;
  std::size_t used = 0;
  for (double x : x_grid) {
    if (domain && (x - reach < domain->first || x + reach > domain->second)) {
      rep.trimmed = true;
      continue;
    }
    for (int k = 0; k <= order; ++k)
      jets[static_cast<std::size_t>(k)] = fd::derivative(f, x, k, fd_step);
    const double r = std::abs(poly_eval(P, jets));
    rep.residual_max = std::max(rep.residual_max, r);
    sum += r;
    ++used;
  }
  rep.residual_mean = used ? sum / static_cast<double>(used) : 0.0;
  return rep;
}

AnnihilatorReport minimal_annihilator(const net::NetworkParams& net,
                                      const SweepOptions& opts) {
  const int m = net.hidden_size();
  const JetChain chain = jet_chain(net, m, opts.m_cap);
  AnnihilatorReport report;
  for (int order = 0; order <= m; ++order) {
    for (int degree = 1; degree <= opts.degree_cap; ++degree) {
      const int basis =
          static_cast<int>(poly::monomial_basis_size(order + 1, degree));
      const int samples = std::max(opts.samples_factor * basis, 50);
      auto rel = find_relation(chain, order, degree, samples, opts.tol,
                               rng::split(opts.seed, "sweep",
                                          static_cast<std::uint64_t>(
                                              order * 100 + degree)));
      if (rel) {
        report.found = true;
        report.order = order;
        report.degree = degree;
        report.P = rel->P;
        report.residual_max = rel->residual_max;
        report.singular_tail = rel->singular_tail;
        report.constants = constant_solutions(net);
        return report;
      }
    }
  }
  report.constants = constant_solutions(net);
  return report;
}

}  // namespace annlab::annihilator
