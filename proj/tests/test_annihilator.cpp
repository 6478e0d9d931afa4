#include "doctest.h"

#include <cmath>
#include <vector>

#include "annlab/annihilator.hpp"
#include "annlab/finite_diff.hpp"
#include "annlab/net.hpp"
#include "annlab/poly.hpp"

using namespace annlab;
using annlab::poly::MultiPoly;

namespace {

net::NetworkParams single_neuron(double w, double alpha, double beta,
                                 net::Activation act) {
  net::NetworkParams n;
  n.weights = {Eigen::MatrixXd::Constant(1, 1, w)};
  n.biases = {Eigen::VectorXd::Zero(1)};
  n.alpha = Eigen::VectorXd::Constant(1, alpha);
  n.beta = beta;
  n.activation = act;
  return n;
}

net::NetworkParams two_layer_1_1(double w1, double a, net::Activation act) {
  net::NetworkParams n;
  n.weights = {Eigen::MatrixXd::Constant(1, 1, w1),
               Eigen::MatrixXd::Constant(1, 1, a)};
  n.biases = {Eigen::VectorXd::Zero(1), Eigen::VectorXd::Zero(1)};
  n.alpha = Eigen::VectorXd::Constant(1, 1.0);
  n.beta = 0.0;
  n.activation = act;
  return n;
}

double cosine_to(const MultiPoly& p, const MultiPoly& truth) {
  double dot = 0.0;
  for (const auto& [e, c] : p.terms()) dot += c * truth.coefficient(e);
  return std::abs(dot) / (p.coeff_norm() * truth.coeff_norm());
}

}  // namespace

TEST_CASE("hidden vector field: single neurons") {
  // tanh, w=2: F = [2(1 - Y1^2)]
  const auto f1 =
      annihilator::hidden_vector_field(single_neuron(2.0, 1.0, 0.0,
                                                     net::Activation::Tanh));
  REQUIRE(f1.components.size() == 1);
  CHECK(f1.components[0].coefficient({0}) == 2.0);
  CHECK(f1.components[0].coefficient({2}) == -2.0);
  CHECK(f1.components[0].term_count() == 2);

  // sigmoid, w=1: F = [Y1(1 - Y1)]
  const auto f2 = annihilator::hidden_vector_field(
      single_neuron(1.0, 1.0, 0.0, net::Activation::Sigmoid));
  CHECK(f2.components[0].coefficient({1}) == 1.0);
  CHECK(f2.components[0].coefficient({2}) == -1.0);
  CHECK(f2.components[0].term_count() == 2);
}

TEST_CASE("hidden vector field: 2-layer tanh chain rule") {
  // widths (1,1), w1=1, a=1: F = [1-Y1^2, (1-Y2^2)(1-Y1^2)]
  const auto n = two_layer_1_1(1.0, 1.0, net::Activation::Tanh);
  const auto f = annihilator::hidden_vector_field(n);
  REQUIRE(f.components.size() == 2);
  CHECK(f.components[0].coefficient({0, 0}) == 1.0);
  CHECK(f.components[0].coefficient({2, 0}) == -1.0);
  // (1-Y2^2)(1-Y1^2) = 1 - Y1^2 - Y2^2 + Y1^2 Y2^2
  CHECK(f.components[1].coefficient({0, 0}) == 1.0);
  CHECK(f.components[1].coefficient({2, 0}) == -1.0);
  CHECK(f.components[1].coefficient({0, 2}) == -1.0);
  CHECK(f.components[1].coefficient({2, 2}) == 1.0);
}

TEST_CASE("field matches numerical dY/dx along the trajectory") {
  const auto n = net::random_net({2, 2}, net::Activation::Tanh, 77);
  const auto field = annihilator::hidden_vector_field(n);
  const int m = n.hidden_size();
  for (double x : {-1.2, -0.3, 0.4, 1.7}) {
    const auto tr = net::forward(n, x);
    std::vector<double> y;
    for (const auto& h : tr.hidden)
      y.insert(y.end(), h.data(), h.data() + h.size());
    for (int i = 0; i < m; ++i) {
      auto yi = [&](double t) {
        const auto tt = net::forward(n, t);
        std::vector<double> z;
        for (const auto& h : tt.hidden)
          z.insert(z.end(), h.data(), h.data() + h.size());
        return z[static_cast<std::size_t>(i)];
      };
      const double dnum = fd::derivative(yi, x, 1, 1e-4);
      const double dpoly =
          poly::poly_eval(field.components[static_cast<std::size_t>(i)], y);
      CHECK(std::abs(dnum - dpoly) < 1e-6);
    }
  }
}

TEST_CASE("field capacity error past the width cap") {
  const auto n = net::random_net({6, 6}, net::Activation::Tanh, 1);
  CHECK_THROWS(annihilator::hidden_vector_field(n, 8));
}

TEST_CASE("jet chain: single tanh neuron hand values") {
  const auto n = single_neuron(1.0, 1.0, 0.0, net::Activation::Tanh);
  const auto chain = annihilator::jet_chain(n, 2);
  REQUIRE(chain.jets.size() == 3);
  // H0 = Y1
  CHECK(chain.jets[0].coefficient({1}) == 1.0);
  CHECK(chain.jets[0].term_count() == 1);
  // H1 = 1 - Y1^2
  CHECK(chain.jets[1].coefficient({0}) == 1.0);
  CHECK(chain.jets[1].coefficient({2}) == -1.0);
  // H2 = -2 Y1 (1 - Y1^2) = -2Y1 + 2Y1^3
  CHECK(chain.jets[2].coefficient({1}) == -2.0);
  CHECK(chain.jets[2].coefficient({3}) == 2.0);
  CHECK(chain.jets[2].term_count() == 2);
}

TEST_CASE("equilibria kill H1: F(s)=0 implies H1(s)=0") {
  for (auto act : {net::Activation::Tanh, net::Activation::Sigmoid}) {
    const auto n = net::random_net({2, 2}, act, 19);
    const auto chain = annihilator::jet_chain(n, 1);
    const double lo = act == net::Activation::Tanh ? -1.0 : 0.0;
    // propagate one saturation vector by hand
    Eigen::VectorXd s(2);
    s << 1.0, lo;
    std::vector<double> y(s.data(), s.data() + 2);
    Eigen::VectorXd z = n.weights[1] * s + n.biases[1];
    for (Eigen::Index i = 0; i < z.size(); ++i)
      y.push_back(net::activate(act, z(i)));
    for (const auto& comp : chain.field.components)
      CHECK(std::abs(poly::poly_eval(comp, y)) < 1e-12);
    CHECK(std::abs(poly::poly_eval(chain.jets[1], y)) < 1e-12);
  }
}

TEST_CASE("jet degree growth bound on random small nets") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto n = net::random_net({2, 1}, net::Activation::Tanh, seed);
    const auto chain = annihilator::jet_chain(n, 3);
    int fdeg = 0;
    for (const auto& c : chain.field.components)
      fdeg = std::max(fdeg, c.degree());
    for (std::size_t k = 0; k + 1 < chain.jets.size(); ++k) {
      if (chain.jets[k + 1].is_zero()) continue;
      CHECK(chain.jets[k + 1].degree() <=
            chain.jets[k].degree() + fdeg - 1);
    }
  }
}

TEST_CASE("find_relation recovers f' = 1 - f^2 for a single tanh neuron") {
  const auto n = single_neuron(1.0, 1.0, 0.0, net::Activation::Tanh);
  const auto chain = annihilator::jet_chain(n, 1);
  const auto rel = annihilator::find_relation(chain, 1, 2, 200, 1e-8, 5);
  REQUIRE(rel.has_value());
  MultiPoly truth(2);
  truth.add_term({0, 0}, -1.0);
  truth.add_term({2, 0}, 1.0);
  truth.add_term({0, 1}, 1.0);
  CHECK(cosine_to(rel->P, truth) > 1.0 - 1e-8);
  CHECK(rel->residual_max < 1e-7);
}

TEST_CASE("no linear relation in f alone on a non-constant net") {
  const auto n = net::random_net({2}, net::Activation::Tanh, 3);
  const auto chain = annihilator::jet_chain(n, 0);
  CHECK(!annihilator::find_relation(chain, 0, 1, 100, 1e-8, 5).has_value());
}

TEST_CASE("two tanh neurons: nothing at order 1, relation at order 2") {
  for (std::uint64_t seed : {1ull, 2ull, 3ull}) {
    const auto n = net::random_net({2}, net::Activation::Tanh, seed);
    const auto chain = annihilator::jet_chain(n, 2);
    for (int deg = 1; deg <= 4; ++deg) {
      const int samples = static_cast<int>(
          5 * poly::monomial_basis_size(2, deg));
      CHECK(!annihilator::find_relation(chain, 1, deg,
                                        std::max(samples, 50), 1e-8, seed)
                 .has_value());
    }
    const auto rep = annihilator::minimal_annihilator(
        n, {.degree_cap = 4, .tol = 1e-8, .samples_factor = 5, .seed = seed});
    REQUIRE(rep.found);
    CHECK(rep.order == 2);
    CHECK(rep.degree <= 4);
    CHECK(rep.residual_max < 1e-6);
  }
}

TEST_CASE("relation order/degree invariant under readout scaling") {
  auto n = net::random_net({2}, net::Activation::Tanh, 1);
  const auto base = annihilator::minimal_annihilator(n, {.seed = 1});
  auto scaled = n;
  scaled.alpha *= 3.0;
  scaled.beta *= 3.0;
  const auto rep = annihilator::minimal_annihilator(scaled, {.seed = 1});
  REQUIRE(base.found);
  REQUIRE(rep.found);
  CHECK(rep.order == base.order);
  CHECK(rep.degree == base.degree);
}

TEST_CASE("constant solutions: endpoints of the activation range") {
  const auto t = single_neuron(1.0, 1.0, 0.0, net::Activation::Tanh);
  const auto ct = annihilator::constant_solutions(t);
  REQUIRE(ct.size() == 2);
  CHECK(ct[0] == doctest::Approx(-1.0));
  CHECK(ct[1] == doctest::Approx(1.0));

  const auto s = single_neuron(1.0, 2.0, 1.0, net::Activation::Sigmoid);
  const auto cs = annihilator::constant_solutions(s);
  REQUIRE(cs.size() == 2);
  CHECK(cs[0] == doctest::Approx(1.0));
  CHECK(cs[1] == doctest::Approx(3.0));
}

TEST_CASE("constants are roots of the discovered annihilator") {
  for (std::uint64_t seed : {4ull, 8ull}) {
    const auto n = net::random_net({2, 1}, net::Activation::Sigmoid, seed);
    const auto rep = annihilator::minimal_annihilator(n, {.seed = seed});
    REQUIRE(rep.found);
    std::vector<double> jets(static_cast<std::size_t>(rep.P.n_vars()), 0.0);
    for (double c : rep.constants) {
      jets[0] = c;
      CHECK(std::abs(poly::poly_eval(rep.P, jets)) < 10.0 * 1e-8);
    }
  }
}

TEST_CASE("saturation profile of tanh(2x)") {
  auto f = [](double x) { return std::tanh(2.0 * x); };
  const auto prof = annihilator::saturation_profile(f, -1.0, 1.0, 5.0, 200);
  CHECK(prof.right.kappa > 3.6);
  CHECK(prof.right.kappa < 4.4);
  CHECK(prof.right.r2 > 0.99);
  CHECK(prof.right.f_inf == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(prof.left.kappa > 3.6);
  CHECK(prof.left.kappa < 4.4);
  CHECK(prof.left.f_inf == doctest::Approx(-1.0).epsilon(1e-6));
}

TEST_CASE("saturation profile sentinel for constants") {
  auto f = [](double) { return 0.25; };
  const auto prof = annihilator::saturation_profile(f, 0.0, 1.0, 5.0, 100);
  CHECK(prof.right.constant);
  CHECK(std::isinf(prof.right.kappa));
  CHECK(prof.left.constant);
}

TEST_CASE("verify_annihilator on the exact tanh identity") {
  MultiPoly p(2);
  p.add_term({0, 0}, -1.0);
  p.add_term({2, 0}, 1.0);
  p.add_term({0, 1}, 1.0);
  auto f = [](double x) { return std::tanh(x); };
  std::vector<double> grid;
  for (int i = 0; i <= 40; ++i) grid.push_back(-2.0 + 0.1 * i);
  const auto rep = annihilator::verify_annihilator(p, f, grid, 1e-3);
  CHECK(rep.residual_max < 1e-6);

  // perturbing one coefficient must blow the residual past 1e-2
  MultiPoly bad = p;
  bad.add_term({2, 0}, 0.1);
  const auto worse = annihilator::verify_annihilator(bad, f, grid, 1e-3);
  CHECK(worse.residual_max > 1e-2);
}

TEST_CASE("verify_annihilator closes the loop on a discovered relation") {
  const auto n = net::random_net({2}, net::Activation::Tanh, 2);
  const auto rep = annihilator::minimal_annihilator(n, {.seed = 2});
  REQUIRE(rep.found);
  auto f = [&](double x) { return net::predict(n, x); };
  std::vector<double> grid;
  for (int i = 0; i <= 30; ++i) grid.push_back(-1.5 + 0.1 * i);
  const auto ver = annihilator::verify_annihilator(rep.P, f, grid, 1e-3);
  CHECK(ver.residual_max < 1e-4);  // FD noise on top of the fit tolerance
}

TEST_CASE("absence is stable across sampling seeds") {
  const auto n = net::random_net({2}, net::Activation::Tanh, 3);
  const auto chain = annihilator::jet_chain(n, 1);
  int absent = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed)
    if (!annihilator::find_relation(chain, 1, 2, 100, 1e-8, seed).has_value())
      ++absent;
  CHECK(absent >= 9);
}
