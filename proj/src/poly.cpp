#include "annlab/poly.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace annlab::poly {

namespace {

void check_vars(const MultiPoly& p, const MultiPoly& q) {
  if (p.n_vars() != q.n_vars())
    throw std::invalid_argument("polynomial variable counts differ: " +
                                std::to_string(p.n_vars()) + " vs " +
                                std::to_string(q.n_vars()));
}

std::string format_coeff(double c) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", c);
  return buf;
}

}  // namespace

MultiPoly::MultiPoly(int n_vars) : n_vars_(n_vars) {
  if (n_vars < 1) throw std::invalid_argument("n_vars must be positive");
}

MultiPoly MultiPoly::constant(int n_vars, double c) {
  MultiPoly p(n_vars);
  p.add_term(Exponents(n_vars, 0), c);
  return p;
}

MultiPoly MultiPoly::variable(int n_vars, int index) {
  if (index < 0 || index >= n_vars)
    throw std::out_of_range("variable index out of range");
  MultiPoly p(n_vars);
  Exponents e(n_vars, 0);
  e[index] = 1;
  p.add_term(e, 1.0);
  return p;
}

void MultiPoly::add_term(const Exponents& e, double c) {
  if (static_cast<int>(e.size()) != n_vars_)
    throw std::invalid_argument("exponent vector length != n_vars");
  for (int k : e)
    if (k < 0) throw std::invalid_argument("negative exponent");
  auto it = terms_.find(e);
  if (it == terms_.end()) {
    if (c != 0.0) terms_.emplace(e, c);
  } else {
    it->second += c;
    if (it->second == 0.0) terms_.erase(it);
  }
}

int MultiPoly::degree() const {
  if (terms_.empty()) return -1;
  return total_degree(terms_.rbegin()->first);
}

double MultiPoly::coefficient(const Exponents& e) const {
  auto it = terms_.find(e);
  return it == terms_.end() ? 0.0 : it->second;
}

double MultiPoly::coeff_norm() const {
  double s = 0.0;
  for (const auto& [e, c] : terms_) s += c * c;
  return std::sqrt(s);
}

MultiPoly MultiPoly::scaled(double factor) const {
  MultiPoly out(n_vars_);
  for (const auto& [e, c] : terms_) out.add_term(e, c * factor);
  return out;
}

MultiPoly poly_add(const MultiPoly& p, const MultiPoly& q) {
  check_vars(p, q);
  MultiPoly out = p;
  for (const auto& [e, c] : q.terms()) out.add_term(e, c);
  return out;
}

MultiPoly poly_sub(const MultiPoly& p, const MultiPoly& q) {
  check_vars(p, q);
  MultiPoly out = p;
  for (const auto& [e, c] : q.terms()) out.add_term(e, -c);
  return out;
}

MultiPoly poly_mul(const MultiPoly& p, const MultiPoly& q) {
  check_vars(p, q);
  MultiPoly out(p.n_vars());
  Exponents e(p.n_vars());
  for (const auto& [ep, cp] : p.terms()) {
    for (const auto& [eq, cq] : q.terms()) {
      for (int i = 0; i < p.n_vars(); ++i) e[i] = ep[i] + eq[i];
      out.add_term(e, cp * cq);
    }
  }
  return out;
}

MultiPoly poly_partial(const MultiPoly& p, int var) {
  if (var < 0 || var >= p.n_vars())
    throw std::out_of_range("partial derivative index out of range");
  MultiPoly out(p.n_vars());
  for (const auto& [e, c] : p.terms()) {
    if (e[var] == 0) continue;
    Exponents d = e;
    d[var] -= 1;
    out.add_term(d, c * e[var]);
  }
  return out;
}

double poly_eval(const MultiPoly& p, std::span<const double> point) {
  if (static_cast<int>(point.size()) != p.n_vars())
    throw std::invalid_argument("evaluation point length != n_vars");
  double sum = 0.0;
  for (const auto& [e, c] : p.terms()) {
    double t = c;
    for (int i = 0; i < p.n_vars(); ++i) {
      for (int k = 0; k < e[i]; ++k) t *= point[i];
    }
    sum += t;
  }
  return sum;
}

namespace {

void enumerate_degree(int n_vars, int var, int remaining, Exponents& cur,
                      std::vector<Exponents>& out) {
  if (var == n_vars - 1) {
    cur[var] = remaining;
    out.push_back(cur);
    return;
  }
  // descending so graded-lex ties come out in order (x0 before x1)
  for (int k = remaining; k >= 0; --k) {
    cur[var] = k;
    enumerate_degree(n_vars, var + 1, remaining - k, cur, out);
  }
}

}  // namespace

std::vector<Exponents> monomial_basis(int n_vars, int max_degree) {
  std::vector<Exponents> out;
  out.reserve(monomial_basis_size(n_vars, max_degree));
  Exponents cur(n_vars, 0);
  for (int d = 0; d <= max_degree; ++d)
    enumerate_degree(n_vars, 0, d, cur, out);
  return out;
}

std::size_t monomial_basis_size(int n_vars, int max_degree) {
  // C(n_vars + max_degree, max_degree)
  std::size_t c = 1;
  for (int i = 1; i <= max_degree; ++i)
    c = c * static_cast<std::size_t>(n_vars + i) / static_cast<std::size_t>(i);
  return c;
}

std::string to_string(const MultiPoly& p) {
  if (p.is_zero()) return "0";
  std::ostringstream os;
  bool first = true;
  for (const auto& [e, c] : p.terms()) {
    if (!first) os << " + ";
    first = false;
    os << format_coeff(c);
    bool any = false;
    for (int i = 0; i < p.n_vars(); ++i) {
      if (e[i] == 0) continue;
      os << (any ? " " : " * ") << "x" << i;
      if (e[i] > 1) os << "^" << e[i];
      any = true;
    }
  }
  return os.str();
}

std::string serialize(const MultiPoly& p) {
  std::ostringstream os;
  os << p.n_vars() << " " << p.term_count();
  for (const auto& [e, c] : p.terms()) {
    for (int k : e) os << " " << k;
    char buf[64];
    std::snprintf(buf, sizeof(buf), " %.17g", c);
    os << buf;
  }
  return os.str();
}

MultiPoly deserialize(const std::string& text) {
  std::istringstream is(text);
  int n_vars = 0;
  std::size_t n_terms = 0;
  if (!(is >> n_vars >> n_terms))
    throw std::invalid_argument("malformed polynomial text");
  MultiPoly p(n_vars);
  for (std::size_t t = 0; t < n_terms; ++t) {
    Exponents e(n_vars);
    for (int i = 0; i < n_vars; ++i)
      if (!(is >> e[i])) throw std::invalid_argument("malformed exponent");
    double c;
    if (!(is >> c)) throw std::invalid_argument("malformed coefficient");
    p.add_term(e, c);
  }
  return p;
}

}  // namespace annlab::poly
