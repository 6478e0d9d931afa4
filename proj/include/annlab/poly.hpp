#pragma once

// Sparse multivariate polynomials with real coefficients and a fixed
// graded-lex term order. All operations are pure; values are immutable
// once built (mutation is confined to construction via add_term).

#include <map>
#include <span>
#include <string>
#include <vector>

namespace annlab::poly {

using Exponents = std::vector<int>;

inline int total_degree(const Exponents& e) {
  int d = 0;
  for (int k : e) d += k;
  return d;
}

// Graded lexicographic order: lower total degree first, ties broken so
// that x0 precedes x1 (earlier variable with higher exponent sorts first).
struct GradedLexLess {
  bool operator()(const Exponents& a, const Exponents& b) const {
    int da = total_degree(a), db = total_degree(b);
    if (da != db) return da < db;
    return a > b;  // lexicographically larger exponent vector comes first
  }
};

using TermMap = std::map<Exponents, double, GradedLexLess>;

class MultiPoly {
 public:
  explicit MultiPoly(int n_vars);

  static MultiPoly constant(int n_vars, double c);
  static MultiPoly variable(int n_vars, int index);

  // Accumulates c onto the coefficient of monomial e; exact zeros pruned.
  void add_term(const Exponents& e, double c);

  int n_vars() const { return n_vars_; }
  const TermMap& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }
  int degree() const;  // max total degree, -1 for the zero polynomial
  std::size_t term_count() const { return terms_.size(); }
  double coefficient(const Exponents& e) const;

  // Euclidean norm of the coefficient vector.
  double coeff_norm() const;
  MultiPoly scaled(double factor) const;

  bool operator==(const MultiPoly& other) const = default;

 private:
  int n_vars_;
  TermMap terms_;
};

MultiPoly poly_add(const MultiPoly& p, const MultiPoly& q);
MultiPoly poly_sub(const MultiPoly& p, const MultiPoly& q);
MultiPoly poly_mul(const MultiPoly& p, const MultiPoly& q);
MultiPoly poly_partial(const MultiPoly& p, int var);
double poly_eval(const MultiPoly& p, std::span<const double> point);

// All exponent vectors with total degree <= max_degree, graded-lex order.
std::vector<Exponents> monomial_basis(int n_vars, int max_degree);
std::size_t monomial_basis_size(int n_vars, int max_degree);

// `coeff * x0^a x1^b` terms joined by ` + `, 17 significant digits.
std::string to_string(const MultiPoly& p);

// Round-trip text serialization (canonical form).
std::string serialize(const MultiPoly& p);
MultiPoly deserialize(const std::string& text);

}  // namespace annlab::poly
