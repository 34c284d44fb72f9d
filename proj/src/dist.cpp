#include "selmerlab/dist.hpp"

#include <stdexcept>

namespace selmerlab::dist {

namespace {

Integer ipow(int p, int e) {
  Integer r = 1;
  for (int i = 0; i < e; ++i) r *= p;
  return r;
}

Real rpow(int p, int e) {
  Real r = 1;
  Real b = p;
  if (e < 0) {
    b = 1 / b;
    e = -e;
  }
  for (int i = 0; i < e; ++i) r *= b;
  return r;
}

}  // namespace

Truncated alpha_product(int p, int J) {
  Real v = 1;
  for (int j = 1; j <= J; ++j) v /= 1 + rpow(p, -j);
  return {v, v * rpow(p, -J) / (p - 1)};
}

Truncated odd_power_product(int p, int J) {
  Real v = 1;
  for (int j = 1; j <= J; ++j) v *= 1 - rpow(p, 1 - 2 * j);
  return {v, 2 * rpow(p, 1 - 2 * J)};
}

Real alpha(int r, int p) {
  if (r < 0) throw std::invalid_argument("alpha: r must be nonnegative");
  Real v = alpha_product(p).value;
  for (int j = 1; j <= r; ++j) v *= Real(p) / (rpow(p, j) - 1);
  return v;
}

Real alpha_parity_mass(int m, int p, int terms) {
  Real s = 0;
  for (int j = m; j < terms; j += 2) s += alpha(j, p);
  return s;
}

Real alpha_total_mass(int p, int terms) { return alpha_parity_mass(0, p, terms) + alpha_parity_mass(1, p, terms); }

Integer gauss_binom(int k, int r, int q) {
  if (k < 0 || k > r) throw std::invalid_argument("gauss_binom: need 0 <= k <= r");
  Integer num = 1, den = 1;
  for (int i = 1; i <= k; ++i) {
    num *= ipow(q, r - i + 1) - 1;
    den *= ipow(q, i) - 1;
  }
  return num / den;
}

Integer hom_moment_closed_form(int k) {
  Integer v = 1;
  for (int j = 1; j <= k; ++j) v *= 1 + ipow(2, j);
  return v;
}

bool hom_moment_identity(int r) {
  Integer lhs = 0;
  for (int k = 0; k <= r; ++k) lhs += gauss_binom(k, r) * ipow(2, k * (k + 1) / 2);
  return lhs == hom_moment_closed_form(r);
}

Real alpha_moment(int k, int m, int terms) {
  Real s = 0;
  for (int j = m; j < terms; j += 2) s += alpha(j) * rpow(2, j * k);
  return s;
}

bool alpha_moment_check(int k, double tol) {
  Real target = Real(hom_moment_closed_form(k));
  for (int m = 0; m < 2; ++m)
    if (abs(alpha_moment(k, m) - target) > tol) return false;
  return true;
}

Rational beta_recurrence(int n, int p) {
  if (n < 1) throw std::invalid_argument("beta: n >= 1");
  Rational b = Rational(p - 1, p);
  for (int k = 2; k <= n; ++k) {
    Rational coef = Rational(Integer(p - 1), ipow(p, k));
    b = coef * (1 - Rational(ipow(p, k - 1) - 1, Integer(p - 1)) * b);
  }
  return b;
}

Rational beta_closed_form(int n, int p) {
  if (n < 1) throw std::invalid_argument("beta: n >= 1");
  Integer s = 0;
  for (int i = 0; i < n; ++i) {
    Integer prod = 1;
    for (int j = 1; j <= i; ++j) prod *= ipow(p, n - j) - 1;
    Integer term = ipow(p, (n - i) * (n - i - 1) / 2) * prod;
    if (i % 2) s -= term;
    else s += term;
  }
  return Rational(Integer(p - 1) * s, ipow(p, n * (n + 1) / 2));
}

Real beta_series(int n, int p, int terms) {
  int m = (n + 1) % 2;
  Real s = 0;
  for (int r = 0; r < terms; ++r) s += (p - 1) * alpha(2 * r + m, p) / (rpow(p, n + 2 * r + m) - 1);
  return s;
}

Real PellConstants::pr(int r) const {
  if (r < 1) throw std::invalid_argument("Pr(r) needs r >= 1");
  Real v = alpha_pell;
  for (int j = 1; j <= r - 1; ++j) v /= rpow(2, j) - 1;
  return v;
}

Real PellConstants::selmer_sum(int terms) const {
  Real s = 0;
  for (int r = 1; r < terms; ++r) s += pr(r) / (rpow(2, r) - 1);
  return s;
}

PellConstants pell_constants() {
  PellConstants c;
  Real odd = odd_power_product(2).value;
  c.alpha_pell = odd;
  c.c_pell = 1 - odd;
  c.euler_gap = abs(odd - alpha_product(2).value);
  return c;
}

Rational gamma_exact(int n, int s, int p) {
  if (n < 1 || s <= n) throw std::invalid_argument("gamma_exact: need 1 <= n < s");
  Rational g = Rational(Integer(p - 1) * ipow(p, s - 1), ipow(p, s) - 1);
  for (int k = 2; k <= n; ++k) {
    Rational lead = Rational(ipow(p, s - k) * (p - 1), ipow(p, s) - ipow(p, k - 1));
    g = lead * (1 - Rational(ipow(p, k - 1) - 1, Integer(p - 1)) * g);
  }
  return g;
}

double to_double(const Real& x) { return x.convert_to<double>(); }
double to_double(const Rational& x) { return boost::multiprecision::numerator(x).convert_to<double>() / boost::multiprecision::denominator(x).convert_to<double>(); }

}  // namespace selmerlab::dist
