#ifndef SELMERLAB_DIST_HPP_
#define SELMERLAB_DIST_HPP_

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <boost/multiprecision/cpp_int.hpp>

namespace selmerlab::dist {

using Integer = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;
using Real = boost::multiprecision::cpp_bin_float_50;

struct Truncated {
  Real value;
  Real error_bound;
};

// prod_{j>=1} (1 + p^-j)^-1, truncated at J factors.
Truncated alpha_product(int p = 2, int J = 200);
// alternative product prod_{j>=1} (1 - p^{1-2j}), truncated at J factors.
Truncated odd_power_product(int p = 2, int J = 200);

// alpha(p, r) = prod_{j>=1}(1+p^-j)^-1 prod_{j=1}^r p/(p^j-1)
Real alpha(int r, int p = 2);
// sum of alpha(p, j) over j = m mod 2; each parity class has mass 1
Real alpha_parity_mass(int m, int p = 2, int terms = 120);
Real alpha_total_mass(int p = 2, int terms = 120);

Integer gauss_binom(int k, int r, int q = 2);
bool hom_moment_identity(int r);
// sum over j = m mod 2 of alpha(j) 2^{jk}
Real alpha_moment(int k, int m, int terms = 160);
Integer hom_moment_closed_form(int k);
bool alpha_moment_check(int k, double tol = 1e-10);

Rational beta_recurrence(int n, int p = 2);
Rational beta_closed_form(int n, int p = 2);
Real beta_series(int n, int p = 2, int terms = 80);

struct PellConstants {
  Real c_pell;
  Real alpha_pell;
  Real euler_gap;  // |prod(1 - 2^{1-2j}) - prod(1 + 2^-j)^-1|
  Real pr(int r) const;
  Real selmer_sum(int terms = 120) const;  // sum_r Pr(r)/(2^r - 1)
};
PellConstants pell_constants();

// gamma_n(s) from the hitting-probability recurrence
Rational gamma_exact(int n, int s, int p);

double to_double(const Real& x);
double to_double(const Rational& x);

}  // namespace selmerlab::dist

#endif  // SELMERLAB_DIST_HPP_
