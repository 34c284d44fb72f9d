#include "doctest.h"
#include "selmerlab/dist.hpp"

using namespace selmerlab::dist;

namespace {

// number of k-dimensional subspaces of F_2^r by brute force over reduced echelon bases
long count_subspaces(int k, int r) {
  long count = 0;
  const int n = 1 << r;
  // enumerate k-tuples of vectors forming a reduced echelon basis with descending leading bits
  std::vector<int> basis;
  auto rec = [&](auto&& self, int min_lead_excl) -> void {
    if (static_cast<int>(basis.size()) == k) {
      ++count;
      return;
    }
    for (int v = 1; v < n; ++v) {
      int lead = 31 - __builtin_clz(static_cast<unsigned>(v));
      if (lead >= min_lead_excl) continue;
      bool ok = true;
      for (int b : basis) {
        int lb = 31 - __builtin_clz(static_cast<unsigned>(b));
        if ((v >> lb) & 1) ok = false;
      }
      for (int b : basis)
        if ((b >> lead) & 1) ok = false;
      if (!ok) continue;
      basis.push_back(v);
      self(self, lead);
      basis.pop_back();
    }
  };
  rec(rec, r);
  return count;
}

}  // namespace

TEST_CASE("alpha values") {
  CHECK(to_double(alpha(0)) == doctest::Approx(0.419422).epsilon(1e-6));
  CHECK(alpha(0) > Real("0.41"));
  CHECK(alpha_product(2, 60).error_bound < Real("1e-15"));
  for (int r = 1; r < 30; ++r) CHECK(alpha(r + 1) < alpha(r));
}

TEST_CASE("alpha mass per parity class") {
  CHECK(abs(alpha_parity_mass(0) - 1) < Real("1e-12"));
  CHECK(abs(alpha_parity_mass(1) - 1) < Real("1e-12"));
  CHECK(abs(alpha_total_mass() - 2) < Real("1e-12"));
  for (int p : {3, 5})
    for (int m = 0; m < 2; ++m) CHECK(abs(alpha_parity_mass(m, p) - 1) < Real("1e-12"));
}

TEST_CASE("gaussian binomials") {
  CHECK(gauss_binom(0, 5) == 1);
  CHECK(gauss_binom(1, 3) == 7);
  CHECK(gauss_binom(2, 4) == 35);
  for (int r = 0; r <= 5; ++r)
    for (int k = 0; k <= r; ++k) {
      CHECK(gauss_binom(k, r) == count_subspaces(k, r));
      CHECK(gauss_binom(k, r) == gauss_binom(r - k, r));
    }
}

TEST_CASE("hom moment identity") {
  for (int r = 0; r <= 12; ++r) CHECK(hom_moment_identity(r));
  CHECK(hom_moment_closed_form(1) == 3);
  CHECK(hom_moment_closed_form(2) == 15);
}

TEST_CASE("alpha moments per parity class") {
  for (int k = 0; k <= 6; ++k) CHECK(alpha_moment_check(k));
  CHECK(to_double(alpha_moment(1, 0)) == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(to_double(alpha_moment(2, 1)) == doctest::Approx(15.0).epsilon(1e-12));
}

TEST_CASE("beta table") {
  CHECK(beta_recurrence(1) == Rational(1, 2));
  CHECK(beta_recurrence(2) == Rational(1, 8));
  CHECK(beta_recurrence(3) == Rational(5, 64));
  CHECK(beta_recurrence(4) == Rational(29, 1024));
  CHECK(beta_recurrence(1, 3) == Rational(2, 3));
  CHECK(beta_recurrence(2, 3) == Rational(2, 27));
}

TEST_CASE("beta recurrence, closed form and series agree") {
  for (int p : {2, 3, 5})
    for (int n = 1; n <= 10; ++n) {
      CHECK(beta_recurrence(n, p) == beta_closed_form(n, p));
      Real exact = Real(numerator(beta_recurrence(n, p))) / Real(denominator(beta_recurrence(n, p)));
      CHECK(abs(beta_series(n, p) - exact) < Real("1e-12"));
    }
}

TEST_CASE("pell constants") {
  PellConstants c = pell_constants();
  CHECK(to_double(c.c_pell) == doctest::Approx(0.580577).epsilon(1e-6));
  CHECK(to_double(c.pr(1)) == doctest::Approx(0.419422).epsilon(1e-6));
  CHECK(c.euler_gap < Real("1e-12"));
  CHECK(abs(c.selmer_sum() - c.c_pell) < Real("1e-10"));
  Real total = 0;
  for (int r = 1; r < 100; ++r) total += c.pr(r);
  CHECK(abs(total - 1) < Real("1e-12"));
}

TEST_CASE("gamma exact values") {
  CHECK(gamma_exact(1, 3, 2) == Rational(4, 7));
  // gamma_n(s) tends to beta_n as s grows
  for (int p : {2, 3})
    for (int n = 1; n <= 3; ++n) {
      double g = to_double(gamma_exact(n, 61, p));
      CHECK(g == doctest::Approx(to_double(beta_recurrence(n, p))).epsilon(1e-9));
    }
}
