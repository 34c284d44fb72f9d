#include <algorithm>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "selmerlab/randmat.hpp"

using namespace selmerlab;
using namespace selmerlab::randmat;
using dist::Integer;
using dist::Rational;

namespace {

u64 ipow(u64 b, int e) {
  u64 r = 1;
  while (e-- > 0) r *= b;
  return r;
}

std::vector<u64> normalize_mod_p(std::vector<u64> v, u64 p) {
  const auto lead = std::find_if(v.begin(), v.end(), [](u64 x) { return x != 0; });
  if (lead == v.end()) return v;
  u64 inv = 1;
  while (inv * *lead % p != 1) ++inv;
  for (u64& x : v) x = x * inv % p;
  return v;
}

std::vector<u64> mat_vec_mod(const std::vector<u64>& A, int s, const std::vector<u64>& y, u64 m) {
  std::vector<u64> out(s, 0);
  for (int i = 0; i < s; ++i) {
    unsigned __int128 acc = 0;
    for (int j = 0; j < s; ++j) acc += static_cast<unsigned __int128>(A[static_cast<std::size_t>(i) * s + j] % m) * y[j];
    out[i] = static_cast<u64>(acc % m);
  }
  return out;
}

// Unit lower times unit upper: invertible over Z/p^e.
std::vector<u64> random_unimodular(int s, u64 q, Rng& rng) {
  std::uniform_int_distribution<u64> d(0, q - 1);
  std::vector<u64> L(static_cast<std::size_t>(s) * s, 0), U(L);
  for (int i = 0; i < s; ++i) {
    L[static_cast<std::size_t>(i) * s + i] = U[static_cast<std::size_t>(i) * s + i] = 1;
    for (int j = 0; j < i; ++j) L[static_cast<std::size_t>(i) * s + j] = d(rng);
    for (int j = i + 1; j < s; ++j) U[static_cast<std::size_t>(i) * s + j] = d(rng);
  }
  std::vector<u64> X(L.size(), 0);
  for (int i = 0; i < s; ++i)
    for (int j = 0; j < s; ++j) {
      unsigned __int128 acc = 0;
      for (int k = 0; k < s; ++k)
        acc += static_cast<unsigned __int128>(L[static_cast<std::size_t>(i) * s + k]) * U[static_cast<std::size_t>(k) * s + j] % q;
      X[static_cast<std::size_t>(i) * s + j] = static_cast<u64>(acc % q);
    }
  return X;
}

// All alternating s x s matrices over F_p, counted by rank.
std::vector<u64> enumerate_ranks(int s, int p) {
  const int slots = s * (s - 1) / 2;
  const u64 total = ipow(static_cast<u64>(p), slots);
  std::vector<u64> counts(s + 1, 0);
  for (u64 code = 0; code < total; ++code) {
    PadicAltMatrix M = PadicAltMatrix::zero(s, p, 1);
    u64 x = code;
    for (int i = 0; i < s; ++i)
      for (int j = i + 1; j < s; ++j) {
        M.set(i, j, x % static_cast<u64>(p));
        x /= static_cast<u64>(p);
      }
    ++counts[rank_mod_p(M)];
  }
  return counts;
}

}  // namespace

TEST_CASE("sample_alt is alternating and honours the column constraint") {
  Rng rng = make_stream(7, 0);
  for (int p : {2, 3, 5})
    for (int s : {2, 5, 8})
      for (int n = 0; n < s; n += 2)
        for (int t = 0; t < 50; ++t) {
          const PadicAltMatrix M = sample_alt(s, p, default_precision(p), n, rng);
          REQUIRE(M.is_alternating());
          for (int i = 0; i < s; ++i)
            for (int j = 0; j < n; ++j) REQUIRE(M.at(i, j) % static_cast<u64>(p) == 0);
        }
}

TEST_CASE("max_precision keeps p^e below 2^62") {
  CHECK(max_precision(2) == 61);
  CHECK(max_precision(3) == 39);
  CHECK(default_precision(2) == 20);
  CHECK(default_precision(7) == 12);
}

TEST_CASE("kernel_report on explicit matrices") {
  const PadicAltMatrix Z = PadicAltMatrix::zero(2, 2, 20);
  const KernelReport rz = kernel_report(Z);
  CHECK(rz.rank_mod_p == 0);
  CHECK(rz.ker_dim_mod_p == 2);
  CHECK_FALSE(rz.y_line.has_value());

  PadicAltMatrix H = PadicAltMatrix::zero(3, 2, 20);
  H.set(0, 1, 1);
  const KernelReport rh = kernel_report(H);
  CHECK(rh.rank_mod_p == 2);
  CHECK(rh.ker_dim_mod_p == 1);
  REQUIRE(rh.y_line.has_value());
  CHECK(*rh.y_line == std::vector<u64>{0, 0, 1});

  // Kernel generator (1, 2, 4) up to units; mod 3 it is (1, 2, 1).
  PadicAltMatrix K = PadicAltMatrix::zero(3, 3, 12);
  K.set(0, 1, 4);
  K.set(0, 2, K.modulus - 2);
  K.set(1, 2, 1);
  const KernelReport rk = kernel_report(K);
  REQUIRE(rk.y_line.has_value());
  CHECK(*rk.y_line == std::vector<u64>{1, 2, 1});

  // p divides every entry: kernel mod p is everything, line still determined.
  PadicAltMatrix D = PadicAltMatrix::zero(3, 2, 20);
  D.set(0, 1, 2);
  D.set(1, 2, 6);
  const KernelReport rd = kernel_report(D);
  CHECK(rd.ker_dim_mod_p == 3);
  REQUIRE(rd.y_line.has_value());
  CHECK(*rd.y_line == std::vector<u64>{1, 0, 1});
}

TEST_CASE("kernel_report agrees with elimination over F_p and kills its line") {
  Rng rng = make_stream(11, 0);
  for (int p : {2, 3})
    for (int s : {3, 5, 7, 9})
      for (int n : {0, 1, 2})
        for (int t = 0; t < 200; ++t) {
          const PadicAltMatrix M = sample_alt(s, p, default_precision(p), n, rng);
          const KernelReport r = kernel_report(M);
          REQUIRE(r.rank_mod_p == rank_mod_p(M));
          REQUIRE(r.rank_mod_p % 2 == 0);
          REQUIRE(r.rank_mod_p + r.ker_dim_mod_p == s);
          REQUIRE(r.ker_dim_mod_p >= n);
          if (r.y_line) REQUIRE(mat_vec_mod(M.entries, s, *r.y_line, static_cast<u64>(p)) == std::vector<u64>(s, 0));
        }
}

TEST_CASE("undetermined rate is small at the default precision and shrinks with e") {
  Rng rng = make_stream(3, 0);
  u64 bottom[3] = {0, 0, 0};
  const int es[3] = {5, 10, 20};
  const u64 N = 20000;
  for (u64 t = 0; t < N; ++t) {
    const PadicAltMatrix M = sample_alt(5, 2, 20, 0, rng);
    std::optional<std::vector<u64>> prev;
    for (int k = 0; k < 3; ++k) {
      const KernelReport r = kernel_report(truncate(M, es[k]));
      if (!r.y_line) {
        ++bottom[k];
        REQUIRE_FALSE(prev.has_value());
      } else {
        if (prev) REQUIRE(*prev == *r.y_line);
        prev = r.y_line;
      }
    }
  }
  CHECK(bottom[0] >= bottom[1]);
  CHECK(bottom[1] >= bottom[2]);
  CHECK(static_cast<double>(bottom[2]) / N < 1e-3);
  CHECK(bottom[0] > 0);
}

TEST_CASE("refine extends the residues and keeps the constraint") {
  Rng rng = make_stream(5, 0);
  const PadicAltMatrix M = sample_alt(7, 3, 6, 2, rng);
  const PadicAltMatrix R = refine(M, 12, rng);
  CHECK(R.is_alternating());
  CHECK(truncate(R, 6).entries == M.entries);
  for (int i = 0; i < 7; ++i)
    for (int j = 0; j < 2; ++j) CHECK(R.at(i, j) % 3 == 0);
}

TEST_CASE("alt_rank_count matches exhaustive enumeration") {
  const std::vector<std::pair<int, int>> cases = {{2, 2}, {3, 2}, {4, 2}, {5, 2}, {6, 2}, {3, 3}, {4, 3}, {3, 5}};
  for (auto [s, p] : cases) {
    const std::vector<u64> counts = enumerate_ranks(s, p);
    Integer total = 0;
    for (int k = 0; 2 * k <= s; ++k) {
      CHECK(alt_rank_count(s, k, p) == Integer(counts[2 * k]));
      total += alt_rank_count(s, k, p);
    }
    for (int r = 1; r <= s; r += 2) CHECK(counts[r] == 0);
    CHECK(total == boost::multiprecision::pow(Integer(p), s * (s - 1) / 2));
  }
}

TEST_CASE("recurrence for gamma equals the kernel-law evaluation") {
  CHECK(dist::gamma_exact(1, 3, 2) == Rational(4, 7));
  CHECK(gamma_from_kernel_law(1, 3, 2) == Rational(4, 7));
  for (int p : {2, 3, 5})
    for (int n = 1; n <= 5; ++n)
      for (int s = n + 1; s <= 13; ++s) {
        if (s % 2 == 0) continue;
        CHECK(gamma_from_kernel_law(n, s, p) == dist::gamma_exact(n, s, p));
      }
}

TEST_CASE("rank s - 1 frequency at s = 3 matches the finite law") {
  for (int p : {2, 3}) {
    const KernelHistogram h = kernel_dim_distribution(0, 3, p, 40000, {.seed = 9});
    const std::vector<Rational> law = exact_kernel_distribution(0, 3, p);
    const double expect = dist::to_double(law[1]);
    CHECK(expect == doctest::Approx(1.0 - 1.0 / (p * p * p)).epsilon(1e-15));
    const double se = std::sqrt(expect * (1 - expect) / 40000.0);
    CHECK(std::abs(h.mass(1) - expect) <= 3 * se);
    CHECK(h.parity_ok());
  }
}

TEST_CASE("gamma_n_empirical tracks the exact values") {
  struct Case {
    int n, s, p;
  };
  for (const Case c : {Case{1, 3, 2}, Case{2, 5, 2}, Case{1, 5, 3}, Case{3, 7, 2}}) {
    const GammaEstimate g = gamma_n_empirical(c.n, c.s, c.p, 30000, {.seed = 21});
    CHECK(g.samples == 30000);
    CHECK(g.exact == dist::gamma_exact(c.n, c.s, c.p));
    CHECK(std::abs(g.z()) <= 3.0);
    CHECK(g.undetermined <= g.retried);
  }
}

TEST_CASE("kernel histogram parity and alpha masses") {
  const KernelHistogram h1 = kernel_dim_distribution(1, 13, 2, 20000, {.seed = 4});
  CHECK(h1.parity_ok());
  CHECK(std::abs(h1.mass(1) - dist::to_double(dist::alpha(0, 2))) <= 0.02);
  const KernelHistogram h0 = kernel_dim_distribution(0, 13, 2, 20000, {.seed = 5});
  CHECK(h0.parity_ok());
  CHECK(h0.max_alpha_gap() <= 0.02);
  CHECK(alpha_prediction(0, 0, 2) == 0.0);
  CHECK(alpha_prediction(0, 2, 2) == 0.0);
  CHECK(alpha_prediction(2, 3, 2) == doctest::Approx(dist::to_double(dist::alpha(1, 2))));
}

TEST_CASE("finite kernel law approaches alpha") {
  const std::vector<Rational> law = exact_kernel_distribution(0, 25, 2);
  for (int d = 1; d <= 9; d += 2) CHECK(dist::to_double(law[d]) == doctest::Approx(alpha_prediction(0, d, 2)).epsilon(1e-6));
  Rational total = 0;
  for (const Rational& x : law) total += x;
  CHECK(total == 1);
}

TEST_CASE("lines_of and line_index are inverse") {
  for (int p : {2, 3})
    for (int k = 1; k <= 4; ++k) {
      const auto L = lines_of(k, p);
      CHECK(L.size() == (ipow(static_cast<u64>(p), k) - 1) / static_cast<u64>(p - 1));
      for (std::size_t i = 0; i < L.size(); ++i) CHECK(line_index(L[i], p) == i);
    }
}

TEST_CASE("line equidistribution") {
  const LineTest one = line_equidistribution_test(5, 2, 1, 2000, {.seed = 2});
  CHECK(one.counts.size() == 1);
  CHECK(one.p_value == 1.0);
  CHECK_FALSE(one.inconclusive);

  const LineTest t = line_equidistribution_test(5, 2, 3, 40000, {.seed = 1});
  CHECK(t.counts.size() == 7);
  CHECK(t.conditioned >= 10000);
  CHECK_FALSE(t.inconclusive);
  CHECK(t.p_value > 0.001);

  const LineTest t3 = line_equidistribution_test(7, 3, 3, 40000, {.seed = 1});
  CHECK(t3.counts.size() == 13);
  CHECK(t3.p_value > 0.001);

  const LineTest few = line_equidistribution_test(5, 2, 3, 10, {.seed = 1});
  CHECK(few.inconclusive);
}

TEST_CASE("conjugation moves kernel lines by the inverse matrix") {
  Rng rng = make_stream(13, 0);
  for (int p : {2, 3}) {
    const int e = default_precision(p);
    for (int t = 0; t < 300; ++t) {
      const PadicAltMatrix M = sample_alt(5, p, e, 2, rng);
      const std::vector<u64> X = random_unimodular(5, M.modulus, rng);
      const PadicAltMatrix N = conjugate(M, X);
      REQUIRE(N.is_alternating());
      const KernelReport rm = kernel_report(M), rn = kernel_report(N);
      REQUIRE(rm.ker_dim_mod_p == rn.ker_dim_mod_p);
      REQUIRE(rm.y_line.has_value() == rn.y_line.has_value());
      if (!rm.y_line) continue;
      REQUIRE(normalize_mod_p(mat_vec_mod(X, 5, *rn.y_line, static_cast<u64>(p)), static_cast<u64>(p)) == *rm.y_line);
    }
  }
}

TEST_CASE("two lines of U are hit equally often") {
  const LineTest t = line_equidistribution_test(5, 2, 3, 40000, {.seed = 17});
  const double a = static_cast<double>(t.counts[0]), b = static_cast<double>(t.counts[6]);
  CHECK(std::abs(a - b) <= 3 * std::sqrt(a + b));
}

TEST_CASE("results do not depend on the worker count") {
  const GammaEstimate g1 = gamma_n_empirical(2, 7, 3, 20000, {.seed = 8, .workers = 1});
  const GammaEstimate g3 = gamma_n_empirical(2, 7, 3, 20000, {.seed = 8, .workers = 3});
  CHECK(g1.hits == g3.hits);
  CHECK(g1.retried == g3.retried);
  const KernelHistogram h1 = kernel_dim_distribution(0, 9, 2, 10000, {.seed = 8, .workers = 1});
  const KernelHistogram h4 = kernel_dim_distribution(0, 9, 2, 10000, {.seed = 8, .workers = 4});
  CHECK(h1.counts == h4.counts);
  const GammaEstimate other = gamma_n_empirical(2, 7, 3, 20000, {.seed = 9});
  CHECK(other.hits != g1.hits);
}

TEST_CASE("argument checks") {
  Rng rng = make_stream(1, 0);
  CHECK_THROWS_AS(sample_alt(3, 2, 20, 3, rng), std::invalid_argument);
  CHECK_THROWS_AS(sample_alt(3, 4, 20, 0, rng), std::invalid_argument);
  CHECK_THROWS_AS(sample_alt(3, 2, 62, 0, rng), std::invalid_argument);
  CHECK_THROWS_AS(gamma_n_empirical(1, 4, 2, 10), std::invalid_argument);
  CHECK_THROWS_AS(gamma_n_empirical(3, 3, 2, 10), std::invalid_argument);
  CHECK_THROWS_AS(kernel_dim_distribution(0, 4, 2, 10), std::invalid_argument);
  CHECK_THROWS_AS(line_equidistribution_test(5, 2, 2, 10), std::invalid_argument);
  CHECK_THROWS_AS(line_index({0, 2}, 3), std::invalid_argument);
}
