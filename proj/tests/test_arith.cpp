#include <random>
#include <set>

#include "doctest.h"
#include "selmerlab/arith.hpp"

using namespace selmerlab;

namespace {

int legendre_by_squares(i64 a, i64 p) {
  i64 r = ((a % p) + p) % p;
  if (r == 0) return 0;
  for (i64 x = 1; x < p; ++x)
    if (x * x % p == r) return 1;
  return -1;
}

// (a,b)_p via primitive solutions of a x^2 + b y^2 = z^2 modulo p^k
int hilbert_by_search(i64 a, i64 b, i64 p) {
  const i64 m = p == 2 ? 32 : p * p;
  for (i64 x = 0; x < m; ++x)
    for (i64 y = 0; y < m; ++y)
      for (i64 z = 0; z < m; ++z) {
        if (x % p == 0 && y % p == 0 && z % p == 0) continue;
        i64 lhs = ((a * x % m) * x + (b * y % m) * y) % m;
        lhs = (lhs + m * m) % m;
        if (lhs == z * z % m) return 0;
      }
  return 1;
}

std::vector<i64> small_primes(i64 bound) {
  std::vector<i64> out;
  for (i64 n = 2; n < bound; ++n)
    if (is_prime(static_cast<u64>(n))) out.push_back(n);
  return out;
}

}  // namespace

TEST_CASE("kronecker examples") {
  CHECK(kronecker(i64{1}, i64{9}) == 1);
  CHECK(kronecker(i64{5}, i64{1}) == 1);
  CHECK(kronecker(i64{2}, i64{7}) == 1);
  CHECK(kronecker(i64{2}, i64{5}) == -1);
  CHECK_THROWS_AS(kronecker(i64{0}, i64{0}), std::invalid_argument);
}

TEST_CASE("kronecker agrees with squares mod p") {
  for (i64 p : small_primes(200)) {
    if (p == 2) continue;
    for (i64 a = -60; a <= 60; ++a) CHECK(kronecker(a, p) == legendre_by_squares(a, p));
  }
}

TEST_CASE("kronecker is multiplicative in both arguments") {
  for (i64 a = -20; a <= 20; ++a)
    for (i64 b = -20; b <= 20; ++b)
      for (i64 n = 1; n <= 40; ++n) {
        if (a == 0 || b == 0) continue;
        CHECK(kronecker(a * b, n) == kronecker(a, n) * kronecker(b, n));
        CHECK(kronecker(n, a * b) == kronecker(n, a) * kronecker(n, b));
      }
}

TEST_CASE("square classes reduce to squarefree representatives") {
  CHECK(SquareClass(12).value() == 3);
  CHECK(SquareClass(-50).value() == -2);
  CHECK((SquareClass(6) * SquareClass(10)).value() == 15);
  CHECK(SquareClass::of(static_cast<i128>(1) << 100).value() == 1);
  CHECK(SquareClass::of(-static_cast<i128>(3) * 1000003 * 1000003).value() == -3);
}

TEST_CASE("hilbert examples") {
  CHECK(hilbert(SquareClass(-1), SquareClass(-1), Place::real()) == 1);
  CHECK(hilbert(SquareClass(-1), SquareClass(-1), Place::at(2)) == 1);
  CHECK(hilbert(SquareClass(2), SquareClass(7), Place::at(3)) == 0);
  CHECK(hilbert_product_check(SquareClass(-1), SquareClass(-1)) == 0);
  CHECK(hilbert_product_check(SquareClass(3), SquareClass(5)) == 0);
  CHECK(hilbert_product_check(SquareClass(-2), SquareClass(15)) == 0);
}

TEST_CASE("hilbert agrees with solubility search") {
  for (i64 p : {2, 3, 5, 7}) {
    Place v = Place::at(p);
    for (i64 a : {-1, 1, 2, -2, 3, -3, 5, -5, 6, 7, -7, 10, 14, 15, -21})
      for (i64 b : {-1, 1, 2, 3, -3, 5, 6, -6, 7, 11, -14, 15}) {
        INFO("a=" << a << " b=" << b << " p=" << p);
        CHECK(hilbert(SquareClass(a), SquareClass(b), v) == hilbert_by_search(a, b, p));
      }
  }
}

TEST_CASE("hilbert is bilinear and symmetric") {
  const std::vector<Place> places{Place::real(), Place::at(2), Place::at(3), Place::at(5), Place::at(7)};
  for (const Place& v : places) {
    std::vector<std::uint8_t> cls(61);
    for (i64 a = -30; a <= 30; ++a)
      if (a) cls[a + 30] = localize(SquareClass(a), v).bits;
    for (i64 a = -30; a <= 30; ++a)
      for (i64 b = -30; b <= 30; ++b)
        for (i64 c = -30; c <= 30; ++c) {
          if (!a || !b || !c) continue;
          const int lhs = hilbert(SquareClass(a) * SquareClass(b), SquareClass(c), v);
          const int rhs = hilbert_bits(cls[a + 30], cls[c + 30], v) ^ hilbert_bits(cls[b + 30], cls[c + 30], v);
          if (lhs != rhs) FAIL("bilinearity fails at " << a << "," << b << "," << c << " v=" << v.name());
        }
    for (i64 a = -30; a <= 30; ++a)
      for (i64 b = -30; b <= 30; ++b)
        if (a && b) CHECK(hilbert(SquareClass(a), SquareClass(b), v) == hilbert(SquareClass(b), SquareClass(a), v));
  }
}

TEST_CASE("hilbert reciprocity on random pairs") {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<i64> dist(-100000, 100000);
  for (int i = 0; i < 10000; ++i) {
    i64 a = dist(rng), b = dist(rng);
    if (!a || !b) continue;
    CHECK(hilbert_product_check(SquareClass(a), SquareClass(b)) == 0);
  }
}

TEST_CASE("localize examples and homomorphism") {
  CHECK(localize(SquareClass(-1), Place::real()).bits == 1);
  CHECK((localize(SquareClass(12), Place::at(3)).bits & 1) == 1);
  LocalClass c17 = localize(SquareClass(17), Place::at(2));
  CHECK((c17.bits & 1) == 0);
  CHECK(c17.unit_mod8() == 1);
  for (i64 u : {1, 3, 5, 7}) CHECK(localize(SquareClass(u), Place::at(2)).unit_mod8() == u);
  for (i64 p : {2, 3, 5, 13, 61}) {
    Place v = Place::at(p);
    for (i64 a = -40; a <= 40; ++a)
      for (i64 b = -40; b <= 40; ++b) {
        if (!a || !b) continue;
        CHECK(localize(a * b, v) == localize(a, v) * localize(b, v));
      }
  }
}

TEST_CASE("local representatives realise every class") {
  for (i64 p : {0, 2, 3, 5, 61}) {
    Place v = p ? Place::at(p) : Place::real();
    for (std::uint8_t bits = 0; bits < (1u << v.width()); ++bits) {
      LocalClass c{v, bits};
      CHECK(localize(local_representative(c), v) == c);
    }
  }
}

TEST_CASE("sq_group dimensions") {
  CHECK(sq_group(SigmaSet::from_primes({}), {}).size() == 2);
  CHECK(sq_group(SigmaSet::from_primes({3, 13, 61}), {}).size() == 5);
  std::vector<i64> extra{5};
  CHECK(sq_group(SigmaSet::from_primes({}), extra).size() == 3);
}

TEST_CASE("squarefree sieve") {
  std::vector<u64> seen;
  squarefree_sieve(10, [&](u64 n, std::span<const u64>) { seen.push_back(n); });
  CHECK(seen == std::vector<u64>{1, 2, 3, 5, 6, 7, 10});
  CHECK(squarefree_count(100) == 61);
  CHECK(squarefree_count(1000000) == 607926);
  for (u64 X : {1, 2, 3, 4, 17, 100, 9999, 65536, 65537, 123456, 999983, 1000000})
    CHECK(squarefree_count(X) == squarefree_count_mobius(X));
}

TEST_CASE("sieve factorizations are complete and ascending") {
  u64 last = 0;
  squarefree_sieve(300000, [&](u64 n, std::span<const u64> primes) {
    CHECK(n > last);
    last = n;
    u64 prod = 1;
    for (std::size_t i = 0; i < primes.size(); ++i) {
      if (i) CHECK(primes[i] > primes[i - 1]);
      CHECK(is_prime(primes[i]));
      prod *= primes[i];
    }
    CHECK(prod == n);
  });
}

TEST_CASE("factorize") {
  auto f = factorize(-2 * 2 * 3 * 1000003LL);
  CHECK(f.size() == 3);
  CHECK(f[0] == std::pair<i64, int>{2, 2});
  CHECK(f[2] == std::pair<i64, int>{1000003, 1});
  CHECK(squarefree_kernel(999999999989LL * 4) == 999999999989LL);
  CHECK_THROWS_AS(checked_mul(INT64_MAX, 2), overflow_error);
}
