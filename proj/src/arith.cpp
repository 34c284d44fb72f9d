#include "selmerlab/arith.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

namespace selmerlab {

namespace {

using u128 = unsigned __int128;

u64 mulmod(u64 a, u64 b, u64 m) { return static_cast<u64>(static_cast<u128>(a) * b % m); }

u64 powmod(u64 b, u64 e, u64 m) {
  u64 r = 1 % m;
  b %= m;
  while (e) {
    if (e & 1) r = mulmod(r, b, m);
    b = mulmod(b, b, m);
    e >>= 1;
  }
  return r;
}

u64 isqrt(u64 n) {
  u64 r = static_cast<u64>(std::sqrt(static_cast<long double>(n)));
  while (r * r > n) --r;
  while ((r + 1) * (r + 1) <= n) ++r;
  return r;
}

u64 pollard_rho(u64 n) {
  if (n % 2 == 0) return 2;
  for (u64 c = 1;; ++c) {
    u64 x = 2, y = 2, d = 1;
    auto f = [&](u64 v) { return (mulmod(v, v, n) + c) % n; };
    while (d == 1) {
      x = f(x);
      y = f(f(y));
      d = std::gcd(x > y ? x - y : y - x, n);
    }
    if (d != n) return d;
  }
}

void factor_into(u64 n, std::vector<u64>& out) {
  if (n == 1) return;
  if (is_prime(n)) {
    out.push_back(n);
    return;
  }
  u64 d = pollard_rho(n);
  factor_into(d, out);
  factor_into(n / d, out);
}

int jacobi_u(u64 a, u64 n) {
  // n odd positive
  a %= n;
  int t = 1;
  while (a) {
    while (a % 2 == 0) {
      a /= 2;
      u64 r = n % 8;
      if (r == 3 || r == 5) t = -t;
    }
    std::swap(a, n);
    if (a % 4 == 3 && n % 4 == 3) t = -t;
    a %= n;
  }
  return n == 1 ? t : 0;
}

i128 abs128(i128 v) { return v < 0 ? -v : v; }

}  // namespace

i64 checked_mul(i64 a, i64 b) {
  i64 r;
  if (__builtin_mul_overflow(a, b, &r)) throw overflow_error("integer overflow in multiplication");
  return r;
}

i64 checked_add(i64 a, i64 b) {
  i64 r;
  if (__builtin_add_overflow(a, b, &r)) throw overflow_error("integer overflow in addition");
  return r;
}

i64 narrow(i128 v) {
  if (v > static_cast<i128>(INT64_MAX) || v < static_cast<i128>(INT64_MIN))
    throw overflow_error("value exceeds 64 bits");
  return static_cast<i64>(v);
}

std::string to_string(i128 v) {
  if (v == 0) return "0";
  bool neg = v < 0;
  u128 u = neg ? static_cast<u128>(-(v + 1)) + 1 : static_cast<u128>(v);
  std::string s;
  while (u) {
    s.push_back(static_cast<char>('0' + static_cast<int>(u % 10)));
    u /= 10;
  }
  if (neg) s.push_back('-');
  std::reverse(s.begin(), s.end());
  return s;
}

bool is_prime(u64 n) {
  if (n < 2) return false;
  static constexpr std::array<u64, 12> bases{2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37};
  for (u64 p : bases) {
    if (n % p == 0) return n == p;
  }
  u64 d = n - 1;
  int s = 0;
  while (d % 2 == 0) {
    d /= 2;
    ++s;
  }
  for (u64 a : bases) {
    u64 x = powmod(a, d, n);
    if (x == 1 || x == n - 1) continue;
    bool composite = true;
    for (int i = 1; i < s; ++i) {
      x = mulmod(x, x, n);
      if (x == n - 1) {
        composite = false;
        break;
      }
    }
    if (composite) return false;
  }
  return true;
}

std::vector<std::pair<i64, int>> factorize(i64 n) {
  if (n == 0) throw std::invalid_argument("factorize(0)");
  u64 m = n < 0 ? static_cast<u64>(-(n + 1)) + 1 : static_cast<u64>(n);
  std::vector<u64> primes;
  for (u64 p = 2; p < 1000 && p * p <= m; p += (p == 2 ? 1 : 2)) {
    while (m % p == 0) {
      primes.push_back(p);
      m /= p;
    }
  }
  factor_into(m, primes);
  std::sort(primes.begin(), primes.end());
  std::vector<std::pair<i64, int>> out;
  for (u64 p : primes) {
    if (!out.empty() && out.back().first == static_cast<i64>(p))
      ++out.back().second;
    else
      out.emplace_back(static_cast<i64>(p), 1);
  }
  return out;
}

std::vector<i64> prime_divisors(i64 n) {
  std::vector<i64> out;
  for (auto [p, e] : factorize(n)) out.push_back(p);
  return out;
}

int valuation(i128 n, i64 p) {
  if (n == 0) throw std::invalid_argument("valuation of 0");
  int k = 0;
  while (n % p == 0) {
    n /= p;
    ++k;
  }
  return k;
}

i64 squarefree_kernel(i64 n) {
  if (n == 0) throw std::invalid_argument("squarefree kernel of 0");
  i64 r = n < 0 ? -1 : 1;
  for (auto [p, e] : factorize(n))
    if (e % 2) r = checked_mul(r, p);
  return r;
}

i64 mod_pow(i64 b, i64 e, i64 m) {
  i64 r = static_cast<i64>(powmod(static_cast<u64>(((b % m) + m) % m), static_cast<u64>(e), static_cast<u64>(m)));
  return r;
}

int kronecker(i128 a, i64 n) {
  if (a == 0 && n == 0) throw std::invalid_argument("kronecker(0, 0)");
  if (n == 0) return abs128(a) == 1 ? 1 : 0;
  int t = 1;
  if (n < 0) {
    n = -n;
    if (a < 0) t = -t;
  }
  while (n % 2 == 0) {
    n /= 2;
    if (a % 2 == 0) return 0;
    i128 r = ((a % 8) + 8) % 8;
    if (r == 3 || r == 5) t = -t;
  }
  if (n == 1) return t;
  i128 ar = a % n;
  if (ar < 0) ar += n;
  return t * jacobi_u(static_cast<u64>(ar), static_cast<u64>(n));
}

int kronecker(i64 a, i64 n) { return kronecker(static_cast<i128>(a), n); }

SquareClass::SquareClass(i64 n) : v_(squarefree_kernel(n)) {}

SquareClass SquareClass::of(i128 n) {
  if (n == 0) throw std::invalid_argument("square class of 0");
  i128 a = abs128(n);
  i64 sign = n < 0 ? -1 : 1;
  // strip square factors of small primes so that the remainder fits in 64 bits
  i128 core = 1;
  for (i64 p = 2; p < 100000 && static_cast<i128>(p) * p <= a; ++p) {
    int k = 0;
    while (a % p == 0) {
      a /= p;
      ++k;
    }
    if (k % 2) core *= p;
  }
  SquareClass c;
  c.v_ = squarefree_kernel(narrow(a));
  c.v_ = checked_mul(c.v_, narrow(core) * sign);
  return c;
}

SquareClass operator*(SquareClass a, SquareClass b) {
  i64 g = std::gcd(a.v_, b.v_);
  SquareClass c;
  c.v_ = checked_mul(a.v_ / g, b.v_ / g);
  return c;
}

Place Place::at(i64 prime) {
  if (prime == 2) return {Kind::two, 2};
  if (prime < 3 || !is_prime(static_cast<u64>(prime))) throw std::invalid_argument("place requires a prime");
  return {Kind::odd, prime};
}

std::string Place::name() const { return is_real() ? std::string("inf") : std::to_string(p); }

int LocalClass::unit_mod8() const {
  static constexpr std::array<int, 4> units{1, 7, 5, 3};
  return units[(bits >> 1) & 3];
}

LocalClass operator*(LocalClass a, LocalClass b) {
  if (!(a.place == b.place)) throw std::invalid_argument("local classes at different places");
  return {a.place, static_cast<std::uint8_t>(a.bits ^ b.bits)};
}

std::uint8_t local_bits(i128 n, const Place& v) {
  if (n == 0) throw std::invalid_argument("local class of 0");
  switch (v.kind) {
    case Place::Kind::real:
      return n < 0 ? 1 : 0;
    case Place::Kind::two: {
      int k = 0;
      while (n % 2 == 0) {
        n /= 2;
        ++k;
      }
      int u = static_cast<int>(((n % 8) + 8) % 8);
      std::uint8_t eps = (u % 4 == 3) ? 1 : 0;
      std::uint8_t om = (u == 3 || u == 5) ? 1 : 0;
      return static_cast<std::uint8_t>((k & 1) | (eps << 1) | (om << 2));
    }
    case Place::Kind::odd: {
      int k = 0;
      while (n % v.p == 0) {
        n /= v.p;
        ++k;
      }
      int r = kronecker(n, v.p) == -1 ? 1 : 0;
      return static_cast<std::uint8_t>((k & 1) | (r << 1));
    }
  }
  return 0;
}

LocalClass localize(SquareClass c, const Place& v) { return {v, local_bits(c.value(), v)}; }
LocalClass localize(i128 n, const Place& v) { return {v, local_bits(n, v)}; }

i64 local_representative(const LocalClass& c) {
  const Place& v = c.place;
  switch (v.kind) {
    case Place::Kind::real:
      return (c.bits & 1) ? -1 : 1;
    case Place::Kind::two:
      return ((c.bits & 1) ? 2 : 1) * c.unit_mod8();
    case Place::Kind::odd: {
      i64 u = 1;
      if (c.bits & 2) {
        u = 2;
        while (kronecker(u, v.p) != -1) ++u;
      }
      return ((c.bits & 1) ? v.p : 1) * u;
    }
  }
  return 1;
}

int hilbert_bits(std::uint8_t x, std::uint8_t y, const Place& v) {
  switch (v.kind) {
    case Place::Kind::real:
      return x & y & 1;
    case Place::Kind::two: {
      int a = x & 1, eu = (x >> 1) & 1, wu = (x >> 2) & 1;
      int b = y & 1, ev = (y >> 1) & 1, wv = (y >> 2) & 1;
      return (eu & ev) ^ (a & wv) ^ (b & wu);
    }
    case Place::Kind::odd: {
      int a = x & 1, ru = (x >> 1) & 1;
      int b = y & 1, rv = (y >> 1) & 1;
      int e = (v.p % 4 == 3) ? 1 : 0;
      return (a & b & e) ^ (b & ru) ^ (a & rv);
    }
  }
  return 0;
}

int hilbert(SquareClass a, SquareClass b, const Place& v) {
  return hilbert_bits(local_bits(a.value(), v), local_bits(b.value(), v), v);
}

int hilbert_product_check(SquareClass a, SquareClass b) {
  std::vector<i64> primes{2};
  for (i64 p : prime_divisors(a.value())) primes.push_back(p);
  for (i64 p : prime_divisors(b.value())) primes.push_back(p);
  std::sort(primes.begin(), primes.end());
  primes.erase(std::unique(primes.begin(), primes.end()), primes.end());
  int s = hilbert(a, b, Place::real());
  for (i64 p : primes) s ^= hilbert(a, b, Place::at(p));
  return s;
}

SigmaSet SigmaSet::from_primes(std::vector<i64> primes) {
  primes.push_back(2);
  std::sort(primes.begin(), primes.end());
  primes.erase(std::unique(primes.begin(), primes.end()), primes.end());
  SigmaSet s;
  s.places.push_back(Place::real());
  s.N = 1;
  for (i64 p : primes) {
    s.places.push_back(Place::at(p));
    s.N = checked_mul(s.N, p);
  }
  return s;
}

std::vector<i64> SigmaSet::finite_primes() const {
  std::vector<i64> out;
  for (const auto& v : places)
    if (!v.is_real()) out.push_back(v.p);
  return out;
}

bool SigmaSet::contains_prime(i64 p) const { return N % p == 0; }

std::vector<SquareClass> sq_group(const SigmaSet& sigma, std::span<const i64> extra) {
  std::vector<SquareClass> out{SquareClass(-1)};
  for (i64 p : sigma.finite_primes()) out.emplace_back(p);
  for (i64 p : extra) {
    if (sigma.contains_prime(p)) throw std::invalid_argument("extra prime already in sigma");
    out.emplace_back(p);
  }
  return out;
}

void squarefree_sieve(u64 X, const SieveVisitor& visit) {
  if (X == 0) return;
  const u64 root = isqrt(X);
  std::vector<u64> primes;
  {
    std::vector<char> comp(root + 1, 0);
    for (u64 i = 2; i <= root; ++i) {
      if (comp[i]) continue;
      primes.push_back(i);
      for (u64 j = i * i; j <= root; j += i) comp[j] = 1;
    }
  }
  constexpr u64 seg = 1 << 16;
  constexpr int stride = 16;
  std::vector<u64> rem(seg), fac(seg * stride);
  std::vector<std::uint8_t> cnt(seg);
  std::vector<char> sqf(seg);
  for (u64 lo = 1; lo <= X; lo += seg) {
    const u64 hi = std::min(X + 1, lo + seg);
    const u64 len = hi - lo;
    for (u64 i = 0; i < len; ++i) {
      rem[i] = lo + i;
      cnt[i] = 0;
      sqf[i] = 1;
    }
    for (u64 p : primes) {
      const u64 pp = p * p;
      for (u64 m = (lo + pp - 1) / pp * pp; m < hi; m += pp) sqf[m - lo] = 0;
      for (u64 m = (lo + p - 1) / p * p; m < hi; m += p) {
        const u64 i = m - lo;
        if (!sqf[i]) continue;
        rem[i] /= p;
        fac[i * stride + cnt[i]++] = p;
      }
    }
    for (u64 i = 0; i < len; ++i) {
      if (!sqf[i]) continue;
      // leftover cofactor is a single prime above sqrt(X)
      if (rem[i] > 1) fac[i * stride + cnt[i]++] = rem[i];
      visit(lo + i, std::span<const u64>(&fac[i * stride], cnt[i]));
    }
  }
}

u64 squarefree_count(u64 X) {
  u64 c = 0;
  squarefree_sieve(X, [&](u64, std::span<const u64>) { ++c; });
  return c;
}

u64 squarefree_count_mobius(u64 X) {
  const u64 root = isqrt(X);
  std::vector<int> mu(root + 1, 1);
  std::vector<char> comp(root + 1, 0);
  for (u64 i = 2; i <= root; ++i) {
    if (comp[i]) continue;
    for (u64 j = i; j <= root; j += i) {
      comp[j] = j != i;
      mu[j] = -mu[j];
    }
    for (u64 j = i * i; j <= root; j += i * i) mu[j] = 0;
  }
  i64 s = 0;
  for (u64 k = 1; k <= root; ++k) s += mu[k] * static_cast<i64>(X / (k * k));
  return static_cast<u64>(s);
}

}  // namespace selmerlab
