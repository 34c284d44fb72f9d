#include "selmerlab/randmat.hpp"

#include <algorithm>
#include <boost/math/distributions/chi_squared.hpp>
#include <cmath>
#include <stdexcept>
#include <thread>
#include <utility>

namespace selmerlab::randmat {

namespace {

using dist::Integer;
using dist::Rational;

u64 upow(u64 b, int e) {
  u64 r = 1;
  while (e-- > 0) r *= b;
  return r;
}

u64 mulmod(u64 a, u64 b, u64 q) { return static_cast<u64>(static_cast<unsigned __int128>(a) * b % q); }
u64 submod(u64 a, u64 b, u64 q) { return a >= b ? a - b : a + (q - b); }
u64 negmod(u64 a, u64 q) { return a == 0 ? 0 : q - a; }

u64 invmod(u64 a, u64 q) {
  i128 t = 0, nt = 1, r = static_cast<i128>(q), nr = static_cast<i128>(a);
  while (nr != 0) {
    const i128 k = r / nr;
    t = std::exchange(nt, t - k * nt);
    r = std::exchange(nr, r - k * nr);
  }
  if (r != 1) throw std::logic_error("invmod: not a unit");
  if (t < 0) t += static_cast<i128>(q);
  return static_cast<u64>(t);
}

int val(u64 x, int p, int e) {
  if (x == 0) return e;
  int v = 0;
  while (x % static_cast<u64>(p) == 0) {
    x /= static_cast<u64>(p);
    ++v;
  }
  return v;
}

void check_prime(int p) {
  if (p < 2 || !is_prime(static_cast<u64>(p))) throw std::invalid_argument("randmat: p must be prime");
}

void check_precision(int p, int e) {
  if (e < 1 || e > max_precision(p)) throw std::invalid_argument("randmat: precision out of range");
}

int resolve_e(int p, int e) {
  const int out = e == 0 ? default_precision(p) : e;
  check_precision(p, out);
  return out;
}

int retry_precision(int p, int e) { return std::min(2 * e, max_precision(p)); }

// Runs body(chunk_rng, begin, end, acc) over fixed chunks; chunk c draws from make_stream(seed, c).
template <class Acc, class Body>
Acc run_chunks(u64 N, const SampleOptions& opts, Body body) {
  const u64 chunks = (N + kChunk - 1) / kChunk;
  std::vector<Acc> partial(chunks);
  auto work = [&](u64 first, u64 step) {
    for (u64 c = first; c < chunks; c += step) {
      Rng rng = make_stream(opts.seed, c);
      const u64 lo = c * kChunk, hi = std::min(N, lo + kChunk);
      body(rng, hi - lo, partial[c]);
    }
  };
  const u64 workers = static_cast<u64>(std::max(1, opts.workers));
  if (workers == 1) {
    work(0, 1);
  } else {
    std::vector<std::jthread> pool;
    for (u64 w = 0; w < workers; ++w) pool.emplace_back(work, w, workers);
  }
  Acc total{};
  for (const Acc& a : partial) total += a;
  return total;
}

void assert_even_rank(const KernelReport& r) {
  if (r.rank_mod_p % 2 != 0) throw std::logic_error("randmat: odd rank mod p for an alternating matrix");
}

}  // namespace

int default_precision(int p) { return p == 2 ? kDefaultPrecision2 : kDefaultPrecisionOdd; }

int max_precision(int p) {
  check_prime(p);
  int e = 0;
  u64 q = 1;
  while (q <= (u64{1} << 62) / static_cast<u64>(p)) {
    q *= static_cast<u64>(p);
    ++e;
  }
  return q == (u64{1} << 62) ? e - 1 : e;
}

Rng make_stream(std::uint64_t seed, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), static_cast<std::uint32_t>(index),
                    static_cast<std::uint32_t>(index >> 32), 0x72616e64u};
  return Rng(seq);
}

PadicAltMatrix PadicAltMatrix::zero(int s, int p, int e) {
  if (s < 1) throw std::invalid_argument("PadicAltMatrix: s must be positive");
  check_prime(p);
  check_precision(p, e);
  PadicAltMatrix M;
  M.s = s;
  M.p = p;
  M.e = e;
  M.modulus = upow(static_cast<u64>(p), e);
  M.entries.assign(static_cast<std::size_t>(s) * s, 0);
  return M;
}

void PadicAltMatrix::set(int i, int j, u64 v) {
  if (i == j) throw std::invalid_argument("PadicAltMatrix::set: diagonal is zero");
  v %= modulus;
  entries[static_cast<std::size_t>(i) * s + j] = v;
  entries[static_cast<std::size_t>(j) * s + i] = negmod(v, modulus);
}

bool PadicAltMatrix::is_alternating() const {
  for (int i = 0; i < s; ++i) {
    if (at(i, i) != 0) return false;
    for (int j = i + 1; j < s; ++j)
      if ((at(i, j) + at(j, i)) % modulus != 0) return false;
  }
  return true;
}

PadicAltMatrix sample_alt(int s, int p, int e, int constraint_n, Rng& rng) {
  if (constraint_n < 0 || constraint_n >= s) throw std::invalid_argument("sample_alt: need 0 <= constraint_n < s");
  PadicAltMatrix M = PadicAltMatrix::zero(s, p, e);
  const u64 q = M.modulus, pp = static_cast<u64>(p);
  std::uniform_int_distribution<u64> full(0, q - 1), divisible(0, q / pp - 1);
  for (int i = 0; i < s; ++i)
    for (int j = i + 1; j < s; ++j) M.set(i, j, i < constraint_n ? pp * divisible(rng) : full(rng));
  return M;
}

PadicAltMatrix refine(const PadicAltMatrix& M, int e_new, Rng& rng) {
  if (e_new < M.e) throw std::invalid_argument("refine: precision must not drop");
  PadicAltMatrix R = PadicAltMatrix::zero(M.s, M.p, e_new);
  std::uniform_int_distribution<u64> digits(0, R.modulus / M.modulus - 1);
  for (int i = 0; i < M.s; ++i)
    for (int j = i + 1; j < M.s; ++j) R.set(i, j, M.at(i, j) + M.modulus * digits(rng));
  return R;
}

PadicAltMatrix truncate(const PadicAltMatrix& M, int e_new) {
  if (e_new > M.e) throw std::invalid_argument("truncate: precision must not grow");
  PadicAltMatrix R = PadicAltMatrix::zero(M.s, M.p, e_new);
  for (std::size_t k = 0; k < M.entries.size(); ++k) R.entries[k] = M.entries[k] % R.modulus;
  return R;
}

PadicAltMatrix conjugate(const PadicAltMatrix& M, const std::vector<u64>& X) {
  const int s = M.s;
  const u64 q = M.modulus;
  if (X.size() != static_cast<std::size_t>(s) * s) throw std::invalid_argument("conjugate: X must be s x s");
  std::vector<u64> MX(static_cast<std::size_t>(s) * s, 0);
  for (int i = 0; i < s; ++i)
    for (int j = 0; j < s; ++j) {
      u64 acc = 0;
      for (int k = 0; k < s; ++k) acc = (acc + mulmod(M.at(i, k), X[static_cast<std::size_t>(k) * s + j] % q, q)) % q;
      MX[static_cast<std::size_t>(i) * s + j] = acc;
    }
  PadicAltMatrix R = PadicAltMatrix::zero(s, M.p, M.e);
  for (int i = 0; i < s; ++i)
    for (int j = 0; j < s; ++j) {
      u64 acc = 0;
      for (int k = 0; k < s; ++k)
        acc = (acc + mulmod(X[static_cast<std::size_t>(k) * s + i] % q, MX[static_cast<std::size_t>(k) * s + j], q)) % q;
      R.entries[static_cast<std::size_t>(i) * s + j] = acc;
    }
  return R;
}

KernelReport kernel_report(const PadicAltMatrix& M) {
  const int s = M.s, p = M.p, e = M.e;
  const u64 q = M.modulus, pp = static_cast<u64>(p);
  std::vector<u64> A = M.entries;
  std::vector<u64> C(static_cast<std::size_t>(s) * s, 0);
  for (int i = 0; i < s; ++i) C[static_cast<std::size_t>(i) * s + i] = 1;
  auto a = [&](int i, int j) -> u64& { return A[static_cast<std::size_t>(i) * s + j]; };
  auto c = [&](int i, int j) -> u64& { return C[static_cast<std::size_t>(i) * s + j]; };

  KernelReport out;
  out.divisor_valuations.assign(s, e);
  for (int k = 0; k < s; ++k) {
    int bi = -1, bj = -1, bv = e;
    for (int i = k; i < s && bv > 0; ++i)
      for (int j = k; j < s; ++j) {
        const int v = val(a(i, j), p, e);
        if (v < bv) {
          bv = v;
          bi = i;
          bj = j;
          if (v == 0) break;
        }
      }
    if (bv == e) break;
    if (bi != k)
      for (int j = 0; j < s; ++j) std::swap(a(bi, j), a(k, j));
    if (bj != k) {
      for (int i = 0; i < s; ++i) std::swap(a(i, bj), a(i, k));
      for (int i = 0; i < s; ++i) std::swap(c(i, bj), c(i, k));
    }
    out.divisor_valuations[k] = bv;
    const u64 pv = upow(pp, bv);
    const u64 uinv = invmod((a(k, k) / pv) % q, q);
    for (int r = k + 1; r < s; ++r) {
      if (a(r, k) == 0) continue;
      const u64 f = mulmod(a(r, k) / pv, uinv, q);
      for (int j = k; j < s; ++j) a(r, j) = submod(a(r, j), mulmod(f, a(k, j), q), q);
    }
    for (int col = k + 1; col < s; ++col) {
      if (a(k, col) == 0) continue;
      const u64 f = mulmod(a(k, col) / pv, uinv, q);
      a(k, col) = 0;
      for (int i = 0; i < s; ++i) c(i, col) = submod(c(i, col), mulmod(f, c(i, k), q), q);
    }
  }

  out.rank_mod_p = static_cast<int>(std::count(out.divisor_valuations.begin(), out.divisor_valuations.end(), 0));
  out.ker_dim_mod_p = s - out.rank_mod_p;
  const auto zeros = std::count(out.divisor_valuations.begin(), out.divisor_valuations.end(), e);
  if (zeros == 1) {
    const int k = static_cast<int>(std::find(out.divisor_valuations.begin(), out.divisor_valuations.end(), e) -
                                   out.divisor_valuations.begin());
    std::vector<u64> y(s);
    for (int i = 0; i < s; ++i) y[i] = c(i, k) % pp;
    const auto lead = std::find_if(y.begin(), y.end(), [](u64 x) { return x != 0; });
    if (lead == y.end()) throw std::logic_error("kernel_report: kernel generator vanishes mod p");
    const u64 inv = invmod(*lead, pp);
    for (u64& x : y) x = mulmod(x, inv, pp);
    out.y_line = std::move(y);
  }
  return out;
}

int rank_mod_p(const PadicAltMatrix& M) {
  const int s = M.s;
  const u64 pp = static_cast<u64>(M.p);
  std::vector<u64> A(M.entries.size());
  for (std::size_t k = 0; k < A.size(); ++k) A[k] = M.entries[k] % pp;
  auto a = [&](int i, int j) -> u64& { return A[static_cast<std::size_t>(i) * s + j]; };
  int rank = 0;
  for (int col = 0; col < s && rank < s; ++col) {
    int piv = -1;
    for (int i = rank; i < s; ++i)
      if (a(i, col) != 0) {
        piv = i;
        break;
      }
    if (piv < 0) continue;
    for (int j = 0; j < s; ++j) std::swap(a(piv, j), a(rank, j));
    const u64 inv = invmod(a(rank, col), pp);
    for (int i = 0; i < s; ++i) {
      if (i == rank || a(i, col) == 0) continue;
      const u64 f = mulmod(a(i, col), inv, pp);
      for (int j = 0; j < s; ++j) a(i, j) = submod(a(i, j), mulmod(f, a(rank, j), pp), pp);
    }
    ++rank;
  }
  return rank;
}

double GammaEstimate::z() const {
  if (stderr_ == 0) return estimate == dist::to_double(exact) ? 0.0 : INFINITY;
  return (estimate - dist::to_double(exact)) / stderr_;
}

namespace {

struct GammaAcc {
  u64 samples = 0, hits = 0, retried = 0, undetermined = 0;
  GammaAcc& operator+=(const GammaAcc& o) {
    samples += o.samples;
    hits += o.hits;
    retried += o.retried;
    undetermined += o.undetermined;
    return *this;
  }
};

}  // namespace

GammaEstimate gamma_n_empirical(int n, int s, int p, u64 N, const SampleOptions& opts) {
  if (n < 1 || s <= n || s % 2 == 0) throw std::invalid_argument("gamma_n_empirical: need s odd and 1 <= n < s");
  const int e = resolve_e(p, opts.e);
  const int e2 = retry_precision(p, e);
  const GammaAcc acc = run_chunks<GammaAcc>(N, opts, [&](Rng& rng, u64 count, GammaAcc& out) {
    for (u64 t = 0; t < count; ++t) {
      const PadicAltMatrix M = sample_alt(s, p, e, n, rng);
      KernelReport r = kernel_report(M);
      assert_even_rank(r);
      ++out.samples;
      if (!r.y_line) {
        ++out.retried;
        r = kernel_report(refine(M, e2, rng));
        assert_even_rank(r);
        if (!r.y_line) {
          ++out.undetermined;
          continue;
        }
      }
      const std::vector<u64>& y = *r.y_line;
      if (y[0] == 1 && std::all_of(y.begin() + 1, y.end(), [](u64 x) { return x == 0; })) ++out.hits;
    }
  });
  GammaEstimate g;
  g.n = n;
  g.s = s;
  g.p = p;
  g.e = e;
  g.samples = acc.samples;
  g.hits = acc.hits;
  g.retried = acc.retried;
  g.undetermined = acc.undetermined;
  const u64 kept = acc.samples - acc.undetermined;
  g.estimate = kept == 0 ? 0.0 : static_cast<double>(acc.hits) / static_cast<double>(kept);
  g.stderr_ = kept == 0 ? 0.0 : std::sqrt(g.estimate * (1 - g.estimate) / static_cast<double>(kept));
  g.exact = dist::gamma_exact(n, s, p);
  return g;
}

Integer alt_rank_count(int s, int k, int p) {
  if (k < 0 || 2 * k > s) return 0;
  const Integer P = p;
  Integer num = boost::multiprecision::pow(P, k * (k - 1));
  Integer den = 1;
  for (int i = 0; i < 2 * k; ++i) num *= boost::multiprecision::pow(P, s - i) - 1;
  for (int i = 1; i <= k; ++i) den *= boost::multiprecision::pow(P, 2 * i) - 1;
  return num / den;
}

std::vector<Rational> exact_kernel_distribution(int n, int s, int p) {
  if (n < 0 || s <= n) throw std::invalid_argument("exact_kernel_distribution: need 0 <= n < s");
  check_prime(p);
  const int t = s - n;
  const Integer total = boost::multiprecision::pow(Integer(p), t * (t - 1) / 2);
  std::vector<Rational> law(s + 1, Rational(0));
  for (int k = 0; 2 * k <= t; ++k) law[n + t - 2 * k] = Rational(alt_rank_count(t, k, p), total);
  return law;
}

Rational gamma_from_kernel_law(int n, int s, int p) {
  const std::vector<Rational> law = exact_kernel_distribution(n, s, p);
  Rational g = 0;
  for (int d = 1; d <= s; ++d)
    if (law[d] != 0) g += law[d] * Rational(Integer(p - 1), boost::multiprecision::pow(Integer(p), d) - 1);
  return g;
}

double alpha_prediction(int n, int dim, int p) {
  const int m = (n + 1) % 2;
  if (dim < n + m || (dim - n - m) % 2 != 0) return 0.0;
  return dist::to_double(dist::alpha(dim - n, p));
}

double KernelHistogram::mass(int dim) const {
  if (samples == 0 || dim < 0 || dim >= static_cast<int>(counts.size())) return 0.0;
  return static_cast<double>(counts[dim]) / static_cast<double>(samples);
}

double KernelHistogram::max_alpha_gap() const {
  double gap = 0;
  for (int d = 0; d <= s; ++d) gap = std::max(gap, std::abs(mass(d) - alpha_prediction(n, d, p)));
  return gap;
}

bool KernelHistogram::parity_ok() const {
  for (int d = 0; d <= s; ++d)
    if (counts[d] != 0 && (d < n || (d - s) % 2 != 0)) return false;
  return true;
}

namespace {

struct HistAcc {
  std::vector<u64> counts;
  HistAcc& operator+=(const HistAcc& o) {
    if (counts.size() < o.counts.size()) counts.resize(o.counts.size(), 0);
    for (std::size_t i = 0; i < o.counts.size(); ++i) counts[i] += o.counts[i];
    return *this;
  }
};

}  // namespace

KernelHistogram kernel_dim_distribution(int n, int s, int p, u64 N, const SampleOptions& opts) {
  if (s % 2 == 0 || n < 0 || s <= n) throw std::invalid_argument("kernel_dim_distribution: need s odd and 0 <= n < s");
  const int e = resolve_e(p, opts.e);
  const HistAcc acc = run_chunks<HistAcc>(N, opts, [&](Rng& rng, u64 count, HistAcc& out) {
    out.counts.assign(s + 1, 0);
    for (u64 t = 0; t < count; ++t) {
      const KernelReport r = kernel_report(sample_alt(s, p, e, n, rng));
      assert_even_rank(r);
      ++out.counts[r.ker_dim_mod_p];
    }
  });
  KernelHistogram h;
  h.n = n;
  h.s = s;
  h.p = p;
  h.e = e;
  h.samples = N;
  h.counts = acc.counts;
  h.counts.resize(s + 1, 0);
  return h;
}

std::vector<std::vector<u64>> lines_of(int k, int p) {
  std::vector<std::vector<u64>> out;
  const u64 pp = static_cast<u64>(p);
  for (int lead = 0; lead < k; ++lead) {
    const u64 tails = upow(pp, k - 1 - lead);
    for (u64 t = 0; t < tails; ++t) {
      std::vector<u64> v(k, 0);
      v[lead] = 1;
      u64 x = t;
      for (int i = k - 1; i > lead; --i) {
        v[i] = x % pp;
        x /= pp;
      }
      out.push_back(std::move(v));
    }
  }
  return out;
}

std::size_t line_index(const std::vector<u64>& v, int p) {
  const int k = static_cast<int>(v.size());
  const u64 pp = static_cast<u64>(p);
  std::size_t idx = 0;
  int lead = 0;
  while (lead < k && v[lead] == 0) idx += upow(pp, k - 1 - lead++);
  if (lead == k || v[lead] != 1) throw std::invalid_argument("line_index: vector is not normalized");
  u64 tail = 0;
  for (int i = lead + 1; i < k; ++i) tail = tail * pp + v[i];
  return idx + tail;
}

namespace {

struct LineAcc {
  u64 drawn = 0, conditioned = 0, undetermined = 0;
  std::vector<u64> counts;
  LineAcc& operator+=(const LineAcc& o) {
    drawn += o.drawn;
    conditioned += o.conditioned;
    undetermined += o.undetermined;
    if (counts.size() < o.counts.size()) counts.resize(o.counts.size(), 0);
    for (std::size_t i = 0; i < o.counts.size(); ++i) counts[i] += o.counts[i];
    return *this;
  }
};

}  // namespace

LineTest line_equidistribution_test(int s, int p, int U_dim, u64 N, const SampleOptions& opts) {
  if (s % 2 == 0 || U_dim < 1 || U_dim > s || (s - U_dim) % 2 != 0)
    throw std::invalid_argument("line_equidistribution_test: need s odd, 1 <= U_dim <= s, s - U_dim even");
  const int e = resolve_e(p, opts.e);
  const int e2 = retry_precision(p, e);
  const std::size_t n_lines = lines_of(U_dim, p).size();
  const int forced = std::min(U_dim, s - 1);
  const LineAcc acc = run_chunks<LineAcc>(N, opts, [&](Rng& rng, u64 count, LineAcc& out) {
    out.counts.assign(n_lines, 0);
    for (u64 t = 0; t < count; ++t) {
      const PadicAltMatrix M = sample_alt(s, p, e, forced, rng);
      ++out.drawn;
      KernelReport r = kernel_report(M);
      assert_even_rank(r);
      if (r.ker_dim_mod_p != U_dim) continue;
      ++out.conditioned;
      if (!r.y_line) {
        r = kernel_report(refine(M, e2, rng));
        if (!r.y_line) {
          ++out.undetermined;
          continue;
        }
      }
      const std::vector<u64>& y = *r.y_line;
      if (std::any_of(y.begin() + U_dim, y.end(), [](u64 x) { return x != 0; }))
        throw std::logic_error("line_equidistribution_test: kernel line outside U");
      ++out.counts[line_index(std::vector<u64>(y.begin(), y.begin() + U_dim), p)];
    }
  });
  LineTest out;
  out.s = s;
  out.p = p;
  out.U_dim = U_dim;
  out.e = e;
  out.drawn = acc.drawn;
  out.conditioned = acc.conditioned;
  out.undetermined = acc.undetermined;
  out.counts = acc.counts;
  out.counts.resize(n_lines, 0);
  u64 used = 0;
  for (u64 c : out.counts) used += c;
  out.dof = static_cast<int>(n_lines) - 1;
  const double expected = static_cast<double>(used) / static_cast<double>(n_lines);
  if (n_lines == 1) {
    out.inconclusive = used == 0;
    return out;
  }
  if (expected < 5.0) {
    out.inconclusive = true;
    return out;
  }
  for (u64 c : out.counts) out.chi2 += (static_cast<double>(c) - expected) * (static_cast<double>(c) - expected) / expected;
  out.p_value = boost::math::cdf(boost::math::complement(boost::math::chi_squared(out.dof), out.chi2));
  return out;
}

}  // namespace selmerlab::randmat
