#include "selmerlab/pell.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <thread>

namespace selmerlab::pell {

namespace {

using dist::Integer;

void require_squarefree(i64 d, const char* who) {
  if (d < 2 || squarefree_kernel(d) != d) throw std::invalid_argument(std::string(who) + ": need squarefree d >= 2");
}

u64 isqrt_u64(u64 n) {
  u64 r = static_cast<u64>(std::sqrt(static_cast<long double>(n)));
  while (r > 0 && static_cast<unsigned __int128>(r) * r > n) --r;
  while (static_cast<unsigned __int128>(r + 1) * (r + 1) <= n) ++r;
  return r;
}

bool is_square_u64(u64 n) {
  const u64 r = isqrt_u64(n);
  return r * r == n;
}

std::vector<u64> prime_list(i64 d) {
  std::vector<u64> out;
  for (i64 p : prime_divisors(d)) out.push_back(static_cast<u64>(p));
  return out;
}

bool family_from_primes(std::span<const u64> primes) {
  return std::all_of(primes.begin(), primes.end(), [](u64 p) { return p == 2 || p % 4 == 1; });
}

}  // namespace

bool PellSelmer::contains(i64 x) const { return std::binary_search(elements.begin(), elements.end(), x); }

bool in_family(i64 d) {
  if (d < 1 || squarefree_kernel(d) != d) return false;
  return family_from_primes(prime_list(d));
}

i64 cf_period(i64 d) {
  require_squarefree(d, "cf_period");
  const i64 a0 = static_cast<i64>(isqrt_u64(static_cast<u64>(d)));
  i64 m = 0, q = 1, a = a0, period = 0;
  do {
    m = q * a - m;
    q = (d - m * m) / q;
    a = (a0 + m) / q;
    ++period;
  } while (a != 2 * a0);
  return period;
}

bool pell_soluble(i64 d) { return cf_period(d) % 2 == 1; }

Fundamental fundamental_solution(i64 d) {
  require_squarefree(d, "fundamental_solution");
  const i64 a0 = static_cast<i64>(isqrt_u64(static_cast<u64>(d)));
  i64 m = 0, q = 1, a = a0;
  Integer h0 = 1, h1 = a0, k0 = 0, k1 = 1;
  i64 period = 0;
  while (true) {
    m = q * a - m;
    q = (d - m * m) / q;
    a = (a0 + m) / q;
    ++period;
    if (a == 2 * a0) break;
    Integer h2 = a * h1 + h0, k2 = a * k1 + k0;
    h0 = std::move(h1);
    h1 = std::move(h2);
    k0 = std::move(k1);
    k1 = std::move(k2);
  }
  return {h1, k1, period % 2 == 1 ? -1 : 1};
}

std::optional<bool> pell_brute_force(i64 d, u64 y_max) {
  require_squarefree(d, "pell_brute_force");
  const unsigned __int128 top = static_cast<unsigned __int128>(d) * y_max * y_max + 1;
  if (top >> 63) throw std::invalid_argument("pell_brute_force: d * y_max^2 too large");
  for (u64 y = 1; y <= y_max; ++y) {
    const u64 t = static_cast<u64>(d) * y * y;
    if (is_square_u64(t - 1)) return true;
    if (is_square_u64(t + 1)) return false;
  }
  return std::nullopt;
}

PellSelmer pell_selmer(i64 d) {
  require_squarefree(d, "pell_selmer");
  const std::vector<u64> primes = prime_list(d);
  return pell_selmer(d, primes);
}

PellSelmer pell_selmer(i64 d, std::span<const u64> primes_of_d) {
  require_squarefree(d, "pell_selmer");
  PellSelmer out;
  out.d = d;
  out.disc = d % 4 == 1 ? d : 4 * d;
  std::vector<i64> ps(primes_of_d.begin(), primes_of_d.end());
  if (out.disc % 2 == 0 && std::find(ps.begin(), ps.end(), 2) == ps.end()) ps.insert(ps.begin(), 2);
  const int k = static_cast<int>(ps.size());
  const SquareClass dc(d);

  // rows[p] bit j = (ps[j], d)_{ps[p]}
  std::vector<u64> rows(k, 0);
  for (int r = 0; r < k; ++r) {
    const Place v = Place::at(ps[r]);
    for (int j = 0; j < k; ++j)
      if (hilbert(SquareClass(ps[j]), dc, v)) rows[r] |= u64{1} << j;
  }
  std::vector<int> pivot_col;
  int rank = 0;
  for (int col = 0; col < k; ++col) {
    int piv = -1;
    for (int r = rank; r < k; ++r)
      if (rows[r] >> col & 1) {
        piv = r;
        break;
      }
    if (piv < 0) continue;
    std::swap(rows[piv], rows[rank]);
    for (int r = 0; r < k; ++r)
      if (r != rank && (rows[r] >> col & 1)) rows[r] ^= rows[rank];
    pivot_col.push_back(col);
    ++rank;
  }
  std::vector<u64> kernel;
  for (int free = 0; free < k; ++free) {
    if (std::find(pivot_col.begin(), pivot_col.end(), free) != pivot_col.end()) continue;
    u64 v = u64{1} << free;
    for (int r = 0; r < rank; ++r)
      if (rows[r] >> free & 1) v |= u64{1} << pivot_col[r];
    kernel.push_back(v);
  }
  auto value = [&](u64 mask) {
    i64 x = 1;
    for (int j = 0; j < k; ++j)
      if (mask >> j & 1) x *= ps[j];
    return x;
  };
  out.dim = static_cast<int>(kernel.size());
  for (u64 v : kernel) out.basis.push_back(value(v));
  for (u64 c = 0; c < (u64{1} << out.dim); ++c) {
    u64 mask = 0;
    for (int i = 0; i < out.dim; ++i)
      if (c >> i & 1) mask ^= kernel[i];
    out.elements.push_back(value(mask));
  }
  std::sort(out.elements.begin(), out.elements.end());
  return out;
}

double CensusReport::soluble_fraction() const {
  return rows.empty() ? 0.0 : static_cast<double>(soluble) / static_cast<double>(rows.size());
}

family::Interval CensusReport::wilson(double z) const { return family::wilson_interval(soluble, rows.size(), z); }

double CensusReport::pr(int r) const {
  const auto it = by_dim.find(r);
  return it == by_dim.end() || rows.empty() ? 0.0 : static_cast<double>(it->second) / static_cast<double>(rows.size());
}

double CensusReport::selmer_prediction() const {
  double s = 0;
  for (const auto& [r, c] : by_dim)
    if (r >= 1) s += pr(r) / (std::ldexp(1.0, r) - 1);
  return s;
}

bool CensusReport::implications_hold() const {
  return dim1_insoluble == 0 && soluble_outside_family == 0 && soluble_not_in_selmer == 0 && selmer_membership_mismatch == 0;
}

CensusReport stevenhagen_census(u64 X, const CensusOptions& opts) {
  if (X < 5) throw std::invalid_argument("stevenhagen_census: need X >= 5");
  struct Item {
    i64 d;
    bool fam;
    std::vector<u64> primes;
  };
  std::vector<Item> items;
  squarefree_sieve(X - 1, [&](u64 n, std::span<const u64> primes) {
    if (n < 2) return;
    const bool fam = family_from_primes(primes);
    if (!fam && !opts.scan_all) return;
    items.push_back({static_cast<i64>(n), fam, std::vector<u64>(primes.begin(), primes.end())});
  });

  struct Result {
    int dim = 0;
    bool soluble = false;
    bool d_in_sel = false;
  };
  std::vector<Result> results(items.size());
  auto work = [&](std::size_t first, std::size_t step) {
    for (std::size_t i = first; i < items.size(); i += step) {
      const PellSelmer S = pell_selmer(items[i].d, items[i].primes);
      results[i] = {S.dim, pell_soluble(items[i].d), S.contains(items[i].d)};
    }
  };
  const std::size_t workers = static_cast<std::size_t>(std::max(1, opts.workers));
  if (workers == 1) {
    work(0, 1);
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work, w, workers);
  }

  CensusReport rep;
  rep.X = X;
  rep.scanned = items.size();
  for (std::size_t i = 0; i < items.size(); ++i) {
    const Item& it = items[i];
    const Result& r = results[i];
    if (r.d_in_sel != it.fam) ++rep.selmer_membership_mismatch;
    if (r.soluble && !it.fam) ++rep.soluble_outside_family;
    if (r.soluble && !r.d_in_sel) ++rep.soluble_not_in_selmer;
    if (!it.fam) continue;
    rep.rows.push_back({it.d, r.dim, r.soluble});
    ++rep.by_dim[r.dim];
    if (r.soluble) ++rep.soluble;
    if (r.dim == 1 && !r.soluble) ++rep.dim1_insoluble;
  }
  return rep;
}

}  // namespace selmerlab::pell
