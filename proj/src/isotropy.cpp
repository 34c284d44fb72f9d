#include "selmerlab/isotropy.hpp"

#include <algorithm>
#include <array>
#include <bitset>
#include <cmath>
#include <set>
#include <unordered_map>

#include "sigma_layout.hpp"

namespace selmerlab::isotropy {

namespace {

using detail::SigmaLayout;

// Null space of the functionals x -> dot(row, x) on F2^n.
std::vector<f2::vec> null_space(std::span<const f2::vec> rows, int n) {
  std::vector<f2::vec> r;
  f2::Basis b;
  for (f2::vec x : rows) b.insert(x);
  r = b.canonical();
  f2::vec pivots = 0;
  for (f2::vec x : r) pivots |= f2::vec{1} << f2::top_bit(x);
  std::vector<f2::vec> out;
  for (int j = 0; j < n; ++j) {
    if ((pivots >> j) & 1) continue;
    f2::vec x = f2::vec{1} << j;
    for (f2::vec row : r)
      if ((row >> j) & 1) x |= f2::vec{1} << f2::top_bit(row);
    out.push_back(x);
  }
  return out;
}

// Some x with dot(rows[i], x) = bit i of rhs; rows independent.
f2::vec solve(std::span<const f2::vec> rows, f2::vec rhs) {
  f2::Basis b;
  std::vector<int> lead(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    lead[i] = b.insert(rows[i], f2::vec{1} << i);
    if (lead[i] < 0) throw std::invalid_argument("solve: dependent rows");
  }
  // Work in the echelon basis: rows' = T rows, so rhs' = T rhs.
  std::vector<f2::vec> piv;
  std::vector<int> bits;
  std::vector<f2::vec> rhs2;
  for (f2::vec v : b.vectors()) {
    f2::vec tag = 0;
    b.reduce_full(v, &tag);
    piv.push_back(v);
    bits.push_back(f2::top_bit(v));
    rhs2.push_back(static_cast<f2::vec>(f2::parity(tag & rhs)));
  }
  // piv sorted by descending leading bit; back-substitute from the lowest.
  f2::vec x = 0;
  for (std::size_t i = piv.size(); i-- > 0;) {
    const int cur = f2::dot(piv[i], x);
    if (cur != static_cast<int>(rhs2[i])) x ^= f2::vec{1} << bits[i];
  }
  return x;
}

std::vector<f2::vec> span_elements(std::span<const f2::vec> basis) {
  std::vector<f2::vec> out{0};
  for (f2::vec g : basis) {
    const std::size_t n = out.size();
    for (std::size_t i = 0; i < n; ++i) out.push_back(out[i] ^ g);
  }
  return out;
}

using Bits = std::bitset<256>;

void bron_kerbosch(const std::vector<Bits>& adj, Bits R, Bits P, Bits X, std::vector<Bits>& out) {
  if (P.none() && X.none()) {
    out.push_back(R);
    return;
  }
  const Bits PX = P | X;
  std::size_t pivot = PX._Find_first(), best = 0;
  for (std::size_t u = PX._Find_first(); u < 256; u = PX._Find_next(u)) {
    const std::size_t c = (P & adj[u]).count();
    if (c >= best) {
      best = c;
      pivot = u;
    }
  }
  const Bits cand = P & ~adj[pivot];
  for (std::size_t v = cand._Find_first(); v < 256; v = cand._Find_next(v)) {
    Bits Rv = R;
    Rv.set(v);
    bron_kerbosch(adj, Rv, P & adj[v], X & adj[v], out);
    P.reset(v);
    X.set(v);
  }
}

int phi_form(std::uint8_t u, std::uint8_t v) { return curve::weil(static_cast<std::uint8_t>((u ^ v) & 3), static_cast<std::uint8_t>(v >> 2)); }

}  // namespace

F2Space F2Space::symplectic(int r) {
  if (r < 1 || 2 * r > 32) throw std::invalid_argument("symplectic: need 1 <= r <= 16");
  F2Space V;
  V.dim = 2 * r;
  V.weil.assign(static_cast<std::size_t>(V.dim), 0);
  for (int i = 0; i < r; ++i) {
    V.weil[static_cast<std::size_t>(2 * i)] = f2::vec{1} << (2 * i + 1);
    V.weil[static_cast<std::size_t>(2 * i + 1)] = f2::vec{1} << (2 * i);
  }
  return V;
}

int F2Space::e(f2::vec x, f2::vec y) const {
  int s = 0;
  while (x) {
    s ^= f2::dot(weil[static_cast<std::size_t>(std::countr_zero(x))], y);
    x &= x - 1;
  }
  return s;
}

std::vector<f2::vec> F2Space::perp(std::span<const f2::vec> U) const {
  std::vector<f2::vec> rows;
  for (f2::vec u : U) rows.push_back(f2::combine(weil, u));
  return null_space(rows, dim);
}

bool F2Space::nondegenerate() const { return f2::rank(weil) == dim; }

int q_form(const F2Space& V, f2::vec u) { return V.e(V.pi1(u), V.pi2(u)); }

bool linked(const F2Space& V, f2::vec u, f2::vec v) { return u != v && q_form(V, u ^ v) == 1; }

std::vector<f2::vec> IsoSubspace::elements() const { return span_elements(W_basis); }

bool IsoSubspace::contains(f2::vec u) const { return f2::span_of(W_basis).contains(u); }

IsoSubspace make_iso(const F2Space& V, std::vector<f2::vec> U_basis, std::vector<f2::vec> phi) {
  const std::size_t k = U_basis.size();
  if (phi.size() != k) throw std::invalid_argument("phi must be dim U x dim U");
  if (f2::rank(U_basis) != static_cast<int>(k)) throw std::invalid_argument("U basis is dependent");
  for (std::size_t i = 0; i < k; ++i) {
    if ((phi[i] >> i) & 1) throw std::invalid_argument("phi must be alternating");
    for (std::size_t j = 0; j < k; ++j)
      if (((phi[i] >> j) & 1) != ((phi[j] >> i) & 1)) throw std::invalid_argument("phi must be alternating");
  }
  IsoSubspace W;
  W.U_basis = std::move(U_basis);
  W.phi = std::move(phi);
  std::vector<f2::vec> rows;
  for (f2::vec u : W.U_basis) rows.push_back(f2::combine(V.weil, u));
  std::vector<f2::vec> dual;
  for (std::size_t j = 0; j < k; ++j) dual.push_back(solve(rows, f2::vec{1} << j));
  f2::Basis wb;
  for (std::size_t j = 0; j < k; ++j) {
    f2::vec img = 0;
    for (std::size_t i = 0; i < k; ++i)
      if ((W.phi[i] >> j) & 1) img ^= dual[i];
    W.phi_lift.push_back(img);
    wb.insert(V.pack(W.U_basis[j], img));
  }
  for (f2::vec l : V.perp(W.U_basis)) wb.insert(V.pack(0, l));
  W.W_basis = wb.canonical();
  return W;
}

std::vector<std::vector<f2::vec>> subspaces_of_dim(int n, int k) {
  if (n < 0 || n > 16 || k < 0 || k > n) throw std::invalid_argument("subspaces_of_dim: need 0 <= k <= n <= 16");
  std::vector<std::vector<f2::vec>> out;
  for (f2::vec piv = 0; piv < (f2::vec{1} << n); ++piv) {
    if (std::popcount(piv) != k) continue;
    std::vector<int> lead;
    for (int b = n - 1; b >= 0; --b)
      if ((piv >> b) & 1) lead.push_back(b);
    std::vector<std::vector<int>> free(lead.size());
    int nfree = 0;
    for (std::size_t i = 0; i < lead.size(); ++i)
      for (int b = 0; b < lead[i]; ++b)
        if (!((piv >> b) & 1)) {
          free[i].push_back(b);
          ++nfree;
        }
    for (f2::vec m = 0; m < (f2::vec{1} << nfree); ++m) {
      std::vector<f2::vec> rows;
      int pos = 0;
      for (std::size_t i = 0; i < lead.size(); ++i) {
        f2::vec r = f2::vec{1} << lead[i];
        for (int b : free[i]) r |= ((m >> pos++) & 1) << b;
        rows.push_back(r);
      }
      out.push_back(std::move(rows));
    }
  }
  return out;
}

std::vector<std::vector<f2::vec>> all_subspaces(int n) {
  if (n > 8) throw budget_error("subspace enumeration supports n <= 8");
  std::vector<std::vector<f2::vec>> out;
  for (int k = 0; k <= n; ++k)
    for (auto& s : subspaces_of_dim(n, k)) out.push_back(std::move(s));
  return out;
}

std::vector<IsoSubspace> enumerate_max_isotropic(const F2Space& V) {
  if (V.dim > kMaxEnumerateDim) throw budget_error("maximal isotropic enumeration supports dim A[2] <= " + std::to_string(kMaxEnumerateDim));
  std::vector<IsoSubspace> out;
  for (int k = 0; k <= V.dim; ++k) {
    std::vector<std::pair<int, int>> slots;
    for (int i = 0; i < k; ++i)
      for (int j = i + 1; j < k; ++j) slots.emplace_back(i, j);
    for (const auto& U : subspaces_of_dim(V.dim, k))
      for (f2::vec m = 0; m < (f2::vec{1} << slots.size()); ++m) {
        std::vector<f2::vec> phi(static_cast<std::size_t>(k), 0);
        for (std::size_t s = 0; s < slots.size(); ++s)
          if ((m >> s) & 1) {
            auto [i, j] = slots[s];
            phi[static_cast<std::size_t>(i)] |= f2::vec{1} << j;
            phi[static_cast<std::size_t>(j)] |= f2::vec{1} << i;
          }
        out.push_back(make_iso(V, U, std::move(phi)));
      }
  }
  return out;
}

dist::Integer max_isotropic_count(int n) {
  dist::Integer total = 0;
  for (int k = 0; k <= n; ++k) total += dist::gauss_binom(k, n) * (dist::Integer{1} << (k * (k - 1) / 2));
  return total;
}

std::vector<std::vector<f2::vec>> brute_force_max_isotropic(const F2Space& V) {
  if (V.dim > kMaxBruteForceDim) throw budget_error("brute force supports dim A[2] <= " + std::to_string(kMaxBruteForceDim));
  std::vector<std::vector<f2::vec>> out;
  for (auto& S : subspaces_of_dim(2 * V.dim, V.dim)) {
    const auto elems = span_elements(S);
    if (std::all_of(elems.begin(), elems.end(), [&](f2::vec u) { return q_form(V, u) == 0; })) out.push_back(std::move(S));
  }
  return out;
}

UnlinkedReport unlinked_classification_check(const F2Space& V) {
  if (V.dim > kMaxBruteForceDim) throw budget_error("unlinked classification supports dim A[2] <= " + std::to_string(kMaxBruteForceDim));
  const std::size_t n = std::size_t{1} << (2 * V.dim);
  std::vector<Bits> adj(n);
  for (std::size_t u = 0; u < n; ++u)
    for (std::size_t v = 0; v < n; ++v)
      if (u != v && !linked(V, u, v)) adj[u].set(v);
  Bits all;
  for (std::size_t u = 0; u < n; ++u) all.set(u);
  std::vector<Bits> cliques;
  bron_kerbosch(adj, Bits{}, all, Bits{}, cliques);

  auto key = [](const Bits& b) { return b.to_string(); };
  std::set<std::string> found, expected;
  UnlinkedReport rep;
  rep.min_size = static_cast<int>(n);
  for (const Bits& c : cliques) {
    found.insert(key(c));
    rep.min_size = std::min(rep.min_size, static_cast<int>(c.count()));
    rep.max_size = std::max(rep.max_size, static_cast<int>(c.count()));
  }
  for (const IsoSubspace& W : enumerate_max_isotropic(V)) {
    const auto elems = W.elements();
    for (std::size_t c = 0; c < n; ++c) {
      Bits b;
      for (f2::vec w : elems) b.set(w ^ c);
      expected.insert(key(b));
    }
  }
  rep.maximal_unlinked = found.size();
  rep.cosets = expected.size();
  rep.all_cosets = found == expected;
  return rep;
}

f2::vec apply(const Endo& g, f2::vec x) { return f2::combine(g, x); }

Endo diagonal(curve::GammaElement g, int r) {
  Endo out;
  for (int i = 0; i < r; ++i) {
    out.push_back(static_cast<f2::vec>(g.col0 & 1) << (2 * i) | static_cast<f2::vec>(g.col0 >> 1) << (2 * i + 1));
    out.push_back(static_cast<f2::vec>(g.col1 & 1) << (2 * i) | static_cast<f2::vec>(g.col1 >> 1) << (2 * i + 1));
  }
  return out;
}

bool is_invariant(std::span<const f2::vec> U, const std::vector<Endo>& gens) {
  const f2::Basis b = f2::span_of(U);
  for (const Endo& g : gens)
    for (f2::vec u : U)
      if (!b.contains(apply(g, u))) return false;
  return true;
}

std::vector<std::vector<f2::vec>> gamma_invariant_subspaces(const F2Space& V, const std::vector<Endo>& gens) {
  std::vector<std::vector<f2::vec>> out;
  for (auto& U : all_subspaces(V.dim))
    if (is_invariant(U, gens)) out.push_back(std::move(U));
  return out;
}

std::vector<f2::vec> tensor_with_e2(int r, std::span<const f2::vec> T) {
  f2::Basis b;
  for (f2::vec t : T) {
    f2::vec x = 0, y = 0;
    for (int i = 0; i < r; ++i)
      if ((t >> i) & 1) {
        x |= f2::vec{1} << (2 * i);
        y |= f2::vec{1} << (2 * i + 1);
      }
    b.insert(x);
    b.insert(y);
  }
  return b.canonical();
}

bool satisfies_star(int r, const IsoSubspace& W) {
  auto coeffs = [r](f2::vec u, int t) {
    f2::vec c = 0;
    for (int i = 0; i < r; ++i) c |= ((u >> (2 * i + t)) & 1) << i;
    return c;
  };
  for (f2::vec f = 1; f < (f2::vec{1} << r); ++f) {
    bool inside = true;
    for (f2::vec u : W.U_basis)
      if (f2::dot(f, coeffs(u, 0)) || f2::dot(f, coeffs(u, 1))) inside = false;
    if (inside) return false;
  }
  return true;
}

i64 SBar::lift(u64 mask) const {
  i64 m = 1;
  for (int i = 0; i < dim(); ++i)
    if ((mask >> i) & 1) m = checked_mul(m, lifts[static_cast<std::size_t>(i)]);
  return m;
}

int sbar_expected_dim(const SigmaSet& sigma, const std::vector<SquareClass>& L_gens) {
  curve::ClassCoordinates coords(L_gens);
  std::vector<f2::vec> vs;
  for (const SquareClass& m : L_gens) vs.push_back(coords.of(m));
  return static_cast<int>(sq_group(sigma, {}).size()) - f2::rank(vs);
}

SBar sbar_for(const SigmaSet& sigma, const std::vector<SquareClass>& L_gens, i64 start) {
  for (const SquareClass& m : L_gens)
    for (i64 p : prime_divisors(m.value()))
      if (!sigma.contains_prime(p)) throw std::invalid_argument("L ramifies outside sigma");
  const int target = sbar_expected_dim(sigma, L_gens);
  SBar out;
  f2::Basis seen;
  for (i64 p = std::max<i64>(start, 3); out.dim() < target; ++p) {
    if (p > 10000000) throw std::runtime_error("sbar_for: ran out of primes");
    if (!is_prime(static_cast<u64>(p)) || sigma.contains_prime(p)) continue;
    if (!std::all_of(L_gens.begin(), L_gens.end(), [p](SquareClass m) { return kronecker(m.value(), p) == 1; })) continue;
    f2::vec v = 0;
    int off = 0;
    for (const Place& w : sigma.places) {
      v |= static_cast<f2::vec>(local_bits(p, w)) << off;
      off += w.width();
    }
    if (seen.insert(v)) out.lifts.push_back(p);
  }
  return out;
}

struct YContext::Impl {
  curve::Curve2T E;
  SigmaLayout lay;
  SBar sbar;
  F2Space V = F2Space::symplectic(1);
  bool literal = false;
  int n_b = 0;
  f2::Basis Z0;
  std::vector<f2::vec> z0_elems, z0_dual, v0_elems;
  int v0_rank = 0;
  std::unordered_map<f2::vec, std::vector<f2::vec>> by_coset;
  std::vector<int> alpha;
  std::vector<curve::GammaElement> gamma;
  std::vector<std::array<f2::vec, 4>> psi;
  mutable std::map<std::pair<f2::vec, f2::vec>, i64> cache;

  explicit Impl(const SigmaSet& sigma) : lay(sigma) {}

  // (1 / #Z0) sum over V0 x Z0 of (-1)^{<v0,z0> + <a,z0> + <v0,b>}.
  i64 C(f2::vec a, f2::vec b) const {
    const auto key = std::make_pair(a, b);
    if (auto it = cache.find(key); it != cache.end()) return it->second;
    i64 val = 0;
    const f2::vec Jb = lay.dual(b);
    if (literal) {
      for (f2::vec v0 : v0_elems) {
        i64 inner = 0;
        const f2::vec x = v0 ^ a;
        for (f2::vec Jz : z0_dual) inner += f2::dot(x, Jz) ? -1 : 1;
        val += f2::dot(v0, Jb) ? -inner : inner;
      }
      const auto nz = static_cast<i64>(z0_elems.size());
      if (val % nz != 0) throw std::logic_error("local sum not divisible by #Z0");
      val /= nz;
    } else if (auto grp = by_coset.find(Z0.reduce_full(a, nullptr)); grp != by_coset.end()) {
      for (f2::vec v0 : grp->second) val += f2::dot(v0, Jb) ? -1 : 1;
    }
    cache.emplace(key, val);
    return val;
  }

  void check_W(const IsoSubspace& W) const {
    if (W.W_basis.size() != 2) throw std::invalid_argument("y sums are implemented for r = 1");
    for (f2::vec w : W.elements()) {
      if (w > 15) throw std::invalid_argument("y sums are implemented for r = 1");
      if (q_form(V, w)) throw std::invalid_argument("W is not isotropic");
    }
    const double work = std::pow(static_cast<double>(sbar.size()), 4.0);
    if (work > static_cast<double>(kYBudget)) throw budget_error("#S^|W| exceeds the y-sum budget");
  }

  // Visits every (h_w) in S^W with the accumulated Xi and the pi1 / pi2 tensors.
  template <typename Leaf>
  void walk(const IsoSubspace& W, Leaf&& leaf) const {
    const std::vector<f2::vec> ws = W.elements();
    const std::size_t n = ws.size();
    std::vector<u64> h(n, 0);
    auto rec = [&](auto&& self, std::size_t k, int s, f2::vec a, f2::vec b) -> void {
      if (k == n) {
        leaf(h, s, a, b);
        return;
      }
      const auto w = static_cast<std::uint8_t>(ws[k]);
      const auto p1 = static_cast<std::uint8_t>(w & 3), p2 = static_cast<std::uint8_t>(w >> 2);
      for (u64 x = 0; x < sbar.size(); ++x) {
        int t = s ^ curve::weil(p1, gamma[x].apply(p2));
        for (std::size_t j = 0; j < k; ++j) {
          const auto wj = static_cast<std::uint8_t>(ws[j]);
          if (phi_form(wj, w) != phi_form(w, wj)) throw std::logic_error("Phi not symmetric on W");
          t ^= alpha[h[j]] & alpha[x] & phi_form(wj, w);
        }
        h[k] = x;
        self(self, k + 1, t, a ^ psi[x][p1], b ^ psi[x][p2]);
      }
    };
    rec(rec, 0, 0, 0, 0);
  }

  f2::vec phi_of(const IsoSubspace& W, f2::vec u) const {
    f2::Basis b;
    for (std::size_t i = 0; i < W.U_basis.size(); ++i) b.insert(W.U_basis[i], f2::vec{1} << i);
    f2::vec tag = 0;
    if (b.reduce_full(u, &tag) != 0) throw std::invalid_argument("vector not in U");
    return f2::combine(W.phi_lift, tag);
  }
};

YContext::YContext(const curve::Curve2T& E, const SigmaSet& sigma, const selmer::BClass& b, const std::vector<SquareClass>& L_gens,
                   const YOptions& opts)
    : impl_(std::make_unique<Impl>(sigma)) {
  selmer::require_sigma(E, sigma);
  if (b.classes.size() != sigma.places.size()) throw std::invalid_argument("b-class does not match sigma");
  Impl& I = *impl_;
  I.E = E;
  I.literal = opts.literal;
  I.sbar = opts.sbar ? *opts.sbar : sbar_for(sigma, L_gens);
  I.n_b = selmer::systematic_subspace(E, sigma, b, L_gens, opts.seed).n_b;

  for (std::size_t k = 0; k < I.lay.places.size(); ++k)
    for (f2::vec w : curve::local_image_for_class(E, b.classes[k], opts.seed).vectors()) I.Z0.insert(w << I.lay.offset[k]);
  I.z0_elems = I.Z0.elements();
  for (f2::vec z : I.z0_elems) I.z0_dual.push_back(I.lay.dual(z));

  f2::Basis v0;
  for (const SquareClass& g : sq_group(sigma, {})) {
    v0.insert(I.lay.loc(curve::DescentClass{g, SquareClass(1)}));
    v0.insert(I.lay.loc(curve::DescentClass{SquareClass(1), g}));
  }
  I.v0_rank = v0.rank();
  I.v0_elems = v0.elements();
  for (f2::vec v : I.v0_elems) I.by_coset[I.Z0.reduce_full(v, nullptr)].push_back(v);

  for (u64 x = 0; x < I.sbar.size(); ++x) {
    const i64 m = I.sbar.lift(x);
    I.alpha.push_back(m % 4 == 3 ? 1 : 0);
    I.gamma.push_back(curve::gamma_at(E, m));
    std::array<f2::vec, 4> ps{};
    for (std::uint8_t t = 1; t < 4; ++t) ps[t] = I.lay.loc(curve::cup_with_torsion(m, static_cast<curve::Torsion>(t)));
    I.psi.push_back(ps);
  }
}

YContext::~YContext() = default;

const SBar& YContext::sbar() const { return impl_->sbar; }
const F2Space& YContext::space() const { return impl_->V; }
int YContext::n_b() const { return impl_->n_b; }
int YContext::dim_v0() const { return impl_->v0_rank; }
int YContext::dim_z0() const { return impl_->Z0.rank(); }

std::vector<curve::GammaElement> YContext::gamma_gens() const {
  std::vector<curve::GammaElement> out;
  for (int i = 0; i < impl_->sbar.dim(); ++i) out.push_back(impl_->gamma[u64{1} << i]);
  return out;
}

dist::Rational YContext::y_sum(const IsoSubspace& W) const {
  const Impl& I = *impl_;
  I.check_W(W);
  i64 total = 0;
  I.walk(W, [&](const std::vector<u64>&, int s, f2::vec a, f2::vec b) {
    const i64 c = I.C(a, b);
    total += s ? -c : c;
  });
  dist::Integer den = 1;
  for (std::size_t i = 0; i < W.elements().size(); ++i) den *= I.sbar.size();
  return dist::Rational(total, den);
}

std::map<std::vector<u64>, i64> YContext::inner_sums(const IsoSubspace& W) const {
  const Impl& I = *impl_;
  I.check_W(W);
  f2::Basis wb;
  for (std::size_t i = 0; i < W.W_basis.size(); ++i) wb.insert(W.W_basis[i], f2::vec{1} << i);
  std::vector<f2::vec> coord;
  for (f2::vec w : W.elements()) {
    f2::vec tag = 0;
    wb.reduce_full(w, &tag);
    coord.push_back(tag);
  }
  std::map<std::vector<u64>, i64> out;
  I.walk(W, [&](const std::vector<u64>& h, int s, f2::vec, f2::vec) {
    std::vector<u64> t(W.W_basis.size(), 0);
    for (std::size_t k = 0; k < h.size(); ++k)
      for (std::size_t j = 0; j < t.size(); ++j)
        if ((coord[k] >> j) & 1) t[j] ^= h[k];
    out[t] += s ? -1 : 1;
  });
  return out;
}

int YContext::upsilon(const IsoSubspace& W, std::span<const u64> x) const {
  const Impl& I = *impl_;
  if (W.dim_U() != I.V.dim || x.size() != 4) throw std::invalid_argument("upsilon needs U = A[2] and one entry per element");
  int s = 0;
  for (std::uint8_t u = 0; u < 4; ++u) {
    for (std::uint8_t v = static_cast<std::uint8_t>(u + 1); v < 4; ++v)
      s ^= I.alpha[x[u]] & I.alpha[x[v]] & I.V.e(u, I.phi_of(W, v));
    s ^= I.V.e(I.gamma[x[u]].apply(u), I.phi_of(W, u));
  }
  return s;
}

int YContext::l_phi(const IsoSubspace& W, std::span<const u64> x, std::span<const u64> y) const {
  const Impl& I = *impl_;
  f2::vec ax = 0, ay = 0;
  for (std::uint8_t u = 0; u < 4; ++u) {
    if (I.alpha[x[u]]) ax ^= u;
    if (I.alpha[y[u]]) ay ^= I.phi_of(W, u);
  }
  return I.V.e(ax, ay);
}

MainTermReport main_term_identity_check(const curve::Curve2T& E, const SigmaSet& sigma, const selmer::BClass& b,
                                        const std::vector<SquareClass>& L_gens, const YOptions& opts) {
  YContext ctx(E, sigma, b, L_gens, opts);
  MainTermReport rep;
  rep.n_b = ctx.n_b();
  rep.condition_gamma = curve::check_condition_gamma(E, L_gens).satisfied();
  std::vector<Endo> gens;
  for (const auto& g : ctx.gamma_gens()) gens.push_back(diagonal(g, 1));
  rep.lhs = 0;
  for (IsoSubspace& W : enumerate_max_isotropic(ctx.space())) {
    WTerm t;
    t.y = ctx.y_sum(W);
    t.star = satisfies_star(1, W);
    t.gamma_invariant = is_invariant(W.U_basis, gens);
    t.W = std::move(W);
    if (t.star) rep.lhs += t.y;
    rep.terms.push_back(std::move(t));
  }
  rep.rhs = dist::Rational(dist::Integer{1} << (rep.n_b + 1));
  return rep;
}

}  // namespace selmerlab::isotropy
