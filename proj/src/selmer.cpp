#include "selmerlab/selmer.hpp"

#include <algorithm>
#include <bit>
#include <map>
#include <sstream>
#include <unordered_map>

#include "selmerlab/f2.hpp"
#include "sigma_layout.hpp"

namespace selmerlab::selmer {

namespace {

using curve::LocalSubspace;
using detail::SigmaLayout;

void require_squarefree(i64 d) {
  if (d == 0 || squarefree_kernel(d) != d) throw std::invalid_argument("twist parameter must be a nonzero squarefree integer");
}

// Pairs over a list of square classes: bits [0, k) select c1, bits [k, 2k) select c2.
struct PairSpace {
  std::vector<SquareClass> gens;

  int k() const { return static_cast<int>(gens.size()); }
  int bits() const { return 2 * k(); }

  DescentClass generator(int i) const {
    if (i < k()) return {gens[static_cast<std::size_t>(i)], SquareClass(1)};
    return {SquareClass(1), gens[static_cast<std::size_t>(i - k())]};
  }

  DescentClass at(f2::vec mask) const {
    DescentClass c;
    for (int i = 0; i < bits(); ++i)
      if ((mask >> i) & 1) c = c * generator(i);
    return c;
  }
};

std::vector<DescentClass> classes_of(const PairSpace& V, std::span<const f2::vec> masks) {
  f2::Basis b = f2::span_of(masks);
  std::vector<DescentClass> out;
  for (f2::vec m : b.canonical()) out.push_back(V.at(m));
  return out;
}

bool span_contains(const std::vector<DescentClass>& basis, const DescentClass& c) {
  std::vector<SquareClass> all;
  for (const auto& x : basis) {
    all.push_back(x.c1);
    all.push_back(x.c2);
  }
  all.push_back(c.c1);
  all.push_back(c.c2);
  curve::ClassCoordinates coords(all);
  const int s = coords.size();
  if (2 * s > 64) throw std::length_error("too many primes in the class support");
  auto vec = [&](const DescentClass& x) { return coords.of(x.c1) | (coords.of(x.c2) << s); };
  f2::Basis b;
  for (const auto& x : basis) b.insert(vec(x));
  return b.contains(vec(c));
}

std::vector<DescentClass> span_elements(const std::vector<DescentClass>& basis) {
  if (basis.size() > 20) throw std::length_error("span too large to enumerate");
  std::vector<DescentClass> out{DescentClass{}};
  for (const auto& g : basis) {
    const std::size_t n = out.size();
    for (std::size_t i = 0; i < n; ++i) out.push_back(out[i] * g);
  }
  return out;
}

struct Setup {
  PairSpace V;
  std::vector<Place> places;
  std::vector<LocalSubspace> images;
};

Setup setup(const Curve2T& E, i64 d, const SigmaSet& sigma, std::uint64_t seed) {
  require_squarefree(d);
  require_sigma(E, sigma);
  Setup s;
  const std::vector<i64> extra = outside_primes(sigma, d);
  s.V.gens = sq_group(sigma, extra);
  s.places = sigma.places;
  for (i64 p : extra) s.places.push_back(Place::at(p));
  for (const Place& v : s.places) s.images.push_back(curve::local_image(E, d, v, seed));
  return s;
}

// Coordinates of the quotient H^1(Q_v) / W: the non-pivot bits of the reduced residue.
struct QuotientMap {
  f2::Basis basis;
  std::vector<int> free_bits;

  explicit QuotientMap(const LocalSubspace& W) {
    for (f2::vec x : W.vectors()) basis.insert(x);
    std::vector<f2::vec> rref = basis.canonical();
    f2::vec pivots = 0;
    for (f2::vec r : rref) pivots |= f2::vec{1} << f2::top_bit(r);
    for (int i = 0; i < curve::local_h1_dim(W.place); ++i)
      if (!((pivots >> i) & 1)) free_bits.push_back(i);
  }

  f2::vec apply(f2::vec x) const {
    const f2::vec r = basis.reduce_full(x, nullptr);
    f2::vec out = 0;
    for (std::size_t i = 0; i < free_bits.size(); ++i) out |= ((r >> free_bits[i]) & 1) << i;
    return out;
  }
};

int intersection_dim(const LocalSubspace& A, const LocalSubspace& B) {
  std::vector<f2::vec> both = A.vectors();
  for (f2::vec x : B.vectors()) both.push_back(x);
  return A.dim() + B.dim() - f2::rank(both);
}

int kappa_sum(const Curve2T& E, const SigmaSet& sigma, const BClass& b, std::uint64_t seed) {
  if (b.classes.size() != sigma.places.size()) throw std::invalid_argument("b-class does not match sigma");
  int k = 0;
  for (std::size_t i = 0; i < sigma.places.size(); ++i) {
    const Place& v = sigma.places[i];
    if (!(b.classes[i].place == v)) throw std::invalid_argument("b-class does not match sigma");
    LocalSubspace W1 = curve::local_image_for_class(E, localize(SquareClass(1), v), seed);
    LocalSubspace Wb = curve::local_image_for_class(E, b.classes[i], seed);
    k += W1.dim() - intersection_dim(W1, Wb);
  }
  return k & 1;
}

}  // namespace

bool SelmerGroup::contains(const DescentClass& c) const { return span_contains(basis, c); }
std::vector<DescentClass> SelmerGroup::elements() const { return span_elements(basis); }
bool SystematicSubspace::contains(const DescentClass& c) const { return span_contains(basis, c); }
std::vector<DescentClass> SystematicSubspace::elements() const { return span_elements(basis); }

SigmaSet sigma_for(const Curve2T& E, const std::vector<i64>& extra) {
  std::vector<i64> ps = E.bad_primes();
  for (i64 p : extra) {
    if (!is_prime(static_cast<u64>(p))) throw std::invalid_argument("sigma entries must be primes");
    ps.push_back(p);
  }
  return SigmaSet::from_primes(ps);
}

void require_sigma(const Curve2T& E, const SigmaSet& sigma) {
  if (sigma.places.empty() || !sigma.places.front().is_real()) throw std::invalid_argument("sigma must contain the real place");
  for (i64 p : E.bad_primes())
    if (!sigma.contains_prime(p)) throw std::invalid_argument("sigma is missing a bad prime");
}

std::vector<i64> outside_primes(const SigmaSet& sigma, i64 d) {
  std::vector<i64> out;
  for (i64 p : prime_divisors(d))
    if (!sigma.contains_prime(p)) out.push_back(p);
  return out;
}

SelmerGroup selmer_direct(const Curve2T& E, i64 d, const SigmaSet& sigma, std::uint64_t seed) {
  Setup s = setup(E, d, sigma, seed);
  const int n = s.V.bits();
  if (n > kDirectMaxBits) throw budget_error("direct enumeration exceeds 2^" + std::to_string(kDirectMaxBits) + " classes");
  std::vector<QuotientMap> q;
  for (const auto& W : s.images) q.emplace_back(W);
  std::vector<f2::vec> residue(static_cast<std::size_t>(n), 0);
  for (int i = 0; i < n; ++i) {
    const DescentClass g = s.V.generator(i);
    int shift = 0;
    for (std::size_t k = 0; k < s.places.size(); ++k) {
      residue[static_cast<std::size_t>(i)] |= q[k].apply(curve::local_vector(g, s.places[k])) << shift;
      shift += static_cast<int>(q[k].free_bits.size());
      if (shift > 64) throw budget_error("too many places for the packed residue");
    }
  }
  // Gray-code walk over V'
  std::vector<f2::vec> kept;
  f2::vec mask = 0, cur = 0;
  const std::uint64_t count = std::uint64_t{1} << n;
  for (std::uint64_t t = 1; t < count; ++t) {
    const int bit = std::countr_zero(t);
    mask ^= f2::vec{1} << bit;
    cur ^= residue[static_cast<std::size_t>(bit)];
    if (cur == 0) kept.push_back(mask);
  }
  SelmerGroup G{d, classes_of(s.V, kept), 0};
  G.dim = static_cast<int>(G.basis.size());
  return G;
}

SelmerGroup selmer_kernel(const Curve2T& E, i64 d, const SigmaSet& sigma, std::uint64_t seed) {
  Setup s = setup(E, d, sigma, seed);
  const int n = s.V.bits();
  if (n > 64) throw budget_error("too many generators for the pairing matrix");
  std::vector<f2::vec> rows(static_cast<std::size_t>(n), 0);
  int col = 0;
  for (std::size_t k = 0; k < s.places.size(); ++k) {
    for (f2::vec w : s.images[k].vectors()) {
      if (col >= 64) throw budget_error("too many columns for the pairing matrix");
      for (int i = 0; i < n; ++i)
        if (curve::local_pairing_packed(curve::local_vector(s.V.generator(i), s.places[k]), w, s.places[k]))
          rows[static_cast<std::size_t>(i)] |= f2::vec{1} << col;
      ++col;
    }
  }
  std::vector<f2::vec> kernel = f2::left_kernel(rows);
  SelmerGroup G{d, classes_of(s.V, kernel), 0};
  G.dim = static_cast<int>(G.basis.size());
  return G;
}

TwistSplit split_twist(const SigmaSet& sigma, i64 d) {
  require_squarefree(d);
  TwistSplit t{d < 0 ? -1 : 1, 1};
  for (i64 p : prime_divisors(d)) {
    if (sigma.contains_prime(p))
      t.d0 *= p;
    else
      t.D *= p;
  }
  return t;
}

std::uint64_t selmer_count_formula(const Curve2T& E, i64 d, const SigmaSet& sigma, const FormulaOptions& opts) {
  require_squarefree(d);
  require_sigma(E, sigma);
  const TwistSplit split = split_twist(sigma, d);
  const std::vector<i64> primes = prime_divisors(split.D);
  const int omega = static_cast<int>(primes.size());
  if (omega > kFormulaMaxPrimes) throw budget_error("formula evaluation needs at most " + std::to_string(kFormulaMaxPrimes) + " primes in D");

  const SigmaLayout lay(sigma);
  f2::Basis Z0;
  for (std::size_t k = 0; k < lay.places.size(); ++k)
    for (f2::vec w : curve::local_image(E, d, lay.places[k], opts.seed).vectors()) Z0.insert(w << lay.offset[k]);
  const std::vector<f2::vec> z0_elems = Z0.elements();

  PairSpace V0;
  V0.gens = sq_group(sigma, {});
  f2::Basis v0_span;
  for (int i = 0; i < V0.bits(); ++i) v0_span.insert(lay.loc(V0.generator(i)));
  const std::vector<f2::vec> v0_elems = v0_span.elements();

  // V0 grouped by coset of Z0
  std::unordered_map<f2::vec, std::vector<f2::vec>> by_coset;
  for (f2::vec v : v0_elems) by_coset[Z0.reduce_full(v, nullptr)].push_back(v);

  std::map<std::pair<f2::vec, f2::vec>, i64> cache;
  auto C = [&](f2::vec a, f2::vec b) -> i64 {
    auto key = std::make_pair(a, b);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    i64 val = 0;
    if (opts.literal) {
      for (f2::vec v0 : v0_elems)
        for (f2::vec z0 : z0_elems) val += (lay.pair(v0, z0) ^ lay.pair(a, z0) ^ lay.pair(v0, b)) ? -1 : 1;
      if (val % static_cast<i64>(z0_elems.size()) != 0) throw std::logic_error("local sum not divisible by #Z0");
      val /= static_cast<i64>(z0_elems.size());
    } else {
      auto grp = by_coset.find(Z0.reduce_full(a, nullptr));
      if (grp != by_coset.end())
        for (f2::vec v0 : grp->second) val += lay.pair(v0, b) ? -1 : 1;
    }
    cache.emplace(key, val);
    return val;
  };

  struct PrimeData {
    curve::GammaElement gamma;
    int chi_d0 = 1;
    std::array<f2::vec, 4> psi{};
  };
  std::vector<PrimeData> pd(static_cast<std::size_t>(omega));
  std::vector<std::vector<int>> leg(static_cast<std::size_t>(omega), std::vector<int>(static_cast<std::size_t>(omega), 1));
  for (int i = 0; i < omega; ++i) {
    const i64 p = primes[static_cast<std::size_t>(i)];
    auto& P = pd[static_cast<std::size_t>(i)];
    P.gamma = curve::gamma_at(E, p);
    P.chi_d0 = kronecker(-split.d0, p);
    for (std::uint8_t x = 1; x < 4; ++x) P.psi[x] = lay.loc(curve::cup_with_torsion(p, static_cast<curve::Torsion>(x)));
    for (int j = 0; j < omega; ++j)
      if (i != j) leg[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = kronecker(p, primes[static_cast<std::size_t>(j)]);
  }
  auto phi = [](int u, int v) { return curve::weil(static_cast<std::uint8_t>((u ^ v) & 3), static_cast<std::uint8_t>(v >> 2)); };

  std::vector<int> label(static_cast<std::size_t>(omega), 0);
  i64 total = 0;
  auto dfs = [&](auto&& self, int i, int sign, f2::vec a, f2::vec b) -> void {
    if (i == omega) {
      total += sign * C(a, b);
      return;
    }
    const auto& P = pd[static_cast<std::size_t>(i)];
    for (int u = 0; u < 16; ++u) {
      const auto p1 = static_cast<std::uint8_t>(u & 3), p2 = static_cast<std::uint8_t>(u >> 2);
      int s = 0;
      if (curve::weil(p1, p2) && P.chi_d0 == -1) s ^= 1;
      s ^= curve::weil(p1, P.gamma.apply(p2));
      for (int j = 0; j < i; ++j) {
        const int uj = label[static_cast<std::size_t>(j)];
        if (uj == u) continue;
        if (phi(u, uj) && leg[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] == -1) s ^= 1;
        if (phi(uj, u) && leg[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)] == -1) s ^= 1;
      }
      label[static_cast<std::size_t>(i)] = u;
      self(self, i + 1, s ? -sign : sign, a ^ P.psi[p1], b ^ P.psi[p2]);
    }
  };
  dfs(dfs, 0, 1, 0, 0);

  const i64 scale = i64{1} << (2 * omega);
  if (total <= 0 || total % scale != 0) throw std::logic_error("character sum is not a positive multiple of #Z");
  return static_cast<std::uint64_t>(total / scale);
}

PoitouTate poitou_tate_check(const Curve2T& E, i64 d, const SigmaSet& sigma, std::uint64_t seed) {
  require_squarefree(d);
  require_sigma(E, sigma);
  const SigmaLayout lay(sigma);
  PoitouTate out;
  std::vector<f2::vec> z0;
  for (std::size_t k = 0; k < lay.places.size(); ++k) {
    out.half_dim += lay.places[k].width();
    for (f2::vec w : curve::local_image(E, d, lay.places[k], seed).vectors()) z0.push_back(w << lay.offset[k]);
  }
  out.dim_z0 = f2::rank(z0);
  out.z0_isotropic = true;
  for (f2::vec x : z0)
    for (f2::vec y : z0)
      if (lay.pair(x, y)) out.z0_isotropic = false;
  PairSpace V0;
  V0.gens = sq_group(sigma, {});
  std::vector<f2::vec> v0;
  for (int i = 0; i < V0.bits(); ++i) v0.push_back(lay.loc(V0.generator(i)));
  out.dim_v0 = f2::rank(v0);
  return out;
}

BClass BClass::of(const SigmaSet& sigma, i64 d) {
  require_squarefree(d);
  BClass b;
  for (const Place& v : sigma.places) b.classes.push_back(localize(SquareClass(d), v));
  return b;
}

BClass BClass::trivial(const SigmaSet& sigma) { return of(sigma, 1); }

bool BClass::matches(i64 d) const {
  for (const LocalClass& c : classes)
    if (!(localize(SquareClass(d), c.place) == c)) return false;
  return true;
}

std::string BClass::str() const {
  std::ostringstream os;
  for (std::size_t i = 0; i < classes.size(); ++i) {
    if (i) os << ' ';
    os << classes[i].place.name() << ':' << local_representative(classes[i]);
  }
  return os.str();
}

std::vector<BClass> all_bclasses(const SigmaSet& sigma) {
  int total = 0;
  for (const Place& v : sigma.places) total += v.width();
  if (total > 20) throw budget_error("too many local classes to enumerate");
  std::vector<BClass> out;
  for (std::uint64_t t = 0; t < (std::uint64_t{1} << total); ++t) {
    BClass b;
    int shift = 0;
    for (const Place& v : sigma.places) {
      b.classes.push_back({v, static_cast<std::uint8_t>((t >> shift) & ((1u << v.width()) - 1))});
      shift += v.width();
    }
    out.push_back(std::move(b));
  }
  return out;
}

SystematicSubspace systematic_subspace(const Curve2T& E, const SigmaSet& sigma, const BClass& b,
                                       const std::vector<SquareClass>& L_gens, std::uint64_t seed) {
  require_sigma(E, sigma);
  if (b.classes.size() != sigma.places.size()) throw std::invalid_argument("b-class does not match sigma");
  for (const SquareClass& m : L_gens)
    for (i64 p : prime_divisors(m.value()))
      if (!sigma.contains_prime(p)) throw std::invalid_argument("L ramifies outside sigma");
  curve::ClassCoordinates coords(L_gens);
  PairSpace V;
  f2::Basis indep;
  for (const SquareClass& m : L_gens)
    if (indep.insert(coords.of(m))) V.gens.push_back(m);
  if (V.bits() > 24) throw budget_error("too many generators for L");

  std::vector<f2::Basis> local;
  for (std::size_t i = 0; i < sigma.places.size(); ++i) {
    LocalSubspace W = curve::local_image_for_class(E, b.classes[i], seed);
    auto vs = W.vectors();
    local.push_back(f2::span_of(vs));
  }
  std::vector<f2::vec> kept;
  for (f2::vec mask = 1; mask < (f2::vec{1} << V.bits()); ++mask) {
    const DescentClass c = V.at(mask);
    bool ok = true;
    for (std::size_t i = 0; i < sigma.places.size() && ok; ++i) ok = local[i].contains(curve::local_vector(c, sigma.places[i]));
    if (ok) kept.push_back(mask);
  }
  SystematicSubspace S{classes_of(V, kept), 0};
  S.n_b = static_cast<int>(S.basis.size());
  return S;
}

int parity_kappa(const Curve2T& E, const SigmaSet& sigma, const BClass& b, std::uint64_t seed) {
  const int base = selmer_kernel(E, 1, sigma, seed).dim;
  return (base + kappa_sum(E, sigma, b, seed)) & 1;
}

std::optional<BClass> find_condition_E_witness(const Curve2T& E, const SigmaSet& sigma, const DescentClass& zeta,
                                               std::uint64_t seed) {
  if (zeta.is_trivial()) throw std::invalid_argument("zeta must be nonzero");
  std::vector<SquareClass> L;
  if (!zeta.c1.is_trivial()) L.push_back(zeta.c1);
  if (!zeta.c2.is_trivial() && !(zeta.c2 == zeta.c1)) L.push_back(zeta.c2);
  const int base = selmer_kernel(E, 1, sigma, seed).dim;
  for (const BClass& b : all_bclasses(sigma)) {
    SystematicSubspace S = systematic_subspace(E, sigma, b, L, seed);
    if (S.n_b != 1 || !S.contains(zeta)) continue;
    if (((base + kappa_sum(E, sigma, b, seed)) & 1) == 1) return b;
  }
  return std::nullopt;
}

}  // namespace selmerlab::selmer
