#include "selmerlab/curve.hpp"

#include <algorithm>
#include <boost/multiprecision/cpp_int.hpp>
#include <map>
#include <mutex>
#include <random>
#include <set>
#include <sstream>
#include <tuple>

namespace selmerlab::curve {

namespace {

using Big = boost::multiprecision::cpp_int;

Big big(i128 v) {
  const bool neg = v < 0;
  unsigned __int128 u = neg ? static_cast<unsigned __int128>(-(v + 1)) + 1 : static_cast<unsigned __int128>(v);
  Big r = static_cast<u64>(u >> 64);
  r <<= 64;
  r += static_cast<u64>(u);
  return neg ? Big(-r) : r;
}

i128 to_i128(const Big& v) {
  static const Big lim = Big(1) << 126;
  if (abs(v) >= lim) throw overflow_error("value exceeds 128 bits");
  const bool neg = v < 0;
  Big a = abs(v);
  unsigned __int128 u = static_cast<unsigned __int128>(static_cast<u64>(a >> 64)) << 64;
  u |= static_cast<u64>(a & Big(~u64{0}));
  i128 r = static_cast<i128>(u);
  return neg ? -r : r;
}

i128 ipow128(i64 p, int e) {
  i128 r = 1;
  for (int i = 0; i < e; ++i) r *= p;
  return r;
}

std::uint64_t mix(std::uint64_t h, std::uint64_t v) {
  h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  return h;
}

}  // namespace

Curve2T Curve2T::make(i64 a1, i64 a2, i64 a3) {
  if (a1 == a2 || a1 == a3 || a2 == a3) throw std::invalid_argument("curve roots must be distinct");
  constexpr i64 lim = i64{1} << 40;
  for (i64 a : {a1, a2, a3})
    if (a > lim || a < -lim) throw std::invalid_argument("curve roots must satisfy |a| < 2^40");
  return {a1, a2, a3};
}

std::array<i128, 3> Curve2T::twisted_roots(i64 d) const {
  return {static_cast<i128>(d) * a1, static_cast<i128>(d) * a2, static_cast<i128>(d) * a3};
}

std::vector<i64> Curve2T::bad_primes() const {
  std::set<i64> ps{2};
  for (i64 diff : {a1 - a2, a1 - a3, a2 - a3})
    for (i64 p : prime_divisors(diff)) ps.insert(p);
  return {ps.begin(), ps.end()};
}

bool Curve2T::is_bad(i64 p) const {
  return p == 2 || (a1 - a2) % p == 0 || (a1 - a3) % p == 0 || (a2 - a3) % p == 0;
}

std::string Curve2T::name() const {
  std::ostringstream os;
  os << a1 << "," << a2 << "," << a3;
  return os.str();
}

int weil(std::uint8_t x, std::uint8_t y) { return ((x & 1) & ((y >> 1) & 1)) ^ (((x >> 1) & 1) & (y & 1)); }

std::string DescentClass::str() const {
  std::ostringstream os;
  os << "(" << c1.value() << "," << c2.value() << ")";
  return os.str();
}

LocalDescentClass LocalDescentClass::unpack(const Place& v, f2::vec x) {
  const int w = v.width();
  const f2::vec mask = (f2::vec{1} << w) - 1;
  return {v, static_cast<std::uint8_t>(x & mask), static_cast<std::uint8_t>((x >> w) & mask)};
}

LocalDescentClass localize(const DescentClass& c, const Place& v) {
  return {v, local_bits(c.c1.value(), v), local_bits(c.c2.value(), v)};
}

f2::vec local_vector(const DescentClass& c, const Place& v) { return localize(c, v).packed(); }

int local_tate_pairing(const LocalDescentClass& x, const LocalDescentClass& y) {
  if (!(x.place == y.place)) throw std::invalid_argument("local pairing across different places");
  return hilbert_bits(x.c1, y.c2, x.place) ^ hilbert_bits(x.c2, y.c1, x.place);
}

int local_pairing_packed(f2::vec x, f2::vec y, const Place& v) {
  return local_tate_pairing(LocalDescentClass::unpack(v, x), LocalDescentClass::unpack(v, y));
}

std::vector<f2::vec> LocalSubspace::vectors() const {
  std::vector<f2::vec> out;
  for (const auto& b : basis) out.push_back(b.packed());
  return out;
}

bool LocalSubspace::contains(f2::vec x) const {
  auto vs = vectors();
  return f2::span_of(vs).contains(x);
}

bool on_curve(const Curve2T& E, i64 d, const AffinePoint& pt) {
  if (pt.x_den == 0 || pt.y_den == 0) return false;
  const auto r = E.twisted_roots(d);
  const Big xn = big(pt.x_num), xd = big(pt.x_den), yn = big(pt.y_num), yd = big(pt.y_den);
  Big rhs = yd * yd;
  for (i128 ri : r) rhs *= xn - big(ri) * xd;
  return yn * yn * xd * xd * xd == rhs;
}

DescentClass kummer_image(const Curve2T& E, i64 d, Torsion t) {
  const auto [r1, r2, r3] = E.twisted_roots(d);
  switch (t) {
    case Torsion::O:
      return {};
    case Torsion::P1:
      return {SquareClass::of(r1 - r2) * SquareClass::of(r1 - r3), SquareClass::of(r1 - r2)};
    case Torsion::P2:
      return {SquareClass::of(r2 - r1), SquareClass::of(r2 - r1) * SquareClass::of(r2 - r3)};
    case Torsion::P3:
      return {SquareClass::of(r3 - r1), SquareClass::of(r3 - r2)};
  }
  return {};
}

DescentClass kummer_image_of_point(const Curve2T& E, i64 d, const AffinePoint& pt) {
  if (!on_curve(E, d, pt)) throw std::invalid_argument("point is not on the twisted curve");
  const auto r = E.twisted_roots(d);
  for (int i = 0; i < 3; ++i)
    if (big(pt.x_num) == big(r[static_cast<std::size_t>(i)]) * big(pt.x_den)) return kummer_image(E, d, static_cast<Torsion>(i + 1));
  auto cls = [&](i128 ri) {
    Big v = (big(pt.x_num) - big(ri) * big(pt.x_den)) * big(pt.x_den);
    return SquareClass::of(to_i128(v));
  };
  return {cls(r[0]), cls(r[1])};
}

DescentClass cup_with_torsion(i64 d, Torsion t) {
  const SquareClass c(d);
  switch (t) {
    case Torsion::O:
      return {};
    case Torsion::P1:
      return {SquareClass(1), c};
    case Torsion::P2:
      return {c, SquareClass(1)};
    case Torsion::P3:
      return {c, c};
  }
  return {};
}

LocalDescentClass twisted_torsion_image(const Curve2T& E, i64 d, Torsion t, const Place& v) {
  return localize(kummer_image(E, d, t), v);
}

int local_image_target_dim(const Place& v) { return v.is_real() ? 1 : v.is_two() ? 3 : 2; }

namespace {

LocalSubspace make_subspace(const Place& v, const f2::Basis& b) {
  LocalSubspace s{v, {}};
  for (f2::vec x : b.canonical()) s.basis.push_back(LocalDescentClass::unpack(v, x));
  return s;
}

LocalSubspace sample_image(const Curve2T& E, i64 d, const Place& v, std::uint64_t seed) {
  const i64 p = v.p;
  const int w = v.width();
  const int target = local_image_target_dim(v);
  const auto r = E.twisted_roots(d);
  f2::Basis basis;
  for (Torsion t : {Torsion::P1, Torsion::P2, Torsion::P3}) basis.insert(twisted_torsion_image(E, d, t, v).packed());
  if (basis.rank() >= target) return make_subspace(v, basis);

  std::uint64_t h = mix(seed, static_cast<std::uint64_t>(p));
  h = mix(h, static_cast<std::uint64_t>(d));
  for (i64 a : E.roots()) h = mix(h, static_cast<std::uint64_t>(a));
  std::mt19937_64 rng(h);

  // largest j with p^(2j) <= 2^40, capped at 3
  int jmax = 0;
  while (jmax < 3 && ipow128(p, 2 * (jmax + 1)) <= (i128{1} << 40)) ++jmax;
  int kmax = 1;
  while (kmax < 16 && ipow128(p, kmax + 1) <= (i128{1} << 40)) ++kmax;
  std::uniform_int_distribution<int> pick_j(0, jmax), pick_k(1, kmax), pick_root(0, 2), pick_mode(0, 2);
  std::uniform_int_distribution<i64> unit(-(i64{1} << 20), i64{1} << 20);

  for (int it = 0; it < kImageBudget; ++it) {
    const int j = pick_j(rng);
    const i128 den = ipow128(p, 2 * j);
    i128 n;
    if (pick_mode(rng) == 0) {
      n = r[static_cast<std::size_t>(pick_root(rng))] * den + ipow128(p, pick_k(rng)) * unit(rng);
    } else {
      const i64 span = static_cast<i64>(ipow128(p, std::min(kmax, 2 * j + 6)));
      n = std::uniform_int_distribution<i64>(-span, span)(rng);
    }
    std::array<i128, 3> t{};
    bool degenerate = false;
    for (std::size_t i = 0; i < 3; ++i) {
      t[i] = n - r[i] * den;
      if (t[i] == 0) degenerate = true;
    }
    if (degenerate) continue;
    const std::uint8_t b0 = local_bits(t[0], v), b1 = local_bits(t[1], v), b2 = local_bits(t[2], v);
    if ((b0 ^ b1 ^ b2) != 0) continue;
    basis.insert(b0 | (f2::vec{b1} << w));
    if (basis.rank() == target) return make_subspace(v, basis);
  }
  throw local_image_budget_error("local image at " + v.name() + " did not reach its dimension for curve " + E.name());
}

LocalSubspace compute_image(const Curve2T& E, const LocalClass& dv, std::uint64_t seed) {
  const Place& v = dv.place;
  const i64 d = local_representative(dv);
  if (v.is_real()) {
    const auto r = E.twisted_roots(d);
    const i128 e1 = std::min({r[0], r[1], r[2]});
    const std::uint8_t c1 = r[0] != e1, c2 = r[1] != e1;
    return {v, {LocalDescentClass{v, c1, c2}}};
  }
  if (!E.is_bad(v.p)) {
    f2::Basis b;
    if (dv.bits & 1) {
      for (Torsion t : {Torsion::P1, Torsion::P2}) b.insert(twisted_torsion_image(E, d, t, v).packed());
    } else {
      b.insert(LocalDescentClass{v, 2, 0}.packed());
      b.insert(LocalDescentClass{v, 0, 2}.packed());
    }
    if (b.rank() != 2) throw std::logic_error("good-place image has wrong dimension");
    return make_subspace(v, b);
  }
  return sample_image(E, d, v, seed);
}

struct ImageCache {
  std::mutex mu;
  std::map<std::tuple<i64, i64, i64, i64, int, std::uint64_t>, LocalSubspace> entries;
};

ImageCache& image_cache() {
  static ImageCache c;
  return c;
}

}  // namespace

LocalSubspace local_image_for_class(const Curve2T& E, const LocalClass& dv, std::uint64_t seed) {
  const auto key = std::make_tuple(E.a1, E.a2, E.a3, dv.place.p, static_cast<int>(dv.bits), seed);
  ImageCache& cache = image_cache();
  {
    std::lock_guard<std::mutex> lock(cache.mu);
    auto it = cache.entries.find(key);
    if (it != cache.entries.end()) return it->second;
  }
  LocalSubspace s = compute_image(E, dv, seed);
  std::lock_guard<std::mutex> lock(cache.mu);
  cache.entries.emplace(key, s);
  return s;
}

LocalSubspace local_image(const Curve2T& E, i64 d, const Place& v, std::uint64_t seed) {
  if (d == 0) throw std::invalid_argument("twist by 0");
  return local_image_for_class(E, localize(SquareClass(d), v), seed);
}

GammaElement gamma_at(const Curve2T& E, i64 m) {
  if (m <= 0) throw std::invalid_argument("gamma_at needs m > 0");
  if (squarefree_kernel(m) != m) throw std::invalid_argument("gamma_at needs squarefree m");
  for (i64 p : E.bad_primes())
    if (m % p == 0) throw std::invalid_argument("gamma_at needs m coprime to the bad primes");
  return gamma_from_character(E, [m](SquareClass c) { return kronecker(c.value(), m) == -1 ? 1 : 0; });
}

bool is_self_adjoint(GammaElement a) {
  for (std::uint8_t x = 0; x < 4; ++x)
    for (std::uint8_t y = 0; y < 4; ++y)
      if (weil(x, a.apply(y)) != weil(a.apply(x), y)) return false;
  return true;
}

GammaElement transvection(std::uint8_t x) {
  auto img = [x](std::uint8_t y) { return static_cast<std::uint8_t>(weil(y, x) ? x : 0); };
  return {img(1), img(2)};
}

std::vector<GammaElement> additive_span(const std::vector<GammaElement>& gens) {
  std::vector<f2::vec> codes;
  for (const auto& g : gens) codes.push_back(g.code());
  std::vector<GammaElement> out;
  for (f2::vec c : f2::span_of(codes).elements()) out.push_back(GammaElement::from_code(static_cast<std::uint8_t>(c)));
  std::sort(out.begin(), out.end(), [](GammaElement a, GammaElement b) { return a.code() < b.code(); });
  return out;
}

std::vector<GammaElement> lie_closure(const std::vector<GammaElement>& gens) {
  std::vector<GammaElement> cur = additive_span(gens);
  while (true) {
    std::vector<GammaElement> next = cur;
    for (const auto& a : cur)
      for (const auto& b : cur) next.push_back(a * b + b * a);
    next = additive_span(next);
    if (next.size() == cur.size()) return cur;
    cur = next;
  }
}

std::vector<GammaElement> end_plus() {
  std::vector<GammaElement> out;
  for (std::uint8_t c = 0; c < 16; ++c)
    if (is_self_adjoint(GammaElement::from_code(c))) out.push_back(GammaElement::from_code(c));
  return out;
}

SimplicityReport check_simple_action(const std::vector<GammaElement>& gamma) {
  SimplicityReport rep;
  for (std::uint8_t v = 1; v < 4; ++v) {
    bool invariant = true;
    for (const auto& a : gamma) {
      const std::uint8_t img = a.apply(v);
      if (img != 0 && img != v) invariant = false;
    }
    if (invariant) {
      rep.invariant_line = v;
      return rep;
    }
  }
  for (std::uint8_t c = 0; c < 16; ++c) {
    const GammaElement b = GammaElement::from_code(c);
    if (b.is_zero() || b == GammaElement::identity()) continue;
    bool commutes = true;
    for (const auto& a : gamma)
      if (!(a * b == b * a)) commutes = false;
    if (commutes) {
      rep.commuting = b;
      return rep;
    }
  }
  rep.satisfied = true;
  return rep;
}

ClassCoordinates::ClassCoordinates(const std::vector<SquareClass>& classes) {
  std::set<i64> ps;
  for (SquareClass c : classes)
    for (i64 p : prime_divisors(c.value())) ps.insert(p);
  primes_.assign(ps.begin(), ps.end());
  if (primes_.size() > 62) throw std::length_error("too many primes for class coordinates");
}

f2::vec ClassCoordinates::of(SquareClass c) const {
  f2::vec x = c.value() < 0 ? 1 : 0;
  i64 rest = c.value() < 0 ? -c.value() : c.value();
  for (std::size_t i = 0; i < primes_.size(); ++i)
    if (rest % primes_[i] == 0) {
      x |= f2::vec{1} << (i + 1);
      rest /= primes_[i];
    }
  if (rest != 1) throw std::invalid_argument("square class outside the coordinate support");
  return x;
}

SquareClass ClassCoordinates::from(f2::vec x) const {
  SquareClass c((x & 1) ? -1 : 1);
  for (std::size_t i = 0; i < primes_.size(); ++i)
    if ((x >> (i + 1)) & 1) c = c * SquareClass(primes_[i]);
  return c;
}

std::vector<SquareClass> intersect_spans(const std::vector<SquareClass>& A, const std::vector<SquareClass>& B) {
  std::vector<SquareClass> all(A);
  all.insert(all.end(), B.begin(), B.end());
  ClassCoordinates coords(all);
  std::vector<f2::vec> rows;
  for (SquareClass c : all) rows.push_back(coords.of(c));
  f2::Basis out;
  const f2::vec amask = (A.size() >= 64) ? ~f2::vec{0} : ((f2::vec{1} << A.size()) - 1);
  for (f2::vec dep : f2::left_kernel(rows)) out.insert(f2::combine(rows, dep & amask));
  std::vector<SquareClass> res;
  for (f2::vec x : out.canonical()) res.push_back(coords.from(x));
  return res;
}

std::vector<SquareClass> e4_kummer_gens(const Curve2T& E) {
  return {SquareClass(E.a1 - E.a2), SquareClass(E.a1 - E.a3), SquareClass(E.a2 - E.a3), SquareClass(-1)};
}

ConditionGammaReport check_condition_gamma(const Curve2T& E, const std::vector<SquareClass>& L_gens) {
  ConditionGammaReport rep;
  rep.e4_gens = e4_kummer_gens(E);
  rep.intersection = intersect_spans(rep.e4_gens, L_gens);

  ClassCoordinates coords(rep.e4_gens);
  f2::Basis gbasis;
  int k = 0;
  for (SquareClass g : rep.e4_gens)
    if (gbasis.insert(coords.of(g), f2::vec{1} << k) >= 0) ++k;
  auto express = [&](SquareClass c) {
    f2::vec tag = 0;
    if (gbasis.reduce_full(coords.of(c), &tag) != 0) throw std::logic_error("class outside the E[4] Kummer group");
    return tag;
  };
  std::vector<f2::vec> fixed;
  for (SquareClass c : rep.intersection) fixed.push_back(express(c));

  std::set<std::uint8_t> seen;
  for (f2::vec chi = 0; chi < (f2::vec{1} << k); ++chi) {
    bool trivial_on_L = true;
    for (f2::vec t : fixed)
      if (f2::dot(t, chi)) trivial_on_L = false;
    if (!trivial_on_L) continue;
    const GammaElement g = gamma_from_character(E, [&](SquareClass c) { return f2::dot(express(c), chi); });
    if (seen.insert(g.code()).second) rep.gamma.push_back(g);
  }
  rep.simplicity = check_simple_action(rep.gamma);
  return rep;
}

std::string to_string(ProxyResult r) {
  switch (r) {
    case ProxyResult::ok:
      return "ok";
    case ProxyResult::fails_disjointness:
      return "fails-disjointness";
    case ProxyResult::degenerate:
      return "degenerate";
  }
  return "?";
}

ProxyResult check_no_cyclic_4_isogeny_proxy(const Curve2T& E, const AffinePoint& P) {
  const DescentClass half = kummer_image_of_point(E, 1, P);
  std::vector<SquareClass> H;
  if (!half.c1.is_trivial()) H.push_back(half.c1);
  if (!half.c2.is_trivial()) H.push_back(half.c2);
  if (H.empty()) return ProxyResult::degenerate;
  return intersect_spans(H, e4_kummer_gens(E)).empty() ? ProxyResult::ok : ProxyResult::fails_disjointness;
}

bool check_strict_two_structure(const std::vector<i64>& a, const std::vector<i64>& M) {
  if (a.size() < 3 || a.size() % 2 == 0 || M.size() + 1 != a.size()) return false;
  const std::size_t last = a.size() - 1;
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = i + 1; j < a.size(); ++j)
      if (a[i] == a[j]) return false;
  for (std::size_t i = 0; i < M.size(); ++i) {
    const i64 p = M[i];
    if (p < 3 || !is_prime(static_cast<u64>(p))) return false;
    for (std::size_t j = 0; j < a.size(); ++j)
      for (std::size_t l = j + 1; l < a.size(); ++l) {
        const int want = (j == i && l == last) ? 1 : 0;
        if (valuation(a[j] - a[l], p) != want) return false;
      }
  }
  return true;
}

}  // namespace selmerlab::curve
