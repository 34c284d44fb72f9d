#include <algorithm>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <set>

#include "doctest.h"
#include "selmerlab/selmer.hpp"

using namespace selmerlab;
using namespace selmerlab::curve;
using namespace selmerlab::selmer;

namespace {

const Curve2T kExample = Curve2T::make(-1505, -712, 2216);
const Curve2T kSecond = Curve2T::make(0, 2, 7);

DescentClass dc(i64 a, i64 b) { return {SquareClass(a), SquareClass(b)}; }

bool squarefree(i64 d) { return d != 0 && squarefree_kernel(d) == d; }

std::vector<DescentClass> torsion_images(const Curve2T& E, i64 d) {
  return {kummer_image(E, d, Torsion::P1), kummer_image(E, d, Torsion::P2)};
}

bool same_group(const std::vector<DescentClass>& a, const std::vector<DescentClass>& b) {
  SelmerGroup A{1, a, static_cast<int>(a.size())}, B{1, b, static_cast<int>(b.size())};
  for (const auto& x : a)
    if (!B.contains(x)) return false;
  for (const auto& x : b)
    if (!A.contains(x)) return false;
  return true;
}

// Twists with at most `max_outside` primes outside sigma, in a deterministic order.
std::vector<i64> twists(const SigmaSet& sigma, int count, int max_outside, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<i64> pick(-3000, 3000);
  std::vector<i64> out;
  std::set<i64> seen;
  while (static_cast<int>(out.size()) < count) {
    const i64 d = pick(rng);
    if (!squarefree(d) || seen.count(d)) continue;
    if (static_cast<int>(outside_primes(sigma, d).size()) > max_outside) continue;
    seen.insert(d);
    out.push_back(d);
  }
  return out;
}

}  // namespace

TEST_CASE("roots 0, 1, -1 have Selmer group equal to the torsion image") {
  const Curve2T E = Curve2T::make(0, 1, -1);
  const SigmaSet sigma = sigma_for(E);
  const SelmerGroup a = selmer_direct(E, 1, sigma), b = selmer_kernel(E, 1, sigma);
  CHECK(a.dim == 2);
  CHECK(b.dim == 2);
  CHECK(same_group(a.basis, b.basis));
  CHECK(same_group(a.basis, torsion_images(E, 1)));
  CHECK(selmer_count_formula(E, 1, sigma) == 4);
}

TEST_CASE("worked example contains the point class and the torsion") {
  const SigmaSet sigma = sigma_for(kExample);
  CHECK(sigma.N == 2 * 3 * 13 * 61);
  for (auto method : {selmer_direct, selmer_kernel}) {
    const SelmerGroup G = method(kExample, 1, sigma, kDefaultImageSeed);
    CHECK(G.contains(dc(13, 39)));
    CHECK(G.contains(kummer_image(kExample, 1, Torsion::P1)));
    CHECK(G.contains(kummer_image(kExample, 1, Torsion::P2)));
    CHECK(G.contains(kummer_image(kExample, 1, Torsion::P3)));
    CHECK(G.dim >= 3);
  }
  CHECK(kummer_image(kExample, 1, Torsion::P1) * kummer_image(kExample, 1, Torsion::P2) == kummer_image(kExample, 1, Torsion::P3));
}

TEST_CASE("direct, kernel and character-sum counts agree") {
  int checked = 0;
  for (const Curve2T& E : {kExample, kSecond}) {
    const SigmaSet sigma = sigma_for(E);
    for (i64 d : twists(sigma, 110, 3, 7 + static_cast<std::uint64_t>(E.a3))) {
      const SelmerGroup a = selmer_direct(E, d, sigma), b = selmer_kernel(E, d, sigma);
      CAPTURE(E.name());
      CAPTURE(d);
      REQUIRE(a.dim == b.dim);
      CHECK(same_group(a.basis, b.basis));
      CHECK(selmer_count_formula(E, d, sigma) == (std::uint64_t{1} << a.dim));
      ++checked;
    }
  }
  CHECK(checked >= 200);
}

TEST_CASE("literal and reduced local sums agree") {
  const SigmaSet sigma = sigma_for(kSecond);
  FormulaOptions literal;
  literal.literal = true;
  for (i64 d : {1, -1, 3, -11, 13 * 17, -2 * 3 * 19, 5 * 7 * 29}) {
    CAPTURE(d);
    CHECK(selmer_count_formula(kSecond, d, sigma, literal) == selmer_count_formula(kSecond, d, sigma));
  }
}

TEST_CASE("twist splitting and formula budget") {
  const SigmaSet sigma = sigma_for(kExample);
  const TwistSplit t = split_twist(sigma, -2 * 5 * 13 * 17);
  CHECK(t.d0 == -26);
  CHECK(t.D == 85);
  const i64 many = 5LL * 7 * 11 * 17 * 19 * 23 * 29 * 31 * 37;
  CHECK_THROWS_AS(selmer_count_formula(kExample, many, sigma), budget_error);
  CHECK_THROWS_AS(selmer_kernel(kExample, 12, sigma), std::invalid_argument);
  CHECK_THROWS_AS(selmer_kernel(kExample, 5, SigmaSet::from_primes({3, 13})), std::invalid_argument);
}

TEST_CASE("local images over sigma are maximal isotropic and the global classes fill half") {
  for (const Curve2T& E : {kExample, kSecond}) {
    const SigmaSet sigma = sigma_for(E);
    for (i64 d : twists(sigma, 60, 4, 99)) {
      const PoitouTate pt = poitou_tate_check(E, d, sigma);
      CAPTURE(d);
      CHECK(pt.dim_v0 == pt.half_dim);
      CHECK(pt.dim_z0 == pt.half_dim);
      CHECK(pt.z0_isotropic);
    }
  }
}

TEST_CASE("torsion image is contained and injective for twists with a good prime") {
  for (const Curve2T& E : {kExample, kSecond}) {
    const SigmaSet sigma = sigma_for(E);
    for (i64 d : twists(sigma, 80, 3, 5)) {
      const SelmerGroup G = selmer_kernel(E, d, sigma);
      CAPTURE(d);
      for (Torsion t : {Torsion::P1, Torsion::P2, Torsion::P3}) CHECK(G.contains(kummer_image(E, d, t)));
      if (!outside_primes(sigma, d).empty()) CHECK(G.dim >= 2);
    }
  }
}

TEST_CASE("b-classes") {
  const SigmaSet sigma = sigma_for(kExample);
  const BClass b = BClass::of(sigma, -15);
  CHECK(b.matches(-15));
  CHECK_FALSE(b.matches(15));
  CHECK(BClass::trivial(sigma).matches(1));
  CHECK(BClass::trivial(sigma).matches(1 + 8 * 3 * 13 * 61 * 4));
  CHECK(all_bclasses(sigma).size() == 1024);
  CHECK(b.str() == "inf:-1 2:1 3:3 13:2 61:1");
}

namespace {

// Primes outside sigma whose class is trivial at every place of sigma.
std::vector<i64> trivial_class_primes(const SigmaSet& sigma, i64 bound) {
  const BClass one = BClass::trivial(sigma);
  std::vector<i64> out;
  for (i64 p = 3; p < bound; p += 2)
    if (is_prime(static_cast<u64>(p)) && !sigma.contains_prime(p) && one.matches(p)) out.push_back(p);
  return out;
}

bool splits_in(const std::vector<SquareClass>& L, i64 p) {
  for (const SquareClass& m : L)
    if (kronecker(m.value(), p) != 1) return false;
  return true;
}

bool in_family(const SigmaSet& sigma, const BClass& b, const std::vector<SquareClass>& L, i64 d) {
  if (!b.matches(d)) return false;
  for (i64 p : outside_primes(sigma, d))
    if (!splits_in(L, p)) return false;
  return true;
}

// Elements of the Selmer group built from the generators of L, as a basis.
std::vector<DescentClass> selmer_on_L(const SelmerGroup& G, const std::vector<SquareClass>& L) {
  std::vector<SquareClass> span{SquareClass(1)};
  for (const SquareClass& m : L) {
    const std::size_t n = span.size();
    for (std::size_t i = 0; i < n; ++i) span.push_back(span[i] * m);
  }
  std::vector<DescentClass> found;
  for (SquareClass x : span)
    for (SquareClass y : span) {
      const DescentClass c{x, y};
      if (c.is_trivial() || !G.contains(c)) continue;
      SelmerGroup acc{1, found, static_cast<int>(found.size())};
      if (!acc.contains(c)) found.push_back(c);
    }
  return found;
}

}  // namespace

TEST_CASE("systematic subspace of the worked example") {
  const SigmaSet sigma = sigma_for(kExample);
  const BClass one = BClass::trivial(sigma);
  const DescentClass dP = kummer_image_of_point(kExample, 1, AffinePoint{3188, 1, 133380, 1});
  CHECK(dP == dc(13, 39));
  const SystematicSubspace S = systematic_subspace(kExample, sigma, one, {SquareClass(13), SquareClass(39)});
  CHECK(S.n_b == 2);
  CHECK(same_group(S.basis, {dc(13, 39), dc(1, 3)}));
  for (Torsion t : {Torsion::P1, Torsion::P2}) {
    const DescentClass z = dP * kummer_image(kExample, 1, t);
    CAPTURE(z.str());
    CHECK(systematic_subspace(kExample, sigma, one, {z.c1, z.c2}).n_b == 3);
  }
  CHECK(systematic_subspace(kExample, sigma, one, {}).n_b == 0);
  CHECK(systematic_subspace(kExample, sigma, one, {SquareClass(13), SquareClass(3), SquareClass(39)}).n_b == 2);
  CHECK_THROWS_AS(systematic_subspace(kExample, sigma, one, {SquareClass(5)}), std::invalid_argument);
}

TEST_CASE("systematic subspace is the part of Sel on L for family members") {
  const SigmaSet sigma = sigma_for(kExample);
  const std::vector<SquareClass> L{SquareClass(13), SquareClass(39)};
  const std::vector<i64> pool = trivial_class_primes(sigma, 20000);
  REQUIRE(pool.size() >= 12);
  int members = 0;
  for (i64 base : {1, -1, 2, -3, 6, 13, -61, 2 * 13 * 61}) {
    const BClass b = BClass::of(sigma, base);
    const SystematicSubspace S = systematic_subspace(kExample, sigma, b, L);
    for (std::size_t i = 0; i < 6; ++i)
      for (std::size_t j = i + 1; j < 6; ++j) {
        const i64 d = base * pool[i] * pool[j];
        REQUIRE(in_family(sigma, b, L, d));
        const SelmerGroup G = selmer_direct(kExample, d, sigma);
        CAPTURE(d);
        for (const auto& s : S.basis) CHECK(G.contains(s));
        CHECK(same_group(selmer_on_L(G, L), S.basis));
        // torsion image meets S_b trivially
        SelmerGroup T{d, torsion_images(kExample, d), 2};
        for (const auto& s : S.elements())
          if (!s.is_trivial()) CHECK_FALSE(T.contains(s));
        CHECK(G.dim >= 2 + S.n_b);
        ++members;
      }
  }
  CHECK(members == 8 * 15);
}

TEST_CASE("parity law on b-classes") {
  for (const Curve2T& E : {kExample, kSecond}) {
    const SigmaSet sigma = sigma_for(E);
    const std::vector<i64> pool = trivial_class_primes(sigma, 20000);
    REQUIRE(pool.size() >= 40);
    CHECK(parity_kappa(E, sigma, BClass::trivial(sigma)) == selmer_kernel(E, 1, sigma).dim % 2);
    for (i64 base : {1, -1, 3, -5, 7 * 11, -2 * 13}) {
      if (std::gcd(base, sigma.N) != 1 && base != -2 * 13) continue;
      const BClass b = BClass::of(sigma, base);
      const int kappa = parity_kappa(E, sigma, b);
      int n = 0;
      for (std::size_t i = 0; i < pool.size() && n < 500; ++i)
        for (std::size_t j = i + 1; j < pool.size() && n < 500; ++j) {
          if (std::gcd(base, pool[i] * pool[j]) != 1) continue;
          const i64 d = base * pool[i] * pool[j];
          REQUIRE(b.matches(d));
          CAPTURE(d);
          CHECK(selmer_kernel(E, d, sigma).dim % 2 == kappa);
          ++n;
        }
      CHECK(n == 500);
    }
  }
}

TEST_CASE("condition E witness search agrees with a family oracle") {
  struct Case {
    Curve2T E;
    DescentClass zeta;
  };
  const Curve2T small = Curve2T::make(0, 1, -1);
  std::vector<Case> cases{{kExample, dc(13, 39)}};
  for (i64 a : {1, -1, 2, -2})
    for (i64 c : {1, -1, 2, -2})
      if (a != 1 || c != 1) cases.push_back({small, dc(a, c)});
  int found = 0;
  for (const Case& k : cases) {
    const SigmaSet sigma = sigma_for(k.E);
    std::vector<SquareClass> L;
    if (!k.zeta.c1.is_trivial()) L.push_back(k.zeta.c1);
    if (!k.zeta.c2.is_trivial() && !(k.zeta.c2 == k.zeta.c1)) L.push_back(k.zeta.c2);
    const std::vector<BClass> classes = all_bclasses(sigma);
    std::vector<SquareClass> Lspan{SquareClass(1)};
    for (const SquareClass& m : L) {
      const std::size_t n = Lspan.size();
      for (std::size_t i = 0; i < n; ++i) Lspan.push_back(Lspan[i] * m);
    }
    auto reciprocity = [&](const BClass& b) {
      for (SquareClass m : Lspan) {
        int s = 0;
        for (const LocalClass& c : b.classes) s ^= hilbert_bits(c.bits, local_bits(m.value(), c.place), c.place);
        if (s) return false;
      }
      return true;
    };
    // family members d0 * D with D a product of at most two primes split in L
    std::vector<i64> split;
    for (i64 p = 3; split.size() < 120; p += 2)
      if (is_prime(static_cast<u64>(p)) && !sigma.contains_prime(p) && splits_in(L, p)) split.push_back(p);
    std::vector<i64> Ds{1};
    for (std::size_t i = 0; i < split.size(); ++i) {
      Ds.push_back(split[i]);
      for (std::size_t j = i + 1; j < split.size(); ++j) Ds.push_back(split[i] * split[j]);
    }
    std::vector<i64> d0s{1};
    for (i64 p : sigma.finite_primes()) {
      const std::size_t n = d0s.size();
      for (std::size_t i = 0; i < n; ++i) d0s.push_back(d0s[i] * p);
    }
    std::vector<i64> member(classes.size(), 0);
    for (i64 D : Ds)
      for (i64 d0 : d0s)
        for (i64 d : {d0 * D, -d0 * D}) {
          const auto it = std::find(classes.begin(), classes.end(), BClass::of(sigma, d));
          auto& slot = member[static_cast<std::size_t>(it - classes.begin())];
          if (slot == 0 || std::abs(d) < std::abs(slot)) slot = d;
        }
    std::optional<BClass> expected;
    for (std::size_t i = 0; i < classes.size(); ++i) {
      CAPTURE(classes[i].str());
      REQUIRE((member[i] != 0) == reciprocity(classes[i]));
      if (member[i] == 0) {
        CHECK_FALSE(systematic_subspace(k.E, sigma, classes[i], L).contains(k.zeta));
        continue;
      }
      REQUIRE(in_family(sigma, classes[i], L, member[i]));
      if (expected) continue;
      const SelmerGroup G = selmer_direct(k.E, member[i], sigma);
      const auto onL = selmer_on_L(G, L);
      if (onL.size() == 1 && onL[0] == k.zeta && G.dim % 2 == 1) expected = classes[i];
    }
    const std::optional<BClass> got = find_condition_E_witness(k.E, sigma, k.zeta);
    CAPTURE(k.E.name());
    CAPTURE(k.zeta.str());
    CHECK(got.has_value() == expected.has_value());
    if (got && expected) CHECK(*got == *expected);
    if (got) ++found;
  }
  // regression values
  CHECK_FALSE(find_condition_E_witness(kExample, sigma_for(kExample), dc(13, 39)).has_value());
  CHECK(found == 7);
  CHECK_THROWS_AS(find_condition_E_witness(kExample, sigma_for(kExample), DescentClass{}), std::invalid_argument);
}

TEST_CASE("witness is absent when zeta is locally excluded at 2 for every b") {
  const Curve2T E = Curve2T::make(0, 1, -1);
  const SigmaSet sigma = sigma_for(E);
  REQUIRE(sigma.places.size() == 2);
  int excluded = 0;
  for (i64 a : {1, -1, 2, -2})
    for (i64 c : {1, -1, 2, -2}) {
      const DescentClass z = dc(a, c);
      if (z.is_trivial()) continue;
      bool everywhere_out = true;
      for (const BClass& b : all_bclasses(sigma))
        if (local_image_for_class(E, b.classes[1]).contains(localize(z, sigma.places[1]))) everywhere_out = false;
      if (!everywhere_out) continue;
      ++excluded;
      CHECK_FALSE(find_condition_E_witness(E, sigma, z).has_value());
    }
  CHECK(excluded > 0);
}
