#ifndef SELMERLAB_CURVE_HPP_
#define SELMERLAB_CURVE_HPP_

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "selmerlab/arith.hpp"
#include "selmerlab/f2.hpp"

namespace selmerlab::curve {

// y^2 = (x - a1)(x - a2)(x - a3) with distinct integer roots.
struct Curve2T {
  i64 a1 = 0, a2 = 0, a3 = 0;

  static Curve2T make(i64 a1, i64 a2, i64 a3);
  std::array<i64, 3> roots() const { return {a1, a2, a3}; }
  // Roots of the twist y^2 = (x - d a1)(x - d a2)(x - d a3).
  std::array<i128, 3> twisted_roots(i64 d) const;
  // Primes dividing 2 (a1 - a2)(a1 - a3)(a2 - a3), ascending.
  std::vector<i64> bad_primes() const;
  bool is_bad(i64 p) const;
  std::string name() const;
};

// E[2] elements as 2-bit masks: bit0 = P1 = (a1, 0), bit1 = P2 = (a2, 0).
enum class Torsion : std::uint8_t { O = 0, P1 = 1, P2 = 2, P3 = 3 };

int weil(std::uint8_t x, std::uint8_t y);

// (lambda1, lambda2) coordinates of H^1(Q, E[2]).
struct DescentClass {
  SquareClass c1, c2;

  bool is_trivial() const { return c1.is_trivial() && c2.is_trivial(); }
  std::string str() const;
  friend DescentClass operator*(const DescentClass& a, const DescentClass& b) { return {a.c1 * b.c1, a.c2 * b.c2}; }
  friend bool operator==(const DescentClass&, const DescentClass&) = default;
  friend auto operator<=>(const DescentClass&, const DescentClass&) = default;
};

// H^1(Q_v, E[2]) element, packed as c1 | c2 << width.
struct LocalDescentClass {
  Place place;
  std::uint8_t c1 = 0, c2 = 0;

  f2::vec packed() const { return c1 | (f2::vec{c2} << place.width()); }
  static LocalDescentClass unpack(const Place& v, f2::vec x);
  friend bool operator==(const LocalDescentClass&, const LocalDescentClass&) = default;
};

LocalDescentClass localize(const DescentClass& c, const Place& v);
f2::vec local_vector(const DescentClass& c, const Place& v);

int local_tate_pairing(const LocalDescentClass& x, const LocalDescentClass& y);
int local_pairing_packed(f2::vec x, f2::vec y, const Place& v);
// Local H^1 has dimension 2 * width.
inline int local_h1_dim(const Place& v) { return 2 * v.width(); }

struct LocalSubspace {
  Place place;
  std::vector<LocalDescentClass> basis;

  int dim() const { return static_cast<int>(basis.size()); }
  std::vector<f2::vec> vectors() const;
  bool contains(f2::vec x) const;
  bool contains(const LocalDescentClass& x) const { return contains(x.packed()); }
};

// Affine point with x = x_num / x_den and y = y_num / y_den.
struct AffinePoint {
  i128 x_num = 0, x_den = 1, y_num = 0, y_den = 1;
};

bool on_curve(const Curve2T& E, i64 d, const AffinePoint& pt);
DescentClass kummer_image(const Curve2T& E, i64 d, Torsion t);
DescentClass kummer_image_of_point(const Curve2T& E, i64 d, const AffinePoint& pt);
LocalDescentClass twisted_torsion_image(const Curve2T& E, i64 d, Torsion t, const Place& v);
// Class of psi_d cup x.
DescentClass cup_with_torsion(i64 d, Torsion t);

struct local_image_budget_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline constexpr std::uint64_t kDefaultImageSeed = 0x5e1f'2b0c'97a3'4d61ULL;
inline constexpr int kImageBudget = 100000;

// Image of E_d(Q_v) / 2 E_d(Q_v) in H^1(Q_v, E[2]); cached per (curve, v, class of d at v, seed).
LocalSubspace local_image(const Curve2T& E, i64 d, const Place& v, std::uint64_t seed = kDefaultImageSeed);
// Image for the twist by any d with the given local class.
LocalSubspace local_image_for_class(const Curve2T& E, const LocalClass& dv, std::uint64_t seed = kDefaultImageSeed);
int local_image_target_dim(const Place& v);

// 2x2 matrix over F2 on E[2]; col[i] is the image of the i-th basis vector.
struct GammaElement {
  std::uint8_t col0 = 0, col1 = 0;

  std::uint8_t apply(std::uint8_t x) const { return static_cast<std::uint8_t>(((x & 1) ? col0 : 0) ^ ((x & 2) ? col1 : 0)); }
  std::uint8_t code() const { return static_cast<std::uint8_t>(col0 | (col1 << 2)); }
  static GammaElement from_code(std::uint8_t c) { return {static_cast<std::uint8_t>(c & 3), static_cast<std::uint8_t>((c >> 2) & 3)}; }
  static GammaElement identity() { return {1, 2}; }
  bool is_zero() const { return col0 == 0 && col1 == 0; }
  friend GammaElement operator+(GammaElement a, GammaElement b) { return {static_cast<std::uint8_t>(a.col0 ^ b.col0), static_cast<std::uint8_t>(a.col1 ^ b.col1)}; }
  friend GammaElement operator*(GammaElement a, GammaElement b) { return {a.apply(b.col0), a.apply(b.col1)}; }
  friend bool operator==(const GammaElement&, const GammaElement&) = default;
};

// gamma(sigma) from the values psi_c(sigma) on the components of delta(P1), delta(P2).
template <typename Psi>
GammaElement gamma_from_character(const Curve2T& E, Psi psi) {
  const DescentClass d1 = kummer_image(E, 1, Torsion::P1), d2 = kummer_image(E, 1, Torsion::P2);
  auto col = [&](const DescentClass& c) { return static_cast<std::uint8_t>(psi(c.c2) | (psi(c.c1) << 1)); };
  return {col(d1), col(d2)};
}

GammaElement gamma_at(const Curve2T& E, i64 m);
bool is_self_adjoint(GammaElement a);
GammaElement transvection(std::uint8_t x);
// Additive span of gens closed under commutators.
std::vector<GammaElement> lie_closure(const std::vector<GammaElement>& gens);
std::vector<GammaElement> additive_span(const std::vector<GammaElement>& gens);
std::vector<GammaElement> end_plus();

struct SimplicityReport {
  bool satisfied = false;
  std::optional<std::uint8_t> invariant_line;
  std::optional<GammaElement> commuting;
};

SimplicityReport check_simple_action(const std::vector<GammaElement>& gamma);

struct ConditionGammaReport {
  SimplicityReport simplicity;
  std::vector<GammaElement> gamma;
  std::vector<SquareClass> e4_gens;
  std::vector<SquareClass> intersection;
  bool satisfied() const { return simplicity.satisfied; }
};

// Square classes generating the Kummer group of Q(E[4]).
std::vector<SquareClass> e4_kummer_gens(const Curve2T& E);
ConditionGammaReport check_condition_gamma(const Curve2T& E, const std::vector<SquareClass>& L_gens);

enum class ProxyResult { ok, fails_disjointness, degenerate };
std::string to_string(ProxyResult r);
ProxyResult check_no_cyclic_4_isogeny_proxy(const Curve2T& E, const AffinePoint& P);

bool check_strict_two_structure(const std::vector<i64>& a, const std::vector<i64>& M);

// Square classes as F2 vectors over a fixed prime support (bit 0 = -1).
class ClassCoordinates {
 public:
  explicit ClassCoordinates(const std::vector<SquareClass>& classes);
  f2::vec of(SquareClass c) const;
  SquareClass from(f2::vec x) const;
  int size() const { return static_cast<int>(primes_.size()) + 1; }

 private:
  std::vector<i64> primes_;
};

// Basis of span(A) intersected with span(B).
std::vector<SquareClass> intersect_spans(const std::vector<SquareClass>& A, const std::vector<SquareClass>& B);

}  // namespace selmerlab::curve

#endif  // SELMERLAB_CURVE_HPP_
