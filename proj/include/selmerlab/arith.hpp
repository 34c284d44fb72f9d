#ifndef SELMERLAB_ARITH_HPP_
#define SELMERLAB_ARITH_HPP_

#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace selmerlab {

using i64 = std::int64_t;
using u64 = std::uint64_t;
using i128 = __int128;

struct overflow_error : std::overflow_error {
  using std::overflow_error::overflow_error;
};

i64 checked_mul(i64 a, i64 b);
i64 checked_add(i64 a, i64 b);
i64 narrow(i128 v);
std::string to_string(i128 v);

bool is_prime(u64 n);
std::vector<std::pair<i64, int>> factorize(i64 n);
std::vector<i64> prime_divisors(i64 n);
int valuation(i128 n, i64 p);
i64 squarefree_kernel(i64 n);
i64 mod_pow(i64 b, i64 e, i64 m);

// Kronecker symbol (a/n).
int kronecker(i64 a, i64 n);
int kronecker(i128 a, i64 n);

// Element of Q^x / Q^x2, stored as a signed squarefree integer.
class SquareClass {
 public:
  SquareClass() = default;
  explicit SquareClass(i64 n);
  static SquareClass of(i128 n);

  i64 value() const { return v_; }
  bool is_trivial() const { return v_ == 1; }

  friend SquareClass operator*(SquareClass a, SquareClass b);
  friend bool operator==(SquareClass a, SquareClass b) = default;
  friend auto operator<=>(SquareClass a, SquareClass b) = default;

 private:
  i64 v_ = 1;
};

struct Place {
  enum class Kind : std::uint8_t { real, two, odd };
  Kind kind = Kind::real;
  i64 p = 0;  // 0 for the real place

  static Place real() { return {Kind::real, 0}; }
  static Place at(i64 prime);

  bool is_real() const { return kind == Kind::real; }
  bool is_two() const { return kind == Kind::two; }
  // F2-dimension of Q_v^x / Q_v^x2.
  int width() const { return kind == Kind::real ? 1 : kind == Kind::two ? 3 : 2; }
  std::string name() const;

  friend bool operator==(const Place&, const Place&) = default;
  friend auto operator<=>(const Place&, const Place&) = default;
};

// Element of Q_v^x / Q_v^x2 as F2 coordinates.
// real: bit0 = sign.
// odd p: bit0 = valuation parity, bit1 = unit is a non-residue.
// p = 2: bit0 = valuation parity, bit1 = (u-1)/2, bit2 = (u^2-1)/8.
struct LocalClass {
  Place place;
  std::uint8_t bits = 0;

  int unit_mod8() const;  // p = 2 only
  friend LocalClass operator*(LocalClass a, LocalClass b);
  friend bool operator==(const LocalClass&, const LocalClass&) = default;
};

std::uint8_t local_bits(i128 n, const Place& v);
LocalClass localize(SquareClass c, const Place& v);
LocalClass localize(i128 n, const Place& v);
// Integer whose class at v is the given one.
i64 local_representative(const LocalClass& c);

// Additive Hilbert symbol on local coordinates.
int hilbert_bits(std::uint8_t x, std::uint8_t y, const Place& v);
int hilbert(SquareClass a, SquareClass b, const Place& v);
int hilbert_product_check(SquareClass a, SquareClass b);

struct SigmaSet {
  std::vector<Place> places;  // real, two, then odd primes ascending
  i64 N = 2;

  static SigmaSet from_primes(std::vector<i64> primes);
  std::vector<i64> finite_primes() const;
  bool contains_prime(i64 p) const;
};

std::vector<SquareClass> sq_group(const SigmaSet& sigma, std::span<const i64> extra);

using SieveVisitor = std::function<void(u64 n, std::span<const u64> primes)>;
void squarefree_sieve(u64 X, const SieveVisitor& visit);
u64 squarefree_count(u64 X);
u64 squarefree_count_mobius(u64 X);

}  // namespace selmerlab

#endif  // SELMERLAB_ARITH_HPP_
