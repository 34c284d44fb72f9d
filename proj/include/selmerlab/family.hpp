#ifndef SELMERLAB_FAMILY_HPP_
#define SELMERLAB_FAMILY_HPP_

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "selmerlab/arith.hpp"
#include "selmerlab/curve.hpp"
#include "selmerlab/selmer.hpp"

namespace selmerlab::family {

using curve::Curve2T;
using curve::DescentClass;

// Twists d in a prescribed local class at the constrained places of sigma whose primes outside sigma split in L.
struct FamilySpec {
  Curve2T curve;
  SigmaSet sigma;
  std::vector<SquareClass> L_gens;
  std::vector<std::optional<LocalClass>> b;  // aligned with sigma.places; nullopt = unrestricted

  // Sigma = bad primes of the curve, primes ramified in L, and extra; b unrestricted.
  static FamilySpec make(const Curve2T& E, std::vector<SquareClass> L_gens = {}, const std::vector<i64>& extra = {});

  FamilySpec& with_b(const selmer::BClass& full);
  FamilySpec& restrict_place(const LocalClass& c);
  bool b_is_full() const;
  selmer::BClass full_b() const;
  // [L : Q]
  int n_L() const;
  void validate() const;
};

bool is_member(const FamilySpec& spec, i64 d);

// Members with |d| < X, ascending |d|, negative before positive.
std::vector<i64> sieve_family(const FamilySpec& spec, u64 X);

struct ProbeRow {
  u64 X = 0;
  u64 count = 0;
  double ratio = 0;  // count / (X (log X)^{1/n_L - 1})
};
std::vector<ProbeRow> asymptotic_probe(const FamilySpec& spec, const std::vector<u64>& Xs);

struct CensusRow {
  i64 d = 0;
  int dim_sel = 0;
  bool in_family = true;
  std::vector<bool> sel_contains;
};

struct CensusOptions {
  int workers = 1;
  // Skip |d| below this bound (resume).
  u64 from = 0;
  // Also emit rows for d in the b-class whose primes do not split in L.
  bool include_nonmembers = false;
  std::uint64_t image_seed = curve::kDefaultImageSeed;
};

struct Census {
  std::vector<CensusRow> rows;
  int n_b = 0;
  int m_b = -1;         // from the first member
  int m_b_kappa = -1;   // from the parity prediction
  std::map<int, u64> histogram;  // r -> count, dim = 2 + n_b + m_b + 2r
  u64 members = 0;
  std::vector<i64> parity_violations;
  std::vector<std::pair<i64, std::string>> skipped;
  std::vector<std::string> warnings;
  double mass(int r) const;
};

Census census(const FamilySpec& spec, u64 X, const std::vector<DescentClass>& tracked, const CensusOptions& opts = {});

struct Interval {
  double lo = 0, hi = 0;
};
// Wilson score interval for k successes out of n.
Interval wilson_interval(u64 k, u64 n, double z = 1.959963984540054);

// Share of squarefree integers having the class c at its place; shares over a place sum to 1.
double local_share(const LocalClass& c);
// Expected number of squarefree |d| < X matching the constrained places: 2 X (6 / pi^2) times the shares.
double expected_class_count(const FamilySpec& spec, u64 X);

}  // namespace selmerlab::family

#endif  // SELMERLAB_FAMILY_HPP_
