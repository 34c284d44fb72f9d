#ifndef SELMERLAB_SELMER_HPP_
#define SELMERLAB_SELMER_HPP_

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "selmerlab/arith.hpp"
#include "selmerlab/curve.hpp"

namespace selmerlab::selmer {

using curve::Curve2T;
using curve::DescentClass;

struct budget_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline constexpr int kDirectMaxBits = 26;
inline constexpr int kFormulaMaxPrimes = 8;

struct SelmerGroup {
  i64 d = 1;
  std::vector<DescentClass> basis;
  int dim = 0;

  bool contains(const DescentClass& c) const;
  std::vector<DescentClass> elements() const;
};

// Bad primes of E together with the extra primes.
SigmaSet sigma_for(const Curve2T& E, const std::vector<i64>& extra = {});
void require_sigma(const Curve2T& E, const SigmaSet& sigma);

// Primes of d outside sigma.
std::vector<i64> outside_primes(const SigmaSet& sigma, i64 d);

SelmerGroup selmer_direct(const Curve2T& E, i64 d, const SigmaSet& sigma, std::uint64_t seed = curve::kDefaultImageSeed);
SelmerGroup selmer_kernel(const Curve2T& E, i64 d, const SigmaSet& sigma, std::uint64_t seed = curve::kDefaultImageSeed);

// d = d0 * D with d0 = sign(d) times the part of |d| supported on sigma.
struct TwistSplit {
  i64 d0 = 1, D = 1;
};
TwistSplit split_twist(const SigmaSet& sigma, i64 d);

struct FormulaOptions {
  // Sum over V0 x Z0 literally instead of the coset reduction.
  bool literal = false;
  std::uint64_t seed = curve::kDefaultImageSeed;
};

// Character-sum evaluation of #Sel_2(E_d / Q).
std::uint64_t selmer_count_formula(const Curve2T& E, i64 d, const SigmaSet& sigma, const FormulaOptions& opts = {});

// Rank of the image of the unramified-outside-sigma classes and the total of the place widths.
struct PoitouTate {
  int dim_v0 = 0;
  int dim_z0 = 0;
  int half_dim = 0;
  bool z0_isotropic = false;
  bool ok() const { return dim_v0 == half_dim && dim_z0 == half_dim && z0_isotropic; }
};
PoitouTate poitou_tate_check(const Curve2T& E, i64 d, const SigmaSet& sigma, std::uint64_t seed = curve::kDefaultImageSeed);

// One local square class per place of sigma.
struct BClass {
  std::vector<LocalClass> classes;

  static BClass of(const SigmaSet& sigma, i64 d);
  static BClass trivial(const SigmaSet& sigma);
  bool matches(i64 d) const;
  std::string str() const;
  friend bool operator==(const BClass&, const BClass&) = default;
};

// Every b in the product of the local square class groups, in a fixed order.
std::vector<BClass> all_bclasses(const SigmaSet& sigma);

struct SystematicSubspace {
  std::vector<DescentClass> basis;
  int n_b = 0;

  bool contains(const DescentClass& c) const;
  std::vector<DescentClass> elements() const;
};

SystematicSubspace systematic_subspace(const Curve2T& E, const SigmaSet& sigma, const BClass& b,
                                       const std::vector<SquareClass>& L_gens, std::uint64_t seed = curve::kDefaultImageSeed);

int parity_kappa(const Curve2T& E, const SigmaSet& sigma, const BClass& b, std::uint64_t seed = curve::kDefaultImageSeed);

std::optional<BClass> find_condition_E_witness(const Curve2T& E, const SigmaSet& sigma, const DescentClass& zeta,
                                               std::uint64_t seed = curve::kDefaultImageSeed);

}  // namespace selmerlab::selmer

#endif  // SELMERLAB_SELMER_HPP_
