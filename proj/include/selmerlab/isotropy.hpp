#ifndef SELMERLAB_ISOTROPY_HPP_
#define SELMERLAB_ISOTROPY_HPP_

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "selmerlab/arith.hpp"
#include "selmerlab/curve.hpp"
#include "selmerlab/dist.hpp"
#include "selmerlab/f2.hpp"
#include "selmerlab/selmer.hpp"

namespace selmerlab::isotropy {

using selmer::budget_error;

inline constexpr int kMaxEnumerateDim = 6;
inline constexpr int kMaxBruteForceDim = 4;
inline constexpr u64 kYBudget = u64{1} << 20;

// A[2] with its Weil pairing; weil[i] has bit j set when e(b_i, b_j) = 1.
struct F2Space {
  int dim = 0;
  std::vector<f2::vec> weil;

  // E[2] (x) F2^r: bit 2i is P1 in copy i, bit 2i + 1 is P2 in copy i.
  static F2Space symplectic(int r);
  int e(f2::vec x, f2::vec y) const;
  std::vector<f2::vec> perp(std::span<const f2::vec> U) const;
  bool nondegenerate() const;
  f2::vec pi1(f2::vec u) const { return u & mask(); }
  f2::vec pi2(f2::vec u) const { return (u >> dim) & mask(); }
  f2::vec pack(f2::vec x, f2::vec y) const { return x | (y << dim); }
  f2::vec mask() const { return (f2::vec{1} << dim) - 1; }
};

// Vectors of A[2]^2 carry pi1 in the low dim bits and pi2 in the high dim bits.
int q_form(const F2Space& V, f2::vec u);
bool linked(const F2Space& V, f2::vec u, f2::vec v);

// W_{U, phi} = {(u, phi(u) + u') : u in U, u' in U^perp}.
struct IsoSubspace {
  std::vector<f2::vec> U_basis;
  std::vector<f2::vec> phi;       // phi[i] bit j = e(u_i, phi(u_j)); alternating
  std::vector<f2::vec> phi_lift;  // phi(u_i) in A[2]
  std::vector<f2::vec> W_basis;   // canonical basis in A[2]^2

  int dim_U() const { return static_cast<int>(U_basis.size()); }
  std::vector<f2::vec> elements() const;
  bool contains(f2::vec u) const;
};

IsoSubspace make_iso(const F2Space& V, std::vector<f2::vec> U_basis, std::vector<f2::vec> phi);
std::vector<IsoSubspace> enumerate_max_isotropic(const F2Space& V);
// Sum over k of [n, k]_2 2^{k(k-1)/2}.
dist::Integer max_isotropic_count(int n);

// Canonical bases of all k-dimensional subspaces of F2^n.
std::vector<std::vector<f2::vec>> subspaces_of_dim(int n, int k);
std::vector<std::vector<f2::vec>> all_subspaces(int n);
std::vector<std::vector<f2::vec>> brute_force_max_isotropic(const F2Space& V);

struct UnlinkedReport {
  u64 maximal_unlinked = 0;
  u64 cosets = 0;
  int min_size = 0, max_size = 0;
  bool all_cosets = false;
  bool ok() const { return all_cosets && maximal_unlinked == cosets; }
};
UnlinkedReport unlinked_classification_check(const F2Space& V);

// Endomorphism of A[2] by columns.
using Endo = std::vector<f2::vec>;
f2::vec apply(const Endo& g, f2::vec x);
// g acting on each copy of E[2] in E[2] (x) F2^r.
Endo diagonal(curve::GammaElement g, int r);
std::vector<std::vector<f2::vec>> gamma_invariant_subspaces(const F2Space& V, const std::vector<Endo>& gens);
bool is_invariant(std::span<const f2::vec> U, const std::vector<Endo>& gens);
// E[2] (x) T for a subspace T of F2^r.
std::vector<f2::vec> tensor_with_e2(int r, std::span<const f2::vec> T);
// No codimension-1 N in F2^r has pi1(W) inside E[2] (x) N.
bool satisfies_star(int r, const IsoSubspace& W);

// Basis lifts of the image of the family in (Z/4N)^x / squares: positive primes outside
// sigma that split in L, independent at sigma.
struct SBar {
  std::vector<i64> lifts;

  int dim() const { return static_cast<int>(lifts.size()); }
  u64 size() const { return u64{1} << dim(); }
  i64 lift(u64 mask) const;
};
SBar sbar_for(const SigmaSet& sigma, const std::vector<SquareClass>& L_gens, i64 start = 3);
int sbar_expected_dim(const SigmaSet& sigma, const std::vector<SquareClass>& L_gens);

struct YOptions {
  // Sum over V0 x Z0 literally instead of the coset reduction.
  bool literal = false;
  std::uint64_t seed = curve::kDefaultImageSeed;
  std::optional<SBar> sbar;
};

// Character sums for r = 1 and a fixed (E, sigma, b, L).
class YContext {
 public:
  YContext(const curve::Curve2T& E, const SigmaSet& sigma, const selmer::BClass& b, const std::vector<SquareClass>& L_gens,
           const YOptions& opts = {});
  ~YContext();
  YContext(const YContext&) = delete;
  YContext& operator=(const YContext&) = delete;

  const SBar& sbar() const;
  const F2Space& space() const;
  int n_b() const;
  int dim_v0() const;
  int dim_z0() const;
  // gamma(sigma_h) for the basis of SBar.
  std::vector<curve::GammaElement> gamma_gens() const;

  dist::Rational y_sum(const IsoSubspace& W) const;
  // Sum of (-1)^Xi over tuples with eta = t; t in coordinates of W.W_basis.
  std::map<std::vector<u64>, i64> inner_sums(const IsoSubspace& W) const;
  // x indexed by u in A[2] = {0, 1, 2, 3}; requires U = A[2].
  int upsilon(const IsoSubspace& W, std::span<const u64> x) const;
  int l_phi(const IsoSubspace& W, std::span<const u64> x, std::span<const u64> y) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

struct WTerm {
  IsoSubspace W;
  dist::Rational y;
  bool star = false;
  bool gamma_invariant = false;
};

struct MainTermReport {
  dist::Rational lhs, rhs;
  int n_b = 0;
  bool condition_gamma = false;
  std::vector<WTerm> terms;
  bool equal() const { return lhs == rhs; }
};

MainTermReport main_term_identity_check(const curve::Curve2T& E, const SigmaSet& sigma, const selmer::BClass& b,
                                        const std::vector<SquareClass>& L_gens, const YOptions& opts = {});

}  // namespace selmerlab::isotropy

#endif  // SELMERLAB_ISOTROPY_HPP_
