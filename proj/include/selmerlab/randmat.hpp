#ifndef SELMERLAB_RANDMAT_HPP_
#define SELMERLAB_RANDMAT_HPP_

#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "selmerlab/arith.hpp"
#include "selmerlab/dist.hpp"

namespace selmerlab::randmat {

using Rng = std::mt19937_64;

inline constexpr int kDefaultPrecision2 = 20;
inline constexpr int kDefaultPrecisionOdd = 12;
inline constexpr u64 kChunk = 4096;

int default_precision(int p);
// Largest e with p^e < 2^62.
int max_precision(int p);

// Stream `index` of the family keyed by `seed`.
Rng make_stream(std::uint64_t seed, std::uint64_t index);

struct PadicAltMatrix {
  int s = 0;
  int p = 2;
  int e = 1;
  u64 modulus = 2;  // p^e
  std::vector<u64> entries;  // row-major residues mod p^e

  static PadicAltMatrix zero(int s, int p, int e);
  u64 at(int i, int j) const { return entries[static_cast<std::size_t>(i) * s + j]; }
  // Sets (i, j) = v and (j, i) = -v.
  void set(int i, int j, u64 v);
  bool is_alternating() const;
};

// Haar sample with the first constraint_n columns (and rows) divisible by p.
PadicAltMatrix sample_alt(int s, int p, int e, int constraint_n, Rng& rng);
// M + p^e M' with M' Haar on all alternating matrices; same constraint is kept.
PadicAltMatrix refine(const PadicAltMatrix& M, int e_new, Rng& rng);
PadicAltMatrix truncate(const PadicAltMatrix& M, int e_new);
// X^T M X for X given row-major mod p^e.
PadicAltMatrix conjugate(const PadicAltMatrix& M, const std::vector<u64>& X);

struct KernelReport {
  int rank_mod_p = 0;
  int ker_dim_mod_p = 0;
  // Valuations of the diagonal after elimination; e marks a divisor that vanishes mod p^e.
  std::vector<int> divisor_valuations;
  // Normalized so the first nonzero coordinate is 1; nullopt when corank 1 is not certified.
  std::optional<std::vector<u64>> y_line;
};

KernelReport kernel_report(const PadicAltMatrix& M);
// Gaussian elimination over F_p.
int rank_mod_p(const PadicAltMatrix& M);

struct SampleOptions {
  std::uint64_t seed = 1;
  int workers = 1;
  int e = 0;  // 0 selects default_precision(p)
};

struct GammaEstimate {
  int n = 0, s = 0, p = 2, e = 0;
  u64 samples = 0;
  u64 hits = 0;
  u64 retried = 0;       // undetermined at e, redrawn digits to 2e
  u64 undetermined = 0;  // still undetermined at 2e; excluded
  double estimate = 0;
  double stderr_ = 0;
  dist::Rational exact;
  double z() const;
};

// Frequency of <y(M) mod p> = <e_1> with S = <e_1, ..., e_n> forced into ker(M mod p).
GammaEstimate gamma_n_empirical(int n, int s, int p, u64 N, const SampleOptions& opts = {});

// Number of alternating s x s matrices over F_p of rank 2k.
dist::Integer alt_rank_count(int s, int k, int p);
// Exact law of dim ker(M mod p) under the constraint; index = dim.
std::vector<dist::Rational> exact_kernel_distribution(int n, int s, int p);
// gamma_n(s) by conditioning on dim ker(M mod p) with lines of the kernel equally likely.
dist::Rational gamma_from_kernel_law(int n, int s, int p);
// Limiting mass alpha(p, dim - n) on dims of parity n + m; zero elsewhere.
double alpha_prediction(int n, int dim, int p);

struct KernelHistogram {
  int n = 0, s = 0, p = 2, e = 0;
  u64 samples = 0;
  std::vector<u64> counts;  // index = dim ker(M mod p)
  double mass(int dim) const;
  // Largest |mass - alpha_prediction| over dims 0..s.
  double max_alpha_gap() const;
  bool parity_ok() const;
};

KernelHistogram kernel_dim_distribution(int n, int s, int p, u64 N, const SampleOptions& opts = {});

struct LineTest {
  int s = 0, p = 2, U_dim = 0, e = 0;
  u64 drawn = 0;
  u64 conditioned = 0;
  u64 undetermined = 0;
  std::vector<u64> counts;  // lines of U = <e_1, ..., e_U_dim> in line_index order
  double chi2 = 0;
  int dof = 0;
  double p_value = 1;
  bool inconclusive = false;
};

// Lines of F_p^k as normalized vectors; index of v in that list.
std::vector<std::vector<u64>> lines_of(int k, int p);
std::size_t line_index(const std::vector<u64>& v, int p);

// N draws with U forced into ker(M mod p), kept when ker(M mod p) = U.
LineTest line_equidistribution_test(int s, int p, int U_dim, u64 N, const SampleOptions& opts = {});

}  // namespace selmerlab::randmat

#endif  // SELMERLAB_RANDMAT_HPP_
