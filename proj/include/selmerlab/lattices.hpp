#ifndef SELMERLAB_LATTICES_HPP_
#define SELMERLAB_LATTICES_HPP_

#include <Eigen/Core>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace selmerlab::lattices {

template <typename T>
using Matrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;
using IntMatrix = Matrix<std::int64_t>;

struct ColumnHermite {
  IntMatrix H;     // M * U, nonzero columns first
  IntMatrix U;     // unimodular
  IntMatrix Uinv;  // inverse of U
  int rank = 0;
};

ColumnHermite column_hermite(const IntMatrix& M);
IntMatrix kernel_basis(const IntMatrix& M);
std::vector<std::int64_t> smith_invariants(IntMatrix M);

struct InvolutionLattice {
  IntMatrix action;
  int rank() const { return static_cast<int>(action.rows()); }
};

struct Multiplicities {
  int n1 = 0;  // trivial Z
  int n2 = 0;  // sign Z(-1)
  int n3 = 0;  // regular Z[G]
  friend bool operator==(const Multiplicities&, const Multiplicities&) = default;
};

void require_involution(const IntMatrix& G);
Multiplicities decompose(const IntMatrix& G);
std::int64_t norm_index(const IntMatrix& G);

IntMatrix block_sum(int n1, int n2, int n3);
// Random unimodular U with its inverse.
std::pair<IntMatrix, IntMatrix> random_unimodular(int n, std::mt19937_64& rng, int steps = 0);

enum class ExtensionCase { regular_type, nonsplit, trivial_summand, minus_split };
std::string to_string(ExtensionCase c);

// Extension of Z (sign +1) or Z(-1) (sign -1) by U = F2^n with g m = sign m + u.
ExtensionCase classify_extension(std::uint64_t u, int sign);

// Rank-two lattice part G with torsion U = F2^n; g(x, t) = (G x, t + c(x)),
// where c sends the i-th basis vector to cocycle[i].
ExtensionCase classify_rank_two(const IntMatrix& G, const std::vector<std::uint64_t>& cocycle);

}  // namespace selmerlab::lattices

#endif  // SELMERLAB_LATTICES_HPP_
