#ifndef SELMERLAB_PELL_HPP_
#define SELMERLAB_PELL_HPP_

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "selmerlab/arith.hpp"
#include "selmerlab/dist.hpp"
#include "selmerlab/family.hpp"

namespace selmerlab::pell {

struct PellSelmer {
  i64 d = 0;
  i64 disc = 0;                // discriminant of Q(sqrt d)
  std::vector<i64> basis;      // squarefree generators
  std::vector<i64> elements;   // ascending, 1 first
  int dim = 0;
  bool contains(i64 x) const;
};

// Odd prime divisors all = 1 mod 4.
bool in_family(i64 d);

// Period length of the continued fraction of sqrt d.
i64 cf_period(i64 d);
bool pell_soluble(i64 d);

// Smallest x, y > 0 with x^2 - d y^2 = -1 or +1; norm is the sign.
struct Fundamental {
  dist::Integer x, y;
  int norm = 0;
};
Fundamental fundamental_solution(i64 d);

// First y <= y_max with d y^2 - 1 or d y^2 + 1 a square decides solubility; nullopt past y_max.
std::optional<bool> pell_brute_force(i64 d, u64 y_max);

PellSelmer pell_selmer(i64 d);
PellSelmer pell_selmer(i64 d, std::span<const u64> primes_of_d);

struct CensusRow {
  i64 d = 0;
  int dim = 0;
  bool soluble = false;
};

struct CensusOptions {
  int workers = 1;
  // Also run the solubility oracle on squarefree d outside the family.
  bool scan_all = true;
};

struct CensusReport {
  u64 X = 0;
  std::vector<CensusRow> rows;       // d in the family, 2 <= d < X
  std::map<int, u64> by_dim;         // dim -> count
  u64 soluble = 0;
  u64 scanned = 0;                   // squarefree d with 2 <= d < X examined
  u64 dim1_insoluble = 0;
  u64 soluble_outside_family = 0;
  u64 soluble_not_in_selmer = 0;
  u64 selmer_membership_mismatch = 0;  // (d in Sel+) != (d in family)

  double soluble_fraction() const;
  family::Interval wilson(double z = 1.959963984540054) const;
  double pr(int r) const;
  // Sum over r of Pr(r) / (2^r - 1) with the empirical Pr.
  double selmer_prediction() const;
  bool implications_hold() const;
};

CensusReport stevenhagen_census(u64 X, const CensusOptions& opts = {});

}  // namespace selmerlab::pell

#endif  // SELMERLAB_PELL_HPP_
