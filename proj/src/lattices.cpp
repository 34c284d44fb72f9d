#include "selmerlab/lattices.hpp"

#include <boost/multiprecision/cpp_int.hpp>
#include <boost/multiprecision/eigen.hpp>
#include <limits>
#include <stdexcept>

#include "selmerlab/arith.hpp"

namespace selmerlab::lattices {

namespace {

using i64 = std::int64_t;
using Big = boost::multiprecision::cpp_int;
using BigMatrix = Matrix<Big>;

struct Ext {
  Big g, x, y;
};

Ext ext_gcd(Big a, Big b) {
  Big x0 = 1, y0 = 0, x1 = 0, y1 = 1;
  while (b != 0) {
    Big q = a / b;
    Big t = a - q * b;
    a = b;
    b = t;
    t = x0 - q * x1;
    x0 = x1;
    x1 = t;
    t = y0 - q * y1;
    y0 = y1;
    y1 = t;
  }
  if (a < 0) return {-a, -x0, -y0};
  return {a, x0, y0};
}

// (col_i, col_j) <- (col_i * p + col_j * q, col_i * r + col_j * s)
void col_combine(BigMatrix& M, int i, int j, const Big& p, const Big& q, const Big& r, const Big& s) {
  for (int k = 0; k < M.rows(); ++k) {
    Big a = M(k, i), b = M(k, j);
    M(k, i) = a * p + b * q;
    M(k, j) = a * r + b * s;
  }
}

void row_combine(BigMatrix& M, int i, int j, const Big& p, const Big& q, const Big& r, const Big& s) {
  for (int k = 0; k < M.cols(); ++k) {
    Big a = M(i, k), b = M(j, k);
    M(i, k) = a * p + b * q;
    M(j, k) = a * r + b * s;
  }
}

BigMatrix widen(const IntMatrix& M) { return M.cast<Big>(); }

BigMatrix product(const BigMatrix& A, const BigMatrix& B) {
  BigMatrix C(A.rows(), B.cols());
  for (int i = 0; i < A.rows(); ++i)
    for (int j = 0; j < B.cols(); ++j) {
      Big s = 0;
      for (int k = 0; k < A.cols(); ++k) s += A(i, k) * B(k, j);
      C(i, j) = s;
    }
  return C;
}

IntMatrix narrow_matrix(const BigMatrix& M) {
  static const Big lo = std::numeric_limits<i64>::min(), hi = std::numeric_limits<i64>::max();
  IntMatrix out(M.rows(), M.cols());
  for (int i = 0; i < M.rows(); ++i)
    for (int j = 0; j < M.cols(); ++j) {
      if (M(i, j) < lo || M(i, j) > hi) throw overflow_error("lattice entry exceeds 64 bits");
      out(i, j) = M(i, j).convert_to<i64>();
    }
  return out;
}

struct BigHermite {
  BigMatrix H, U, Uinv;
  int rank = 0;
};

BigHermite hermite(const BigMatrix& M) {
  const int m = static_cast<int>(M.rows()), n = static_cast<int>(M.cols());
  BigHermite out{M, BigMatrix::Identity(n, n), BigMatrix::Identity(n, n), 0};
  BigMatrix& H = out.H;
  int k = 0;
  for (int r = 0; r < m && k < n; ++r) {
    for (int j = k + 1; j < n; ++j) {
      if (H(r, j) == 0) continue;
      Ext e = ext_gcd(H(r, k), H(r, j));
      const Big ag = H(r, k) / e.g, bg = H(r, j) / e.g;
      // T = [[x, -b/g], [y, a/g]], T^-1 = [[a/g, b/g], [-y, x]]
      col_combine(H, k, j, e.x, e.y, -bg, ag);
      col_combine(out.U, k, j, e.x, e.y, -bg, ag);
      row_combine(out.Uinv, k, j, ag, bg, -e.y, e.x);
    }
    if (H(r, k) != 0) {
      if (H(r, k) < 0) {
        col_combine(H, k, k, -1, 0, -1, 0);
        col_combine(out.U, k, k, -1, 0, -1, 0);
        row_combine(out.Uinv, k, k, -1, 0, -1, 0);
      }
      ++k;
    }
  }
  out.rank = k;
  return out;
}

std::vector<Big> smith(BigMatrix M) {
  const int m = static_cast<int>(M.rows()), n = static_cast<int>(M.cols());
  std::vector<Big> out;
  for (int t = 0; t < std::min(m, n); ++t) {
    // pivot: smallest nonzero |entry| in the trailing block
    int pi = -1, pj = -1;
    for (int i = t; i < m; ++i)
      for (int j = t; j < n; ++j)
        if (M(i, j) != 0 && (pi < 0 || abs(M(i, j)) < abs(M(pi, pj)))) {
          pi = i;
          pj = j;
        }
    if (pi < 0) break;
    M.row(t).swap(M.row(pi));
    M.col(t).swap(M.col(pj));
    bool done = false;
    while (!done) {
      done = true;
      for (int i = t + 1; i < m; ++i) {
        if (M(i, t) == 0) continue;
        if (M(i, t) % M(t, t) == 0) {
          row_combine(M, t, i, 1, 0, -(M(i, t) / M(t, t)), 1);
          continue;
        }
        Ext e = ext_gcd(M(t, t), M(i, t));
        const Big ag = M(t, t) / e.g, bg = M(i, t) / e.g;
        row_combine(M, t, i, e.x, e.y, -bg, ag);
      }
      for (int j = t + 1; j < n; ++j) {
        if (M(t, j) == 0) continue;
        if (M(t, j) % M(t, t) == 0) {
          col_combine(M, t, j, 1, 0, -(M(t, j) / M(t, t)), 1);
          continue;
        }
        Ext e = ext_gcd(M(t, t), M(t, j));
        const Big ag = M(t, t) / e.g, bg = M(t, j) / e.g;
        col_combine(M, t, j, e.x, e.y, -bg, ag);
        done = false;
      }
      if (!done) continue;
      // divisibility of the trailing block
      for (int i = t + 1; i < m && done; ++i)
        for (int j = t + 1; j < n; ++j)
          if (M(i, j) % M(t, t) != 0) {
            M.row(t) += M.row(i);
            done = false;
            break;
          }
    }
    out.push_back(abs(M(t, t)));
  }
  return out;
}

}  // namespace

ColumnHermite column_hermite(const IntMatrix& M) {
  BigHermite h = hermite(widen(M));
  return {narrow_matrix(h.H), narrow_matrix(h.U), narrow_matrix(h.Uinv), h.rank};
}

IntMatrix kernel_basis(const IntMatrix& M) {
  BigHermite h = hermite(widen(M));
  return narrow_matrix(h.U.rightCols(M.cols() - h.rank));
}

std::vector<i64> smith_invariants(IntMatrix M) {
  std::vector<i64> out;
  for (const Big& d : smith(widen(M))) out.push_back(narrow_matrix(BigMatrix::Constant(1, 1, d))(0, 0));
  return out;
}

void require_involution(const IntMatrix& G) {
  if (G.rows() != G.cols() || G.rows() == 0) throw std::invalid_argument("action must be a nonempty square matrix");
  const BigMatrix W = widen(G);
  if (product(W, W) != BigMatrix::Identity(G.rows(), G.cols())) throw std::invalid_argument("action does not square to the identity");
}

namespace {

struct IndexData {
  int fixed_rank;
  i64 index;
};

IndexData fixed_and_index(const IntMatrix& G) {
  require_involution(G);
  const int n = static_cast<int>(G.rows());
  const IntMatrix I = IntMatrix::Identity(n, n);
  BigHermite h = hermite(widen(G - I));
  const int a = n - h.rank;
  if (a == 0) return {0, 1};
  // coordinates of (1+G)L in the basis of ker(G - I)
  BigMatrix coords = product(h.Uinv, widen(G + I));
  if (!coords.topRows(h.rank).isZero()) throw std::logic_error("image of 1+G escaped the fixed lattice");
  std::vector<Big> inv = smith(coords.bottomRows(a));
  if (static_cast<int>(inv.size()) != a) throw std::logic_error("image of 1+G has deficient rank");
  Big index = 1;
  for (const Big& d : inv) index *= d;
  return {a, narrow_matrix(BigMatrix::Constant(1, 1, index))(0, 0)};
}

}  // namespace

Multiplicities decompose(const IntMatrix& G) {
  IndexData d = fixed_and_index(G);
  const int n = static_cast<int>(G.rows());
  int n1 = 0;
  for (i64 idx = d.index; idx > 1; idx /= 2) {
    if (idx % 2) throw std::logic_error("norm index is not a power of two");
    ++n1;
  }
  Multiplicities m{n1, 0, d.fixed_rank - n1};
  m.n2 = n - m.n1 - 2 * m.n3;
  if (m.n3 < 0 || m.n2 < 0) throw std::logic_error("inconsistent multiplicities");
  return m;
}

i64 norm_index(const IntMatrix& G) { return fixed_and_index(G).index; }

IntMatrix block_sum(int n1, int n2, int n3) {
  const int n = n1 + n2 + 2 * n3;
  IntMatrix G = IntMatrix::Zero(n, n);
  int k = 0;
  for (int i = 0; i < n1; ++i, ++k) G(k, k) = 1;
  for (int i = 0; i < n2; ++i, ++k) G(k, k) = -1;
  for (int i = 0; i < n3; ++i, k += 2) {
    G(k, k + 1) = 1;
    G(k + 1, k) = 1;
  }
  return G;
}

std::pair<IntMatrix, IntMatrix> random_unimodular(int n, std::mt19937_64& rng, int steps) {
  if (steps <= 0) steps = 3 * n;
  BigMatrix U = BigMatrix::Identity(n, n), Uinv = BigMatrix::Identity(n, n);
  if (n < 2) return {narrow_matrix(U), narrow_matrix(Uinv)};
  std::uniform_int_distribution<int> pick(0, n - 1), coef(-2, 2);
  for (int s = 0; s < steps; ++s) {
    int i = pick(rng), j = pick(rng);
    if (i == j) continue;
    int c = coef(rng);
    if (c == 0) c = 1;
    // U <- U E, E = I + c e_ij; E^-1 = I - c e_ij
    col_combine(U, j, i, 1, c, 0, 1);
    row_combine(Uinv, i, j, 1, -c, 0, 1);
  }
  return {narrow_matrix(U), narrow_matrix(Uinv)};
}

std::string to_string(ExtensionCase c) {
  switch (c) {
    case ExtensionCase::regular_type:
      return "regular-type";
    case ExtensionCase::nonsplit:
      return "nonsplit";
    case ExtensionCase::trivial_summand:
      return "trivial-summand";
    case ExtensionCase::minus_split:
      return "minus-split";
  }
  return "?";
}

ExtensionCase classify_extension(std::uint64_t u, int sign) {
  if (sign != 1 && sign != -1) throw std::invalid_argument("sign must be +1 or -1");
  if (u != 0) return ExtensionCase::nonsplit;
  return sign == 1 ? ExtensionCase::trivial_summand : ExtensionCase::minus_split;
}

ExtensionCase classify_rank_two(const IntMatrix& G, const std::vector<std::uint64_t>& cocycle) {
  if (G.rows() != 2 || cocycle.size() != 2) throw std::invalid_argument("rank-two lattice expected");
  require_involution(G);
  // cocycle condition c(Gx) = c(x) on the basis
  for (int i = 0; i < 2; ++i) {
    std::uint64_t img = 0;
    for (int k = 0; k < 2; ++k)
      if (G(k, i) % 2 != 0) img ^= cocycle[static_cast<std::size_t>(k)];
    if (img != cocycle[static_cast<std::size_t>(i)]) throw std::invalid_argument("cocycle incompatible with the action");
  }
  Multiplicities m = decompose(G);
  if (m.n1 + m.n3 != 1) throw std::invalid_argument("fixed lattice must have rank one");
  if (m.n3 == 1) return ExtensionCase::regular_type;
  IntMatrix fixed = kernel_basis(G - IntMatrix::Identity(2, 2));
  std::uint64_t u = 0;
  for (int k = 0; k < 2; ++k)
    if (fixed(k, 0) % 2 != 0) u ^= cocycle[static_cast<std::size_t>(k)];
  return u ? ExtensionCase::nonsplit : ExtensionCase::trivial_summand;
}

}  // namespace selmerlab::lattices
