#ifndef SELMERLAB_F2_HPP_
#define SELMERLAB_F2_HPP_

#include <array>
#include <bit>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace selmerlab::f2 {

using vec = std::uint64_t;

inline int parity(vec x) { return __builtin_parityll(x); }
inline int dot(vec a, vec b) { return parity(a & b); }
inline int top_bit(vec x) { return 63 - std::countl_zero(x); }

// Echelon basis over F2 keyed by leading bit; optionally tracks combinations.
class Basis {
 public:
  bool insert(vec v) { return insert(v, 0) >= 0; }

  // Returns the leading bit of the new pivot, or -1 if v was dependent.
  // On dependence, *dependence receives the tag combination that sums to zero.
  int insert(vec v, vec tag, vec* dependence = nullptr) {
    vec t = tag;
    while (v) {
      int b = top_bit(v);
      if (!piv_[b]) {
        piv_[b] = v;
        tag_[b] = t;
        ++rank_;
        return b;
      }
      v ^= piv_[b];
      t ^= tag_[b];
    }
    if (dependence) *dependence = t;
    return -1;
  }

  vec reduce(vec v) const {
    while (v) {
      int b = top_bit(v);
      if (!piv_[b]) return v;
      v ^= piv_[b];
    }
    return 0;
  }

  // Reduces v fully; returns the residue and the tag combination used.
  vec reduce_full(vec v, vec* tag) const {
    vec t = 0, out = 0;
    while (v) {
      int b = top_bit(v);
      if (piv_[b]) {
        v ^= piv_[b];
        t ^= tag_[b];
      } else {
        out |= vec{1} << b;
        v ^= vec{1} << b;
      }
    }
    if (tag) *tag = t;
    return out;
  }

  bool contains(vec v) const { return reduce(v) == 0; }
  int rank() const { return rank_; }

  std::vector<vec> vectors() const {
    std::vector<vec> out;
    for (int b = 63; b >= 0; --b)
      if (piv_[b]) out.push_back(piv_[b]);
    return out;
  }

  // Reduced row echelon form, leading bits descending; a canonical subspace label.
  std::vector<vec> canonical() const {
    std::array<vec, 64> r = piv_;
    for (int b = 0; b < 64; ++b) {
      if (!r[b]) continue;
      for (int c = b + 1; c < 64; ++c)
        if (r[c] && ((r[c] >> b) & 1)) r[c] ^= r[b];
    }
    std::vector<vec> out;
    for (int b = 63; b >= 0; --b)
      if (r[b]) out.push_back(r[b]);
    return out;
  }

  std::vector<vec> elements() const {
    auto basis = vectors();
    if (basis.size() > 24) throw std::length_error("span too large to enumerate");
    std::vector<vec> out{0};
    for (vec g : basis) {
      std::size_t n = out.size();
      for (std::size_t i = 0; i < n; ++i) out.push_back(out[i] ^ g);
    }
    return out;
  }

 private:
  std::array<vec, 64> piv_{};
  std::array<vec, 64> tag_{};
  int rank_ = 0;
};

inline Basis span_of(std::span<const vec> vs) {
  Basis b;
  for (vec v : vs) b.insert(v);
  return b;
}

inline int rank(std::span<const vec> vs) { return span_of(vs).rank(); }

inline bool same_span(std::span<const vec> a, std::span<const vec> b) {
  return span_of(a).canonical() == span_of(b).canonical();
}

// Combinations of rows (as masks over row indices) that sum to zero.
inline std::vector<vec> left_kernel(std::span<const vec> rows) {
  if (rows.size() > 64) throw std::length_error("left_kernel supports at most 64 rows");
  Basis b;
  std::vector<vec> out;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    vec dep = 0;
    if (b.insert(rows[i], vec{1} << i, &dep) < 0) out.push_back(dep);
  }
  return out;
}

// Combine basis vectors selected by mask.
inline vec combine(std::span<const vec> basis, vec mask) {
  vec out = 0;
  while (mask) {
    int i = std::countr_zero(mask);
    out ^= basis[static_cast<std::size_t>(i)];
    mask &= mask - 1;
  }
  return out;
}

}  // namespace selmerlab::f2

#endif  // SELMERLAB_F2_HPP_
