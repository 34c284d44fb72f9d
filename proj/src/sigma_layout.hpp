#ifndef SELMERLAB_SRC_SIGMA_LAYOUT_HPP_
#define SELMERLAB_SRC_SIGMA_LAYOUT_HPP_

#include <bit>
#include <vector>

#include "selmerlab/curve.hpp"
#include "selmerlab/f2.hpp"
#include "selmerlab/selmer.hpp"

namespace selmerlab::detail {

// Sigma-adelic vectors: the local vectors at the places of sigma, concatenated.
struct SigmaLayout {
  std::vector<Place> places;
  std::vector<int> offset;
  int total = 0;
  std::vector<f2::vec> pairing_col;

  explicit SigmaLayout(const SigmaSet& sigma) : places(sigma.places) {
    for (const Place& v : places) {
      offset.push_back(total);
      total += curve::local_h1_dim(v);
    }
    if (total > 64) throw selmer::budget_error("sigma too large for the packed adelic layout");
    pairing_col.assign(static_cast<std::size_t>(total), 0);
    for (std::size_t k = 0; k < places.size(); ++k) {
      const int w = curve::local_h1_dim(places[k]);
      for (int i = 0; i < w; ++i)
        for (int j = 0; j < w; ++j)
          if (curve::local_pairing_packed(f2::vec{1} << i, f2::vec{1} << j, places[k]))
            pairing_col[static_cast<std::size_t>(offset[k] + j)] |= f2::vec{1} << (offset[k] + i);
    }
  }

  f2::vec loc(const curve::DescentClass& c) const {
    f2::vec out = 0;
    for (std::size_t k = 0; k < places.size(); ++k) out |= curve::local_vector(c, places[k]) << offset[k];
    return out;
  }

  // J y, so that pair(x, y) = dot(x, J y).
  f2::vec dual(f2::vec y) const {
    f2::vec Jy = 0;
    while (y) {
      Jy ^= pairing_col[static_cast<std::size_t>(std::countr_zero(y))];
      y &= y - 1;
    }
    return Jy;
  }

  int pair(f2::vec x, f2::vec y) const { return f2::dot(x, dual(y)); }
};

}  // namespace selmerlab::detail

#endif  // SELMERLAB_SRC_SIGMA_LAYOUT_HPP_
