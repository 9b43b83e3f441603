#pragma once

#include <cstddef>
#include <span>

namespace msig {

struct DtwResult {
  double distance = 0.0;
  std::size_t path_length = 0;  // aligned cells on one optimal path
};

/// Unnormalized dynamic time warping distance: minimal cumulative |a_i - b_j|
/// over monotone warping paths with steps (i-1,j), (i,j-1), (i-1,j-1),
/// anchored at both endpoints. Uses a two-row buffer.
double dtw_distance(std::span<const double> a, std::span<const double> b);

/// Same distance, plus the length of an optimal path (full-matrix backtrack;
/// diagonal steps preferred on ties).
DtwResult dtw_align(std::span<const double> a, std::span<const double> b);

}  // namespace msig
