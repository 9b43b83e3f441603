#include "msig/dtw.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "msig/errors.hpp"

namespace msig {

namespace {

void check_inputs(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) {
    throw EmptySequence("dtw requires two non-empty sequences");
  }
  for (double v : a) {
    if (!std::isfinite(v)) throw NonFiniteInput("non-finite value in sequence a");
  }
  for (double v : b) {
    if (!std::isfinite(v)) throw NonFiniteInput("non-finite value in sequence b");
  }
}

}  // namespace

double dtw_distance(std::span<const double> a, std::span<const double> b) {
  check_inputs(a, b);
  const std::size_t n = a.size();
  const std::size_t m = b.size();

  std::vector<double> prev(m), curr(m);
  prev[0] = std::abs(a[0] - b[0]);
  for (std::size_t j = 1; j < m; ++j) {
    prev[j] = prev[j - 1] + std::abs(a[0] - b[j]);
  }
  for (std::size_t i = 1; i < n; ++i) {
    curr[0] = prev[0] + std::abs(a[i] - b[0]);
    for (std::size_t j = 1; j < m; ++j) {
      const double best = std::min({prev[j], curr[j - 1], prev[j - 1]});
      curr[j] = std::abs(a[i] - b[j]) + best;
    }
    std::swap(prev, curr);
  }
  return prev[m - 1];
}

DtwResult dtw_align(std::span<const double> a, std::span<const double> b) {
  check_inputs(a, b);
  const std::size_t n = a.size();
  const std::size_t m = b.size();

  std::vector<double> cost(n * m);
  auto at = [&](std::size_t i, std::size_t j) -> double& {
    return cost[i * m + j];
  };

  at(0, 0) = std::abs(a[0] - b[0]);
  for (std::size_t j = 1; j < m; ++j) at(0, j) = at(0, j - 1) + std::abs(a[0] - b[j]);
  for (std::size_t i = 1; i < n; ++i) at(i, 0) = at(i - 1, 0) + std::abs(a[i] - b[0]);
  for (std::size_t i = 1; i < n; ++i) {
    for (std::size_t j = 1; j < m; ++j) {
      const double best = std::min({at(i - 1, j), at(i, j - 1), at(i - 1, j - 1)});
      at(i, j) = std::abs(a[i] - b[j]) + best;
    }
  }

  std::size_t i = n - 1, j = m - 1, length = 1;
  while (i > 0 || j > 0) {
    if (i == 0) {
      --j;
    } else if (j == 0) {
      --i;
    } else {
      const double diag = at(i - 1, j - 1);
      const double up = at(i - 1, j);
      const double left = at(i, j - 1);
      if (diag <= up && diag <= left) {
        --i;
        --j;
      } else if (up <= left) {
        --i;
      } else {
        --j;
      }
    }
    ++length;
  }
  return DtwResult{at(n - 1, m - 1), length};
}

}  // namespace msig
