#pragma once

#include <cstddef>
#include <vector>

#include "padist/cnn.h"

namespace padist::ml {

struct PruneReport {
  std::size_t total_params = 0;
  std::size_t nonzero_before = 0;
  std::size_t nonzero_after = 0;
  std::vector<int> filters_removed;  // per conv layer, in layer order
  std::size_t connections_removed = 0;

  double sparsity() const {
    return total_params ? 1.0 - static_cast<double>(nonzero_after) / total_params : 0.0;
  }
};

// Removes the lowest-magnitude items until about (1 - sparsity) of all
// parameters stay nonzero. Conv filters are scored by the mean |w| of their
// kernel and removed whole (bias and the next layer's inputs from that
// channel included); dense connections are scored by |w| individually. The
// last remaining filter of a layer is never removed.
CNNModel prune_magnitude(const CNNModel& model, double sparsity, PruneReport* report = nullptr);

}  // namespace padist::ml
