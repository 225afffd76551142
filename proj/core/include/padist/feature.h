#pragma once

#include <Eigen/Dense>
#include <vector>

#include "padist/channel.h"

namespace padist::ml {

// F = |sum_n h_n h_n^H| / (N_U gamma beta_hat), beta_hat the grand mean of |h|^2.
struct FeatureMatrix {
  Eigen::MatrixXd F;
  double gamma_used = 0.0;

  int size() const { return static_cast<int>(F.rows()); }
  // Row-major copy.
  std::vector<double> flatten() const;
};

FeatureMatrix feature_matrix(const channel::ChannelMatrix& H, double gamma_avg);

}  // namespace padist::ml
