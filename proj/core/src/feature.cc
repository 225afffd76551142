#include "padist/feature.h"

#include <cmath>

#include "padist/error.h"

namespace padist::ml {

std::vector<double> FeatureMatrix::flatten() const {
  const int k = size();
  std::vector<double> out(static_cast<std::size_t>(k) * k);
  for (int r = 0; r < k; ++r) {
    for (int c = 0; c < k; ++c) out[static_cast<std::size_t>(r) * k + c] = F(r, c);
  }
  return out;
}

FeatureMatrix feature_matrix(const channel::ChannelMatrix& H, double gamma_avg) {
  if (!(gamma_avg > 0.0) || !std::isfinite(gamma_avg)) {
    throw InvalidParameter("feature_matrix: gamma_avg must be positive and finite");
  }
  if (H.H.size() == 0) throw ShapeMismatch("feature_matrix: empty channel");
  const double beta_hat = H.H.cwiseAbs2().mean();
  if (!(beta_hat > 0.0)) throw DegenerateInput("feature_matrix: channel is identically zero");
  // Row n of H is h_n^T, so sum_n h_n h_n^H = H^T conj(H).
  const Eigen::MatrixXcd R = H.H.transpose() * H.H.conjugate();
  FeatureMatrix fm;
  fm.gamma_used = gamma_avg;
  fm.F = R.cwiseAbs() / (H.num_subcarriers() * gamma_avg * beta_hat);
  return fm;
}

}  // namespace padist::ml
