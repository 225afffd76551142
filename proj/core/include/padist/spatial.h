#pragma once

#include <cstdint>
#include <vector>

namespace padist::stat {

// Regular grid of SDR values in dB; cell (ix, iy) is values[iy * nx + ix].
struct SDRMap {
  int nx = 0;
  int ny = 0;
  double resolution = 4.0;  // meters
  std::vector<double> values;
  std::vector<uint8_t> valid;  // empty means every cell is valid

  SDRMap() = default;
  SDRMap(int nx, int ny, double resolution);

  double& at(int ix, int iy) { return values[static_cast<std::size_t>(iy) * nx + ix]; }
  double at(int ix, int iy) const { return values[static_cast<std::size_t>(iy) * nx + ix]; }
  bool is_valid(int ix, int iy) const;
  std::size_t num_valid() const;
  void validate() const;
};

struct Autocorrelation {
  std::vector<double> acf;      // acf[0] == 1
  std::vector<long> pairs;      // valid pairs per lag, both axes together
};

// Normalized autocovariance of the mean-removed map along rows and along
// columns, averaged over the two axes. max_lag < 0 picks min(nx, ny) / 2.
Autocorrelation spatial_autocorrelation(const SDRMap& map, int max_lag = -1);

struct Decorrelation {
  double distance = 0.0;          // meters; +inf when never below 1/e
  bool crossed = false;
  bool below_resolution = false;  // acf(1) already below 1/e
};

// Lag-wise mean of several autocorrelations (truncated to the shortest).
Autocorrelation average_autocorrelation(const std::vector<Autocorrelation>& parts);

Decorrelation decorrelation_distance(const std::vector<double>& acf, double resolution);

// Zero-mean Gaussian field with covariance std^2 exp(-d / length), plus mean.
SDRMap synthesize_exponential_map(int nx, int ny, double resolution, double corr_length,
                                  double mean_db, double std_db, uint64_t seed);

// Independent realizations sharing one covariance factorization; map i is
// drawn from derive_seed(seed, "gp_map", i).
std::vector<SDRMap> synthesize_exponential_maps(int count, int nx, int ny, double resolution,
                                                double corr_length, double mean_db,
                                                double std_db, uint64_t seed);

}  // namespace padist::stat
