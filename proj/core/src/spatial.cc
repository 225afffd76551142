#include "padist/spatial.h"

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <string>

#include "padist/error.h"
#include "padist/random.h"

namespace padist::stat {

SDRMap::SDRMap(int nx_, int ny_, double resolution_)
    : nx(nx_), ny(ny_), resolution(resolution_),
      values(static_cast<std::size_t>(std::max(nx_, 0)) * std::max(ny_, 0), 0.0) {}

bool SDRMap::is_valid(int ix, int iy) const {
  const std::size_t i = static_cast<std::size_t>(iy) * nx + ix;
  return (valid.empty() || valid[i] != 0) && std::isfinite(values[i]);
}

std::size_t SDRMap::num_valid() const {
  std::size_t c = 0;
  for (int iy = 0; iy < ny; ++iy) {
    for (int ix = 0; ix < nx; ++ix) c += is_valid(ix, iy) ? 1 : 0;
  }
  return c;
}

void SDRMap::validate() const {
  if (!(resolution > 0.0)) throw InvalidParameter("SDR map resolution must be positive");
  if (nx < 1 || ny < 1) throw InvalidParameter("SDR map must have at least one cell");
  if (values.size() != static_cast<std::size_t>(nx) * ny) {
    throw ShapeMismatch("SDR map values do not match its grid size");
  }
  if (!valid.empty() && valid.size() != values.size()) {
    throw ShapeMismatch("SDR map mask does not match its grid size");
  }
}

Autocorrelation spatial_autocorrelation(const SDRMap& map, int max_lag) {
  map.validate();
  if (map.nx < 8 || map.ny < 8 || map.num_valid() < 64) {
    throw InsufficientData("spatial autocorrelation needs an 8x8 grid of valid cells");
  }
  if (max_lag < 0) max_lag = std::min(map.nx, map.ny) / 2;
  max_lag = std::min(max_lag, std::min(map.nx, map.ny) - 1);

  double mean = 0.0;
  std::size_t count = 0;
  for (int iy = 0; iy < map.ny; ++iy) {
    for (int ix = 0; ix < map.nx; ++ix) {
      if (map.is_valid(ix, iy)) {
        mean += map.at(ix, iy);
        ++count;
      }
    }
  }
  mean /= count;
  double var = 0.0;
  for (int iy = 0; iy < map.ny; ++iy) {
    for (int ix = 0; ix < map.nx; ++ix) {
      if (map.is_valid(ix, iy)) var += (map.at(ix, iy) - mean) * (map.at(ix, iy) - mean);
    }
  }
  var /= count;
  if (!(var > 1e-300)) throw DegenerateInput("spatial autocorrelation: map has zero variance");

  Autocorrelation out;
  out.acf.assign(max_lag + 1, 0.0);
  out.pairs.assign(max_lag + 1, 0);
  out.acf[0] = 1.0;
  out.pairs[0] = static_cast<long>(count);
  for (int lag = 1; lag <= max_lag; ++lag) {
    double sx = 0.0, sy = 0.0;
    long nxp = 0, nyp = 0;
    for (int iy = 0; iy < map.ny; ++iy) {
      for (int ix = 0; ix < map.nx; ++ix) {
        if (!map.is_valid(ix, iy)) continue;
        const double a = map.at(ix, iy) - mean;
        if (ix + lag < map.nx && map.is_valid(ix + lag, iy)) {
          sx += a * (map.at(ix + lag, iy) - mean);
          ++nxp;
        }
        if (iy + lag < map.ny && map.is_valid(ix, iy + lag)) {
          sy += a * (map.at(ix, iy + lag) - mean);
          ++nyp;
        }
      }
    }
    double acc = 0.0;
    int axes = 0;
    if (nxp > 0) {
      acc += sx / nxp / var;
      ++axes;
    }
    if (nyp > 0) {
      acc += sy / nyp / var;
      ++axes;
    }
    out.acf[lag] = axes > 0 ? acc / axes : std::numeric_limits<double>::quiet_NaN();
    out.pairs[lag] = nxp + nyp;
  }
  return out;
}

Decorrelation decorrelation_distance(const std::vector<double>& acf, double resolution) {
  if (!(resolution > 0.0)) throw InvalidParameter("resolution must be positive");
  if (acf.size() < 2) throw InsufficientData("decorrelation distance needs >= 2 lags");
  const double target = std::exp(-1.0);
  Decorrelation d;
  for (std::size_t i = 1; i < acf.size(); ++i) {
    if (acf[i] < target) {
      const double a = acf[i - 1], b = acf[i];
      const double frac = (a - target) / (a - b);
      d.distance = (static_cast<double>(i - 1) + frac) * resolution;
      d.crossed = true;
      d.below_resolution = i == 1;
      return d;
    }
  }
  d.distance = std::numeric_limits<double>::infinity();
  return d;
}

Autocorrelation average_autocorrelation(const std::vector<Autocorrelation>& parts) {
  if (parts.empty()) throw InsufficientData("average_autocorrelation: nothing to average");
  std::size_t len = parts.front().acf.size();
  for (const auto& p : parts) len = std::min(len, p.acf.size());
  Autocorrelation out;
  out.acf.assign(len, 0.0);
  out.pairs.assign(len, 0);
  for (const auto& p : parts) {
    for (std::size_t i = 0; i < len; ++i) {
      out.acf[i] += p.acf[i] / parts.size();
      out.pairs[i] += p.pairs[i];
    }
  }
  return out;
}

std::vector<SDRMap> synthesize_exponential_maps(int count, int nx, int ny, double resolution,
                                                double corr_length, double mean_db,
                                                double std_db, uint64_t seed) {
  if (count < 1 || nx < 1 || ny < 1 || !(resolution > 0.0) || !(corr_length > 0.0) ||
      !(std_db >= 0.0)) {
    throw InvalidParameter("synthesize_exponential_map: invalid grid or kernel");
  }
  const int n = nx * ny;
  Eigen::MatrixXd C(n, n);
  for (int i = 0; i < n; ++i) {
    const double xi = (i % nx) * resolution, yi = (i / nx) * resolution;
    for (int j = 0; j <= i; ++j) {
      const double xj = (j % nx) * resolution, yj = (j / nx) * resolution;
      C(i, j) = C(j, i) = std::exp(-std::hypot(xi - xj, yi - yj) / corr_length);
    }
  }
  const Eigen::LLT<Eigen::MatrixXd> llt(C);
  if (llt.info() != Eigen::Success) {
    throw NumericError("synthesize_exponential_map: covariance is not positive definite");
  }
  std::vector<SDRMap> maps;
  maps.reserve(count);
  Eigen::VectorXd z(n);
  for (int m = 0; m < count; ++m) {
    Engine eng(derive_seed(seed, "gp_map", static_cast<uint64_t>(m)));
    for (int i = 0; i < n; ++i) z[i] = standard_normal(eng);
    const Eigen::VectorXd f = llt.matrixL() * z;
    SDRMap map(nx, ny, resolution);
    for (int i = 0; i < n; ++i) map.values[i] = mean_db + std_db * f[i];
    maps.push_back(std::move(map));
  }
  return maps;
}

SDRMap synthesize_exponential_map(int nx, int ny, double resolution, double corr_length,
                                  double mean_db, double std_db, uint64_t seed) {
  return std::move(
      synthesize_exponential_maps(1, nx, ny, resolution, corr_length, mean_db, std_db, seed)
          .front());
}

}  // namespace padist::stat
