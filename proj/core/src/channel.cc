#include "padist/channel.h"

#include <algorithm>
#include <cmath>
#include <complex>
#include <set>
#include <sstream>

#include "padist/error.h"
#include "padist/random.h"

namespace padist::channel {

namespace {

constexpr std::complex<double> kJ{0.0, 1.0};

void require(bool cond, const std::string& msg) {
  if (!cond) throw InvalidParameter(msg);
}

}  // namespace

ArrayGeometry ArrayGeometry::planar(int rows, int cols, double spacing) {
  require(rows >= 1 && cols >= 1, "array geometry needs rows, cols >= 1");
  require(spacing > 0.0 && std::isfinite(spacing),
          "array element spacing must be positive");
  ArrayGeometry g;
  g.rows = rows;
  g.cols = cols;
  g.l.reserve(rows * cols);
  g.r.reserve(rows * cols);
  for (int row = 0; row < rows; ++row) {
    for (int col = 0; col < cols; ++col) {
      g.l.push_back(spacing * col);
      g.r.push_back(spacing * row);
    }
  }
  return g;
}

void ArrayGeometry::validate() const {
  require(rows >= 1 && cols >= 1, "array geometry needs rows, cols >= 1");
  const size_t k = static_cast<size_t>(rows) * cols;
  require(l.size() == k && r.size() == k,
          "array geometry offsets must have rows*cols entries");
  require(l[0] == 0.0 && r[0] == 0.0, "array element 0 must be at the origin");
  for (size_t i = 0; i < k; ++i) {
    require(l[i] >= 0.0 && r[i] >= 0.0 && std::isfinite(l[i]) &&
                std::isfinite(r[i]),
            "array offsets must be finite and non-negative");
  }
}

std::string to_string(ChannelModel m) {
  switch (m) {
    case ChannelModel::kRayleigh:
      return "rayleigh";
    case ChannelModel::kLos:
      return "los";
    case ChannelModel::kClustered:
      return "clustered";
    case ChannelModel::kExternal:
      return "external";
  }
  return "external";
}

ChannelModel channel_model_from_string(const std::string& s) {
  if (s == "rayleigh") return ChannelModel::kRayleigh;
  if (s == "los") return ChannelModel::kLos;
  if (s == "clustered") return ChannelModel::kClustered;
  if (s == "external") return ChannelModel::kExternal;
  throw InvalidParameter("unknown channel model '" + s + "'");
}

double ChannelMatrix::empirical_gain() const {
  if (H.size() == 0) return 0.0;
  return H.cwiseAbs2().sum() / static_cast<double>(H.size());
}

void ChannelMatrix::validate() const {
  require(H.rows() >= 1 && H.cols() >= 1, "channel matrix is empty");
  require(beta > 0.0 && std::isfinite(beta), "channel beta must be positive");
  require(H.allFinite(), "channel matrix has non-finite entries");
}

void ClusterParams::validate() const {
  require(num_clusters >= 1, "num_clusters must be >= 1");
  require(rays_per_cluster >= 1, "rays_per_cluster must be >= 1");
  require(std::isfinite(delay_spread) && delay_spread >= 0.0,
          "delay_spread must be finite and >= 0");
  require(std::isfinite(angular_spread) && angular_spread >= 0.0,
          "angular_spread must be finite and >= 0");
  require(!std::isnan(rician_k) && rician_k >= 0.0, "rician_k must be >= 0");
  require(std::isfinite(shadow_sigma_db) && shadow_sigma_db >= 0.0,
          "shadow_sigma_db must be finite and >= 0");
  require(std::isfinite(los_azimuth) && std::isfinite(los_elevation),
          "LoS angles must be finite");
}

UEScenario UEScenario::grid(int nx, int ny, double resolution,
                            const Vec3& origin, const Vec3& bs_position) {
  require(nx >= 1 && ny >= 1, "UE grid needs nx, ny >= 1");
  require(resolution > 0.0, "UE grid resolution must be positive");
  UEScenario s;
  s.grid_resolution = resolution;
  s.bs_position = bs_position;
  s.positions.reserve(static_cast<size_t>(nx) * ny);
  for (int iy = 0; iy < ny; ++iy) {
    for (int ix = 0; ix < nx; ++ix) {
      s.positions.push_back({origin[0] + ix * resolution,
                             origin[1] + iy * resolution, origin[2]});
    }
  }
  return s;
}

void UEScenario::validate() const {
  require(grid_resolution > 0.0, "grid resolution must be positive");
  std::set<Vec3> seen(positions.begin(), positions.end());
  require(seen.size() == positions.size(), "UE positions must be unique");
}

Direction direction_to(const Vec3& bs, const Vec3& ue) {
  // Array plane is x (horizontal) / z (vertical), broadside along +y.
  const double dx = ue[0] - bs[0];
  const double dy = ue[1] - bs[1];
  const double dz = ue[2] - bs[2];
  const double dist = std::sqrt(dx * dx + dy * dy + dz * dz);
  require(dist > 0.0, "UE coincides with the base station");
  Direction d;
  d.distance = dist;
  d.elevation = std::acos(std::clamp(dy / dist, -1.0, 1.0));
  d.azimuth = std::atan2(dz, dx);
  return d;
}

double los_phase(double l, double r, double azimuth, double elevation) {
  const double s = std::sin(elevation);
  return M_PI * (l * s * std::cos(azimuth) + r * s * std::sin(azimuth));
}

ChannelMatrix gen_rayleigh(double beta, int n_u, int num_antennas,
                           uint64_t seed) {
  require(beta > 0.0 && std::isfinite(beta), "beta must be positive");
  require(n_u >= 1 && num_antennas >= 1, "n_u and K must be >= 1");
  Engine eng(seed);
  ChannelMatrix ch;
  ch.beta = beta;
  ch.meta.model = ChannelModel::kRayleigh;
  ch.H.resize(n_u, num_antennas);
  for (int n = 0; n < n_u; ++n) {
    for (int k = 0; k < num_antennas; ++k) ch.H(n, k) = complex_normal(eng, beta);
  }
  return ch;
}

ChannelMatrix gen_los(double beta, double azimuth, double elevation,
                      const ArrayGeometry& geometry, int n_u) {
  require(beta > 0.0 && std::isfinite(beta), "beta must be positive");
  require(std::isfinite(azimuth) && std::isfinite(elevation),
          "angles must be finite");
  require(n_u >= 1, "n_u must be >= 1");
  geometry.validate();
  const int K = geometry.num_antennas();
  const double amp = std::sqrt(beta);
  ChannelMatrix ch;
  ch.beta = beta;
  ch.meta.model = ChannelModel::kLos;
  ch.H.resize(n_u, K);
  for (int k = 0; k < K; ++k) {
    const double phi = los_phase(geometry.l[k], geometry.r[k], azimuth, elevation);
    const std::complex<double> h = amp * std::exp(kJ * phi);
    for (int n = 0; n < n_u; ++n) ch.H(n, k) = h;
  }
  return ch;
}

ChannelMatrix gen_clustered(double beta, const ClusterParams& params,
                            const ArrayGeometry& geometry, int n_u,
                            double subcarrier_spacing, uint64_t seed) {
  require(beta > 0.0 && std::isfinite(beta), "beta must be positive");
  require(n_u >= 1, "n_u must be >= 1");
  require(std::isfinite(subcarrier_spacing) && subcarrier_spacing > 0.0,
          "subcarrier spacing must be positive");
  params.validate();
  geometry.validate();

  const int K = geometry.num_antennas();
  Engine eng(seed);

  const bool pure_los = std::isinf(params.rician_k);
  const double los_share =
      pure_los ? 1.0 : params.rician_k / (params.rician_k + 1.0);
  const double scatter_share = pure_los ? 0.0 : 1.0 / (params.rician_k + 1.0);

  std::vector<double> freq(n_u);
  for (int n = 0; n < n_u; ++n) {
    freq[n] = (n - 0.5 * (n_u - 1)) * subcarrier_spacing;
  }

  CMatrix H = CMatrix::Zero(n_u, K);

  // Cluster delays and exponential power-delay profile.
  const int C = params.num_clusters;
  std::vector<double> delay(C), power(C);
  double total = 0.0;
  for (int c = 0; c < C; ++c) {
    double u = uniform01(eng);
    while (u <= 0.0) u = uniform01(eng);
    delay[c] = params.delay_spread > 0.0 ? -params.delay_spread * std::log(u) : 0.0;
    power[c] = params.delay_spread > 0.0 ? std::exp(-delay[c] / params.delay_spread)
                                         : 1.0;
    total += power[c];
  }
  for (double& p : power) p /= total;

  const int R = params.rays_per_cluster;
  std::vector<std::complex<double>> steer(K);
  for (int c = 0; c < C; ++c) {
    const double az_c = -M_PI + 2.0 * M_PI * uniform01(eng);
    const double el_c = 0.5 * M_PI * uniform01(eng);
    const double ray_amp = std::sqrt(scatter_share * power[c] / R);
    for (int ray = 0; ray < R; ++ray) {
      const double az = az_c + params.angular_spread * standard_normal(eng);
      const double el = el_c + params.angular_spread * standard_normal(eng);
      const double phase0 = 2.0 * M_PI * uniform01(eng);
      if (ray_amp == 0.0) continue;
      const std::complex<double> g = ray_amp * std::exp(kJ * phase0);
      for (int k = 0; k < K; ++k) {
        steer[k] = std::exp(kJ * los_phase(geometry.l[k], geometry.r[k], az, el));
      }
      for (int n = 0; n < n_u; ++n) {
        const std::complex<double> gd =
            g * std::exp(-kJ * (2.0 * M_PI * freq[n] * delay[c]));
        for (int k = 0; k < K; ++k) H(n, k) += gd * steer[k];
      }
    }
  }

  if (los_share > 0.0) {
    const double a = std::sqrt(los_share);
    for (int k = 0; k < K; ++k) {
      const std::complex<double> h =
          a * std::exp(kJ * los_phase(geometry.l[k], geometry.r[k],
                                      params.los_azimuth, params.los_elevation));
      for (int n = 0; n < n_u; ++n) H(n, k) += h;
    }
  }

  // Per-antenna log-normal gain, normalized to unit mean power.
  if (params.shadow_sigma_db > 0.0) {
    const double s = params.shadow_sigma_db * std::log(10.0) / 10.0;
    const double mean_power = std::exp(0.5 * s * s);
    for (int k = 0; k < K; ++k) {
      const double x_db = params.shadow_sigma_db * standard_normal(eng);
      const double amp = std::pow(10.0, x_db / 20.0) / std::sqrt(mean_power);
      H.col(k) *= amp;
    }
  }

  ChannelMatrix ch;
  ch.beta = beta;
  ch.meta.model = ChannelModel::kClustered;
  ch.H = std::sqrt(beta) * H;
  if (!ch.H.allFinite()) throw NumericError("clustered channel is non-finite");
  return ch;
}

double pathloss_beta(double distance_m, double exponent, double ref_gain_db) {
  require(distance_m > 0.0 && std::isfinite(distance_m),
          "distance must be positive");
  require(std::isfinite(exponent) && std::isfinite(ref_gain_db),
          "pathloss parameters must be finite");
  return std::pow(10.0, ref_gain_db / 10.0) * std::pow(distance_m, -exponent);
}

}  // namespace padist::channel
