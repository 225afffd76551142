#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace padist::channel {

using CMatrix = Eigen::MatrixXcd;
using Vec3 = std::array<double, 3>;

// Planar array; offsets are in wavelengths relative to element 0.
struct ArrayGeometry {
  int rows = 0;
  int cols = 0;
  std::vector<double> l;  // horizontal offsets
  std::vector<double> r;  // vertical offsets

  int num_antennas() const { return rows * cols; }

  // Uniform rectangular array, element k = row * cols + col.
  static ArrayGeometry planar(int rows, int cols, double spacing = 0.5);
  void validate() const;
};

enum class ChannelModel { kRayleigh, kLos, kClustered, kExternal };

std::string to_string(ChannelModel m);
ChannelModel channel_model_from_string(const std::string& s);

struct ChannelMeta {
  ChannelModel model = ChannelModel::kExternal;
  Vec3 position{0.0, 0.0, 0.0};
};

// Frequency-domain MISO channel for one UE, N_U x K.
struct ChannelMatrix {
  CMatrix H;
  double beta = 1.0;
  ChannelMeta meta;

  int num_subcarriers() const { return static_cast<int>(H.rows()); }
  int num_antennas() const { return static_cast<int>(H.cols()); }
  // Grand mean of |h|^2 over all entries.
  double empirical_gain() const;
  void validate() const;
};

struct ClusterParams {
  int num_clusters = 6;
  int rays_per_cluster = 10;
  double delay_spread = 300e-9;     // seconds, mean of exponential delays
  double angular_spread = 0.2;      // radians, per-cluster ray spread
  double rician_k = 0.0;            // linear; may be +inf (pure LoS ray)
  double shadow_sigma_db = 0.0;     // per-antenna log-normal gain spread
  double los_azimuth = 0.0;         // direction of the deterministic ray
  double los_elevation = 0.0;

  void validate() const;
};

struct UEScenario {
  std::vector<Vec3> positions;
  Vec3 bs_position{0.0, 0.0, 0.0};
  double grid_resolution = 4.0;

  // nx x ny grid with the first UE at `origin`, stepping along +x then +y.
  static UEScenario grid(int nx, int ny, double resolution, const Vec3& origin,
                         const Vec3& bs_position);
  void validate() const;
};

// Azimuth / elevation of `ue` as seen from the array at `bs`. Elevation is
// measured from the array broadside (0 = boresight).
struct Direction {
  double azimuth = 0.0;
  double elevation = 0.0;
  double distance = 0.0;
};
Direction direction_to(const Vec3& bs, const Vec3& ue);

ChannelMatrix gen_rayleigh(double beta, int n_u, int num_antennas,
                           uint64_t seed);

ChannelMatrix gen_los(double beta, double azimuth, double elevation,
                      const ArrayGeometry& geometry, int n_u);

ChannelMatrix gen_clustered(double beta, const ClusterParams& params,
                            const ArrayGeometry& geometry, int n_u,
                            double subcarrier_spacing, uint64_t seed);

// Large-scale gain ref_gain * d^-exponent.
double pathloss_beta(double distance_m, double exponent, double ref_gain_db);

// Per-element LoS phase pi * (l sin(el) cos(az) + r sin(el) sin(az)).
double los_phase(double l, double r, double azimuth, double elevation);

}  // namespace padist::channel
