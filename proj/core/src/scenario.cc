#include "padist/scenario.h"

#include <cmath>
#include <string>

#include "padist/error.h"
#include "padist/random.h"

namespace padist::channel {

void Scenario::validate() const {
  ues.validate();
  geometry.validate();
  cluster.validate();
  if (ues.positions.empty()) throw InvalidParameter("scenario has no UEs");
  if (n_u < 1) throw InvalidParameter("scenario n_u must be >= 1");
  if (!(subcarrier_spacing > 0.0)) throw InvalidParameter("subcarrier spacing must be positive");
  if (rician_k_db_min > rician_k_db_max) throw InvalidParameter("rician_k_db range is reversed");
  if (model == ChannelModel::kExternal) {
    throw InvalidParameter("scenario cannot generate external channels");
  }
}

Scenario desk_scenario(int nx, int ny) {
  Scenario sc;
  sc.ues = UEScenario::grid(nx, ny, 4.0, {-2.0 * nx, 10.0, 1.5}, {0.0, 0.0, 10.0});
  return sc;
}

ChannelMatrix ue_channel(const Scenario& sc, int ue, uint64_t seed) {
  if (ue < 0 || ue >= sc.num_ues()) {
    throw InvalidParameter("UE index " + std::to_string(ue) + " out of range");
  }
  const Vec3& pos = sc.ues.positions[ue];
  const Direction dir = direction_to(sc.ues.bs_position, pos);
  const double beta = pathloss_beta(dir.distance, sc.pathloss_exponent, sc.ref_gain_db);
  const int K = sc.geometry.num_antennas();
  ChannelMatrix ch;
  switch (sc.model) {
    case ChannelModel::kRayleigh:
      ch = gen_rayleigh(beta, sc.n_u, K, derive_seed(seed, "channel", ue));
      break;
    case ChannelModel::kLos:
      ch = gen_los(beta, dir.azimuth, dir.elevation, sc.geometry, sc.n_u);
      break;
    case ChannelModel::kClustered: {
      ClusterParams p = sc.cluster;
      Engine eng(derive_seed(seed, "ue_params", ue));
      const double k_db =
          sc.rician_k_db_min + (sc.rician_k_db_max - sc.rician_k_db_min) * uniform01(eng);
      p.rician_k = std::pow(10.0, k_db / 10.0);
      p.los_azimuth = dir.azimuth;
      p.los_elevation = dir.elevation;
      ch = gen_clustered(beta, p, sc.geometry, sc.n_u, sc.subcarrier_spacing,
                         derive_seed(seed, "channel", ue));
      break;
    }
    case ChannelModel::kExternal:
      throw InvalidParameter("scenario cannot generate external channels");
  }
  ch.meta.position = pos;
  return ch;
}

}  // namespace padist::channel
