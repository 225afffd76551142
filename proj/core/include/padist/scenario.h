#pragma once

#include <cstdint>

#include "padist/channel.h"

namespace padist::channel {

// Per-UE channel generation over a UE grid. Clustered UEs draw their Rician
// factor uniformly in dB from [rician_k_db_min, rician_k_db_max]; the
// deterministic ray points along the BS-to-UE direction.
struct Scenario {
  ChannelModel model = ChannelModel::kClustered;
  UEScenario ues;
  ArrayGeometry geometry = ArrayGeometry::planar(4, 4);
  ClusterParams cluster;
  double rician_k_db_min = -10.0;
  double rician_k_db_max = 10.0;
  double pathloss_exponent = 2.0;
  double ref_gain_db = -20.0;
  int n_u = 12;
  double subcarrier_spacing = 360e3;

  int num_ues() const { return static_cast<int>(ues.positions.size()); }
  void validate() const;
};

// Desk default: BS at height 10 m, a 20 x 10 grid of UEs on a 4 m raster
// in front of a 4 x 4 array.
Scenario desk_scenario(int nx = 20, int ny = 10);

// Deterministic in (scenario, seed, ue).
ChannelMatrix ue_channel(const Scenario& sc, int ue, uint64_t seed);

}  // namespace padist::channel
