#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "padist/channel.h"
#include "padist/pa.h"
#include "padist/rxmetrics.h"
#include "padist/txchain.h"

namespace padist::link {

// One downlink operating point: MRT towards the scheduled channel, the PA
// driven at average IBO gamma_avg, expectations over num_symbols symbols.
struct LinkConfig {
  tx::OFDMConfig ofdm = tx::OFDMConfig::centered(64, 12);
  tx::PaKind pa_kind = tx::PaKind::kSoftLimiter;
  double smoothness = 2.0;
  double p_max = 1.0;
  double gamma_avg = 2.0;
  int num_symbols = 100;

  tx::PAConfig make_pa(int num_antennas) const;
  void validate() const;
};

struct LinkResult {
  rx::RxDecomposition scheduled;
  std::vector<rx::RxDecomposition> victims;
  Eigen::VectorXd p_k, gamma_k, lambda;
  double symbol_power = 0.0;
  // Empty when N == N_U or the PA stayed linear.
  std::optional<double> inband_fraction;

  double sdr_scheduled() const { return rx::sdr_measured(scheduled); }
  double sdr_victim(std::size_t i) const { return rx::sdr_measured(victims.at(i)); }
};

// Symbol s uses QPSK drawn from derive_seed(seed, "symbols", s).
LinkResult simulate_link(const channel::ChannelMatrix& scheduled,
                         std::span<const channel::ChannelMatrix> victims,
                         const LinkConfig& cfg, uint64_t seed);

LinkResult simulate_link(const channel::ChannelMatrix& scheduled, const LinkConfig& cfg,
                         uint64_t seed);

}  // namespace padist::link
