#include "padist/link.h"

#include <cmath>
#include <string>

#include "padist/error.h"
#include "padist/random.h"

namespace padist::link {

tx::PAConfig LinkConfig::make_pa(int num_antennas) const {
  return pa_kind == tx::PaKind::kRapp ? tx::PAConfig::rapp(num_antennas, p_max, smoothness)
                                      : tx::PAConfig::soft_limiter(num_antennas, p_max);
}

void LinkConfig::validate() const {
  ofdm.validate();
  if (!(gamma_avg > 0.0) || !std::isfinite(gamma_avg)) {
    throw InvalidParameter("link: gamma_avg must be positive and finite");
  }
  if (num_symbols < 1) throw InvalidParameter("link: num_symbols must be >= 1");
  if (!(p_max > 0.0)) throw InvalidParameter("link: p_max must be positive");
  if (!(smoothness > 0.0)) throw InvalidParameter("link: smoothness must be positive");
}

LinkResult simulate_link(const channel::ChannelMatrix& scheduled,
                         std::span<const channel::ChannelMatrix> victims,
                         const LinkConfig& cfg, uint64_t seed) {
  cfg.validate();
  scheduled.validate();
  if (scheduled.num_subcarriers() != cfg.ofdm.num_used()) {
    throw ShapeMismatch("link: channel has " + std::to_string(scheduled.num_subcarriers()) +
                        " subcarriers, OFDM config uses " +
                        std::to_string(cfg.ofdm.num_used()));
  }
  for (const auto& v : victims) {
    if (v.num_subcarriers() != scheduled.num_subcarriers() ||
        v.num_antennas() != scheduled.num_antennas()) {
      throw ShapeMismatch("link: victim channel shape differs from scheduled channel");
    }
  }
  const tx::TxChain chain(tx::mrt_precoder(scheduled), cfg.make_pa(scheduled.num_antennas()),
                          cfg.ofdm, cfg.gamma_avg);

  rx::RxAccumulator acc(scheduled);
  std::vector<rx::RxAccumulator> vacc;
  vacc.reserve(victims.size());
  for (const auto& v : victims) vacc.emplace_back(v);

  for (int s = 0; s < cfg.num_symbols; ++s) {
    const tx::TxFrame f = chain.transmit_random(derive_seed(seed, "symbols", s));
    acc.add(f);
    for (auto& a : vacc) a.add(f);
  }

  LinkResult out;
  out.scheduled = acc.result();
  for (const auto& a : vacc) out.victims.push_back(a.result());
  out.p_k = chain.p_k();
  out.gamma_k = chain.gamma_k();
  out.lambda = chain.lambda();
  out.symbol_power = chain.symbol_power();
  if (cfg.ofdm.num_used() < cfg.ofdm.fft_size &&
      std::isfinite(out.scheduled.inband_distortion_fraction)) {
    out.inband_fraction = out.scheduled.inband_distortion_fraction;
  }
  return out;
}

LinkResult simulate_link(const channel::ChannelMatrix& scheduled, const LinkConfig& cfg,
                         uint64_t seed) {
  return simulate_link(scheduled, std::span<const channel::ChannelMatrix>{}, cfg, seed);
}

}  // namespace padist::link
