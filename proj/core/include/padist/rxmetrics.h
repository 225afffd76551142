#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <optional>
#include <span>
#include <vector>

#include "padist/channel.h"
#include "padist/pa.h"
#include "padist/txchain.h"

namespace padist::rx {

// Per-subcarrier received wanted and distortion power.
struct RxDecomposition {
  Eigen::VectorXd S;  // N_U
  Eigen::VectorXd D;  // N_U
  double noise_power = 0.0;
  // NaN when the PA produced no distortion.
  double inband_distortion_fraction = 0.0;
  int num_symbols = 0;

  double total_wanted() const { return S.sum(); }
  double total_distortion() const { return D.sum(); }
};

// Streaming symbol average for one receive channel h_tilde.
class RxAccumulator {
 public:
  explicit RxAccumulator(const channel::ChannelMatrix& h_tilde);

  void add(const tx::TxFrame& frame);
  RxDecomposition result() const;

 private:
  tx::CMatrix h_;  // N_U x K
  Eigen::VectorXd s_sum_, d_sum_;
  Eigen::VectorXd inband_, total_;
  int count_ = 0;
};

RxDecomposition receive_decompose(std::span<const tx::TxFrame> frames,
                                  const channel::ChannelMatrix& h_tilde,
                                  const tx::OFDMConfig& cfg);

// Sum S / sum D; +inf when the distortion is exactly zero.
double sdr_measured(const RxDecomposition& dec);

// Theoretical SDRs (linear). The soft limiter uses closed forms, Rapp the
// quadrature moments. The in-band share of transmit distortion is 2/3.
inline constexpr double kInbandShare = 2.0 / 3.0;
double sdr_theory_uncorrelated(double gamma, int num_antennas,
                               tx::PaKind kind = tx::PaKind::kSoftLimiter,
                               double smoothness = 2.0);
double sdr_theory_correlated(double gamma, tx::PaKind kind = tx::PaKind::kSoftLimiter,
                             double smoothness = 2.0);
double sdr_theory_victim(double gamma, tx::PaKind kind = tx::PaKind::kSoftLimiter,
                         double smoothness = 2.0);

// K * mean_gain * lambda^2 * total_power
double s_rx_theory(int num_antennas, double mean_gain, double lambda, double total_power);

// In-band share of transmitted distortion, averaged over antennas. Throws
// InvalidParameter when N == N_U (nothing out of band to measure); returns
// nullopt for a distortion-free (linear) transmission.
std::optional<double> inband_fraction(std::span<const tx::TxFrame> frames,
                                      const tx::OFDMConfig& cfg);

struct SndrRate {
  double sndr = 0.0;
  double rate_bps = 0.0;
};

// sndr = S / (D + interference_noise), rate = bandwidth log2(1 + sndr).
SndrRate sndr_and_rate(double wanted, double distortion, double interference_noise,
                       double bandwidth_hz);

inline double to_db(double lin) { return 10.0 * std::log10(lin); }
inline double from_db(double db) { return std::pow(10.0, db / 10.0); }

}  // namespace padist::rx
