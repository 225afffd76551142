#pragma once

#include <Eigen/Dense>
#include <vector>

#include "padist/channel.h"
#include "padist/pa.h"
#include "padist/random.h"

namespace padist::tx {

using CVector = Eigen::VectorXcd;

// N-point OFDM with N_U used subcarriers at indices I_n in [-N/2, N/2).
struct OFDMConfig {
  int fft_size = 64;
  int n_cp = 0;
  std::vector<int> subcarrier_map;

  // Contiguous block of n_used subcarriers around DC, DC excluded:
  // [-n_used/2, -1] U [1, n_used - n_used/2].
  static OFDMConfig centered(int fft_size, int n_used, int n_cp = 0);

  int num_used() const { return static_cast<int>(subcarrier_map.size()); }
  void validate() const;
};

// Single-user precoder, W(n, k) = w_{n,k}. Rows have unit norm.
struct Precoder {
  CMatrix W;
  int num_subcarriers() const { return static_cast<int>(W.rows()); }
  int num_antennas() const { return static_cast<int>(W.cols()); }
};

Precoder mrt_precoder(const channel::ChannelMatrix& H);

// x(n, k) = s_n w_{n,k}
CMatrix precode(const Precoder& W, const CVector& symbols);

// Precomputed subcarrier twiddles for modulation and per-bin DFT.
class OfdmModulator {
 public:
  explicit OfdmModulator(const OFDMConfig& cfg);

  const OFDMConfig& config() const { return cfg_; }

  // x: N_U x K  ->  y: K x N, y_{k,t} = sum_n x_{k,n} exp(j 2 pi I_n t / N).
  CMatrix modulate(const CMatrix& x) const;
  // y: K x N -> K x N_U, (1/N) sum_t y_{k,t} exp(-j 2 pi I_n t / N).
  CMatrix demodulate(const CMatrix& y) const;
  // Prepends the last N_CP samples of each row.
  CMatrix with_cyclic_prefix(const CMatrix& y) const;

 private:
  OFDMConfig cfg_;
  CMatrix twiddle_;  // N_U x N
};

CMatrix ofdm_modulate(const CMatrix& x, const OFDMConfig& cfg);

// p_k = sum_n |w_{n,k}|^2 symbol_power
Eigen::VectorXd per_antenna_power(const Precoder& W, double symbol_power);

// gamma_k = P_max,k / p_k. Throws DegenerateInput for p_k == 0.
Eigen::VectorXd ibo_per_antenna(const Eigen::VectorXd& p, const PAConfig& pa);

// gamma = sum P_max,k / sum p_k
double ibo_average(const Eigen::VectorXd& p, const PAConfig& pa);

// Symbol power that puts the average IBO at target_gamma.
double scale_to_ibo(const Precoder& W, const PAConfig& pa, const OFDMConfig& cfg,
                    double target_gamma);

// d = y_hat - lambda_k y, row-wise.
CMatrix distortion_extract(const CMatrix& y, const CMatrix& y_hat,
                           const Eigen::VectorXd& lambda);

// One transmitted OFDM symbol (CP excluded) with its Bussgang split.
struct TxFrame {
  CMatrix x;       // N_U x K precoded symbols
  CMatrix y;       // K x N PA input
  CMatrix y_hat;   // K x N PA output
  CMatrix d_hat;   // K x N distortion
  CMatrix d_freq;  // K x N_U distortion on the used subcarriers
  Eigen::VectorXd lambda;
  Eigen::VectorXd p_k;
  Eigen::VectorXd gamma_k;  // +inf on antennas without power
  double gamma_avg = 0.0;
  // Per-antenna distortion energy on used subcarriers and over all N bins.
  Eigen::VectorXd d_inband;
  Eigen::VectorXd d_total;
};

// QPSK with E|s|^2 = symbol_power.
CVector qpsk_symbols(int n, double symbol_power, Engine& eng);

// Precoder + OFDM + PA for a fixed operating point.
class TxChain {
 public:
  TxChain(Precoder precoder, PAConfig pa, const OFDMConfig& ofdm, double gamma_avg);

  TxFrame transmit(const CVector& symbols) const;
  TxFrame transmit_random(uint64_t seed) const;

  const Precoder& precoder() const { return precoder_; }
  const PAConfig& pa() const { return pa_; }
  const OfdmModulator& modulator() const { return mod_; }
  double symbol_power() const { return symbol_power_; }
  const Eigen::VectorXd& p_k() const { return p_k_; }
  const Eigen::VectorXd& gamma_k() const { return gamma_k_; }
  const Eigen::VectorXd& lambda() const { return lambda_; }
  double gamma_avg() const { return gamma_avg_; }

 private:
  Precoder precoder_;
  PAConfig pa_;
  OfdmModulator mod_;
  double gamma_avg_;
  double symbol_power_;
  Eigen::VectorXd p_k_, gamma_k_, lambda_;
};

}  // namespace padist::tx
