#include "padist/rxmetrics.h"

#include <cmath>
#include <limits>
#include <string>

#include "padist/error.h"

namespace padist::rx {

RxAccumulator::RxAccumulator(const channel::ChannelMatrix& h_tilde) : h_(h_tilde.H) {
  s_sum_ = Eigen::VectorXd::Zero(h_.rows());
  d_sum_ = Eigen::VectorXd::Zero(h_.rows());
  inband_ = Eigen::VectorXd::Zero(h_.cols());
  total_ = Eigen::VectorXd::Zero(h_.cols());
}

void RxAccumulator::add(const tx::TxFrame& f) {
  if (f.x.rows() != h_.rows() || f.x.cols() != h_.cols()) {
    throw ShapeMismatch("receive_decompose: channel is " + std::to_string(h_.rows()) + "x" +
                        std::to_string(h_.cols()) + ", frame is " +
                        std::to_string(f.x.rows()) + "x" + std::to_string(f.x.cols()));
  }
  // Wanted: s_n sum_k lambda_k h_{n,k} w_{n,k}; distortion: sum_k d_{n,k} h_{n,k}.
  const Eigen::VectorXcd wanted = (h_.cwiseProduct(f.x) * f.lambda.cast<std::complex<double>>());
  const Eigen::VectorXcd dist = h_.cwiseProduct(f.d_freq.transpose()).rowwise().sum();
  s_sum_ += wanted.cwiseAbs2();
  d_sum_ += dist.cwiseAbs2();
  inband_ += f.d_inband;
  total_ += f.d_total;
  ++count_;
}

RxDecomposition RxAccumulator::result() const {
  if (count_ == 0) throw InvalidParameter("receive_decompose: no OFDM symbols");
  RxDecomposition dec;
  dec.S = s_sum_ / count_;
  dec.D = d_sum_ / count_;
  dec.num_symbols = count_;
  double acc = 0.0;
  int used = 0;
  for (Eigen::Index k = 0; k < total_.size(); ++k) {
    if (total_[k] > 0.0) {
      acc += inband_[k] / total_[k];
      ++used;
    }
  }
  dec.inband_distortion_fraction =
      used > 0 ? acc / used : std::numeric_limits<double>::quiet_NaN();
  return dec;
}

RxDecomposition receive_decompose(std::span<const tx::TxFrame> frames,
                                  const channel::ChannelMatrix& h_tilde,
                                  const tx::OFDMConfig& cfg) {
  if (h_tilde.num_subcarriers() != cfg.num_used()) {
    throw ShapeMismatch("receive_decompose: channel has " +
                        std::to_string(h_tilde.num_subcarriers()) + " subcarriers, config " +
                        std::to_string(cfg.num_used()));
  }
  RxAccumulator acc(h_tilde);
  for (const auto& f : frames) acc.add(f);
  return acc.result();
}

double sdr_measured(const RxDecomposition& dec) {
  const double d = dec.total_distortion();
  if (d <= 0.0) return std::numeric_limits<double>::infinity();
  return dec.total_wanted() / d;
}

namespace {

double correlated_core(double gamma, tx::PaKind kind, double smoothness) {
  if (!(gamma > 0.0)) throw InvalidParameter("IBO must be positive");
  if (std::isinf(gamma)) return std::numeric_limits<double>::infinity();
  const double lam = tx::bussgang_lambda(gamma, kind, smoothness);
  const double dn = tx::normalized_distortion_power(gamma, kind, smoothness);
  if (dn <= 0.0) return std::numeric_limits<double>::infinity();
  return lam * lam / (kInbandShare * dn);
}

}  // namespace

double sdr_theory_uncorrelated(double gamma, int num_antennas, tx::PaKind kind,
                               double smoothness) {
  if (num_antennas < 1) throw InvalidParameter("K must be >= 1");
  return num_antennas * correlated_core(gamma, kind, smoothness);
}

double sdr_theory_correlated(double gamma, tx::PaKind kind, double smoothness) {
  return correlated_core(gamma, kind, smoothness);
}

double sdr_theory_victim(double gamma, tx::PaKind kind, double smoothness) {
  return correlated_core(gamma, kind, smoothness);
}

double s_rx_theory(int num_antennas, double mean_gain, double lambda, double total_power) {
  if (num_antennas < 1 || !(mean_gain > 0.0) || !(lambda > 0.0) || !(total_power > 0.0)) {
    throw InvalidParameter("s_rx_theory: arguments must be positive");
  }
  return num_antennas * mean_gain * lambda * lambda * total_power;
}

std::optional<double> inband_fraction(std::span<const tx::TxFrame> frames,
                                      const tx::OFDMConfig& cfg) {
  if (cfg.num_used() >= cfg.fft_size) {
    throw InvalidParameter("inband_fraction: N == N_U, no out-of-band bins to measure");
  }
  if (frames.empty()) throw InvalidParameter("inband_fraction: no OFDM symbols");
  const Eigen::Index K = frames.front().d_inband.size();
  Eigen::VectorXd inband = Eigen::VectorXd::Zero(K), total = Eigen::VectorXd::Zero(K);
  for (const auto& f : frames) {
    inband += f.d_inband;
    total += f.d_total;
  }
  double acc = 0.0;
  int used = 0;
  for (Eigen::Index k = 0; k < K; ++k) {
    if (total[k] > 0.0) {
      acc += inband[k] / total[k];
      ++used;
    }
  }
  if (used == 0) return std::nullopt;
  return acc / used;
}

SndrRate sndr_and_rate(double wanted, double distortion, double interference_noise,
                       double bandwidth_hz) {
  if (wanted < 0.0 || distortion < 0.0 || interference_noise < 0.0 || bandwidth_hz < 0.0) {
    throw InvalidParameter("sndr_and_rate: powers and bandwidth must be non-negative");
  }
  SndrRate r;
  const double den = distortion + interference_noise;
  r.sndr = den > 0.0 ? wanted / den : std::numeric_limits<double>::infinity();
  r.rate_bps = bandwidth_hz * std::log2(1.0 + r.sndr);
  return r;
}

}  // namespace padist::rx
