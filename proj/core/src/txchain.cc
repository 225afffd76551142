#include "padist/txchain.h"

#include <cmath>
#include <limits>
#include <set>
#include <string>

#include "padist/error.h"

namespace padist::tx {

namespace {
constexpr std::complex<double> kJ{0.0, 1.0};
}

OFDMConfig OFDMConfig::centered(int fft_size, int n_used, int n_cp) {
  OFDMConfig cfg;
  cfg.fft_size = fft_size;
  cfg.n_cp = n_cp;
  const int lo = n_used / 2;
  const int hi = n_used - lo;
  for (int i = -lo; i <= -1; ++i) cfg.subcarrier_map.push_back(i);
  for (int i = 1; i <= hi; ++i) cfg.subcarrier_map.push_back(i);
  cfg.validate();
  return cfg;
}

void OFDMConfig::validate() const {
  if (fft_size < 2) throw InvalidParameter("OFDM FFT size must be >= 2");
  if (n_cp < 0 || n_cp > fft_size) throw InvalidParameter("OFDM CP length out of range");
  if (subcarrier_map.empty()) throw InvalidParameter("OFDM needs >= 1 used subcarrier");
  if (num_used() > fft_size) throw InvalidParameter("N_U must not exceed N");
  std::set<int> seen;
  for (int i : subcarrier_map) {
    if (i < -fft_size / 2 || i >= fft_size - fft_size / 2) {
      throw InvalidParameter("subcarrier index " + std::to_string(i) + " outside [-N/2, N/2)");
    }
    if (!seen.insert(i).second) throw InvalidParameter("duplicate subcarrier index");
  }
}

Precoder mrt_precoder(const channel::ChannelMatrix& H) {
  if (H.H.size() == 0) throw ShapeMismatch("mrt_precoder: empty channel");
  Precoder p;
  p.W.resize(H.H.rows(), H.H.cols());
  for (Eigen::Index n = 0; n < H.H.rows(); ++n) {
    const double norm = H.H.row(n).norm();
    if (!(norm > 0.0)) {
      throw DegenerateInput("mrt_precoder: channel is zero on subcarrier " +
                            std::to_string(n));
    }
    p.W.row(n) = H.H.row(n).conjugate() / norm;
  }
  return p;
}

CMatrix precode(const Precoder& W, const CVector& symbols) {
  if (symbols.size() != W.W.rows()) {
    throw ShapeMismatch("precode: " + std::to_string(symbols.size()) +
                        " symbols for " + std::to_string(W.W.rows()) + " subcarriers");
  }
  return symbols.asDiagonal() * W.W;
}

OfdmModulator::OfdmModulator(const OFDMConfig& cfg) : cfg_(cfg) {
  cfg_.validate();
  const int N = cfg_.fft_size;
  twiddle_.resize(cfg_.num_used(), N);
  for (int n = 0; n < cfg_.num_used(); ++n) {
    const long idx = cfg_.subcarrier_map[n];
    for (int t = 0; t < N; ++t) {
      // Reduce the phase index exactly before converting to radians.
      const long m = ((idx * t) % N + N) % N;
      twiddle_(n, t) = std::exp(kJ * (2.0 * M_PI * static_cast<double>(m) / N));
    }
  }
}

CMatrix OfdmModulator::modulate(const CMatrix& x) const {
  if (x.rows() != cfg_.num_used()) {
    throw ShapeMismatch("ofdm_modulate: x has " + std::to_string(x.rows()) +
                        " rows, config has " + std::to_string(cfg_.num_used()) +
                        " used subcarriers");
  }
  return x.transpose() * twiddle_;
}

CMatrix OfdmModulator::demodulate(const CMatrix& y) const {
  if (y.cols() != cfg_.fft_size) throw ShapeMismatch("demodulate: wrong sample count");
  return (y * twiddle_.adjoint()) / static_cast<double>(cfg_.fft_size);
}

CMatrix OfdmModulator::with_cyclic_prefix(const CMatrix& y) const {
  const int N = cfg_.fft_size, cp = cfg_.n_cp;
  if (y.cols() != N) throw ShapeMismatch("with_cyclic_prefix: wrong sample count");
  CMatrix out(y.rows(), N + cp);
  out.leftCols(cp) = y.rightCols(cp);
  out.rightCols(N) = y;
  return out;
}

CMatrix ofdm_modulate(const CMatrix& x, const OFDMConfig& cfg) {
  return OfdmModulator(cfg).modulate(x);
}

Eigen::VectorXd per_antenna_power(const Precoder& W, double symbol_power) {
  if (!(symbol_power > 0.0)) throw InvalidParameter("symbol power must be positive");
  return W.W.cwiseAbs2().colwise().sum().transpose() * symbol_power;
}

Eigen::VectorXd ibo_per_antenna(const Eigen::VectorXd& p, const PAConfig& pa) {
  if (p.size() != pa.num_antennas()) throw ShapeMismatch("ibo_per_antenna: size mismatch");
  Eigen::VectorXd g(p.size());
  for (Eigen::Index k = 0; k < p.size(); ++k) {
    if (!(p[k] > 0.0)) {
      throw DegenerateInput("antenna " + std::to_string(k) + " carries no power");
    }
    g[k] = pa.p_max[k] / p[k];
  }
  return g;
}

double ibo_average(const Eigen::VectorXd& p, const PAConfig& pa) {
  if (p.size() != pa.num_antennas()) throw ShapeMismatch("ibo_average: size mismatch");
  const double sp = p.sum();
  if (!(sp > 0.0)) throw DegenerateInput("ibo_average: zero total input power");
  return pa.total_p_max() / sp;
}

double scale_to_ibo(const Precoder& W, const PAConfig& pa, const OFDMConfig& cfg,
                    double target_gamma) {
  if (!(target_gamma > 0.0)) throw InvalidParameter("target IBO must be positive");
  if (W.num_subcarriers() != cfg.num_used()) {
    throw ShapeMismatch("scale_to_ibo: precoder/OFDM subcarrier mismatch");
  }
  if (W.num_antennas() != pa.num_antennas()) {
    throw ShapeMismatch("scale_to_ibo: precoder/PA antenna mismatch");
  }
  // sum_k p_k = symbol_power * sum |w|^2, which is N_U for unit-norm rows.
  return pa.total_p_max() / (target_gamma * W.W.cwiseAbs2().sum());
}

CMatrix distortion_extract(const CMatrix& y, const CMatrix& y_hat,
                           const Eigen::VectorXd& lambda) {
  if (y.rows() != y_hat.rows() || y.cols() != y_hat.cols() || lambda.size() != y.rows()) {
    throw ShapeMismatch("distortion_extract: shape mismatch");
  }
  return y_hat - lambda.asDiagonal() * y;
}

CVector qpsk_symbols(int n, double symbol_power, Engine& eng) {
  const double a = std::sqrt(symbol_power / 2.0);
  CVector s(n);
  for (int i = 0; i < n; ++i) {
    const uint64_t bits = eng();
    s[i] = {(bits & 1) ? a : -a, (bits & 2) ? a : -a};
  }
  return s;
}

TxChain::TxChain(Precoder precoder, PAConfig pa, const OFDMConfig& ofdm, double gamma_avg)
    : precoder_(std::move(precoder)), pa_(std::move(pa)), mod_(ofdm), gamma_avg_(gamma_avg) {
  pa_.validate();
  if (precoder_.num_antennas() != pa_.num_antennas()) {
    throw ShapeMismatch("TxChain: precoder has " + std::to_string(precoder_.num_antennas()) +
                        " antennas, PA config " + std::to_string(pa_.num_antennas()));
  }
  symbol_power_ = scale_to_ibo(precoder_, pa_, mod_.config(), gamma_avg);
  p_k_ = per_antenna_power(precoder_, symbol_power_);
  const int K = pa_.num_antennas();
  gamma_k_.resize(K);
  lambda_.resize(K);
  for (int k = 0; k < K; ++k) {
    if (p_k_[k] > 0.0) {
      gamma_k_[k] = pa_.p_max[k] / p_k_[k];
      lambda_[k] = bussgang_lambda(gamma_k_[k], pa_.kind, pa_.smoothness);
    } else {
      gamma_k_[k] = std::numeric_limits<double>::infinity();
      lambda_[k] = 1.0;
    }
  }
}

TxFrame TxChain::transmit(const CVector& symbols) const {
  TxFrame f;
  f.x = precode(precoder_, symbols);
  f.y = mod_.modulate(f.x);
  f.y_hat = pa_apply(f.y, pa_);
  f.d_hat = distortion_extract(f.y, f.y_hat, lambda_);
  f.d_freq = mod_.demodulate(f.d_hat);
  f.lambda = lambda_;
  f.p_k = p_k_;
  f.gamma_k = gamma_k_;
  f.gamma_avg = gamma_avg_;
  f.d_inband = f.d_freq.cwiseAbs2().rowwise().sum();
  // Parseval: energy over all N bins of the (1/N)-normalized DFT.
  f.d_total = f.d_hat.cwiseAbs2().rowwise().sum() / static_cast<double>(mod_.config().fft_size);
  return f;
}

TxFrame TxChain::transmit_random(uint64_t seed) const {
  Engine eng(seed);
  return transmit(qpsk_symbols(precoder_.num_subcarriers(), symbol_power_, eng));
}

}  // namespace padist::tx
