#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include "padist/channel.h"
#include "padist/cnn.h"
#include "padist/link.h"

namespace padist::alloc {

// SDR estimate for one channel at one average IBO. s_rx is set by
// predictors that measure the wanted power instead of using the array-gain
// formula.
struct Prediction {
  double sdr_db = 0.0;
  std::optional<double> s_rx;
};

class SdrPredictor {
 public:
  virtual ~SdrPredictor() = default;
  virtual Prediction predict(const channel::ChannelMatrix& H, double gamma) const = 0;
  virtual const char* name() const = 0;
};

class CnnPredictor : public SdrPredictor {
 public:
  explicit CnnPredictor(const ml::CNNModel& model) : model_(model) {}
  Prediction predict(const channel::ChannelMatrix& H, double gamma) const override;
  const char* name() const override { return "cnn"; }

 private:
  const ml::CNNModel& model_;
};

// Uncorrelated-Rayleigh theory, K from the channel.
class TheoryRayleighPredictor : public SdrPredictor {
 public:
  TheoryRayleighPredictor(tx::PaKind kind = tx::PaKind::kSoftLimiter, double smoothness = 2.0)
      : kind_(kind), smoothness_(smoothness) {}
  Prediction predict(const channel::ChannelMatrix& H, double gamma) const override;
  const char* name() const override { return "theory_rayleigh"; }

 private:
  tx::PaKind kind_;
  double smoothness_;
};

// Full link simulation; returns measured SDR and wanted power.
class OraclePredictor : public SdrPredictor {
 public:
  OraclePredictor(link::LinkConfig link, uint64_t seed) : link_(std::move(link)), seed_(seed) {}
  Prediction predict(const channel::ChannelMatrix& H, double gamma) const override;
  const char* name() const override { return "oracle_simulation"; }

 private:
  link::LinkConfig link_;
  uint64_t seed_;
};

struct AllocationConfig {
  std::vector<double> ibo_candidates_db{1, 2, 3, 4, 5, 6, 7, 8, 9};
  double sigma_interf = 3.981071705534973e-10;  // W, -64 dBm
  double subcarrier_spacing = 360e3;
  // Operating point used to realize the chosen IBO (gamma_avg is replaced).
  link::LinkConfig link;
  uint64_t seed = 1;
  bool realize = true;

  void validate(bool allow_single = false) const;
};

struct CandidateEval {
  double ibo_db = 0.0;
  double sdr_db = 0.0;
  double s_rx = 0.0;
  double d_hat = 0.0;
  double sndr = 0.0;
};

struct AllocationResult {
  std::size_t chosen = 0;
  double chosen_ibo_db = 0.0;
  std::vector<CandidateEval> candidates;
  // Link simulation at the chosen IBO; NaN when not realized.
  double achieved_sndr = 0.0;
  double achieved_rate_bps = 0.0;
};

double dbm_to_watts(double dbm);

// Wanted power K * beta_hat * lambda^2 * sum P_max / gamma.
double s_rx_estimate(const channel::ChannelMatrix& H, double gamma, const link::LinkConfig& link);

// Steps: feature/predict SDR per candidate, S_rx, D_hat = S / SDR, pick the
// largest S / (D_hat + sigma), ties to the larger IBO.
AllocationResult allocate_ibo(const channel::ChannelMatrix& H, const AllocationConfig& cfg,
                              const SdrPredictor& predictor);

AllocationResult fixed_ibo_baseline(const channel::ChannelMatrix& H, double ibo_db,
                                    const AllocationConfig& cfg, const SdrPredictor& predictor);

// allocate_ibo with an OraclePredictor built from cfg.link and cfg.seed.
AllocationResult oracle_ibo(const channel::ChannelMatrix& H, const AllocationConfig& cfg);

struct RatioReport {
  std::vector<double> ratios;  // per UE, a / b
  double median = 0.0;
  double p90 = 0.0;
  double min = 0.0;
  double max = 0.0;
};

// Linear interpolation between order statistics, q in [0, 1].
double percentile(std::vector<double> v, double q);
RatioReport rate_ratio_report(const std::vector<AllocationResult>& a,
                              const std::vector<AllocationResult>& b);

}  // namespace padist::alloc
