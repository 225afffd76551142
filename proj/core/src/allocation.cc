#include "padist/allocation.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "padist/error.h"
#include "padist/feature.h"
#include "padist/rxmetrics.h"

namespace padist::alloc {

Prediction CnnPredictor::predict(const channel::ChannelMatrix& H, double gamma) const {
  return {ml::forward(model_, ml::feature_matrix(H, gamma).flatten()), std::nullopt};
}

Prediction TheoryRayleighPredictor::predict(const channel::ChannelMatrix& H, double gamma) const {
  return {rx::to_db(rx::sdr_theory_uncorrelated(gamma, H.num_antennas(), kind_, smoothness_)),
          std::nullopt};
}

Prediction OraclePredictor::predict(const channel::ChannelMatrix& H, double gamma) const {
  link::LinkConfig cfg = link_;
  cfg.gamma_avg = gamma;
  const auto r = link::simulate_link(H, cfg, seed_);
  return {rx::to_db(r.sdr_scheduled()), r.scheduled.total_wanted()};
}

void AllocationConfig::validate(bool allow_single) const {
  if (ibo_candidates_db.empty() || (!allow_single && ibo_candidates_db.size() < 2)) {
    throw InvalidParameter("allocation needs at least 2 IBO candidates");
  }
  for (double z : ibo_candidates_db) {
    if (!std::isfinite(z)) throw InvalidParameter("IBO candidates must be finite");
  }
  if (!(sigma_interf > 0.0)) throw InvalidParameter("sigma_interf must be positive");
  if (!(subcarrier_spacing > 0.0)) throw InvalidParameter("subcarrier spacing must be positive");
  link.validate();
}

double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }

double s_rx_estimate(const channel::ChannelMatrix& H, double gamma, const link::LinkConfig& link) {
  const int K = H.num_antennas();
  const double lam = tx::bussgang_lambda(gamma, link.pa_kind, link.smoothness);
  return rx::s_rx_theory(K, H.empirical_gain(), lam, K * link.p_max / gamma);
}

namespace {

AllocationResult run(const channel::ChannelMatrix& H, const AllocationConfig& cfg,
                     const SdrPredictor& predictor) {
  H.validate();
  AllocationResult res;
  bool have = false;
  for (std::size_t z = 0; z < cfg.ibo_candidates_db.size(); ++z) {
    const double ibo_db = cfg.ibo_candidates_db[z];
    const double gamma = rx::from_db(ibo_db);
    CandidateEval c;
    c.ibo_db = ibo_db;
    Prediction p;
    try {
      p = predictor.predict(H, gamma);
    } catch (const Error& e) {
      throw NumericError(std::string(predictor.name()) + " predictor failed for IBO candidate " +
                         std::to_string(ibo_db) + " dB: " + e.what());
    }
    if (!std::isfinite(p.sdr_db) && !(p.sdr_db > 0.0)) {
      throw NumericError(std::string(predictor.name()) + " predictor returned " +
                         std::to_string(p.sdr_db) + " dB for IBO candidate " +
                         std::to_string(ibo_db) + " dB");
    }
    c.sdr_db = p.sdr_db;
    c.s_rx = p.s_rx ? *p.s_rx : s_rx_estimate(H, gamma, cfg.link);
    c.d_hat = c.s_rx / rx::from_db(c.sdr_db);
    c.sndr = c.s_rx / (c.d_hat + cfg.sigma_interf);
    res.candidates.push_back(c);
    const auto& best = res.candidates[res.chosen];
    if (!have || c.sndr > best.sndr || (c.sndr == best.sndr && c.ibo_db > best.ibo_db)) {
      res.chosen = z;
      have = true;
    }
  }
  res.chosen_ibo_db = res.candidates[res.chosen].ibo_db;
  if (cfg.realize) {
    link::LinkConfig lc = cfg.link;
    lc.gamma_avg = rx::from_db(res.chosen_ibo_db);
    const auto r = link::simulate_link(H, lc, cfg.seed);
    const auto sr = rx::sndr_and_rate(r.scheduled.total_wanted(), r.scheduled.total_distortion(),
                                      cfg.sigma_interf,
                                      H.num_subcarriers() * cfg.subcarrier_spacing);
    res.achieved_sndr = sr.sndr;
    res.achieved_rate_bps = sr.rate_bps;
  } else {
    res.achieved_sndr = res.achieved_rate_bps = std::numeric_limits<double>::quiet_NaN();
  }
  return res;
}

}  // namespace

AllocationResult allocate_ibo(const channel::ChannelMatrix& H, const AllocationConfig& cfg,
                              const SdrPredictor& predictor) {
  cfg.validate(true);
  return run(H, cfg, predictor);
}

AllocationResult fixed_ibo_baseline(const channel::ChannelMatrix& H, double ibo_db,
                                    const AllocationConfig& cfg, const SdrPredictor& predictor) {
  AllocationConfig c = cfg;
  c.ibo_candidates_db = {ibo_db};
  c.validate(true);
  return run(H, c, predictor);
}

AllocationResult oracle_ibo(const channel::ChannelMatrix& H, const AllocationConfig& cfg) {
  cfg.validate(true);
  return run(H, cfg, OraclePredictor(cfg.link, cfg.seed));
}

double percentile(std::vector<double> v, double q) {
  if (v.empty()) throw InvalidParameter("percentile of an empty set");
  if (!(q >= 0.0 && q <= 1.0)) throw InvalidParameter("percentile: q must lie in [0, 1]");
  std::sort(v.begin(), v.end());
  const double pos = q * (v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - lo) * (v[hi] - v[lo]);
}

RatioReport rate_ratio_report(const std::vector<AllocationResult>& a,
                              const std::vector<AllocationResult>& b) {
  if (a.size() != b.size() || a.empty()) {
    throw ShapeMismatch("rate_ratio_report: UE sets differ (" + std::to_string(a.size()) +
                        " vs " + std::to_string(b.size()) + ")");
  }
  RatioReport r;
  for (std::size_t i = 0; i < a.size(); ++i) {
    r.ratios.push_back(a[i].achieved_rate_bps / b[i].achieved_rate_bps);
  }
  r.median = percentile(r.ratios, 0.5);
  r.p90 = percentile(r.ratios, 0.9);
  r.min = *std::min_element(r.ratios.begin(), r.ratios.end());
  r.max = *std::max_element(r.ratios.begin(), r.ratios.end());
  return r;
}

}  // namespace padist::alloc
