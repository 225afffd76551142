#include "padist/pa.h"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <limits>
#include <sstream>

#include "padist/csv.h"
#include "padist/error.h"

namespace padist::tx {

std::string to_string(PaKind kind) {
  return kind == PaKind::kRapp ? "rapp" : "soft_limiter";
}

PaKind pa_kind_from_string(const std::string& s) {
  if (s == "soft_limiter") return PaKind::kSoftLimiter;
  if (s == "rapp") return PaKind::kRapp;
  throw InvalidParameter("unknown PA kind '" + s + "'");
}

PAConfig PAConfig::soft_limiter(int num_antennas, double p_max) {
  PAConfig pa;
  pa.kind = PaKind::kSoftLimiter;
  pa.p_max.assign(num_antennas, p_max);
  pa.validate();
  return pa;
}

PAConfig PAConfig::rapp(int num_antennas, double p_max, double smoothness) {
  PAConfig pa;
  pa.kind = PaKind::kRapp;
  pa.p_max.assign(num_antennas, p_max);
  pa.smoothness = smoothness;
  pa.validate();
  return pa;
}

double PAConfig::total_p_max() const {
  double s = 0.0;
  for (double p : p_max) s += p;
  return s;
}

void PAConfig::validate() const {
  if (p_max.empty()) throw InvalidParameter("PA config has no antennas");
  for (double p : p_max) {
    if (!(p > 0.0) || !std::isfinite(p)) {
      throw InvalidParameter("PA saturation powers must be positive");
    }
  }
  if (!(smoothness > 0.0) || !std::isfinite(smoothness)) {
    throw InvalidParameter("Rapp smoothness must be positive");
  }
}

double am_am(PaKind kind, double r, double p_max, double smoothness) {
  if (kind == PaKind::kSoftLimiter) {
    const double a_max = std::sqrt(p_max);
    return r * r <= p_max ? r : a_max;
  }
  // r / (1 + (r^2 / P)^p)^(1/2p), evaluated in the log domain so large p
  // does not overflow.
  const double ratio = r * r / p_max;
  if (ratio == 0.0) return r;
  const double lx = smoothness * std::log(ratio);
  const double log1p_term = lx > 40.0 ? lx : std::log1p(std::exp(lx));
  return r * std::exp(-log1p_term / (2.0 * smoothness));
}

CMatrix pa_apply(const CMatrix& y, const PAConfig& pa) {
  if (y.rows() != pa.num_antennas()) {
    throw ShapeMismatch("pa_apply: signal has " + std::to_string(y.rows()) +
                        " antennas, PA config " + std::to_string(pa.num_antennas()));
  }
  CMatrix out(y.rows(), y.cols());
  for (Eigen::Index k = 0; k < y.rows(); ++k) {
    const double pm = pa.p_max[k];
    for (Eigen::Index t = 0; t < y.cols(); ++t) {
      const std::complex<double> v = y(k, t);
      const double r = std::abs(v);
      if (r == 0.0) {
        out(k, t) = 0.0;
        continue;
      }
      if (pa.kind == PaKind::kSoftLimiter) {
        out(k, t) = r * r <= pm ? v : v * (std::sqrt(pm) / r);
      } else {
        out(k, t) = v * (am_am(pa.kind, r, pm, pa.smoothness) / r);
      }
    }
  }
  return out;
}

namespace {

using boost::math::quadrature::gauss_kronrod;

double integrate(const std::function<double(double)>& f, double a, double b,
                 double rel_tol, const char* what, double knee) {
  double err = 0.0;
  double l1 = 0.0;
  const double v = gauss_kronrod<double, 31>::integrate(f, a, b, 15, rel_tol, &err, &l1);
  if (!std::isfinite(v) || err > 10.0 * rel_tol * std::max(l1, 1e-300)) {
    std::ostringstream msg;
    msg << "quadrature for " << what << " did not converge on [" << a << ", " << b
        << "] (knee " << knee << "): value " << v << ", error estimate " << err
        << ", L1 " << l1 << ", tolerance " << rel_tol;
    throw NumericError(msg.str());
  }
  return v;
}

}  // namespace

GaussianMoments gaussian_moments(const NormalizedAmAm& amplitude, double knee,
                                 double rel_tol) {
  if (!(knee > 0.0) || !std::isfinite(knee)) {
    throw InvalidParameter("gaussian_moments: knee must be positive");
  }
  // Rayleigh envelope with E[r^2] = 1: f(r) = 2 r exp(-r^2).
  auto corr = [&](double r) { return amplitude(r) * r * 2.0 * r * std::exp(-r * r); };
  auto pow2 = [&](double r) {
    const double a = amplitude(r);
    return a * a * 2.0 * r * std::exp(-r * r);
  };
  const double inf = std::numeric_limits<double>::infinity();
  GaussianMoments m;
  m.lambda = integrate(corr, 0.0, knee, rel_tol, "E[A(r) r]", knee) +
             integrate(corr, knee, inf, rel_tol, "E[A(r) r]", knee);
  m.output_power = integrate(pow2, 0.0, knee, rel_tol, "E[A(r)^2]", knee) +
                   integrate(pow2, knee, inf, rel_tol, "E[A(r)^2]", knee);
  m.distortion = std::max(0.0, m.output_power - m.lambda * m.lambda);
  return m;
}

double soft_limiter_lambda(double gamma) {
  if (!(gamma > 0.0)) throw InvalidParameter("IBO must be positive");
  if (std::isinf(gamma)) return 1.0;
  return 1.0 - std::exp(-gamma) + 0.5 * std::sqrt(M_PI * gamma) * std::erfc(std::sqrt(gamma));
}

namespace {

GaussianMoments rapp_moments(double gamma, double smoothness) {
  auto a = [gamma, smoothness](double r) {
    return am_am(PaKind::kRapp, r, gamma, smoothness);
  };
  return gaussian_moments(a, std::sqrt(gamma));
}

}  // namespace

double bussgang_lambda(double gamma, PaKind kind, double smoothness) {
  if (!(gamma > 0.0)) throw InvalidParameter("IBO must be positive");
  if (std::isinf(gamma)) return 1.0;
  if (kind == PaKind::kSoftLimiter) return soft_limiter_lambda(gamma);
  return rapp_moments(gamma, smoothness).lambda;
}

Eigen::VectorXd bussgang_lambda(const Eigen::VectorXd& gamma_k, const PAConfig& pa) {
  Eigen::VectorXd out(gamma_k.size());
  for (Eigen::Index k = 0; k < gamma_k.size(); ++k) {
    out[k] = bussgang_lambda(gamma_k[k], pa.kind, pa.smoothness);
  }
  return out;
}

double normalized_distortion_power(double gamma, PaKind kind, double smoothness) {
  if (!(gamma > 0.0)) throw InvalidParameter("IBO must be positive");
  if (std::isinf(gamma)) return 0.0;
  if (kind == PaKind::kSoftLimiter) {
    const double lam = soft_limiter_lambda(gamma);
    return std::max(0.0, 1.0 - std::exp(-gamma) - lam * lam);
  }
  return rapp_moments(gamma, smoothness).distortion;
}

double tx_distortion_power(double gamma_k, double p_k, PaKind kind, double smoothness) {
  if (!(p_k >= 0.0)) throw InvalidParameter("input power must be non-negative");
  return normalized_distortion_power(gamma_k, kind, smoothness) * p_k;
}

void write_pa_curve_csv(std::ostream& os, const PAConfig& pa, int antenna,
                        double max_input_amplitude, int points) {
  pa.validate();
  if (antenna < 0 || antenna >= pa.num_antennas()) {
    throw InvalidParameter("PA curve antenna index out of range");
  }
  if (points < 2 || !(max_input_amplitude > 0.0)) {
    throw InvalidParameter("PA curve needs >= 2 points and positive range");
  }
  csv::Writer w(os);
  w.header({"input_amplitude", "output_amplitude"});
  for (int i = 0; i < points; ++i) {
    const double r = max_input_amplitude * i / (points - 1);
    w.cell(r).cell(am_am(pa.kind, r, pa.p_max[antenna], pa.smoothness));
    w.end_row();
  }
}

}  // namespace padist::tx
