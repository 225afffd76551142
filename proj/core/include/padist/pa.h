#pragma once

#include <Eigen/Dense>
#include <functional>
#include <ostream>
#include <string>
#include <vector>

namespace padist::tx {

using CMatrix = Eigen::MatrixXcd;

enum class PaKind { kSoftLimiter, kRapp };

std::string to_string(PaKind kind);
PaKind pa_kind_from_string(const std::string& s);

// Memoryless AM-AM nonlinearity, one saturation power per antenna (watts).
struct PAConfig {
  PaKind kind = PaKind::kSoftLimiter;
  std::vector<double> p_max;
  double smoothness = 2.0;  // Rapp p, ignored for the soft limiter

  static PAConfig soft_limiter(int num_antennas, double p_max);
  static PAConfig rapp(int num_antennas, double p_max, double smoothness);

  int num_antennas() const { return static_cast<int>(p_max.size()); }
  double total_p_max() const;
  void validate() const;
};

// Output amplitude for input amplitude `r` (phase is preserved).
double am_am(PaKind kind, double r, double p_max, double smoothness);

// Applies antenna k's PA to row k of `y` (K x T).
CMatrix pa_apply(const CMatrix& y, const PAConfig& pa);

// Amplitude transfer normalized to unit mean input power: the argument is
// r / sqrt(p), the PA saturates at sqrt(gamma).
using NormalizedAmAm = std::function<double(double r)>;

struct GaussianMoments {
  double lambda = 0.0;         // E[A(r) r] / E[r^2]
  double output_power = 0.0;   // E[A(r)^2] / E[r^2]
  double distortion = 0.0;     // output_power - lambda^2
};

// Moments of an AM-AM curve driven by a unit-power complex Gaussian,
// evaluated by adaptive Gauss-Kronrod quadrature. `rel_tol` applies to each
// integral; throws NumericError if the error estimate does not meet it.
GaussianMoments gaussian_moments(const NormalizedAmAm& amplitude,
                                 double knee, double rel_tol = 1e-8);

// Bussgang gain at IBO gamma (linear). Soft limiter uses the closed form,
// Rapp uses quadrature.
double bussgang_lambda(double gamma, PaKind kind, double smoothness = 2.0);
Eigen::VectorXd bussgang_lambda(const Eigen::VectorXd& gamma_k, const PAConfig& pa);

// Closed form 1 - e^-g + sqrt(pi g)/2 erfc(sqrt g).
double soft_limiter_lambda(double gamma);

// Distortion power relative to input power, D_tx / p.
double normalized_distortion_power(double gamma, PaKind kind, double smoothness = 2.0);

// Transmit distortion power of one front end with input power p_k.
double tx_distortion_power(double gamma_k, double p_k, PaKind kind,
                           double smoothness = 2.0);

// Input/output amplitude table of antenna `antenna` for audit plots.
void write_pa_curve_csv(std::ostream& os, const PAConfig& pa, int antenna,
                        double max_input_amplitude, int points);

}  // namespace padist::tx
