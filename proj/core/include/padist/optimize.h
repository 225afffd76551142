#pragma once

#include <functional>
#include <vector>

namespace padist::opt {

struct NelderMeadOptions {
  int max_evaluations = 20000;
  double f_tol = 1e-12;  // relative spread of simplex values
  double x_tol = 1e-10;  // absolute simplex diameter
};

struct NelderMeadResult {
  std::vector<double> x;
  double f = 0.0;
  int evaluations = 0;
  bool converged = false;
};

// Minimizes f from x0 with an axis-aligned initial simplex of the given steps.
// Non-finite function values are treated as +inf.
NelderMeadResult nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                             const std::vector<double>& x0, const std::vector<double>& step,
                             const NelderMeadOptions& opts = {});

}  // namespace padist::opt
