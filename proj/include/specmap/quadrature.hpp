#pragma once

#include <functional>

namespace specmap {

/// Gauss-Legendre rule on [a, b] with n nodes.
double gauss_legendre(const std::function<double(double)>& f, double a, double b, int n);

/// Node-doubling Gauss-Legendre: doubles n until two successive estimates
/// differ by less than tol (absolute), starting from n0. Throws
/// NumericalError when the cap is reached without convergence.
double integrate_to_tolerance(const std::function<double(double)>& f, double a, double b,
                              double tol, int n0 = 16, int n_max = 8192);

}  // namespace specmap
