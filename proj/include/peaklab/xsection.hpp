#pragma once

#include "peaklab/spectrum.hpp"

namespace peaklab {

/// -u'' on (-l/2, l/2) with u' = -alpha u at the left end and u' = alpha u at
/// the right end, i.e. the form  int u'^2 - alpha (u(-l/2)^2 + u(l/2)^2).
struct RobinIntervalProblem {
  double length = 1.0;
  double alpha = 0.0;
};

/// Largest k accepted by robin_interval_eigs.
int robin_interval_max_modes(const RobinIntervalProblem& problem);

/// k smallest eigenvalues. For alpha > 0 at most two of them are negative
/// (symmetric root of k tanh(kl/2) = alpha, antisymmetric root of
/// k coth(kl/2) = alpha when alpha > 2/l); the rest come from the
/// oscillatory branches, 8 of which are implemented. alpha < 0 is also
/// accepted (all eigenvalues positive).
Spectrum robin_interval_eigs(const RobinIntervalProblem& problem, int k);

/// lambda_1 of the Robin Laplacian on a lx x ly rectangle, by separation.
double robin_rectangle_eig1(double lx, double ly, double alpha);

}  // namespace peaklab
