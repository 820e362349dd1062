#pragma once

// Independent reference computations used only by tests.

#include <cstddef>
#include <vector>

#include "flockkin/transport.hpp"

namespace oracle {

/// max c.x subject to A x <= b, x >= 0, with b >= 0 (origin feasible).
/// Dense tableau simplex with Bland's rule. A is row-major, rows = b.size().
double lp_max(const std::vector<double>& c, const std::vector<double>& A, const std::vector<double>& b);

/// max sum_p psi_p (mu - nu)(p) over psi on the union of both supports with
/// 0 <= psi_p <= cap and psi_p - psi_q <= metric(p, q). With cap = 2 this is
/// the bounded-Lipschitz distance; with cap >= the support diameter it is W1.
double lipschitz_dual(const flockkin::DiscreteMeasure& mu, const flockkin::DiscreteMeasure& nu,
                      const flockkin::GroundMetric& metric, double cap);

/// W1 via lipschitz_dual with cap equal to the largest pairwise distance.
double w1_dual(const flockkin::DiscreteMeasure& mu, const flockkin::DiscreteMeasure& nu,
               const flockkin::GroundMetric& metric);

/// Two-body reduction with Phi = level, G(v) = v, F = 0: the relative velocity
/// obeys w' = -level w, so Gf(t) = Gf(0) exp(-2 level t).
double two_body_gf(double gf0, double level, double t);

/// Relative position x1 - x2 at time t for the same reduction.
double two_body_gap(double gap0, double w0, double level, double t);

/// Random probability weights (strictly positive) of the given length.
std::vector<double> random_weights(std::size_t n, unsigned seed);

}  // namespace oracle
