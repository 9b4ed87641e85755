#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "manisac/types.hpp"

namespace manisac::solvers {

enum class SolveStatus { optimal, infeasible, max_iter };

struct SolveReport {
  SolveStatus status = SolveStatus::optimal;
  double objective = 0.0;
  double dual = 0.0;          // multiplier of the quadratic inequality
  double kkt_residual = 0.0;  // stationarity norm at the returned point
};

/// Largest eigenvalue/eigenvector of a Hermitian matrix. Shifted power
/// iteration refined by Rayleigh-quotient inverse iteration.
std::pair<double, cvec> lambda_max(const cmat& h);

/// Maximize v^H A v / v^H B v (A Hermitian PSD, B Hermitian PD) via Cholesky
/// whitening. Throws std::invalid_argument when B is numerically singular.
std::pair<double, cvec> max_generalized_eig(const cmat& a, const cmat& b);

// ---------------------------------------------------------------------------
// Complex block-separable QCQP (beamformer subproblem shape): minimize
//   sum_b x_b^H H_b x_b - 2 Re{a_b^H x_b}
// subject to one shared quadratic inequality of the same shape
//   sum_b x_b^H G_b x_b - 2 Re{g_b^H x_b} + c <= 0
// and ball constraints, each covering disjoint coordinate slices.

struct QuadBlock {
  cmat hessian;  // Hermitian PSD
  cvec linear;   // value(x) = x^H H x - 2 Re{linear^H x}
};

struct BlockSlice {
  int block = 0;   // block index
  int offset = 0;  // first coordinate within the block
  int length = 0;
};

struct BallConstraint {
  std::vector<BlockSlice> slices;  // disjoint across all balls
  double radius = 0.0;             // squared-norm bound radius^2
};

struct BlockProblem {
  std::vector<QuadBlock> objective;
  std::vector<QuadBlock> quad_ineq;  // empty = no shared inequality
  double ineq_const = 0.0;
  std::vector<BallConstraint> balls;
};

std::pair<std::vector<cvec>, SolveReport> solve_block_qcqp(
    const BlockProblem& prob);

// ---------------------------------------------------------------------------
// Real QCQP: minimize x^T P x + p^T x + c subject to an optional convex
// quadratic inequality (same shape, value <= 0), halfspaces a^T x >= b, and a
// per-coordinate box. Dense active-set path for n <= 2; diagonal path for
// larger n (requires diagonal quadratics and no halfspaces).

struct RealQuadratic {
  mat p2;  // symmetric PSD
  vec p1;
  double p0 = 0.0;

  double value(const vec& x) const {
    return x.dot(p2 * x) + p1.dot(x) + p0;
  }
  vec grad(const vec& x) const { return 2.0 * (p2 * x) + p1; }
};

struct Halfspace {
  vec normal;       // normal^T x >= bound
  double bound = 0.0;
};

struct Box {
  vec lo, hi;
};

std::pair<vec, SolveReport> solve_qcqp(
    const RealQuadratic& objective,
    const std::optional<RealQuadratic>& quad_ineq,
    const std::vector<Halfspace>& halfspaces, const std::optional<Box>& box);

}  // namespace manisac::solvers
