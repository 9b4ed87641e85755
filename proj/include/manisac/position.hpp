#pragma once

#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "manisac/solvers.hpp"
#include "manisac/types.hpp"

namespace manisac::position {

/// Sum of cosines of position-projected phases:
///   h(t) = sum_l amplitudes[l] * cos(2*pi/wavelength * t.dot(dir[l]) - phases[l]).
struct PhaseSum {
  std::vector<double> amplitudes;  // >= 0
  std::vector<double> phases;
  std::vector<Vec2> directions;
  double wavelength = 1.0;
};

double phase_sum_eval(const PhaseSum& ps, const Vec2& t);
Vec2 phase_sum_grad(const PhaseSum& ps, const Vec2& t);

enum class BoundSense { upper, lower };

/// Quadratic bound touching the bounded function at `anchor`:
///   value(t) = base + grad^T (t - anchor) +/- (curvature/2) ||t - anchor||^2.
struct QuadraticSurrogate {
  double curvature = 0.0;  // delta >= 0
  Vec2 grad = Vec2::Zero();
  double base = 0.0;  // function value at anchor
  Vec2 anchor = Vec2::Zero();
  BoundSense sense = BoundSense::upper;

  double value(const Vec2& t) const {
    const Vec2 d = t - anchor;
    const double s = (sense == BoundSense::upper) ? 0.5 : -0.5;
    return base + grad.dot(d) + s * curvature * d.squaredNorm();
  }

  solvers::RealQuadratic to_quadratic() const;
};

/// Second-order bound of a phase sum with the conservative curvature
/// delta = (8 pi^2 / wavelength^2) * sum of amplitudes.
QuadraticSurrogate lemma1_bound(const PhaseSum& ps, const Vec2& anchor,
                                BoundSense sense);

/// Linear majorizer of h^H F h + Re{extra^H h} over constant-norm h, anchored
/// at the unit-modulus vector h0: returns (f, c) with the bound Re{f^H h} + c,
/// f = extra + 2 (F - lambda_max I) h0, equality at h0.
std::pair<cvec, double> lmax_majorizer(const cmat& f_quad, const cvec& h0,
                                       const cvec& extra);

/// Supporting halfspaces implying ||t - other|| >= min_dist for each other
/// antenna, anchored at a feasible t0. Throws on a coincident anchor.
std::vector<solvers::Halfspace> linearize_min_distance(
    const Vec2& anchor, std::span<const Vec2> others, double min_dist);

/// Convexified single-antenna move: quadratic objective surrogate (equal to
/// the weighted-MSE objective at the anchor), optional sensing-constraint
/// surrogate, distance halfspaces, and the region box.
struct MoveSurrogate {
  solvers::RealQuadratic objective;
  std::optional<solvers::RealQuadratic> constraint;
  std::vector<solvers::Halfspace> halfspaces;
  solvers::Box box;
  Vec2 anchor = Vec2::Zero();
};

MoveSurrogate build_tbs_move(const Scenario& sc, const PositionLayout& layout,
                             const ChannelSet& ch, const DecisionState& st,
                             int m, int n);
MoveSurrogate build_rbs_move(const Scenario& sc, const PositionLayout& layout,
                             const ChannelSet& ch, const DecisionState& st,
                             int p, int n);
MoveSurrogate build_dl_user_move(const Scenario& sc,
                                 const PositionLayout& layout,
                                 const ChannelSet& ch, const DecisionState& st,
                                 int k);
MoveSurrogate build_ul_user_move(const Scenario& sc,
                                 const PositionLayout& layout,
                                 const ChannelSet& ch, const DecisionState& st,
                                 int l);

/// One MM step for a single antenna. On acceptance the layout and channels are
/// refreshed in place and true-objective descent is verified; returns whether
/// the antenna moved. scan_cap bounds the geometric step-length scan along the
/// accepted direction (1 disables the scan, keeping the plain surrogate step).
bool update_tbs_ma(const Scenario& sc, PositionLayout& layout, ChannelSet& ch,
                   const DecisionState& st, int m, int n,
                   double scan_cap = 4096.0);
bool update_rbs_ma(const Scenario& sc, PositionLayout& layout, ChannelSet& ch,
                   const DecisionState& st, int p, int n,
                   double scan_cap = 4096.0);
bool update_dl_user_ma(const Scenario& sc, PositionLayout& layout,
                       ChannelSet& ch, const DecisionState& st, int k,
                       double scan_cap = 4096.0);
bool update_ul_user_ma(const Scenario& sc, PositionLayout& layout,
                       ChannelSet& ch, const DecisionState& st, int l,
                       double scan_cap = 4096.0);

}  // namespace manisac::position
