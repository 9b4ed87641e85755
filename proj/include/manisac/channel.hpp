#pragma once

#include <cstdint>
#include <span>

#include "manisac/types.hpp"

namespace manisac::channel {

/// Propagation distance difference of an MA at `pos` relative to the region
/// reference point, for a path arriving/departing along `ang`. Wavelength units.
double phase_diff(const Vec2& pos, const Angles& ang);

/// Field-response vector: unit-modulus per-path phases of one MA.
cvec frv(const Vec2& pos, std::span<const Angles> paths, double wavelength = 1.0);

/// Field-response matrix: one frv column per MA.
cmat frm(std::span<const Vec2> positions, std::span<const Angles> paths,
         double wavelength = 1.0);

/// Steering vector of an MA array towards a target/clutter direction,
/// scaled by the complex fading coefficient.
cvec steering(std::span<const Vec2> positions, const Angles& ang, cplx fading,
              double wavelength = 1.0);

/// Channel vector h_{d,m,k} between TBS m and DL user k (length N_t).
cvec assemble_dl_channel(const PositionLayout& layout, const Scenario& sc,
                         int m, int k);

/// Channel vector h_{u,p,l} between RBS p and UL user l (length N_r).
cvec assemble_ul_channel(const PositionLayout& layout, const Scenario& sc,
                         int p, int l);

/// Scalar channel h_{du,k,l} from UL user l into DL user k.
cplx assemble_du_channel(const PositionLayout& layout, const Scenario& sc,
                         int k, int l);

/// Assemble every stacked channel for the given layout.
ChannelSet stack_channels(const PositionLayout& layout, const Scenario& sc);

/// Randomized-scenario generator knobs. Distances in meters, powers linear.
struct GeneratorConfig {
  Dims dims{2, 2, 4, 4, 3, 3, 2};
  int paths = 6;                // L
  double radius_m = 70.0;       // node placement disc
  double c0 = 1e-4;             // reference path loss at 1 m (-40 dB)
  double alpha_loss = 2.8;      // path-loss exponent
  double tx_power = 1.0;        // P^BS_m (30 dBm)
  double ul_power = 0.1;        // P_{u,l} (20 dBm)
  double noise = 1e-11;         // sigma^2 (-80 dBm)
  double gamma_r = 2.0;         // ~3 dB
  double rcs_var = 1.0;         // sigma^2_{t,j}
  double region_a = 2.0;        // A, wavelengths
  double min_dist = 0.5;        // D_t, wavelengths
};

/// Draw a random Scenario per the generator config. Deterministic in `seed`.
/// Throws std::invalid_argument on nonpositive dimensions.
Scenario generate_scenario(const GeneratorConfig& cfg, std::uint64_t seed);

}  // namespace manisac::channel
