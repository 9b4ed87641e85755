#pragma once

#include <Eigen/Dense>
#include <complex>
#include <vector>

namespace manisac {

using cplx = std::complex<double>;
using cvec = Eigen::VectorXcd;
using cmat = Eigen::MatrixXcd;
using vec = Eigen::VectorXd;
using mat = Eigen::MatrixXd;
using Vec2 = Eigen::Vector2d;

constexpr double kPi = 3.14159265358979323846;

/// Elevation/azimuth pair, both in [-pi/2, pi/2].
struct Angles {
  double theta = 0.0;  // elevation
  double phi = 0.0;    // azimuth

  /// Wavelength-normalized projection direction [cos(theta)sin(phi), sin(theta)].
  Vec2 direction() const {
    return Vec2(std::cos(theta) * std::sin(phi), std::sin(theta));
  }
};

/// One multipath link: per-path departure/arrival angles and the diagonal
/// path-response matrix (stored as its diagonal).
struct PathSet {
  std::vector<Angles> departure;
  std::vector<Angles> arrival;
  cvec response;  // diagonal of the path-response matrix

  int count() const { return static_cast<int>(response.size()); }
};

/// All movable-antenna coordinates, in wavelengths, inside the square region
/// C = [-A/2, A/2]^2.
struct PositionLayout {
  std::vector<std::vector<Vec2>> tbs;  // [m][n], n-th MA of m-th TBS
  std::vector<std::vector<Vec2>> rbs;  // [p][n]
  std::vector<Vec2> dl_user;           // [k]
  std::vector<Vec2> ul_user;           // [l]
};

/// Line-of-sight radar geometry towards the target (index 0) and K_t clutter
/// sources, with known complex fading and RCS variances.
struct RadarGeometry {
  std::vector<std::vector<Angles>> tbs_angles;  // [m][j], j in 0..K_t
  std::vector<std::vector<Angles>> rbs_angles;  // [p][j]
  std::vector<std::vector<cplx>> fading_t;      // beta^t_{m,j}
  std::vector<std::vector<cplx>> fading_r;      // beta^r_{p,j}
  std::vector<double> rcs_var;                  // sigma^2_{t,j}, rcs_var[0] > 0
};

struct Dims {
  int mt = 0;  // transmit BSs
  int mr = 0;  // receive BSs
  int nt = 0;  // MAs per TBS
  int nr = 0;  // MAs per RBS
  int kd = 0;  // DL users
  int ku = 0;  // UL users
  int kt = 0;  // clutter sources
};

/// A full problem instance. Wavelength is normalized to 1; all positions and
/// region sizes are expressed in wavelengths.
struct Scenario {
  Dims dims;
  std::vector<std::vector<PathSet>> dl_paths;  // [m][k] TBS m -> DL user k
  std::vector<std::vector<PathSet>> ul_paths;  // [p][l] RBS p <- UL user l
  std::vector<std::vector<PathSet>> du_paths;  // [k][l] UL user l -> DL user k
  RadarGeometry radar;
  std::vector<double> noise_dl;  // sigma^2_{d,k}, linear watts
  double noise_r = 0.0;          // sigma^2_r
  std::vector<double> budget_bs;  // P^BS_m
  std::vector<double> budget_ul;  // P_{u,l}
  double gamma_r = 0.0;           // sensing SINR threshold, linear
  std::vector<double> weight_dl;  // mu_{D,k}
  std::vector<double> weight_ul;  // mu_{U,l}
  double region_a = 2.0;          // side of C
  double min_dist = 0.5;          // D_t
  double wavelength = 1.0;
};

/// Assembled stacked channels for one PositionLayout.
struct ChannelSet {
  std::vector<cvec> hd;   // [k], M_t*N_t
  std::vector<cvec> hu;   // [l], M_r*N_r
  std::vector<cvec> gt;   // [j], M_t*N_t
  std::vector<cvec> gr;   // [j], M_r*N_r
  cmat hdu;               // K_d x K_u, h_{du,k,l}
};

/// All decision variables of the optimization plus WMMSE auxiliaries.
struct DecisionState {
  std::vector<cvec> w;       // [k], stacked \hat{w}_k, M_t*N_t
  std::vector<cmat> wr;      // [m], W^r_m, N_t x N_t
  vec q;                     // UL powers
  std::vector<cvec> u_comm;  // [l], M_r*N_r
  cvec u_sense;              // M_r*N_r
  vec omega_dl, omega_ul;    // WMMSE weights (> 0)
  cvec beta_dl, beta_ul;     // WMMSE receive scalars
};

}  // namespace manisac
