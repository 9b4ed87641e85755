#include "manisac/channel.hpp"

#include <random>
#include <stdexcept>

namespace manisac::channel {

double phase_diff(const Vec2& pos, const Angles& ang) {
  return pos.dot(ang.direction());
}

cvec frv(const Vec2& pos, std::span<const Angles> paths, double wavelength) {
  cvec v(static_cast<Eigen::Index>(paths.size()));
  const double k = 2.0 * kPi / wavelength;
  for (Eigen::Index i = 0; i < v.size(); ++i)
    v[i] = std::polar(1.0, k * phase_diff(pos, paths[static_cast<size_t>(i)]));
  return v;
}

cmat frm(std::span<const Vec2> positions, std::span<const Angles> paths,
         double wavelength) {
  cmat m(static_cast<Eigen::Index>(paths.size()),
         static_cast<Eigen::Index>(positions.size()));
  for (Eigen::Index n = 0; n < m.cols(); ++n)
    m.col(n) = frv(positions[static_cast<size_t>(n)], paths, wavelength);
  return m;
}

cvec steering(std::span<const Vec2> positions, const Angles& ang, cplx fading,
              double wavelength) {
  cvec g(static_cast<Eigen::Index>(positions.size()));
  const double k = 2.0 * kPi / wavelength;
  const Vec2 a = ang.direction();
  for (Eigen::Index n = 0; n < g.size(); ++n)
    g[n] = fading * std::polar(1.0, k * positions[static_cast<size_t>(n)].dot(a));
  return g;
}

cvec assemble_dl_channel(const PositionLayout& layout, const Scenario& sc,
                         int m, int k) {
  const PathSet& ps = sc.dl_paths[m][k];
  // h^H = rx_frv^H * Sigma * tx_frm  =>  h = frm^H * Sigma^H * rx_frv
  const cvec rx = frv(layout.dl_user[k], ps.arrival, sc.wavelength);
  const cmat tx = frm(layout.tbs[m], ps.departure, sc.wavelength);
  return tx.adjoint() * (ps.response.conjugate().asDiagonal() * rx);
}

cvec assemble_ul_channel(const PositionLayout& layout, const Scenario& sc,
                         int p, int l) {
  const PathSet& ps = sc.ul_paths[p][l];
  const cvec rx = frv(layout.ul_user[l], ps.arrival, sc.wavelength);
  const cmat tx = frm(layout.rbs[p], ps.departure, sc.wavelength);
  return tx.adjoint() * (ps.response.conjugate().asDiagonal() * rx);
}

cplx assemble_du_channel(const PositionLayout& layout, const Scenario& sc,
                         int k, int l) {
  const PathSet& ps = sc.du_paths[k][l];
  const cvec h3 = frv(layout.dl_user[k], ps.arrival, sc.wavelength);
  const cvec h2 = frv(layout.ul_user[l], ps.departure, sc.wavelength);
  // the conjugate of the channel equals h3^H Sigma h2
  return std::conj(h3.dot(ps.response.asDiagonal() * h2));
}

ChannelSet stack_channels(const PositionLayout& layout, const Scenario& sc) {
  const Dims& d = sc.dims;
  ChannelSet ch;
  ch.hd.resize(d.kd);
  for (int k = 0; k < d.kd; ++k) {
    ch.hd[k].resize(static_cast<Eigen::Index>(d.mt) * d.nt);
    for (int m = 0; m < d.mt; ++m)
      ch.hd[k].segment(static_cast<Eigen::Index>(m) * d.nt, d.nt) =
          assemble_dl_channel(layout, sc, m, k);
  }
  ch.hu.resize(d.ku);
  for (int l = 0; l < d.ku; ++l) {
    ch.hu[l].resize(static_cast<Eigen::Index>(d.mr) * d.nr);
    for (int p = 0; p < d.mr; ++p)
      ch.hu[l].segment(static_cast<Eigen::Index>(p) * d.nr, d.nr) =
          assemble_ul_channel(layout, sc, p, l);
  }
  const int nj = d.kt + 1;
  ch.gt.resize(nj);
  ch.gr.resize(nj);
  for (int j = 0; j < nj; ++j) {
    ch.gt[j].resize(static_cast<Eigen::Index>(d.mt) * d.nt);
    for (int m = 0; m < d.mt; ++m)
      ch.gt[j].segment(static_cast<Eigen::Index>(m) * d.nt, d.nt) =
          steering(layout.tbs[m], sc.radar.tbs_angles[m][j],
                   sc.radar.fading_t[m][j], sc.wavelength);
    ch.gr[j].resize(static_cast<Eigen::Index>(d.mr) * d.nr);
    for (int p = 0; p < d.mr; ++p)
      ch.gr[j].segment(static_cast<Eigen::Index>(p) * d.nr, d.nr) =
          steering(layout.rbs[p], sc.radar.rbs_angles[p][j],
                   sc.radar.fading_r[p][j], sc.wavelength);
  }
  ch.hdu.resize(d.kd, d.ku);
  for (int k = 0; k < d.kd; ++k)
    for (int l = 0; l < d.ku; ++l)
      ch.hdu(k, l) = assemble_du_channel(layout, sc, k, l);
  return ch;
}

namespace {

Angles draw_angles(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-kPi / 2.0, kPi / 2.0);
  Angles a;
  a.theta = u(rng);
  a.phi = u(rng);
  return a;
}

PathSet draw_path_set(std::mt19937_64& rng, int count, double gain_var) {
  PathSet ps;
  ps.departure.resize(count);
  ps.arrival.resize(count);
  ps.response.resize(count);
  for (int i = 0; i < count; ++i) ps.departure[i] = draw_angles(rng);
  for (int i = 0; i < count; ++i) ps.arrival[i] = draw_angles(rng);
  std::normal_distribution<double> n(0.0, std::sqrt(gain_var / 2.0));
  for (int i = 0; i < count; ++i) ps.response[i] = cplx(n(rng), n(rng));
  return ps;
}

}  // namespace

Scenario generate_scenario(const GeneratorConfig& cfg, std::uint64_t seed) {
  const Dims& d = cfg.dims;
  if (d.mt <= 0 || d.mr <= 0 || d.nt <= 0 || d.nr <= 0 || d.kd <= 0 ||
      d.ku <= 0 || d.kt < 0 || cfg.paths <= 0)
    throw std::invalid_argument("generate_scenario: dimensions must be positive");

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto draw_node = [&]() {
    // uniform point in the placement disc
    const double r = cfg.radius_m * std::sqrt(unit(rng));
    const double phi = 2.0 * kPi * unit(rng);
    return Vec2(r * std::cos(phi), r * std::sin(phi));
  };

  std::vector<Vec2> tbs_pos(d.mt), rbs_pos(d.mr), dl_pos(d.kd), ul_pos(d.ku);
  for (auto& p : tbs_pos) p = draw_node();
  for (auto& p : rbs_pos) p = draw_node();
  for (auto& p : dl_pos) p = draw_node();
  for (auto& p : ul_pos) p = draw_node();

  auto gain_var = [&](const Vec2& a, const Vec2& b) {
    const double dist = std::max((a - b).norm(), 1.0);
    return cfg.c0 * std::pow(dist, -cfg.alpha_loss);
  };

  Scenario sc;
  sc.dims = d;
  sc.wavelength = 1.0;
  sc.region_a = cfg.region_a;
  sc.min_dist = cfg.min_dist;
  sc.gamma_r = cfg.gamma_r;
  sc.noise_r = cfg.noise;
  sc.noise_dl.assign(d.kd, cfg.noise);
  sc.budget_bs.assign(d.mt, cfg.tx_power);
  sc.budget_ul.assign(d.ku, cfg.ul_power);
  const double w = 1.0 / static_cast<double>(d.kd + d.ku);
  sc.weight_dl.assign(d.kd, w);
  sc.weight_ul.assign(d.ku, w);

  sc.dl_paths.resize(d.mt);
  for (int m = 0; m < d.mt; ++m) {
    sc.dl_paths[m].resize(d.kd);
    for (int k = 0; k < d.kd; ++k)
      sc.dl_paths[m][k] =
          draw_path_set(rng, cfg.paths, gain_var(tbs_pos[m], dl_pos[k]));
  }
  sc.ul_paths.resize(d.mr);
  for (int p = 0; p < d.mr; ++p) {
    sc.ul_paths[p].resize(d.ku);
    for (int l = 0; l < d.ku; ++l)
      sc.ul_paths[p][l] =
          draw_path_set(rng, cfg.paths, gain_var(rbs_pos[p], ul_pos[l]));
  }
  sc.du_paths.resize(d.kd);
  for (int k = 0; k < d.kd; ++k) {
    sc.du_paths[k].resize(d.ku);
    for (int l = 0; l < d.ku; ++l)
      sc.du_paths[k][l] =
          draw_path_set(rng, cfg.paths, gain_var(dl_pos[k], ul_pos[l]));
  }

  const int nj = d.kt + 1;
  sc.radar.tbs_angles.resize(d.mt);
  sc.radar.fading_t.resize(d.mt);
  for (int m = 0; m < d.mt; ++m) {
    sc.radar.tbs_angles[m].resize(nj);
    sc.radar.fading_t[m].resize(nj);
    for (int j = 0; j < nj; ++j) {
      sc.radar.tbs_angles[m][j] = draw_angles(rng);
      sc.radar.fading_t[m][j] = std::polar(1.0, 2.0 * kPi * unit(rng));
    }
  }
  sc.radar.rbs_angles.resize(d.mr);
  sc.radar.fading_r.resize(d.mr);
  for (int p = 0; p < d.mr; ++p) {
    sc.radar.rbs_angles[p].resize(nj);
    sc.radar.fading_r[p].resize(nj);
    for (int j = 0; j < nj; ++j) {
      sc.radar.rbs_angles[p][j] = draw_angles(rng);
      sc.radar.fading_r[p][j] = std::polar(1.0, 2.0 * kPi * unit(rng));
    }
  }
  sc.radar.rcs_var.assign(nj, cfg.rcs_var);
  return sc;
}

}  // namespace manisac::channel
