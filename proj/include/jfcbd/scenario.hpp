// SPDX-License-Identifier: Apache-2.0
//
// Physical configuration -> randomized, reproducible problem instance.
//
// Layout: the L transmitters sit on the x axis, tx_spacing apart and
// centred on the origin, each with a uniform linear array along x. Users
// are dropped uniformly in a disc of user_radius around the origin; the
// target and the sensing receiver are dropped uniformly in a disc of
// target_radius around the same point.
//
// Small-scale fading of user channels is i.i.d. CN(0, 1) per antenna, scaled
// by the square root of the per-transmitter path gain. The two-way sensing
// coefficient g_l has a uniformly random phase; its magnitude follows the
// configured SensingPathModel.
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "jfcbd/linalg.hpp"
#include "jfcbd/model.hpp"

namespace jfcbd {

enum class SensingPathModel {
  /// |g_l|^2 = gain(TX_l -> target) * gain(target -> RX)
  TwoSegment,
  /// |g_l|^2 = gain(d(TX_l, target) + d(target, RX))
  TotalDistance,
};

inline const char* to_string(SensingPathModel m) {
  return m == SensingPathModel::TwoSegment ? "two_segment" : "total_distance";
}

struct SystemConfig {
  int tx_count = 2;     // L
  int tx_antennas = 4;  // N_t
  int rx_antennas = 4;  // M
  int users = 2;        // K
  double carrier_freq_hz = 3.0e9;
  double bandwidth_hz = 10.0e6;
  double noise_psd_dbm_hz = -174.0;
  double dl_capacity_bps = 30.0e6;
  double ul_capacity_bps = 30.0e6;
  /// One value for every user, or exactly K values.
  std::vector<double> comm_sinr_db{10.0};
  double sensing_sinr_db = 10.0;
  double user_radius_m = 500.0;
  double target_radius_m = 500.0;
  double tx_spacing_m = 500.0;
  double min_distance_m = 10.0;
  SensingPathModel sensing_path = SensingPathModel::TotalDistance;
  std::uint64_t seed = 1;

  int tx_total() const { return tx_count * tx_antennas; }

  void validate() const {
    auto fail = [](const std::string& msg) { throw DomainError("invalid configuration: " + msg); };
    if (tx_count < 1) fail("tx_count must be >= 1");
    if (tx_antennas < 1) fail("tx_antennas must be >= 1");
    if (rx_antennas < 1) fail("rx_antennas must be >= 1");
    if (users < 1) fail("users must be >= 1");
    if (tx_total() < users) fail("total transmit antennas L * N_t must be >= number of users");
    if (!(bandwidth_hz > 0.0) || !std::isfinite(bandwidth_hz)) fail("bandwidth_hz must be positive");
    if (!(dl_capacity_bps > 0.0)) fail("dl_capacity_bps must be positive");
    if (!(ul_capacity_bps > 0.0)) fail("ul_capacity_bps must be positive");
    if (!std::isfinite(noise_psd_dbm_hz)) fail("noise_psd_dbm_hz must be finite");
    if (!std::isfinite(sensing_sinr_db)) fail("sensing_sinr_db must be finite");
    if (comm_sinr_db.empty()) fail("comm_sinr_db needs at least one value");
    if (comm_sinr_db.size() != 1 && comm_sinr_db.size() != static_cast<std::size_t>(users))
      fail("comm_sinr_db must hold one value or one value per user");
    for (double v : comm_sinr_db)
      if (!std::isfinite(v)) fail("comm_sinr_db values must be finite");
    if (!(user_radius_m > 0.0) || !(target_radius_m > 0.0)) fail("drop radii must be positive");
    if (!(tx_spacing_m >= 0.0)) fail("tx_spacing_m must be nonnegative");
    if (!(min_distance_m > 0.0)) fail("min_distance_m must be positive");
    if (min_distance_m >= user_radius_m || min_distance_m >= target_radius_m)
      fail("min_distance_m must be smaller than the drop radii");
  }

  /// Noise power over the band, watts.
  double noise_power_w() const { return dbm_to_watts(noise_psd_dbm_hz + linear_to_db(bandwidth_hz)); }
  /// Fronthaul capacities in bit per channel use.
  double dl_capacity_bits() const { return dl_capacity_bps / bandwidth_hz; }
  double ul_capacity_bits() const { return ul_capacity_bps / bandwidth_hz; }
};

using Point = std::array<double, 2>;

inline double distance(const Point& a, const Point& b) { return std::hypot(a[0] - b[0], a[1] - b[1]); }

struct Geometry {
  std::vector<Point> tx_positions;
  Point rx_position{};
  std::vector<Point> user_positions;
  Point target_position{};
  std::vector<double> theta_t;  // departure angle per transmitter, (0, pi)
  double theta_r = 0.0;         // arrival angle at the receiver, (0, pi)
};

/// 128.1 + 37.6 log10(d / 1 km), dB.
inline double path_loss_db(double distance_m) {
  if (!(distance_m > 0.0) || !std::isfinite(distance_m)) throw DomainError("path loss needs a positive distance");
  return 128.1 + 37.6 * std::log10(distance_m / 1000.0);
}

inline double path_gain(double distance_m) { return db_to_linear(-path_loss_db(distance_m)); }

/// ULA response (1/sqrt(n)) exp(-j pi i cos(theta)), i = 0..n-1.
inline CVec steering_vector(double theta, int n) {
  if (n < 1) throw DomainError("steering vector needs at least one antenna");
  CVec a(n);
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  const double c = std::cos(theta);
  for (int i = 0; i < n; ++i) a(i) = scale * std::polar(1.0, -std::numbers::pi * i * c);
  a(0) = scale;  // exactly real
  return a;
}

/// Angle of `to - from` measured from the x axis, folded into [0, pi].
inline double array_angle(const Point& from, const Point& to) {
  const double d = distance(from, to);
  return std::acos(std::clamp((to[0] - from[0]) / d, -1.0, 1.0));
}

/// Per-antenna i.i.d. CN(0,1) fading, segment l scaled by sqrt(gain(d_l)).
template <typename Rng>
CVec draw_user_channel(std::span<const double> tx_distances_m, int tx_antennas, Rng& rng) {
  std::normal_distribution<double> normal(0.0, std::sqrt(0.5));
  CVec h(static_cast<Eigen::Index>(tx_distances_m.size()) * tx_antennas);
  for (std::size_t l = 0; l < tx_distances_m.size(); ++l) {
    const double amp = std::sqrt(path_gain(tx_distances_m[l]));
    for (int i = 0; i < tx_antennas; ++i) {
      const double re = normal(rng);
      const double im = normal(rng);
      h(static_cast<Eigen::Index>(l) * tx_antennas + i) = amp * cd(re, im);
    }
  }
  return h;
}

template <typename Rng>
Point uniform_in_disc(double radius, Rng& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double r = radius * std::sqrt(u(rng));
  const double phi = 2.0 * std::numbers::pi * u(rng);
  return {r * std::cos(phi), r * std::sin(phi)};
}

template <typename Rng>
Geometry draw_geometry(const SystemConfig& cfg, Rng& rng) {
  Geometry geo;
  for (int l = 0; l < cfg.tx_count; ++l)
    geo.tx_positions.push_back({(l - 0.5 * (cfg.tx_count - 1)) * cfg.tx_spacing_m, 0.0});

  auto far_from_all_tx = [&](const Point& p) {
    for (const auto& t : geo.tx_positions)
      if (distance(p, t) < cfg.min_distance_m) return false;
    return true;
  };
  // A degenerate angle (point on the array axis) is rejected along with
  // points closer than min_distance.
  auto off_axis = [&](const Point& from, const Point& to) {
    return std::abs(to[1] - from[1]) > 1e-6 * distance(from, to);
  };

  for (int k = 0; k < cfg.users; ++k) {
    Point p;
    do {
      p = uniform_in_disc(cfg.user_radius_m, rng);
    } while (!far_from_all_tx(p));
    geo.user_positions.push_back(p);
  }

  for (;;) {
    const Point target = uniform_in_disc(cfg.target_radius_m, rng);
    const Point rx = uniform_in_disc(cfg.target_radius_m, rng);
    bool ok = far_from_all_tx(target) && distance(target, rx) >= cfg.min_distance_m && off_axis(rx, target);
    for (const auto& t : geo.tx_positions) ok = ok && off_axis(t, target);
    if (!ok) continue;
    geo.target_position = target;
    geo.rx_position = rx;
    break;
  }
  for (const auto& t : geo.tx_positions) geo.theta_t.push_back(array_angle(t, geo.target_position));
  geo.theta_r = array_angle(geo.rx_position, geo.target_position);
  return geo;
}

struct Scenario {
  SystemConfig config;
  Geometry geometry;
  ProblemInstance instance;
};

/// Builds instance data for an explicit geometry; randomness (fading and the
/// sensing phases) comes from `rng`.
template <typename Rng>
ProblemInstance instance_from_geometry(const SystemConfig& cfg, const Geometry& geo, Rng& rng) {
  const int L = cfg.tx_count;
  InstanceData d;
  d.tx_count = L;
  d.tx_antennas = cfg.tx_antennas;
  d.rx_antennas = cfg.rx_antennas;

  std::vector<double> dist(L);
  for (const auto& u : geo.user_positions) {
    for (int l = 0; l < L; ++l) dist[l] = distance(geo.tx_positions[l], u);
    d.h.push_back(draw_user_channel(std::span<const double>(dist), cfg.tx_antennas, rng));
  }

  std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
  d.g.resize(L);
  const double d_rx = distance(geo.target_position, geo.rx_position);
  for (int l = 0; l < L; ++l) {
    const double d_tx = distance(geo.tx_positions[l], geo.target_position);
    const double gain2 = cfg.sensing_path == SensingPathModel::TwoSegment ? path_gain(d_tx) * path_gain(d_rx)
                                                                           : path_gain(d_tx + d_rx);
    d.g(l) = std::polar(std::sqrt(gain2), phase(rng));
  }

  d.a_t.resize(cfg.tx_total());
  for (int l = 0; l < L; ++l)
    d.a_t.segment(l * cfg.tx_antennas, cfg.tx_antennas) = steering_vector(geo.theta_t[l], cfg.tx_antennas);
  d.a_r = steering_vector(geo.theta_r, cfg.rx_antennas);

  const double noise = cfg.noise_power_w();
  d.sigma_v2 = noise;
  d.sigma_z2 = noise;
  d.alpha = compression_constant(cfg.dl_capacity_bits());
  d.beta = compression_constant(cfg.ul_capacity_bits());
  d.gamma_c.resize(cfg.users);
  for (int k = 0; k < cfg.users; ++k)
    d.gamma_c(k) = db_to_linear(cfg.comm_sinr_db.size() == 1 ? cfg.comm_sinr_db[0] : cfg.comm_sinr_db[k]);
  d.gamma_s = db_to_linear(cfg.sensing_sinr_db);
  return ProblemInstance::build(std::move(d));
}

/// Deterministic in cfg.seed.
inline Scenario generate_scenario(const SystemConfig& cfg) {
  cfg.validate();
  std::mt19937_64 rng(cfg.seed);
  Geometry geo = draw_geometry(cfg, rng);
  ProblemInstance inst = instance_from_geometry(cfg, geo, rng);
  return Scenario{cfg, std::move(geo), std::move(inst)};
}

inline ProblemInstance generate_instance(const SystemConfig& cfg) { return generate_scenario(cfg).instance; }

}  // namespace jfcbd
