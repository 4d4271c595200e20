#pragma once

#include <string>
#include <vector>

#include "d2dsched/layout.hpp"
#include "d2dsched/rng.hpp"

namespace d2d {

enum class Fading { kNone, kRayleigh };

// How the antenna gain enters the link budget. kDirectOnly credits the gain
// to the aligned tx-rx pair and none to interference paths; it reproduces the
// reference benchmark ratios and is the default. The uniform alternatives
// (counted once or at both ends on every path) stay available.
enum class AntennaGainScope { kDirectOnly, kUniformSingle, kUniformBothEnds };

struct ChannelParams {
  double carrier_hz = 2.4e9;
  double bandwidth_hz = 5e6;
  double antenna_height_m = 1.5;
  double antenna_gain_dbi = 2.5;
  AntennaGainScope gain_scope = AntennaGainScope::kDirectOnly;
  double tx_power_dbm = 40.0;
  double noise_psd_dbm_hz = -169.0;
  double snr_gap_db = 6.0;
  double rate_log_base = 2.0;   // rates in bits/s
  double min_distance_m = 1.0;  // near-field clamp
  Fading fading = Fading::kNone;

  double wavelength_m() const;
  double breakpoint_distance_m() const;  // R_bp = 4 h_tx h_rx / lambda
  double direct_gain_db() const;
  double cross_gain_db() const;
  double tx_power_w() const;
  double snr_gap_linear() const;
  void validate() const;
};

// Dual-slope line-of-sight median path loss. With L_bp the magnitude of
// 20 log10(lambda^2 / (8 pi h_tx h_rx)):
//   L(d) = L_bp + 6 + 20 log10(d / R_bp)   for d <= R_bp
//   L(d) = L_bp + 6 + 40 log10(d / R_bp)   for d >  R_bp
// Distances below min_distance_m are clamped; d <= 0 raises std::domain_error.
double path_loss_db(double distance_m, const ChannelParams& params);

// Linear power gains, gains(i,j) = |h_ij|^2 from transmitter j to receiver i.
struct ChannelMatrix {
  int n = 0;
  std::vector<double> gains;  // row-major n*n

  ChannelMatrix() = default;
  explicit ChannelMatrix(int links) : n(links), gains(static_cast<size_t>(links) * links, 0.0) {}
  double& at(int i, int j) { return gains[static_cast<size_t>(i) * n + j]; }
  double at(int i, int j) const { return gains[static_cast<size_t>(i) * n + j]; }
};

// G(i,j) = 10^((gain - path_loss(dist(tx_j, rx_i))) / 10) with the antenna
// gain credited per `gain_scope`; with Rayleigh fading each entry is
// additionally scaled by an independent unit-mean exponential variate.
ChannelMatrix build_channel_matrix(const Layout& layout, const ChannelParams& params, Rng& rng);

// sigma^2 = 10^((noise_psd_dbm_hz + 10 log10(W))/10 - 3) watts
double noise_power_w(const ChannelParams& params);

// Distance at which a single interferer's received power equals the noise
// floor under `params` (closed form on the dual-slope model).
double noise_floor_crossing_m(const ChannelParams& params);

// CSV export, row i = receiver i.
void save_channel_csv(const ChannelMatrix& m, const std::string& path);

}  // namespace d2d
