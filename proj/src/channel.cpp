#include "d2dsched/channel.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace d2d {

namespace {
constexpr double kSpeedOfLight = 2.998e8;  // m/s

double breakpoint_loss_db(const ChannelParams& p) {
  const double lambda = p.wavelength_m();
  const double h2 = p.antenna_height_m * p.antenna_height_m;
  return std::abs(20.0 * std::log10(lambda * lambda / (8.0 * M_PI * h2)));
}
}  // namespace

double ChannelParams::wavelength_m() const { return kSpeedOfLight / carrier_hz; }

double ChannelParams::breakpoint_distance_m() const {
  return 4.0 * antenna_height_m * antenna_height_m / wavelength_m();
}

double ChannelParams::direct_gain_db() const {
  return gain_scope == AntennaGainScope::kUniformBothEnds ? 2.0 * antenna_gain_dbi
                                                          : antenna_gain_dbi;
}

double ChannelParams::cross_gain_db() const {
  switch (gain_scope) {
    case AntennaGainScope::kDirectOnly: return 0.0;
    case AntennaGainScope::kUniformSingle: return antenna_gain_dbi;
    case AntennaGainScope::kUniformBothEnds: return 2.0 * antenna_gain_dbi;
  }
  return 0.0;
}

double ChannelParams::tx_power_w() const { return std::pow(10.0, tx_power_dbm / 10.0 - 3.0); }

double ChannelParams::snr_gap_linear() const { return std::pow(10.0, snr_gap_db / 10.0); }

void ChannelParams::validate() const {
  if (!(carrier_hz > 0.0) || !(bandwidth_hz > 0.0))
    throw std::invalid_argument("carrier and bandwidth must be positive");
  if (!(antenna_height_m > 0.0)) throw std::invalid_argument("antenna height must be positive");
  if (snr_gap_db < 0.0) throw std::invalid_argument("snr gap must be >= 0 dB");
  if (!(rate_log_base > 1.0)) throw std::invalid_argument("rate log base must exceed 1");
  if (!(min_distance_m > 0.0)) throw std::invalid_argument("min distance must be positive");
}

double path_loss_db(double distance_m, const ChannelParams& params) {
  if (!(distance_m > 0.0)) throw std::domain_error("path loss requires a positive distance");
  const double d = std::max(distance_m, params.min_distance_m);
  const double rbp = params.breakpoint_distance_m();
  const double lbp = breakpoint_loss_db(params);
  const double ratio = std::log10(d / rbp);
  const double slope = (d <= rbp) ? 20.0 : 40.0;
  return lbp + 6.0 + slope * ratio;
}

ChannelMatrix build_channel_matrix(const Layout& layout, const ChannelParams& params, Rng& rng) {
  params.validate();
  const int n = layout.size();
  ChannelMatrix m(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double d = distance(layout.links[j].tx, layout.links[i].rx);
      if (d == 0.0)
        throw std::domain_error("coincident transmitter and receiver");
      const double gain_db = (i == j) ? params.direct_gain_db() : params.cross_gain_db();
      m.at(i, j) = std::pow(10.0, (gain_db - path_loss_db(d, params)) / 10.0);
    }
  }
  if (params.fading == Fading::kRayleigh) {
    for (double& g : m.gains) g *= rng.exponential();
  }
  return m;
}

double noise_power_w(const ChannelParams& params) {
  return std::pow(10.0,
                  (params.noise_psd_dbm_hz + 10.0 * std::log10(params.bandwidth_hz)) / 10.0 - 3.0);
}

double noise_floor_crossing_m(const ChannelParams& params) {
  // interferer-to-victim path: solve tx_dbm + cross gain - L(d) = noise_dbm
  const double noise_dbm = params.noise_psd_dbm_hz + 10.0 * std::log10(params.bandwidth_hz);
  const double target_loss = params.tx_power_dbm + params.cross_gain_db() - noise_dbm;
  const double rbp = params.breakpoint_distance_m();
  const double lbp = breakpoint_loss_db(params);
  const double excess = target_loss - (lbp + 6.0);
  const double slope = (excess <= 0.0) ? 20.0 : 40.0;
  return rbp * std::pow(10.0, excess / slope);
}

void save_channel_csv(const ChannelMatrix& m, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open channel csv for writing: " + path);
  char buf[40];
  for (int i = 0; i < m.n; ++i) {
    for (int j = 0; j < m.n; ++j) {
      std::snprintf(buf, sizeof(buf), "%.9e", m.at(i, j));
      out << buf << (j + 1 < m.n ? "," : "\n");
    }
  }
}

}  // namespace d2d
