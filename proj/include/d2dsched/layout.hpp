#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "d2dsched/rng.hpp"

namespace d2d {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

double distance(const Point& a, const Point& b);

// Radial law for placing a receiver around its transmitter.
enum class RadialLaw {
  kUniformDistance,  // tx-rx distance ~ U[dmin, dmax]
  kUniformArea,      // uniform over the annulus region (radial density ∝ r)
};

struct LayoutConfig {
  double region_edge_m = 500.0;
  double cell_edge_m = 5.0;
  int link_count = 50;
  double dmin_m = 2.0;
  double dmax_m = 65.0;
  uint64_t seed = 0;
  RadialLaw radial_law = RadialLaw::kUniformDistance;

  // M: cells per region edge; region_edge/cell_edge must be integral
  int grid_cells() const;
  void validate() const;  // throws std::invalid_argument
};

// 1-based cell coordinates, each in [1..M]
struct CellIndex {
  int s = 1;
  int t = 1;
};

struct Link {
  Point tx;
  Point rx;
  CellIndex tx_cell;
  CellIndex rx_cell;
  double length() const { return distance(tx, rx); }
};

struct Layout {
  LayoutConfig config;
  std::vector<Link> links;
  int size() const { return static_cast<int>(links.size()); }
};

// (s,t) = (floor(x/cell)+1, floor(y/cell)+1), clamped to [1,M] on the top
// edges. Positions outside the region raise std::domain_error.
CellIndex cell_index(const Point& pos, double cell_edge_m, double region_edge_m);

// Transmitters i.i.d. uniform on the region; each receiver drawn on the
// [dmin,dmax] annulus around its transmitter and rejection-sampled into the
// region (bounded retries, then the transmitter itself is resampled).
Layout generate_layout(const LayoutConfig& cfg, Rng& rng);

// Per-layout training distance bounds: dmin ~ U[2,70], dmax ~ U[dmin,70].
std::pair<double, double> sample_training_bounds(Rng& rng);

// Line-oriented text format. Header: region_edge,cell_edge,link_count,seed.
// Body: one link per line, tx_x,tx_y,rx_x,rx_y in meters, 6 decimals.
std::string layout_to_string(const Layout& layout);
Layout layout_from_string(const std::string& text);
void save_layout(const Layout& layout, const std::string& path);
Layout load_layout(const std::string& path);

}  // namespace d2d
