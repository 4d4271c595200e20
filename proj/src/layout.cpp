#include "d2dsched/layout.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace d2d {

namespace {

constexpr int kReceiverRetries = 1000;
constexpr int kTransmitterRetries = 1000;

bool inside_region(const Point& p, double edge) {
  return p.x >= 0.0 && p.y >= 0.0 && p.x <= edge && p.y <= edge;
}

double draw_radius(const LayoutConfig& cfg, Rng& rng) {
  if (cfg.radial_law == RadialLaw::kUniformDistance)
    return rng.uniform(cfg.dmin_m, cfg.dmax_m);
  // uniform over the annulus area: F(r) = (r^2 - dmin^2)/(dmax^2 - dmin^2)
  const double lo2 = cfg.dmin_m * cfg.dmin_m;
  const double hi2 = cfg.dmax_m * cfg.dmax_m;
  return std::sqrt(lo2 + rng.uniform01() * (hi2 - lo2));
}

}  // namespace

double distance(const Point& a, const Point& b) {
  return std::hypot(a.x - b.x, a.y - b.y);
}

int LayoutConfig::grid_cells() const {
  const double m = region_edge_m / cell_edge_m;
  const long long rounded = std::llround(m);
  if (rounded < 1 || std::abs(m - static_cast<double>(rounded)) > 1e-9 * m)
    throw std::invalid_argument("region_edge/cell_edge must be a positive integer");
  return static_cast<int>(rounded);
}

void LayoutConfig::validate() const {
  if (!(region_edge_m > 0.0)) throw std::invalid_argument("region_edge_m must be positive");
  if (!(cell_edge_m > 0.0)) throw std::invalid_argument("cell_edge_m must be positive");
  (void)grid_cells();
  if (link_count < 1) throw std::invalid_argument("link_count must be positive");
  if (!(dmin_m > 0.0) || !(dmin_m <= dmax_m) || !(dmax_m < region_edge_m))
    throw std::invalid_argument("distance bounds must satisfy 0 < dmin <= dmax < region_edge");
}

CellIndex cell_index(const Point& pos, double cell_edge_m, double region_edge_m) {
  if (!inside_region(pos, region_edge_m))
    throw std::domain_error("position outside deployment region");
  const int m = static_cast<int>(std::llround(region_edge_m / cell_edge_m));
  CellIndex c;
  c.s = std::clamp(static_cast<int>(std::floor(pos.x / cell_edge_m)) + 1, 1, m);
  c.t = std::clamp(static_cast<int>(std::floor(pos.y / cell_edge_m)) + 1, 1, m);
  return c;
}

Layout generate_layout(const LayoutConfig& cfg, Rng& rng) {
  cfg.validate();
  Layout layout;
  layout.config = cfg;
  layout.links.reserve(cfg.link_count);
  const double edge = cfg.region_edge_m;

  for (int i = 0; i < cfg.link_count; ++i) {
    Link link;
    bool placed = false;
    for (int t = 0; t < kTransmitterRetries && !placed; ++t) {
      link.tx = Point{rng.uniform(0.0, edge), rng.uniform(0.0, edge)};
      for (int r = 0; r < kReceiverRetries; ++r) {
        const double radius = draw_radius(cfg, rng);
        const double angle = rng.uniform(0.0, 2.0 * std::numbers::pi);
        const Point rx{link.tx.x + radius * std::cos(angle),
                       link.tx.y + radius * std::sin(angle)};
        if (inside_region(rx, edge)) {
          link.rx = rx;
          placed = true;
          break;
        }
      }
    }
    if (!placed)
      throw std::invalid_argument(
          "receiver annulus not reachable inside the region; check dmin/dmax");
    link.tx_cell = cell_index(link.tx, cfg.cell_edge_m, edge);
    link.rx_cell = cell_index(link.rx, cfg.cell_edge_m, edge);
    layout.links.push_back(link);
  }
  return layout;
}

std::pair<double, double> sample_training_bounds(Rng& rng) {
  const double dmin = rng.uniform(2.0, 70.0);
  const double dmax = rng.uniform(dmin, 70.0);
  return {dmin, dmax};
}

std::string layout_to_string(const Layout& layout) {
  char buf[160];
  std::string out;
  std::snprintf(buf, sizeof(buf), "%.6f,%.6f,%d,%llu\n", layout.config.region_edge_m,
                layout.config.cell_edge_m, layout.size(),
                static_cast<unsigned long long>(layout.config.seed));
  out += buf;
  for (const Link& link : layout.links) {
    std::snprintf(buf, sizeof(buf), "%.6f,%.6f,%.6f,%.6f\n", link.tx.x, link.tx.y,
                  link.rx.x, link.rx.y);
    out += buf;
  }
  return out;
}

Layout layout_from_string(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty layout text");

  Layout layout;
  unsigned long long seed = 0;
  int count = 0;
  if (std::sscanf(line.c_str(), "%lf,%lf,%d,%llu", &layout.config.region_edge_m,
                  &layout.config.cell_edge_m, &count, &seed) != 4)
    throw std::runtime_error("malformed layout header: " + line);
  layout.config.seed = seed;

  while (std::getline(in, line)) {
    if (line.empty()) continue;
    Link link;
    if (std::sscanf(line.c_str(), "%lf,%lf,%lf,%lf", &link.tx.x, &link.tx.y, &link.rx.x,
                    &link.rx.y) != 4)
      throw std::runtime_error("malformed layout line: " + line);
    link.tx_cell = cell_index(link.tx, layout.config.cell_edge_m, layout.config.region_edge_m);
    link.rx_cell = cell_index(link.rx, layout.config.cell_edge_m, layout.config.region_edge_m);
    layout.links.push_back(link);
  }
  if (layout.size() != count)
    throw std::runtime_error("layout header count does not match body");

  // distance bounds are not part of the file; echo the observed extremes
  double lo = layout.config.region_edge_m, hi = 0.0;
  for (const Link& link : layout.links) {
    lo = std::min(lo, link.length());
    hi = std::max(hi, link.length());
  }
  layout.config.link_count = count;
  layout.config.dmin_m = lo;
  layout.config.dmax_m = hi;
  return layout;
}

void save_layout(const Layout& layout, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open layout file for writing: " + path);
  out << layout_to_string(layout);
}

Layout load_layout(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open layout file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return layout_from_string(ss.str());
}

}  // namespace d2d
