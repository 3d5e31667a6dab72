#pragma once

#include "wavestack/common.hpp"

#include <map>
#include <sstream>

namespace wavestack {

// Physical layout of an L-layer stacked metasurface. Layers are parallel
// planes normal to +z; layer l (1-based) sits at z = (l-1) * layer_spacing.
// Atoms form a centered nx-by-ny grid in each plane, row-major indexed
// n = iy * nx + ix. Transmit ports face layer 1 from z < 0, receive ports
// face layer L from beyond it.
struct SimGeometry {
  double wavelength = 1.0;
  int num_layers = 1;
  int grid_nx = 1;
  int grid_ny = 1;
  double atom_spacing = 0.5;   // meters
  double layer_spacing = 1.0;  // meters, uniform gap between layers
  double atom_area = 0.25;     // meters^2
  std::vector<Vec3> input_ports;
  std::vector<Vec3> output_ports;

  int atoms_per_layer() const { return grid_nx * grid_ny; }
  double total_thickness() const { return (num_layers - 1) * layer_spacing; }

  Vec3 atom_position(int layer, int n) const {
    const int ix = n % grid_nx;
    const int iy = n / grid_nx;
    return {(ix - 0.5 * (grid_nx - 1)) * atom_spacing,
            (iy - 0.5 * (grid_ny - 1)) * atom_spacing,
            (layer - 1) * layer_spacing};
  }

  void validate() const {
    if (wavelength <= 0.0) throw config_error("geometry: wavelength must be > 0");
    if (num_layers < 1) throw config_error("geometry: layers must be >= 1");
    if (grid_nx < 1 || grid_ny < 1) throw config_error("geometry: grid dims must be >= 1");
    if (atom_spacing <= 0.0) throw config_error("geometry: atom_spacing must be > 0");
    if (layer_spacing <= 0.0) throw config_error("geometry: layer_spacing must be > 0");
    if (atom_area <= 0.0) throw config_error("geometry: atom_area must be > 0");
  }
};

// Builder mirroring the documented config keys (lengths in wavelengths).
struct GeometrySpec {
  double wavelength_m = 1.0;
  int layers = 1;
  int grid_nx = 1;
  int grid_ny = 1;
  double atom_spacing_wl = 0.5;
  double thickness_wl = 10.0;
  int tx_ports = 0;
  int rx_ports = 0;
  double port_spacing_wl = 0.5;
  // Standoff of the port lines from the first/last layer; <= 0 selects the
  // default of one layer gap (thickness for a single-layer stack).
  double port_standoff_wl = -1.0;

  SimGeometry build() const {
    if (thickness_wl <= 0.0) throw config_error("geometry.thickness_wl must be > 0");
    SimGeometry g;
    g.wavelength = wavelength_m;
    g.num_layers = layers;
    g.grid_nx = grid_nx;
    g.grid_ny = grid_ny;
    g.atom_spacing = atom_spacing_wl * wavelength_m;
    const double gaps = layers > 1 ? thickness_wl / (layers - 1) : thickness_wl;
    g.layer_spacing = gaps * wavelength_m;
    g.atom_area = g.atom_spacing * g.atom_spacing;
    const double standoff =
        (port_standoff_wl > 0.0 ? port_standoff_wl : gaps) * wavelength_m;
    const double ps = port_spacing_wl * wavelength_m;
    for (int p = 0; p < tx_ports; ++p) {
      g.input_ports.push_back({(p - 0.5 * (tx_ports - 1)) * ps, 0.0, -standoff});
    }
    const double z_out = (layers - 1) * g.layer_spacing + standoff;
    for (int p = 0; p < rx_ports; ++p) {
      g.output_ports.push_back({(p - 0.5 * (rx_ports - 1)) * ps, 0.0, z_out});
    }
    g.validate();
    return g;
  }

  std::map<std::string, std::string> to_keys() const {
    auto num = [](double v) {
      std::ostringstream os;
      os.precision(17);
      os << v;
      return os.str();
    };
    std::map<std::string, std::string> kv;
    kv["wavelength_m"] = num(wavelength_m);
    kv["layers"] = std::to_string(layers);
    kv["grid_nx"] = std::to_string(grid_nx);
    kv["grid_ny"] = std::to_string(grid_ny);
    kv["atom_spacing_wl"] = num(atom_spacing_wl);
    kv["thickness_wl"] = num(thickness_wl);
    kv["tx_ports"] = std::to_string(tx_ports);
    kv["rx_ports"] = std::to_string(rx_ports);
    kv["port_spacing_wl"] = num(port_spacing_wl);
    kv["port_standoff_wl"] = num(port_standoff_wl);
    return kv;
  }

  std::string fingerprint_text() const {
    std::string text;
    for (const auto& [k, v] : to_keys()) text += k + "=" + v + "\n";
    return text;
  }

  std::uint64_t hash() const { return fnv1a64(fingerprint_text()); }
};

// One phase shift per meta-atom per layer, stored wrapped into [0, 2*pi).
// theta(layer, atom) lives at index (layer-1) * N + atom.
class PhaseConfig {
 public:
  PhaseConfig() = default;
  PhaseConfig(int layers, int atoms_per_layer)
      : layers_(layers), atoms_(atoms_per_layer),
        theta_(RVector::Zero(static_cast<Eigen::Index>(layers) * atoms_per_layer)) {}

  static PhaseConfig random_uniform(int layers, int atoms_per_layer, Rng& rng) {
    PhaseConfig p(layers, atoms_per_layer);
    for (Eigen::Index i = 0; i < p.theta_.size(); ++i) p.theta_[i] = rng.uniform(0.0, kTwoPi);
    return p;
  }

  int layers() const { return layers_; }
  int atoms_per_layer() const { return atoms_; }
  const RVector& theta() const { return theta_; }

  double at(int layer, int atom) const {
    return theta_[static_cast<Eigen::Index>(layer - 1) * atoms_ + atom];
  }

  void set(int layer, int atom, double value) {
    if (!std::isfinite(value)) throw std::invalid_argument("phase must be finite");
    theta_[static_cast<Eigen::Index>(layer - 1) * atoms_ + atom] = wrap_phase(value);
  }

  void set_all(const RVector& theta) {
    if (theta.size() != theta_.size()) throw dimension_error("phase vector size mismatch");
    for (Eigen::Index i = 0; i < theta.size(); ++i) {
      if (!std::isfinite(theta[i])) throw std::invalid_argument("phase must be finite");
      theta_[i] = wrap_phase(theta[i]);
    }
  }

  // Unit-modulus transmission coefficients of one layer, exp(j*theta).
  CVector layer_coefficients(int layer) const {
    CVector d(atoms_);
    for (int n = 0; n < atoms_; ++n) d[n] = std::exp(kJ * at(layer, n));
    return d;
  }

 private:
  int layers_ = 0;
  int atoms_ = 0;
  RVector theta_;
};

}  // namespace wavestack
