#pragma once

#include "wavestack/geometry.hpp"

namespace wavestack {

// Free-space diffraction coefficient between a secondary source on one plane
// and an observation point:
//
//   w = (A cos(chi) / r) * (1/(2 pi r) - j/lambda) * exp(j 2 pi r / lambda)
//
// with r the point separation and chi the angle between the displacement and
// the source plane normal. Points behind the source plane couple with exactly
// zero; coincident points are a degenerate geometry.
inline cplx propagation_coefficient(const SimGeometry& geometry, const Vec3& from_point,
                                    const Vec3& to_point, const Vec3& source_plane_normal) {
  const Vec3 d = to_point - from_point;
  const double r = d.norm();
  if (r == 0.0) {
    throw degenerate_geometry_error("propagation between coincident points");
  }
  const double nn = source_plane_normal.norm();
  double cos_chi = d.dot(source_plane_normal) / (r * nn);
  if (cos_chi < 0.0) return cplx(0.0, 0.0);
  if (cos_chi > 1.0) cos_chi = 1.0;
  const double lambda = geometry.wavelength;
  const cplx radial(1.0 / (kTwoPi * r), -1.0 / lambda);
  return (geometry.atom_area * cos_chi / r) * radial * std::exp(kJ * (kTwoPi * r / lambda));
}

// Sentinel layer indices for the boundary coupling matrices.
inline constexpr int kInputCoupling = 0;    // input ports -> layer 1
inline constexpr int kOutputCoupling = -1;  // layer L -> output ports

// Propagation coefficient matrix W^l. For 2 <= l <= L, entry (n, n') couples
// atom n' of layer l-1 to atom n of layer l. The sentinels select the
// port-side boundary matrices. All layers (and the port arrays, which are
// boresight mounted) share the +z plane normal.
inline CMatrix build_propagation_matrix(const SimGeometry& geometry, int layer_index) {
  const Vec3 normal{0.0, 0.0, 1.0};
  const int atoms = geometry.atoms_per_layer();
  if (layer_index == kInputCoupling) {
    const auto ports = static_cast<int>(geometry.input_ports.size());
    CMatrix w(atoms, ports);
    for (int n = 0; n < atoms; ++n) {
      const Vec3 to = geometry.atom_position(1, n);
      for (int p = 0; p < ports; ++p) {
        w(n, p) = propagation_coefficient(geometry, geometry.input_ports[p], to, normal);
      }
    }
    return w;
  }
  if (layer_index == kOutputCoupling) {
    const auto ports = static_cast<int>(geometry.output_ports.size());
    CMatrix w(ports, atoms);
    for (int p = 0; p < ports; ++p) {
      for (int n = 0; n < atoms; ++n) {
        const Vec3 from = geometry.atom_position(geometry.num_layers, n);
        w(p, n) = propagation_coefficient(geometry, from, geometry.output_ports[p], normal);
      }
    }
    return w;
  }
  if (layer_index < 2 || layer_index > geometry.num_layers) {
    throw std::out_of_range("propagation matrix layer index out of range");
  }
  CMatrix w(atoms, atoms);
  for (int n = 0; n < atoms; ++n) {
    const Vec3 to = geometry.atom_position(layer_index, n);
    for (int m = 0; m < atoms; ++m) {
      w(n, m) = propagation_coefficient(geometry, geometry.atom_position(layer_index - 1, m),
                                        to, normal);
    }
  }
  return w;
}

// A SIM with its trainable phases and the cached propagation matrices, which
// are pure functions of the geometry.
class SimStack {
 public:
  explicit SimStack(SimGeometry geometry)
      : geometry_(std::move(geometry)),
        phases_(geometry_.num_layers, geometry_.atoms_per_layer()) {
    geometry_.validate();
    rebuild_cache();
  }

  SimStack(SimGeometry geometry, PhaseConfig phases) : SimStack(std::move(geometry)) {
    if (phases.layers() != geometry_.num_layers ||
        phases.atoms_per_layer() != geometry_.atoms_per_layer()) {
      throw dimension_error("phase configuration does not match geometry");
    }
    phases_ = std::move(phases);
  }

  const SimGeometry& geometry() const { return geometry_; }
  const PhaseConfig& phases() const { return phases_; }
  PhaseConfig& phases() { return phases_; }

  // Inter-layer matrix W^l, 2 <= l <= L.
  const CMatrix& interlayer(int l) const { return interlayer_.at(static_cast<size_t>(l - 2)); }
  const CMatrix& input_coupling() const { return input_coupling_; }
  const CMatrix& output_coupling() const { return output_coupling_; }

  void rebuild_cache() {
    interlayer_.clear();
    for (int l = 2; l <= geometry_.num_layers; ++l) {
      interlayer_.push_back(build_propagation_matrix(geometry_, l));
    }
    if (!geometry_.input_ports.empty()) {
      input_coupling_ = build_propagation_matrix(geometry_, kInputCoupling);
    }
    if (!geometry_.output_ports.empty()) {
      output_coupling_ = build_propagation_matrix(geometry_, kOutputCoupling);
    }
  }

 private:
  SimGeometry geometry_;
  PhaseConfig phases_;
  std::vector<CMatrix> interlayer_;
  CMatrix input_coupling_;
  CMatrix output_coupling_;
};

// Transfer function of the stack, the ordered product
// S = Phi^L W^L ... Phi^2 W^2 Phi^1 (N x N).
inline CMatrix sim_transfer(const SimStack& stack) {
  const int atoms = stack.geometry().atoms_per_layer();
  CMatrix s = stack.phases().layer_coefficients(1).asDiagonal();
  for (int l = 2; l <= stack.geometry().num_layers; ++l) {
    s = stack.interlayer(l) * s;
    s = stack.phases().layer_coefficients(l).asDiagonal() * s;
  }
  (void)atoms;
  return s;
}

// End-to-end port-to-port matrix
//   G = O_rx S_rx H S_tx I_tx          (both stacks)
//   G = H S_tx I_tx                    (no receive stack; H rows are antennas)
// where I_tx / O_rx are the cached boundary coupling matrices.
inline CMatrix end_to_end_channel(const SimStack& stack_tx, const CMatrix& channel,
                                  const SimStack* stack_rx = nullptr) {
  if (stack_tx.input_coupling().size() == 0) {
    throw dimension_error("transmit stack has no input ports");
  }
  CMatrix g = sim_transfer(stack_tx) * stack_tx.input_coupling();
  if (channel.cols() != g.rows()) {
    throw dimension_error("channel columns do not match transmit aperture");
  }
  g = channel * g;
  if (stack_rx != nullptr) {
    const CMatrix s_rx = sim_transfer(*stack_rx);
    if (s_rx.cols() != g.rows()) {
      throw dimension_error("receive aperture does not match channel rows");
    }
    if (stack_rx->output_coupling().size() == 0) {
      throw dimension_error("receive stack has no output ports");
    }
    g = stack_rx->output_coupling() * (s_rx * g);
  }
  return g;
}

}  // namespace wavestack
