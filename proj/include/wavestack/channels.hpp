#pragma once

#include "wavestack/common.hpp"

#include <Eigen/Eigenvalues>

#include <fstream>
#include <functional>
#include <optional>

namespace wavestack {

enum class ChannelModel { IidRayleigh, CorrelatedField, ScattererMultipath, PlaneWave };

inline const char* to_string(ChannelModel m) {
  switch (m) {
    case ChannelModel::IidRayleigh: return "iid-rayleigh";
    case ChannelModel::CorrelatedField: return "correlated-field";
    case ChannelModel::ScattererMultipath: return "scatterer-multipath";
    case ChannelModel::PlaneWave: return "plane-wave";
  }
  return "?";
}

// One draw of a channel with everything needed to reproduce it.
struct ChannelRealization {
  CMatrix matrix;  // rx x tx
  ChannelModel model = ChannelModel::IidRayleigh;
  std::uint64_t seed = 0;
  std::string geometry_note;

  // Documented text export: header row, then one "re,im" pair per column,
  // rows in matrix row order.
  void write_csv(std::ostream& os) const {
    os << "# rows=" << matrix.rows() << " cols=" << matrix.cols()
       << " model=" << to_string(model) << " seed=" << seed << "\n";
    os.precision(17);
    for (Eigen::Index r = 0; r < matrix.rows(); ++r) {
      for (Eigen::Index c = 0; c < matrix.cols(); ++c) {
        if (c) os << ",";
        os << std::real(matrix(r, c)) << "," << std::imag(matrix(r, c));
      }
      os << "\n";
    }
  }
};

// Entries i.i.d. circularly symmetric complex Gaussian with unit variance.
inline ChannelRealization sample_iid_rayleigh(int rx, int tx, std::uint64_t seed) {
  if (rx < 1 || tx < 1) throw std::invalid_argument("channel dims must be >= 1");
  Rng rng(seed);
  CMatrix h(rx, tx);
  for (int r = 0; r < rx; ++r) {
    for (int c = 0; c < tx; ++c) h(r, c) = rng.cgaussian();
  }
  return {std::move(h), ChannelModel::IidRayleigh, seed, {}};
}

// Isotropic-scattering correlation kernel sinc(2 d / lambda),
// sinc(x) = sin(pi x) / (pi x).
inline double spatial_correlation(const Vec3& p, const Vec3& q, double lambda) {
  if (lambda <= 0.0) throw std::invalid_argument("wavelength must be > 0");
  const double x = 2.0 * (p - q).norm() / lambda;
  if (x == 0.0) return 1.0;
  return std::sin(kPi * x) / (kPi * x);
}

// Zero-mean complex Gaussian vector with covariance R[i,j] =
// spatial_correlation(pos_i, pos_j). Colored by eigendecomposition with
// eigenvalues clamped at zero (R is PSD up to rounding).
inline CVector sample_correlated_field(const std::vector<Vec3>& positions, double lambda,
                                       Rng& rng) {
  const auto n = static_cast<Eigen::Index>(positions.size());
  if (n == 0) throw std::invalid_argument("need at least one position");
  RMatrix corr(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      corr(i, j) = spatial_correlation(positions[static_cast<size_t>(i)],
                                       positions[static_cast<size_t>(j)], lambda);
    }
  }
  Eigen::SelfAdjointEigenSolver<RMatrix> es(corr);
  RVector scale = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  CVector u(n);
  for (Eigen::Index i = 0; i < n; ++i) u[i] = rng.cgaussian();
  return es.eigenvectors().cast<cplx>() * scale.cast<cplx>().asDiagonal() * u;
}

inline CVector sample_correlated_field(const std::vector<Vec3>& positions, double lambda,
                                       std::uint64_t seed) {
  Rng rng(seed);
  return sample_correlated_field(positions, lambda, rng);
}

// Reusable coloring transform for repeated draws over a fixed position set.
class CorrelatedFieldSampler {
 public:
  CorrelatedFieldSampler(const std::vector<Vec3>& positions, double lambda) {
    const auto n = static_cast<Eigen::Index>(positions.size());
    if (n == 0) throw std::invalid_argument("need at least one position");
    RMatrix corr(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < n; ++j) {
        corr(i, j) = spatial_correlation(positions[static_cast<size_t>(i)],
                                         positions[static_cast<size_t>(j)], lambda);
      }
    }
    Eigen::SelfAdjointEigenSolver<RMatrix> es(corr);
    color_ = es.eigenvectors() * es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();
  }

  Eigen::Index size() const { return color_.rows(); }

  CVector draw(Rng& rng) const {
    CVector u(color_.cols());
    for (Eigen::Index i = 0; i < u.size(); ++i) u[i] = rng.cgaussian();
    return color_.cast<cplx>() * u;
  }

 private:
  RMatrix color_;
};

struct ScattererSet {
  std::vector<Vec3> positions;
  std::vector<cplx> gains;  // one per path
  double pathloss_exponent = 1.0;
  double reference_loss = 1.0;

  void validate() const {
    if (positions.empty()) throw std::invalid_argument("need at least one scatterer");
    if (gains.size() != positions.size()) {
      throw dimension_error("scatterer gains do not match positions");
    }
    for (const cplx& g : gains) {
      if (!std::isfinite(std::real(g)) || !std::isfinite(std::imag(g))) {
        throw std::invalid_argument("scatterer gain must be finite");
      }
    }
  }
};

// Uniformly places scatterers in an axis-aligned box with CN(0,1) path gains.
inline ScattererSet random_scatterers(int count, const Vec3& box_lo, const Vec3& box_hi,
                                      Rng& rng) {
  ScattererSet s;
  for (int k = 0; k < count; ++k) {
    s.positions.push_back({rng.uniform(box_lo.x, box_hi.x), rng.uniform(box_lo.y, box_hi.y),
                           rng.uniform(box_lo.z, box_hi.z)});
    s.gains.push_back(rng.cgaussian());
  }
  s.validate();
  return s;
}

// Geometric multipath channel H = sum_k g_k a_rx(k) a_tx(k)^T with
// spherical-wave responses a(k)_i = exp(j 2 pi d_i / lambda) / d_i.
// Rank(H) <= number of scatterers by construction.
inline ChannelRealization sample_scatterer_channel(const std::vector<Vec3>& tx_positions,
                                                   const std::vector<Vec3>& rx_positions,
                                                   const ScattererSet& scatterers, double lambda,
                                                   std::uint64_t seed) {
  if (tx_positions.empty() || rx_positions.empty()) {
    throw std::invalid_argument("need nonempty arrays");
  }
  scatterers.validate();
  auto response = [lambda](const std::vector<Vec3>& array, const Vec3& point) {
    CVector a(static_cast<Eigen::Index>(array.size()));
    for (size_t i = 0; i < array.size(); ++i) {
      const double d = (point - array[i]).norm();
      if (d == 0.0) {
        throw degenerate_geometry_error("scatterer coincides with an array element");
      }
      a[static_cast<Eigen::Index>(i)] = std::exp(kJ * (kTwoPi * d / lambda)) / d;
    }
    return a;
  };
  CMatrix h = CMatrix::Zero(static_cast<Eigen::Index>(rx_positions.size()),
                            static_cast<Eigen::Index>(tx_positions.size()));
  for (size_t k = 0; k < scatterers.positions.size(); ++k) {
    const CVector a_rx = response(rx_positions, scatterers.positions[k]);
    const CVector a_tx = response(tx_positions, scatterers.positions[k]);
    h += scatterers.gains[k] * (a_rx * a_tx.transpose());
  }
  return {std::move(h), ChannelModel::ScattererMultipath, seed, {}};
}

// Incoming plane-wave direction expressed through its direction cosines
// (u, v) = (sin el cos az, sin el sin az); boresight is elevation 0.
struct Direction {
  double u = 0.0;
  double v = 0.0;

  static Direction from_angles(double azimuth, double elevation) {
    return {std::sin(elevation) * std::cos(azimuth), std::sin(elevation) * std::sin(azimuth)};
  }

  bool physical() const { return u * u + v * v <= 1.0; }

  std::optional<std::pair<double, double>> to_angles() const {
    if (!physical()) return std::nullopt;
    const double s = std::sqrt(u * u + v * v);
    return std::make_pair(std::atan2(v, u), std::asin(std::min(1.0, s)));
  }
};

// Plane-wave phase profile exp(-j 2 pi <k, p> / lambda) over the given
// positions; unit magnitude per entry.
inline CVector steering_field(const Direction& dir, const std::vector<Vec3>& positions,
                              double lambda) {
  if (lambda <= 0.0) throw std::invalid_argument("wavelength must be > 0");
  CVector field(static_cast<Eigen::Index>(positions.size()));
  for (size_t n = 0; n < positions.size(); ++n) {
    const double phase = -kTwoPi * (dir.u * positions[n].x + dir.v * positions[n].y) / lambda;
    field[static_cast<Eigen::Index>(n)] = std::exp(kJ * phase);
  }
  return field;
}

inline CVector steering_field(double azimuth, double elevation,
                              const std::vector<Vec3>& positions, double lambda) {
  if (elevation < 0.0 || elevation > kPi / 2.0) {
    throw std::invalid_argument("elevation must lie in [0, pi/2]");
  }
  return steering_field(Direction::from_angles(azimuth, elevation), positions, lambda);
}

}  // namespace wavestack
