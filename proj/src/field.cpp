#include "ionsim/field.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "ionsim/errors.hpp"

namespace ionsim {

namespace {

constexpr double kAxisTol = 1e-12;  // m; closer to a wire axis counts as singular

Eigen::Matrix3d cross_matrix(const Eigen::Vector3d& u) {
  Eigen::Matrix3d m;
  // m(i,k) = eps_{ijk} u_j, so that (m w)_i = eps_{ijk} u_j w_k = (u x w)_i.
  m << 0.0, -u.z(), u.y(), u.z(), 0.0, -u.x(), -u.y(), u.x(), 0.0;
  return m;
}

struct SegmentEval {
  Eigen::Vector3d b = Eigen::Vector3d::Zero();
  Eigen::Matrix3d g = Eigen::Matrix3d::Zero();
};

// Biot-Savart field of one straight segment and its analytic Jacobian.
// With w = r - anchor, c = u x w and endpoint unit vectors n1, n2:
//   B = (mu0 I / 4 pi) * (u.n1 - u.n2) * c / |c|^2
// which reduces to mu0 I/(2 pi rho) for the infinite wire.
SegmentEval eval_segment(const WireSegment& w, const Eigen::Vector3d& r, bool want_gradient) {
  const Eigen::Vector3d u = w.direction;
  const Eigen::Vector3d w1 = r - w.anchor;
  const Eigen::Vector3d c = u.cross(w1);
  const double rho2 = c.squaredNorm();
  if (rho2 < kAxisTol * kAxisTol)
    throw SingularityError("field: point on a wire axis");
  const double k = PhysicalConstants::vacuum_permeability * w.current / (4.0 * std::numbers::pi);
  const Eigen::Matrix3d m = cross_matrix(u);

  double s;
  Eigen::Vector3d grad_s = Eigen::Vector3d::Zero();
  if (std::isinf(w.length)) {
    s = 2.0;
  } else {
    const Eigen::Vector3d w2 = r - (w.anchor + w.length * u);
    const double d1 = w1.norm(), d2 = w2.norm();
    const Eigen::Vector3d n1 = w1 / d1, n2 = w2 / d2;
    s = u.dot(n1) - u.dot(n2);
    if (want_gradient)
      grad_s = (u - u.dot(n1) * n1) / d1 - (u - u.dot(n2) * n2) / d2;
  }

  SegmentEval out;
  out.b = k * s * c / rho2;
  if (want_gradient) {
    const Eigen::RowVector3d ctm = c.transpose() * m;
    out.g = k * ((c / rho2) * grad_s.transpose() + s * (m / rho2 - (2.0 / (rho2 * rho2)) * c * ctm));
  }
  return out;
}

Eigen::Vector3d wires_field(const FieldModel& model, const Eigen::Vector3d& point) {
  Eigen::Vector3d b = Eigen::Vector3d::Zero();
  for (const auto& w : model.segments) b += eval_segment(w, point, false).b;
  return b;
}

Eigen::Matrix3d wires_gradient(const FieldModel& model, const Eigen::Vector3d& point) {
  Eigen::Matrix3d g = Eigen::Matrix3d::Zero();
  for (const auto& w : model.segments) g += eval_segment(w, point, true).g;
  return g;
}

}  // namespace

void WireSegment::validate() {
  double norm = direction.norm();
  if (norm < 1e-12) throw std::domain_error("wire segment: zero direction vector");
  direction /= norm;
  if (!(length > 0.0)) throw std::domain_error("wire segment: length must be > 0");
  if (!std::isfinite(current)) throw std::domain_error("wire segment: current must be finite");
}

FieldModel FieldModel::analytic(const Eigen::Vector3d& bias, const Eigen::Matrix3d& tensor) {
  double scale = std::max(tensor.cwiseAbs().maxCoeff(), 1.0);
  if ((tensor - tensor.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
    throw std::domain_error("field: analytic gradient tensor must be symmetric");
  if (std::abs(tensor.trace()) > 1e-12 * scale)
    throw std::domain_error("field: analytic gradient tensor must be traceless");
  FieldModel m;
  m.kind = Kind::analytic;
  m.bias = bias;
  m.tensor = tensor;
  return m;
}

FieldModel FieldModel::linear_gradient(const Eigen::Vector3d& bias, double magnitude,
                                       const Eigen::Vector3d& direction) {
  double dn = direction.norm();
  if (dn < 1e-12) throw std::domain_error("field: gradient direction must be nonzero");
  Eigen::Vector3d d = direction / dn;
  Eigen::Matrix3d t;
  if (bias.norm() < 1e-15) {
    // Axial quadrupole about d; |B| then grows with rate |magnitude| along d off-center.
    t = magnitude * (1.5 * d * d.transpose() - 0.5 * Eigen::Matrix3d::Identity());
  } else {
    Eigen::Vector3d b = bias.normalized();
    double c = b.dot(d);
    double denom = 1.0 + c * c / 3.0;
    t = magnitude / denom *
        (b * d.transpose() + d * b.transpose() - (2.0 * c / 3.0) * Eigen::Matrix3d::Identity());
  }
  return analytic(bias, t);
}

FieldModel FieldModel::wire_model(std::vector<WireSegment> segments, const Eigen::Vector3d& bias) {
  for (auto& w : segments) w.validate();
  FieldModel m;
  m.kind = Kind::wires;
  m.bias = bias;
  m.segments = std::move(segments);
  return m;
}

Eigen::Vector3d field_at(const FieldModel& model, const Eigen::Vector3d& point) {
  if (model.kind == FieldModel::Kind::analytic) return model.bias + model.tensor * point;
  return model.bias + wires_field(model, point);
}

Eigen::Matrix3d gradient_at(const FieldModel& model, const Eigen::Vector3d& point) {
  if (model.kind == FieldModel::Kind::analytic) return model.tensor;
  return wires_gradient(model, point);
}

double magnitude_gradient(const FieldModel& model, const Eigen::Vector3d& point,
                          const Eigen::Vector3d& direction) {
  double dn = direction.norm();
  if (dn < 1e-12) throw std::domain_error("magnitude_gradient: direction must be nonzero");
  Eigen::Vector3d b = field_at(model, point);
  double bm = b.norm();
  if (bm < 1e-15)
    throw std::domain_error("magnitude_gradient: |B| vanishes at the point (no quantization axis)");
  return b.dot(gradient_at(model, point) * (direction / dn)) / bm;
}

double zeeman_frequency(const IonSpecies& species, double b_magnitude) {
  species.validate();
  if (b_magnitude < 0.0) throw std::domain_error("zeeman_frequency: |B| must be >= 0");
  return species.delta_ms * species.lande_g * PhysicalConstants::bohr_magneton * b_magnitude /
         PhysicalConstants::hbar;
}

Eigen::Vector3d quadrupole_center(const FieldModel& model, const Eigen::Vector3d& box_lo,
                                  const Eigen::Vector3d& box_hi) {
  if (model.kind != FieldModel::Kind::wires)
    throw std::domain_error("quadrupole_center: requires a wire model");
  for (int a = 0; a < 3; ++a)
    if (!(box_lo[a] < box_hi[a])) throw std::domain_error("quadrupole_center: empty box");

  const Eigen::Vector3d mid = 0.5 * (box_lo + box_hi);
  const Eigen::Vector3d half = 0.5 * (box_hi - box_lo);
  std::vector<Eigen::Vector3d> starts;
  starts.push_back(mid);
  for (int sx : {-1, 1})
    for (int sy : {-1, 1})
      for (int sz : {-1, 1})
        starts.push_back(mid + 0.6 * Eigen::Vector3d(sx * half.x(), sy * half.y(), sz * half.z()));

  const double margin = 1e-12 + 1e-9 * half.maxCoeff();
  for (const auto& s : starts) {
    Eigen::Vector3d r = s;
    bool ok = false;
    for (int it = 0; it < 80; ++it) {
      Eigen::Vector3d b;
      Eigen::Matrix3d j;
      try {
        b = wires_field(model, r);
        j = wires_gradient(model, r);
      } catch (const SingularityError&) {
        break;
      }
      Eigen::Vector3d step = j.fullPivLu().solve(b);
      if (!step.allFinite()) break;
      // Keep Newton from shooting far outside the search region.
      double lim = 4.0 * half.maxCoeff();
      if (step.norm() > lim) step *= lim / step.norm();
      r -= step;
      if (step.norm() < 1e-12) {
        ok = true;
        break;
      }
    }
    if (!ok) continue;
    bool inside = true;
    for (int a = 0; a < 3; ++a)
      if (r[a] < box_lo[a] - margin || r[a] > box_hi[a] + margin) inside = false;
    if (!inside) continue;
    Eigen::Vector3d b = wires_field(model, r);
    Eigen::Matrix3d j = wires_gradient(model, r);
    // |B| small enough to be a zero displaced by at most ~1e-9 m.
    if (b.norm() <= 1e-9 * std::max(j.cwiseAbs().maxCoeff(), 1e-30)) return r;
  }
  throw NotFoundError("quadrupole_center: no field zero found in the search box");
}

double axial_gradient_bound(const IonSpecies& species, const std::vector<double>& spacings,
                            const std::vector<double>& splittings) {
  species.validate();
  if (spacings.size() != splittings.size())
    throw std::domain_error("axial_gradient_bound: size mismatch");
  if (spacings.size() < 2)
    throw std::domain_error("axial_gradient_bound: need at least two spacing/splitting pairs");
  double dmin = spacings[0], dmax = spacings[0];
  for (double d : spacings) {
    dmin = std::min(dmin, d);
    dmax = std::max(dmax, d);
  }
  if (dmax - dmin < 1e-12 * std::max(std::abs(dmax), 1e-300))
    throw FitError("axial_gradient_bound: degenerate spacings");

  // Affine least squares: splitting = offset + slope * spacing.
  const double n = static_cast<double>(spacings.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < spacings.size(); ++i) {
    sx += spacings[i];
    sy += splittings[i];
    sxx += spacings[i] * spacings[i];
    sxy += spacings[i] * splittings[i];
  }
  double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);  // rad/s per m
  return slope * PhysicalConstants::hbar /
         (species.delta_ms * species.lande_g * PhysicalConstants::bohr_magneton);
}

std::vector<WireSegment> parse_wire_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open wire file: " + path);
  std::string line;
  int lineno = 0;
  bool header_seen = false;
  std::vector<WireSegment> out;
  while (std::getline(in, line)) {
    ++lineno;
    std::string trimmed = line;
    auto hash = trimmed.find('#');
    if (lineno == 1) {
      if (trimmed.rfind("# wires v1", 0) != 0)
        throw ConfigError("wire file must start with '# wires v1'", lineno);
      header_seen = true;
      continue;
    }
    if (hash != std::string::npos) trimmed = trimmed.substr(0, hash);
    std::istringstream ss(trimmed);
    std::string tok;
    std::vector<std::string> toks;
    while (ss >> tok) toks.push_back(tok);
    if (toks.empty()) continue;
    if (toks.size() != 8)
      throw ConfigError("expected 8 fields: ax ay az dx dy dz length current", lineno);
    WireSegment w;
    try {
      for (int a = 0; a < 3; ++a) w.anchor[a] = std::stod(toks[a]);
      for (int a = 0; a < 3; ++a) w.direction[a] = std::stod(toks[3 + a]);
      w.length = (toks[6] == "inf") ? std::numeric_limits<double>::infinity() : std::stod(toks[6]);
      w.current = std::stod(toks[7]);
    } catch (const std::logic_error&) {
      throw ConfigError("malformed number in wire row", lineno);
    }
    try {
      w.validate();
    } catch (const std::domain_error& e) {
      throw ConfigError(e.what(), lineno);
    }
    out.push_back(w);
  }
  if (!header_seen) throw ConfigError("empty wire file: " + path);
  if (out.empty()) throw ConfigError("wire file has no segments: " + path);
  return out;
}

}  // namespace ionsim
