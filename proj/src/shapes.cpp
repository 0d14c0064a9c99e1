#include "immreg/shapes.hpp"

#include "immreg/error.hpp"
#include "immreg/io.hpp"

#include <charconv>
#include <cmath>
#include <numbers>

namespace immreg {

namespace {

double parse_double(std::string_view s, std::string_view what) {
  double v = 0.0;
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end || s.empty() || !std::isfinite(v))
    throw ConfigError("shape: invalid " + std::string(what) + " '" + std::string(s) + "'");
  return v;
}

int parse_int(std::string_view s, std::string_view what) {
  int v = 0;
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end || s.empty())
    throw ConfigError("shape: invalid " + std::string(what) + " '" + std::string(s) + "'");
  return v;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  size_t start = 0;
  while (true) {
    const size_t pos = s.find(sep, start);
    out.push_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

// Real harmonic Y_lm evaluated at every node (unit coefficient).
Vector harmonic_samples(const SphereGrid& grid, int l, int m) {
  Vector c = Vector::Zero(grid.num_coeffs());
  c[coeff_index(l, m)] = 1.0;
  return grid.synthesize(c);
}

}  // namespace

ShapeSpec parse_shape(std::string_view text) {
  const size_t colon = text.find(':');
  if (colon == std::string_view::npos) throw ConfigError("shape: missing ':' in '" + std::string(text) + "'");
  const auto kind = text.substr(0, colon);
  const auto body = text.substr(colon + 1);
  ShapeSpec spec;
  if (kind == "sphere") {
    spec.kind = ShapeSpec::Kind::Sphere;
    spec.radius = parse_double(body, "radius");
    if (spec.radius <= 0) throw ConfigError("shape: sphere radius must be positive");
  } else if (kind == "ellipsoid") {
    spec.kind = ShapeSpec::Kind::Ellipsoid;
    const auto parts = split(body, ',');
    if (parts.size() != 3) throw ConfigError("shape: ellipsoid needs exactly three axes");
    for (int k = 0; k < 3; ++k) {
      spec.axes[k] = parse_double(parts[k], "axis");
      if (spec.axes[k] <= 0) throw ConfigError("shape: ellipsoid axes must be positive");
    }
  } else if (kind == "perturbed") {
    spec.kind = ShapeSpec::Kind::Perturbed;
    const auto groups = split(body, ';');
    if (groups.size() < 2) throw ConfigError("shape: perturbed needs a radius and at least one mode");
    spec.radius = parse_double(groups[0], "radius");
    if (spec.radius <= 0) throw ConfigError("shape: perturbed radius must be positive");
    for (size_t g = 1; g < groups.size(); ++g) {
      const auto p = split(groups[g], ',');
      if (p.size() != 3) throw ConfigError("shape: perturbation mode must be <l>,<m>,<amp>");
      RadialMode mode{parse_int(p[0], "degree"), parse_int(p[1], "order"), parse_double(p[2], "amplitude")};
      if (mode.l < 0 || std::abs(mode.m) > mode.l) throw ConfigError("shape: need 0 <= |m| <= l");
      spec.modes.push_back(mode);
    }
  } else if (kind == "file") {
    spec.kind = ShapeSpec::Kind::File;
    if (body.empty()) throw ConfigError("shape: empty file path");
    spec.path = std::string(body);
  } else {
    throw ConfigError("shape: unknown kind '" + std::string(kind) + "'");
  }
  return spec;
}

Matrix unit_sphere_coeffs(int L) {
  Matrix c = Matrix::Zero(num_coeffs(L), 3);
  const double s = std::sqrt(4 * std::numbers::pi / 3);
  c(coeff_index(1, 1), 0) = s;
  c(coeff_index(1, -1), 1) = s;
  c(coeff_index(1, 0), 2) = s;
  return c;
}

ImmersionMap make_sphere(const SphereGrid& grid, double r) {
  return ImmersionMap::from_coeffs(grid, r * unit_sphere_coeffs(grid.L()));
}

ImmersionMap make_ellipsoid(const SphereGrid& grid, double a, double b, double c) {
  Matrix k = unit_sphere_coeffs(grid.L());
  k.col(0) *= a;
  k.col(1) *= b;
  k.col(2) *= c;
  return ImmersionMap::from_coeffs(grid, k);
}

ImmersionMap make_perturbed(const SphereGrid& grid, double r, const std::vector<RadialMode>& modes) {
  Vector radius = Vector::Constant(grid.size(), 1.0);
  for (const auto& mode : modes) {
    if (mode.l + 1 > grid.L())
      throw ShapeError("perturbed shape: mode degree " + std::to_string(mode.l) +
                       " needs L >= " + std::to_string(mode.l + 1));
    radius += mode.amp * harmonic_samples(grid, mode.l, mode.m);
  }
  radius *= r;
  const Vector& st = grid.sin_theta();
  const Vector& ct = grid.cos_theta();
  Matrix c(grid.num_coeffs(), 3);
  Vector x(grid.size()), y(grid.size()), z(grid.size());
  for (int i = 0; i < grid.size(); ++i) {
    const double p = grid.phi()[i];
    x[i] = radius[i] * st[i] * std::cos(p);
    y[i] = radius[i] * st[i] * std::sin(p);
    z[i] = radius[i] * ct[i];
  }
  c.col(0) = grid.analyze(x);
  c.col(1) = grid.analyze(y);
  c.col(2) = grid.analyze(z);
  return ImmersionMap::from_coeffs(grid, c);
}

ImmersionMap regrid(const ImmersionMap& F, const SphereGrid& grid) {
  const Matrix src = F.coeff_matrix();
  Matrix dst = Matrix::Zero(grid.num_coeffs(), 3);
  const int n = std::min<int>(src.rows(), dst.rows());
  dst.topRows(n) = src.topRows(n);
  if (src.rows() > n && src.bottomRows(src.rows() - n).cwiseAbs().maxCoeff() > 0.0)
    throw ShapeError("regrid: immersion has content above degree " + std::to_string(grid.L()));
  return ImmersionMap::from_coeffs(grid, dst);
}

ImmersionMap make_immersion(const ShapeSpec& spec, const SphereGrid& grid) {
  switch (spec.kind) {
    case ShapeSpec::Kind::Sphere:
      return make_sphere(grid, spec.radius);
    case ShapeSpec::Kind::Ellipsoid:
      return make_ellipsoid(grid, spec.axes[0], spec.axes[1], spec.axes[2]);
    case ShapeSpec::Kind::Perturbed:
      return make_perturbed(grid, spec.radius, spec.modes);
    case ShapeSpec::Kind::File: {
      const auto file = read_immersion_file(spec.path);
      const SphereGrid own(file.L);
      return regrid(ImmersionMap::from_coeffs(own, file.coeffs), grid);
    }
  }
  throw ConfigError("shape: unhandled kind");
}

ImmersionMap rigid_transform(const ImmersionMap& F, const Eigen::Matrix3d& R,
                             const Eigen::Vector3d& t) {
  Matrix c = F.coeff_matrix() * R.transpose();
  const double y00 = std::sqrt(4 * std::numbers::pi);
  for (int a = 0; a < 3; ++a) c(0, a) += y00 * t[a];
  return ImmersionMap::from_coeffs(F.grid(), c);
}

}  // namespace immreg
