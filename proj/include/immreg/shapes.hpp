#pragma once

// Test immersions and the textual shape grammar used by the CLI:
//   sphere:<r> | ellipsoid:<a>,<b>,<c> | perturbed:<r>;<l>,<m>,<amp>[;...] | file:<path>

#include "immreg/geometry.hpp"

#include <array>
#include <string>
#include <string_view>
#include <vector>

namespace immreg {

struct RadialMode {
  int l = 0;
  int m = 0;
  double amp = 0.0;
};

struct ShapeSpec {
  enum class Kind { Sphere, Ellipsoid, Perturbed, File };
  Kind kind = Kind::Sphere;
  double radius = 1.0;
  std::array<double, 3> axes{1.0, 1.0, 1.0};
  std::vector<RadialMode> modes;
  std::string path;
};

/// Throws ConfigError on any deviation from the grammar.
ShapeSpec parse_shape(std::string_view text);

ImmersionMap make_immersion(const ShapeSpec& spec, const SphereGrid& grid);

ImmersionMap make_sphere(const SphereGrid& grid, double r);
/// (a sin t cos p, b sin t sin p, c cos t)
ImmersionMap make_ellipsoid(const SphereGrid& grid, double a, double b, double c);
/// r (1 + sum amp Y_lm) times the unit sphere; needs l + 1 <= L for every mode.
ImmersionMap make_perturbed(const SphereGrid& grid, double r, const std::vector<RadialMode>& modes);

/// R F + t for a 3x3 matrix R.
ImmersionMap rigid_transform(const ImmersionMap& F, const Eigen::Matrix3d& R,
                             const Eigen::Vector3d& t);

/// Same immersion on a grid of another degree (zero padding, or truncation
/// when the dropped coefficients vanish; ShapeError otherwise).
ImmersionMap regrid(const ImmersionMap& F, const SphereGrid& grid);

/// Coefficients of the unit-sphere embedding (num_coeffs x 3).
Matrix unit_sphere_coeffs(int L);

}  // namespace immreg
