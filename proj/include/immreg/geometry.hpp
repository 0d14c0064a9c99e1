#pragma once

// Pointwise surface geometry of an immersion F: S^2 -> R^3 in the (theta, phi)
// coordinate frame. Symmetric 2x2 tensors are stored as (00, 01, 11).
//
// Orientation: N = F_theta x F_phi / |.|, which is outward for the standard
// sphere, and A_ij = <d_i N, d_j F> = -<d_ij F, N>, so that the unit sphere
// has A = gamma, H = 2 and K = 1.

#include "immreg/jets.hpp"
#include "immreg/spectral.hpp"

#include <array>

namespace immreg {

template <class T>
using Sym2 = std::array<T, 3>;

/// Row-major general 2x2 matrix (00, 01, 10, 11).
template <class T>
using Mat2 = std::array<T, 4>;

/// First and second coordinate derivatives of F at one node.
template <class T>
struct NodeJet {
  Vec3<T> Ft, Fp;
  Vec3<T> Ftt, Ftp, Fpp;
};

template <class T>
struct NodeGeometry {
  Sym2<T> gamma;
  Vec3<T> normal;
  Sym2<T> A;
  Mat2<T> shape;
  T H;
  T K;
  Sym2<T> tau;
};

template <class T>
T det(const Sym2<T>& s) {
  return s[0] * s[2] - s[1] * s[1];
}

template <class T>
Sym2<T> inverse(const Sym2<T>& s) {
  const T d = det(s);
  return {s[2] / d, -s[1] / d, s[0] / d};
}

/// Full contraction tr(a^{-1} b) for symmetric b and metric a.
template <class T>
T trace_with(const Sym2<T>& ginv, const Sym2<T>& b) {
  return ginv[0] * b[0] + 2.0 * ginv[1] * b[1] + ginv[2] * b[2];
}

template <class T>
NodeGeometry<T> node_geometry(const NodeJet<T>& j) {
  NodeGeometry<T> g;
  g.gamma = {dot(j.Ft, j.Ft), dot(j.Ft, j.Fp), dot(j.Fp, j.Fp)};
  const Vec3<T> c = cross(j.Ft, j.Fp);
  using std::sqrt;
  const T len = sqrt(dot(c, c));
  g.normal = {c[0] / len, c[1] / len, c[2] / len};
  g.A = {-dot(j.Ftt, g.normal), -dot(j.Ftp, g.normal), -dot(j.Fpp, g.normal)};
  const Sym2<T> gi = inverse(g.gamma);
  g.shape = {gi[0] * g.A[0] + gi[1] * g.A[1], gi[0] * g.A[1] + gi[1] * g.A[2],
             gi[1] * g.A[0] + gi[2] * g.A[1], gi[1] * g.A[1] + gi[2] * g.A[2]};
  g.H = g.shape[0] + g.shape[3];
  g.K = g.shape[0] * g.shape[3] - g.shape[1] * g.shape[2];
  g.tau = {g.A[0] - g.H * g.gamma[0], g.A[1] - g.H * g.gamma[1], g.A[2] - g.H * g.gamma[2]};
  return g;
}

/// Immersion given by three band-limited coordinate fields. Node derivatives
/// up to third order are cached on construction.
class ImmersionMap {
 public:
  /// Throws RegularityError if det(gamma) / sin^2(theta) < min_area_ratio2
  /// at any node.
  ImmersionMap(HarmonicField x, HarmonicField y, HarmonicField z, double min_area_ratio2 = 1e-10);

  /// coeffs: (num_coeffs x 3) matrix, one column per ambient coordinate.
  static ImmersionMap from_coeffs(const SphereGrid& grid, const Matrix& coeffs,
                                  double min_area_ratio2 = 1e-10);

  const SphereGrid& grid() const { return grid_; }
  const HarmonicField& component(int a) const { return comps_[a]; }
  Matrix coeff_matrix() const;

  /// Node samples (nodes x 3) of d^dt_theta d^dp_phi F, dt + dp <= 3.
  const Matrix& derivative(int dtheta, int dphi) const;
  const Matrix& position() const { return derivative(0, 0); }

  NodeJet<double> jet(int node) const;

  /// Smallest det(gamma) / sin^2(theta) over nodes.
  double min_area_ratio2() const { return min_area_ratio2_; }

 private:
  SphereGrid grid_;
  std::array<HarmonicField, 3> comps_;
  std::array<Matrix, 16> derivs_;
  double min_area_ratio2_ = 0.0;
};

/// Per-node geometric fields; tensors are stored row-per-node.
struct SurfaceGeometry {
  Matrix gamma;   // nodes x 3
  Matrix normal;  // nodes x 3
  Matrix A;       // nodes x 3
  Matrix shape;   // nodes x 4
  Vector H;
  Vector K;
  Matrix tau;     // nodes x 3
  /// |A|^2 = tr(S^2).
  Vector norm_A2() const;
};

Matrix induced_metric(const ImmersionMap& F);
SurfaceGeometry second_form(const ImmersionMap& F);

/// max over nodes of |K_intrinsic - det(shape)|, where K_intrinsic uses only
/// the node samples of gamma (see intrinsic.hpp).
double gauss_check(const ImmersionMap& F);

/// max over nodes of |det D^2 u - K det(gamma) (1 - |grad u|^2)| for u = F.e,
/// with the Hessian, gradient and K taken intrinsically from gamma.
double darboux_residual(const ImmersionMap& F, const std::array<double, 3>& e);

}  // namespace immreg
