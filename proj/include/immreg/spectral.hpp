#pragma once

// Real spherical-harmonic machinery on the parameter sphere.
//
// Harmonics are orthonormal in L^2(S^2) without the Condon-Shortley phase:
//   Y_l0  = T_l0(theta) / sqrt(2 pi)
//   Y_lm  = T_lm(theta) cos(m phi) / sqrt(pi)     (m > 0)
//   Y_l-m = T_lm(theta) sin(m phi) / sqrt(pi)     (m > 0)
// with T_lm normalized on [0, pi] against sin(theta) d theta. Coefficients are
// stored in (l, m) lexicographic order, index l*l + l + m.
//
// The Laplacian is div grad, so Y_lm has eigenvalue -l(l+1).

#include <Eigen/Dense>

#include <array>
#include <memory>
#include <vector>

namespace immreg {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

constexpr int num_coeffs(int L) { return (L + 1) * (L + 1); }
constexpr int coeff_index(int l, int m) { return l * l + l + m; }

/// Gauss-Legendre nodes (descending in x = cos theta) and weights on [-1, 1].
void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w);

/// Gauss-Legendre (L+1 rings, no poles) x equiangular (2L+2 longitudes) grid.
/// Cheap to copy; the transform tables are shared and built lazily.
class SphereGrid {
 public:
  explicit SphereGrid(int L);

  int L() const;
  int nlat() const;
  int nlon() const;
  int size() const;
  int num_coeffs() const { return immreg::num_coeffs(L()); }

  int node(int ring, int j) const { return ring * nlon() + j; }
  int ring_of(int node) const { return node / nlon(); }
  int lon_of(int node) const { return node % nlon(); }

  double ring_theta(int ring) const;
  double lon_phi(int j) const;
  const Vector& theta() const;      // per node
  const Vector& phi() const;        // per node
  const Vector& sin_theta() const;  // per node
  const Vector& cos_theta() const;  // per node
  /// Quadrature weights for d v_0 = sin(theta) d theta d phi; sum to 4 pi.
  const Vector& weights() const;

  /// Theta-derivative of order k (0..3) of T_lm at a ring.
  double legendre(int ring, int l, int m, int k) const;

  /// Node values of d^dt/dtheta^dt d^dp/dphi^dp sum c_lm Y_lm (dt + dp <= 3).
  Vector synthesize(const Vector& coeffs, int dtheta = 0, int dphi = 0) const;
  /// Quadrature projection onto each Y_lm.
  Vector analyze(const Vector& samples) const;

  /// Dense (nodes x coeffs) matrix of the same derivative of every Y_lm.
  /// Built on first use and cached for the lifetime of the grid tables.
  const Matrix& synthesis_matrix(int dtheta = 0, int dphi = 0) const;
  /// Dense (coeffs x nodes) analysis matrix, Y^T diag(w).
  const Matrix& analysis_matrix() const;

  bool same_as(const SphereGrid& other) const { return L() == other.L(); }

 private:
  struct Impl;
  std::shared_ptr<Impl> impl_;
};

/// Tangential field in the round orthonormal frame (e_theta, e_phi).
struct TangentSamples {
  Vector theta;
  Vector phi;
};

/// Scalar field held both as harmonic coefficients and as node samples.
class HarmonicField {
 public:
  HarmonicField(const SphereGrid& grid, Vector coeffs);

  static HarmonicField zero(const SphereGrid& grid);
  /// Projects arbitrary samples onto the band-limited space; the stored
  /// samples are those of the projection.
  static HarmonicField from_samples(const SphereGrid& grid, const Vector& samples);

  const SphereGrid& grid() const { return grid_; }
  const Vector& coeffs() const { return coeffs_; }
  const Vector& samples() const { return samples_; }
  double coeff(int l, int m) const { return coeffs_[coeff_index(l, m)]; }

  void set_coeffs(Vector coeffs);
  Vector derivative(int dtheta, int dphi) const { return grid_.synthesize(coeffs_, dtheta, dphi); }

  HarmonicField& operator+=(const HarmonicField& o);
  HarmonicField& operator*=(double s);
  friend HarmonicField operator+(HarmonicField a, const HarmonicField& b) { return a += b; }
  friend HarmonicField operator*(double s, HarmonicField a) { return a *= s; }

 private:
  SphereGrid grid_;
  Vector coeffs_;
  Vector samples_;
};

Vector synthesize(const Vector& coeffs, const SphereGrid& grid);
Vector analyze(const Vector& samples, const SphereGrid& grid);

/// Round-metric gradient (f_theta, f_phi / sin theta) at every node.
TangentSamples grad_sphere(const HarmonicField& f);

/// Coefficient-wise multiplication by -l(l+1).
HarmonicField laplace_beltrami_round(const HarmonicField& f);

/// Integral of node samples against d v_0.
double integrate(const SphereGrid& grid, const Vector& samples);

}  // namespace immreg
