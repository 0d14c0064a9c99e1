#pragma once

// Conformal class and conformal factor of a metric on the parameter sphere.
//
// gamma_0 = e^{2 phi} gamma has curvature +1 iff
//     Delta_gamma phi = K_gamma - e^{2 phi},
// so gamma = lambda^2 gamma_0 with lambda^2 = e^{-2 phi}. The Moebius freedom
// is fixed by removing the degree-1 harmonics from phi; the discrete system
// is the quadrature projection of the nodal residual onto the harmonics of
// degree != 1, which is square in the remaining coefficients.

#include "immreg/intrinsic.hpp"
#include "immreg/spectral.hpp"

#include <Eigen/LU>

#include <array>
#include <vector>

namespace immreg {

struct MobiusGauge {
  /// Degree-1 coefficients (m = -1, 0, 1) removed from the initial guess.
  std::array<double, 3> boost{};
  /// Rotations are treated as an equivalence and never applied.
  std::array<double, 3> rotation{};
};

struct ConformalData {
  Matrix class_rep;  // nodes x 3, gamma / sqrt(det gamma)
  HarmonicField phi;
  Vector lambda2;
  MobiusGauge gauge;
  /// Max-norm of the projected residual after each Newton iterate (first
  /// entry: initial guess). This is what the iteration drives to zero.
  std::vector<double> residual_history;
  /// Max-norm nodal residual of the final iterate; includes truncation.
  double residual = 0.0;
  /// Degree-1 components of the final nodal residual (not part of the solve).
  std::array<double, 3> degree1_leakage{};
};

/// gamma / sqrt(det gamma) per node; DomainError if some gamma is not SPD.
Matrix conformal_class(const Matrix& gamma);

struct LiouvilleOptions {
  int max_iters = 50;
  double tol = 1e-12;
  /// Below this the projected Jacobian is treated as singular.
  double min_rcond = 1e-12;
  /// Start from the volume-ratio guess; false starts from phi = 0.
  bool volume_guess = true;
};

/// Solve with a prescribed curvature (e.g. det of the shape operator).
ConformalData solve_liouville(const MetricField& metric, const Vector& K,
                              const LiouvilleOptions& opt = {});
/// Same, with K from the Brioschi formula on the metric jets.
ConformalData solve_liouville(const MetricField& metric, const LiouvilleOptions& opt = {});

/// Nodal Liouville residual for phi on the given metric.
Vector liouville_residual(const MetricField& metric, const Vector& K, const HarmonicField& phi);

/// Linearized Liouville solve at a converged phi. Reused across many
/// right-hand sides.
class LiouvilleLinearization {
 public:
  LiouvilleLinearization(const MetricField& metric, const Vector& K, const HarmonicField& phi,
                         double min_rcond = 1e-12);

  /// Derivative of the nodal residual along (dmetric, dK) at fixed phi.
  Vector residual_variation(const std::vector<MetricJet<double>>& dmetric, const Vector& dK) const;
  /// phi' (node samples, one column per right-hand side) solving
  /// J phi' = -P dR, restricted to degrees != 1.
  Matrix solve(const Matrix& dR) const;
  /// (lambda^2)' = -2 e^{-2 phi} phi'.
  Matrix lambda2_variation(const Matrix& dR) const;

  const SphereGrid& grid() const { return grid_; }

 private:
  SphereGrid grid_;
  std::vector<MetricJet<double>> metric_;
  Vector phi_;
  std::array<Vector, 5> dphi_;  // t, p, tt, tp, pp
  Vector lambda2_;
  std::vector<int> free_;       // coefficient indices with l != 1
  Eigen::PartialPivLU<Matrix> lu_;
};

/// (lambda^2)' along a metric variation h (jets up to second order). The
/// curvature variation is the exact derivative of the Brioschi formula.
Vector linearized_conformal_factor(const MetricField& metric, const ConformalData& cd,
                                   const MetricField& h);

}  // namespace immreg
