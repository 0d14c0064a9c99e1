#pragma once

// Gauss-Newton solves of Phi_eps(F) = target and epsilon path-following
// toward the isometric limit.
//
// Unknowns are the ambient coefficients of F up to a fixed degree. The
// system (codomain coordinates, see regularized_operator.hpp) is
// overdetermined and rank-deficient by at least the 6 rigid motions; steps
// use a truncated-SVD pseudo-inverse with the cut at the largest relative
// singular-value gap.

#include "immreg/fredholm.hpp"
#include "immreg/intrinsic.hpp"

#include <string>
#include <vector>

namespace immreg {

struct TargetData {
  Matrix class_rep;  // nodes x 3, unit determinant
  Vector blended;
  Variant variant = Variant::Additive;
  double epsilon = 1.0;
};

/// Target generated by a known immersion.
TargetData target_from_immersion(const ImmersionMap& F, double eps, Variant variant = Variant::Additive);

/// Codomain coordinates of a target.
Vector target_coordinates(const TargetData& t, const CodomainProjector& proj);

struct NewtonOptions {
  /// On the Euclidean norm of the coordinate residual, or of its part in the
  /// range of the Jacobian (stationary least squares).
  double tol = 1e-10;
  /// Stationary points count as converged only below this residual (the
  /// band-limited unknowns cannot cancel the top-degree content exactly);
  /// above it the status is stalled.
  double floor_tol = 1e-4;
  int max_iter = 30;
  int degree = -1;         // ambient unknowns up to this degree; -1 means L - 1
  double gap_min = 1e3;
  double min_det_ratio = 1e-4;  // regularity guard relative to the start
  int max_halvings = 20;
  /// Solve the class slot only (the blended slot is left free).
  bool class_only = false;
  LiouvilleOptions liouville{60, 1e-13, 1e-12};
};

enum class SolveStatus { Converged, MaxIter, Stalled, Diverged };
const char* to_string(SolveStatus s);

struct NewtonResult {
  explicit NewtonResult(ImmersionMap start) : F(std::move(start)) {}
  ImmersionMap F;
  SolveStatus status = SolveStatus::Diverged;
  int iterations = 0;
  std::vector<double> residual_history;  // initial residual first
  int rejected_steps = 0;
  /// Converged with a residual left over that no step of the band-limited
  /// unknowns can reduce (|U_r^T r| <= tol).
  bool least_squares_floor = false;
  std::string message;
  bool converged() const { return status == SolveStatus::Converged; }
};

/// Never throws on non-convergence; the status says what happened.
NewtonResult newton_solve(const ImmersionMap& F0, const TargetData& target, const NewtonOptions& opt = {});

struct Alignment {
  Eigen::Matrix3d R;
  Eigen::Vector3d t;
  double max_error = 0.0;  // max node distance after alignment
};

/// Rigid motion x -> R x + t that best maps the nodes of A onto those of B
/// (least squares, proper rotation).
Alignment procrustes(const Matrix& A, const Matrix& B);

/// Target metric with its conformal data.
struct TargetMetric {
  MetricField metric;
  Matrix class_rep;
  Vector lambda2;
  double area = 0.0;
};

/// Curvature from the Brioschi formula on the metric jets.
TargetMetric make_target_metric(const MetricField& metric, const LiouvilleOptions& opt = {60, 1e-13, 1e-12});

/// max over nodes of the round-frame components of |gamma(F) - gamma*|.
double isometry_defect(const ImmersionMap& F, const MetricField& target);

struct ContinuationOptions {
  Variant variant = Variant::Additive;
  NewtonOptions newton{};
  /// Extra solves per epsilon with the mean-curvature target refreshed from
  /// the latest solution.
  int sweeps = 3;
  int max_step_halvings = 4;
  int num_singular = 12;
};

struct ContinuationStep {
  double epsilon = 0.0;
  int iterations = 0;
  double residual = 0.0;
  double defect = 0.0;
  std::vector<double> singular_values;  // smallest first
  bool accepted = false;
  Matrix coeffs;  // solution (num_coeffs x 3) at accepted steps
};

enum class TraceStatus { ReachedEpsMin, Stalled, Diverged };
const char* to_string(TraceStatus s);

struct ContinuationTrace {
  std::vector<ContinuationStep> steps;
  TraceStatus status = TraceStatus::Diverged;
  std::string message;
  const ContinuationStep* last_accepted() const;
};

/// 1, then first and equal geometric steps (no coarser than `ratio`) ending exactly
/// at eps_min.
/// The jump from 1 to first skips the middle range, where the quasi-static
/// H update is not a contraction (additive: the scale mode is annihilated
/// near eps = 1/2).
std::vector<double> geometric_schedule(double eps_min = 0.05, double ratio = 0.7, double first = 0.3);

/// Start: the round sphere with the area of gamma*. At eps = 1 the blended
/// slot is just H, so the first step solves the class slot alone and takes
/// its H as the mean-curvature target; afterwards the H target is the
/// previous solution's H.
ContinuationTrace epsilon_continuation(const TargetMetric& target, const std::vector<double>& schedule,
                                       const ContinuationOptions& opt = {});

}  // namespace immreg
