#include "immreg/continuation.hpp"

#include "immreg/error.hpp"
#include "immreg/shapes.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace immreg {

const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Converged: return "converged";
    case SolveStatus::MaxIter: return "max_iter";
    case SolveStatus::Stalled: return "stalled";
    case SolveStatus::Diverged: return "diverged";
  }
  return "unknown";
}

const char* to_string(TraceStatus s) {
  switch (s) {
    case TraceStatus::ReachedEpsMin: return "reached_eps_min";
    case TraceStatus::Stalled: return "stalled";
    case TraceStatus::Diverged: return "diverged";
  }
  return "unknown";
}

TargetData target_from_immersion(const ImmersionMap& F, double eps, Variant variant) {
  const EpsilonData d = apply_phi(F, eps, variant);
  return {d.class_rep, d.blended, variant, eps};
}

Vector target_coordinates(const TargetData& t, const CodomainProjector& proj) {
  const SphereGrid& grid = proj.grid();
  if (t.class_rep.rows() != grid.size() || t.blended.size() != grid.size())
    throw ShapeError("target: sample count does not match the grid");
  const Matrix pq = class_components(grid, t.class_rep);
  Vector y(proj.size());
  y.head(proj.class_size()) = proj.project_class(pq.col(0), pq.col(1));
  y.tail(proj.scalar_size()) = proj.project_scalar(t.blended);
  return y;
}

namespace {

struct Step {
  Vector delta;
  double range_residual = 0.0;  // |U_r^T r|, what the step can remove
};

// Pseudo-inverse step -J^+ r, truncated at the dominant singular-value gap.
Step tsvd_step(const Matrix& J, const Vector& r, double gap_min) {
  Eigen::BDCSVD<Matrix> svd(J, Eigen::ComputeThinU | Eigen::ComputeThinV);
  if (svd.info() != Eigen::Success) throw ConvergenceError("newton: SVD of the Jacobian failed");
  const Vector s = svd.singularValues();
  const int n = static_cast<int>(s.size());
  if (n == 0 || !(s[0] > 0.0)) return {Vector::Zero(J.cols()), 0.0};
  const double floor = std::numeric_limits<double>::epsilon() * s[0] * std::max(J.rows(), J.cols());
  int rank = n;
  double best = 0.0;
  for (int k = 1; k <= n; ++k) {
    const double ratio = s[k - 1] / std::max(k < n ? s[k] : 0.0, floor);
    if (ratio > best) {
      best = ratio;
      rank = k;
    }
  }
  if (best < gap_min) {
    // No clean structural gap: drop only what is numerically zero.
    rank = 0;
    while (rank < n && s[rank] > 1e-12 * s[0]) ++rank;
  }
  const Vector c = svd.matrixU().leftCols(rank).transpose() * r;
  return {-svd.matrixV().leftCols(rank) * c.cwiseQuotient(s.head(rank)), c.norm()};
}

}  // namespace

NewtonResult newton_solve(const ImmersionMap& F0, const TargetData& target, const NewtonOptions& opt) {
  if (!(target.epsilon > 0.0 && target.epsilon <= 1.0))
    throw DomainError("newton_solve: epsilon must lie in (0, 1]");
  const SphereGrid& grid = F0.grid();
  const int degree = opt.degree < 0 ? grid.L() - 1 : opt.degree;
  if (degree < 1 || degree > grid.L()) throw ConfigError("newton_solve: unknown degree must lie in [1, L]");
  const int nk = num_coeffs(degree);
  const CodomainProjector proj(grid);
  const Vector ystar = target_coordinates(target, proj);
  const int nrows = opt.class_only ? proj.class_size() : proj.size();
  auto residual = [&](const ImmersionMap& F) -> Vector {
    return (phi_coordinates(apply_phi(F, target.epsilon, target.variant, opt.liouville), proj) - ystar)
        .head(nrows);
  };

  NewtonResult res(F0);
  const double guard = opt.min_det_ratio * F0.min_area_ratio2();
  Vector r = residual(F0);
  res.residual_history.push_back(r.norm());
  std::array<const Matrix*, 5> S = {&grid.synthesis_matrix(1, 0), &grid.synthesis_matrix(0, 1),
                                     &grid.synthesis_matrix(2, 0), &grid.synthesis_matrix(1, 1),
                                     &grid.synthesis_matrix(0, 2)};
  for (int it = 0;; ++it) {
    if (r.norm() <= opt.tol) {
      res.status = SolveStatus::Converged;
      return res;
    }
    if (it >= opt.max_iter) {
      res.status = SolveStatus::MaxIter;
      res.message = "newton: iteration limit reached";
      return res;
    }
    const LinearizedPhi lin(res.F, target.epsilon, target.variant, opt.liouville);
    const Matrix Jfull = lin.apply(3 * nk, [&](int i, int col) {
      const int a = col / nk, k = col % nk;
      NodeJet<double> x{};
      x.Ft[a] = (*S[0])(i, k);
      x.Fp[a] = (*S[1])(i, k);
      x.Ftt[a] = (*S[2])(i, k);
      x.Ftp[a] = (*S[3])(i, k);
      x.Fpp[a] = (*S[4])(i, k);
      return x;
    });
    const Matrix J = Jfull.topRows(nrows);
    const Step step = tsvd_step(J, r, opt.gap_min);
    if (step.range_residual <= opt.tol && r.norm() <= opt.floor_tol) {
      // Stationary least-squares point: the rest of r lies outside range(J).
      res.status = SolveStatus::Converged;
      res.least_squares_floor = true;
      std::ostringstream os;
      os << "newton: least-squares stationary, residual " << r.norm() << " outside the range";
      res.message = os.str();
      return res;
    }
    const Vector& delta = step.delta;
    const Matrix C = res.F.coeff_matrix();
    double alpha = 1.0;
    bool accepted = false;
    bool lost_regularity = false;
    for (int h = 0; h <= opt.max_halvings; ++h, alpha *= 0.5) {
      Matrix Cn = C;
      for (int a = 0; a < 3; ++a) Cn.col(a).head(nk) += alpha * delta.segment(a * nk, nk);
      try {
        ImmersionMap Fn = ImmersionMap::from_coeffs(grid, Cn);
        if (Fn.min_area_ratio2() < guard) {
          lost_regularity = true;
          ++res.rejected_steps;
          continue;
        }
        const Vector rn = residual(Fn);
        if (rn.allFinite() && rn.norm() < r.norm()) {
          res.F = std::move(Fn);
          r = rn;
          accepted = true;
          break;
        }
      } catch (const RegularityError&) {
        lost_regularity = true;
      } catch (const Error&) {
        // Liouville failure on the trial immersion: damp.
      }
      ++res.rejected_steps;
    }
    if (!accepted && step.range_residual <= opt.tol) {
      // Stationary, but far from the target: the data are not attainable.
      res.status = SolveStatus::Stalled;
      std::ostringstream os;
      os << "newton: least-squares stationary at residual " << r.norm() << " (target not attainable)";
      res.message = os.str();
      return res;
    }
    if (!accepted) {
      res.status = lost_regularity ? SolveStatus::Diverged : SolveStatus::Stalled;
      std::ostringstream os;
      os << "newton: no decreasing step after " << opt.max_halvings << " halvings at residual " << r.norm()
         << (lost_regularity ? " (regularity guard engaged)" : "");
      res.message = os.str();
      return res;
    }
    res.iterations = it + 1;
    res.residual_history.push_back(r.norm());
  }
}

Alignment procrustes(const Matrix& A, const Matrix& B) {
  if (A.rows() != B.rows() || A.cols() != 3 || B.cols() != 3)
    throw ShapeError("procrustes: need matching nodes x 3 point sets");
  const Eigen::Vector3d ca = A.colwise().mean().transpose();
  const Eigen::Vector3d cb = B.colwise().mean().transpose();
  const Matrix A0 = A.rowwise() - ca.transpose();
  const Matrix B0 = B.rowwise() - cb.transpose();
  const Eigen::Matrix3d H = A0.transpose() * B0;
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(H, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::Matrix3d D = Eigen::Matrix3d::Identity();
  D(2, 2) = (svd.matrixV() * svd.matrixU().transpose()).determinant() < 0 ? -1.0 : 1.0;
  Alignment al;
  al.R = svd.matrixV() * D * svd.matrixU().transpose();
  al.t = cb - al.R * ca;
  const Matrix moved = (A * al.R.transpose()).rowwise() + al.t.transpose();
  al.max_error = (moved - B).rowwise().norm().maxCoeff();
  return al;
}

TargetMetric make_target_metric(const MetricField& metric, const LiouvilleOptions& opt) {
  const ConformalData cd = solve_liouville(metric, opt);
  const Matrix g = metric.components();
  const SphereGrid& grid = metric.grid;
  double area = 0.0;
  for (int i = 0; i < grid.size(); ++i) {
    const double d = g(i, 0) * g(i, 2) - g(i, 1) * g(i, 1);
    area += grid.weights()[i] * std::sqrt(d) / grid.sin_theta()[i];
  }
  return {metric, conformal_class(g), cd.lambda2, area};
}

double isometry_defect(const ImmersionMap& F, const MetricField& target) {
  const Matrix g = induced_metric(F);
  const Matrix t = target.components();
  if (g.rows() != t.rows()) throw ShapeError("isometry_defect: grids differ");
  double out = 0.0;
  for (int i = 0; i < g.rows(); ++i) {
    const double s = F.grid().sin_theta()[i];
    out = std::max({out, std::abs(g(i, 0) - t(i, 0)), std::abs(g(i, 1) - t(i, 1)) / s,
                    std::abs(g(i, 2) - t(i, 2)) / (s * s)});
  }
  return out;
}

const ContinuationStep* ContinuationTrace::last_accepted() const {
  for (auto it = steps.rbegin(); it != steps.rend(); ++it)
    if (it->accepted) return &*it;
  return nullptr;
}

std::vector<double> geometric_schedule(double eps_min, double ratio, double first) {
  if (!(eps_min > 0.0 && eps_min <= 1.0) || !(ratio > 0.0 && ratio < 1.0) || !(first > 0.0 && first <= 1.0))
    throw ConfigError("schedule: need 0 < eps_min <= 1, 0 < ratio < 1 and 0 < first <= 1");
  std::vector<double> out{1.0};
  const double top = std::max(std::min(first, 1.0), eps_min);
  if (top < 1.0) out.push_back(top);
  if (top > eps_min) {
    // Equal ratios, no coarser than the requested one, ending exactly at eps_min.
    const int n = static_cast<int>(std::ceil(std::log(eps_min / top) / std::log(ratio) - 1e-9));
    const double q = std::pow(eps_min / top, 1.0 / n);
    for (int k = 1; k < n; ++k) out.push_back(top * std::pow(q, k));
    out.push_back(eps_min);
  }
  return out;
}

namespace {

Vector blended_target(const TargetMetric& t, const Vector& H, double eps, Variant v) {
  if (v == Variant::Additive) return (1.0 - eps) * t.lambda2 + eps * H;
  if (H.minCoeff() <= 0.0) throw DomainError("continuation: multiplicative variant needs H > 0");
  return (t.lambda2.array().pow(1.0 - eps) * H.array().pow(-eps)).matrix();
}

}  // namespace

ContinuationTrace epsilon_continuation(const TargetMetric& target, const std::vector<double>& schedule,
                                       const ContinuationOptions& opt) {
  if (schedule.empty()) throw ConfigError("continuation: empty schedule");
  for (size_t k = 0; k < schedule.size(); ++k) {
    if (!(schedule[k] > 0.0 && schedule[k] <= 1.0)) throw ConfigError("continuation: epsilon must lie in (0, 1]");
    if (k > 0 && !(schedule[k] < schedule[k - 1]))
      throw ConfigError("continuation: schedule must be strictly decreasing");
  }
  const SphereGrid& grid = target.metric.grid;
  ImmersionMap F = make_sphere(grid, std::sqrt(target.area / (4 * std::numbers::pi)));
  Vector H = second_form(F).H;

  ContinuationTrace trace;
  std::vector<double> todo(schedule.rbegin(), schedule.rend());  // back() is next
  double prev = -1.0;
  int halvings = 0;
  auto accept = [&](ContinuationStep& step, const ImmersionMap& Fn, double eps, const Vector& Hn) {
    step.accepted = true;
    step.defect = isometry_defect(Fn, target.metric);
    step.coeffs = Fn.coeff_matrix();
    const auto rep = svd_report(assemble_linearization(Fn, eps, opt.variant, opt.newton.liouville));
    step.singular_values = rep.smallest(opt.num_singular);
    F = Fn;
    H = Hn;
    prev = eps;
    halvings = 0;
    todo.pop_back();
    trace.steps.push_back(std::move(step));
  };
  if (todo.back() == 1.0) {
    NewtonOptions first = opt.newton;
    first.class_only = true;
    const TargetData td{target.class_rep, H, opt.variant, 1.0};
    const NewtonResult nr = newton_solve(F, td, first);
    ContinuationStep step;
    step.epsilon = 1.0;
    step.iterations = nr.iterations;
    step.residual = nr.residual_history.back();
    if (!nr.converged()) {
      trace.steps.push_back(std::move(step));
      trace.status = nr.status == SolveStatus::Diverged ? TraceStatus::Diverged : TraceStatus::Stalled;
      trace.message = "continuation stopped at epsilon 1: " + nr.message;
      return trace;
    }
    accept(step, nr.F, 1.0, second_form(nr.F).H);
  }
  while (!todo.empty()) {
    const double eps = todo.back();
    ContinuationStep step;
    step.epsilon = eps;
    NewtonResult nr(F);
    bool ok = true;
    Vector Ht = H;
    for (int sweep = 0; sweep <= opt.sweeps && ok; ++sweep) {
      const TargetData td{target.class_rep, blended_target(target, Ht, eps, opt.variant), opt.variant, eps};
      nr = newton_solve(sweep == 0 ? F : nr.F, td, opt.newton);
      step.iterations += nr.iterations;
      ok = nr.converged();
      Ht = second_form(nr.F).H;
    }
    step.residual = nr.residual_history.back();
    if (ok) {
      accept(step, nr.F, eps, Ht);
      continue;
    }
    trace.steps.push_back(std::move(step));
    if (halvings >= opt.max_step_halvings || prev < 0.0) {
      trace.status = nr.status == SolveStatus::Diverged ? TraceStatus::Diverged : TraceStatus::Stalled;
      trace.message = "continuation stopped at epsilon " + std::to_string(eps) + ": " + nr.message;
      return trace;
    }
    ++halvings;
    todo.push_back(0.5 * (prev + eps));
  }
  trace.status = TraceStatus::ReachedEpsMin;
  return trace;
}

}  // namespace immreg
