#include "immreg/uniformization.hpp"

#include "immreg/error.hpp"

#include <cmath>
#include <sstream>

namespace immreg {

namespace {

std::vector<int> free_indices(int L) {
  std::vector<int> idx;
  for (int k = 0; k < num_coeffs(L); ++k)
    if (k < 1 || k > 3) idx.push_back(k);
  return idx;
}

struct PhiJet {
  double v;
  double d[2];
  double dd[3];
};

// g^ij (phi_ij - Gamma^k_ij phi_k) - K + e^{2 phi}
template <class T>
T residual_node(const Sym2<T>& g, const std::array<Sym2<T>, 2>& dg, const T& K, const PhiJet& p) {
  const Sym2<T> gi = inverse(g);
  const auto gam = christoffel(g, dg);
  Sym2<T> hess;
  for (int s = 0; s < 3; ++s) hess[s] = p.dd[s] - gam[0][s] * p.d[0] - gam[1][s] * p.d[1];
  return trace_with(gi, hess) - K + std::exp(2 * p.v);
}

struct PhiSamples {
  Vector v;
  std::array<Vector, 5> d;

  explicit PhiSamples(const HarmonicField& phi)
      : v(phi.samples()),
        d{phi.derivative(1, 0), phi.derivative(0, 1), phi.derivative(2, 0), phi.derivative(1, 1),
          phi.derivative(0, 2)} {}

  PhiJet at(int i) const { return {v[i], {d[0][i], d[1][i]}, {d[2][i], d[3][i], d[4][i]}}; }
};

Vector nodal_residual(const MetricField& m, const Vector& K, const PhiSamples& p) {
  Vector r(m.size());
  for (int i = 0; i < m.size(); ++i) r[i] = residual_node(m.jets[i].g, m.jets[i].dg, K[i], p.at(i));
  return r;
}

// Nodal Jacobian (nodes x coeffs) of the residual with respect to the
// coefficients of phi.
Matrix nodal_jacobian(const MetricField& m, const Vector& phi) {
  const SphereGrid& g = m.grid;
  const int n = g.size();
  Vector a0(n), a1(n), a2(n), b0(n), b1(n), c(n);
  for (int i = 0; i < n; ++i) {
    const auto& jet = m.jets[i];
    const Sym2<double> gi = inverse(jet.g);
    const auto gam = christoffel(jet.g, jet.dg);
    a0[i] = gi[0];
    a1[i] = 2 * gi[1];
    a2[i] = gi[2];
    b0[i] = -trace_with(gi, gam[0]);
    b1[i] = -trace_with(gi, gam[1]);
    c[i] = 2 * std::exp(2 * phi[i]);
  }
  Matrix J = a0.asDiagonal() * g.synthesis_matrix(2, 0);
  J.noalias() += a1.asDiagonal() * g.synthesis_matrix(1, 1);
  J.noalias() += a2.asDiagonal() * g.synthesis_matrix(0, 2);
  J.noalias() += b0.asDiagonal() * g.synthesis_matrix(1, 0);
  J.noalias() += b1.asDiagonal() * g.synthesis_matrix(0, 1);
  J.noalias() += c.asDiagonal() * g.synthesis_matrix(0, 0);
  return J;
}

Matrix reduced_jacobian(const MetricField& m, const Vector& phi, const std::vector<int>& idx) {
  const Matrix Jn = nodal_jacobian(m, phi);
  return m.grid.analysis_matrix()(idx, Eigen::all) * Jn(Eigen::all, idx);
}

Vector restrict(const Vector& c, const std::vector<int>& idx) { return c(idx); }

void check_metric(const MetricField& m, const Vector& K) {
  if (static_cast<int>(m.jets.size()) != m.grid.size() || K.size() != m.grid.size())
    throw ShapeError("liouville: metric/curvature sample count does not match the grid");
}

}  // namespace

Matrix conformal_class(const Matrix& gamma) {
  if (gamma.cols() != 3) throw ShapeError("conformal_class: expected nodes x 3 metric samples");
  Matrix out(gamma.rows(), 3);
  for (int i = 0; i < gamma.rows(); ++i) {
    const double d = gamma(i, 0) * gamma(i, 2) - gamma(i, 1) * gamma(i, 1);
    if (!(gamma(i, 0) > 0 && d > 0)) {
      std::ostringstream os;
      os << "conformal_class: metric is not positive definite at node " << i;
      throw DomainError(os.str());
    }
    out.row(i) = gamma.row(i) / std::sqrt(d);
  }
  return out;
}

Vector liouville_residual(const MetricField& metric, const Vector& K, const HarmonicField& phi) {
  check_metric(metric, K);
  return nodal_residual(metric, K, PhiSamples(phi));
}

ConformalData solve_liouville(const MetricField& metric, const Vector& K,
                              const LiouvilleOptions& opt) {
  check_metric(metric, K);
  const SphereGrid& grid = metric.grid;
  const int n = grid.size();
  const auto idx = free_indices(grid.L());

  // Initial guess -1/4 log(det gamma / det gamma_round), exact for
  // conformally round metrics.
  Vector guess = Vector::Zero(n);
  if (opt.volume_guess)
    for (int i = 0; i < n; ++i) {
      const double s = grid.sin_theta()[i];
      guess[i] = -0.25 * std::log(det(metric.jets[i].g) / (s * s));
    }
  Vector c = grid.analyze(guess);
  ConformalData out{Matrix(), HarmonicField::zero(grid), Vector(), {}, {}, 0.0, {}};
  for (int k = 0; k < 3; ++k) {
    out.gauge.boost[k] = c[1 + k];
    c[1 + k] = 0.0;
  }

  auto reduced_residual = [&](const Vector& coeffs, Vector* nodal) {
    const Vector r = nodal_residual(metric, K, PhiSamples(HarmonicField(grid, coeffs)));
    if (nodal) *nodal = r;
    return restrict(grid.analyze(r), idx);
  };

  Vector nodal;
  Vector R = reduced_residual(c, &nodal);
  double rnorm = R.cwiseAbs().maxCoeff();
  out.residual_history.push_back(rnorm);
  bool converged = rnorm <= opt.tol;
  for (int it = 0; it < opt.max_iters && !converged; ++it) {
    const Eigen::PartialPivLU<Matrix> lu(reduced_jacobian(metric, grid.synthesize(c), idx));
    if (lu.rcond() < opt.min_rcond) {
      std::ostringstream os;
      os << "liouville: projected Jacobian is near singular (rcond " << lu.rcond() << ")";
      throw GaugeError(os.str());
    }
    const Vector step = lu.solve(-R);
    double alpha = 1.0;
    bool accepted = false;
    for (int h = 0; h < 30; ++h, alpha *= 0.5) {
      Vector trial = c;
      trial(idx) += alpha * step;
      Vector trial_nodal;
      const Vector trial_R = reduced_residual(trial, &trial_nodal);
      const double tn = trial_R.cwiseAbs().maxCoeff();
      if (std::isfinite(tn) && tn < rnorm) {
        c = trial;
        R = trial_R;
        nodal = trial_nodal;
        rnorm = tn;
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      // No further decrease: accept only at the round-off floor.
      if (rnorm <= 1e3 * opt.tol) converged = true;
      break;
    }
    out.residual_history.push_back(rnorm);
    converged = rnorm <= opt.tol;
  }
  if (!converged) {
    std::ostringstream os;
    os << "liouville: Newton did not converge in " << opt.max_iters
       << " iterations (projected residual " << rnorm << ")";
    throw ConvergenceError(os.str());
  }

  out.phi = HarmonicField(grid, c);
  out.residual = nodal.cwiseAbs().maxCoeff();
  const Vector leak = grid.analyze(nodal);
  for (int k = 0; k < 3; ++k) out.degree1_leakage[k] = leak[1 + k];
  out.lambda2 = (-2.0 * out.phi.samples()).array().exp();
  out.class_rep = conformal_class(metric.components());
  return out;
}

ConformalData solve_liouville(const MetricField& metric, const LiouvilleOptions& opt) {
  return solve_liouville(metric, gauss_curvature(metric), opt);
}

LiouvilleLinearization::LiouvilleLinearization(const MetricField& metric, const Vector& K,
                                               const HarmonicField& phi, double min_rcond)
    : grid_(metric.grid), metric_(metric.jets), phi_(phi.samples()), free_(free_indices(metric.grid.L())) {
  check_metric(metric, K);
  const PhiSamples p(phi);
  dphi_ = p.d;
  lambda2_ = (-2.0 * phi_).array().exp();
  lu_.compute(reduced_jacobian(metric, phi_, free_));
  if (lu_.rcond() < min_rcond) {
    std::ostringstream os;
    os << "linearized liouville: projected Jacobian is near singular (rcond " << lu_.rcond() << ")";
    throw GaugeError(os.str());
  }
}

Vector LiouvilleLinearization::residual_variation(const std::vector<MetricJet<double>>& dm,
                                                  const Vector& dK) const {
  const int n = grid_.size();
  if (static_cast<int>(dm.size()) != n || dK.size() != n)
    throw ShapeError("linearized liouville: variation sample count does not match the grid");
  Vector out(n);
  for (int i = 0; i < n; ++i) {
    const auto& m = metric_[i];
    Sym2<Dual> g;
    std::array<Sym2<Dual>, 2> dg;
    for (int s = 0; s < 3; ++s) {
      g[s] = Dual(m.g[s], dm[i].g[s]);
      for (int k = 0; k < 2; ++k) dg[k][s] = Dual(m.dg[k][s], dm[i].dg[k][s]);
    }
    const PhiJet p{phi_[i], {dphi_[0][i], dphi_[1][i]}, {dphi_[2][i], dphi_[3][i], dphi_[4][i]}};
    // K' enters with the value of K irrelevant for the derivative.
    out[i] = residual_node(g, dg, Dual(0.0, dK[i]), p).d;
  }
  return out;
}

Matrix LiouvilleLinearization::solve(const Matrix& dR) const {
  const Matrix rhs = grid_.analysis_matrix()(free_, Eigen::all) * dR;
  const Matrix c = lu_.solve(-rhs);
  return grid_.synthesis_matrix()(Eigen::all, free_) * c;
}

Matrix LiouvilleLinearization::lambda2_variation(const Matrix& dR) const {
  return (-2.0 * lambda2_).asDiagonal() * solve(dR);
}

Vector linearized_conformal_factor(const MetricField& metric, const ConformalData& cd,
                                   const MetricField& h) {
  if (h.size() != metric.size()) throw ShapeError("linearized_conformal_factor: variation size mismatch");
  const int n = metric.size();
  Vector K(n), dK(n);
  for (int i = 0; i < n; ++i) {
    MetricJet<Dual> m;
    const auto& a = metric.jets[i];
    const auto& b = h.jets[i];
    for (int s = 0; s < 3; ++s) {
      m.g[s] = Dual(a.g[s], b.g[s]);
      for (int k = 0; k < 2; ++k) m.dg[k][s] = Dual(a.dg[k][s], b.dg[k][s]);
      for (int q = 0; q < 3; ++q) m.d2g[q][s] = Dual(a.d2g[q][s], b.d2g[q][s]);
    }
    const Dual k = brioschi(m);
    K[i] = k.v;
    dK[i] = k.d;
  }
  const LiouvilleLinearization lin(metric, K, cd.phi);
  return lin.lambda2_variation(lin.residual_variation(h.jets, dK));
}

}  // namespace immreg
