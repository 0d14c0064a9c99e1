#include "immreg/geometry.hpp"

#include "immreg/error.hpp"
#include "immreg/intrinsic.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace immreg {

namespace {

Vec3<double> row3(const Matrix& m, int i) { return {m(i, 0), m(i, 1), m(i, 2)}; }

}  // namespace

ImmersionMap::ImmersionMap(HarmonicField x, HarmonicField y, HarmonicField z,
                           double min_area_ratio2)
    : grid_(x.grid()), comps_{std::move(x), std::move(y), std::move(z)} {
  for (const auto& c : comps_)
    if (!c.grid().same_as(grid_)) throw ShapeError("ImmersionMap: component grids differ");
  const int n = grid_.size();
  for (int dt = 0; dt <= 3; ++dt) {
    for (int dp = 0; dt + dp <= 3; ++dp) {
      Matrix m(n, 3);
      for (int a = 0; a < 3; ++a) m.col(a) = grid_.synthesize(comps_[a].coeffs(), dt, dp);
      derivs_[dt * 4 + dp] = std::move(m);
    }
  }
  const Matrix& Ft = derivative(1, 0);
  const Matrix& Fp = derivative(0, 1);
  min_area_ratio2_ = std::numeric_limits<double>::infinity();
  int worst = 0;
  for (int i = 0; i < n; ++i) {
    const auto a = row3(Ft, i);
    const auto b = row3(Fp, i);
    const double d = dot(a, a) * dot(b, b) - dot(a, b) * dot(a, b);
    const double s = grid_.sin_theta()[i];
    const double r = d / (s * s);
    if (r < min_area_ratio2_) {
      min_area_ratio2_ = r;
      worst = i;
    }
  }
  if (!(min_area_ratio2_ >= min_area_ratio2)) {
    std::ostringstream os;
    os << "immersion is not regular: det(gamma)/sin^2(theta) = " << min_area_ratio2_
       << " at node " << worst << " (theta=" << grid_.theta()[worst]
       << ", phi=" << grid_.phi()[worst] << ")";
    throw RegularityError(os.str());
  }
}

ImmersionMap ImmersionMap::from_coeffs(const SphereGrid& grid, const Matrix& coeffs,
                                       double min_area_ratio2) {
  if (coeffs.rows() != grid.num_coeffs() || coeffs.cols() != 3)
    throw ShapeError("ImmersionMap::from_coeffs: expected (" +
                     std::to_string(grid.num_coeffs()) + " x 3) coefficients");
  return ImmersionMap(HarmonicField(grid, coeffs.col(0)), HarmonicField(grid, coeffs.col(1)),
                      HarmonicField(grid, coeffs.col(2)), min_area_ratio2);
}

Matrix ImmersionMap::coeff_matrix() const {
  Matrix c(grid_.num_coeffs(), 3);
  for (int a = 0; a < 3; ++a) c.col(a) = comps_[a].coeffs();
  return c;
}

const Matrix& ImmersionMap::derivative(int dtheta, int dphi) const {
  if (dtheta < 0 || dphi < 0 || dtheta + dphi > 3)
    throw DomainError("ImmersionMap::derivative: order out of range");
  return derivs_[dtheta * 4 + dphi];
}

NodeJet<double> ImmersionMap::jet(int node) const {
  return {row3(derivative(1, 0), node), row3(derivative(0, 1), node),
          row3(derivative(2, 0), node), row3(derivative(1, 1), node),
          row3(derivative(0, 2), node)};
}

Vector SurfaceGeometry::norm_A2() const {
  Vector out(H.size());
  for (int i = 0; i < H.size(); ++i) {
    const double a = shape(i, 0), b = shape(i, 1), c = shape(i, 2), d = shape(i, 3);
    out[i] = a * a + 2 * b * c + d * d;
  }
  return out;
}

Matrix induced_metric(const ImmersionMap& F) {
  const int n = F.grid().size();
  const Matrix& Ft = F.derivative(1, 0);
  const Matrix& Fp = F.derivative(0, 1);
  Matrix g(n, 3);
  for (int i = 0; i < n; ++i) {
    g(i, 0) = Ft.row(i).squaredNorm();
    g(i, 1) = Ft.row(i).dot(Fp.row(i));
    g(i, 2) = Fp.row(i).squaredNorm();
  }
  return g;
}

SurfaceGeometry second_form(const ImmersionMap& F) {
  const int n = F.grid().size();
  SurfaceGeometry s;
  s.gamma.resize(n, 3);
  s.normal.resize(n, 3);
  s.A.resize(n, 3);
  s.shape.resize(n, 4);
  s.H.resize(n);
  s.K.resize(n);
  s.tau.resize(n, 3);
  for (int i = 0; i < n; ++i) {
    const auto g = node_geometry(F.jet(i));
    for (int k = 0; k < 3; ++k) {
      s.gamma(i, k) = g.gamma[k];
      s.normal(i, k) = g.normal[k];
      s.A(i, k) = g.A[k];
      s.tau(i, k) = g.tau[k];
    }
    for (int k = 0; k < 4; ++k) s.shape(i, k) = g.shape[k];
    s.H[i] = g.H;
    s.K[i] = g.K;
  }
  return s;
}

double gauss_check(const ImmersionMap& F) {
  const auto geo = second_form(F);
  const auto metric = metric_from_samples(F.grid(), geo.gamma);
  const Vector k_int = gauss_curvature(metric);
  return (k_int - geo.K).cwiseAbs().maxCoeff();
}

double darboux_residual(const ImmersionMap& F, const std::array<double, 3>& e) {
  const double len = std::sqrt(e[0] * e[0] + e[1] * e[1] + e[2] * e[2]);
  if (std::abs(len - 1.0) > 1e-12) throw DomainError("darboux_residual: e must be a unit vector");
  const SphereGrid& grid = F.grid();
  const Matrix gamma = induced_metric(F);
  const auto metric = metric_from_samples(grid, gamma);
  const Eigen::Vector3d ev(e[0], e[1], e[2]);
  const Vector u = F.coeff_matrix() * ev;
  const Vector ut = grid.synthesize(u, 1, 0), up = grid.synthesize(u, 0, 1);
  const Vector utt = grid.synthesize(u, 2, 0), utp = grid.synthesize(u, 1, 1),
               upp = grid.synthesize(u, 0, 2);
  double worst = 0.0;
  for (int i = 0; i < grid.size(); ++i) {
    const auto& m = metric.jets[i];
    const auto gam = christoffel(m.g, m.dg);
    const double du[2] = {ut[i], up[i]};
    const double d2u[3] = {utt[i], utp[i], upp[i]};
    Sym2<double> hess;
    for (int s = 0; s < 3; ++s) hess[s] = d2u[s] - gam[0][s] * du[0] - gam[1][s] * du[1];
    const Sym2<double> gi = inverse(m.g);
    const double grad2 = gi[0] * du[0] * du[0] + 2 * gi[1] * du[0] * du[1] + gi[2] * du[1] * du[1];
    const double K = brioschi(m);
    const double r = det(hess) - K * det(m.g) * (1.0 - grad2);
    worst = std::max(worst, std::abs(r));
  }
  return worst;
}

}  // namespace immreg
