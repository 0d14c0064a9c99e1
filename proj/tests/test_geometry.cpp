#include <doctest.h>

#include "immreg/error.hpp"
#include "immreg/geometry.hpp"
#include "immreg/intrinsic.hpp"
#include "immreg/shapes.hpp"

#include <cmath>
#include <random>

using namespace immreg;

namespace {

struct Ell {
  double a, b, c;
  // first fundamental form of (a st cp, b st sp, c ct)
  std::array<double, 3> gamma(double t, double p) const {
    const double st = std::sin(t), ct = std::cos(t), sp = std::sin(p), cp = std::cos(p);
    return {ct * ct * (a * a * cp * cp + b * b * sp * sp) + c * c * st * st,
            st * ct * sp * cp * (b * b - a * a), st * st * (a * a * sp * sp + b * b * cp * cp)};
  }
  // H = k1 + k2 and K from the implicit form x^2/a^2 + ...
  std::pair<double, double> HK(double t, double p) const {
    const double x = a * std::sin(t) * std::cos(p), y = b * std::sin(t) * std::sin(p), z = c * std::cos(t);
    const double h2 = x * x / (a * a * a * a) + y * y / (b * b * b * b) + z * z / (c * c * c * c);
    const double h = std::sqrt(h2);
    const double abc2 = a * a * b * b * c * c;
    return {(a * a + b * b + c * c - x * x - y * y - z * z) / (abc2 * h2 * h), 1.0 / (abc2 * h2 * h2)};
  }
};

std::vector<int> random_nodes(const SphereGrid& g, int n, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_int_distribution<int> d(0, g.size() - 1);
  std::vector<int> out;
  for (int i = 0; i < n; ++i) out.push_back(d(rng));
  return out;
}

std::array<double, 3> random_unit(std::mt19937& rng) {
  std::normal_distribution<double> nd;
  std::array<double, 3> e{nd(rng), nd(rng), nd(rng)};
  const double n = std::sqrt(e[0] * e[0] + e[1] * e[1] + e[2] * e[2]);
  for (auto& v : e) v /= n;
  return e;
}

Eigen::Matrix3d some_rotation() {
  return (Eigen::AngleAxisd(0.7, Eigen::Vector3d(1, 2, -0.5).normalized())).toRotationMatrix();
}

}  // namespace

TEST_CASE("round metric and scaling") {
  SphereGrid g(12);
  for (double r : {1.0, 2.0}) {
    const Matrix gam = induced_metric(make_sphere(g, r));
    for (int i = 0; i < g.size(); ++i) {
      const double s = g.sin_theta()[i];
      CHECK(std::abs(gam(i, 0) - r * r) <= 1e-11 * r * r);
      CHECK(std::abs(gam(i, 1)) <= 1e-11);
      CHECK(std::abs(gam(i, 2) - r * r * s * s) <= 1e-11 * r * r);
    }
  }
}

TEST_CASE("ellipsoid first fundamental form and curvatures against closed form") {
  SphereGrid g(16);
  const Ell e{1.0, 1.2, 0.8};
  const auto F = make_ellipsoid(g, e.a, e.b, e.c);
  const auto geo = second_form(F);
  for (int i : random_nodes(g, 10, 3)) {
    const double t = g.theta()[i], p = g.phi()[i];
    const auto ref = e.gamma(t, p);
    for (int k = 0; k < 3; ++k) CHECK(std::abs(geo.gamma(i, k) - ref[k]) <= 1e-8);
    const auto [H, K] = e.HK(t, p);
    CHECK(std::abs(geo.H[i] - H) <= 1e-7);
    CHECK(std::abs(geo.K[i] - K) <= 1e-7);
  }
}

TEST_CASE("sphere curvatures") {
  SphereGrid g(10);
  for (double r : {1.0, 1.7}) {
    const auto geo = second_form(make_sphere(g, r));
    CHECK((geo.H.array() - 2 / r).abs().maxCoeff() <= 1e-11);
    CHECK((geo.K.array() - 1 / (r * r)).abs().maxCoeff() <= 1e-11);
    if (r == 1.0) CHECK((geo.norm_A2().array() - 2).abs().maxCoeff() <= 1e-11);
  }
}

TEST_CASE("pointwise invariants on a perturbed sphere") {
  SphereGrid g(16);
  const auto F = make_perturbed(g, 1.0, {{2, 2, 0.05}, {3, -1, 0.04}});
  const auto geo = second_form(F);
  const Matrix& Ft = F.derivative(1, 0);
  const Matrix& Fp = F.derivative(0, 1);
  for (int i = 0; i < g.size(); ++i) {
    CHECK(geo.gamma(i, 0) > 0);
    CHECK(geo.gamma(i, 0) * geo.gamma(i, 2) - geo.gamma(i, 1) * geo.gamma(i, 1) > 0);
    CHECK(std::abs(geo.normal.row(i).norm() - 1) <= 1e-12);
    CHECK(std::abs(geo.normal.row(i).dot(Ft.row(i))) <= 1e-10);
    CHECK(std::abs(geo.normal.row(i).dot(Fp.row(i))) <= 1e-10);
    CHECK(geo.H[i] * geo.H[i] >= 4 * geo.K[i] - 1e-9);
    const Sym2<double> gi = inverse(Sym2<double>{geo.gamma(i, 0), geo.gamma(i, 1), geo.gamma(i, 2)});
    const double trtau = trace_with(gi, Sym2<double>{geo.tau(i, 0), geo.tau(i, 1), geo.tau(i, 2)});
    CHECK(std::abs(trtau + geo.H[i]) <= 1e-10);
  }
}

TEST_CASE("isometry equivariance and scaling law") {
  SphereGrid g(12);
  const auto F = make_ellipsoid(g, 1.0, 1.2, 0.8);
  const auto base = second_form(F);
  const Eigen::Matrix3d R = some_rotation();
  const auto moved = second_form(rigid_transform(F, R, Eigen::Vector3d(0.3, -1.0, 2.0)));
  CHECK((moved.gamma - base.gamma).cwiseAbs().maxCoeff() <= 1e-11);
  CHECK((moved.H - base.H).cwiseAbs().maxCoeff() <= 1e-11);
  CHECK((moved.K - base.K).cwiseAbs().maxCoeff() <= 1e-11);
  CHECK((moved.norm_A2() - base.norm_A2()).cwiseAbs().maxCoeff() <= 1e-11);
  CHECK((moved.normal - base.normal * R.transpose()).cwiseAbs().maxCoeff() <= 1e-11);

  const double r = 2.5;
  const auto sc = second_form(rigid_transform(F, r * Eigen::Matrix3d::Identity(), Eigen::Vector3d::Zero()));
  CHECK((sc.gamma - r * r * base.gamma).cwiseAbs().maxCoeff() <= 1e-10);
  CHECK((sc.A - r * base.A).cwiseAbs().maxCoeff() <= 1e-10);
  CHECK((sc.H - base.H / r).cwiseAbs().maxCoeff() <= 1e-10);
  CHECK((sc.K - base.K / (r * r)).cwiseAbs().maxCoeff() <= 1e-10);
  CHECK((sc.tau - r * base.tau).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("Gauss check") {
  CHECK(gauss_check(make_sphere(SphereGrid(32), 1.0)) <= 1e-9);
  const double e16 = gauss_check(make_ellipsoid(SphereGrid(16), 1.0, 1.2, 0.8));
  const double e32 = gauss_check(make_ellipsoid(SphereGrid(32), 1.0, 1.2, 0.8));
  MESSAGE("ellipsoid gauss discrepancy L16=" << e16 << " L32=" << e32);
  CHECK(e32 <= 1e-6);
  CHECK(e32 <= e16 * 2);
  const double p16 = gauss_check(make_perturbed(SphereGrid(16), 1.0, {{2, 2, 0.05}}));
  const double p32 = gauss_check(make_perturbed(SphereGrid(32), 1.0, {{2, 2, 0.05}}));
  MESSAGE("perturbed gauss discrepancy L16=" << p16 << " L32=" << p32);
  CHECK(p32 <= 1e-5);
  CHECK(p32 <= p16 * 2);
}

TEST_CASE("Darboux residual") {
  CHECK(darboux_residual(make_sphere(SphereGrid(32), 1.0), {0, 0, 1}) <= 1e-9);
  const double e16 = darboux_residual(make_ellipsoid(SphereGrid(16), 1.0, 1.2, 0.8), {0, 0, 1});
  const double e32 = darboux_residual(make_ellipsoid(SphereGrid(32), 1.0, 1.2, 0.8), {0, 0, 1});
  MESSAGE("ellipsoid darboux L16=" << e16 << " L32=" << e32);
  CHECK(e32 <= 1e-6);
  CHECK(e32 <= e16 * 2);
  std::mt19937 rng(11);
  const auto e = random_unit(rng);
  const double p16 = darboux_residual(make_perturbed(SphereGrid(16), 1.0, {{2, 2, 0.05}}), e);
  const double p32 = darboux_residual(make_perturbed(SphereGrid(32), 1.0, {{2, 2, 0.05}}), e);
  MESSAGE("perturbed darboux L16=" << p16 << " L32=" << p32);
  CHECK(p32 <= 1e-5);
  CHECK(p32 <= p16 * 2);
  CHECK_THROWS_AS(darboux_residual(make_sphere(SphereGrid(8), 1.0), {0, 0, 2}), DomainError);
}

TEST_CASE("Brioschi on exact jets agrees with extrinsic K") {
  SphereGrid g(16);
  const auto F = make_ellipsoid(g, 1.0, 1.2, 0.8);
  const Vector k = gauss_curvature(metric_from_immersion(F));
  CHECK((k - second_form(F).K).cwiseAbs().maxCoeff() <= 1e-9);
}

TEST_CASE("degenerate immersions are rejected") {
  SphereGrid g(8);
  Matrix c = unit_sphere_coeffs(8);
  c.col(2).setZero();
  CHECK_THROWS_AS(ImmersionMap::from_coeffs(g, c), RegularityError);
  CHECK_THROWS_AS(make_perturbed(g, 1.0, {{8, 0, 0.1}}), ShapeError);
}
