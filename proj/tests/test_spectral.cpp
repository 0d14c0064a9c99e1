#include <doctest.h>

#include "immreg/spectral.hpp"

#include <cmath>
#include <numbers>
#include <random>

using namespace immreg;
using std::numbers::pi;

namespace {

Vector random_coeffs(int L, unsigned seed) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> nd;
  Vector c(num_coeffs(L));
  for (auto& v : c) v = nd(rng);
  return c;
}

double y21(double t, double p) { return std::sqrt(15.0 / (4 * pi)) * std::sin(t) * std::cos(t) * std::cos(p); }

}  // namespace

TEST_CASE("weights sum to 4 pi and grid shape") {
  for (int L : {4, 8, 16, 32}) {
    SphereGrid g(L);
    CHECK(g.nlat() == L + 1);
    CHECK(g.nlon() == 2 * L + 2);
    CHECK(std::abs(g.weights().sum() - 4 * pi) / (4 * pi) <= 1e-13);
  }
}

TEST_CASE("quadrature integrates products of harmonics up to total degree 2L") {
  const int L = 8;
  SphereGrid g(L);
  const Matrix& Y = g.synthesis_matrix();
  const Matrix gram = Y.transpose() * g.weights().asDiagonal() * Y;
  CHECK((gram - Matrix::Identity(gram.rows(), gram.cols())).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("constant and degree-one synthesis") {
  SphereGrid g(16);
  Vector c = Vector::Zero(g.num_coeffs());
  c[0] = std::sqrt(4 * pi);
  CHECK((g.synthesize(c).array() - 1.0).abs().maxCoeff() <= 1e-13);

  c.setZero();
  c[coeff_index(1, 0)] = 1.0;
  const Vector f = g.synthesize(c);
  const int eq = g.nlat() / 2;
  CHECK(std::abs(g.ring_theta(eq) - pi / 2) <= 1e-14);
  for (int j = 0; j < g.nlon(); ++j) CHECK(std::abs(f[g.node(eq, j)]) <= 1e-12);
  const Vector ratio = f.cwiseQuotient(g.cos_theta());
  CHECK(std::abs(ratio[0] - std::sqrt(3 / (4 * pi))) <= 1e-12);
}

TEST_CASE("round trip") {
  for (int L : {4, 16}) {
    SphereGrid g(L);
    const Vector c = random_coeffs(L, 7 + L);
    CHECK((g.analyze(g.synthesize(c)) - c).cwiseAbs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("analyze: constant, cos theta, cos^2 theta") {
  SphereGrid g(16);
  const Vector& ct = g.cos_theta();
  Vector c = g.analyze(Vector::Ones(g.size()));
  CHECK(std::abs(c[0] - std::sqrt(4 * pi)) <= 1e-13);
  CHECK(c.tail(c.size() - 1).cwiseAbs().maxCoeff() <= 1e-13);

  c = g.analyze(ct);
  CHECK(std::abs(c[coeff_index(1, 0)] - std::sqrt(4 * pi / 3)) <= 1e-12);
  c[coeff_index(1, 0)] = 0;
  CHECK(c.cwiseAbs().maxCoeff() <= 1e-12);

  // cos^2 = 1/3 P_0 + 2/3 P_2, P_l = sqrt(4 pi / (2l+1)) Y_l0
  c = g.analyze(ct.cwiseProduct(ct));
  CHECK(std::abs(c[0] - std::sqrt(4 * pi) / 3) <= 1e-12);
  CHECK(std::abs(c[coeff_index(2, 0)] - 2.0 / 3 * std::sqrt(4 * pi / 5)) <= 1e-12);
  c[0] = 0;
  c[coeff_index(2, 0)] = 0;
  CHECK(c.cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("gradient") {
  SphereGrid g(16);
  HarmonicField f = HarmonicField::from_samples(g, g.cos_theta());
  auto gr = grad_sphere(f);
  for (int i = 0; i < g.size(); ++i) {
    const double mag = std::hypot(gr.theta[i], gr.phi[i]);
    CHECK(std::abs(mag - g.sin_theta()[i]) <= 1e-10);
  }
  Vector k = Vector::Zero(g.num_coeffs());
  k[0] = 3.0;
  gr = grad_sphere(HarmonicField(g, k));
  CHECK(gr.theta.cwiseAbs().maxCoeff() <= 1e-13);
  CHECK(gr.phi.cwiseAbs().maxCoeff() <= 1e-13);

  Vector c = Vector::Zero(g.num_coeffs());
  c[coeff_index(2, 1)] = 1.0;
  const HarmonicField y(g, c);
  for (int i = 0; i < g.size(); ++i)
    CHECK(std::abs(y.samples()[i] - y21(g.theta()[i], g.phi()[i])) <= 1e-12);
  gr = grad_sphere(y);
  const double h = 1e-5;
  double err = 0;
  for (int i = 0; i < g.size(); ++i) {
    const double t = g.theta()[i], p = g.phi()[i];
    const double ft = (y21(t + h, p) - y21(t - h, p)) / (2 * h);
    const double fp = (y21(t, p + h) - y21(t, p - h)) / (2 * h) / std::sin(t);
    err = std::max({err, std::abs(ft - gr.theta[i]), std::abs(fp - gr.phi[i])});
  }
  CHECK(err <= 1e-6);
}

TEST_CASE("Laplacian eigenvalues") {
  SphereGrid g(8);
  for (int l : {0, 1, 3}) {
    for (int m = -l; m <= l; ++m) {
      Vector c = Vector::Zero(g.num_coeffs());
      c[coeff_index(l, m)] = 1.0;
      const auto d = laplace_beltrami_round(HarmonicField(g, c));
      CHECK((d.coeffs() + l * (l + 1) * c).cwiseAbs().maxCoeff() <= 1e-14);
    }
  }
}

TEST_CASE("Parseval, grad-Laplacian compatibility, linearity") {
  const int L = 12;
  SphereGrid g(L);
  const Vector a = random_coeffs(L, 1), b = random_coeffs(L, 2);
  const HarmonicField f(g, a);
  CHECK(std::abs(integrate(g, f.samples().cwiseAbs2()) - a.squaredNorm()) <= 1e-11 * a.squaredNorm());

  const auto gr = grad_sphere(f);
  const double lhs = integrate(g, gr.theta.cwiseAbs2() + gr.phi.cwiseAbs2());
  const double rhs = -integrate(g, f.samples().cwiseProduct(laplace_beltrami_round(f).samples()));
  CHECK(std::abs(lhs - rhs) <= 1e-10 * std::abs(lhs));

  const double s = 0.37, t = -1.9;
  const Vector lin = g.synthesize(s * a + t * b) - (s * g.synthesize(a) + t * g.synthesize(b));
  CHECK(lin.cwiseAbs().maxCoeff() <= 1e-12);
  const Vector fa = g.synthesize(a), fb = g.synthesize(b);
  CHECK((g.analyze(s * fa + t * fb) - (s * a + t * b)).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("mismatched sizes are rejected") {
  SphereGrid g(4);
  CHECK_THROWS(g.synthesize(Vector::Zero(3)));
  CHECK_THROWS(g.analyze(Vector::Zero(3)));
}
