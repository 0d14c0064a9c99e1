#include <doctest.h>

#include "immreg/error.hpp"
#include "immreg/regularized_operator.hpp"
#include "immreg/shapes.hpp"

#include <cmath>
#include <numbers>
#include <random>

using namespace immreg;

namespace {

HarmonicField harmonic(const SphereGrid& g, std::initializer_list<std::tuple<int, int, double>> terms) {
  Vector c = Vector::Zero(g.num_coeffs());
  for (auto [l, m, a] : terms) c[coeff_index(l, m)] += a;
  return HarmonicField(g, c);
}

Matrix analyze3(const SphereGrid& g, const Matrix& samples) {
  Matrix c(g.num_coeffs(), 3);
  for (int a = 0; a < 3; ++a) c.col(a) = g.analyze(samples.col(a));
  return c;
}

double max_abs(const Matrix& m) { return m.cwiseAbs().maxCoeff(); }

ImmersionJets combine(const ImmersionJets& a, double s, const ImmersionJets& b) {
  ImmersionJets out = a;
  for (size_t i = 0; i < a.size(); ++i)
    for (int c = 0; c < 3; ++c) {
      out[i].Ft[c] += s * b[i].Ft[c];
      out[i].Fp[c] += s * b[i].Fp[c];
      out[i].Ftt[c] += s * b[i].Ftt[c];
      out[i].Ftp[c] += s * b[i].Ftp[c];
      out[i].Fpp[c] += s * b[i].Fpp[c];
    }
  return out;
}

Vector random_coordinates(const SphereGrid& g, unsigned seed, int lmax) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> nd;
  const int nc = g.num_coeffs();
  Vector w = Vector::Zero(3 * nc - 2);
  const int nlow = num_coeffs(lmax);
  for (int k = 1; k < nlow; ++k) {
    w[k - 1] = nd(rng) / (k + 1);
    w[nc - 1 + k - 1] = nd(rng) / (k + 1);
  }
  for (int k = 0; k < nlow; ++k) w[2 * nc - 2 + k] = nd(rng) / (k + 1);
  return w;
}

// Independent first variation of gamma: (g(F + tX) - g(F - tX)) / (4t) is
// exact because gamma is quadratic in F.
Matrix half_metric_variation(const ImmersionMap& F, const Matrix& Xc) {
  const double t = 0.5;
  const Matrix gp = induced_metric(ImmersionMap::from_coeffs(F.grid(), F.coeff_matrix() + t * Xc));
  const Matrix gm = induced_metric(ImmersionMap::from_coeffs(F.grid(), F.coeff_matrix() - t * Xc));
  return (gp - gm) / (4 * t);
}

}  // namespace

TEST_CASE("tensor harmonics are orthonormal") {
  const SphereGrid g(6);
  const CodomainProjector proj(g);
  for (auto [l, m] : {std::pair{2, 0}, {2, -1}, {3, 2}, {5, -4}, {6, 6}}) {
    const auto [p, q] = proj.e_harmonic(l, m);
    const Matrix c = proj.project_class(p, q);
    Vector expect = Vector::Zero(proj.class_size());
    expect[coeff_index(l, m) - 4] = 1.0;
    CHECK(max_abs(c - expect) < 1e-12);
    // The rotated harmonic lands in the B block.
    const Matrix cb = proj.project_class(-q, p);
    Vector eb = Vector::Zero(proj.class_size());
    eb[proj.class_size() / 2 + coeff_index(l, m) - 4] = 1.0;
    CHECK(max_abs(cb - eb) < 1e-12);
  }
}

TEST_CASE("class coordinates vanish on the round sphere and are rigid-motion invariant") {
  const SphereGrid g(8);
  const auto F = make_sphere(g, 2.0);
  const CodomainProjector proj(g);
  const auto d = apply_phi(F, 0.5);
  const Vector y = phi_coordinates(d, proj);
  CHECK(y.head(proj.class_size()).cwiseAbs().maxCoeff() < 1e-12);
  // Blended = 0.5 * 4 + 0.5 * 1 for a sphere of radius 2.
  CHECK(std::abs(y[proj.class_size()] - 2.5 * std::sqrt(4 * std::numbers::pi)) < 1e-10);

  const auto E = make_perturbed(g, 1.0, {{2, 1, 0.15}, {3, -2, 0.1}});
  const Eigen::Matrix3d R = Eigen::AngleAxisd(0.7, Eigen::Vector3d(1, 2, -1).normalized()).toRotationMatrix();
  const auto E2 = rigid_transform(E, R, Eigen::Vector3d(0.3, -1.0, 2.0));
  for (Variant v : {Variant::Additive, Variant::Multiplicative}) {
    const Vector a = phi_coordinates(apply_phi(E, 0.3, v), proj);
    const Vector b = phi_coordinates(apply_phi(E2, 0.3, v), proj);
    CHECK(max_abs(a - b) < 1e-10);
  }
}

TEST_CASE("epsilon and variant validation") {
  const SphereGrid g(4);
  const auto F = make_sphere(g, 1.0);
  CHECK_THROWS_AS(apply_phi(F, -0.1), DomainError);
  CHECK_THROWS_AS(apply_phi(F, 1.5), DomainError);
  CHECK_THROWS_AS(parse_variant("both"), ConfigError);
  CHECK(parse_variant("multiplicative") == Variant::Multiplicative);
  CHECK(std::string(to_string(Variant::Additive)) == "additive");
  // Inside-out sphere: H < 0.
  Matrix c = F.coeff_matrix();
  c.col(2) *= -1.0;
  const auto inv = ImmersionMap::from_coeffs(g, c);
  CHECK_THROWS_AS(apply_phi(inv, 0.5, Variant::Multiplicative), DomainError);
  CHECK_NOTHROW(apply_phi(inv, 0.5, Variant::Additive));
}

TEST_CASE("variation fields: jets, round-trip coordinates, Killing fields") {
  const SphereGrid g(8);
  const auto F = make_sphere(g, 1.0);
  const Vector w = random_coordinates(g, 7, 5);
  const VariationField V = variation_from_coordinates(g, w);
  const Matrix X = ambient_samples(F, V);
  // On the unit sphere the field is band-limited, so spectral jets are exact.
  const ImmersionJets a = variation_jets(F, V);
  const ImmersionJets b = ambient_jets(g, analyze3(g, X));
  double err = 0;
  for (int i = 0; i < g.size(); ++i)
    for (int c = 0; c < 3; ++c) {
      err = std::max(err, std::abs(a[i].Ft[c] - b[i].Ft[c]));
      err = std::max(err, std::abs(a[i].Fpp[c] - b[i].Fpp[c]));
      err = std::max(err, std::abs(a[i].Ftp[c] - b[i].Ftp[c]));
    }
  CHECK(err < 1e-11);
  CHECK(max_abs(domain_coordinates(F, X) - w) < 1e-12);

  // Translations and rotations: delta* X = 0.
  const Matrix& P = F.position();
  for (int k = 0; k < 3; ++k) {
    Eigen::Vector3d e = Eigen::Vector3d::Zero();
    e[k] = 1.0;
    Matrix T(g.size(), 3), Rt(g.size(), 3);
    for (int i = 0; i < g.size(); ++i) {
      T.row(i) = e.transpose();
      Rt.row(i) = e.cross(Eigen::Vector3d(P.row(i).transpose())).transpose();
    }
    for (const Matrix* M : {&T, &Rt}) {
      const VariationField K = variation_from_coordinates(g, domain_coordinates(F, *M));
      CHECK(max_abs(ambient_samples(F, K) - *M) < 1e-12);
      CHECK(max_abs(delta_star(F, K)) < 1e-12);
    }
  }
}

TEST_CASE("delta* against an independent metric variation") {
  const SphereGrid g(8);
  // Normal speed Y20 on the unit sphere: delta* = Y20 gamma.
  const auto S = make_sphere(g, 1.0);
  VariationField V = VariationField::zero(g);
  V.nu = harmonic(g, {{2, 0, 1.0}});
  const Matrix ds = delta_star(S, V);
  const Matrix gam = induced_metric(S);
  CHECK(max_abs(ds - V.nu.samples().asDiagonal() * gam) < 1e-13);

  // General field on a perturbed sphere, compared through ambient coefficients.
  const auto F = make_perturbed(g, 1.0, {{2, 2, 0.2}, {3, 1, -0.1}});
  Matrix Xc = Matrix::Zero(g.num_coeffs(), 3);
  std::mt19937 rng(3);
  std::normal_distribution<double> nd;
  for (int k = 0; k < num_coeffs(5); ++k)
    for (int a = 0; a < 3; ++a) Xc(k, a) = nd(rng) / (k + 1);
  // Jets from ambient coefficients give the same metric variation.
  const ImmersionJets xj = ambient_jets(g, Xc);
  const Matrix hv = half_metric_variation(F, Xc);
  double err = 0;
  for (int i = 0; i < g.size(); ++i) {
    const auto f = F.jet(i);
    err = std::max(err, std::abs(dot(xj[i].Ft, f.Ft) - hv(i, 0)));
    err = std::max(err, std::abs(0.5 * (dot(xj[i].Ft, f.Fp) + dot(f.Ft, xj[i].Fp)) - hv(i, 1)));
    err = std::max(err, std::abs(dot(xj[i].Fp, f.Fp) - hv(i, 2)));
  }
  CHECK(err < 1e-12);
}

TEST_CASE("mean curvature variation") {
  const SphereGrid g(10);
  const auto S = make_sphere(g, 1.0);
  // Unit sphere, normal speed Y_lm: H' = (l(l+1) - 2) Y_lm.
  for (int l : {0, 1, 2, 4}) {
    VariationField V = VariationField::zero(g);
    V.nu = harmonic(g, {{l, 0, 1.0}});
    const Vector hp = mean_curvature_prime(S, V);
    CHECK(max_abs(hp - (l * (l + 1) - 2.0) * V.nu.samples()) < 1e-11);
  }
  // Explicit formula against the dual-number linearization at eps = 1.
  const auto F = make_ellipsoid(g, 1.0, 1.2, 0.8);
  const LinearizedPhi lin(F, 1.0);
  const Vector w = random_coordinates(g, 11, 6);
  const VariationField V = variation_from_coordinates(g, w);
  const Vector y = lin.apply(variation_jets(F, V));
  const Vector hp = mean_curvature_prime(F, V);
  const Vector expect = g.analyze(hp);
  CHECK(max_abs(y.tail(g.num_coeffs()) - expect) < 1e-10);
}

TEST_CASE("linearization matches central differences of the nonlinear map") {
  const SphereGrid g(8);
  const auto F = make_perturbed(g, 1.0, {{2, 1, 0.12}, {3, 0, 0.08}});
  const ImmersionJets base = immersion_jets(F);
  const CodomainProjector proj(g);
  const LiouvilleOptions tight{60, 1e-14, 1e-12};
  for (Variant v : {Variant::Additive, Variant::Multiplicative}) {
    for (double eps : {0.0, 0.4, 1.0}) {
      CAPTURE(eps);
      const LinearizedPhi lin(F, eps, v, tight);
      const VariationField V = variation_from_coordinates(g, random_coordinates(g, 5, 4));
      const ImmersionJets x = variation_jets(F, V);
      const Vector d = lin.apply(x);
      auto fd = [&](double s) {
        const Vector p = phi_coordinates(apply_phi(g, combine(base, s, x), eps, v, tight), proj);
        const Vector m = phi_coordinates(apply_phi(g, combine(base, -s, x), eps, v, tight), proj);
        return Vector((p - m) / (2 * s));
      };
      const double e1 = (fd(1e-3) - d).norm() / d.norm();
      const double e2 = (fd(5e-4) - d).norm() / d.norm();
      CHECK(e1 < 1e-5);
      CHECK(e1 / e2 > 3.0);
      CHECK(e1 / e2 < 5.0);
    }
  }
}

TEST_CASE("round sphere at eps = 1: nine-dimensional kernel, index six") {
  const SphereGrid g(6);
  const auto F = make_sphere(g, 1.0);
  const OperatorMatrix op = assemble_linearization(F, 1.0);
  CHECK(op.matrix.cols() == static_cast<int>(op.domain.size()));
  CHECK(op.matrix.rows() == static_cast<int>(op.codomain.size()));
  CHECK(op.matrix.cols() - op.matrix.rows() == 6);
  Eigen::JacobiSVD<Matrix> svd(op.matrix);
  const Vector s = svd.singularValues();
  int small = 0;
  for (int k = 0; k < s.size(); ++k) small += s[k] < 1e-10;
  const int deficit = static_cast<int>(op.matrix.cols() - s.size());
  CHECK(small + deficit == 9);
  CHECK(s[s.size() - small - 1] > 1e-2);
}

TEST_CASE("principal symbol") {
  const SphereGrid g(6);
  const auto F = make_ellipsoid(g, 1.0, 1.3, 0.9);
  const auto c0 = symbol_context(F, 0.0);
  const auto scan0 = symbol_scan(c0, 36);
  CHECK(scan0.max_singular <= 1e-12);
  for (Variant v : {Variant::Additive, Variant::Multiplicative}) {
    const auto a = symbol_context(F, 0.1, v);
    const auto b = symbol_context(F, 0.05, v);
    CHECK(symbol_scan(a, 36).min_singular > 0.0);
    // Linear in eps for small eps at fixed node and covector.
    for (int node : {0, 17, 40}) {
      const double sa = principal_symbol(a, node, {0.3, -1.1}).min_singular;
      const double sb = principal_symbol(b, node, {0.3, -1.1}).min_singular;
      CHECK(sa / sb == doctest::Approx(2.0).epsilon(0.05));
    }
  }
  // The covector is normalized, so scaling it does not change the symbol.
  const auto c = symbol_context(F, 0.5);
  const Symbol s1 = principal_symbol(c, 5, {1.0, 2.0});
  const Symbol s2 = principal_symbol(c, 5, {3.0, 6.0});
  CHECK((s1.sigma - s2.sigma).cwiseAbs().maxCoeff() < 1e-14);
  CHECK_THROWS_AS(principal_symbol(c, 5, {0.0, 0.0}), DomainError);
}
