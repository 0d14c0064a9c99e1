#include "immreg/spectral.hpp"

#include "immreg/error.hpp"

#include <cmath>
#include <mutex>
#include <numbers>
#include <string>

namespace immreg {

namespace {

constexpr double kPi = std::numbers::pi;

// Value and first three derivatives of a function of theta.
struct ThetaJet {
  std::array<double, 4> d{};
};

ThetaJet mul(const ThetaJet& f, const ThetaJet& g) {
  ThetaJet r;
  r.d[0] = f.d[0] * g.d[0];
  r.d[1] = f.d[1] * g.d[0] + f.d[0] * g.d[1];
  r.d[2] = f.d[2] * g.d[0] + 2 * f.d[1] * g.d[1] + f.d[0] * g.d[2];
  r.d[3] = f.d[3] * g.d[0] + 3 * f.d[2] * g.d[1] + 3 * f.d[1] * g.d[2] + f.d[0] * g.d[3];
  return r;
}

ThetaJet axpby(double a, const ThetaJet& x, double b, const ThetaJet& y) {
  ThetaJet r;
  for (int k = 0; k < 4; ++k) r.d[k] = a * x.d[k] + b * y.d[k];
  return r;
}

double trig(int m, int q, double phi) {
  if (m == 0) return q == 0 ? 1.0 : 0.0;
  const int am = std::abs(m);
  const double scale = std::pow(static_cast<double>(am), q);
  const double arg = am * phi + q * kPi / 2;
  return m > 0 ? scale * std::cos(arg) : scale * std::sin(arg);
}

double harmonic_norm(int m) { return m == 0 ? 1.0 / std::sqrt(2 * kPi) : 1.0 / std::sqrt(kPi); }

int cache_slot(int dt, int dp) { return dt * 4 + dp; }

}  // namespace

void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
  x.assign(n, 0.0);
  w.assign(n, 0.0);
  for (int i = 0; i < n; ++i) {
    double z = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = z;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2 * k - 1) * z * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) p0 = 1.0;
      dp = n * (z * p1 - p0) / (z * z - 1.0);
      const double dz = p1 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    // Recompute derivative at the converged root.
    double p0 = 1.0, p1 = z;
    for (int k = 2; k <= n; ++k) {
      const double p2 = ((2 * k - 1) * z * p1 - (k - 1) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    dp = n * (z * p1 - p0) / (z * z - 1.0);
    x[i] = z;
    w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
  }
}

struct SphereGrid::Impl {
  int L = 0;
  int nlat = 0;
  int nlon = 0;
  std::vector<double> ring_theta;
  std::vector<double> ring_weight;
  std::vector<double> lon_phi;
  Vector theta, phi, sin_theta, cos_theta, weights;
  // legendre[((k * nlat + ring) * (L+1) + l) * (L+1) + m], m >= 0
  std::vector<double> legendre;
  // trig[(q * (2L+1) + m + L) * nlon + j]
  std::vector<double> trig;

  std::array<std::once_flag, 16> synth_once;
  std::array<Matrix, 16> synth;
  std::once_flag analysis_once;
  Matrix analysis;

  double leg(int k, int ring, int l, int m) const {
    return legendre[((static_cast<size_t>(k) * nlat + ring) * (L + 1) + l) * (L + 1) + m];
  }
  double tr(int q, int m, int j) const {
    return trig[(static_cast<size_t>(q) * (2 * L + 1) + m + L) * nlon + j];
  }
};

SphereGrid::SphereGrid(int L) : impl_(std::make_shared<Impl>()) {
  if (L < 1) throw DomainError("SphereGrid: L must be >= 1, got " + std::to_string(L));
  auto& g = *impl_;
  g.L = L;
  g.nlat = L + 1;
  g.nlon = 2 * L + 2;
  std::vector<double> x, w;
  gauss_legendre(g.nlat, x, w);
  g.ring_theta.resize(g.nlat);
  g.ring_weight.resize(g.nlat);
  for (int i = 0; i < g.nlat; ++i) {
    g.ring_theta[i] = std::acos(x[i]);
    g.ring_weight[i] = w[i] * 2 * kPi / g.nlon;
  }
  g.lon_phi.resize(g.nlon);
  for (int j = 0; j < g.nlon; ++j) g.lon_phi[j] = 2 * kPi * j / g.nlon;

  const int n = g.nlat * g.nlon;
  g.theta.resize(n);
  g.phi.resize(n);
  g.sin_theta.resize(n);
  g.cos_theta.resize(n);
  g.weights.resize(n);
  for (int i = 0; i < g.nlat; ++i) {
    for (int j = 0; j < g.nlon; ++j) {
      const int k = i * g.nlon + j;
      g.theta[k] = g.ring_theta[i];
      g.phi[k] = g.lon_phi[j];
      g.sin_theta[k] = std::sqrt(1.0 - x[i] * x[i]);
      g.cos_theta[k] = x[i];
      g.weights[k] = g.ring_weight[i];
    }
  }

  // Normalized associated Legendre functions and their theta-derivatives via
  // the differentiated three-term recurrence; no division by sin(theta).
  g.legendre.assign(static_cast<size_t>(4) * g.nlat * (L + 1) * (L + 1), 0.0);
  for (int i = 0; i < g.nlat; ++i) {
    const double th = g.ring_theta[i];
    const ThetaJet s{{std::sin(th), std::cos(th), -std::sin(th), -std::cos(th)}};
    const ThetaJet c{{std::cos(th), -std::sin(th), -std::cos(th), std::sin(th)}};
    ThetaJet pmm{{std::sqrt(0.5), 0, 0, 0}};
    for (int m = 0; m <= L; ++m) {
      if (m > 0) {
        pmm = mul(pmm, s);
        const double f = std::sqrt((2.0 * m + 1) / (2.0 * m));
        for (auto& v : pmm.d) v *= f;
      }
      std::vector<ThetaJet> col(L + 1);
      col[m] = pmm;
      if (m + 1 <= L) {
        col[m + 1] = mul(c, pmm);
        for (auto& v : col[m + 1].d) v *= std::sqrt(2.0 * m + 3);
      }
      for (int l = m + 2; l <= L; ++l) {
        const double a = std::sqrt((4.0 * l * l - 1) / (static_cast<double>(l) * l - m * m));
        const double b = std::sqrt(((l - 1.0) * (l - 1.0) - m * m) * (2.0 * l + 1) /
                                   ((2.0 * l - 3) * (static_cast<double>(l) * l - m * m)));
        col[l] = axpby(a, mul(c, col[l - 1]), -b, col[l - 2]);
      }
      for (int l = m; l <= L; ++l)
        for (int k = 0; k < 4; ++k)
          g.legendre[((static_cast<size_t>(k) * g.nlat + i) * (L + 1) + l) * (L + 1) + m] =
              col[l].d[k];
    }
  }

  g.trig.assign(static_cast<size_t>(4) * (2 * L + 1) * g.nlon, 0.0);
  for (int q = 0; q < 4; ++q)
    for (int m = -L; m <= L; ++m)
      for (int j = 0; j < g.nlon; ++j)
        g.trig[(static_cast<size_t>(q) * (2 * L + 1) + m + L) * g.nlon + j] =
            trig(m, q, g.lon_phi[j]);
}

int SphereGrid::L() const { return impl_->L; }
int SphereGrid::nlat() const { return impl_->nlat; }
int SphereGrid::nlon() const { return impl_->nlon; }
int SphereGrid::size() const { return impl_->nlat * impl_->nlon; }
double SphereGrid::ring_theta(int ring) const { return impl_->ring_theta[ring]; }
double SphereGrid::lon_phi(int j) const { return impl_->lon_phi[j]; }
const Vector& SphereGrid::theta() const { return impl_->theta; }
const Vector& SphereGrid::phi() const { return impl_->phi; }
const Vector& SphereGrid::sin_theta() const { return impl_->sin_theta; }
const Vector& SphereGrid::cos_theta() const { return impl_->cos_theta; }
const Vector& SphereGrid::weights() const { return impl_->weights; }

double SphereGrid::legendre(int ring, int l, int m, int k) const {
  return impl_->leg(k, ring, l, std::abs(m));
}

Vector SphereGrid::synthesize(const Vector& coeffs, int dtheta, int dphi) const {
  const auto& g = *impl_;
  if (coeffs.size() != num_coeffs())
    throw ShapeError("synthesize: expected " + std::to_string(num_coeffs()) +
                     " coefficients for L=" + std::to_string(g.L) + ", got " +
                     std::to_string(coeffs.size()));
  if (dtheta < 0 || dphi < 0 || dtheta + dphi > 3)
    throw DomainError("synthesize: derivative order out of range");
  const int L = g.L;
  Vector out = Vector::Zero(size());
  std::vector<double> ring_sum(2 * L + 1);
  for (int i = 0; i < g.nlat; ++i) {
    for (int m = -L; m <= L; ++m) {
      double s = 0.0;
      for (int l = std::abs(m); l <= L; ++l)
        s += coeffs[coeff_index(l, m)] * g.leg(dtheta, i, l, std::abs(m));
      ring_sum[m + L] = s * harmonic_norm(m);
    }
    for (int j = 0; j < g.nlon; ++j) {
      double v = 0.0;
      for (int m = -L; m <= L; ++m) v += ring_sum[m + L] * g.tr(dphi, m, j);
      out[i * g.nlon + j] = v;
    }
  }
  return out;
}

Vector SphereGrid::analyze(const Vector& samples) const {
  const auto& g = *impl_;
  if (samples.size() != size())
    throw ShapeError("analyze: expected " + std::to_string(size()) + " samples, got " +
                     std::to_string(samples.size()));
  const int L = g.L;
  Vector out = Vector::Zero(num_coeffs());
  std::vector<double> fourier(2 * L + 1);
  for (int i = 0; i < g.nlat; ++i) {
    for (int m = -L; m <= L; ++m) {
      double s = 0.0;
      for (int j = 0; j < g.nlon; ++j) s += samples[i * g.nlon + j] * g.tr(0, m, j);
      fourier[m + L] = s * harmonic_norm(m) * g.ring_weight[i];
    }
    for (int l = 0; l <= L; ++l)
      for (int m = -l; m <= l; ++m)
        out[coeff_index(l, m)] += fourier[m + L] * g.leg(0, i, l, std::abs(m));
  }
  return out;
}

const Matrix& SphereGrid::synthesis_matrix(int dtheta, int dphi) const {
  if (dtheta < 0 || dphi < 0 || dtheta + dphi > 3)
    throw DomainError("synthesis_matrix: derivative order out of range");
  auto& g = *impl_;
  const int slot = cache_slot(dtheta, dphi);
  std::call_once(g.synth_once[slot], [&] {
    const int L = g.L;
    Matrix M(size(), num_coeffs());
    for (int i = 0; i < g.nlat; ++i)
      for (int j = 0; j < g.nlon; ++j)
        for (int l = 0; l <= L; ++l)
          for (int m = -l; m <= l; ++m)
            M(i * g.nlon + j, coeff_index(l, m)) =
                g.leg(dtheta, i, l, std::abs(m)) * harmonic_norm(m) * g.tr(dphi, m, j);
    g.synth[slot] = std::move(M);
  });
  return g.synth[slot];
}

const Matrix& SphereGrid::analysis_matrix() const {
  auto& g = *impl_;
  std::call_once(g.analysis_once, [&] {
    g.analysis = synthesis_matrix(0, 0).transpose() * g.weights.asDiagonal();
  });
  return g.analysis;
}

HarmonicField::HarmonicField(const SphereGrid& grid, Vector coeffs) : grid_(grid) {
  set_coeffs(std::move(coeffs));
}

HarmonicField HarmonicField::zero(const SphereGrid& grid) {
  return HarmonicField(grid, Vector::Zero(grid.num_coeffs()));
}

HarmonicField HarmonicField::from_samples(const SphereGrid& grid, const Vector& samples) {
  return HarmonicField(grid, grid.analyze(samples));
}

void HarmonicField::set_coeffs(Vector coeffs) {
  samples_ = grid_.synthesize(coeffs);
  coeffs_ = std::move(coeffs);
}

HarmonicField& HarmonicField::operator+=(const HarmonicField& o) {
  if (!grid_.same_as(o.grid_)) throw ShapeError("HarmonicField: grid mismatch in sum");
  coeffs_ += o.coeffs_;
  samples_ += o.samples_;
  return *this;
}

HarmonicField& HarmonicField::operator*=(double s) {
  coeffs_ *= s;
  samples_ *= s;
  return *this;
}

Vector synthesize(const Vector& coeffs, const SphereGrid& grid) { return grid.synthesize(coeffs); }
Vector analyze(const Vector& samples, const SphereGrid& grid) { return grid.analyze(samples); }

TangentSamples grad_sphere(const HarmonicField& f) {
  TangentSamples g;
  g.theta = f.derivative(1, 0);
  g.phi = f.derivative(0, 1).cwiseQuotient(f.grid().sin_theta());
  return g;
}

HarmonicField laplace_beltrami_round(const HarmonicField& f) {
  Vector c = f.coeffs();
  const int L = f.grid().L();
  for (int l = 0; l <= L; ++l)
    for (int m = -l; m <= l; ++m) c[coeff_index(l, m)] *= -static_cast<double>(l) * (l + 1);
  return HarmonicField(f.grid(), std::move(c));
}

double integrate(const SphereGrid& grid, const Vector& samples) {
  return grid.weights().dot(samples);
}

}  // namespace immreg
