#include "immreg/regularized_operator.hpp"

#include "immreg/error.hpp"
#include "immreg/intrinsic.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace immreg {

Variant parse_variant(std::string_view s) {
  if (s == "additive") return Variant::Additive;
  if (s == "multiplicative") return Variant::Multiplicative;
  throw ConfigError("unknown variant '" + std::string(s) + "' (expected additive|multiplicative)");
}

const char* to_string(Variant v) { return v == Variant::Additive ? "additive" : "multiplicative"; }

namespace {

void check_epsilon(double eps) {
  if (!(eps >= 0.0 && eps <= 1.0)) {
    std::ostringstream os;
    os << "epsilon must lie in [0, 1], got " << eps;
    throw DomainError(os.str());
  }
}

template <class T>
struct JetMetric {
  Sym2<T> g;
  std::array<Sym2<T>, 2> dg;
};

// gamma and its first derivatives from the 2-jet of F.
template <class T>
JetMetric<T> jet_metric(const NodeJet<T>& j) {
  JetMetric<T> m;
  m.g = {dot(j.Ft, j.Ft), dot(j.Ft, j.Fp), dot(j.Fp, j.Fp)};
  m.dg[0] = {2.0 * dot(j.Ftt, j.Ft), dot(j.Ftt, j.Fp) + dot(j.Ft, j.Ftp), 2.0 * dot(j.Ftp, j.Fp)};
  m.dg[1] = {2.0 * dot(j.Ftp, j.Ft), dot(j.Ftp, j.Fp) + dot(j.Ft, j.Fpp), 2.0 * dot(j.Fpp, j.Fp)};
  return m;
}

// Round-frame trace-free components of sin(theta) gamma / sqrt(det gamma).
template <class T>
std::array<T, 2> class_pq(const Sym2<T>& g, double s) {
  using std::sqrt;
  const T f = s / sqrt(det(g));
  return {0.5 * (f * g[0] - f * g[2] / (s * s)), f * g[1] / s};
}

NodeJet<Dual> dual_jet(const NodeJet<double>& a, const NodeJet<double>& b) {
  NodeJet<Dual> r;
  for (int c = 0; c < 3; ++c) {
    r.Ft[c] = Dual(a.Ft[c], b.Ft[c]);
    r.Fp[c] = Dual(a.Fp[c], b.Fp[c]);
    r.Ftt[c] = Dual(a.Ftt[c], b.Ftt[c]);
    r.Ftp[c] = Dual(a.Ftp[c], b.Ftp[c]);
    r.Fpp[c] = Dual(a.Fpp[c], b.Fpp[c]);
  }
  return r;
}

// Derivative order list for scalar 3-jets.
constexpr int kOrders[10][2] = {{0, 0}, {1, 0}, {0, 1}, {2, 0}, {1, 1},
                                {0, 2}, {3, 0}, {2, 1}, {1, 2}, {0, 3}};

int order_slot(int dt, int dp) {
  for (int k = 0; k < 10; ++k)
    if (kOrders[k][0] == dt && kOrders[k][1] == dp) return k;
  return -1;
}

using Scalar3 = std::array<double, 10>;

// Jet2 of d^dt_theta d^dp_phi f, given the scalar 3-jet of f.
Jet2 derived_jet(const Scalar3& f, int dt, int dp) {
  Jet2 r;
  r.v = f[order_slot(dt, dp)];
  r.d = {f[order_slot(dt + 1, dp)], f[order_slot(dt, dp + 1)]};
  r.dd = {f[order_slot(dt + 2, dp)], f[order_slot(dt + 1, dp + 1)], f[order_slot(dt, dp + 2)]};
  return r;
}

// Per-node Jet2 frame of an immersion: F_theta, F_phi, N and 1/sin, 1/sin^2.
struct FrameJets {
  std::vector<Vec3<Jet2>> Ft, Fp, N;
  std::vector<Jet2> inv_s, inv_s2;

  explicit FrameJets(const ImmersionMap& F) {
    const SphereGrid& grid = F.grid();
    const int n = grid.size();
    Ft.resize(n);
    Fp.resize(n);
    N.resize(n);
    inv_s.resize(n);
    inv_s2.resize(n);
    for (int i = 0; i < n; ++i) {
      for (int c = 0; c < 3; ++c) {
        Scalar3 f;
        for (int k = 0; k < 10; ++k) f[k] = F.derivative(kOrders[k][0], kOrders[k][1])(i, c);
        Ft[i][c] = derived_jet(f, 1, 0);
        Fp[i][c] = derived_jet(f, 0, 1);
      }
      const Vec3<Jet2> cr = {Ft[i][1] * Fp[i][2] - Ft[i][2] * Fp[i][1],
                             Ft[i][2] * Fp[i][0] - Ft[i][0] * Fp[i][2],
                             Ft[i][0] * Fp[i][1] - Ft[i][1] * Fp[i][0]};
      const Jet2 inv_len = reciprocal(sqrt(cr[0] * cr[0] + cr[1] * cr[1] + cr[2] * cr[2]));
      for (int c = 0; c < 3; ++c) N[i][c] = cr[c] * inv_len;
      const double s = grid.sin_theta()[i], co = grid.cos_theta()[i];
      const Jet2 sj{s, {co, 0.0}, {-s, 0.0, 0.0}};
      inv_s[i] = reciprocal(sj);
      inv_s2[i] = inv_s[i] * inv_s[i];
    }
  }

  // 2-jet of X = v^t F_t + v^p F_p + nu N, with v from the potentials.
  NodeJet<double> variation(int i, const Scalar3& G, const Scalar3& Psi, const Scalar3& nu) const {
    const Jet2 vt = derived_jet(G, 1, 0) - derived_jet(Psi, 0, 1) * inv_s[i];
    const Jet2 vp = derived_jet(G, 0, 1) * inv_s2[i] + derived_jet(Psi, 1, 0) * inv_s[i];
    const Jet2 w = derived_jet(nu, 0, 0);
    NodeJet<double> x;
    for (int c = 0; c < 3; ++c) {
      const Jet2 X = vt * Ft[i][c] + vp * Fp[i][c] + w * N[i][c];
      x.Ft[c] = X.d[0];
      x.Fp[c] = X.d[1];
      x.Ftt[c] = X.dd[0];
      x.Ftp[c] = X.dd[1];
      x.Fpp[c] = X.dd[2];
    }
    return x;
  }
};

Scalar3 field_jet(const HarmonicField& f, int node, std::array<Vector, 10>& cache, bool& filled) {
  if (!filled) {
    for (int k = 0; k < 10; ++k) cache[k] = f.derivative(kOrders[k][0], kOrders[k][1]);
    filled = true;
  }
  Scalar3 r;
  for (int k = 0; k < 10; ++k) r[k] = cache[k][node];
  return r;
}

double lambda_of(int l) { return static_cast<double>(l) * (l + 1); }

}  // namespace

ImmersionJets immersion_jets(const ImmersionMap& F) {
  ImmersionJets out(F.grid().size());
  for (int i = 0; i < F.grid().size(); ++i) out[i] = F.jet(i);
  return out;
}

ImmersionJets ambient_jets(const SphereGrid& grid, const Matrix& coeffs) {
  if (coeffs.rows() != grid.num_coeffs() || coeffs.cols() != 3)
    throw ShapeError("ambient_jets: coefficient matrix must be num_coeffs x 3");
  const Matrix t = grid.synthesis_matrix(1, 0) * coeffs;
  const Matrix p = grid.synthesis_matrix(0, 1) * coeffs;
  const Matrix tt = grid.synthesis_matrix(2, 0) * coeffs;
  const Matrix tp = grid.synthesis_matrix(1, 1) * coeffs;
  const Matrix pp = grid.synthesis_matrix(0, 2) * coeffs;
  ImmersionJets out(grid.size());
  for (int i = 0; i < grid.size(); ++i)
    for (int c = 0; c < 3; ++c) {
      out[i].Ft[c] = t(i, c);
      out[i].Fp[c] = p(i, c);
      out[i].Ftt[c] = tt(i, c);
      out[i].Ftp[c] = tp(i, c);
      out[i].Fpp[c] = pp(i, c);
    }
  return out;
}

EpsilonData apply_phi(const ImmersionMap& F, double eps, Variant variant, const LiouvilleOptions& opt) {
  return apply_phi(F.grid(), immersion_jets(F), eps, variant, opt);
}

EpsilonData apply_phi(const SphereGrid& grid, const ImmersionJets& jets, double eps, Variant variant,
                      const LiouvilleOptions& opt) {
  check_epsilon(eps);
  const int n = grid.size();
  if (static_cast<int>(jets.size()) != n) throw ShapeError("apply_phi: jet count does not match the grid");
  MetricField metric{grid, std::vector<MetricJet<double>>(n)};
  Vector K(n), H(n);
  Matrix gamma(n, 3);
  for (int i = 0; i < n; ++i) {
    const JetMetric<double> m = jet_metric(jets[i]);
    const double s = grid.sin_theta()[i];
    if (!(det(m.g) / (s * s) > 0.0)) {
      std::ostringstream os;
      os << "apply_phi: degenerate metric at node " << i;
      throw RegularityError(os.str());
    }
    metric.jets[i].g = m.g;
    metric.jets[i].dg = m.dg;
    metric.jets[i].d2g = {};
    const NodeGeometry<double> geo = node_geometry(jets[i]);
    K[i] = geo.K;
    H[i] = geo.H;
    for (int c = 0; c < 3; ++c) gamma(i, c) = m.g[c];
  }
  if (variant == Variant::Multiplicative && eps > 0.0 && H.minCoeff() <= 0.0)
    throw DomainError("multiplicative variant needs H > 0 everywhere (min H = " +
                      std::to_string(H.minCoeff()) + ")");
  ConformalData conformal = solve_liouville(metric, K, opt);
  const Vector lambda2 = conformal.lambda2;
  Vector blended;
  if (variant == Variant::Additive)
    blended = (1.0 - eps) * lambda2 + eps * H;
  else
    blended = (lambda2.array().pow(1.0 - eps) * H.array().pow(-eps)).matrix();
  return EpsilonData{eps, variant, conformal_class(gamma), blended, lambda2, H, std::move(conformal)};
}

Matrix class_components(const SphereGrid& grid, const Matrix& class_rep) {
  const int n = grid.size();
  Matrix pq(n, 2);
  for (int i = 0; i < n; ++i) {
    const double s = grid.sin_theta()[i];
    const double c0 = s * class_rep(i, 0), c1 = s * class_rep(i, 1), c2 = s * class_rep(i, 2);
    pq(i, 0) = 0.5 * (c0 - c2 / (s * s));
    pq(i, 1) = c1 / s;
  }
  return pq;
}

CodomainProjector::CodomainProjector(const SphereGrid& grid)
    : grid_(grid), ntensor_(grid.num_coeffs() - 4) {
  const int n = grid.size();
  pe_.resize(n, ntensor_);
  qe_.resize(n, ntensor_);
  const Matrix& Yt = grid.synthesis_matrix(1, 0);
  const Matrix& Yp = grid.synthesis_matrix(0, 1);
  const Matrix& Ytt = grid.synthesis_matrix(2, 0);
  const Matrix& Ytp = grid.synthesis_matrix(1, 1);
  const Matrix& Ypp = grid.synthesis_matrix(0, 2);
  for (int l = 2; l <= grid.L(); ++l) {
    const double lam = lambda_of(l);
    const double norm = std::sqrt(0.5 * lam * (lam - 2.0));
    for (int m = -l; m <= l; ++m) {
      const int k = coeff_index(l, m);
      const int col = k - 4;
      for (int i = 0; i < n; ++i) {
        const double s = grid.sin_theta()[i], cot = grid.cos_theta()[i] / s;
        pe_(i, col) = 0.5 * (Ytt(i, k) - cot * Yt(i, k) - Ypp(i, k) / (s * s)) / norm;
        qe_(i, col) = (Ytp(i, k) - cot * Yp(i, k)) / s / norm;
      }
    }
  }
}

Matrix CodomainProjector::project_class(const Matrix& p, const Matrix& q) const {
  const Vector w2 = 2.0 * grid_.weights();
  const Matrix wp = w2.asDiagonal() * p;
  const Matrix wq = w2.asDiagonal() * q;
  Matrix out(class_size(), p.cols());
  out.topRows(ntensor_) = pe_.transpose() * wp + qe_.transpose() * wq;
  out.bottomRows(ntensor_) = -qe_.transpose() * wp + pe_.transpose() * wq;
  return out;
}

Matrix CodomainProjector::project_scalar(const Matrix& f) const { return grid_.analysis_matrix() * f; }

std::pair<Vector, Vector> CodomainProjector::e_harmonic(int l, int m) const {
  if (l < 2 || l > grid_.L() || std::abs(m) > l) throw DomainError("e_harmonic: need 2 <= l <= L, |m| <= l");
  const int col = coeff_index(l, m) - 4;
  return {pe_.col(col), qe_.col(col)};
}

Vector phi_coordinates(const EpsilonData& d, const CodomainProjector& proj) {
  const Matrix pq = class_components(proj.grid(), d.class_rep);
  Vector out(proj.size());
  out.head(proj.class_size()) = proj.project_class(pq.col(0), pq.col(1));
  out.tail(proj.scalar_size()) = proj.project_scalar(d.blended);
  return out;
}

VariationField VariationField::zero(const SphereGrid& grid) {
  return {HarmonicField::zero(grid), HarmonicField::zero(grid), HarmonicField::zero(grid)};
}

std::array<Vector, 2> VariationField::tangent() const {
  const Vector& s = potential.grid().sin_theta();
  const Vector vt = potential.derivative(1, 0) - (stream.derivative(0, 1).array() / s.array()).matrix();
  const Vector vp = (potential.derivative(0, 1).array() / s.array().square() +
                     stream.derivative(1, 0).array() / s.array())
                        .matrix();
  return {vt, vp};
}

Matrix ambient_samples(const ImmersionMap& F, const VariationField& V) {
  const auto v = V.tangent();
  const SurfaceGeometry geo = second_form(F);
  const Matrix& Ft = F.derivative(1, 0);
  const Matrix& Fp = F.derivative(0, 1);
  return v[0].asDiagonal() * Ft + v[1].asDiagonal() * Fp + V.nu.samples().asDiagonal() * geo.normal;
}

ImmersionJets variation_jets(const ImmersionMap& F, const VariationField& V) {
  const FrameJets frame(F);
  std::array<Vector, 10> cg, cs, cn;
  bool fg = false, fs = false, fn = false;
  ImmersionJets out(F.grid().size());
  for (int i = 0; i < F.grid().size(); ++i)
    out[i] = frame.variation(i, field_jet(V.potential, i, cg, fg), field_jet(V.stream, i, cs, fs),
                             field_jet(V.nu, i, cn, fn));
  return out;
}

Matrix delta_star(const ImmersionMap& F, const VariationField& V) {
  const ImmersionJets x = variation_jets(F, V);
  Matrix out(F.grid().size(), 3);
  for (int i = 0; i < F.grid().size(); ++i) {
    const NodeJet<double> f = F.jet(i);
    out(i, 0) = dot(x[i].Ft, f.Ft);
    out(i, 1) = 0.5 * (dot(x[i].Ft, f.Fp) + dot(f.Ft, x[i].Fp));
    out(i, 2) = dot(x[i].Fp, f.Fp);
  }
  return out;
}

Vector mean_curvature_prime(const ImmersionMap& F, const VariationField& V) {
  const SphereGrid& grid = F.grid();
  const auto v = V.tangent();
  const SurfaceGeometry geo = second_form(F);
  const Vector A2 = geo.norm_A2();
  const Vector nt = V.nu.derivative(1, 0), np = V.nu.derivative(0, 1);
  const Vector ntt = V.nu.derivative(2, 0), ntp = V.nu.derivative(1, 1), npp = V.nu.derivative(0, 2);
  Vector out(grid.size());
  for (int i = 0; i < grid.size(); ++i) {
    const NodeJet<double> f = F.jet(i);
    const JetMetric<double> m = jet_metric(f);
    const auto gam = christoffel(m.g, m.dg);
    const Sym2<double> hess = {ntt[i] - gam[0][0] * nt[i] - gam[1][0] * np[i],
                               ntp[i] - gam[0][1] * nt[i] - gam[1][1] * np[i],
                               npp[i] - gam[0][2] * nt[i] - gam[1][2] * np[i]};
    const double lap = trace_with(inverse(m.g), hess);
    // dH along theta and phi from the 3-jet of F.
    double dH[2];
    for (int k = 0; k < 2; ++k) {
      const int a = k == 0 ? 1 : 0, b = k == 0 ? 0 : 1;
      NodeJet<Dual> j;
      for (int c = 0; c < 3; ++c) {
        j.Ft[c] = Dual(f.Ft[c], F.derivative(1 + a, b)(i, c));
        j.Fp[c] = Dual(f.Fp[c], F.derivative(a, 1 + b)(i, c));
        j.Ftt[c] = Dual(f.Ftt[c], F.derivative(2 + a, b)(i, c));
        j.Ftp[c] = Dual(f.Ftp[c], F.derivative(1 + a, 1 + b)(i, c));
        j.Fpp[c] = Dual(f.Fpp[c], F.derivative(a, 2 + b)(i, c));
      }
      dH[k] = node_geometry(j).H.d;
    }
    out[i] = -lap - A2[i] * V.nu.samples()[i] + v[0][i] * dH[0] + v[1][i] * dH[1];
  }
  return out;
}

std::string BasisLabel::str() const {
  const char* name = "";
  switch (kind) {
    case Kind::Gradient: name = "grad"; break;
    case Kind::Curl: name = "curl"; break;
    case Kind::Normal: name = "nu"; break;
    case Kind::ClassE: name = "E"; break;
    case Kind::ClassB: name = "B"; break;
    case Kind::Scalar: name = "scalar"; break;
  }
  return std::string(name) + "(" + std::to_string(l) + "," + std::to_string(m) + ")";
}

namespace {
void push_family(std::vector<BasisLabel>& out, BasisLabel::Kind kind, int lmin, int L) {
  for (int l = lmin; l <= L; ++l)
    for (int m = -l; m <= l; ++m) out.push_back({kind, l, m});
}
}  // namespace

std::vector<BasisLabel> domain_basis(int L) {
  std::vector<BasisLabel> out;
  push_family(out, BasisLabel::Kind::Gradient, 1, L);
  push_family(out, BasisLabel::Kind::Curl, 1, L);
  push_family(out, BasisLabel::Kind::Normal, 0, L);
  return out;
}

std::vector<BasisLabel> codomain_basis(int L) {
  std::vector<BasisLabel> out;
  push_family(out, BasisLabel::Kind::ClassE, 2, L);
  push_family(out, BasisLabel::Kind::ClassB, 2, L);
  push_family(out, BasisLabel::Kind::Scalar, 0, L);
  return out;
}

VariationField variation_from_coordinates(const SphereGrid& grid, const Vector& w) {
  const int nc = grid.num_coeffs();
  if (w.size() != 3 * nc - 2) throw ShapeError("variation_from_coordinates: wrong coordinate count");
  Vector g = Vector::Zero(nc), s = Vector::Zero(nc);
  for (int k = 1; k < nc; ++k) {
    const int l = static_cast<int>(std::sqrt(static_cast<double>(k)));
    const double r = 1.0 / std::sqrt(lambda_of(l));
    g[k] = r * w[k - 1];
    s[k] = r * w[nc - 1 + k - 1];
  }
  return {HarmonicField(grid, g), HarmonicField(grid, s), HarmonicField(grid, w.tail(nc))};
}

Vector domain_coordinates(const ImmersionMap& F, const Matrix& ambient) {
  const SphereGrid& grid = F.grid();
  const int n = grid.size(), nc = grid.num_coeffs();
  if (ambient.rows() != n || ambient.cols() != 3) throw ShapeError("domain_coordinates: need nodes x 3 samples");
  const SurfaceGeometry geo = second_form(F);
  const Matrix& Ft = F.derivative(1, 0);
  const Matrix& Fp = F.derivative(0, 1);
  Vector vt(n), vp(n), nu(n);
  for (int i = 0; i < n; ++i) {
    const Eigen::Vector3d x = ambient.row(i).transpose();
    nu[i] = x.dot(geo.normal.row(i).transpose());
    const Sym2<double> gi = inverse(Sym2<double>{geo.gamma(i, 0), geo.gamma(i, 1), geo.gamma(i, 2)});
    const double a = x.dot(Ft.row(i).transpose()), b = x.dot(Fp.row(i).transpose());
    vt[i] = gi[0] * a + gi[1] * b;
    vp[i] = gi[1] * a + gi[2] * b;
  }
  const Vector& w = grid.weights();
  const Vector& s = grid.sin_theta();
  const Matrix& Yt = grid.synthesis_matrix(1, 0);
  const Matrix& Yp = grid.synthesis_matrix(0, 1);
  const Vector grad = Yt.transpose() * w.cwiseProduct(vt) + Yp.transpose() * w.cwiseProduct(vp);
  const Vector curl = -Yp.transpose() * w.cwiseProduct(vt).cwiseQuotient(s) +
                      Yt.transpose() * w.cwiseProduct(vp).cwiseProduct(s);
  Vector out(3 * nc - 2);
  for (int k = 1; k < nc; ++k) {
    const int l = static_cast<int>(std::sqrt(static_cast<double>(k)));
    const double r = 1.0 / std::sqrt(lambda_of(l));
    out[k - 1] = r * grad[k];
    out[nc - 1 + k - 1] = r * curl[k];
  }
  out.tail(nc) = grid.analyze(nu);
  return out;
}

LinearizedPhi::LinearizedPhi(const ImmersionMap& F, double eps, Variant variant, const LiouvilleOptions& opt)
    : LinearizedPhi(F.grid(), immersion_jets(F), eps, variant, opt) {}

LinearizedPhi::LinearizedPhi(const SphereGrid& grid, const ImmersionJets& jets, double eps, Variant variant,
                             const LiouvilleOptions& opt)
    : grid_(grid),
      jets_(jets),
      eps_(eps),
      variant_(variant),
      base_(apply_phi(grid, jets, eps, variant, opt)),
      proj_(grid) {
  init(opt);
}

void LinearizedPhi::init(const LiouvilleOptions& opt) {
  const int n = grid_.size();
  metric_.resize(n);
  Vector K(n);
  for (int i = 0; i < n; ++i) {
    const JetMetric<double> m = jet_metric(jets_[i]);
    metric_[i].g = m.g;
    metric_[i].dg = m.dg;
    metric_[i].d2g = {};
    K[i] = node_geometry(jets_[i]).K;
  }
  if (eps_ < 1.0) liouville_.emplace(MetricField{grid_, metric_}, K, base_.conformal.phi, opt.min_rcond);
}

Matrix LinearizedPhi::apply(int ncols, const std::function<NodeJet<double>(int, int)>& xjet) const {
  const int n = grid_.size();
  Matrix dp(n, ncols), dq(n, ncols), dH(n, ncols), dR(n, ncols);
  std::vector<MetricJet<double>> dm(n);
  Vector dK(n);
  for (int col = 0; col < ncols; ++col) {
    for (int i = 0; i < n; ++i) {
      const NodeJet<Dual> j = dual_jet(jets_[i], xjet(i, col));
      const NodeGeometry<Dual> geo = node_geometry(j);
      const auto pq = class_pq(geo.gamma, grid_.sin_theta()[i]);
      dp(i, col) = pq[0].d;
      dq(i, col) = pq[1].d;
      dH(i, col) = geo.H.d;
      if (liouville_) {
        const JetMetric<Dual> m = jet_metric(j);
        for (int s = 0; s < 3; ++s) {
          dm[i].g[s] = m.g[s].d;
          dm[i].dg[0][s] = m.dg[0][s].d;
          dm[i].dg[1][s] = m.dg[1][s].d;
        }
        dK[i] = geo.K.d;
      }
    }
    if (liouville_) dR.col(col) = liouville_->residual_variation(dm, dK);
  }
  Matrix dB;
  const Vector& H = base_.H;
  if (!liouville_) {
    // eps == 1: the conformal factor carries no weight.
    dB = variant_ == Variant::Additive ? dH : Matrix((-base_.blended.cwiseQuotient(H)).asDiagonal() * dH);
  } else {
    const Matrix dl = liouville_->lambda2_variation(dR);
    if (variant_ == Variant::Additive) {
      dB = (1.0 - eps_) * dl + eps_ * dH;
    } else {
      const Vector a = (1.0 - eps_) * base_.blended.cwiseQuotient(base_.lambda2);
      const Vector b = -eps_ * base_.blended.cwiseQuotient(H);
      dB = a.asDiagonal() * dl + b.asDiagonal() * dH;
    }
  }
  Matrix out(proj_.size(), ncols);
  out.topRows(proj_.class_size()) = proj_.project_class(dp, dq);
  out.bottomRows(proj_.scalar_size()) = proj_.project_scalar(dB);
  return out;
}

Vector LinearizedPhi::apply(const ImmersionJets& x) const {
  if (static_cast<int>(x.size()) != grid_.size()) throw ShapeError("LinearizedPhi: jet count mismatch");
  return apply(1, [&](int i, int) { return x[i]; });
}

OperatorMatrix assemble_linearization(const ImmersionMap& F, double eps, Variant variant,
                                      const LiouvilleOptions& opt) {
  return assemble_linearization(F, LinearizedPhi(F, eps, variant, opt));
}

OperatorMatrix assemble_linearization(const ImmersionMap& F, const LinearizedPhi& lin) {
  const SphereGrid& grid = F.grid();
  const int L = grid.L();
  const FrameJets frame(F);
  OperatorMatrix op;
  op.domain = domain_basis(L);
  op.codomain = codomain_basis(L);
  op.epsilon = lin.base().epsilon;
  op.variant = lin.base().variant;
  std::array<const Matrix*, 10> S;
  for (int k = 0; k < 10; ++k) S[k] = &grid.synthesis_matrix(kOrders[k][0], kOrders[k][1]);
  const Scalar3 zero{};
  std::vector<double> scale(op.domain.size());
  std::vector<int> coeff(op.domain.size());
  for (size_t c = 0; c < op.domain.size(); ++c) {
    const auto& b = op.domain[c];
    coeff[c] = coeff_index(b.l, b.m);
    scale[c] = b.kind == BasisLabel::Kind::Normal ? 1.0 : 1.0 / std::sqrt(lambda_of(b.l));
  }
  op.matrix = lin.apply(static_cast<int>(op.domain.size()), [&](int i, int c) {
    Scalar3 f;
    for (int k = 0; k < 10; ++k) f[k] = scale[c] * (*S[k])(i, coeff[c]);
    switch (op.domain[c].kind) {
      case BasisLabel::Kind::Gradient: return frame.variation(i, f, zero, zero);
      case BasisLabel::Kind::Curl: return frame.variation(i, zero, f, zero);
      default: return frame.variation(i, zero, zero, f);
    }
  });
  return op;
}

SymbolContext symbol_context(const ImmersionMap& F, double eps, Variant variant) {
  const EpsilonData d = apply_phi(F, eps, variant);
  SymbolContext ctx;
  ctx.gamma = induced_metric(F);
  ctx.H = d.H;
  ctx.lambda2 = d.lambda2;
  ctx.blended = d.blended;
  ctx.epsilon = eps;
  ctx.variant = variant;
  return ctx;
}

Symbol principal_symbol_frame(const SymbolContext& ctx, int node, double x1, double x2) {
  if (node < 0 || node >= ctx.H.size()) throw DomainError("principal_symbol: node out of range");
  const double r = std::hypot(x1, x2);
  if (!(r > 0.0)) throw DomainError("principal_symbol: covector must be nonzero");
  x1 /= r;
  x2 /= r;
  Symbol s;
  s.sigma.setZero();
  s.sigma(0, 0) = 0.5 * x1;
  s.sigma(0, 1) = -0.5 * x2;
  s.sigma(1, 0) = 0.5 * x2;
  s.sigma(1, 1) = 0.5 * x1;
  const double eps = ctx.epsilon;
  if (eps > 0.0) {
    s.sigma(2, 2) = ctx.variant == Variant::Additive ? eps : -eps * ctx.blended[node] / ctx.H[node];
  } else {
    s.sigma(2, 0) = ctx.lambda2[node] * x1;
    s.sigma(2, 1) = ctx.lambda2[node] * x2;
  }
  s.min_singular = Eigen::JacobiSVD<Eigen::Matrix3d>(s.sigma).singularValues().minCoeff();
  return s;
}

Symbol principal_symbol(const SymbolContext& ctx, int node, const std::array<double, 2>& xi) {
  if (node < 0 || node >= ctx.gamma.rows()) throw DomainError("principal_symbol: node out of range");
  // Orthonormal-frame components: gamma = L L^T, xi_on = L^{-1} xi.
  const double l00 = std::sqrt(ctx.gamma(node, 0));
  const double l10 = ctx.gamma(node, 1) / l00;
  const double l11 = std::sqrt(ctx.gamma(node, 2) - l10 * l10);
  const double y0 = xi[0] / l00;
  const double y1 = (xi[1] - l10 * y0) / l11;
  return principal_symbol_frame(ctx, node, y0, y1);
}

Symbol principal_symbol(const ImmersionMap& F, int node, const std::array<double, 2>& xi, double eps,
                        Variant variant) {
  return principal_symbol(symbol_context(F, eps, variant), node, xi);
}

SymbolScan symbol_scan(const SymbolContext& ctx, int directions) {
  if (directions < 1) throw ConfigError("symbol scan: need at least one direction");
  SymbolScan scan;
  scan.directions = directions;
  scan.min_singular = std::numeric_limits<double>::infinity();
  for (int i = 0; i < ctx.H.size(); ++i)
    for (int k = 0; k < directions; ++k) {
      const double a = 2 * std::numbers::pi * k / directions;
      const double s = principal_symbol_frame(ctx, i, std::cos(a), std::sin(a)).min_singular;
      if (s < scan.min_singular) {
        scan.min_singular = s;
        scan.worst_node = i;
        scan.worst_angle = a;
      }
      scan.max_singular = std::max(scan.max_singular, s);
    }
  return scan;
}

}  // namespace immreg
