// Acceptance run: one PASS/FAIL line per criterion, tolerances pinned here.
// Exit status is the number of failed criteria.

#include "immreg/continuation.hpp"
#include "immreg/shapes.hpp"
#include "immreg/uniformization.hpp"

#include <cmath>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>

using namespace immreg;

namespace {

int failures = 0;

void report(int n, const std::string& what, bool ok, const std::string& detail) {
  std::cout << (ok ? "PASS" : "FAIL") << " criterion " << n << ": " << what << " | " << detail << std::endl;
  if (!ok) ++failures;
}

void run(int n, const std::string& what, const std::function<bool(std::ostringstream&)>& body) {
  std::ostringstream os;
  os.precision(3);
  bool ok = false;
  try {
    ok = body(os);
  } catch (const std::exception& e) {
    os << "exception: " << e.what();
  }
  report(n, what, ok, os.str());
}

std::array<double, 3> random_unit(std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  Eigen::Vector3d v(nd(rng), nd(rng), nd(rng));
  v.normalize();
  return {v[0], v[1], v[2]};
}

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

// Random domain coordinates with decaying weights on degrees <= lmax.
Vector random_coordinates(const SphereGrid& g, std::mt19937_64& rng, int lmax) {
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

}  // namespace

int main() {
  std::cout.precision(3);

  run(1, "Gauss: ellipsoid (1,1.2,0.8) |K_int - det S| <= 1e-6 at L=32, >= 4x drop from L=16", [](auto& os) {
    const double e16 = gauss_check(make_ellipsoid(SphereGrid(16), 1.0, 1.2, 0.8));
    const double e32 = gauss_check(make_ellipsoid(SphereGrid(32), 1.0, 1.2, 0.8));
    os << "L16 " << e16 << ", L32 " << e32 << ", ratio " << e16 / e32;
    return e32 <= 1e-6 && e16 / e32 >= 4.0;
  });

  run(2, "Darboux: residual <= 1e-6 at L=32 for e_z and 2 random e; >= 4x drop per step L=8,16,24,32",
      [](auto& os) {
        std::mt19937_64 rng(2024);
        const std::vector<std::array<double, 3>> es{{0.0, 0.0, 1.0}, random_unit(rng), random_unit(rng)};
        bool ok = true;
        for (const auto& e : es) {
          double prev = INFINITY;
          os << "[";
          for (int L : {8, 16, 24, 32}) {
            const double r = darboux_residual(make_ellipsoid(SphereGrid(L), 1.0, 1.2, 0.8), e);
            os << (L == 8 ? "" : " ") << r;
            if (!(r * 4.0 <= prev)) ok = false;
            prev = r;
          }
          os << "] ";
          if (!(prev <= 1e-6)) ok = false;
        }
        return ok;
      });

  run(3, "Ellipticity: min symbol sv > 0 over nodes x 36 dirs for eps in {0.1,0.25,0.5,1}; <= 1e-12 in every dir at 0",
      [](auto& os) {
        const SphereGrid g(12);
        bool ok = true;
        double lo = INFINITY, hi0 = 0.0;
        for (const auto& F : {make_ellipsoid(g, 1.0, 1.2, 0.8), make_sphere(g, 1.0)})
          for (Variant v : {Variant::Additive, Variant::Multiplicative}) {
            for (double eps : {0.1, 0.25, 0.5, 1.0}) {
              const auto s = symbol_scan(symbol_context(F, eps, v), 36);
              lo = std::min(lo, s.min_singular);
              if (!(s.min_singular > 0.0)) ok = false;
            }
            const auto s0 = symbol_scan(symbol_context(F, 0.0, v), 36);
            hi0 = std::max(hi0, s0.max_singular);
            if (!(s0.max_singular <= 1e-12)) ok = false;
          }
        os << "min over eps>0: " << lo << ", max over nodes x dirs at eps=0: " << hi0;
        return ok;
      });

  run(4, "Index at round sphere eps=1: 9/3/6, gap >= 1e3, based 3/3/0, L in {8,12,16}", [](auto& os) {
    bool ok = true;
    for (int L : {8, 12, 16}) {
      const SphereGrid g(L);
      const auto F = make_sphere(g, 1.0);
      const auto op = assemble_linearization(F, 1.0);
      const auto r = svd_report(op);
      const auto b = based_report(op, killing_modes(F));
      os << "L" << L << ": " << r.kernel_dim << "/" << r.cokernel_dim << "/" << r.index << " gap " << r.gap_ratio
         << " based " << b.kernel_dim << "/" << b.cokernel_dim << "/" << b.index << "; ";
      ok = ok && r.kernel_dim == 9 && r.cokernel_dim == 3 && r.index == 6 && r.gap_ratio >= 1e3 &&
           b.kernel_dim == 3 && b.cokernel_dim == 3 && b.index == 0;
    }
    return ok;
  });

  run(5, "Kernel persistence: kernel >= 6 and index 6 at round sphere, eps in {1,0.5,0.25,0.1}", [](auto& os) {
    const SphereGrid g(8);
    bool ok = true;
    for (const auto& r : kernel_vs_epsilon(make_sphere(g, 1.0), {1.0, 0.5, 0.25, 0.1})) {
      os << "eps " << r.epsilon << ": " << r.kernel_dim << "/" << r.cokernel_dim << "/" << r.index << "; ";
      ok = ok && r.kernel_dim >= 6 && r.index == 6;
    }
    return ok;
  });

  run(6, "Kernel modes: overlap >= 1-1e-6 with Killing+conformal+normal span; cokernel on scalar degree 1",
      [](auto& os) {
        const SphereGrid g(8);
        const auto F = make_sphere(g, 1.0);
        const auto op = assemble_linearization(F, 1.0);
        const auto r = svd_report(op);
        const auto km = identify_kernel(F, op, r);
        os.precision(12);
        os << "kernel overlap " << km.kernel_overlap << ", cokernel overlap " << km.cokernel_overlap;
        return r.kernel_dim == 9 && km.kernel_overlap >= 1 - 1e-6 && km.cokernel_overlap >= 1 - 1e-6;
      });

  run(7, "Linearization vs central differences: error ratio in [3,5] for s 1e-3 -> 5e-4, 5 dirs, eps {0.3,1}, both variants",
      [](auto& os) {
        const SphereGrid g(8);
        const auto F = make_perturbed(g, 1.0, {{2, 1, 0.12}, {3, 0, 0.08}});
        const ImmersionJets base = immersion_jets(F);
        const CodomainProjector proj(g);
        const LiouvilleOptions tight{60, 1e-14, 1e-12};
        std::mt19937_64 rng(77);
        bool ok = true;
        double rmin = INFINITY, rmax = 0.0;
        for (Variant v : {Variant::Additive, Variant::Multiplicative})
          for (double eps : {0.3, 1.0}) {
            const LinearizedPhi lin(F, eps, v, tight);
            for (int k = 0; k < 5; ++k) {
              const ImmersionJets x = variation_jets(F, variation_from_coordinates(g, random_coordinates(g, rng, 4)));
              const Vector d = lin.apply(x);
              auto fd = [&](double s) {
                const Vector p = phi_coordinates(apply_phi(g, combine(base, s, x), eps, v, tight), proj);
                const Vector m = phi_coordinates(apply_phi(g, combine(base, -s, x), eps, v, tight), proj);
                return Vector((p - m) / (2 * s));
              };
              const double ratio = (fd(1e-3) - d).norm() / (fd(5e-4) - d).norm();
              rmin = std::min(rmin, ratio);
              rmax = std::max(rmax, ratio);
              if (!(ratio >= 3.0 && ratio <= 5.0)) ok = false;
            }
          }
        os << "ratios in [" << rmin << ", " << rmax << "] over 20 runs";
        return ok;
      });

  run(8, "Uniformization: gamma = e^{2u0} round, u0 = 0.1 Y20 + 0.05 Y31: 1/lambda^2 = e^{-2u0} to 1e-8, quadratic Newton",
      [](auto& os) {
        const SphereGrid g(16);
        Vector c = Vector::Zero(g.num_coeffs());
        c[coeff_index(2, 0)] = 0.1;
        c[coeff_index(3, 1)] = 0.05;
        const HarmonicField u0(g, c);
        const auto metric = conformal_round_metric(u0);
        const double direct = (solve_liouville(metric).lambda2.cwiseInverse().array() -
                               (-2.0 * u0.samples().array()).exp()).abs().maxCoeff();
        // From phi = 0, so that Newton has work to do.
        LiouvilleOptions cold;
        cold.volume_guess = false;
        const auto cd = solve_liouville(metric, cold);
        const double err = (cd.lambda2.cwiseInverse().array() - (-2.0 * u0.samples().array()).exp()).abs().maxCoeff();
        double gauge = 0.0;
        for (int k = 1; k <= 3; ++k) gauge = std::max(gauge, std::abs(cd.phi.coeffs()[k]));
        const auto& h = cd.residual_history;
        const size_t n = h.size();
        const bool quad = n >= 4 && h[n - 2] / h[n - 3] <= 0.1 && h[n - 3] <= 0.1 * h[n - 4] &&
                          h[n - 2] <= 10 * h[n - 3] * h[n - 3];
        os << "max error " << err << " (volume guess " << direct << "), degree-1 content " << gauge
           << ", history from phi=0";
        for (double v : h) os << " " << v;
        return err <= 1e-8 && direct <= 1e-8 && gauge <= 1e-12 && quad;
      });

  run(9, "Recovery: ellipsoid (1,1.05,0.95) at eps=1 to 1e-6 after Procrustes; continuation to 0.05, defect monotone, final <= 1e-4",
      [](auto& os) {
        const SphereGrid g(8);
        const auto E = make_ellipsoid(g, 1.0, 1.05, 0.95);
        const auto r = newton_solve(make_sphere(g, 1.0), target_from_immersion(E, 1.0));
        const double err = procrustes(r.F.position(), E.position()).max_error;
        os << "newton " << to_string(r.status) << " in " << r.iterations << ", aligned error " << err << "; ";
        const auto tr = epsilon_continuation(make_target_metric(metric_from_immersion(E)), geometric_schedule());
        bool monotone = true;
        double prev = INFINITY;
        os << "defects";
        for (const auto& s : tr.steps) {
          if (!s.accepted) continue;
          os << " " << s.defect;
          monotone = monotone && s.defect < prev;
          prev = s.defect;
        }
        const auto* last = tr.last_accepted();
        os << "; " << to_string(tr.status);
        return r.converged() && err <= 1e-6 && tr.status == TraceStatus::ReachedEpsMin && last &&
               last->epsilon == 0.05 && monotone && last->defect <= 1e-4;
      });

  std::cout << (failures == 0 ? "ALL PASS" : "FAILURES: " + std::to_string(failures)) << std::endl;
  return failures;
}
