#pragma once

// Intrinsic geometry of a metric on the parameter sphere: Christoffel symbols
// and the Brioschi formula for the Gauss curvature, evaluated from the metric
// components and their coordinate derivatives.

#include "immreg/geometry.hpp"
#include "immreg/spectral.hpp"

#include <array>
#include <vector>

namespace immreg {

class ImmersionMap;

/// Metric components (00, 01, 11) with first (d/dtheta, d/dphi) and second
/// (tt, tp, pp) coordinate derivatives at one node.
template <class T>
struct MetricJet {
  Sym2<T> g;
  std::array<Sym2<T>, 2> dg;
  std::array<Sym2<T>, 3> d2g;
};

inline constexpr int sym_index(int i, int j) { return i + j; }

/// Christoffel symbols Gamma^k_ij, returned as [k][sym_index(i, j)].
template <class T>
std::array<Sym2<T>, 2> christoffel(const Sym2<T>& g, const std::array<Sym2<T>, 2>& dg) {
  auto comp = [](const Sym2<T>& s, int i, int j) { return s[sym_index(i, j)]; };
  // First kind: Gamma_{l,ij} = (d_i g_lj + d_j g_li - d_l g_ij) / 2
  std::array<Sym2<T>, 2> first{};
  for (int l = 0; l < 2; ++l)
    for (int i = 0; i < 2; ++i)
      for (int j = i; j < 2; ++j)
        first[l][sym_index(i, j)] =
            0.5 * (comp(dg[i], l, j) + comp(dg[j], l, i) - comp(dg[l], i, j));
  const Sym2<T> gi = inverse(g);
  std::array<Sym2<T>, 2> out{};
  for (int k = 0; k < 2; ++k)
    for (int s = 0; s < 3; ++s)
      out[k][s] = comp(gi, k, 0) * first[0][s] + comp(gi, k, 1) * first[1][s];
  return out;
}

template <class T>
T det3(const std::array<std::array<T, 3>, 3>& m) {
  return m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
         m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
         m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
}

/// Gauss curvature from the Brioschi formula (u = theta, v = phi).
template <class T>
T brioschi(const MetricJet<T>& m) {
  const T& E = m.g[0];
  const T& F = m.g[1];
  const T& G = m.g[2];
  const T& Eu = m.dg[0][0];
  const T& Ev = m.dg[1][0];
  const T& Fu = m.dg[0][1];
  const T& Fv = m.dg[1][1];
  const T& Gu = m.dg[0][2];
  const T& Gv = m.dg[1][2];
  const T& Evv = m.d2g[2][0];
  const T& Fuv = m.d2g[1][1];
  const T& Guu = m.d2g[0][2];
  const std::array<std::array<T, 3>, 3> m1{{{-0.5 * Evv + Fuv - 0.5 * Guu, 0.5 * Eu, Fu - 0.5 * Ev},
                                            {Fv - 0.5 * Gu, E, F},
                                            {0.5 * Gv, F, G}}};
  const std::array<std::array<T, 3>, 3> m2{{{T(0.0), 0.5 * Ev, 0.5 * Gu},
                                            {0.5 * Ev, E, F},
                                            {0.5 * Gu, F, G}}};
  const T d = E * G - F * F;
  return (det3(m1) - det3(m2)) / (d * d);
}

/// A metric sampled on a grid together with its coordinate derivatives.
struct MetricField {
  SphereGrid grid;
  std::vector<MetricJet<double>> jets;

  int size() const { return static_cast<int>(jets.size()); }
  Matrix components() const;  // nodes x 3
};

/// Exact jets from the spectral derivatives of F (up to third order).
MetricField metric_from_immersion(const ImmersionMap& F);

/// Metric e^{2u} times the round metric, with jets from the spectral
/// derivatives of u.
MetricField conformal_round_metric(const HarmonicField& u);

/// Derivatives reconstructed from node samples of gamma alone by high-order
/// finite differences: periodic in phi, and in theta across the poles using
/// the (theta, phi) -> (-theta, phi + pi) parity of the components.
MetricField metric_from_samples(const SphereGrid& grid, const Matrix& gamma_samples,
                                int half_width = 6);

/// Brioschi curvature at every node.
Vector gauss_curvature(const MetricField& m);

/// Finite-difference weights for derivatives 0..max_order at z (Fornberg).
/// Result is [order][point].
std::vector<std::vector<double>> fornberg_weights(double z, const std::vector<double>& x,
                                                  int max_order);

}  // namespace immreg
