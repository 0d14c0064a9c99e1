#pragma once

// The blended data map
//     Phi_eps(F) = ([gamma], (1 - eps) lambda^2 + eps H)          (additive)
//     Phi_eps(F) = ([gamma], lambda^{2(1-eps)} H^{-eps})         (multiplicative)
// its linearization over the variation basis, and the ADN principal symbol.
//
// Everything pointwise is a function of the node 2-jets of F (first and second
// coordinate derivatives); the curvature fed to the Liouville solve is
// det(shape). Linearizations are exact derivatives of the discrete map,
// computed with dual numbers along the 2-jet of the variation.
//
// Codomain coordinates (orthonormal in L^2(dv_0) of the parameter sphere):
//   class slot : C = sin(theta) gamma / sqrt(det gamma) has unit determinant
//                against the round metric; its round-trace-free part, as the
//                frame components (p, q) = ((c11 - c22) / 2, c12), is projected
//                on the E and B tensor harmonics of degree 2..L.
//   scalar slot: harmonics of degree 0..L.
// Domain coordinates: X = dF(grad G + N x grad Psi) + nu N with
//   G = sum a_lm Y_lm / sqrt(l(l+1)), Psi likewise with b_lm, nu = sum c_lm Y_lm.

#include "immreg/geometry.hpp"
#include "immreg/uniformization.hpp"

#include <Eigen/Dense>

#include <array>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace immreg {

enum class Variant { Additive, Multiplicative };

Variant parse_variant(std::string_view s);
const char* to_string(Variant v);

/// Per-node 2-jets (F_t, F_p, F_tt, F_tp, F_pp) of an immersion or variation.
using ImmersionJets = std::vector<NodeJet<double>>;

ImmersionJets immersion_jets(const ImmersionMap& F);
/// 2-jets of a band-limited ambient field given by (num_coeffs x 3) coefficients.
ImmersionJets ambient_jets(const SphereGrid& grid, const Matrix& coeffs);

struct EpsilonData {
  double epsilon = 1.0;
  Variant variant = Variant::Additive;
  Matrix class_rep;  // nodes x 3, gamma / sqrt(det gamma)
  Vector blended;
  Vector lambda2;
  Vector H;
  ConformalData conformal;
};

/// Throws DomainError for eps outside [0, 1] or H <= 0 under the
/// multiplicative variant; Liouville failures propagate.
EpsilonData apply_phi(const ImmersionMap& F, double eps, Variant variant = Variant::Additive,
                      const LiouvilleOptions& opt = {});
EpsilonData apply_phi(const SphereGrid& grid, const ImmersionJets& jets, double eps,
                      Variant variant = Variant::Additive, const LiouvilleOptions& opt = {});

/// Round-frame trace-free components (p, q) of sin(theta) * class_rep.
Matrix class_components(const SphereGrid& grid, const Matrix& class_rep);

/// Projections of node data onto the codomain coordinates.
class CodomainProjector {
 public:
  explicit CodomainProjector(const SphereGrid& grid);
  int class_size() const { return 2 * ntensor_; }
  int scalar_size() const { return grid_.num_coeffs(); }
  int size() const { return class_size() + scalar_size(); }
  /// p, q: nodes x k; result: class_size() x k (E block, then B block).
  Matrix project_class(const Matrix& p, const Matrix& q) const;
  Matrix project_scalar(const Matrix& f) const;
  /// Node values (p, q) of the normalized E harmonic for coefficient (l, m), l >= 2.
  std::pair<Vector, Vector> e_harmonic(int l, int m) const;
  const SphereGrid& grid() const { return grid_; }

 private:
  SphereGrid grid_;
  int ntensor_;
  Matrix pe_, qe_;  // nodes x ntensor, normalized E harmonics
};

/// Codomain coordinates of Phi_eps (class slot then scalar slot).
Vector phi_coordinates(const EpsilonData& d, const CodomainProjector& proj);

/// Tangential part given by round-sphere Hodge potentials, plus normal speed.
struct VariationField {
  HarmonicField potential;  // G
  HarmonicField stream;     // Psi
  HarmonicField nu;

  static VariationField zero(const SphereGrid& grid);
  /// Coordinate components (v^theta, v^phi) of the parameter field grad G + N x grad Psi.
  std::array<Vector, 2> tangent() const;
};

/// Ambient node samples (nodes x 3) of X = dF(v) + nu N.
Matrix ambient_samples(const ImmersionMap& F, const VariationField& V);
/// Node 2-jets of X = dF(v) + nu N.
ImmersionJets variation_jets(const ImmersionMap& F, const VariationField& V);

/// (delta* X)^T = (1/2) gamma' per node (nodes x 3).
Matrix delta_star(const ImmersionMap& F, const VariationField& V);
/// -Delta_gamma nu - |A|^2 nu + X^T(H) per node.
Vector mean_curvature_prime(const ImmersionMap& F, const VariationField& V);

struct BasisLabel {
  enum class Kind { Gradient, Curl, Normal, ClassE, ClassB, Scalar };
  Kind kind;
  int l;
  int m;
  std::string str() const;
};

std::vector<BasisLabel> domain_basis(int L);
std::vector<BasisLabel> codomain_basis(int L);

/// Domain coordinates <-> VariationField.
VariationField variation_from_coordinates(const SphereGrid& grid, const Vector& w);
/// L^2(dv_0) projection of an ambient field (node samples) onto the domain
/// coordinates; exact on the round sphere for band-limited fields.
Vector domain_coordinates(const ImmersionMap& F, const Matrix& ambient);

/// ADN order weights: entry (i, j) has order <= s_i + t_j.
struct AdnWeights {
  int s_class = 0;
  int s_blended = 0;
  int t_tangential = 1;
  int t_normal = 2;
};

struct OperatorMatrix {
  Matrix matrix;
  std::vector<BasisLabel> domain;
  std::vector<BasisLabel> codomain;
  AdnWeights adn;
  double epsilon = 1.0;
  Variant variant = Variant::Additive;
};

/// Linearization of the discrete map at a fixed immersion.
class LinearizedPhi {
 public:
  LinearizedPhi(const ImmersionMap& F, double eps, Variant variant = Variant::Additive,
                const LiouvilleOptions& opt = {});
  LinearizedPhi(const SphereGrid& grid, const ImmersionJets& jets, double eps,
                Variant variant = Variant::Additive, const LiouvilleOptions& opt = {});

  const EpsilonData& base() const { return base_; }
  const CodomainProjector& projector() const { return proj_; }
  const SphereGrid& grid() const { return grid_; }

  /// Columns of codomain coordinates for variations given by their node
  /// 2-jets: xjet(node, column).
  Matrix apply(int ncols, const std::function<NodeJet<double>(int, int)>& xjet) const;
  Vector apply(const ImmersionJets& x) const;

 private:
  void init(const LiouvilleOptions& opt);

  SphereGrid grid_;
  ImmersionJets jets_;
  double eps_;
  Variant variant_;
  EpsilonData base_;
  CodomainProjector proj_;
  std::optional<LiouvilleLinearization> liouville_;
  std::vector<MetricJet<double>> metric_;
};

OperatorMatrix assemble_linearization(const ImmersionMap& F, double eps,
                                      Variant variant = Variant::Additive,
                                      const LiouvilleOptions& opt = {});
/// Same as above from an existing linearization (domain basis up to grid degree).
OperatorMatrix assemble_linearization(const ImmersionMap& F, const LinearizedPhi& lin);

struct Symbol {
  Eigen::Matrix3d sigma;  // rows (class p, class q, blended), columns (X1, X2, nu)
  double min_singular = 0.0;
};

/// Per-node data the symbol needs (gamma, H, blended value, lambda^2).
struct SymbolContext {
  Matrix gamma;
  Vector H;
  Vector lambda2;
  Vector blended;
  double epsilon = 1.0;
  Variant variant = Variant::Additive;
};

SymbolContext symbol_context(const ImmersionMap& F, double eps, Variant variant = Variant::Additive);
/// xi: covector (xi_theta, xi_phi), normalized to unit gamma-length. DomainError if xi = 0.
Symbol principal_symbol(const SymbolContext& ctx, int node, const std::array<double, 2>& xi);
Symbol principal_symbol(const ImmersionMap& F, int node, const std::array<double, 2>& xi,
                        double eps, Variant variant = Variant::Additive);

/// Same, with xi already given as unit components in the node's orthonormal frame.
Symbol principal_symbol_frame(const SymbolContext& ctx, int node, double xi1, double xi2);

struct SymbolScan {
  double min_singular = 0.0;  // over nodes and directions
  double max_singular = 0.0;  // largest per-(node, direction) minimum
  int worst_node = 0;
  double worst_angle = 0.0;
  int directions = 0;
};

/// Smallest symbol singular value over all nodes and `directions` equally
/// spaced covector angles in [0, 2 pi) in each node's orthonormal frame.
SymbolScan symbol_scan(const SymbolContext& ctx, int directions);

}  // namespace immreg
