#pragma once

// Kernel, cokernel and index of an assembled linearization from its SVD.
// The numerical rank is placed at the largest relative gap between
// consecutive singular values; values below the cut count as zero.

#include "immreg/regularized_operator.hpp"

#include <string>
#include <vector>

namespace immreg {

struct SpectralReport {
  double epsilon = 0.0;
  std::vector<double> singular_values;  // descending, min(rows, cols) entries
  int rows = 0;
  int cols = 0;
  int rank = 0;
  int kernel_dim = 0;
  int cokernel_dim = 0;
  int index = 0;
  /// sigma(last kept) / sigma(first dropped); zeros are floored at machine
  /// precision times sigma_max.
  double gap_ratio = 0.0;
  bool reliable = false;
  std::vector<std::string> mode_labels;
  Matrix kernel;    // cols x kernel_dim, orthonormal
  Matrix cokernel;  // rows x cokernel_dim, orthonormal

  /// The k smallest singular values, ascending (padded with zeros when the
  /// matrix is wide, since the extra kernel directions have sigma = 0).
  std::vector<double> smallest(int k) const;
};

SpectralReport svd_report(const Matrix& M, double gap_min = 1e3);
/// Also labels each kernel/cokernel vector by its dominant basis element.
SpectralReport svd_report(const OperatorMatrix& M, double gap_min = 1e3);

/// Domain coordinates of the 6 ambient Killing fields restricted to F:
/// translations e_x, e_y, e_z, then rotations e_a x F.
Matrix killing_modes(const ImmersionMap& F);

/// Report for M restricted to the orthogonal complement of the Killing
/// modes. GaugeError if the modes do not span 6 dimensions.
SpectralReport based_report(const OperatorMatrix& M, const Matrix& killing, double gap_min = 1e3);

/// How the kernel of a report at the round sphere decomposes over the
/// analytic candidates.
struct KernelModes {
  /// Captured dimension (trace of the product of projectors) per family.
  double translation = 0.0;
  double rotation = 0.0;
  double conformal = 0.0;  // grad Y_1m, tangential only
  double normal = 0.0;     // nu = Y_1m
  /// min over kernel vectors of |P v|^2, P onto the span of all four families.
  double kernel_overlap = 0.0;
  /// min over cokernel vectors of the weight on scalar-slot degree-1 entries.
  double cokernel_overlap = 0.0;
  std::vector<std::string> labels() const;
};

KernelModes identify_kernel(const ImmersionMap& F, const OperatorMatrix& M, const SpectralReport& r);

struct SweepOptions {
  Variant variant = Variant::Additive;
  double gap_min = 1e3;
  LiouvilleOptions liouville{};
};

/// Assemble and report at each epsilon.
std::vector<SpectralReport> kernel_vs_epsilon(const ImmersionMap& F, const std::vector<double>& eps_grid,
                                              const SweepOptions& opt = {});

}  // namespace immreg
