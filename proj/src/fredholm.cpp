#include "immreg/fredholm.hpp"

#include "immreg/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace immreg {

std::vector<double> SpectralReport::smallest(int k) const {
  std::vector<double> out(std::max(cols - static_cast<int>(singular_values.size()), 0), 0.0);
  for (auto it = singular_values.rbegin(); it != singular_values.rend(); ++it) out.push_back(*it);
  out.resize(k, 0.0);
  return out;
}

SpectralReport svd_report(const Matrix& M, double gap_min) {
  if (!M.allFinite()) throw DomainError("svd_report: matrix has non-finite entries");
  SpectralReport r;
  r.rows = static_cast<int>(M.rows());
  r.cols = static_cast<int>(M.cols());
  Eigen::BDCSVD<Matrix> svd(M, Eigen::ComputeFullU | Eigen::ComputeFullV);
  if (svd.info() != Eigen::Success) throw ConvergenceError("svd_report: SVD did not converge");
  const Vector s = svd.singularValues();
  const int n = static_cast<int>(s.size());
  r.singular_values.assign(s.data(), s.data() + n);
  const double smax = n > 0 ? s[0] : 0.0;
  if (!(smax > 0.0)) {
    r.rank = 0;
    r.gap_ratio = 1.0;
    r.reliable = false;
  } else {
    const double floor = std::numeric_limits<double>::epsilon() * smax * std::max(r.rows, r.cols);
    double best = -1.0;
    for (int k = 1; k <= n; ++k) {
      const double next = k < n ? s[k] : 0.0;
      const double ratio = s[k - 1] / std::max(next, floor);
      if (ratio > best) {
        best = ratio;
        r.rank = k;
      }
    }
    r.gap_ratio = best;
    r.reliable = best >= gap_min;
  }
  r.kernel_dim = r.cols - r.rank;
  r.cokernel_dim = r.rows - r.rank;
  r.index = r.kernel_dim - r.cokernel_dim;
  r.kernel = svd.matrixV().rightCols(r.kernel_dim);
  r.cokernel = svd.matrixU().rightCols(r.cokernel_dim);
  return r;
}

namespace {

std::string dominant(const Vector& v, const std::vector<BasisLabel>& basis) {
  int k = 0;
  v.cwiseAbs().maxCoeff(&k);
  std::ostringstream os;
  os.precision(6);
  os << basis[k].str() << ":" << std::fixed << v[k] * v[k];
  return os.str();
}

Matrix orthonormal_columns(const Matrix& A, double rel_tol = 1e-10) {
  Eigen::JacobiSVD<Matrix> svd(A, Eigen::ComputeThinU);
  const Vector s = svd.singularValues();
  int rank = 0;
  while (rank < s.size() && s[rank] > rel_tol * s[0]) ++rank;
  return svd.matrixU().leftCols(rank);
}

}  // namespace

SpectralReport svd_report(const OperatorMatrix& M, double gap_min) {
  SpectralReport r = svd_report(M.matrix, gap_min);
  r.epsilon = M.epsilon;
  for (int j = 0; j < r.kernel_dim; ++j) r.mode_labels.push_back("ker " + dominant(r.kernel.col(j), M.domain));
  for (int j = 0; j < r.cokernel_dim; ++j)
    r.mode_labels.push_back("coker " + dominant(r.cokernel.col(j), M.codomain));
  return r;
}

Matrix killing_modes(const ImmersionMap& F) {
  const SphereGrid& grid = F.grid();
  const Matrix& P = F.position();
  Matrix out(3 * grid.num_coeffs() - 2, 6);
  for (int a = 0; a < 3; ++a) {
    Eigen::Vector3d e = Eigen::Vector3d::Zero();
    e[a] = 1.0;
    Matrix T(grid.size(), 3), R(grid.size(), 3);
    for (int i = 0; i < grid.size(); ++i) {
      T.row(i) = e.transpose();
      R.row(i) = e.cross(Eigen::Vector3d(P.row(i).transpose())).transpose();
    }
    out.col(a) = domain_coordinates(F, T);
    out.col(3 + a) = domain_coordinates(F, R);
  }
  return out;
}

SpectralReport based_report(const OperatorMatrix& M, const Matrix& killing, double gap_min) {
  const int n = static_cast<int>(M.matrix.cols());
  if (killing.rows() != n) throw ShapeError("based_report: Killing modes do not match the domain");
  const Matrix Q = orthonormal_columns(killing, 1e-8);
  if (Q.cols() != 6) {
    std::ostringstream os;
    os << "based_report: Killing modes span " << Q.cols() << " dimensions, expected 6";
    throw GaugeError(os.str());
  }
  // Orthonormal complement of the Killing span.
  Eigen::HouseholderQR<Matrix> qr(Q);
  const Matrix full = qr.householderQ();
  const Matrix C = full.rightCols(n - 6);
  SpectralReport r = svd_report(Matrix(M.matrix * C), gap_min);
  r.epsilon = M.epsilon;
  r.kernel = C * r.kernel;
  for (int j = 0; j < r.kernel_dim; ++j) r.mode_labels.push_back("ker " + dominant(r.kernel.col(j), M.domain));
  for (int j = 0; j < r.cokernel_dim; ++j)
    r.mode_labels.push_back("coker " + dominant(r.cokernel.col(j), M.codomain));
  return r;
}

std::vector<std::string> KernelModes::labels() const {
  auto fmt = [](const char* name, double v) {
    std::ostringstream os;
    os.precision(6);
    os << name << ":" << std::fixed << v;
    return os.str();
  };
  return {fmt("translation", translation), fmt("rotation", rotation), fmt("conformal", conformal),
          fmt("normal_degree1", normal), fmt("kernel_overlap", kernel_overlap),
          fmt("cokernel_degree1_overlap", cokernel_overlap)};
}

KernelModes identify_kernel(const ImmersionMap& F, const OperatorMatrix& M, const SpectralReport& r) {
  const int nc = F.grid().num_coeffs();
  const int n = static_cast<int>(M.matrix.cols());
  const Matrix killing = killing_modes(F);
  Matrix conformal = Matrix::Zero(n, 3), normal = Matrix::Zero(n, 3);
  for (int k = 1; k <= 3; ++k) {
    conformal(k - 1, k - 1) = 1.0;
    normal(2 * nc - 2 + k, k - 1) = 1.0;
  }
  auto captured = [&](const Matrix& fam) {
    const Matrix Q = orthonormal_columns(fam);
    return (Q.transpose() * r.kernel).squaredNorm();
  };
  KernelModes km;
  km.translation = captured(killing.leftCols(3));
  km.rotation = captured(killing.rightCols(3));
  km.conformal = captured(conformal);
  km.normal = captured(normal);
  Matrix all(n, 12);
  all << killing, conformal, normal;
  const Matrix Q = orthonormal_columns(all);
  km.kernel_overlap = 1.0;
  for (int j = 0; j < r.kernel.cols(); ++j)
    km.kernel_overlap = std::min(km.kernel_overlap, (Q.transpose() * r.kernel.col(j)).squaredNorm());
  const int class_rows = static_cast<int>(M.matrix.rows()) - nc;
  km.cokernel_overlap = 1.0;
  for (int j = 0; j < r.cokernel.cols(); ++j)
    km.cokernel_overlap = std::min(km.cokernel_overlap, r.cokernel.col(j).segment(class_rows + 1, 3).squaredNorm());
  return km;
}

std::vector<SpectralReport> kernel_vs_epsilon(const ImmersionMap& F, const std::vector<double>& eps_grid,
                                              const SweepOptions& opt) {
  std::vector<SpectralReport> out;
  for (double eps : eps_grid) {
    if (!(eps > 0.0 && eps <= 1.0)) throw DomainError("kernel_vs_epsilon: epsilon must lie in (0, 1]");
    const LinearizedPhi lin(F, eps, opt.variant, opt.liouville);
    out.push_back(svd_report(assemble_linearization(F, lin), opt.gap_min));
  }
  return out;
}

}  // namespace immreg
