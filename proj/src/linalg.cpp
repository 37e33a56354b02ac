#include "galu/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "galu/error.hpp"

namespace galu {

namespace {

Vector square_singular_values(const MatrixRef& square) {
  Eigen::BDCSVD<Matrix> svd(square);
  return svd.singularValues();
}

Matrix upper_factor(const Matrix& tall) {
  Eigen::HouseholderQR<Matrix> qr(tall);
  const Index n = tall.cols();
  return qr.matrixQR().topRows(n).triangularView<Eigen::Upper>();
}

}  // namespace

Vector singular_values(const MatrixRef& a) {
  if (a.size() == 0) return Vector();
  if (a.rows() > a.cols()) return square_singular_values(upper_factor(a));
  if (a.cols() > a.rows()) return square_singular_values(upper_factor(a.transpose()));
  return square_singular_values(a);
}

Index numerical_rank(const VectorRef& values) {
  if (values.size() == 0) return 0;
  const double top = values.cwiseAbs().maxCoeff();
  if (!(top > 0.0)) return 0;
  const double cut = kRankTolerance * top;
  return static_cast<Index>((values.array() > cut).count());
}

Vector symmetric_eigenvalues(const MatrixRef& sym) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(sym, Eigen::EigenvaluesOnly);
  if (eig.info() != Eigen::Success) throw NumericalError("symmetric eigensolver did not converge");
  return eig.eigenvalues();
}

double min_eigenvalue(const MatrixRef& sym) {
  if (sym.rows() != sym.cols() || sym.rows() == 0)
    throw DimensionError("min_eigenvalue: need a non-empty square matrix");
  return symmetric_eigenvalues(sym)(0);
}

double spectral_norm(const MatrixRef& a) {
  const Vector s = singular_values(a);
  return s.size() == 0 ? 0.0 : s(0);
}

Matrix khatri_rao_rows(const MatrixRef& xs) {
  const Index m = xs.rows();
  const Index d = xs.cols();
  Matrix out(m, d * d);
  for (Index i = 0; i < m; ++i)
    for (Index a = 0; a < d; ++a)
      for (Index b = 0; b < d; ++b) out(i, a * d + b) = xs(i, a) * xs(i, b);
  return out;
}

Vector spd_solve(const MatrixRef& sym, const VectorRef& rhs, const char* what) {
  if (sym.rows() != sym.cols() || sym.rows() != rhs.size())
    throw DimensionError(std::string(what) + ": shape mismatch");
  Eigen::SelfAdjointEigenSolver<Matrix> eig(sym);
  if (eig.info() != Eigen::Success) throw NumericalError(std::string(what) + ": eigensolver failed");
  const Vector& values = eig.eigenvalues();
  const double top = std::max(std::abs(values(0)), std::abs(values(values.size() - 1)));
  if (!(values(0) > kRankTolerance * top)) {
    std::ostringstream msg;
    msg << what << ": matrix is singular (min eigenvalue " << values(0) << ", max " << top << ")";
    throw NumericalError(msg.str());
  }
  const Matrix& vecs = eig.eigenvectors();
  return vecs * (vecs.transpose() * rhs).cwiseQuotient(values);
}

Index ceil_index(double value) {
  if (!std::isfinite(value)) throw DomainError("ceil_index: non-finite value");
  return static_cast<Index>(std::ceil(value - 1e-9 * std::abs(value)));
}

Index floor_index(double value) {
  if (!std::isfinite(value)) throw DomainError("floor_index: non-finite value");
  return static_cast<Index>(std::floor(value + 1e-9 * std::abs(value)));
}

}  // namespace galu
