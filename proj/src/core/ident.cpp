#include "core/ident.hpp"

namespace mldfm {

long count_restrictions(const GroupStructure& structure) {
  structure.validate();
  long total = static_cast<long>(structure.r_g) * structure.r_g;
  long sum_rs = 0;
  for (int rs : structure.r_s) {
    total += static_cast<long>(rs) * rs;
    sum_rs += rs;
  }
  total += static_cast<long>(structure.r_g) * sum_rs;
  return total;
}

RotationMask rotation_mask(const GroupStructure& structure) {
  structure.validate();
  const int r = structure.r();
  RotationMask out;
  out.structure = structure;
  out.mask = BoolMatrix::Constant(r, r, false);
  // Global rows x global columns.
  for (int i = 0; i < structure.r_g; ++i)
    for (int j = 0; j < structure.r_g; ++j) out.mask(i, j) = true;
  for (int s = 0; s < structure.S; ++s) {
    const int off = structure.local_col(s);
    for (int i = 0; i < structure.r_s[s]; ++i) {
      // Group rows x global columns.
      for (int j = 0; j < structure.r_g; ++j) out.mask(off + i, j) = true;
      // Group rows x same group's columns.
      for (int j = 0; j < structure.r_s[s]; ++j) out.mask(off + i, off + j) = true;
    }
  }
  return out;
}

namespace {

IdentCheck orthonormal_check(const std::string& name, const Matrix& F, double tol) {
  const double T = static_cast<double>(F.rows());
  IdentCheck check{name, true, 0.0};
  if (F.cols() == 0) return check;
  Matrix gram = F.transpose() * F / T;
  check.max_violation = (gram - Matrix::Identity(F.cols(), F.cols())).cwiseAbs().maxCoeff();
  check.pass = check.max_violation <= tol;
  return check;
}

IdentCheck orthogonal_check(const std::string& name, const Matrix& A, const Matrix& B, double tol) {
  const double T = static_cast<double>(A.rows());
  IdentCheck check{name, true, 0.0};
  if (A.cols() == 0 || B.cols() == 0) return check;
  check.max_violation = (A.transpose() * B / T).cwiseAbs().maxCoeff();
  check.pass = check.max_violation <= tol;
  return check;
}

IdentCheck diagonal_gram_check(const std::string& name, const Matrix& Lambda, double tol) {
  IdentCheck check{name, true, 0.0};
  if (Lambda.cols() <= 1) return check;
  Matrix gram = Lambda.transpose() * Lambda;
  const double scale = gram.diagonal().cwiseAbs().maxCoeff();
  if (scale <= 0.0) return check;
  Matrix off = gram;
  off.diagonal().setZero();
  check.max_violation = off.cwiseAbs().maxCoeff() / scale;
  check.pass = check.max_violation <= tol;
  return check;
}

}  // namespace

IdentReport check_identification(const Matrix& G, const std::vector<Matrix>& L,
                                 const Matrix& Lambda_g, const std::vector<Matrix>& Lambda_l,
                                 double tol) {
  IdentReport report;
  report.tol = tol;
  report.checks.push_back(orthonormal_check("G_orthonormal", G, tol));
  for (std::size_t s = 0; s < L.size(); ++s)
    report.checks.push_back(orthonormal_check("L" + std::to_string(s + 1) + "_orthonormal", L[s], tol));
  for (std::size_t s = 0; s < L.size(); ++s)
    report.checks.push_back(
        orthogonal_check("L" + std::to_string(s + 1) + "_G_orthogonal", L[s], G, tol));
  report.checks.push_back(diagonal_gram_check("Lambda_g_gram_diagonal", Lambda_g, tol));
  for (std::size_t s = 0; s < Lambda_l.size(); ++s)
    report.checks.push_back(diagonal_gram_check(
        "Lambda_l" + std::to_string(s + 1) + "_gram_diagonal", Lambda_l[s], tol));
  report.all_pass = true;
  for (const IdentCheck& check : report.checks) report.all_pass = report.all_pass && check.pass;
  return report;
}

}  // namespace mldfm
