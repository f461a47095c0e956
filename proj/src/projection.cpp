#include <Eigen/Eigenvalues>

#include "morphlbl/error.hpp"
#include "morphlbl/eval.hpp"
#include "morphlbl/io_util.hpp"

namespace morphlbl {

Projection project_2d(const EmbeddingTable& table) {
  if (table.size() < 3) throw DataError("projection needs at least 3 rows");
  const Eigen::MatrixXd centered = table.vectors.rowwise() - table.vectors.colwise().mean();
  const Eigen::MatrixXd cov =
      centered.transpose() * centered / static_cast<double>(table.size() - 1);

  Projection out;
  out.coords = Eigen::MatrixXd::Zero(table.size(), 2);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
  if (solver.info() != Eigen::Success) throw NumericError("eigen decomposition failed");

  // Eigenvalues come back in ascending order.
  const Eigen::Index d = cov.rows();
  const double top = solver.eigenvalues()(d - 1);
  const double tol = 1e-12 * std::max(top, 1.0);
  int usable = 0;
  for (int c = 0; c < 2 && c < d; ++c) {
    const double value = solver.eigenvalues()(d - 1 - c);
    if (value <= tol) break;
    Eigen::VectorXd axis = solver.eigenvectors().col(d - 1 - c);
    Eigen::Index lead = 0;
    axis.cwiseAbs().maxCoeff(&lead);
    if (axis(lead) < 0) axis = -axis;
    out.coords.col(c) = centered * axis;
    out.variances(c) = value;
    ++usable;
  }
  if (usable < 2) {
    out.rank_deficient = true;
    warn("embedding table has rank < 2; projection axes beyond the rank are zero");
  }
  return out;
}

}  // namespace morphlbl
