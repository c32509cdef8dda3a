#include "kanto/embed.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "kanto/error.hpp"

namespace kanto {

FloatMatrix pad_and_flatten(std::span<const Spectrogram> units, std::size_t pad_frames) {
  FloatMatrix out;
  if (units.empty()) return out;
  const std::size_t bands = units.front().bands;
  out.rows = static_cast<std::uint32_t>(units.size());
  out.cols = static_cast<std::uint32_t>(bands * pad_frames);
  out.values.resize(static_cast<std::size_t>(out.rows) * out.cols);
  for (std::size_t r = 0; r < units.size(); ++r) {
    const Spectrogram& u = units[r];
    if (u.frames > pad_frames)
      throw Error(ErrorCode::range, "unit " + std::to_string(r) + " has " + std::to_string(u.frames) +
                                        " frames, more than pad width " + std::to_string(pad_frames));
    if (u.bands != bands) throw Error(ErrorCode::range, "units differ in band count");
    float* dst = out.values.data() + r * out.cols;
    const float pad = static_cast<float>(u.floor_db);
    for (std::size_t b = 0; b < bands; ++b) {
      for (std::size_t t = 0; t < pad_frames; ++t)
        dst[b * pad_frames + t] = t < u.frames ? u.at(b, t) : pad;
    }
  }
  return out;
}

const char* to_string(EmbeddingMethod m) noexcept {
  return m == EmbeddingMethod::pca ? "pca" : "neighbor";
}

EmbeddingMethod embedding_method_from_string(const std::string& s) {
  if (s == "pca") return EmbeddingMethod::pca;
  if (s == "neighbor") return EmbeddingMethod::neighbor;
  throw Error(ErrorCode::validation, "unknown embedding method '" + s + "'");
}

namespace {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

void fix_sign(Eigen::Ref<Eigen::VectorXd> v) {
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < v.size(); ++i)
    if (std::abs(v[i]) > std::abs(v[best])) best = i;
  if (v[best] < 0) v = -v;
}

// Extends the first `have` columns of `basis` to `want` orthonormal columns
// using standard basis vectors in index order.
void complete_basis(Eigen::MatrixXd& basis, Eigen::Index have, Eigen::Index want) {
  const Eigen::Index width = basis.rows();
  for (Eigen::Index e = 0; e < width && have < want; ++e) {
    Eigen::VectorXd v = Eigen::VectorXd::Unit(width, e);
    for (int pass = 0; pass < 2; ++pass)
      for (Eigen::Index j = 0; j < have; ++j) v -= basis.col(j).dot(v) * basis.col(j);
    const double norm = v.norm();
    if (norm < 1e-6) continue;
    basis.col(have++) = v / norm;
  }
}

}  // namespace

PcaResult embed_pca(const FloatMatrix& rows, std::size_t dim) {
  const Eigen::Index n = rows.rows;
  const Eigen::Index width = rows.cols;
  if (n < 2) throw Error(ErrorCode::insufficient_data, "PCA needs at least 2 rows");
  if (dim == 0 || dim > static_cast<std::size_t>(std::min(n, width)))
    throw Error(ErrorCode::parameter, "PCA dimension " + std::to_string(dim) +
                                          " exceeds min(rows, width) = " +
                                          std::to_string(std::min(n, width)));
  const Eigen::Index k = static_cast<Eigen::Index>(dim);

  Matrix x(n, width);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < width; ++j) x(i, j) = rows.values[i * width + j];
  const Eigen::RowVectorXd mean = x.colwise().mean();
  x.rowwise() -= mean;

  const double denom = static_cast<double>(n - 1);
  Eigen::MatrixXd basis(width, k);
  Eigen::VectorXd eigenvalues(k);
  double total = 0.0;

  if (n <= width) {
    // Gram route: eigenvectors of X X^T map to principal directions via X^T.
    const Eigen::MatrixXd gram = x * x.transpose();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(gram);
    if (solver.info() != Eigen::Success) throw Error(ErrorCode::internal, "eigensolver failed");
    const Eigen::VectorXd& vals = solver.eigenvalues();
    total = gram.trace() / denom;
    const double tol = 1e-10 * std::max(1.0, vals[n - 1]);
    Eigen::Index have = 0;
    for (Eigen::Index c = 0; c < k; ++c) {
      const double lambda = vals[n - 1 - c];
      eigenvalues[c] = std::max(lambda, 0.0) / denom;
      if (lambda > tol && have == c) {
        basis.col(c) = x.transpose() * solver.eigenvectors().col(n - 1 - c) / std::sqrt(lambda);
        ++have;
      }
    }
    complete_basis(basis, have, k);
  } else {
    const Eigen::MatrixXd cov = (x.transpose() * x) / denom;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
    if (solver.info() != Eigen::Success) throw Error(ErrorCode::internal, "eigensolver failed");
    total = cov.trace();
    for (Eigen::Index c = 0; c < k; ++c) {
      eigenvalues[c] = std::max(solver.eigenvalues()[width - 1 - c], 0.0);
      basis.col(c) = solver.eigenvectors().col(width - 1 - c);
    }
  }
  for (Eigen::Index c = 0; c < k; ++c) fix_sign(basis.col(c));

  const Eigen::MatrixXd projected = x * basis;

  PcaResult out;
  out.embedding.rows = static_cast<std::size_t>(n);
  out.embedding.dim = dim;
  out.embedding.method = EmbeddingMethod::pca;
  out.embedding.values.resize(static_cast<std::size_t>(n) * dim);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index c = 0; c < k; ++c) out.embedding.values[i * k + c] = projected(i, c);

  out.model.mean.assign(mean.data(), mean.data() + width);
  out.model.components.resize(dim * static_cast<std::size_t>(width));
  for (Eigen::Index c = 0; c < k; ++c)
    for (Eigen::Index j = 0; j < width; ++j) out.model.components[c * width + j] = basis(j, c);
  out.model.eigenvalues.assign(eigenvalues.data(), eigenvalues.data() + k);
  out.model.total_variance = total;
  return out;
}

std::vector<double> pca_reconstruct(const PcaResult& pca) {
  const std::size_t n = pca.embedding.rows;
  const std::size_t k = pca.embedding.dim;
  const std::size_t width = pca.model.mean.size();
  std::vector<double> out(n * width);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < width; ++j) {
      double v = pca.model.mean[j];
      for (std::size_t c = 0; c < k; ++c)
        v += pca.embedding.values[i * k + c] * pca.model.components[c * width + j];
      out[i * width + j] = v;
    }
  }
  return out;
}

}  // namespace kanto
