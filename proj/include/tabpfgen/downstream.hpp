#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "tabpfgen/dataset.hpp"
#include "tabpfgen/error.hpp"
#include "tabpfgen/scorer.hpp"

namespace tabpfgen {

struct LogregModel {
  Matrix w;  // K x D
  Vector b;  // K
  int iterations = 0;
  double grad_norm = 0.0;
};

namespace detail {

inline double multinomial_loss(const Matrix& x, const std::vector<int>& y, const Matrix& w,
                               const Vector& b, double l2) {
  double loss = 0.5 * l2 * w.squaredNorm();
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const Eigen::RowVectorXd z = x.row(i) * w.transpose() + b.transpose();
    const double mx = z.maxCoeff();
    const double lse = mx + std::log((z.array() - mx).exp().sum());
    loss += lse - z(y[static_cast<std::size_t>(i)]);
  }
  return loss;
}

}  // namespace detail

// Multinomial logistic regression by damped full-batch Newton iterations.
// The l2 penalty applies to weights only; the full K-row parameterization is
// kept, with the penalty making it identifiable. Throws when the gradient
// norm has not reached tol within max_iter.
inline LogregModel train_logreg(const Matrix& x, const std::vector<int>& y, int class_count,
                                double l2 = 1e-4, int max_iter = 100, double tol = 1e-9) {
  require(class_count >= 2, ErrorCode::bad_argument, "logreg: needs at least two classes");
  require(x.rows() >= 1, ErrorCode::bad_argument, "logreg: empty training set");
  require(y.size() == static_cast<std::size_t>(x.rows()), ErrorCode::bad_argument,
          "logreg: label count mismatch");
  require(l2 > 0.0, ErrorCode::bad_config, "logreg: l2 must be > 0");

  const Eigen::Index n = x.rows();
  const Eigen::Index dim = x.cols();
  const Eigen::Index p = dim + 1;  // per-class parameters, bias last
  Matrix theta = Matrix::Zero(class_count, p);

  Matrix xt(n, p);
  xt.leftCols(dim) = x;
  xt.col(dim).setOnes();

  LogregModel model;
  double loss = detail::multinomial_loss(x, y, theta.leftCols(dim), theta.col(dim), l2);
  for (int iter = 0; iter <= max_iter; ++iter) {
    Matrix probs(n, class_count);
    for (Eigen::Index i = 0; i < n; ++i) {
      Eigen::RowVectorXd z = xt.row(i) * theta.transpose();
      const double mx = z.maxCoeff();
      z = (z.array() - mx).exp();
      probs.row(i) = z / z.sum();
    }
    Matrix grad = Matrix::Zero(class_count, p);
    for (Eigen::Index i = 0; i < n; ++i) {
      Eigen::RowVectorXd delta = probs.row(i);
      delta(y[static_cast<std::size_t>(i)]) -= 1.0;
      grad += delta.transpose() * xt.row(i);
    }
    grad.leftCols(dim) += l2 * theta.leftCols(dim);

    model.grad_norm = grad.norm();
    model.iterations = iter;
    if (model.grad_norm <= tol) break;
    if (iter == max_iter)
      fail(ErrorCode::no_convergence,
           "logreg: no convergence after " + std::to_string(max_iter) +
               " iterations, gradient norm " + std::to_string(model.grad_norm));

    // Full Newton system over the K*(D+1) parameters.
    const Eigen::Index kp = static_cast<Eigen::Index>(class_count) * p;
    Matrix hess = Matrix::Zero(kp, kp);
    for (int a = 0; a < class_count; ++a)
      for (int c = a; c < class_count; ++c) {
        Vector coef(n);
        for (Eigen::Index i = 0; i < n; ++i)
          coef(i) = probs(i, a) * ((a == c ? 1.0 : 0.0) - probs(i, c));
        const Matrix block = xt.transpose() * coef.asDiagonal() * xt;
        hess.block(a * p, c * p, p, p) = block;
        if (c != a) hess.block(c * p, a * p, p, p) = block.transpose();
      }
    for (int a = 0; a < class_count; ++a)
      for (Eigen::Index j = 0; j < dim; ++j) hess(a * p + j, a * p + j) += l2;
    hess.diagonal().array() += 1e-12;

    Vector grad_flat(kp);
    for (int a = 0; a < class_count; ++a)
      grad_flat.segment(a * p, p) = grad.row(a).transpose();
    const Vector step_flat = hess.ldlt().solve(grad_flat);
    Matrix step(class_count, p);
    for (int a = 0; a < class_count; ++a)
      step.row(a) = step_flat.segment(a * p, p).transpose();

    double scale = 1.0;
    Matrix candidate = theta - step;
    double cand_loss =
        detail::multinomial_loss(x, y, candidate.leftCols(dim), candidate.col(dim), l2);
    int backtracks = 0;
    while (cand_loss > loss && backtracks < 30) {
      scale *= 0.5;
      candidate = theta - scale * step;
      cand_loss = detail::multinomial_loss(x, y, candidate.leftCols(dim), candidate.col(dim), l2);
      ++backtracks;
    }
    if (cand_loss > loss) break;  // stalled at floating-point resolution
    theta = candidate;
    loss = cand_loss;
  }

  model.w = theta.leftCols(dim);
  model.b = theta.col(dim);
  return model;
}

inline Matrix logreg_predict_proba(const LogregModel& m, const Matrix& x) {
  return softmax_rows((x * m.w.transpose()).rowwise() + m.b.transpose());
}

struct KnnModel {
  Matrix x;
  std::vector<int> y;
  int class_count = 0;
  int k = 5;
};

inline KnnModel train_knn(const Matrix& x, const std::vector<int>& y, int class_count, int k) {
  require(k >= 1, ErrorCode::bad_argument, "knn: k must be >= 1");
  require(static_cast<Eigen::Index>(k) <= x.rows(), ErrorCode::bad_argument,
          "knn: k exceeds the training size");
  require(y.size() == static_cast<std::size_t>(x.rows()), ErrorCode::bad_argument,
          "knn: label count mismatch");
  return {x, y, class_count, k};
}

// Neighbour-vote probabilities; equal distances break toward the smaller row
// index, so predictions are reproducible.
inline Matrix knn_predict_proba(const KnnModel& m, const Matrix& query) {
  Matrix probs = Matrix::Zero(query.rows(), m.class_count);
  std::vector<std::pair<double, Eigen::Index>> dist(static_cast<std::size_t>(m.x.rows()));
  for (Eigen::Index r = 0; r < query.rows(); ++r) {
    for (Eigen::Index i = 0; i < m.x.rows(); ++i)
      dist[static_cast<std::size_t>(i)] = {(query.row(r) - m.x.row(i)).squaredNorm(), i};
    std::partial_sort(dist.begin(), dist.begin() + m.k, dist.end());
    for (int t = 0; t < m.k; ++t)
      probs(r, m.y[static_cast<std::size_t>(dist[static_cast<std::size_t>(t)].second)]) += 1.0;
    probs.row(r) /= static_cast<double>(m.k);
  }
  return probs;
}

}  // namespace tabpfgen
