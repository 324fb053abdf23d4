#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "tabpfgen/dataset.hpp"
#include "tabpfgen/error.hpp"

namespace tabpfgen {

struct LogitsWithGrads {
  Matrix logits;        // m x K
  Matrix grad_query;    // m x D: d f(q_r)[select_r] / d q_r
  Matrix grad_context;  // n_ctx x D, accumulated over query rows; only when requested
};

// Frozen in-context classifier: given a labelled context, maps query rows to
// K logits. Implementations are stateless and deterministic — identical
// inputs give bit-identical outputs — and expose closed-form gradients of a
// selected logit with respect to the query (and optionally the context).
class Scorer {
 public:
  virtual ~Scorer() = default;

  virtual const char* kind() const = 0;
  virtual bool supports_context_grad() const = 0;

  virtual Matrix score(const Matrix& ctx_x, const std::vector<int>& ctx_y, int class_count,
                       const Matrix& query) const = 0;

  virtual LogitsWithGrads score_with_grads(const Matrix& ctx_x, const std::vector<int>& ctx_y,
                                           int class_count, const Matrix& query,
                                           const std::vector<int>& select,
                                           bool wrt_context) const = 0;

 protected:
  static void check_inputs(const Matrix& ctx_x, const std::vector<int>& ctx_y, int class_count,
                           const Matrix& query) {
    require(ctx_x.rows() >= 1, ErrorCode::bad_argument, "scorer: empty context");
    require(ctx_y.size() == static_cast<std::size_t>(ctx_x.rows()), ErrorCode::bad_argument,
            "scorer: context label count mismatch");
    require(class_count >= 1, ErrorCode::bad_argument, "scorer: class_count must be >= 1");
    for (int y : ctx_y)
      require(y >= 0 && y < class_count, ErrorCode::label_out_of_range,
              "scorer: context label out of range");
    require(query.cols() == ctx_x.cols(), ErrorCode::bad_argument,
            "scorer: query dimensionality mismatch");
    require(query.allFinite(), ErrorCode::bad_argument, "scorer: non-finite query");
  }
};

// Median of the pairwise Euclidean distances (upper median); the scale-free
// default bandwidth for the soft-kNN kernel. Falls back to 1 when there are
// no pairs or every pair coincides.
inline double median_pairwise_distance(const Matrix& x) {
  const Eigen::Index n = x.rows();
  if (n < 2) return 1.0;
  std::vector<double> dists;
  dists.reserve(static_cast<std::size_t>(n) * static_cast<std::size_t>(n - 1) / 2);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j) dists.push_back((x.row(i) - x.row(j)).norm());
  const auto mid = dists.size() / 2;
  std::nth_element(dists.begin(), dists.begin() + static_cast<long>(mid), dists.end());
  const double med = dists[mid];
  return med > 0.0 ? med : 1.0;
}

// Attention-style classifier: softmax kernel weights over the context,
//   w_i(q) = softmax_i(-|q - x_i|^2 / (2 h^2)),
// and per-class logits f(q)[k] = log(sum_{i: y_i = k} w_i(q) + eps).
// Sums over the context are accumulated in ascending value order, which makes
// the logits invariant under context row permutation bit-for-bit.
class SoftKnnScorer final : public Scorer {
 public:
  explicit SoftKnnScorer(double bandwidth, double epsilon = 1e-12)
      : h_(bandwidth), eps_(epsilon) {
    require(h_ > 0.0, ErrorCode::bad_config, "soft_knn: bandwidth must be > 0");
    require(eps_ > 0.0, ErrorCode::bad_config, "soft_knn: epsilon must be > 0");
  }

  const char* kind() const override { return "soft_knn"; }
  bool supports_context_grad() const override { return true; }
  double bandwidth() const { return h_; }
  double epsilon() const { return eps_; }

  Matrix score(const Matrix& ctx_x, const std::vector<int>& ctx_y, int class_count,
               const Matrix& query) const override {
    check_inputs(ctx_x, ctx_y, class_count, query);
    const Eigen::Index m = query.rows();
    Matrix logits(m, class_count);
    std::vector<std::pair<double, int>> terms;
    for (Eigen::Index r = 0; r < m; ++r) {
      kernel_terms(ctx_x, ctx_y, query.row(r), terms);
      Vector class_mass = Vector::Zero(class_count);
      double total = 0.0;
      for (const auto& [e, c] : terms) {
        total += e;
        class_mass(c) += e;
      }
      for (int k = 0; k < class_count; ++k)
        logits(r, k) = std::log(class_mass(k) / total + eps_);
    }
    return logits;
  }

  LogitsWithGrads score_with_grads(const Matrix& ctx_x, const std::vector<int>& ctx_y,
                                   int class_count, const Matrix& query,
                                   const std::vector<int>& select,
                                   bool wrt_context) const override {
    check_inputs(ctx_x, ctx_y, class_count, query);
    require(select.size() == static_cast<std::size_t>(query.rows()), ErrorCode::bad_argument,
            "scorer: select length must equal query rows");
    for (int k : select)
      require(k >= 0 && k < class_count, ErrorCode::label_out_of_range,
              "scorer: selected class out of range");

    const Eigen::Index m = query.rows();
    const Eigen::Index n = ctx_x.rows();
    const Eigen::Index dim = ctx_x.cols();
    const double inv_h2 = 1.0 / (h_ * h_);

    LogitsWithGrads out;
    out.logits.resize(m, class_count);
    out.grad_query.resize(m, dim);
    if (wrt_context) out.grad_context = Matrix::Zero(n, dim);

    std::vector<std::pair<double, int>> terms;
    Vector weights(n);
    for (Eigen::Index r = 0; r < m; ++r) {
      const auto q = query.row(r);
      // Logits via the order-sorted path (bitwise identical to score()).
      kernel_terms(ctx_x, ctx_y, q, terms);
      Vector class_mass = Vector::Zero(class_count);
      double total = 0.0;
      for (const auto& [e, c] : terms) {
        total += e;
        class_mass(c) += e;
      }
      for (int k = 0; k < class_count; ++k)
        out.logits(r, k) = std::log(class_mass(k) / total + eps_);

      // Unnormalized kernel masses in context order for the gradient path.
      // Keeping the per-class and overall accumulators on the same loop makes
      // the single-class gradient vanish exactly, not just to rounding.
      double smax = -std::numeric_limits<double>::infinity();
      for (Eigen::Index i = 0; i < n; ++i) {
        const double s = -(q - ctx_x.row(i)).squaredNorm() * 0.5 * inv_h2;
        weights(i) = s;
        smax = std::max(smax, s);
      }
      const int sel = select[static_cast<std::size_t>(r)];
      double z = 0.0;
      double mass_sel_raw = 0.0;
      Eigen::RowVectorXd sum_sel = Eigen::RowVectorXd::Zero(dim);
      Eigen::RowVectorXd sum_all = Eigen::RowVectorXd::Zero(dim);
      for (Eigen::Index i = 0; i < n; ++i) {
        weights(i) = std::exp(weights(i) - smax);
        z += weights(i);
        const Eigen::RowVectorXd wg = weights(i) * (ctx_x.row(i) - q) * inv_h2;
        sum_all += wg;
        if (ctx_y[static_cast<std::size_t>(i)] == sel) {
          sum_sel += wg;
          mass_sel_raw += weights(i);
        }
      }
      const double mass_sel = mass_sel_raw / z;
      const double denom = mass_sel + eps_;
      out.grad_query.row(r) = (sum_sel / z - mass_sel * (sum_all / z)) / denom;

      if (wrt_context) {
        for (Eigen::Index i = 0; i < n; ++i) {
          const double member = ctx_y[static_cast<std::size_t>(i)] == sel ? 1.0 : 0.0;
          const double coef = (weights(i) / z) * (member - mass_sel) / denom;
          out.grad_context.row(i) += coef * (q - ctx_x.row(i)) * inv_h2;
        }
      }
    }
    return out;
  }

 private:
  // exp(s_i - max s) per context row, paired with its class and sorted
  // ascending so the accumulation order is a pure function of the values.
  void kernel_terms(const Matrix& ctx_x, const std::vector<int>& ctx_y,
                    const Eigen::RowVectorXd& q, std::vector<std::pair<double, int>>& terms) const {
    const Eigen::Index n = ctx_x.rows();
    const double inv_2h2 = 0.5 / (h_ * h_);
    terms.clear();
    terms.reserve(static_cast<std::size_t>(n));
    double smax = -std::numeric_limits<double>::infinity();
    std::vector<double> s(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) {
      s[static_cast<std::size_t>(i)] = -(q - ctx_x.row(i)).squaredNorm() * inv_2h2;
      smax = std::max(smax, s[static_cast<std::size_t>(i)]);
    }
    for (Eigen::Index i = 0; i < n; ++i)
      terms.emplace_back(std::exp(s[static_cast<std::size_t>(i)] - smax),
                         ctx_y[static_cast<std::size_t>(i)]);
    std::sort(terms.begin(), terms.end());
  }

  double h_;
  double eps_;
};

// One-vs-rest ridge logistic regression refit on the context at every call:
// deterministic full-batch Newton iterations, so repeated calls with the same
// context are bit-identical. Query logits are W q + b; the fit is treated as
// a constant of the query, hence no context gradient.
class LinearContextScorer final : public Scorer {
 public:
  explicit LinearContextScorer(double ridge = 1e-6, int max_iter = 50, double tol = 1e-10)
      : ridge_(ridge), max_iter_(max_iter), tol_(tol) {
    require(ridge_ >= 0.0, ErrorCode::bad_config, "linear_context: ridge must be >= 0");
    require(max_iter_ >= 1, ErrorCode::bad_config, "linear_context: max_iter must be >= 1");
  }

  const char* kind() const override { return "linear_context"; }
  bool supports_context_grad() const override { return false; }

  Matrix score(const Matrix& ctx_x, const std::vector<int>& ctx_y, int class_count,
               const Matrix& query) const override {
    check_inputs(ctx_x, ctx_y, class_count, query);
    const auto [w, b] = fit(ctx_x, ctx_y, class_count);
    return (query * w.transpose()).rowwise() + b.transpose();
  }

  LogitsWithGrads score_with_grads(const Matrix& ctx_x, const std::vector<int>& ctx_y,
                                   int class_count, const Matrix& query,
                                   const std::vector<int>& select,
                                   bool wrt_context) const override {
    check_inputs(ctx_x, ctx_y, class_count, query);
    require(!wrt_context, ErrorCode::scorer_unsupported_grad,
            "linear_context: context gradients are not available (the fit is not differentiated)");
    require(select.size() == static_cast<std::size_t>(query.rows()), ErrorCode::bad_argument,
            "scorer: select length must equal query rows");
    const auto [w, b] = fit(ctx_x, ctx_y, class_count);
    LogitsWithGrads out;
    out.logits = (query * w.transpose()).rowwise() + b.transpose();
    out.grad_query.resize(query.rows(), query.cols());
    for (Eigen::Index r = 0; r < query.rows(); ++r) {
      const int sel = select[static_cast<std::size_t>(r)];
      require(sel >= 0 && sel < class_count, ErrorCode::label_out_of_range,
              "scorer: selected class out of range");
      out.grad_query.row(r) = w.row(sel);
    }
    return out;
  }

  // Exposed for tests: W is K x D, b is K.
  std::pair<Matrix, Vector> fit(const Matrix& x, const std::vector<int>& y, int class_count) const {
    const Eigen::Index n = x.rows();
    const Eigen::Index dim = x.cols();
    Matrix w = Matrix::Zero(class_count, dim);
    Vector b = Vector::Zero(class_count);
    for (int k = 0; k < class_count; ++k) {
      Vector target(n);
      Eigen::Index pos = 0;
      for (Eigen::Index i = 0; i < n; ++i) {
        target(i) = y[static_cast<std::size_t>(i)] == k ? 1.0 : 0.0;
        pos += target(i) > 0.5 ? 1 : 0;
      }
      if (pos == 0 || pos == n) {
        // Degenerate one-vs-rest problem: no decision boundary to fit.
        const double num = static_cast<double>(pos) + 0.5;
        const double den = static_cast<double>(n - pos) + 0.5;
        b(k) = std::log(num / den);
        continue;
      }
      Vector theta = Vector::Zero(dim + 1);  // [w_k; b_k]
      double loss = binary_loss(x, target, theta);
      for (int iter = 0; iter < max_iter_; ++iter) {
        Vector p(n);
        for (Eigen::Index i = 0; i < n; ++i)
          p(i) = sigmoid(x.row(i).dot(theta.head(dim)) + theta(dim));
        Vector grad = Vector::Zero(dim + 1);
        grad.head(dim) = x.transpose() * (p - target) + ridge_ * theta.head(dim);
        grad(dim) = (p - target).sum();
        if (grad.norm() <= tol_) break;
        Matrix hess = Matrix::Zero(dim + 1, dim + 1);
        const Vector r = (p.array() * (1.0 - p.array())).matrix();
        hess.topLeftCorner(dim, dim) = x.transpose() * r.asDiagonal() * x;
        hess.topLeftCorner(dim, dim).diagonal().array() += ridge_;
        hess.topRightCorner(dim, 1) = x.transpose() * r;
        hess.bottomLeftCorner(1, dim) = (x.transpose() * r).transpose();
        hess(dim, dim) = r.sum();
        hess.diagonal().array() += 1e-12;  // guards the solve when p saturates
        const Vector step = hess.ldlt().solve(grad);
        // Damped Newton: backtrack deterministically if the loss rises.
        double scale = 1.0;
        Vector candidate = theta - step;
        double cand_loss = binary_loss(x, target, candidate);
        int backtracks = 0;
        while (cand_loss > loss && backtracks < 30) {
          scale *= 0.5;
          candidate = theta - scale * step;
          cand_loss = binary_loss(x, target, candidate);
          ++backtracks;
        }
        theta = candidate;
        loss = cand_loss;
      }
      w.row(k) = theta.head(dim).transpose();
      b(k) = theta(dim);
    }
    return {w, b};
  }

 private:
  static double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

  double binary_loss(const Matrix& x, const Vector& target, const Vector& theta) const {
    const Eigen::Index dim = x.cols();
    double loss = 0.5 * ridge_ * theta.head(dim).squaredNorm();
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      const double z = x.row(i).dot(theta.head(dim)) + theta(dim);
      // log(1 + exp(-z*sign)) written in the stable split form.
      const double margin = target(i) > 0.5 ? z : -z;
      loss += margin >= 0 ? std::log1p(std::exp(-margin)) : -margin + std::log1p(std::exp(margin));
    }
    return loss;
  }

  double ridge_;
  int max_iter_;
  double tol_;
};

enum class ScorerKind { soft_knn, linear_context };

struct ScorerConfig {
  ScorerKind kind = ScorerKind::soft_knn;
  bool median_bandwidth = true;  // resolve bandwidth from the context when true
  double bandwidth = 1.0;
  double epsilon = 1e-12;
  double ridge = 1e-6;
  int newton_max_iter = 50;
};

// Instantiates a scorer, resolving the median-heuristic bandwidth against the
// given (standardized) context once; the returned scorer keeps it frozen.
inline std::shared_ptr<const Scorer> make_scorer(const ScorerConfig& cfg,
                                                 const Matrix& standardized_ctx) {
  switch (cfg.kind) {
    case ScorerKind::soft_knn: {
      const double h = cfg.median_bandwidth ? median_pairwise_distance(standardized_ctx)
                                            : cfg.bandwidth;
      return std::make_shared<SoftKnnScorer>(h, cfg.epsilon);
    }
    case ScorerKind::linear_context:
      return std::make_shared<LinearContextScorer>(cfg.ridge, cfg.newton_max_iter);
  }
  fail(ErrorCode::bad_config, "unknown scorer kind");
}

inline Matrix softmax_rows(const Matrix& logits) {
  Matrix out(logits.rows(), logits.cols());
  for (Eigen::Index r = 0; r < logits.rows(); ++r) {
    const double mx = logits.row(r).maxCoeff();
    out.row(r) = (logits.row(r).array() - mx).exp();
    out.row(r) /= out.row(r).sum();
  }
  return out;
}

}  // namespace tabpfgen
