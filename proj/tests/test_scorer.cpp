#include <catch2/catch_amalgamated.hpp>

#include "test_support.hpp"

using namespace tabpfgen;
using namespace testsupport;

namespace {

// Fresh random instance: context rows are re-drawn until no pair is closer
// than min_gap, which keeps the kernel away from its stiff regime.
struct Instance {
  Matrix ctx;
  std::vector<int> y;
  Matrix query;
  std::vector<int> select;
};

Instance draw_instance(Rng& rng, Eigen::Index n, Eigen::Index m, Eigen::Index dim, int classes,
                       double min_gap = 1e-3) {
  Instance inst;
  inst.ctx.resize(n, dim);
  for (;;) {
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < dim; ++j) inst.ctx(i, j) = rng.normal();
    double closest = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = i + 1; j < n; ++j)
        closest = std::min(closest, (inst.ctx.row(i) - inst.ctx.row(j)).norm());
    if (n < 2 || closest >= min_gap) break;
  }
  inst.y.clear();
  for (Eigen::Index i = 0; i < n; ++i)
    inst.y.push_back(static_cast<int>(i) % classes);  // every class present
  inst.query.resize(m, dim);
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < dim; ++j) inst.query(i, j) = rng.normal();
  inst.select.clear();
  for (Eigen::Index i = 0; i < m; ++i) inst.select.push_back(static_cast<int>(rng.index(classes)));
  return inst;
}

}  // namespace

TEST_CASE("soft-knn midpoint between opposite classes is a coin flip", "[scorer]") {
  Matrix ctx(2, 1);
  ctx << 0.0, 1.0;
  Matrix q(1, 1);
  q << 0.5;
  for (double h : {0.1, 0.7, 3.0}) {
    const SoftKnnScorer s(h);
    const Matrix p = softmax_rows(s.score(ctx, {0, 1}, 2, q));
    CHECK(p(0, 0) == 0.5);
    CHECK(p(0, 1) == 0.5);
  }
}

TEST_CASE("soft-knn collapses to one-hot as the bandwidth shrinks", "[scorer]") {
  Matrix ctx(2, 1);
  ctx << 0.0, 1.0;
  Matrix q(1, 1);
  q << 0.0;  // exactly on the class-0 context point
  const SoftKnnScorer s(1e-3);
  const Matrix p = softmax_rows(s.score(ctx, {0, 1}, 2, q));
  CHECK(std::abs(p(0, 0) - 1.0) < 1e-6);
  CHECK(p(0, 1) < 1e-6);
}

TEST_CASE("linear scorer separates separable context perfectly", "[scorer]") {
  Rng rng(2);
  Matrix ctx(20, 1);
  std::vector<int> y;
  for (Eigen::Index i = 0; i < 20; ++i) {
    const int cls = i < 10 ? 0 : 1;
    ctx(i, 0) = (cls == 0 ? -2.0 : 2.0) + 0.5 * rng.normal();
    y.push_back(cls);
  }
  const LinearContextScorer s;
  const Matrix logits = s.score(ctx, y, 2, ctx);
  for (Eigen::Index i = 0; i < 20; ++i) {
    int pred = 0;
    logits.row(i).maxCoeff(&pred);
    REQUIRE(pred == y[static_cast<std::size_t>(i)]);
  }
}

TEST_CASE("linear scorer query gradient is the weight row, exactly", "[scorer]") {
  Rng rng(4);
  const Instance inst = draw_instance(rng, 12, 4, 3, 3);
  const LinearContextScorer s;
  const auto [w, b] = s.fit(inst.ctx, inst.y, 3);
  const auto out = s.score_with_grads(inst.ctx, inst.y, 3, inst.query, inst.select, false);
  for (Eigen::Index r = 0; r < inst.query.rows(); ++r)
    CHECK(out.grad_query.row(r) == w.row(inst.select[static_cast<std::size_t>(r)]));
}

TEST_CASE("linear scorer refuses context gradients", "[scorer]") {
  Matrix ctx(4, 1);
  ctx << 0.0, 1.0, 2.0, 3.0;
  const LinearContextScorer s;
  CHECK_THROWS_MATCHES(s.score_with_grads(ctx, {0, 1, 0, 1}, 2, ctx, {0, 0, 1, 1}, true), Error,
                       Catch::Matchers::Predicate<Error>([](const Error& e) {
                         return e.code() == ErrorCode::scorer_unsupported_grad;
                       }));
}

TEST_CASE("soft-knn midpoint gradient points at the selected class", "[scorer]") {
  Matrix ctx(2, 2);
  ctx << -1.0, 0.0, 1.0, 0.0;  // class 0 on the left, class 1 on the right
  Matrix q(1, 2);
  q << 0.0, 0.0;
  const SoftKnnScorer s(0.8);
  const auto out = s.score_with_grads(ctx, {0, 1}, 2, q, {0}, false);
  CHECK(out.grad_query(0, 0) < 0.0);  // increasing f[0] means moving left

  const auto fd = fd_gradient(
      [&](const Matrix& qq) { return s.score(ctx, {0, 1}, 2, qq)(0, 0); }, q);
  CHECK(rel_err(out.grad_query(0, 0), fd(0, 0)) < 1e-4);
  CHECK(rel_err(out.grad_query(0, 1), fd(0, 1)) < 1e-4);
}

TEST_CASE("single-class context has an exactly zero query gradient", "[scorer]") {
  Matrix ctx(3, 2);
  ctx << 1.0, 0.0, -0.5, 0.8, -0.5, -0.8;
  Matrix q(1, 2);
  q << 0.3, -0.2;
  const SoftKnnScorer s(0.7);
  const auto out = s.score_with_grads(ctx, {0, 0, 0}, 1, q, {0}, false);
  CHECK(out.grad_query(0, 0) == 0.0);
  CHECK(out.grad_query(0, 1) == 0.0);
  CHECK(out.logits(0, 0) == std::log(1.0 + s.epsilon()));
}

TEST_CASE("softmax of scorer logits sums to one", "[scorer]") {
  Rng rng(7);
  const SoftKnnScorer knn(0.9);
  const LinearContextScorer lin;
  for (int trial = 0; trial < 50; ++trial) {
    const Instance inst = draw_instance(rng, 8, 5, 2, 2);
    for (const Scorer* s : {static_cast<const Scorer*>(&knn), static_cast<const Scorer*>(&lin)}) {
      const Matrix p = softmax_rows(s->score(inst.ctx, inst.y, 2, inst.query));
      for (Eigen::Index r = 0; r < p.rows(); ++r)
        REQUIRE(std::abs(p.row(r).sum() - 1.0) < 1e-12);
    }
  }
}

TEST_CASE("query gradients agree with central finite differences", "[scorer]") {
  Rng rng(13);
  int checked = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const Instance inst = draw_instance(rng, 6, 3, 2, 2);
    const double h = 0.1 + 0.9 * rng.uniform();  // h >= 0.1 per the contract
    const SoftKnnScorer knn(h);
    const LinearContextScorer lin;
    for (const Scorer* s : {static_cast<const Scorer*>(&knn), static_cast<const Scorer*>(&lin)}) {
      const auto out = s->score_with_grads(inst.ctx, inst.y, 2, inst.query, inst.select, false);
      for (Eigen::Index r = 0; r < inst.query.rows(); ++r) {
        Matrix row = inst.query.row(r);
        const auto fd = fd_gradient(
            [&](const Matrix& q) {
              Matrix full = inst.query;
              full.row(r) = q;
              return s->score(inst.ctx, inst.y, 2, full)(r, inst.select[static_cast<std::size_t>(r)]);
            },
            row);
        for (Eigen::Index j = 0; j < fd.cols(); ++j) {
          REQUIRE(rel_err(out.grad_query(r, j), fd(0, j)) < 1e-4);
          ++checked;
        }
      }
    }
  }
  CHECK(checked > 1000);
}

TEST_CASE("context gradients agree with central finite differences", "[scorer]") {
  Rng rng(29);
  for (int trial = 0; trial < 20; ++trial) {
    const Instance inst = draw_instance(rng, 5, 3, 2, 2);
    const SoftKnnScorer s(0.6);
    const auto out = s.score_with_grads(inst.ctx, inst.y, 2, inst.query, inst.select, true);
    const auto fd = fd_gradient(
        [&](const Matrix& ctx) {
          const Matrix logits = s.score(ctx, inst.y, 2, inst.query);
          double total = 0.0;
          for (Eigen::Index r = 0; r < inst.query.rows(); ++r)
            total += logits(r, inst.select[static_cast<std::size_t>(r)]);
          return total;
        },
        inst.ctx);
    for (Eigen::Index i = 0; i < inst.ctx.rows(); ++i)
      for (Eigen::Index j = 0; j < inst.ctx.cols(); ++j)
        REQUIRE(rel_err(out.grad_context(i, j), fd(i, j)) < 1e-4);
  }
}

TEST_CASE("permuting the context leaves logits unchanged", "[scorer]") {
  Rng rng(31);
  const SoftKnnScorer knn(0.8);
  const LinearContextScorer lin;
  for (int trial = 0; trial < 20; ++trial) {
    const Instance inst = draw_instance(rng, 10, 4, 3, 2);
    std::vector<Eigen::Index> perm(10);
    std::iota(perm.begin(), perm.end(), 0);
    rng.shuffle(perm);
    Matrix ctx_p(10, 3);
    std::vector<int> y_p(10);
    for (Eigen::Index i = 0; i < 10; ++i) {
      ctx_p.row(i) = inst.ctx.row(perm[static_cast<std::size_t>(i)]);
      y_p[static_cast<std::size_t>(i)] = inst.y[static_cast<std::size_t>(perm[static_cast<std::size_t>(i)])];
    }
    const Matrix a = knn.score(inst.ctx, inst.y, 2, inst.query);
    const Matrix b = knn.score(ctx_p, y_p, 2, inst.query);
    CHECK(a == b);  // bit-identical for the kernel scorer

    const Matrix la = lin.score(inst.ctx, inst.y, 2, inst.query);
    const Matrix lb = lin.score(ctx_p, y_p, 2, inst.query);
    REQUIRE((la - lb).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("soft-knn logits are translation covariant", "[scorer]") {
  Rng rng(37);
  const SoftKnnScorer s(0.8);
  for (int trial = 0; trial < 20; ++trial) {
    const Instance inst = draw_instance(rng, 8, 4, 2, 2);
    Eigen::RowVectorXd shift(2);
    shift << 0.5, -0.25;
    const Matrix a = s.score(inst.ctx, inst.y, 2, inst.query);
    const Matrix b = s.score(inst.ctx.rowwise() + shift, inst.y, 2, inst.query.rowwise() + shift);
    REQUIRE((a - b).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("median heuristic is permutation invariant and positive", "[scorer]") {
  Rng rng(41);
  Matrix x(15, 3);
  for (Eigen::Index i = 0; i < x.rows(); ++i)
    for (Eigen::Index j = 0; j < x.cols(); ++j) x(i, j) = rng.normal();
  const double h = median_pairwise_distance(x);
  CHECK(h > 0.0);
  std::vector<Eigen::Index> perm(15);
  std::iota(perm.begin(), perm.end(), 0);
  rng.shuffle(perm);
  Matrix xp(15, 3);
  for (Eigen::Index i = 0; i < 15; ++i) xp.row(i) = x.row(perm[static_cast<std::size_t>(i)]);
  CHECK(median_pairwise_distance(xp) == h);
  CHECK(median_pairwise_distance(Matrix::Zero(1, 3)) == 1.0);
}

TEST_CASE("scorer rejects bad inputs", "[scorer]") {
  const SoftKnnScorer s(1.0);
  Matrix empty(0, 2);
  Matrix q(1, 2);
  q.setZero();
  CHECK_THROWS_AS(s.score(empty, {}, 2, q), Error);
  Matrix ctx(2, 2);
  ctx.setZero();
  CHECK_THROWS_MATCHES(s.score(ctx, {0, 5}, 2, q), Error,
                       Catch::Matchers::Predicate<Error>([](const Error& e) {
                         return e.code() == ErrorCode::label_out_of_range;
                       }));
}
