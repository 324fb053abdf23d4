#pragma once

#include <cmath>
#include <memory>
#include <string>
#include <vector>

#include "tabpfgen/error.hpp"
#include "tabpfgen/scorer.hpp"

namespace tabpfgen {

enum class EnergyVariant { core, full };

inline const char* variant_name(EnergyVariant v) {
  return v == EnergyVariant::core ? "core" : "full";
}

// Binds a frozen scorer and a conditioning context to the energies:
//   class-agnostic    E(x)   = -logsumexp_k f(x)[k]
//   class-conditional E(x|y) = -f(x)[y]
// The full variant adds the role-swapped term: the class-conditional energy
// of the context rows evaluated with the synthetic batch as context, weighted
// by swap_weight.
struct EnergyModel {
  std::shared_ptr<const Scorer> scorer;
  Matrix ctx_x;  // standardized conditioning rows
  std::vector<int> ctx_y;
  int class_count = 0;
  EnergyVariant variant = EnergyVariant::core;
  double swap_weight = 1.0;
};

inline double logsumexp_row(const Eigen::RowVectorXd& v) {
  const double mx = v.maxCoeff();
  if (!std::isfinite(mx)) return mx;  // all -inf stays -inf
  return mx + std::log((v.array() - mx).exp().sum());
}

inline Vector class_agnostic_energy(const EnergyModel& m, const Matrix& x) {
  const Matrix logits = m.scorer->score(m.ctx_x, m.ctx_y, m.class_count, x);
  Vector e(logits.rows());
  for (Eigen::Index r = 0; r < logits.rows(); ++r) e(r) = -logsumexp_row(logits.row(r));
  return e;
}

inline Vector class_conditional_energy(const EnergyModel& m, const Matrix& x,
                                       const std::vector<int>& y) {
  require(y.size() == static_cast<std::size_t>(x.rows()), ErrorCode::bad_argument,
          "energy: one conditioning label per row");
  for (int k : y)
    require(k >= 0 && k < m.class_count, ErrorCode::label_out_of_range,
            "energy: conditioning label out of range");
  const Matrix logits = m.scorer->score(m.ctx_x, m.ctx_y, m.class_count, x);
  Vector e(logits.rows());
  for (Eigen::Index r = 0; r < logits.rows(); ++r)
    e(r) = -logits(r, y[static_cast<std::size_t>(r)]);
  return e;
}

struct EnergyGrad {
  double total = 0.0;
  Matrix grad;  // m x D, d total / d x_synth
};

// Total batch energy (sum over rows, keeping per-row gradient magnitudes
// independent of batch size) and its gradient with respect to x_synth.
// core: sum_r E(x_r | y_r) conditioned on the model context.
// full: adds swap_weight * sum_i E(ctx_i | ctx_y_i) conditioned on
// (x_synth, y_synth); that term couples the rows through the kernel.
inline EnergyGrad energy_and_grad(const EnergyModel& m, const Matrix& x_synth,
                                  const std::vector<int>& y_synth) {
  require(y_synth.size() == static_cast<std::size_t>(x_synth.rows()), ErrorCode::bad_argument,
          "energy: one conditioning label per synthetic row");
  EnergyGrad out;
  const auto fwd =
      m.scorer->score_with_grads(m.ctx_x, m.ctx_y, m.class_count, x_synth, y_synth, false);
  out.total = 0.0;
  for (Eigen::Index r = 0; r < x_synth.rows(); ++r)
    out.total -= fwd.logits(r, y_synth[static_cast<std::size_t>(r)]);
  out.grad = -fwd.grad_query;

  if (m.variant == EnergyVariant::full && m.swap_weight != 0.0) {
    require(m.scorer->supports_context_grad(), ErrorCode::scorer_unsupported_grad,
            std::string("energy: full variant needs context gradients, which scorer '") +
                m.scorer->kind() + "' does not provide");
    const auto swapped =
        m.scorer->score_with_grads(x_synth, y_synth, m.class_count, m.ctx_x, m.ctx_y, true);
    double swap_total = 0.0;
    for (Eigen::Index i = 0; i < m.ctx_x.rows(); ++i)
      swap_total -= swapped.logits(i, m.ctx_y[static_cast<std::size_t>(i)]);
    out.total += m.swap_weight * swap_total;
    out.grad -= m.swap_weight * swapped.grad_context;
  }
  return out;
}

}  // namespace tabpfgen
