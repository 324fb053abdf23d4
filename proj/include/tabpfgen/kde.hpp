#pragma once

#include <cmath>
#include <vector>

#include "tabpfgen/dataset.hpp"
#include "tabpfgen/error.hpp"
#include "tabpfgen/scorer.hpp"

namespace tabpfgen {

// 2-D Gaussian kernel density with one shared bandwidth:
//   p(q) = 1 / (n 2 pi h^2) * sum_i exp(-|q - x_i|^2 / (2 h^2))
struct Kde2d {
  Matrix points;  // n x 2
  double h = 1.0;
};

inline Kde2d fit_kde(const Matrix& points, double bandwidth = 0.0) {
  require(points.cols() == 2, ErrorCode::bad_argument, "kde: expects 2-D points");
  require(points.rows() >= 1, ErrorCode::bad_argument, "kde: empty point set");
  Kde2d k;
  k.points = points;
  k.h = bandwidth > 0.0 ? bandwidth : median_pairwise_distance(points);
  return k;
}

inline double kde_density(const Kde2d& k, double x, double y) {
  const double inv_2h2 = 0.5 / (k.h * k.h);
  double s = 0.0;
  for (Eigen::Index i = 0; i < k.points.rows(); ++i) {
    const double dx = x - k.points(i, 0);
    const double dy = y - k.points(i, 1);
    s += std::exp(-(dx * dx + dy * dy) * inv_2h2);
  }
  const double norm = 2.0 * 3.14159265358979323846 * k.h * k.h;
  return s / (static_cast<double>(k.points.rows()) * norm);
}

inline double kde_log_density(const Kde2d& k, double x, double y) {
  return std::log(kde_density(k, x, y) + 1e-300);
}

struct DensityGrid {
  std::vector<double> xs;  // column centres
  std::vector<double> ys;  // row centres
  Matrix values;           // ys.size() x xs.size()
};

// Evaluates the KDE on a resolution^2 grid spanning the bounding box of
// `bounds_points` padded by 10% on each side.
inline DensityGrid kde_grid(const Kde2d& k, const Matrix& bounds_points, int resolution = 100) {
  require(resolution >= 2, ErrorCode::bad_argument, "kde: grid resolution must be >= 2");
  const double x_min = bounds_points.col(0).minCoeff();
  const double x_max = bounds_points.col(0).maxCoeff();
  const double y_min = bounds_points.col(1).minCoeff();
  const double y_max = bounds_points.col(1).maxCoeff();
  const double x_pad = 0.1 * (x_max - x_min);
  const double y_pad = 0.1 * (y_max - y_min);

  DensityGrid g;
  g.xs.resize(static_cast<std::size_t>(resolution));
  g.ys.resize(static_cast<std::size_t>(resolution));
  for (int i = 0; i < resolution; ++i) {
    const double t = static_cast<double>(i) / (resolution - 1);
    g.xs[static_cast<std::size_t>(i)] = (x_min - x_pad) + t * ((x_max + x_pad) - (x_min - x_pad));
    g.ys[static_cast<std::size_t>(i)] = (y_min - y_pad) + t * ((y_max + y_pad) - (y_min - y_pad));
  }
  g.values.resize(resolution, resolution);
  for (int r = 0; r < resolution; ++r)
    for (int c = 0; c < resolution; ++c)
      g.values(r, c) = kde_density(k, g.xs[static_cast<std::size_t>(c)],
                                   g.ys[static_cast<std::size_t>(r)]);
  return g;
}

}  // namespace tabpfgen
