#include "sculptor/adapt/neighbours.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

#include "sculptor/error.hpp"

namespace sculptor::adapt {

ad::Matrix reweight(const ad::Matrix& features, double lambda) {
  ad::Matrix out = features;
  if (out.cols() > 0) out.col(out.cols() - 1) *= lambda;
  return out;
}

NeighbourResult aggregate_neighbours(const ad::Matrix& target, const ad::Matrix& source,
                                     const Eigen::VectorXd& source_labels, int k, double lambda) {
  const Eigen::Index ns = source.rows();
  if (k < 1 || k > ns) {
    throw std::invalid_argument("aggregate_neighbours: K=" + std::to_string(k) + " with " + std::to_string(ns) +
                                " source points");
  }
  if (target.cols() != source.cols()) {
    throw ShapeError("aggregate_neighbours: target features " + std::to_string(target.cols()) +
                     " wide, source features " + std::to_string(source.cols()) + " wide");
  }
  if (source_labels.size() != ns) throw ShapeError("aggregate_neighbours: one label per source row required");

  const ad::Matrix t = reweight(target, lambda);
  const ad::Matrix s = reweight(source, lambda);
  const Eigen::Index nt = t.rows();
  const Eigen::Index d = t.cols();

  NeighbourResult out;
  out.k = k;
  out.indices.resize(static_cast<std::size_t>(nt) * k);
  out.aggregate.resize(nt);
  // Feature-major copy of the source so the distance accumulation runs contiguously over sources.
  const Eigen::MatrixXd s_cols = s;
  std::vector<double> dist(static_cast<std::size_t>(ns));
  // Sorted by (distance, index); j ascends, so an equal distance never displaces an entry.
  std::vector<double> best_d(static_cast<std::size_t>(k));
  std::vector<int> best_j(static_cast<std::size_t>(k));
  for (Eigen::Index i = 0; i < nt; ++i) {
    const double* ti = t.data() + i * d;
    std::fill(dist.begin(), dist.end(), 0.0);
    for (Eigen::Index c = 0; c < d; ++c) {
      const double tc = ti[c];
      const double* sc = s_cols.data() + c * ns;
      for (Eigen::Index j = 0; j < ns; ++j) {
        const double diff = tc - sc[j];
        dist[static_cast<std::size_t>(j)] += diff * diff;
      }
    }
    int filled = 0;
    for (Eigen::Index j = 0; j < ns; ++j) {
      const double acc = dist[static_cast<std::size_t>(j)];
      if (filled == k && !(acc < best_d[static_cast<std::size_t>(k - 1)])) continue;
      int pos = filled < k ? filled++ : k - 1;
      while (pos > 0 && acc < best_d[static_cast<std::size_t>(pos - 1)]) {
        best_d[static_cast<std::size_t>(pos)] = best_d[static_cast<std::size_t>(pos - 1)];
        best_j[static_cast<std::size_t>(pos)] = best_j[static_cast<std::size_t>(pos - 1)];
        --pos;
      }
      best_d[static_cast<std::size_t>(pos)] = acc;
      best_j[static_cast<std::size_t>(pos)] = static_cast<int>(j);
    }
    const std::vector<int>& order = best_j;
    double label_sum = 0.0;
    for (int q = 0; q < k; ++q) {
      out.indices[static_cast<std::size_t>(i) * k + q] = order[static_cast<std::size_t>(q)];
      label_sum += source_labels[order[static_cast<std::size_t>(q)]];
    }
    out.aggregate[i] = label_sum / k;
  }
  return out;
}

}  // namespace sculptor::adapt
