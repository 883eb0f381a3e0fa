#include "sculptor/adapt/losses.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "sculptor/error.hpp"

namespace sculptor::adapt {

namespace {

ad::DiffValue one_minus(const ad::DiffValue& x) { return ad::shift(ad::scale(x, -1.0), 1.0); }

ad::DiffValue mean_squared(const ad::DiffValue& diff) { return ad::mean(ad::mul(diff, diff)); }

ad::DiffValue level_mean(const std::vector<ad::DiffValue>& terms) {
  ad::DiffValue acc = terms.front();
  for (std::size_t i = 1; i < terms.size(); ++i) acc = ad::add(acc, terms[i]);
  return ad::scale(acc, 1.0 / static_cast<double>(terms.size()));
}

ad::DiffValue kernel_mean(const ad::DiffValue& a, const ad::DiffValue& b, double inv_two_sigma_sq) {
  return ad::mean(ad::exp(ad::scale(ad::pairwise_sqdist(a, b), -inv_two_sigma_sq)));
}

}  // namespace

void DomainBatch::validate() const {
  if (source.empty() || source.size() != target.size()) {
    throw ShapeError("DomainBatch: " + std::to_string(source.size()) + " source levels vs " +
                     std::to_string(target.size()) + " target levels");
  }
  const Eigen::Index ns = source.front().rows();
  const Eigen::Index nt = target.front().rows();
  const Eigen::Index d = source.front().cols();
  for (std::size_t l = 0; l < source.size(); ++l) {
    if (source[l].rows() != ns || source[l].cols() != d || target[l].rows() != nt || target[l].cols() != d) {
      throw ShapeError("DomainBatch: level " + std::to_string(l) + " has source " + source[l].shape() +
                       " and target " + target[l].shape());
    }
  }
  if (source_labels.size() != ns) throw ShapeError("DomainBatch: one label per source row required");
}

DomainPredictions decode_batch(const DomainBatch& batch, const model::Decoder& decoder) {
  DomainPredictions out;
  for (const auto& f : batch.source) out.source.push_back(decoder(f));
  for (const auto& f : batch.target) out.target.push_back(decoder(f));
  return out;
}

ad::DiffValue mmd_layer(const ad::DiffValue& source, const ad::DiffValue& target, double sigma) {
  if (source.rows() == 0 || target.rows() == 0) throw std::invalid_argument("mmd_layer: empty feature set");
  if (!(sigma > 0.0)) throw std::invalid_argument("mmd_layer: bandwidth must be positive");
  const double g = 1.0 / (2.0 * sigma * sigma);
  const ad::DiffValue kss = kernel_mean(source, source, g);
  const ad::DiffValue ktt = kernel_mean(target, target, g);
  const ad::DiffValue kst = kernel_mean(source, target, g);
  return ad::sub(ad::add(kss, ktt), ad::scale(kst, 2.0));
}

double median_bandwidth(const ad::Matrix& source, const ad::Matrix& target) {
  ad::Matrix merged(source.rows() + target.rows(), source.cols());
  merged << source, target;
  const Eigen::Index n = merged.rows();
  const Eigen::Index d = merged.cols();
  std::vector<double> dist;
  dist.resize(static_cast<std::size_t>(n * (n - 1) / 2));
  const Eigen::MatrixXd cols = merged;
  std::size_t offset = 0;
  for (Eigen::Index i = 0; i + 1 < n; ++i) {
    double* out = dist.data() + offset;
    const Eigen::Index len = n - i - 1;
    std::fill(out, out + len, 0.0);
    for (Eigen::Index c = 0; c < d; ++c) {
      const double a = merged(i, c);
      const double* b = cols.data() + c * n + i + 1;
      for (Eigen::Index j = 0; j < len; ++j) out[j] += (a - b[j]) * (a - b[j]);
    }
    offset += static_cast<std::size_t>(len);
  }
  if (dist.empty()) return 1.0;
  // Median of squared distances, then sqrt: monotone, so it is the median distance.
  const std::size_t mid = dist.size() / 2;
  std::nth_element(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(mid), dist.end());
  double median = dist[mid];
  if (dist.size() % 2 == 0) {
    const double lower = *std::max_element(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(mid));
    median = 0.5 * (std::sqrt(lower) + std::sqrt(median));
  } else {
    median = std::sqrt(median);
  }
  return median > 0.0 ? median : 1.0;
}

std::vector<double> median_bandwidths(const DomainBatch& batch) {
  std::vector<double> out;
  for (std::size_t l = 0; l < batch.levels(); ++l) {
    out.push_back(median_bandwidth(batch.source[l].value(), batch.target[l].value()));
  }
  return out;
}

ad::DiffValue loss_sim(const DomainBatch& batch, const std::optional<std::vector<double>>& sigmas) {
  batch.validate();
  const std::vector<double> bw = sigmas ? *sigmas : median_bandwidths(batch);
  if (bw.size() != batch.levels()) throw ShapeError("loss_sim: one bandwidth per level required");
  std::vector<ad::DiffValue> terms;
  for (std::size_t l = 0; l < batch.levels(); ++l) terms.push_back(mmd_layer(batch.source[l], batch.target[l], bw[l]));
  return level_mean(terms);
}

ad::DiffValue loss_source(const DomainBatch& batch, const DomainPredictions& predictions) {
  if (batch.source_labels.size() == 0) throw ShapeError("loss_source: batch carries no source labels");
  const ad::DiffValue labels = ad::DiffValue::constant(ad::Matrix(batch.source_labels));
  std::vector<ad::DiffValue> terms;
  for (const auto& p : predictions.source) {
    if (p.rows() != labels.rows()) throw ShapeError("loss_source: predictions " + p.shape() + " vs labels " + labels.shape());
    terms.push_back(mean_squared(ad::sub(p, labels)));
  }
  return level_mean(terms);
}

ad::DiffValue loss_source(const DomainBatch& batch, const model::Decoder& decoder) {
  batch.validate();
  DomainPredictions preds;
  for (const auto& f : batch.source) preds.source.push_back(decoder(f));
  return loss_source(batch, preds);
}

ad::DiffValue loss_target(const DomainBatch& batch, const DomainPredictions& predictions) {
  const auto nl = static_cast<Eigen::Index>(predictions.target.size());
  if (nl == 0 || batch.pseudo_labels.cols() != nl || batch.pseudo_labels.rows() != predictions.target.front().rows()) {
    throw ShapeError("loss_target: pseudo-labels missing or misaligned");
  }
  std::vector<ad::DiffValue> terms;
  for (Eigen::Index l = 0; l < nl; ++l) {
    const ad::DiffValue y = ad::DiffValue::constant(ad::Matrix(batch.pseudo_labels.col(l)));
    terms.push_back(mean_squared(ad::sub(predictions.target[static_cast<std::size_t>(l)], y)));
  }
  return level_mean(terms);
}

ad::DiffValue loss_target(const DomainBatch& batch, const model::Decoder& decoder) {
  batch.validate();
  DomainPredictions preds;
  for (const auto& f : batch.target) preds.target.push_back(decoder(f));
  return loss_target(batch, preds);
}

ad::DiffValue binary_entropy(const ad::DiffValue& x) {
  const ad::DiffValue q = one_minus(x);
  return ad::scale(ad::add(ad::mul(x, ad::log(x)), ad::mul(q, ad::log(q))), -1.0);
}

ad::DiffValue loss_mi(const DomainBatch&, const DomainPredictions& predictions) {
  if (predictions.target.empty()) throw ShapeError("loss_mi: no target predictions");
  std::vector<ad::DiffValue> terms;
  for (const auto& p : predictions.target) {
    terms.push_back(ad::sub(binary_entropy(ad::mean(p)), ad::mean(binary_entropy(p))));
  }
  return level_mean(terms);
}

ad::DiffValue loss_mi(const DomainBatch& batch, const model::Decoder& decoder) {
  batch.validate();
  DomainPredictions preds;
  for (const auto& f : batch.target) preds.target.push_back(decoder(f));
  return loss_mi(batch, preds);
}

TotalLoss total_loss(const DomainBatch& batch, const model::Decoder& decoder, int epoch, const LossWeights& weights,
                     const AblationFlags& flags, const std::optional<std::vector<double>>& sigmas) {
  batch.validate();
  LossReport r;
  r.w1 = flags.no_mmd ? 0.0 : weights.w1;
  r.w2 = flags.no_source ? 0.0 : weights.w2;
  r.w3 = flags.no_target ? 0.0 : weights.w3(epoch);
  r.w4 = flags.no_mi ? 0.0 : weights.w4(epoch);

  DomainPredictions preds;
  if (r.w2 > 0.0) {
    for (const auto& f : batch.source) preds.source.push_back(decoder(f));
  }
  if (r.w3 > 0.0 || r.w4 > 0.0) {
    for (const auto& f : batch.target) preds.target.push_back(decoder(f));
  }

  ad::DiffValue total = ad::DiffValue::constant(0.0);
  if (r.w1 > 0.0) {
    const ad::DiffValue term = loss_sim(batch, sigmas);
    r.sim = term.item();
    total = ad::add(total, ad::scale(term, r.w1));
  }
  if (r.w2 > 0.0) {
    const ad::DiffValue term = loss_source(batch, preds);
    r.source = term.item();
    total = ad::add(total, ad::scale(term, r.w2));
  }
  if (r.w3 > 0.0) {
    const ad::DiffValue term = loss_target(batch, preds);
    r.target = term.item();
    total = ad::add(total, ad::scale(term, r.w3));
  }
  if (r.w4 > 0.0) {
    const ad::DiffValue term = loss_mi(batch, preds);
    r.mi = term.item();
    total = ad::sub(total, ad::scale(term, r.w4));
  }
  r.total = total.item();
  return {total, r};
}

}  // namespace sculptor::adapt
