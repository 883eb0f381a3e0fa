#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>
#include <stdexcept>

#include "oracles.hpp"
#include "sculptor/adapt/losses.hpp"
#include "sculptor/adapt/neighbours.hpp"
#include "sculptor/adapt/pseudo_labels.hpp"
#include "sculptor/error.hpp"

namespace ad = sculptor::ad;
namespace ap = sculptor::adapt;
namespace md = sculptor::model;

namespace {

ad::Matrix gaussian(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed, double shift = 0.0, double scale = 1.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(shift, scale);
  ad::Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = g(rng);
  return m;
}

Eigen::VectorXd random_labels(Eigen::Index n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) y[i] = static_cast<double>(rng() % 2);
  return y;
}

ap::DomainBatch make_batch(int levels, Eigen::Index ns, Eigen::Index nt, Eigen::Index d, std::uint64_t seed) {
  ap::DomainBatch b;
  for (int l = 0; l < levels; ++l) {
    b.source.push_back(ad::DiffValue::constant(gaussian(ns, d, seed + 10 * l)));
    b.target.push_back(ad::DiffValue::constant(gaussian(nt, d, seed + 10 * l + 5, 0.3, 1.2)));
  }
  b.source_labels = random_labels(ns, seed + 99);
  std::mt19937_64 rng(seed + 7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  b.pseudo_labels.resize(nt, levels);
  for (Eigen::Index i = 0; i < b.pseudo_labels.size(); ++i) b.pseudo_labels.data()[i] = u(rng);
  return b;
}

ad::DiffValue column(const Eigen::VectorXd& v) { return ad::DiffValue::constant(ad::Matrix(v)); }

md::Decoder random_decoder(ad::ParameterSet& params, Eigen::Index d, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  md::Decoder dec(params, d, {8, 4}, 0.5, rng);
  std::normal_distribution<double> g(0.0, 0.2);
  for (auto& p : params.items())
    if (p.name.ends_with(".bias"))
      for (Eigen::Index i = 0; i < p.value.value().size(); ++i) p.value.mutable_value().data()[i] = g(rng);
  return dec;
}

}  // namespace

// ---- MMD -----------------------------------------------------------------

TEST(Mmd, IdenticalSetsGiveZero) {
  for (std::uint64_t s = 0; s < 5; ++s) {
    const auto x = ad::DiffValue::constant(gaussian(40, 6, s));
    EXPECT_EQ(ap::mmd_layer(x, x, 1.3).item(), 0.0);
  }
}

TEST(Mmd, PermutedCopyNearZero) {
  const ad::Matrix x = gaussian(30, 5, 1);
  Eigen::PermutationMatrix<Eigen::Dynamic> perm(30);
  perm.setIdentity();
  std::mt19937_64 rng(2);
  std::shuffle(perm.indices().data(), perm.indices().data() + 30, rng);
  const ad::Matrix y = perm * x;
  EXPECT_NEAR(ap::mmd_layer(ad::DiffValue::constant(x), ad::DiffValue::constant(y), 0.8).item(), 0.0, 1e-14);
}

TEST(Mmd, NonNegativeOnRandomPairs) {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> n(1, 30);
  std::uniform_real_distribution<double> sig(0.1, 5.0);
  for (int trial = 0; trial < 100; ++trial) {
    const auto a = ad::DiffValue::constant(gaussian(n(rng), 4, 1000 + trial));
    const auto b = ad::DiffValue::constant(gaussian(n(rng), 4, 2000 + trial, 0.2 * (trial % 5)));
    EXPECT_GE(ap::mmd_layer(a, b, sig(rng)).item(), 0.0) << "trial " << trial;
  }
}

TEST(Mmd, SinglePairClosedForm) {
  // |x - y| = sigma sqrt(2) gives k = e^-1 and MMD^2 = 2 - 2/e.
  const double sigma = 0.7;
  ad::Matrix x(1, 3), y(1, 3);
  x << 0.1, -0.2, 0.3;
  const Eigen::RowVector3d dir = Eigen::RowVector3d(1, 2, -2).normalized();
  y = x + sigma * std::sqrt(2.0) * dir;
  const double v = ap::mmd_layer(ad::DiffValue::constant(x), ad::DiffValue::constant(y), sigma).item();
  EXPECT_NEAR(v, 2.0 - 2.0 * std::exp(-1.0), 1e-9);
}

TEST(Mmd, Symmetric) {
  const auto a = ad::DiffValue::constant(gaussian(17, 5, 4));
  const auto b = ad::DiffValue::constant(gaussian(23, 5, 5, 0.5));
  EXPECT_NEAR(ap::mmd_layer(a, b, 1.1).item(), ap::mmd_layer(b, a, 1.1).item(), 1e-14);
}

TEST(Mmd, MatchesTripleSum) {
  for (std::uint64_t s = 0; s < 5; ++s) {
    const ad::Matrix a = gaussian(12 + s, 7, 10 + s);
    const ad::Matrix b = gaussian(9 + 2 * s, 7, 20 + s, 0.4);
    const double sigma = 0.5 + s;
    EXPECT_NEAR(ap::mmd_layer(ad::DiffValue::constant(a), ad::DiffValue::constant(b), sigma).item(),
                oracle::mmd(a, b, sigma), 1e-12);
  }
}

TEST(Mmd, BadArguments) {
  const auto a = ad::DiffValue::constant(gaussian(3, 2, 1));
  const auto empty = ad::DiffValue::constant(ad::Matrix(0, 2));
  EXPECT_THROW(ap::mmd_layer(a, empty, 1.0), std::invalid_argument);
  EXPECT_THROW(ap::mmd_layer(a, a, 0.0), std::invalid_argument);
}

TEST(MedianBandwidth, MatchesSortedPairDistances) {
  for (std::uint64_t s = 0; s < 4; ++s) {
    const ad::Matrix a = gaussian(10 + s, 3, 30 + s);
    const ad::Matrix b = gaussian(7, 3, 40 + s, 1.0);
    ad::Matrix m(a.rows() + b.rows(), 3);
    m << a, b;
    std::vector<double> d;
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      for (Eigen::Index j = i + 1; j < m.rows(); ++j) d.push_back((m.row(i) - m.row(j)).norm());
    std::sort(d.begin(), d.end());
    const std::size_t n = d.size();
    const double median = n % 2 ? d[n / 2] : 0.5 * (d[n / 2 - 1] + d[n / 2]);
    EXPECT_NEAR(ap::median_bandwidth(a, b), median, 1e-12);
  }
}

TEST(MedianBandwidth, DegenerateFallsBackToOne) {
  const ad::Matrix a = ad::Matrix::Constant(4, 3, 0.2);
  EXPECT_EQ(ap::median_bandwidth(a, a), 1.0);
}

TEST(LossSim, MeanOfLevels) {
  const auto b = make_batch(3, 15, 11, 5, 50);
  const std::vector<double> sig = {0.9, 1.4, 2.0};
  double expect = 0.0;
  for (int l = 0; l < 3; ++l) expect += oracle::mmd(b.source[l].value(), b.target[l].value(), sig[l]);
  EXPECT_NEAR(ap::loss_sim(b, sig).item(), expect / 3.0, 1e-12);

  const auto bw = ap::median_bandwidths(b);
  EXPECT_NEAR(ap::loss_sim(b).item(), ap::loss_sim(b, bw).item(), 0.0);
  EXPECT_THROW(ap::loss_sim(b, std::vector<double>{1.0}), sculptor::ShapeError);
}

TEST(LossSim, IdenticalDomainsGiveZero) {
  auto b = make_batch(2, 10, 10, 4, 51);
  b.target = b.source;
  EXPECT_EQ(ap::loss_sim(b).item(), 0.0);
}

// ---- source / target / diversity losses -----------------------------------

TEST(LossSource, ClosedForms) {
  ap::DomainBatch b = make_batch(2, 8, 4, 3, 60);
  ap::DomainPredictions p;
  p.source = {column(b.source_labels), column(b.source_labels)};
  EXPECT_EQ(ap::loss_source(b, p).item(), 0.0);

  b.source_labels = Eigen::VectorXd::Zero(8);
  b.source_labels.head(4).setOnes();
  const Eigen::VectorXd half = Eigen::VectorXd::Constant(8, 0.5);
  p.source = {column(half), column(half)};
  EXPECT_NEAR(ap::loss_source(b, p).item(), 0.25, 1e-15);
}

TEST(LossSource, MatchesDoubleLoop) {
  ap::DomainBatch b = make_batch(3, 10, 4, 3, 61);
  std::vector<Eigen::VectorXd> preds;
  ap::DomainPredictions p;
  for (int l = 0; l < 3; ++l) {
    preds.push_back((Eigen::VectorXd::Random(10).array() * 0.5 + 0.5).matrix());
    p.source.push_back(column(preds.back()));
  }
  double acc = 0.0;
  for (int l = 0; l < 3; ++l)
    for (int i = 0; i < 10; ++i) acc += std::pow(preds[l][i] - b.source_labels[i], 2);
  EXPECT_NEAR(ap::loss_source(b, p).item(), acc / 30.0, 1e-12);
}

TEST(LossSource, MisalignedRejected) {
  ap::DomainBatch b = make_batch(1, 10, 4, 3, 62);
  ap::DomainPredictions p;
  p.source = {column(Eigen::VectorXd::Zero(9))};
  EXPECT_THROW(ap::loss_source(b, p), sculptor::ShapeError);
  b.source_labels.resize(0);
  EXPECT_THROW(ap::loss_source(b, p), sculptor::ShapeError);
}

TEST(LossTarget, ClosedForms) {
  ap::DomainBatch b = make_batch(1, 3, 1, 2, 63);
  b.pseudo_labels = ad::Matrix::Constant(1, 1, 0.4);
  ap::DomainPredictions p;
  p.target = {column(Eigen::VectorXd::Constant(1, 0.9))};
  EXPECT_NEAR(ap::loss_target(b, p).item(), 0.25, 1e-15);
  p.target = {column(Eigen::VectorXd::Constant(1, 0.4))};
  EXPECT_EQ(ap::loss_target(b, p).item(), 0.0);
}

TEST(LossTarget, MatchesDoubleLoop) {
  const ap::DomainBatch b = make_batch(2, 5, 12, 3, 64);
  std::vector<Eigen::VectorXd> preds;
  ap::DomainPredictions p;
  for (int l = 0; l < 2; ++l) {
    preds.push_back((Eigen::VectorXd::Random(12).array() * 0.5 + 0.5).matrix());
    p.target.push_back(column(preds.back()));
  }
  double acc = 0.0;
  for (int l = 0; l < 2; ++l)
    for (int i = 0; i < 12; ++i) acc += std::pow(preds[l][i] - b.pseudo_labels(i, l), 2);
  EXPECT_NEAR(ap::loss_target(b, p).item(), acc / 24.0, 1e-12);
}

TEST(LossTarget, MissingPseudoLabelsRejected) {
  ap::DomainBatch b = make_batch(2, 5, 12, 3, 65);
  b.pseudo_labels.resize(0, 0);
  ap::DomainPredictions p;
  p.target = {column(Eigen::VectorXd::Zero(12)), column(Eigen::VectorXd::Zero(12))};
  EXPECT_THROW(ap::loss_target(b, p), sculptor::ShapeError);
}

TEST(LossMi, ClosedForms) {
  const ap::DomainBatch b = make_batch(1, 3, 10, 2, 66);
  ap::DomainPredictions p;
  p.target = {column(Eigen::VectorXd::Constant(10, 0.5))};
  EXPECT_NEAR(ap::loss_mi(b, p).item(), 0.0, 1e-15);

  // Confident and balanced: h(mean) = log 2, mean h -> 0.
  const double eps = 1e-9;
  Eigen::VectorXd split(10);
  split.head(5).setConstant(eps);
  split.tail(5).setConstant(1.0 - eps);
  p.target = {column(split)};
  EXPECT_NEAR(ap::loss_mi(b, p).item(), std::numbers::ln2, 1e-7);
}

TEST(LossMi, MatchesDirectFormulaAndNonNegative) {
  std::mt19937_64 rng(67);
  std::uniform_real_distribution<double> u(0.001, 0.999);
  const ap::DomainBatch b = make_batch(3, 3, 20, 2, 67);
  for (int trial = 0; trial < 20; ++trial) {
    ap::DomainPredictions p;
    double expect = 0.0;
    for (int l = 0; l < 3; ++l) {
      Eigen::VectorXd v(20);
      for (auto& x : v) x = u(rng);
      p.target.push_back(column(v));
      double mh = 0.0;
      for (double x : v) mh += oracle::binary_entropy(x);
      expect += oracle::binary_entropy(v.mean()) - mh / 20.0;
    }
    const double got = ap::loss_mi(b, p).item();
    EXPECT_NEAR(got, expect / 3.0, 1e-12);
    EXPECT_GE(got, 0.0);
  }
}

TEST(BinaryEntropy, GuardedAtEndpoints) {
  ad::Matrix x(3, 1);
  x << 0.0, 1.0, 0.5;
  const auto h = ap::binary_entropy(ad::DiffValue::constant(x)).value();
  EXPECT_TRUE(h.allFinite());
  EXPECT_NEAR(h(0, 0), 0.0, 1e-9);
  EXPECT_NEAR(h(1, 0), 0.0, 1e-9);
  EXPECT_NEAR(h(2, 0), std::numbers::ln2, 1e-15);
}

// ---- neighbours ----------------------------------------------------------

TEST(Reweight, ScalesOnlyDepth) {
  ad::Matrix f(1, 3);
  f << 0.1, 0.2, 0.5;
  const ad::Matrix r = ap::reweight(f, 256.0);
  EXPECT_EQ(r(0, 0), 0.1);
  EXPECT_EQ(r(0, 1), 0.2);
  EXPECT_EQ(r(0, 2), 128.0);
  EXPECT_EQ(f(0, 2), 0.5);
}

TEST(Neighbours, MatchExhaustiveScan) {
  for (const double lambda : {1.0, 256.0}) {
    for (const int k : {1, 4, 8}) {
      ad::Matrix src = gaussian(200, 17, 70 + k);
      ad::Matrix tgt = gaussian(200, 17, 80 + k, 0.1);
      // Depth column in [0, 1] like real features.
      src.col(16) = (src.col(16).array() * 0.1 + 0.5).matrix();
      tgt.col(16) = (tgt.col(16).array() * 0.1 + 0.5).matrix();
      const Eigen::VectorXd y = random_labels(200, 90 + k);
      const auto got = ap::aggregate_neighbours(tgt, src, y, k, lambda);
      const auto want = oracle::knn_exhaustive(tgt, src, y, k, lambda);
      ASSERT_EQ(got.k, k);
      for (Eigen::Index i = 0; i < 200; ++i) {
        std::vector<int> nb(got.indices.begin() + i * k, got.indices.begin() + (i + 1) * k);
        EXPECT_EQ(nb, want.neighbours[static_cast<std::size_t>(i)]) << "row " << i << " k " << k << " lambda " << lambda;
        EXPECT_EQ(got.aggregate[i], want.aggregate[static_cast<std::size_t>(i)]);
      }
    }
  }
}

TEST(Neighbours, HandExamples) {
  ad::Matrix src(4, 2), tgt(1, 2);
  src << 0.0, 0.0, 1.0, 0.0, 0.0, 2.0, 5.0, 5.0;
  tgt << 0.1, 0.0;
  Eigen::VectorXd y(4);
  y << 1, 0, 1, 0;
  const auto k1 = ap::aggregate_neighbours(tgt, src, y, 1, 1.0);
  EXPECT_EQ(k1.indices, std::vector<int>{0});
  EXPECT_EQ(k1.aggregate[0], 1.0);
  const auto k4 = ap::aggregate_neighbours(tgt, src, y, 4, 1.0);
  EXPECT_EQ(k4.indices, (std::vector<int>{0, 1, 2, 3}));
  EXPECT_EQ(k4.aggregate[0], 0.5);
}

TEST(Neighbours, LargeLambdaOrdersByDepth) {
  // With a huge depth scale the neighbours are the rows closest in depth alone.
  ad::Matrix src = gaussian(50, 4, 100);
  ad::Matrix tgt = gaussian(10, 4, 101);
  for (Eigen::Index i = 0; i < 50; ++i) src(i, 3) = 0.02 * i;
  for (Eigen::Index i = 0; i < 10; ++i) tgt(i, 3) = 0.0037 + 0.0913 * i;
  const auto r = ap::aggregate_neighbours(tgt, src, random_labels(50, 102), 3, 1e6);
  for (Eigen::Index i = 0; i < 10; ++i) {
    std::vector<std::pair<double, int>> byz;
    for (int j = 0; j < 50; ++j) byz.emplace_back(std::abs(tgt(i, 3) - src(j, 3)), j);
    std::sort(byz.begin(), byz.end());
    for (int q = 0; q < 3; ++q) EXPECT_EQ(r.indices[static_cast<std::size_t>(i) * 3 + q], byz[q].second);
  }
}

TEST(Neighbours, InvariantToSourcePermutation) {
  const ad::Matrix src = gaussian(60, 5, 110);
  const ad::Matrix tgt = gaussian(20, 5, 111);
  const Eigen::VectorXd y = random_labels(60, 112);
  std::vector<int> order(60);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(113);
  std::shuffle(order.begin(), order.end(), rng);
  ad::Matrix src2(60, 5);
  Eigen::VectorXd y2(60);
  for (int j = 0; j < 60; ++j) {
    src2.row(j) = src.row(order[j]);
    y2[j] = y[order[j]];
  }
  const auto a = ap::aggregate_neighbours(tgt, src, y, 8, 256.0);
  const auto b = ap::aggregate_neighbours(tgt, src2, y2, 8, 256.0);
  for (std::size_t q = 0; q < a.indices.size(); ++q) EXPECT_EQ(a.indices[q], order[b.indices[q]]);
  EXPECT_EQ(a.aggregate, b.aggregate);
}

TEST(Neighbours, AggregateInUnitIntervalAndInputsUntouched) {
  const ad::Matrix src = gaussian(40, 6, 120);
  const ad::Matrix tgt = gaussian(30, 6, 121);
  const ad::Matrix tgt_copy = tgt, src_copy = src;
  const auto r = ap::aggregate_neighbours(tgt, src, random_labels(40, 122), 8, 256.0);
  EXPECT_GE(r.aggregate.minCoeff(), 0.0);
  EXPECT_LE(r.aggregate.maxCoeff(), 1.0);
  EXPECT_EQ(tgt, tgt_copy);
  EXPECT_EQ(src, src_copy);
}

TEST(Neighbours, BadArguments) {
  const ad::Matrix src = gaussian(5, 3, 1);
  const ad::Matrix tgt = gaussian(2, 3, 2);
  const Eigen::VectorXd y = random_labels(5, 3);
  EXPECT_THROW(ap::aggregate_neighbours(tgt, src, y, 6, 1.0), std::invalid_argument);
  EXPECT_THROW(ap::aggregate_neighbours(tgt, src, y, 0, 1.0), std::invalid_argument);
  EXPECT_THROW(ap::aggregate_neighbours(gaussian(2, 4, 2), src, y, 2, 1.0), sculptor::ShapeError);
  EXPECT_THROW(ap::aggregate_neighbours(tgt, src, random_labels(4, 3), 2, 1.0), sculptor::ShapeError);
}

// ---- pseudo-labels -------------------------------------------------------

TEST(Schedule, Ramp) {
  const ap::RampSchedule s;
  EXPECT_EQ(s(1), 0.0);
  EXPECT_EQ(s(30), 0.0);
  EXPECT_EQ(s(60), 0.5);
  EXPECT_EQ(s(90), 1.0);
  EXPECT_EQ(s(200), 1.0);
  for (int e = 0; e <= 120; ++e) EXPECT_EQ(s(e), std::clamp((e - 30) / 60.0, 0.0, 1.0));
}

TEST(PseudoLabels, MomentumBlend) {
  ap::PseudoLabelState st;
  const ad::Matrix o = ad::Matrix::Constant(3, 2, 0.8);
  const ad::Matrix agg = ad::Matrix::Constant(3, 2, 0.2);
  ap::update_pseudo_labels(st, o, agg, 30);
  EXPECT_EQ(st.labels, agg);
  EXPECT_EQ(st.momentum, 0.0);
  ap::update_pseudo_labels(st, o, agg, 60);
  EXPECT_NEAR(st.labels(0, 0), 0.5, 1e-15);
  EXPECT_EQ(st.epoch, 60);
  ap::update_pseudo_labels(st, o, agg, 100);
  EXPECT_EQ(st.labels, o);
  EXPECT_TRUE(st.covers(3, 2));
  EXPECT_FALSE(st.covers(3, 1));
}

TEST(PseudoLabels, StayInUnitIntervalAndRejectMisalignment) {
  ap::PseudoLabelState st;
  const ad::Matrix o = (ad::Matrix::Random(50, 3).array() * 0.5 + 0.5).matrix();
  const ad::Matrix agg = (ad::Matrix::Random(50, 3).array() * 0.5 + 0.5).matrix();
  for (int e = 1; e <= 90; e += 7) {
    ap::update_pseudo_labels(st, o, agg, e);
    EXPECT_GE(st.labels.minCoeff(), 0.0);
    EXPECT_LE(st.labels.maxCoeff(), 1.0);
  }
  EXPECT_THROW(ap::update_pseudo_labels(st, o, ad::Matrix(50, 2), 40), sculptor::ShapeError);
}

// ---- total loss ----------------------------------------------------------

TEST(TotalLoss, MatchesWeightedSumOfTerms) {
  ad::ParameterSet params;
  const auto dec = random_decoder(params, 5, 130);
  const auto b = make_batch(3, 12, 9, 5, 131);
  const ap::LossWeights w;
  for (const int epoch : {1, 29, 30, 45, 60, 90}) {
    const auto t = ap::total_loss(b, dec, epoch, w);
    const double m = std::clamp((epoch - 30) / 60.0, 0.0, 1.0);
    const double sim = ap::loss_sim(b).item();
    const double src = ap::loss_source(b, dec).item();
    const double tgt = ap::loss_target(b, dec).item();
    const double mi = ap::loss_mi(b, dec).item();
    EXPECT_EQ(t.report.w1, 5.0);
    EXPECT_EQ(t.report.w2, 2.0);
    EXPECT_EQ(t.report.w3, m);
    EXPECT_EQ(t.report.w4, m);
    const double expect = 5.0 * sim + 2.0 * src + m * tgt - m * mi;
    EXPECT_NEAR(t.report.total, expect, 1e-12) << "epoch " << epoch;
    EXPECT_NEAR(t.value.item(), expect, 1e-12);
    if (m == 0.0) {
      EXPECT_NEAR(t.report.total, 5.0 * sim + 2.0 * src, 1e-12);
    }
    EXPECT_GE(t.report.sim, 0.0);
    EXPECT_GE(t.report.source, 0.0);
    EXPECT_GE(t.report.target, 0.0);
    EXPECT_GE(t.report.mi, 0.0);
  }
}

TEST(TotalLoss, AllTermsZero) {
  ad::ParameterSet params;
  std::mt19937_64 rng(140);
  md::Decoder dec(params, 4, {8}, 0.5, rng);
  dec.zero();
  auto b = make_batch(2, 10, 10, 4, 141);
  b.target = b.source;
  b.source_labels = Eigen::VectorXd::Constant(10, 0.5);
  b.pseudo_labels = ad::Matrix::Constant(10, 2, 0.5);
  const auto t = ap::total_loss(b, dec, 75, {});
  EXPECT_EQ(t.report.sim, 0.0);
  EXPECT_EQ(t.report.source, 0.0);
  EXPECT_EQ(t.report.target, 0.0);
  EXPECT_NEAR(t.report.mi, 0.0, 1e-15);
  EXPECT_NEAR(t.report.total, 0.0, 1e-15);
}

TEST(TotalLoss, AblationFlagsDropTerms) {
  ad::ParameterSet params;
  const auto dec = random_decoder(params, 5, 150);
  const auto b = make_batch(2, 12, 9, 5, 151);
  const auto full = ap::total_loss(b, dec, 75, {});
  auto check = [&](ap::AblationFlags f, double expect) {
    const auto t = ap::total_loss(b, dec, 75, {}, f);
    EXPECT_NEAR(t.report.total, expect, 1e-12);
  };
  const auto& r = full.report;
  check({.no_mmd = true}, r.total - r.w1 * r.sim);
  check({.no_source = true}, r.total - r.w2 * r.source);
  check({.no_target = true}, r.total - r.w3 * r.target);
  check({.no_mi = true}, r.total + r.w4 * r.mi);
  const auto t = ap::total_loss(b, dec, 75, {}, {.no_mmd = true, .no_source = true});
  EXPECT_EQ(t.report.w1, 0.0);
  EXPECT_EQ(t.report.w2, 0.0);
  EXPECT_EQ(t.report.sim, 0.0);
  EXPECT_EQ(t.report.source, 0.0);
}

TEST(TotalLoss, InconsistentBatchRejected) {
  ad::ParameterSet params;
  const auto dec = random_decoder(params, 5, 160);
  auto b = make_batch(2, 12, 9, 5, 161);
  b.target.pop_back();
  EXPECT_THROW(ap::total_loss(b, dec, 1, {}), sculptor::ShapeError);
}
