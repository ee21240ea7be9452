#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "a2lc/lcm.hpp"
#include "fixtures.hpp"

using namespace a2lc;

namespace {

LcmHyper small_lcm() {
  LcmHyper hyper;
  hyper.hidden_dims = {32, 16};
  hyper.epochs = 150;
  hyper.learning_rate = 0.05;
  hyper.batch_size = 16;
  hyper.seed = 5;
  return hyper;
}

ProxyHyper raw_feature_proxy() {
  ProxyHyper hyper;
  hyper.hidden_dim = 8;
  hyper.feature_source = FeatureSource::kInput;  // lcm sees the raw features
  hyper.seed = 2;
  return hyper;
}

}  // namespace

TEST_CASE("class weights are normalized inverse frequencies") {
  const std::vector<QueriedMask> queried = {{0, 0}, {1, 1}, {2, 1}, {3, 1}};
  const Vec lambda = class_weights(queried, 2);
  CHECK(lambda(0) == doctest::Approx(0.75).epsilon(1e-12));
  CHECK(lambda(1) == doctest::Approx(0.25).epsilon(1e-12));

  const std::vector<QueriedMask> equal = {{0, 0}, {1, 1}, {2, 2}, {3, 3}};
  const Vec l4 = class_weights(equal, 4);
  for (int c = 0; c < 4; ++c) CHECK(l4(c) == doctest::Approx(0.25).epsilon(1e-12));

  const std::vector<QueriedMask> single = {{0, 2}, {1, 2}};
  const Vec l1 = class_weights(single, 4);
  CHECK(l1(2) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(l1(0) == 0.0);  // absent classes carry no weight

  CHECK_THROWS_AS(class_weights({}, 3), std::invalid_argument);
}

TEST_CASE("class weights sum to one with positive present entries") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    const int classes = 2 + static_cast<int>(rng() % 6);
    std::vector<QueriedMask> queried;
    const int n = 1 + static_cast<int>(rng() % 20);
    for (int i = 0; i < n; ++i)
      queried.emplace_back(i, static_cast<ClassId>(rng() % static_cast<unsigned>(classes)));
    const Vec lambda = class_weights(queried, classes);
    CHECK(std::abs(lambda.sum() - 1.0) <= 1e-9);
    VecI counts = VecI::Zero(classes);
    for (const auto& [id, label] : queried) ++counts(label);
    for (int c = 0; c < classes; ++c) {
      if (counts(c) > 0) CHECK(lambda(c) > 0.0);
      else CHECK(lambda(c) == 0.0);
    }
  }
}

TEST_CASE("lcm trains to perfect accuracy on separable mask features") {
  using a2lc::testing::MaskSpec;
  std::vector<MaskSpec> specs;
  for (int i = 0; i < 10; ++i) specs.push_back(MaskSpec{4, 0, 0});
  for (int i = 0; i < 10; ++i) specs.push_back(MaskSpec{4, 1, 1});
  const DatasetState ds = a2lc::testing::make_dataset(specs, 2, 4, 0.3);
  const ProxyModel proxy = make_proxy(4, 2, raw_feature_proxy());

  std::vector<QueriedMask> queried;
  for (const Mask& m : ds.masks) queried.emplace_back(m.mask_id, m.true_label);
  const LcmModel lcm = train_lcm(queried, proxy, ds, small_lcm());
  for (const auto& [id, label] : queried) {
    Eigen::Index arg;
    lcm_predict(lcm, mask_feature(proxy, ds.masks[static_cast<std::size_t>(id)], ds))
        .maxCoeff(&arg);
    CHECK(static_cast<ClassId>(arg) == label);
  }
}

TEST_CASE("zero epochs returns the lcm initialization") {
  using a2lc::testing::MaskSpec;
  const DatasetState ds = a2lc::testing::make_dataset({MaskSpec{3, 0, 0}, MaskSpec{3, 1, 1}}, 2);
  const ProxyModel proxy = make_proxy(4, 2, raw_feature_proxy());
  LcmHyper hyper = small_lcm();
  hyper.epochs = 0;
  const LcmModel lcm = train_lcm({{0, 0}, {1, 1}}, proxy, ds, hyper);
  const Mlp<double> fresh({4, 32, 16, 2}, hyper.activation, hyper.seed);
  for (std::size_t l = 0; l < lcm.net.num_layers(); ++l)
    CHECK(lcm.net.weights()[l] == fresh.weights()[l]);
}

TEST_CASE("duplicated queried set trains identically in full batch") {
  using a2lc::testing::MaskSpec;
  const DatasetState ds = a2lc::testing::make_dataset(
      {MaskSpec{3, 0, 0}, MaskSpec{3, 1, 1}, MaskSpec{2, 0, 0}, MaskSpec{2, 1, 1}}, 2);
  const ProxyModel proxy = make_proxy(4, 2, raw_feature_proxy());

  LcmHyper hyper = small_lcm();
  hyper.epochs = 40;
  hyper.batch_size = 1 << 20;  // full batch
  const std::vector<QueriedMask> once = {{0, 0}, {1, 1}, {2, 0}, {3, 1}};
  std::vector<QueriedMask> twice = once;
  twice.insert(twice.end(), once.begin(), once.end());

  const LcmModel a = train_lcm(once, proxy, ds, hyper);
  const LcmModel b = train_lcm(twice, proxy, ds, hyper);
  for (std::size_t l = 0; l < a.net.num_layers(); ++l)
    CHECK((a.net.weights()[l] - b.net.weights()[l]).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("lcm_predict returns a valid, pure distribution") {
  using a2lc::testing::MaskSpec;
  const DatasetState ds = a2lc::testing::make_dataset({MaskSpec{3, 0, 0}, MaskSpec{3, 1, 1}}, 2);
  const ProxyModel proxy = make_proxy(4, 2, raw_feature_proxy());
  const LcmModel lcm = train_lcm({{0, 0}, {1, 1}}, proxy, ds, small_lcm());

  std::mt19937_64 rng(3);
  std::normal_distribution<double> gauss(0.0, 2.0);
  for (int trial = 0; trial < 200; ++trial) {
    Vec f(4);
    for (int i = 0; i < 4; ++i) f(i) = gauss(rng);
    const Vec p = lcm_predict(lcm, f);
    CHECK(std::abs(p.sum() - 1.0) <= 1e-9);
    CHECK(p.minCoeff() >= 0.0);
    CHECK(lcm_predict(lcm, f) == p);
  }
  CHECK_THROWS_AS(lcm_predict(lcm, Vec::Zero(9)), std::invalid_argument);
}

TEST_CASE("selection criteria evaluate all three gates") {
  // counts {40,30,20,10} -> ranks {0,1,2,3}; C=4, alpha=0.5 -> tail ranks {2,3}
  VecI counts(4);
  counts << 40, 30, 20, 10;
  const std::vector<int> ranks = rank_classes(counts);
  REQUIRE(ranks == std::vector<int>{0, 1, 2, 3});

  Vec confident(4);
  confident << 0.995, 0.003, 0.001, 0.001;  // argmax class 0 (rank 0)
  // pseudo-label class 1 (rank 1, not rarest): all gates pass
  CHECK(selection_criteria(confident, 1, ranks, 0.99, 0.5, true, true, true));

  Vec hesitant(4);
  hesitant << 0.9, 0.05, 0.03, 0.02;
  CHECK_FALSE(selection_criteria(hesitant, 1, ranks, 0.99, 0.5, true, true, true));
  CHECK(selection_criteria(hesitant, 1, ranks, 0.99, 0.5, false, true, true));  // j1 off

  Vec tail_pred(4);
  tail_pred << 0.001, 0.001, 0.995, 0.003;  // argmax class 2 (rank 2: tail)
  CHECK_FALSE(selection_criteria(tail_pred, 1, ranks, 0.99, 0.5, true, true, true));
  CHECK(selection_criteria(tail_pred, 1, ranks, 0.99, 0.5, true, false, true));  // j2 off

  // pseudo-label is the rarest class (rank 3)
  CHECK_FALSE(selection_criteria(confident, 3, ranks, 0.99, 0.5, true, true, true));
  CHECK(selection_criteria(confident, 3, ranks, 0.99, 0.5, true, true, false));  // j3 off

  // all gates disabled: anything goes
  CHECK(selection_criteria(hesitant, 3, ranks, 0.99, 0.5, false, false, false));
}

TEST_CASE("tau schedule is linear with a cap") {
  SelectionConfig sel;  // 0.99 + 0.002*(r-1), cap 0.999
  CHECK(next_tau(sel, 1) == doctest::Approx(0.99).epsilon(1e-12));
  CHECK(next_tau(sel, 3) == doctest::Approx(0.994).epsilon(1e-12));
  CHECK(next_tau(sel, 6) == doctest::Approx(0.999).epsilon(1e-12));  // capped
  CHECK(next_tau(sel, 60) == doctest::Approx(0.999).epsilon(1e-12));

  SelectionConfig flat = sel;
  flat.tau_increment = 0.0;
  CHECK(next_tau(flat, 10) == doctest::Approx(0.99).epsilon(1e-12));
  CHECK_THROWS_AS(next_tau(sel, 0), std::invalid_argument);
}

TEST_CASE("correct_unqueried relabels confident confusable masks to truth") {
  DatasetState ds = a2lc::testing::make_confusable_pair(30, 6, 0.4, 13);
  ProxyHyper phyper;
  phyper.hidden_dim = 16;
  phyper.epochs = 40;
  phyper.seed = 3;
  const ProxyModel proxy = train_proxy(ds, phyper);

  // annotator answers for a slice of both head classes
  std::vector<QueriedMask> queried;
  std::vector<MaskId> queried_ids;
  for (MaskId id = 0; id < 60 && queried.size() < 16; id += 4) {
    queried.emplace_back(id, ds.masks[static_cast<std::size_t>(id)].true_label);
    queried_ids.push_back(id);
  }
  LcmHyper lhyper = small_lcm();
  const LcmModel lcm = train_lcm(queried, proxy, ds, lhyper);

  std::vector<MaskId> pool = all_mask_ids(ds);
  std::vector<MaskId> unqueried;
  for (MaskId id : pool)
    if (std::find(queried_ids.begin(), queried_ids.end(), id) == queried_ids.end())
      unqueried.push_back(id);

  SelectionConfig sel;
  const auto events = correct_unqueried(lcm, proxy, ds, unqueried, pool, sel, 1);
  CHECK(!events.empty());

  const std::vector<int> ranks = rank_classes(class_pixel_counts(ds, pool));
  const int c = static_cast<int>(ranks.size());
  for (const CorrectionEvent& ev : events) {
    CHECK(ev.source == CorrectionSource::kLcm);
    CHECK(ev.new_label != ev.old_label);
    CHECK(ev.confidence >= next_tau(sel, 1));                                // j1
    CHECK(ranks[static_cast<std::size_t>(ev.new_label)] < (1.0 - sel.alpha) * c);  // j2
    CHECK(ranks[static_cast<std::size_t>(ev.old_label)] != c - 1);          // j3
  }

  // every noisy head-class mask whose prediction clears the confidence gate
  // is corrected to the truth
  int recovered = 0;
  for (MaskId id : unqueried) {
    const Mask& m = ds.masks[static_cast<std::size_t>(id)];
    if (m.true_label > 1 || m.pseudo_label == m.true_label) continue;
    const Vec pred = lcm_predict(lcm, mask_feature(proxy, m, ds));
    Eigen::Index arg;
    if (pred.maxCoeff(&arg) < next_tau(sel, 1)) continue;
    const auto it = std::find_if(events.begin(), events.end(),
                                 [id](const CorrectionEvent& ev) { return ev.mask_id == id; });
    REQUIRE(it != events.end());
    CHECK(it->new_label == m.true_label);
    ++recovered;
  }
  CHECK(recovered > 0);

  // events are not applied by correct_unqueried itself
  for (const CorrectionEvent& ev : events)
    CHECK(ds.masks[static_cast<std::size_t>(ev.mask_id)].pseudo_label == ev.old_label);

  CHECK(correct_unqueried(lcm, proxy, ds, {}, pool, sel, 1).empty());

  SelectionConfig impossible = sel;
  impossible.tau_initial = 1.0;
  impossible.tau_cap = 1.0;  // strictly sub-1 probabilities can never pass
  CHECK(correct_unqueried(lcm, proxy, ds, unqueried, pool, impossible, 1).empty());
}

TEST_CASE("disabling all criteria corrects every differing prediction") {
  DatasetState ds = a2lc::testing::make_confusable_pair(20, 5, 0.4, 21);
  ProxyHyper phyper;
  phyper.hidden_dim = 16;
  phyper.epochs = 40;
  phyper.seed = 3;
  const ProxyModel proxy = train_proxy(ds, phyper);

  std::vector<QueriedMask> queried;
  for (MaskId id = 0; id < 40; id += 5)
    queried.emplace_back(id, ds.masks[static_cast<std::size_t>(id)].true_label);
  const LcmModel lcm = train_lcm(queried, proxy, ds, small_lcm());

  const std::vector<MaskId> pool = all_mask_ids(ds);
  SelectionConfig open;
  open.j1 = open.j2 = open.j3 = false;
  const auto events = correct_unqueried(lcm, proxy, ds, pool, pool, open, 1);

  int differing = 0;
  for (const Mask& m : ds.masks) {
    Eigen::Index arg;
    lcm_predict(lcm, mask_feature(proxy, m, ds)).maxCoeff(&arg);
    if (static_cast<ClassId>(arg) != m.pseudo_label) ++differing;
  }
  CHECK(static_cast<int>(events.size()) == differing);
}
