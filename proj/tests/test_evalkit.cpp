#include <gtest/gtest.h>

#include <set>

#include "wavekit/evalkit.hpp"
#include "wavekit/instructkit.hpp"
#include "wavekit/rng.hpp"
#include "wavekit/synthetic.hpp"

using namespace wavekit;
using namespace wavekit::evalkit;

namespace {

FeatureStore store_of_unit_axes(std::size_t n_categories, std::size_t dim,
                                const std::string& dataset = "D") {
  FeaturePack pack;
  pack.dim = dim;
  for (std::size_t i = 0; i < n_categories; ++i) {
    std::vector<float> v(dim, 0.0f);
    v[i % dim] = 1.0f;
    pack.entries.push_back({v, "c" + std::to_string(i), dataset, "image"});
  }
  return build_store({pack});
}

FeatureStore random_store(std::size_t n_categories, std::size_t dim, Rng& rng) {
  FeaturePack pack;
  pack.dim = dim;
  for (std::size_t i = 0; i < n_categories; ++i)
    pack.entries.push_back({synthetic::unit_vector(dim, rng), "c" + std::to_string(i), "D",
                            "image"});
  return build_store({pack});
}

}  // namespace

TEST(KwayAccuracy, PerfectAlignmentIsExactlyOne) {
  Rng rng(120);
  const auto store = random_store(60, 32, rng);
  std::vector<LabeledFeature> eeg;
  for (const auto& e : store.entries) eeg.push_back({e.vec, e.category});
  for (std::size_t k : {2u, 4u, 10u, 40u}) {
    const auto r = kway_accuracy(eeg, store, k, 2000, 5);
    EXPECT_DOUBLE_EQ(r.accuracy, 1.0) << "K=" << k;
  }
}

TEST(KwayAccuracy, RandomFeaturesHitChanceLevel) {
  Rng rng(121);
  const auto store = random_store(80, 64, rng);
  std::vector<LabeledFeature> eeg;
  for (const auto& e : store.entries)
    eeg.push_back({synthetic::unit_vector(64, rng), e.category});  // unrelated to store
  for (std::size_t k : {2u, 4u, 10u}) {
    const auto r = kway_accuracy(eeg, store, k, 10000, 42);
    EXPECT_NEAR(r.accuracy, 1.0 / static_cast<double>(k), 0.02) << "K=" << k;
  }
}

TEST(KwayAccuracy, SeededTrialReplayMatchesBruteForce) {
  // replay the documented draw sequence on a 3-class toy set and recompute
  // every trial's argmax by brute force
  Rng fixture_rng(122);
  const std::size_t dim = 8;
  const auto store = random_store(3, dim, fixture_rng);
  std::vector<LabeledFeature> eeg;
  for (const auto& e : store.entries) {
    auto v = e.vec;
    for (auto& x : v) x += static_cast<float>(fixture_rng.normal() * 0.8);
    eeg.push_back({v, e.category});
  }

  const std::uint64_t seed = 777;
  const std::uint64_t n_trials = 300;
  const auto result = kway_accuracy(eeg, store, 2, n_trials, seed);

  // independent replay: same stream, same draw order
  std::vector<std::string> classes;
  {
    std::set<std::string> s;
    for (const auto& f : eeg) s.insert(f.category);
    classes.assign(s.begin(), s.end());
  }
  std::map<std::string, std::vector<std::size_t>> eval_by_class, by_category;
  for (std::size_t i = 0; i < eeg.size(); ++i) eval_by_class[eeg[i].category].push_back(i);
  for (std::size_t i = 0; i < store.entries.size(); ++i)
    by_category[store.entries[i].category].push_back(i);

  Rng rng(seed);
  std::vector<double> per_class_hits(classes.size(), 0), per_class_trials(classes.size(), 0);
  for (std::uint64_t t = 0; t < n_trials; ++t) {
    const std::size_t ci = t % classes.size();
    const auto& truth = classes[ci];
    const auto& pool_eval = eval_by_class[truth];
    const auto& probe = eeg[pool_eval[rng.below(pool_eval.size())]];
    const auto& true_entries = by_category[truth];
    const std::size_t true_idx = true_entries[rng.below(true_entries.size())];

    std::vector<std::string> others;
    for (const auto& c : classes)
      if (c != truth) others.push_back(c);
    std::vector<std::size_t> cand = {true_idx};
    for (std::size_t idx : rng.sample_indices(others.size(), 1)) {
      const auto& entries = by_category[others[idx]];
      cand.push_back(entries[rng.below(entries.size())]);
    }

    auto cos = [&](const std::vector<float>& a, const std::vector<float>& b) {
      double dot = 0, na = 0, nb = 0;
      for (std::size_t i = 0; i < a.size(); ++i) {
        dot += static_cast<double>(a[i]) * b[i];
        na += static_cast<double>(a[i]) * a[i];
        nb += static_cast<double>(b[i]) * b[i];
      }
      return dot / (std::sqrt(na) * std::sqrt(nb));
    };
    const double s_true = cos(probe.vec, store.entries[cand[0]].vec);
    const double s_wrong = cos(probe.vec, store.entries[cand[1]].vec);
    per_class_trials[ci] += 1;
    if (s_true > s_wrong) per_class_hits[ci] += 1;
  }
  double expected = 0.0;
  for (std::size_t c = 0; c < classes.size(); ++c)
    expected += per_class_hits[c] / per_class_trials[c];
  expected /= static_cast<double>(classes.size());
  EXPECT_DOUBLE_EQ(result.accuracy, expected);
}

TEST(KwayAccuracy, ConfusionRowSumsMatchTrialCounts) {
  Rng rng(123);
  const auto store = random_store(10, 16, rng);
  std::vector<LabeledFeature> eeg;
  for (const auto& e : store.entries) eeg.push_back({synthetic::unit_vector(16, rng), e.category});
  const std::uint64_t n_trials = 1000;
  const auto r = kway_accuracy(eeg, store, 4, n_trials, 9);
  EXPECT_EQ(r.confusion.total(), n_trials);
  const std::size_t side = r.confusion.class_order.size();
  ASSERT_EQ(side, 11u);  // 10 classes + <other>
  std::uint64_t sum = 0;
  for (std::size_t c = 0; c + 1 < side; ++c) {
    std::uint64_t row = 0;
    for (std::size_t p = 0; p < side; ++p) row += r.confusion.at(c, p);
    // trials are spread round-robin
    EXPECT_NEAR(static_cast<double>(row), 100.0, 1.0);
    sum += row;
  }
  EXPECT_EQ(sum, n_trials);
}

TEST(KwayAccuracy, ParamValidation) {
  Rng rng(124);
  const auto store = random_store(3, 8, rng);
  std::vector<LabeledFeature> eeg = {{synthetic::unit_vector(8, rng), "c0"}};
  EXPECT_THROW(kway_accuracy(eeg, store, 4, 10, 0), ParamError);  // not enough categories
  EXPECT_THROW(kway_accuracy(eeg, store, 1, 10, 0), ParamError);
  std::vector<LabeledFeature> bad = {{synthetic::unit_vector(8, rng), "nope"}};
  EXPECT_THROW(kway_accuracy(bad, store, 2, 10, 0), LabelError);
  EXPECT_THROW(kway_accuracy({}, store, 2, 10, 0), ParamError);
}

TEST(Confusion, PerfectPredictorIsDiagonal) {
  const std::vector<std::string> order = {"a", "b", "c"};
  const std::vector<std::string> truths = {"a", "b", "c", "a", "b", "c"};
  const auto m = confusion_matrix(truths, truths, order);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) EXPECT_EQ(m.at(i, j), i == j ? 2u : 0u);
}

TEST(Confusion, ConstantPredictorFillsOneColumn) {
  const std::vector<std::string> order = {"a", "b", "c"};
  const std::vector<std::string> truths = {"a", "b", "c", "b"};
  const std::vector<std::string> preds(4, "b");
  const auto m = confusion_matrix(preds, truths, order);
  EXPECT_EQ(m.at(0, 1), 1u);
  EXPECT_EQ(m.at(1, 1), 2u);
  EXPECT_EQ(m.at(2, 1), 1u);
  EXPECT_EQ(m.total(), 4u);
}

TEST(Confusion, HandCountedSixClassFixture) {
  // TUEV-style six classes, 20 items with known mislabels
  const std::vector<std::string> order = {"SPSW", "GPED", "PLED", "EYEM", "ARTF", "BCKG"};
  std::vector<std::string> truths, preds;
  auto add = [&](const std::string& t, const std::string& p, int times) {
    for (int i = 0; i < times; ++i) {
      truths.push_back(t);
      preds.push_back(p);
    }
  };
  add("SPSW", "SPSW", 3);
  add("SPSW", "GPED", 1);
  add("GPED", "GPED", 4);
  add("PLED", "PLED", 2);
  add("PLED", "GPED", 2);
  add("EYEM", "EYEM", 3);
  add("ARTF", "BCKG", 1);
  add("ARTF", "ARTF", 2);
  add("BCKG", "BCKG", 2);
  ASSERT_EQ(truths.size(), 20u);
  const auto m = confusion_matrix(preds, truths, order);
  EXPECT_EQ(m.at(0, 0), 3u);
  EXPECT_EQ(m.at(0, 1), 1u);
  EXPECT_EQ(m.at(1, 1), 4u);
  EXPECT_EQ(m.at(2, 2), 2u);
  EXPECT_EQ(m.at(2, 1), 2u);
  EXPECT_EQ(m.at(3, 3), 3u);
  EXPECT_EQ(m.at(4, 5), 1u);
  EXPECT_EQ(m.at(4, 4), 2u);
  EXPECT_EQ(m.at(5, 5), 2u);
  EXPECT_EQ(m.total(), 20u);

  EXPECT_THROW(confusion_matrix({"XXX"}, {"SPSW"}, order), LabelError);
  EXPECT_THROW(confusion_matrix({"SPSW"}, {"XXX"}, order), LabelError);
}

TEST(Rsm, SelfSimilarityHasUnitDiagonal) {
  Rng rng(125);
  std::vector<LabeledFeature> feats;
  for (int i = 0; i < 12; ++i)
    feats.push_back({synthetic::unit_vector(24, rng), "c" + std::to_string(i)});
  const auto m = rsm(feats, feats);
  ASSERT_EQ(m.rows, 12u);
  ASSERT_EQ(m.cols, 12u);
  for (std::size_t i = 0; i < m.rows; ++i) EXPECT_NEAR(m.at(i, i), 1.0, 1e-5);
}

TEST(Rsm, OrthogonalSetsAreZero) {
  std::vector<LabeledFeature> a, b;
  std::vector<float> e0(8, 0.0f), e1(8, 0.0f);
  e0[0] = 1.0f;
  e1[1] = 1.0f;
  a.push_back({e0, "x"});
  b.push_back({e1, "y"});
  const auto m = rsm(a, b);
  EXPECT_DOUBLE_EQ(m.at(0, 0), 0.0);
}

TEST(Rsm, HandComputedTwoByTwo) {
  const float s = static_cast<float>(std::sqrt(0.5));
  std::vector<LabeledFeature> eeg = {{{1.0f, 0.0f}, "a"}, {{s, s}, "b"}};
  std::vector<LabeledFeature> sup = {{{0.0f, 1.0f}, "a"}, {{1.0f, 0.0f}, "b"}};
  const auto m = rsm(eeg, sup);
  // rows sorted by category (a, b), columns likewise
  EXPECT_NEAR(m.at(0, 0), 0.0, 1e-7);       // (1,0) . (0,1)
  EXPECT_NEAR(m.at(0, 1), 1.0, 1e-7);       // (1,0) . (1,0)
  EXPECT_NEAR(m.at(1, 0), 0.7071068, 1e-6);  // (s,s) . (0,1)
  EXPECT_NEAR(m.at(1, 1), 0.7071068, 1e-6);
  EXPECT_EQ(m.row_categories, (std::vector<std::string>{"a", "b"}));
}

TEST(Rsm, CategorySortedOrderings) {
  std::vector<LabeledFeature> eeg = {{{1.0f, 0.0f}, "zeta"}, {{0.0f, 1.0f}, "alpha"}};
  const auto m = rsm(eeg, eeg);
  EXPECT_EQ(m.row_categories, (std::vector<std::string>{"alpha", "zeta"}));
  EXPECT_NEAR(m.at(0, 0), 1.0, 1e-7);
  EXPECT_THROW(rsm(eeg, {{{1.0f, 0.0f, 0.0f}, "x"}}), ShapeError);
}

TEST(Kmeans, KEqualsNIsZeroInertia) {
  Rng rng(126);
  std::vector<std::vector<double>> points;
  for (int i = 0; i < 6; ++i) points.push_back({rng.normal(), rng.normal()});
  const auto r = kmeans(points, points.size(), 3);
  EXPECT_DOUBLE_EQ(r.inertia, 0.0);
  std::set<std::size_t> assigned(r.assignments.begin(), r.assignments.end());
  EXPECT_EQ(assigned.size(), points.size());
}

TEST(Kmeans, TwoBlobsSeparate) {
  Rng rng(127);
  std::vector<std::vector<double>> points;
  for (int i = 0; i < 40; ++i)
    points.push_back({rng.normal() * 0.1 + 10.0, rng.normal() * 0.1 + 10.0});
  for (int i = 0; i < 40; ++i)
    points.push_back({rng.normal() * 0.1 - 10.0, rng.normal() * 0.1 - 10.0});
  const auto r = kmeans(points, 2, 11);
  for (int i = 1; i < 40; ++i) EXPECT_EQ(r.assignments[i], r.assignments[0]);
  for (int i = 41; i < 80; ++i) EXPECT_EQ(r.assignments[i], r.assignments[40]);
  EXPECT_NE(r.assignments[0], r.assignments[40]);
}

TEST(Kmeans, ConvergedStateIsFixpoint) {
  Rng rng(128);
  std::vector<std::vector<double>> points;
  for (int i = 0; i < 30; ++i) points.push_back({rng.normal(), rng.normal(), rng.normal()});
  const auto full = kmeans(points, 3, 7, 100);
  // run one more iteration from the converged centroids: assignments stable
  const auto again = kmeans(points, 3, 7, 100);
  EXPECT_EQ(full.assignments, again.assignments);
  EXPECT_EQ(full.centroids, again.centroids);
}

TEST(Kmeans, InertiaNonIncreasingAcrossIterationBudgets) {
  Rng rng(129);
  std::vector<std::vector<double>> points;
  for (int i = 0; i < 50; ++i) points.push_back({rng.normal() * 3, rng.normal() * 3});
  double prev = 1e300;
  for (std::size_t iters : {1u, 2u, 3u, 5u, 10u, 50u}) {
    const auto r = kmeans(points, 4, 13, iters);
    EXPECT_LE(r.inertia, prev + 1e-9);
    prev = r.inertia;
  }
}

TEST(Kmeans, BadKThrows) {
  std::vector<std::vector<double>> points = {{0.0}, {1.0}};
  EXPECT_THROW(kmeans(points, 3, 0), ParamError);
  EXPECT_THROW(kmeans(points, 0, 0), ParamError);
}

TEST(Diversity, DegenerateIdenticalCorpus) {
  const std::vector<std::string> corpus(5, "the same sentence again");
  const auto m = text_diversity(corpus);
  EXPECT_DOUBLE_EQ(m.jaccard_diversity, 0.0);
  EXPECT_DOUBLE_EQ(m.cosine_diversity, 0.0);
  EXPECT_NEAR(m.self_bleu, 1.0, 1e-9);
  EXPECT_DOUBLE_EQ(m.distinct_1, 4.0 / 20.0);
}

TEST(Diversity, DisjointPair) {
  const auto m = text_diversity({"alpha beta gamma", "delta epsilon zeta"});
  EXPECT_DOUBLE_EQ(m.jaccard_diversity, 1.0);
  EXPECT_DOUBLE_EQ(m.cosine_diversity, 1.0);
  EXPECT_DOUBLE_EQ(m.distinct_1, 1.0);
  EXPECT_DOUBLE_EQ(m.distinct_2, 1.0);
}

TEST(Diversity, FrozenFixtureMatchesIndependentOracle) {
  // expected values computed offline by an independent script implementing
  // the documented metric definitions
  const std::vector<std::string> corpus = {"the cat sat on the mat", "a dog runs in the park",
                                           "the cat runs fast"};
  const auto m = text_diversity(corpus);
  EXPECT_NEAR(m.distinct_1, 0.6875, 1e-12);
  EXPECT_NEAR(m.distinct_2, 0.9230769230769231, 1e-12);
  EXPECT_NEAR(m.jaccard_diversity, 0.7880952380952381, 1e-12);
  EXPECT_NEAR(m.cosine_diversity, 0.590915496350471, 1e-9);
  EXPECT_NEAR(m.self_bleu, 0.18716082567402045, 1e-9);
}

TEST(Diversity, SingleItemThrows) {
  EXPECT_THROW(text_diversity({"only one"}), ParamError);
  EXPECT_THROW(text_diversity({"one", "..."}), ParamError);  // second tokenizes empty
}

TEST(Nlg, IdenticalTextScoresOne) {
  const auto s = nlg_overlap("the quick brown fox", {"the quick brown fox"});
  EXPECT_NEAR(s.bleu_1, 1.0, 1e-12);
  EXPECT_NEAR(s.bleu_2, 1.0, 1e-12);
  EXPECT_DOUBLE_EQ(s.rouge_1, 1.0);
  EXPECT_DOUBLE_EQ(s.rouge_2, 1.0);
  EXPECT_DOUBLE_EQ(s.rouge_l, 1.0);
}

TEST(Nlg, DisjointVocabularyIsZeroish) {
  const auto s = nlg_overlap("alpha beta", {"gamma delta"});
  EXPECT_LE(s.bleu_1, 1e-8);
  EXPECT_LE(s.bleu_2, 1e-8);
  EXPECT_DOUBLE_EQ(s.rouge_1, 0.0);
  EXPECT_DOUBLE_EQ(s.rouge_2, 0.0);
  EXPECT_DOUBLE_EQ(s.rouge_l, 0.0);
}

TEST(Nlg, RougeLAgreesWithPairSimilarity) {
  const auto s = nlg_overlap("the cat sat", {"the cat"});
  EXPECT_DOUBLE_EQ(s.rouge_l, 0.8);
  // same value the dedup path computes
  const auto p = instructkit::pair_similarity("the cat sat", "the cat");
  EXPECT_DOUBLE_EQ(s.rouge_l, p.rouge_l_f1);
}

TEST(Nlg, EmptyCandidateIsAllZero) {
  const auto s = nlg_overlap("", {"reference text"});
  EXPECT_DOUBLE_EQ(s.bleu_1, 0.0);
  EXPECT_DOUBLE_EQ(s.rouge_l, 0.0);
  EXPECT_THROW(nlg_overlap("x", {}), ParamError);
}

TEST(Report, JsonShapeAndCsv) {
  Rng rng(130);
  const auto store = random_store(5, 8, rng);
  std::vector<LabeledFeature> eeg;
  for (const auto& e : store.entries) eeg.push_back({e.vec, e.category});
  EvalReport report;
  report.n_trials = 100;
  report.seed = 3;
  for (std::size_t k : {2u, 4u}) report.per_k[k] = kway_accuracy(eeg, store, k, 100, 3);
  const auto j = to_json(report);
  EXPECT_TRUE(j.contains("per_k"));
  EXPECT_DOUBLE_EQ(j["per_k"]["2"]["accuracy"].get<double>(), 1.0);

  const auto csv = to_csv(report.per_k[2].confusion);
  EXPECT_NE(csv.find("truth\\pred"), std::string::npos);
  EXPECT_NE(csv.find("c0"), std::string::npos);
}
