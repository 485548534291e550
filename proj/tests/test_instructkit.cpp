#include <gtest/gtest.h>

#include <set>

#include "wavekit/instructkit.hpp"
#include "wavekit/rng.hpp"

using namespace wavekit;
using namespace wavekit::instructkit;

TEST(Scrub, ReplacesImageWithEeg) {
  EXPECT_EQ(scrub_caption("The image shows a dog"), "The EEG shows a dog");
  EXPECT_EQ(scrub_caption("the image shows a dog"), "the EEG shows a dog");
}

TEST(Scrub, UntouchedWhenNoLexiconTerm) {
  const std::string text = "A red cup on a wooden table.";
  EXPECT_EQ(scrub_caption(text), text);
}

TEST(Scrub, CoversInflections) {
  EXPECT_EQ(scrub_caption("two pictures of cats"), "two EEGs of cats");
  EXPECT_EQ(scrub_caption("Pictures and photos and scenes"), "EEGs and EEGs and EEGs");
  EXPECT_EQ(scrub_caption("a photograph and a snapshot per frame"),
            "a EEG and a EEG per EEG");
}

TEST(Scrub, WordBoundariesOnly) {
  // "pictured" and "imagery" are not lexicon members
  EXPECT_EQ(scrub_caption("imagery pictured in frames"), "imagery pictured in EEGs");
}

TEST(Scrub, IdempotentOverLexicon) {
  Rng rng(50);
  const std::vector<std::string> samples = {
      "The image shows two pictures inside a frame.",
      "Photos, photographs, snapshots: a scene.",
      "Nothing to replace here.",
      "IMAGE PICTURE PHOTO",
  };
  for (const auto& s : samples) {
    const auto once = scrub_caption(s);
    EXPECT_EQ(scrub_caption(once), once) << s;
  }
}

TEST(Description, SeededSelectionIsStable) {
  const auto& bank = description_question_bank();
  ASSERT_EQ(bank.size(), 10u);
  const auto a = build_description("a red cup in an image", bank, 7, "THING-EEG");
  const auto b = build_description("a red cup in an image", bank, 7, "THING-EEG");
  EXPECT_EQ(a, b);
  EXPECT_EQ(a.kind, InstructionKind::description);
  EXPECT_EQ(a.scenario, Scenario::analysis);
  EXPECT_NE(a.answer.find("EEG"), std::string::npos);
  EXPECT_EQ(a.answer.find("image"), std::string::npos);
}

TEST(Description, SingleEntryBankAlwaysPicksIt) {
  const std::vector<std::string> bank = {"What does this EEG show?"};
  for (std::uint64_t seed = 0; seed < 20; ++seed)
    EXPECT_EQ(build_description("cap", bank, seed).question, bank[0]);
  EXPECT_THROW(build_description("cap", {}, 0), ParamError);
}

TEST(Description, QuestionsComeFromBank) {
  const auto& bank = description_question_bank();
  std::set<std::string> bank_set(bank.begin(), bank.end());
  std::set<std::string> seen;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const auto ins = build_description("cap", bank, seed);
    EXPECT_TRUE(bank_set.count(ins.question));
    seen.insert(ins.question);
  }
  EXPECT_EQ(seen.size(), bank_set.size());  // all distinct questions show up
}

TEST(Mcq, BinaryPoolGivesBothOptions) {
  const std::vector<std::string> pool = {"Normal", "Abnormal"};
  const auto item = build_mcq("Abnormal", pool, 2, 3);
  ASSERT_EQ(item.options.size(), 2u);
  std::set<std::string> texts;
  for (const auto& [label, text] : item.options) texts.insert(text);
  EXPECT_EQ(texts, std::set<std::string>({"Normal", "Abnormal"}));
  // answer label resolves to the true category
  for (const auto& [label, text] : item.options)
    if (label == item.answer_label) EXPECT_EQ(text, "Abnormal");
}

TEST(Mcq, FullPoolIsShuffledWhole) {
  std::vector<std::string> pool;
  for (int i = 0; i < 8; ++i) pool.push_back("c" + std::to_string(i));
  const auto item = build_mcq("c3", pool, 8, 11);
  std::set<std::string> texts;
  for (const auto& [label, text] : item.options) texts.insert(text);
  EXPECT_EQ(texts, std::set<std::string>(pool.begin(), pool.end()));
}

TEST(Mcq, TenThousandSeededDrawsAreWellFormed) {
  std::vector<std::string> pool;
  for (int i = 0; i < 40; ++i) pool.push_back("cat" + std::to_string(i));
  for (std::uint64_t seed = 0; seed < 10000; ++seed) {
    const std::size_t k = 2 + seed % 6;
    const std::string truth = pool[seed % pool.size()];
    const auto item = build_mcq(truth, pool, k, seed);
    ASSERT_EQ(item.options.size(), k);
    std::set<std::string> labels, texts;
    std::size_t correct = 0;
    for (const auto& [label, text] : item.options) {
      labels.insert(label);
      texts.insert(text);
      if (text == truth) ++correct;
    }
    ASSERT_EQ(labels.size(), k);       // unique labels
    ASSERT_EQ(texts.size(), k);        // distractors are distinct and != truth
    ASSERT_EQ(correct, 1u);            // exactly one correct option
    ASSERT_TRUE(labels.count(item.answer_label));
  }
}

TEST(Mcq, LabelsExtendPastZ) {
  EXPECT_EQ(option_label(0), "A");
  EXPECT_EQ(option_label(25), "Z");
  EXPECT_EQ(option_label(26), "AA");
  EXPECT_EQ(option_label(27), "AB");
  EXPECT_EQ(option_label(51), "AZ");
  EXPECT_EQ(option_label(52), "BA");

  std::vector<std::string> pool;
  for (int i = 0; i < 40; ++i) pool.push_back("c" + std::to_string(i));
  const auto item = build_mcq("c0", pool, 40, 1);
  EXPECT_EQ(item.options.back().first, "AN");  // 40th label
}

TEST(Mcq, PoolTooSmallThrows) {
  EXPECT_THROW(build_mcq("a", {"a", "b"}, 3, 0), ParamError);
  EXPECT_THROW(build_mcq("missing", {"a", "b"}, 2, 0), ParamError);
  EXPECT_THROW(build_mcq("a", {"a", "b"}, 1, 0), ParamError);
}

TEST(PairSim, IdenticalAndDisjoint) {
  const auto same = pair_similarity("the cat sat", "the cat sat");
  EXPECT_DOUBLE_EQ(same.bigram_jaccard, 1.0);
  EXPECT_DOUBLE_EQ(same.rouge_l_f1, 1.0);
  EXPECT_DOUBLE_EQ(same.combined, 1.0);

  const auto diff = pair_similarity("alpha beta gamma", "delta epsilon zeta");
  EXPECT_DOUBLE_EQ(diff.bigram_jaccard, 0.0);
  EXPECT_DOUBLE_EQ(diff.rouge_l_f1, 0.0);
  EXPECT_DOUBLE_EQ(diff.combined, 0.0);
}

TEST(PairSim, HandComputedRougeL) {
  const auto s = pair_similarity("the cat sat", "the cat");
  EXPECT_DOUBLE_EQ(s.rouge_l_f1, 0.8);
  EXPECT_DOUBLE_EQ(s.combined, 0.8);  // bigram jaccard is 1/2 here, max wins
  EXPECT_DOUBLE_EQ(s.bigram_jaccard, 0.5);
}

TEST(PairSim, SymmetricAndEmptyConvention) {
  const auto ab = pair_similarity("one two three", "two three four");
  const auto ba = pair_similarity("two three four", "one two three");
  EXPECT_DOUBLE_EQ(ab.combined, ba.combined);
  EXPECT_DOUBLE_EQ(ab.bigram_jaccard, ba.bigram_jaccard);
  EXPECT_DOUBLE_EQ(ab.rouge_l_f1, ba.rouge_l_f1);

  const auto empty = pair_similarity("", "anything");
  EXPECT_DOUBLE_EQ(empty.combined, 0.0);
  EXPECT_DOUBLE_EQ(pair_similarity("...", "!!!").combined, 0.0);
}

namespace {

InstructionCorpus corpus_of(const std::vector<std::string>& answers) {
  InstructionCorpus corpus;
  for (std::size_t i = 0; i < answers.size(); ++i)
    corpus.items.push_back({"What does the EEG show here?", answers[i],
                            InstructionKind::qa_open, Scenario::analysis, "SEED"});
  return corpus;
}

}  // namespace

TEST(Dedup, IdenticalPairKeepsFirst) {
  const auto corpus = corpus_of({"a calm and steady reading", "a calm and steady reading"});
  const auto result = dedup_corpus(corpus, 0.75);
  ASSERT_EQ(result.retained.items.size(), 1u);
  EXPECT_DOUBLE_EQ(result.report.retention_ratio, 0.5);
  ASSERT_EQ(result.report.drops.size(), 1u);
  EXPECT_EQ(std::get<0>(result.report.drops[0]), 1u);
  EXPECT_EQ(std::get<1>(result.report.drops[0]), 0u);
}

TEST(Dedup, AllDistinctRetainsEverything) {
  const auto corpus = corpus_of({"spikes over the left hemisphere",
                                 "alpha rhythm with closed eyes",
                                 "burst suppression pattern sequence"});
  const auto result = dedup_corpus(corpus, 0.75);
  EXPECT_EQ(result.retained.items.size(), 3u);
  EXPECT_DOUBLE_EQ(result.report.retention_ratio, 1.0);
}

TEST(Dedup, StrictThresholdBoundary) {
  // near-duplicates below 1.0 survive a threshold of exactly 1.0
  const auto corpus = corpus_of({"the quick brown fox jumps over the lazy dog today",
                                 "the quick brown fox jumps over the lazy dog"});
  const auto at_one = dedup_corpus(corpus, 1.0);
  EXPECT_EQ(at_one.retained.items.size(), 2u);
  const auto at_low = dedup_corpus(corpus, 0.75);
  EXPECT_EQ(at_low.retained.items.size(), 1u);
}

TEST(Dedup, IdempotentAndOrderPreserving) {
  Rng rng(51);
  std::vector<std::string> answers;
  const std::vector<std::string> stems = {"slow waves", "sharp spikes", "sleep spindles",
                                          "eye blinks", "muscle noise"};
  for (int i = 0; i < 60; ++i) {
    std::string a = stems[rng.below(stems.size())];
    for (int w = 0; w < 6; ++w) a += " w" + std::to_string(rng.below(12));
    answers.push_back(a);
  }
  const auto corpus = corpus_of(answers);
  const auto once = dedup_corpus(corpus, 0.6);
  const auto twice = dedup_corpus(once.retained, 0.6);
  EXPECT_EQ(twice.retained.items, once.retained.items);
  EXPECT_DOUBLE_EQ(twice.report.retention_ratio, 1.0);

  // retained order preserves input order
  std::size_t last = 0;
  bool first = true;
  for (std::size_t idx : once.report.retained_indices) {
    if (!first) EXPECT_GT(idx, last);
    last = idx;
    first = false;
  }
}

TEST(Dedup, BadThresholdThrows) {
  EXPECT_THROW(dedup_corpus(corpus_of({"a"}), 0.0), ParamError);
  EXPECT_THROW(dedup_corpus(corpus_of({"a"}), 1.5), ParamError);
}

TEST(Scenario, ConsultationOnlyForMedicalDatasets) {
  EXPECT_TRUE(consultation_allowed("TUEV"));
  EXPECT_TRUE(consultation_allowed("TUAB"));
  EXPECT_FALSE(consultation_allowed("SEED"));
  EXPECT_FALSE(consultation_allowed("THING-EEG"));
  EXPECT_FALSE(consultation_allowed("unknown"));

  Instruction ok{"q", "a", InstructionKind::qa_open, Scenario::consultation, "TUAB"};
  EXPECT_NO_THROW(validate_scenario(ok));
  Instruction bad{"q", "a", InstructionKind::qa_open, Scenario::consultation, "SEED"};
  EXPECT_THROW(validate_scenario(bad), ParamError);
  Instruction analysis{"q", "a", InstructionKind::qa_open, Scenario::analysis, "SEED"};
  EXPECT_NO_THROW(validate_scenario(analysis));
}

TEST(McqInstruction, RendersOptionsInline) {
  const auto item = build_mcq("Abnormal", {"Normal", "Abnormal"}, 2, 3);
  const auto ins = to_instruction(item, Scenario::consultation, "TUAB");
  EXPECT_NE(ins.question.find("(A)"), std::string::npos);
  EXPECT_NE(ins.question.find("(B)"), std::string::npos);
  EXPECT_TRUE(ins.answer == "A" || ins.answer == "B");
  EXPECT_EQ(ins.kind, InstructionKind::mcq);
}
