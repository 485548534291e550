#pragma once

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <map>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "wavekit/errors.hpp"
#include "wavekit/rng.hpp"
#include "wavekit/signalio.hpp"
#include "wavekit/textmetrics.hpp"

// Instruction and benchmark construction: caption scrubbing, description
// packaging, MCQ building with distractor sampling, and the 2-gram + ROUGE-L
// deduplication pass.

namespace wavekit::instructkit {

// ---------------------------------------------------------------------------
// Caption scrubbing
// ---------------------------------------------------------------------------

// Image vocabulary and its EEG replacements. Word-boundary matched,
// case-insensitive; replacements deliberately contain no lexicon word so the
// scrub is idempotent. The published keyword list is not exhaustive, so this
// table is the repo's own inflection table around the documented examples.
inline const std::vector<std::pair<std::string, std::string>>& image_lexicon() {
  static const std::vector<std::pair<std::string, std::string>> table = {
      {"images", "EEGs"},        {"image", "EEG"},
      {"pictures", "EEGs"},      {"picture", "EEG"},
      {"photographs", "EEGs"},   {"photograph", "EEG"},
      {"photos", "EEGs"},        {"photo", "EEG"},
      {"snapshots", "EEGs"},     {"snapshot", "EEG"},
      {"screenshots", "EEGs"},   {"screenshot", "EEG"},
      {"scenes", "EEGs"},        {"scene", "EEG"},
      {"frames", "EEGs"},        {"frame", "EEG"},
  };
  return table;
}

namespace detail {

inline bool is_word_char(unsigned char c) { return std::isalnum(c) || c == '\''; }

inline bool equals_ci(std::string_view a, std::string_view b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (std::tolower(static_cast<unsigned char>(a[i])) !=
        std::tolower(static_cast<unsigned char>(b[i])))
      return false;
  return true;
}

}  // namespace detail

// Replace every lexicon term with its EEG expression. Matching is
// case-insensitive on whole words; the replacement keeps an uppercase first
// letter whenever the matched word had one.
inline std::string scrub_caption(const std::string& caption) {
  std::string out;
  out.reserve(caption.size());
  std::size_t i = 0;
  while (i < caption.size()) {
    if (!detail::is_word_char(static_cast<unsigned char>(caption[i]))) {
      out.push_back(caption[i]);
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < caption.size() && detail::is_word_char(static_cast<unsigned char>(caption[j]))) ++j;
    const std::string_view word(caption.data() + i, j - i);
    bool replaced = false;
    for (const auto& [term, replacement] : image_lexicon()) {
      if (detail::equals_ci(word, term)) {
        std::string rep = replacement;
        if (std::isupper(static_cast<unsigned char>(word[0])) && !rep.empty())
          rep[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(rep[0])));
        out += rep;
        replaced = true;
        break;
      }
    }
    if (!replaced) out.append(word);
    i = j;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Description instructions
// ---------------------------------------------------------------------------

// The 10-entry question bank used for description instructions (kept exactly
// as shipped under resources/prompts/, duplicates included).
inline const std::vector<std::string>& description_question_bank() {
  static const std::vector<std::string> bank = {
      "What is being viewed according to this EEG?",
      "Can the EEG data reveal what is being observed?",
      "What does the EEG suggest about the visual stimulus?",
      "What does the EEG suggest about the visual stimulus?",
      "From the EEG patterns, what could be the subject of observation?",
      "What visual scene does the EEG indicate?",
      "What object or event does the EEG imply is being watched?",
      "What might the EEG tell us about the current visual input?",
      "What scenario does the EEG suggest is being viewed?",
      "What is the likely visual focus inferred from the EEG?",
  };
  return bank;
}

inline Instruction build_description(const std::string& caption,
                                     const std::vector<std::string>& question_bank,
                                     std::uint64_t seed, const std::string& dataset = "") {
  if (question_bank.empty()) throw ParamError("question bank must be non-empty");
  Rng rng(seed);
  Instruction ins;
  ins.question = question_bank[rng.below(question_bank.size())];
  ins.answer = scrub_caption(caption);
  ins.kind = InstructionKind::description;
  ins.scenario = Scenario::analysis;
  ins.dataset = dataset;
  return ins;
}

// ---------------------------------------------------------------------------
// Multiple-choice questions
// ---------------------------------------------------------------------------

struct McqItem {
  std::string stem;
  std::vector<std::pair<std::string, std::string>> options;  // (label, text)
  std::string answer_label;
  std::size_t k = 2;
};

// A, B, ..., Z, AA, AB, ... (base-26 bijective numbering).
inline std::string option_label(std::size_t index) {
  std::string label;
  std::size_t n = index + 1;
  while (n > 0) {
    const std::size_t r = (n - 1) % 26;
    label.insert(label.begin(), static_cast<char>('A' + r));
    n = (n - 1) / 26;
  }
  return label;
}

// 1 correct option plus k-1 distractors sampled without replacement from the
// pool, shuffled with the seeded generator.
inline McqItem build_mcq(const std::string& true_category,
                         const std::vector<std::string>& category_pool, std::size_t k,
                         std::uint64_t seed, const std::string& stem = "") {
  if (k < 2) throw ParamError("an MCQ needs at least 2 options");
  std::vector<std::string> wrong;
  bool has_true = false;
  for (const auto& c : category_pool) {
    if (c == true_category)
      has_true = true;
    else
      wrong.push_back(c);
  }
  if (!has_true) throw ParamError("pool does not contain the true category");
  if (wrong.size() < k - 1)
    throw ParamError("pool holds " + std::to_string(wrong.size()) +
                     " distractor candidates, need " + std::to_string(k - 1));

  Rng rng(seed);
  std::vector<std::string> options;
  options.push_back(true_category);
  for (std::size_t idx : rng.sample_indices(wrong.size(), k - 1)) options.push_back(wrong[idx]);
  rng.shuffle(options);

  McqItem item;
  item.k = k;
  item.stem = stem;
  for (std::size_t i = 0; i < options.size(); ++i) {
    item.options.emplace_back(option_label(i), options[i]);
    if (options[i] == true_category) item.answer_label = option_label(i);
  }
  return item;
}

// Render an MCQ as an instruction: "(A)foo (B)bar" appended to the stem,
// answer is the bare label.
inline Instruction to_instruction(const McqItem& item, Scenario scenario,
                                  const std::string& dataset) {
  Instruction ins;
  std::string q = item.stem.empty()
                      ? "Which option matches this EEG? Select one letter."
                      : item.stem;
  for (const auto& [label, text] : item.options) q += " (" + label + ")" + text;
  ins.question = std::move(q);
  ins.answer = item.answer_label;
  ins.kind = InstructionKind::mcq;
  ins.scenario = scenario;
  ins.dataset = dataset;
  return ins;
}

// ---------------------------------------------------------------------------
// Similarity and dedup
// ---------------------------------------------------------------------------

struct PairSimilarity {
  double bigram_jaccard = 0.0;
  double rouge_l_f1 = 0.0;
  double combined = 0.0;  // max of the two
};

inline PairSimilarity pair_similarity(const std::string& a, const std::string& b) {
  const auto ta = textmetrics::tokenize(a);
  const auto tb = textmetrics::tokenize(b);
  PairSimilarity s;
  if (ta.empty() || tb.empty()) return s;  // similarity 0 by convention
  s.bigram_jaccard = textmetrics::ngram_jaccard(ta, tb, 2);
  s.rouge_l_f1 = textmetrics::rouge_l_f1(ta, tb);
  s.combined = std::max(s.bigram_jaccard, s.rouge_l_f1);
  return s;
}

struct DedupReport {
  std::vector<std::size_t> retained_indices;
  // (dropped index, retained index it collided with, combined similarity)
  std::vector<std::tuple<std::size_t, std::size_t, double>> drops;
  double retention_ratio = 1.0;
};

struct DedupResult {
  InstructionCorpus retained;
  DedupReport report;
};

// Greedy first-seen-kept scan over question+answer text. An item is dropped
// iff its combined similarity against any already-retained item reaches the
// threshold.
inline DedupResult dedup_corpus(const InstructionCorpus& items, double threshold = 0.75) {
  if (threshold <= 0.0 || threshold > 1.0)
    throw ParamError("dedup threshold must lie in (0, 1]");
  DedupResult result;
  std::vector<std::vector<std::string>> kept_tokens;
  for (std::size_t i = 0; i < items.items.size(); ++i) {
    const auto& ins = items.items[i];
    const auto tokens = textmetrics::tokenize(ins.question + " " + ins.answer);
    bool dropped = false;
    for (std::size_t k = 0; k < kept_tokens.size(); ++k) {
      double combined = 0.0;
      if (!tokens.empty() && !kept_tokens[k].empty()) {
        combined = std::max(textmetrics::ngram_jaccard(tokens, kept_tokens[k], 2),
                            textmetrics::rouge_l_f1(tokens, kept_tokens[k]));
      }
      if (combined >= threshold) {
        result.report.drops.emplace_back(i, result.report.retained_indices[k], combined);
        dropped = true;
        break;
      }
    }
    if (!dropped) {
      result.report.retained_indices.push_back(i);
      kept_tokens.push_back(tokens);
      result.retained.items.push_back(ins);
    }
  }
  result.report.retention_ratio =
      items.items.empty() ? 1.0
                          : static_cast<double>(result.retained.items.size()) /
                                static_cast<double>(items.items.size());
  return result;
}

// ---------------------------------------------------------------------------
// Dataset task registry
// ---------------------------------------------------------------------------

enum class TaskKind { visual, emotion, event, abnormality };

// Task assignments for the five source datasets. Consultation-scenario
// instructions are restricted to event/abnormality datasets.
inline const std::map<std::string, TaskKind>& default_task_registry() {
  static const std::map<std::string, TaskKind> reg = {
      {"THING-EEG", TaskKind::visual},   {"ImageNet-EEG", TaskKind::visual},
      {"SEED", TaskKind::emotion},       {"TUEV", TaskKind::event},
      {"TUAB", TaskKind::abnormality},
  };
  return reg;
}

inline bool consultation_allowed(const std::string& dataset,
                                 const std::map<std::string, TaskKind>& registry =
                                     default_task_registry()) {
  auto it = registry.find(dataset);
  if (it == registry.end()) return false;
  return it->second == TaskKind::event || it->second == TaskKind::abnormality;
}

inline void validate_scenario(const Instruction& ins,
                              const std::map<std::string, TaskKind>& registry =
                                  default_task_registry()) {
  if (ins.scenario == Scenario::consultation && !consultation_allowed(ins.dataset, registry))
    throw ParamError("consultation scenario is reserved for event/abnormality datasets, got: " +
                     ins.dataset);
}

}  // namespace wavekit::instructkit
