#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

// Shared lexical machinery: tokenizer, n-grams, LCS, ROUGE, BLEU. Both the
// instruction dedup pass and the evaluation metrics route through these
// functions so the two always agree on identical inputs.

namespace wavekit::textmetrics {

// Lowercase, split on every non-alphanumeric byte. ASCII-oriented; multi-byte
// UTF-8 sequences survive as token bytes since they are non-ASCII and never
// match the split predicate.
inline std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string cur;
  for (unsigned char c : text) {
    if (std::isalnum(c) || c >= 0x80) {
      cur.push_back(static_cast<char>(std::tolower(c)));
    } else if (!cur.empty()) {
      tokens.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) tokens.push_back(std::move(cur));
  return tokens;
}

inline std::vector<std::string> ngrams(const std::vector<std::string>& tokens, std::size_t n) {
  std::vector<std::string> out;
  if (tokens.size() < n || n == 0) return out;
  out.reserve(tokens.size() - n + 1);
  for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
    std::string g = tokens[i];
    for (std::size_t k = 1; k < n; ++k) {
      g += '\x1f';  // unit separator keeps "ab c" and "a bc" distinct
      g += tokens[i + k];
    }
    out.push_back(std::move(g));
  }
  return out;
}

// |A ∩ B| / |A ∪ B| over n-gram sets; 0 by convention when both are empty.
inline double ngram_jaccard(const std::vector<std::string>& a_tokens,
                            const std::vector<std::string>& b_tokens, std::size_t n) {
  const auto ga = ngrams(a_tokens, n);
  const auto gb = ngrams(b_tokens, n);
  std::set<std::string> sa(ga.begin(), ga.end());
  std::set<std::string> sb(gb.begin(), gb.end());
  if (sa.empty() && sb.empty()) return 0.0;
  std::size_t inter = 0;
  for (const auto& g : sa) inter += sb.count(g);
  const std::size_t uni = sa.size() + sb.size() - inter;
  return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

inline std::size_t lcs_length(const std::vector<std::string>& a,
                              const std::vector<std::string>& b) {
  if (a.empty() || b.empty()) return 0;
  std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = (a[i - 1] == b[j - 1]) ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

// ROUGE-L F1 on token sequences: P = LCS/|cand|, R = LCS/|ref|.
inline double rouge_l_f1(const std::vector<std::string>& candidate,
                         const std::vector<std::string>& reference) {
  if (candidate.empty() || reference.empty()) return 0.0;
  const double lcs = static_cast<double>(lcs_length(candidate, reference));
  if (lcs == 0.0) return 0.0;
  const double p = lcs / static_cast<double>(candidate.size());
  const double r = lcs / static_cast<double>(reference.size());
  return 2.0 * p * r / (p + r);
}

// ROUGE-N F1 with n-gram multiset overlap.
inline double rouge_n_f1(const std::vector<std::string>& candidate,
                         const std::vector<std::string>& reference, std::size_t n) {
  const auto gc = ngrams(candidate, n);
  const auto gr = ngrams(reference, n);
  if (gc.empty() || gr.empty()) return 0.0;
  std::map<std::string, std::size_t> ref_counts;
  for (const auto& g : gr) ++ref_counts[g];
  std::size_t overlap = 0;
  for (const auto& g : gc) {
    auto it = ref_counts.find(g);
    if (it != ref_counts.end() && it->second > 0) {
      --it->second;
      ++overlap;
    }
  }
  if (overlap == 0) return 0.0;
  const double p = static_cast<double>(overlap) / static_cast<double>(gc.size());
  const double r = static_cast<double>(overlap) / static_cast<double>(gr.size());
  return 2.0 * p * r / (p + r);
}

inline constexpr double kBleuEpsilon = 1e-9;

// Modified n-gram precision against multiple references (counts clipped by
// the max count over references).
inline double modified_precision(const std::vector<std::string>& candidate,
                                 const std::vector<std::vector<std::string>>& references,
                                 std::size_t n) {
  const auto gc = ngrams(candidate, n);
  if (gc.empty()) return 0.0;
  std::map<std::string, std::size_t> cand_counts;
  for (const auto& g : gc) ++cand_counts[g];
  std::map<std::string, std::size_t> max_ref;
  for (const auto& ref : references) {
    std::map<std::string, std::size_t> rc;
    for (const auto& g : ngrams(ref, n)) ++rc[g];
    for (const auto& [g, c] : rc) max_ref[g] = std::max(max_ref[g], c);
  }
  std::size_t clipped = 0;
  for (const auto& [g, c] : cand_counts) {
    auto it = max_ref.find(g);
    if (it != max_ref.end()) clipped += std::min(c, it->second);
  }
  return static_cast<double>(clipped) / static_cast<double>(gc.size());
}

// BLEU up to max_order with uniform weights, brevity penalty against the
// closest reference length (ties resolved toward the shorter reference),
// and an epsilon floor on zero precisions.
inline double bleu(const std::vector<std::string>& candidate,
                   const std::vector<std::vector<std::string>>& references,
                   std::size_t max_order) {
  if (candidate.empty() || references.empty()) return 0.0;
  double log_sum = 0.0;
  for (std::size_t n = 1; n <= max_order; ++n) {
    const double p = modified_precision(candidate, references, n);
    log_sum += std::log(std::max(p, kBleuEpsilon));
  }
  const double geo = std::exp(log_sum / static_cast<double>(max_order));

  const std::size_t c = candidate.size();
  std::size_t best_ref = references.front().size();
  for (const auto& ref : references) {
    const auto diff = [&](std::size_t len) {
      return len > c ? len - c : c - len;
    };
    if (diff(ref.size()) < diff(best_ref) || (diff(ref.size()) == diff(best_ref) && ref.size() < best_ref))
      best_ref = ref.size();
  }
  const double bp =
      c >= best_ref ? 1.0
                    : std::exp(1.0 - static_cast<double>(best_ref) / static_cast<double>(c));
  return bp * geo;
}

// Cosine similarity of L2-normalized term-frequency vectors.
inline double tf_cosine(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  if (a.empty() || b.empty()) return 0.0;
  std::map<std::string, double> ca, cb;
  for (const auto& t : a) ca[t] += 1.0;
  for (const auto& t : b) cb[t] += 1.0;
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (const auto& [t, v] : ca) {
    na += v * v;
    auto it = cb.find(t);
    if (it != cb.end()) dot += v * it->second;
  }
  for (const auto& [t, v] : cb) nb += v * v;
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

// Token-set Jaccard (unigram sets).
inline double token_set_jaccard(const std::vector<std::string>& a,
                                const std::vector<std::string>& b) {
  return ngram_jaccard(a, b, 1);
}

}  // namespace wavekit::textmetrics
