#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "wavekit/errors.hpp"
#include "wavekit/ragstore.hpp"
#include "wavekit/rng.hpp"
#include "wavekit/textmetrics.hpp"

// Evaluation suite: K-way retrieval accuracy with confusion matrices,
// representational similarity matrices, k-means, and the text
// diversity / NLG overlap metrics.

namespace wavekit::evalkit {

// ---------------------------------------------------------------------------
// K-way retrieval accuracy
// ---------------------------------------------------------------------------

struct LabeledFeature {
  std::vector<float> vec;
  std::string category;
};

struct ConfusionMatrix {
  std::vector<std::string> class_order;
  std::vector<std::uint64_t> counts;  // row = truth, col = prediction

  std::uint64_t& at(std::size_t truth, std::size_t pred) {
    return counts[truth * class_order.size() + pred];
  }
  std::uint64_t at(std::size_t truth, std::size_t pred) const {
    return counts[truth * class_order.size() + pred];
  }
  std::uint64_t total() const {
    std::uint64_t t = 0;
    for (auto c : counts) t += c;
    return t;
  }
};

struct KwayResult {
  std::size_t k = 0;
  double accuracy = 0.0;  // macro-averaged over true classes
  ConfusionMatrix confusion;
  std::uint64_t n_trials = 0;
  std::uint64_t seed = 0;
};

struct EvalReport {
  std::map<std::size_t, KwayResult> per_k;
  std::uint64_t n_trials = 0;
  std::uint64_t seed = 0;
};

namespace detail {

inline double cosine(const std::vector<float>& a, const std::vector<float>& b) {
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += static_cast<double>(a[i]) * b[i];
    na += static_cast<double>(a[i]) * a[i];
    nb += static_cast<double>(b[i]) * b[i];
  }
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

}  // namespace detail

// Each trial pits the true category's stored feature against K-1 features of
// distinct, uniformly sampled wrong categories; a hit requires the strict
// cosine argmax to pick the true one (ties count as misses). Trials are
// spread evenly across classes and the accuracy is the mean of per-class hit
// rates, so every class contributes equally.
inline KwayResult kway_accuracy(const std::vector<LabeledFeature>& eeg_features,
                                const FeatureStore& store, std::size_t k,
                                std::uint64_t n_trials, std::uint64_t seed) {
  if (k < 2) throw ParamError("K must be at least 2");
  if (eeg_features.empty()) throw ParamError("need at least one evaluation feature");

  // category -> store entry indices
  std::map<std::string, std::vector<std::size_t>> by_category;
  for (std::size_t i = 0; i < store.entries.size(); ++i)
    by_category[store.entries[i].category].push_back(i);
  if (by_category.size() < k)
    throw ParamError("store holds " + std::to_string(by_category.size()) +
                     " categories, need at least " + std::to_string(k));
  std::vector<std::string> categories;
  categories.reserve(by_category.size());
  for (const auto& [cat, _] : by_category) categories.push_back(cat);

  // group evaluation features by class; classes must exist in the store
  std::map<std::string, std::vector<std::size_t>> eval_by_class;
  for (std::size_t i = 0; i < eeg_features.size(); ++i) {
    if (!by_category.count(eeg_features[i].category))
      throw LabelError("evaluation feature category not in store: " + eeg_features[i].category);
    eval_by_class[eeg_features[i].category].push_back(i);
  }

  std::vector<std::string> classes;
  for (const auto& [cls, _] : eval_by_class) classes.push_back(cls);
  std::map<std::string, std::size_t> class_index;
  for (std::size_t i = 0; i < classes.size(); ++i) class_index[classes[i]] = i;

  // square matrix over the evaluated classes; distractors drawn from other
  // store categories land in the trailing "<other>" column
  KwayResult result;
  result.k = k;
  result.n_trials = n_trials;
  result.seed = seed;
  result.confusion.class_order = classes;
  result.confusion.class_order.push_back("<other>");
  const std::size_t side = result.confusion.class_order.size();
  result.confusion.counts.assign(side * side, 0);

  Rng rng(seed);
  std::vector<std::uint64_t> hits(classes.size(), 0), trials(classes.size(), 0);

  for (std::uint64_t t = 0; t < n_trials; ++t) {
    const std::size_t ci = static_cast<std::size_t>(t % classes.size());
    const std::string& truth = classes[ci];
    const auto& eval_pool = eval_by_class[truth];
    const auto& probe = eeg_features[eval_pool[rng.below(eval_pool.size())]];

    // true candidate: one stored feature of the true category
    const auto& true_entries = by_category[truth];
    const std::size_t true_idx = true_entries[rng.below(true_entries.size())];

    // K-1 distinct wrong categories, one stored feature each
    std::vector<std::size_t> pool;
    pool.reserve(categories.size() - 1);
    for (std::size_t i = 0; i < categories.size(); ++i)
      if (categories[i] != truth) pool.push_back(i);

    std::vector<std::size_t> candidate_entries;
    candidate_entries.push_back(true_idx);
    for (std::size_t idx : rng.sample_indices(pool.size(), k - 1)) {
      const auto& entries = by_category[categories[pool[idx]]];
      candidate_entries.push_back(entries[rng.below(entries.size())]);
    }

    double best = -2.0;
    std::size_t best_pos = 0;
    bool tie_with_best = false;
    for (std::size_t pos = 0; pos < candidate_entries.size(); ++pos) {
      const double s = detail::cosine(probe.vec, store.entries[candidate_entries[pos]].vec);
      if (s > best) {
        best = s;
        best_pos = pos;
        tie_with_best = false;
      } else if (s == best) {
        tie_with_best = true;
        if (best_pos == 0) best_pos = pos;  // ties never favor the true candidate
      }
    }
    const bool hit = best_pos == 0 && !tie_with_best;
    ++trials[ci];
    if (hit) ++hits[ci];

    const std::string& predicted = store.entries[candidate_entries[best_pos]].category;
    auto it = class_index.find(predicted);
    const std::size_t col = it != class_index.end() ? it->second : side - 1;
    ++result.confusion.counts[ci * side + col];
  }

  double acc = 0.0;
  std::size_t contributing = 0;
  for (std::size_t c = 0; c < classes.size(); ++c) {
    if (trials[c] == 0) continue;
    acc += static_cast<double>(hits[c]) / static_cast<double>(trials[c]);
    ++contributing;
  }
  result.accuracy = contributing == 0 ? 0.0 : acc / static_cast<double>(contributing);
  return result;
}

// ---------------------------------------------------------------------------
// Confusion matrix over explicit prediction lists
// ---------------------------------------------------------------------------

inline ConfusionMatrix confusion_matrix(const std::vector<std::string>& predictions,
                                        const std::vector<std::string>& truths,
                                        const std::vector<std::string>& class_order) {
  if (predictions.size() != truths.size())
    throw ShapeError("predictions and truths must have equal lengths");
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < class_order.size(); ++i) index[class_order[i]] = i;
  ConfusionMatrix m;
  m.class_order = class_order;
  m.counts.assign(class_order.size() * class_order.size(), 0);
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    auto ti = index.find(truths[i]);
    auto pi = index.find(predictions[i]);
    if (ti == index.end()) throw LabelError("unknown truth label: " + truths[i]);
    if (pi == index.end()) throw LabelError("unknown predicted label: " + predictions[i]);
    ++m.counts[ti->second * class_order.size() + pi->second];
  }
  return m;
}

// ---------------------------------------------------------------------------
// Representational similarity matrix
// ---------------------------------------------------------------------------

struct RsmMatrix {
  std::vector<double> values;  // rows x cols
  std::vector<std::string> row_categories;
  std::vector<std::string> col_categories;
  std::size_t rows = 0;
  std::size_t cols = 0;

  double at(std::size_t r, std::size_t c) const { return values[r * cols + c]; }
};

// Pairwise dot products of unit vectors, rows and columns sorted by category
// (stable within a category).
inline RsmMatrix rsm(const std::vector<LabeledFeature>& eeg_features,
                     const std::vector<LabeledFeature>& supervision_features) {
  if (eeg_features.empty() || supervision_features.empty())
    throw ParamError("need non-empty feature sets");
  const std::size_t dim = eeg_features.front().vec.size();
  for (const auto& f : eeg_features)
    if (f.vec.size() != dim) throw ShapeError("eeg feature dim mismatch");
  for (const auto& f : supervision_features)
    if (f.vec.size() != dim) throw ShapeError("supervision feature dim mismatch");

  auto sorted_indices = [](const std::vector<LabeledFeature>& fs) {
    std::vector<std::size_t> idx(fs.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::stable_sort(idx.begin(), idx.end(),
                     [&](std::size_t a, std::size_t b) { return fs[a].category < fs[b].category; });
    return idx;
  };
  const auto ri = sorted_indices(eeg_features);
  const auto ci = sorted_indices(supervision_features);

  RsmMatrix m;
  m.rows = ri.size();
  m.cols = ci.size();
  m.values.resize(m.rows * m.cols);
  for (std::size_t r = 0; r < m.rows; ++r) m.row_categories.push_back(eeg_features[ri[r]].category);
  for (std::size_t c = 0; c < m.cols; ++c)
    m.col_categories.push_back(supervision_features[ci[c]].category);
  for (std::size_t r = 0; r < m.rows; ++r) {
    const auto& a = eeg_features[ri[r]].vec;
    for (std::size_t c = 0; c < m.cols; ++c) {
      const auto& b = supervision_features[ci[c]].vec;
      double dot = 0.0;
      for (std::size_t d = 0; d < dim; ++d) dot += static_cast<double>(a[d]) * b[d];
      m.values[r * m.cols + c] = dot;
    }
  }
  return m;
}

// ---------------------------------------------------------------------------
// K-means (Lloyd's iterations, seeded distinct-point init)
// ---------------------------------------------------------------------------

struct KmeansResult {
  std::vector<std::size_t> assignments;
  std::vector<std::vector<double>> centroids;
  double inertia = 0.0;
  std::size_t iterations = 0;
};

inline KmeansResult kmeans(const std::vector<std::vector<double>>& points, std::size_t k,
                           std::uint64_t seed, std::size_t max_iter = 100) {
  if (k == 0 || k > points.size())
    throw ParamError("k must lie in [1, n_points]");
  const std::size_t dim = points.front().size();
  for (const auto& p : points)
    if (p.size() != dim) throw ShapeError("point dim mismatch");

  Rng rng(seed);
  KmeansResult res;
  for (std::size_t idx : rng.sample_indices(points.size(), k)) res.centroids.push_back(points[idx]);
  res.assignments.assign(points.size(), 0);

  auto sq_dist = [&](const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t d = 0; d < dim; ++d) {
      const double diff = a[d] - b[d];
      s += diff * diff;
    }
    return s;
  };

  for (std::size_t iter = 0; iter < max_iter; ++iter) {
    bool changed = false;
    for (std::size_t i = 0; i < points.size(); ++i) {
      std::size_t best = 0;
      double best_d = sq_dist(points[i], res.centroids[0]);
      for (std::size_t c = 1; c < k; ++c) {
        const double d = sq_dist(points[i], res.centroids[c]);
        if (d < best_d) {  // ties keep the lower centroid index
          best_d = d;
          best = c;
        }
      }
      if (res.assignments[i] != best) {
        res.assignments[i] = best;
        changed = true;
      }
    }
    res.iterations = iter + 1;
    // update step: empty clusters keep their previous centroid
    std::vector<std::vector<double>> sums(k, std::vector<double>(dim, 0.0));
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t i = 0; i < points.size(); ++i) {
      ++counts[res.assignments[i]];
      for (std::size_t d = 0; d < dim; ++d) sums[res.assignments[i]][d] += points[i][d];
    }
    for (std::size_t c = 0; c < k; ++c)
      if (counts[c] > 0)
        for (std::size_t d = 0; d < dim; ++d)
          res.centroids[c][d] = sums[c][d] / static_cast<double>(counts[c]);
    if (!changed && iter > 0) break;
  }

  res.inertia = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i)
    res.inertia += sq_dist(points[i], res.centroids[res.assignments[i]]);
  return res;
}

// ---------------------------------------------------------------------------
// Text diversity and NLG overlap
// ---------------------------------------------------------------------------

struct DiversityMetrics {
  double distinct_1 = 0.0;
  double distinct_2 = 0.0;
  double jaccard_diversity = 0.0;
  double cosine_diversity = 0.0;
  double self_bleu = 0.0;
};

inline DiversityMetrics text_diversity(const std::vector<std::string>& corpus) {
  std::vector<std::vector<std::string>> tokenized;
  for (const auto& text : corpus) {
    auto t = textmetrics::tokenize(text);
    if (!t.empty()) tokenized.push_back(std::move(t));
  }
  if (tokenized.size() < 2)
    throw ParamError("pairwise diversity metrics need at least 2 non-empty texts");

  DiversityMetrics m;
  for (std::size_t n = 1; n <= 2; ++n) {
    std::map<std::string, std::size_t> seen;
    std::size_t total = 0;
    for (const auto& toks : tokenized)
      for (auto& g : textmetrics::ngrams(toks, n)) {
        ++seen[g];
        ++total;
      }
    const double distinct =
        total == 0 ? 0.0 : static_cast<double>(seen.size()) / static_cast<double>(total);
    if (n == 1)
      m.distinct_1 = distinct;
    else
      m.distinct_2 = distinct;
  }

  double jac = 0.0, cos = 0.0;
  std::size_t pairs = 0;
  for (std::size_t i = 0; i < tokenized.size(); ++i)
    for (std::size_t j = i + 1; j < tokenized.size(); ++j) {
      jac += textmetrics::token_set_jaccard(tokenized[i], tokenized[j]);
      cos += textmetrics::tf_cosine(tokenized[i], tokenized[j]);
      ++pairs;
    }
  m.jaccard_diversity = 1.0 - jac / static_cast<double>(pairs);
  m.cosine_diversity = 1.0 - cos / static_cast<double>(pairs);

  double bleu_sum = 0.0;
  for (std::size_t i = 0; i < tokenized.size(); ++i) {
    std::vector<std::vector<std::string>> refs;
    for (std::size_t j = 0; j < tokenized.size(); ++j)
      if (j != i) refs.push_back(tokenized[j]);
    bleu_sum += textmetrics::bleu(tokenized[i], refs, 2);
  }
  m.self_bleu = bleu_sum / static_cast<double>(tokenized.size());
  return m;
}

struct NlgScores {
  double bleu_1 = 0.0;
  double bleu_2 = 0.0;
  double rouge_1 = 0.0;
  double rouge_2 = 0.0;
  double rouge_l = 0.0;
};

// Overlap metrics for one candidate against one or more references. ROUGE
// scores take the max F1 over references.
inline NlgScores nlg_overlap(const std::string& candidate,
                             const std::vector<std::string>& references) {
  if (references.empty()) throw ParamError("need at least one reference");
  NlgScores s;
  const auto cand = textmetrics::tokenize(candidate);
  if (cand.empty()) return s;  // all-zero by convention
  std::vector<std::vector<std::string>> refs;
  for (const auto& r : references) refs.push_back(textmetrics::tokenize(r));

  s.bleu_1 = textmetrics::bleu(cand, refs, 1);
  s.bleu_2 = textmetrics::bleu(cand, refs, 2);
  for (const auto& ref : refs) {
    s.rouge_1 = std::max(s.rouge_1, textmetrics::rouge_n_f1(cand, ref, 1));
    s.rouge_2 = std::max(s.rouge_2, textmetrics::rouge_n_f1(cand, ref, 2));
    s.rouge_l = std::max(s.rouge_l, textmetrics::rouge_l_f1(cand, ref));
  }
  return s;
}

// ---------------------------------------------------------------------------
// Report serialization
// ---------------------------------------------------------------------------

inline nlohmann::json to_json(const KwayResult& r) {
  nlohmann::json j;
  j["k"] = r.k;
  j["accuracy"] = r.accuracy;
  j["n_trials"] = r.n_trials;
  j["seed"] = r.seed;
  j["class_order"] = r.confusion.class_order;
  j["confusion"] = r.confusion.counts;
  return j;
}

inline nlohmann::json to_json(const EvalReport& report) {
  nlohmann::json j;
  j["n_trials"] = report.n_trials;
  j["seed"] = report.seed;
  nlohmann::json per_k = nlohmann::json::object();
  for (const auto& [k, r] : report.per_k) per_k[std::to_string(k)] = to_json(r);
  j["per_k"] = std::move(per_k);
  return j;
}

inline std::string to_csv(const ConfusionMatrix& m) {
  std::string out = "truth\\pred";
  for (const auto& c : m.class_order) out += "," + c;
  out += '\n';
  const std::size_t n = m.class_order.size();
  for (std::size_t r = 0; r < n; ++r) {
    out += m.class_order[r];
    for (std::size_t c = 0; c < n; ++c) out += "," + std::to_string(m.at(r, c));
    out += '\n';
  }
  return out;
}

inline std::string to_csv(const RsmMatrix& m) {
  std::string out = "category";
  for (const auto& c : m.col_categories) out += "," + c;
  out += '\n';
  for (std::size_t r = 0; r < m.rows; ++r) {
    out += m.row_categories[r];
    for (std::size_t c = 0; c < m.cols; ++c) {
      char buf[32];
      std::snprintf(buf, sizeof(buf), ",%.9g", m.at(r, c));
      out += buf;
    }
    out += '\n';
  }
  return out;
}

}  // namespace wavekit::evalkit
