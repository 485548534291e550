#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "wavekit/align.hpp"
#include "wavekit/errors.hpp"
#include "wavekit/signalio.hpp"

// Feature database with dataset-tagged storage, grouped top-K query with a
// per-dataset guarantee, and prompt rendering for retrieval-augmented
// generation.

namespace wavekit {

inline constexpr std::size_t kDefaultRagK = 420;

struct FeatureStore {
  std::vector<TaggedFeature> entries;                    // unit-norm, insertion order
  std::vector<std::string> group_order;                  // datasets by first appearance
  std::map<std::string, std::vector<std::size_t>> groups;  // dataset -> entry indices
  std::size_t dim = 0;

  std::size_t size() const { return entries.size(); }
  std::size_t group_count() const { return group_order.size(); }
};

// Normalize and group pack entries. Vectors are expected to arrive unit-norm
// (they are re-normalized for exactness); a norm off by more than 1e-3 is
// treated as corrupt input.
inline FeatureStore build_store(const std::vector<FeaturePack>& packs) {
  FeatureStore store;
  for (const auto& pack : packs) {
    if (store.dim == 0) store.dim = pack.dim;
    if (pack.dim != store.dim)
      throw FormatError("packs disagree on dim: " + std::to_string(pack.dim) + " vs " +
                        std::to_string(store.dim));
    for (const auto& entry : pack.entries) {
      double sq = 0.0;
      for (float v : entry.vec) sq += static_cast<double>(v) * v;
      const double norm = std::sqrt(sq);
      if (!(norm > kNormFloor)) throw NormError("zero feature vector for " + entry.category);
      if (std::abs(norm - 1.0) > 1e-3)
        throw NormError("feature for " + entry.category + " has norm " + std::to_string(norm) +
                        ", expected unit");
      TaggedFeature e = entry;
      for (auto& v : e.vec) v = static_cast<float>(v / norm);
      const std::size_t index = store.entries.size();
      auto [it, inserted] = store.groups.try_emplace(e.dataset);
      if (inserted) store.group_order.push_back(e.dataset);
      it->second.push_back(index);
      store.entries.push_back(std::move(e));
    }
  }
  return store;
}

struct RetrievalHit {
  std::string category;
  std::string dataset;
  double similarity = 0.0;
  std::size_t index = 0;  // insertion index in the store
};

struct RetrievalResult {
  std::vector<RetrievalHit> hits;
  std::size_t k = 0;
};

// Grouped top-K query. Phase 1 takes each dataset group's best match so the
// result covers every task; phase 2 fills the remaining slots by global
// similarity over the unselected entries. Ties break toward the lower
// insertion index. Hit order: the per-group picks in group first-appearance
// order, then the fill picks by descending similarity.
inline RetrievalResult query_topk(const FeatureStore& store, const std::vector<float>& eeg_feature,
                                  std::size_t k) {
  if (store.size() == 0) throw EmptyStoreError("store holds no entries");
  if (k < store.group_count())
    throw ParamError("k = " + std::to_string(k) + " is below the group count " +
                     std::to_string(store.group_count()));
  if (eeg_feature.size() != store.dim) throw ShapeError("query dim mismatch");

  const std::vector<float> q = l2_normalize(eeg_feature);
  std::vector<double> sim(store.size());
  for (std::size_t i = 0; i < store.size(); ++i) {
    double s = 0.0;
    const auto& v = store.entries[i].vec;
    for (std::size_t d = 0; d < store.dim; ++d) s += static_cast<double>(q[d]) * v[d];
    sim[i] = s;
  }

  std::vector<bool> selected(store.size(), false);
  RetrievalResult result;
  result.k = k;

  for (const auto& dataset : store.group_order) {
    const auto& members = store.groups.at(dataset);
    std::size_t best = members.front();
    for (std::size_t idx : members)
      if (sim[idx] > sim[best]) best = idx;  // strict: ties keep the earlier index
    selected[best] = true;
    result.hits.push_back({store.entries[best].category, dataset, sim[best], best});
  }

  const std::size_t remaining = std::min(k, store.size()) - result.hits.size();
  if (remaining > 0) {
    std::vector<std::size_t> candidates;
    candidates.reserve(store.size());
    for (std::size_t i = 0; i < store.size(); ++i)
      if (!selected[i]) candidates.push_back(i);
    std::stable_sort(candidates.begin(), candidates.end(), [&](std::size_t a, std::size_t b) {
      if (sim[a] != sim[b]) return sim[a] > sim[b];
      return a < b;
    });
    for (std::size_t i = 0; i < remaining; ++i) {
      const std::size_t idx = candidates[i];
      result.hits.push_back({store.entries[idx].category, store.entries[idx].dataset, sim[idx], idx});
    }
  }
  return result;
}

// Dataset tag -> task label used when rendering prompts.
inline const std::map<std::string, std::string>& default_task_labels() {
  static const std::map<std::string, std::string> labels = {
      {"SEED", "Emotion Recognition"},      {"TUAB", "Abnormal Classification"},
      {"TUEV", "Event Classification"},     {"THING-EEG", "Visual Stimuli"},
      {"ImageNet-EEG", "Visual Stimuli"},
  };
  return labels;
}

// Render the search result as the prompt block: a fixed header line, then one
// "If task is <Task>: <names>" line per task in first-appearance order, names
// comma-joined in hit order.
inline std::string render_prompt(const RetrievalResult& result,
                                 const std::map<std::string, std::string>& task_map =
                                     default_task_labels()) {
  std::string out =
      "Following is the Feature Database Search Result, you can consider, but it may be wrong:\n";
  std::vector<std::string> task_order;
  std::map<std::string, std::vector<std::string>> names_by_task;
  for (const auto& hit : result.hits) {
    auto it = task_map.find(hit.dataset);
    if (it == task_map.end()) throw MapError("no task label for dataset: " + hit.dataset);
    auto [slot, inserted] = names_by_task.try_emplace(it->second);
    if (inserted) task_order.push_back(it->second);
    slot->second.push_back(hit.category);
  }
  for (const auto& task : task_order) {
    out += "If task is " + task + ": ";
    const auto& names = names_by_task[task];
    for (std::size_t i = 0; i < names.size(); ++i) {
      if (i > 0) out += ',';
      out += names[i];
    }
    out += '\n';
  }
  return out;
}

// Persist a store as a feature pack (entries are already unit-norm).
inline FeaturePack store_to_pack(const FeatureStore& store) {
  FeaturePack pack;
  pack.dim = store.dim == 0 ? 768 : store.dim;
  pack.entries = store.entries;
  return pack;
}

}  // namespace wavekit
