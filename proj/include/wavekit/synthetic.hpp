#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "wavekit/align.hpp"
#include "wavekit/evalkit.hpp"
#include "wavekit/preprocess.hpp"
#include "wavekit/rng.hpp"
#include "wavekit/signalio.hpp"

// Synthetic fixtures: clustered latent factors emitted both as raw encoder
// inputs and as paired supervision features, plus random recordings and
// feature packs. Everything here is seeded and offline; it stands in for the
// private EEG corpora and the frozen CLIP embedding models.

namespace wavekit::synthetic {

// Random unit vector.
inline std::vector<float> unit_vector(std::size_t dim, Rng& rng) {
  std::vector<float> v(dim);
  double sq = 0.0;
  do {
    sq = 0.0;
    for (auto& x : v) {
      x = static_cast<float>(rng.normal());
      sq += static_cast<double>(x) * x;
    }
  } while (sq < 1e-12);
  const double inv = 1.0 / std::sqrt(sq);
  for (auto& x : v) x = static_cast<float>(x * inv);
  return v;
}

// A recording with sinusoid-plus-noise channels; arbitrary labels and rate.
inline RawRecording random_recording(const std::vector<std::string>& labels, double fs,
                                     std::size_t n_samples, Rng& rng) {
  RawRecording rec;
  rec.channel_labels = labels;
  rec.sampling_rate_hz = fs;
  rec.data.resize(labels.size() * n_samples);
  for (std::size_t c = 0; c < labels.size(); ++c) {
    const double freq = 1.0 + rng.uniform() * 30.0;
    const double phase = rng.uniform() * 6.283185307179586;
    const double amp = 5.0 + rng.uniform() * 40.0;
    for (std::size_t s = 0; s < n_samples; ++s) {
      const double t = static_cast<double>(s) / fs;
      rec.data[c * n_samples + s] = static_cast<float>(
          amp * std::sin(6.283185307179586 * freq * t + phase) + rng.normal() * 2.0);
    }
  }
  return rec;
}

// Feature pack of random unit vectors, one entry per category name.
inline FeaturePack random_pack(const std::string& dataset, const std::string& modality,
                               const std::vector<std::string>& categories, std::size_t dim,
                               Rng& rng) {
  FeaturePack pack;
  pack.dim = dim;
  for (const auto& cat : categories)
    pack.entries.push_back({unit_vector(dim, rng), cat, dataset, modality});
  return pack;
}

inline std::vector<std::string> numbered_categories(const std::string& prefix, std::size_t count) {
  std::vector<std::string> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.push_back(prefix + std::to_string(i));
  return out;
}

// ---------------------------------------------------------------------------
// Two-modality alignment fixture with a shared latent structure
// ---------------------------------------------------------------------------

struct AlignmentFixture {
  // per item: raw encoder input, unit supervision target, modality, class id
  std::vector<std::vector<double>> inputs;
  std::vector<std::vector<double>> supervision;
  std::vector<Modality> modality;
  std::vector<std::size_t> class_id;
  // class-level unit supervision anchors, one per (class, modality)
  std::vector<std::vector<double>> image_anchor;
  std::vector<std::vector<double>> text_anchor;
};

struct FixtureSpec {
  std::size_t n_classes = 8;
  std::size_t samples_per_class = 24;  // per modality
  std::size_t input_dim = 16;
  std::size_t feature_dim = 16;
  std::size_t latent_dim = 6;
  double input_noise = 0.25;
  std::uint64_t seed = 7;
};

// Each class owns a latent code z. Supervision anchors are unit projections
// of z through per-modality maps; encoder inputs are a third projection of z
// plus noise. Joint structure across modalities comes entirely from the
// shared z.
inline AlignmentFixture make_alignment_fixture(const FixtureSpec& spec) {
  Rng rng(spec.seed);
  AlignmentFixture fx;

  auto random_matrix = [&](std::size_t rows, std::size_t cols) {
    std::vector<double> m(rows * cols);
    const double scale = 1.0 / std::sqrt(static_cast<double>(cols));
    for (auto& v : m) v = rng.normal() * scale;
    return m;
  };
  const auto w_img = random_matrix(spec.feature_dim, spec.latent_dim);
  const auto w_txt = random_matrix(spec.feature_dim, spec.latent_dim);
  const auto w_eeg = random_matrix(spec.input_dim, spec.latent_dim);

  auto apply = [](const std::vector<double>& m, std::size_t rows, std::size_t cols,
                  const std::vector<double>& x) {
    std::vector<double> y(rows, 0.0);
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t c = 0; c < cols; ++c) y[r] += m[r * cols + c] * x[c];
    return y;
  };

  std::vector<std::vector<double>> latents;
  for (std::size_t cls = 0; cls < spec.n_classes; ++cls) {
    std::vector<double> z(spec.latent_dim);
    for (auto& v : z) v = rng.normal();
    latents.push_back(z);
    fx.image_anchor.push_back(
        l2_normalize(apply(w_img, spec.feature_dim, spec.latent_dim, z)));
    fx.text_anchor.push_back(l2_normalize(apply(w_txt, spec.feature_dim, spec.latent_dim, z)));
  }

  for (std::size_t cls = 0; cls < spec.n_classes; ++cls) {
    for (Modality m : {Modality::image, Modality::text}) {
      for (std::size_t s = 0; s < spec.samples_per_class; ++s) {
        std::vector<double> x = apply(w_eeg, spec.input_dim, spec.latent_dim, latents[cls]);
        for (auto& v : x) v += rng.normal() * spec.input_noise;
        fx.inputs.push_back(std::move(x));
        fx.supervision.push_back(m == Modality::image ? fx.image_anchor[cls]
                                                      : fx.text_anchor[cls]);
        fx.modality.push_back(m);
        fx.class_id.push_back(cls);
      }
    }
  }
  return fx;
}

// Batch up a subset of fixture items, preserving order.
inline AlignBatch make_batch(const AlignmentFixture& fx, const std::vector<std::size_t>& items) {
  AlignBatch b;
  for (std::size_t i : items) {
    b.inputs.push_back(fx.inputs[i]);
    b.supervision.push_back(fx.supervision[i]);
    b.modality.push_back(fx.modality[i]);
  }
  return b;
}

// Held-out 2-way retrieval: for each item, the encoded feature must be closer
// to its own class anchor than to a uniformly drawn wrong class anchor.
inline double two_way_retrieval(const MlpEncoder& encoder, const AlignmentFixture& fx,
                                const std::vector<std::size_t>& items, Modality which,
                                std::uint64_t seed) {
  Rng rng(seed);
  std::size_t hits = 0, total = 0;
  const auto& anchors = which == Modality::image ? fx.image_anchor : fx.text_anchor;
  for (std::size_t i : items) {
    if (fx.modality[i] != which) continue;
    const auto feat = l2_normalize(encoder.forward(fx.inputs[i]));
    const std::size_t truth = fx.class_id[i];
    std::size_t wrong = truth;
    while (wrong == truth) wrong = static_cast<std::size_t>(rng.below(anchors.size()));
    double s_true = 0.0, s_wrong = 0.0;
    for (std::size_t d = 0; d < feat.size(); ++d) {
      s_true += feat[d] * anchors[truth][d];
      s_wrong += feat[d] * anchors[wrong][d];
    }
    if (s_true > s_wrong) ++hits;
    ++total;
  }
  return total == 0 ? 0.0 : static_cast<double>(hits) / static_cast<double>(total);
}

}  // namespace wavekit::synthetic
