#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "wavekit/encoder.hpp"
#include "wavekit/errors.hpp"
#include "wavekit/rng.hpp"

// Dual-supervision contrastive alignment: per-modality InfoNCE over a shared
// embedding space, combined as lambda * L_vis + (1 - lambda) * L_txt, plus a
// seeded SGD loop for the reference encoder.

namespace wavekit {

enum class Modality { image, text };

inline std::string to_string(Modality m) { return m == Modality::image ? "image" : "text"; }

inline Modality modality_from(const std::string& s) {
  if (s == "image") return Modality::image;
  if (s == "text") return Modality::text;
  throw FormatError("unknown modality: " + s);
}

// One training batch: encoder inputs paired with unit-norm supervision
// vectors and a per-item modality flag.
struct AlignBatch {
  std::vector<std::vector<double>> inputs;       // raw encoder inputs
  std::vector<std::vector<double>> supervision;  // unit-norm targets
  std::vector<Modality> modality;

  std::size_t size() const { return inputs.size(); }
  void validate() const {
    if (inputs.empty()) throw ParamError("batch must hold at least one item");
    if (supervision.size() != inputs.size() || modality.size() != inputs.size())
      throw ShapeError("batch fields must have equal lengths");
  }
};

struct LossBreakdown {
  double loss_vis = 0.0;
  double loss_txt = 0.0;
  double combined = 0.0;
  double lambda = 0.5;
  double tau = 14.2857;
  std::size_t n_vis = 0;
  std::size_t n_txt = 0;
};

inline constexpr double kNormFloor = 1e-12;

inline std::vector<double> l2_normalize(const std::vector<double>& v) {
  double sq = 0.0;
  for (double x : v) sq += x * x;
  const double norm = std::sqrt(sq);
  if (!(norm > kNormFloor)) throw NormError("cannot normalize a (near-)zero vector");
  std::vector<double> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i] / norm;
  return out;
}

inline std::vector<float> l2_normalize(const std::vector<float>& v) {
  double sq = 0.0;
  for (float x : v) sq += static_cast<double>(x) * x;
  const double norm = std::sqrt(sq);
  if (!(norm > kNormFloor)) throw NormError("cannot normalize a (near-)zero vector");
  std::vector<float> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = static_cast<float>(v[i] / norm);
  return out;
}

namespace detail {

inline double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace detail

// InfoNCE over raw (pre-normalization) features against unit supervision
// vectors. Each modality group is scored only against its own members; a
// group with no members contributes 0 and the lambda weights are not
// renormalized. When grad_raw is non-null it receives d(combined)/d(raw_i),
// with the normalization Jacobian folded in.
inline LossBreakdown dual_loss_features(const std::vector<std::vector<double>>& raw_features,
                                        const std::vector<std::vector<double>>& supervision,
                                        const std::vector<Modality>& modality, double lambda,
                                        double tau,
                                        std::vector<std::vector<double>>* grad_raw = nullptr) {
  if (lambda < 0.0 || lambda > 1.0 || !std::isfinite(lambda))
    throw ParamError("lambda must lie in [0, 1]");
  if (!(tau > 0.0) || !std::isfinite(tau)) throw ParamError("tau must be positive");
  if (raw_features.empty()) throw ParamError("need at least one item");
  if (supervision.size() != raw_features.size() || modality.size() != raw_features.size())
    throw ShapeError("features, supervision and modality flags must pair up");

  const std::size_t n = raw_features.size();
  std::vector<std::vector<double>> unit(n);
  std::vector<double> norms(n);
  for (std::size_t i = 0; i < n; ++i) {
    double sq = 0.0;
    for (double x : raw_features[i]) sq += x * x;
    norms[i] = std::sqrt(sq);
    if (!(norms[i] > kNormFloor)) throw NormError("encoder output has (near-)zero norm");
    unit[i].resize(raw_features[i].size());
    for (std::size_t d = 0; d < raw_features[i].size(); ++d)
      unit[i][d] = raw_features[i][d] / norms[i];
  }

  if (grad_raw) {
    grad_raw->assign(n, std::vector<double>());
    for (std::size_t i = 0; i < n; ++i) (*grad_raw)[i].assign(raw_features[i].size(), 0.0);
  }

  LossBreakdown out;
  out.lambda = lambda;
  out.tau = tau;

  for (Modality group : {Modality::image, Modality::text}) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < n; ++i)
      if (modality[i] == group) members.push_back(i);
    const std::size_t ng = members.size();
    if (group == Modality::image)
      out.n_vis = ng;
    else
      out.n_txt = ng;
    if (ng == 0) continue;

    const double weight = group == Modality::image ? lambda : 1.0 - lambda;
    double loss = 0.0;
    std::vector<double> logits(ng), probs(ng);
    for (std::size_t a = 0; a < ng; ++a) {
      const std::size_t i = members[a];
      double max_l = -1e300;
      for (std::size_t b = 0; b < ng; ++b) {
        logits[b] = tau * detail::dot(unit[i], supervision[members[b]]);
        max_l = std::max(max_l, logits[b]);
      }
      double z = 0.0;
      for (std::size_t b = 0; b < ng; ++b) {
        probs[b] = std::exp(logits[b] - max_l);
        z += probs[b];
      }
      loss += (max_l + std::log(z)) - logits[a];

      if (grad_raw && weight != 0.0) {
        // dL/d(unit_i) = -(tau / Ng) * (z_i - sum_b p_b z_b)
        const std::size_t dim = unit[i].size();
        std::vector<double> gu(dim, 0.0);
        for (std::size_t b = 0; b < ng; ++b) {
          const double p = probs[b] / z;
          const auto& zb = supervision[members[b]];
          for (std::size_t d = 0; d < dim; ++d) gu[d] += p * zb[d];
        }
        const auto& zi = supervision[i];
        const double scale = weight * tau / static_cast<double>(ng);
        for (std::size_t d = 0; d < dim; ++d) gu[d] = scale * (gu[d] - zi[d]);
        // chain through normalization: (I - u u^T) / ||raw||
        const double proj = detail::dot(gu, unit[i]);
        auto& gr = (*grad_raw)[i];
        for (std::size_t d = 0; d < dim; ++d)
          gr[d] += (gu[d] - proj * unit[i][d]) / norms[i];
      }
    }
    loss /= static_cast<double>(ng);
    if (group == Modality::image)
      out.loss_vis = loss;
    else
      out.loss_txt = loss;
  }

  out.combined = lambda * out.loss_vis + (1.0 - lambda) * out.loss_txt;
  return out;
}

// Convenience wrapper: encode the batch with the reference encoder first.
inline LossBreakdown dual_loss(const AlignBatch& batch, const MlpEncoder& encoder, double lambda,
                               double tau) {
  batch.validate();
  std::vector<std::vector<double>> features;
  features.reserve(batch.size());
  for (const auto& x : batch.inputs) features.push_back(encoder.forward(x));
  return dual_loss_features(features, batch.supervision, batch.modality, lambda, tau);
}

// Combined loss and exact parameter gradients through the encoder.
inline LossBreakdown dual_loss_grad(const AlignBatch& batch, const MlpEncoder& encoder,
                                    double lambda, double tau, std::vector<double>* flat_grads) {
  batch.validate();
  std::vector<std::vector<double>> features;
  features.reserve(batch.size());
  for (const auto& x : batch.inputs) features.push_back(encoder.forward(x));

  std::vector<std::vector<double>> grad_features;
  const LossBreakdown loss = dual_loss_features(features, batch.supervision, batch.modality,
                                                lambda, tau, &grad_features);
  const MlpGradients g = mlp_apply_and_grad(encoder, batch.inputs, grad_features);
  if (flat_grads) *flat_grads = g.flat();
  return loss;
}

struct TrainConfig {
  double lambda = 0.5;
  double tau = 14.2857;  // 1 / 0.07
  double learning_rate = 0.05;
  double momentum = 0.0;
  std::size_t epochs = 1;
  std::uint64_t seed = 0;
};

struct TrainResult {
  MlpEncoder encoder;
  std::vector<double> loss_trace;  // combined loss per step, in step order
};

// Plain seeded SGD over the batches. Batch order shuffles once per epoch;
// a non-finite loss aborts with the offending step index.
inline TrainResult train_alignment(const std::vector<AlignBatch>& corpus, MlpEncoder encoder,
                                   const TrainConfig& cfg) {
  if (corpus.empty()) throw ParamError("training corpus must be non-empty");
  for (const auto& b : corpus) b.validate();

  Rng rng(cfg.seed);
  std::vector<double> velocity(encoder.parameter_count(), 0.0);
  TrainResult result;
  std::size_t step = 0;

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::vector<std::size_t> order(corpus.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    rng.shuffle(order);

    for (std::size_t bi : order) {
      std::vector<double> grads;
      const LossBreakdown loss = dual_loss_grad(corpus[bi], encoder, cfg.lambda, cfg.tau, &grads);
      if (!std::isfinite(loss.combined)) throw TrainError("loss diverged", step);
      result.loss_trace.push_back(loss.combined);

      std::vector<double> params = encoder.parameters();
      for (std::size_t i = 0; i < params.size(); ++i) {
        velocity[i] = cfg.momentum * velocity[i] - cfg.learning_rate * grads[i];
        params[i] += velocity[i];
      }
      encoder.set_parameters(params);
      ++step;
    }
  }
  result.encoder = std::move(encoder);
  return result;
}

}  // namespace wavekit
