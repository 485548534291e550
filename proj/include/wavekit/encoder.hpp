#pragma once

#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "wavekit/errors.hpp"
#include "wavekit/preprocess.hpp"
#include "wavekit/rng.hpp"

// ATMM architecture descriptor: exact per-block parameter audit plus a plain
// forward pass, and a small MLP reference encoder with analytic gradients for
// the alignment training demo.
//
// The published table pins the block totals but not the internal widths, and
// its block rows do not sum to its printed total: the remainder (1,184,360
// parameters) lives in components the table leaves unlisted. The dimensions
// below were recovered so that every audited number is met exactly:
//   embedding   = filterbank conv (1->16, kernel 511) + token linear 512->512
//   mha         = share token + 12 layers (attention width 384 = 6 heads x 64,
//                 biased projections; bias-free FFN width 1964; 2 LayerNorms)
//   ts_conv     = conv (1->40, 1x25) + pool + affine + conv (40->40, 32x1) + affine
//   projector   = linear 3520->768 (3520 = 40 maps x 88 pooled frames)
//   unlisted    = 1x1 aggregation conv, two residual 768->768 linears, final
//                 LayerNorm
// Other width assignments also reproduce the table; this one is fixed here
// and validated by the audit tests.

namespace wavekit {

struct AtmmConfig {
  std::size_t n_channels = 32;
  std::size_t n_samples = 512;
  std::size_t token_dim = 512;

  std::size_t embed_filters = 16;
  std::size_t embed_kernel = 511;
  std::size_t embed_stride = 16;

  std::size_t mha_layers = 12;
  std::size_t mha_heads = 6;
  std::size_t attn_dim = 384;  // heads * head_dim
  std::size_t ffn_dim = 1964;

  std::size_t conv_maps = 40;
  std::size_t conv_kernel = 25;
  std::size_t pool_len = 51;
  std::size_t pool_stride = 5;

  std::size_t head_blocks = 2;
  std::size_t out_dim = 768;

  std::size_t embed_frames() const {
    // conv output length with symmetric padding (kernel-1)/2 and the stride
    const std::size_t padded = n_samples + (embed_kernel - 1) / 2 * 2;
    return (padded - embed_kernel) / embed_stride + 1;
  }
  std::size_t conv_width() const { return n_samples - conv_kernel + 1; }
  std::size_t pooled_width() const { return (conv_width() - pool_len) / pool_stride + 1; }
  std::size_t flatten_dim() const { return conv_maps * pooled_width(); }

  void validate() const {
    if (n_channels == 0 || n_samples == 0 || token_dim == 0 || out_dim == 0)
      throw ParamError("config dimensions must be positive");
    if (mha_heads == 0 || attn_dim % mha_heads != 0)
      throw ParamError("attn_dim must divide into heads");
    if (embed_kernel == 0 || embed_stride == 0) throw ParamError("bad filterbank geometry");
    if (embed_filters * embed_frames() != token_dim)
      throw ParamError("filterbank output (" +
                       std::to_string(embed_filters * embed_frames()) +
                       ") must equal token_dim");
    if (conv_kernel >= n_samples || pool_len > conv_width())
      throw ParamError("temporal conv widths do not compose");
  }
};

struct AtmmParamCount {
  std::uint64_t embedding = 0;
  std::uint64_t mha = 0;
  std::uint64_t ts_conv = 0;
  std::uint64_t mlp_projector = 0;
  std::uint64_t head = 0;  // aggregation conv + residual head (unlisted rows)
  std::uint64_t total = 0;
};

// Closed-form audit; must agree with enumerating AtmmParams tensors.
inline AtmmParamCount atmm_param_count(const AtmmConfig& cfg) {
  cfg.validate();
  AtmmParamCount c;
  const std::uint64_t d = cfg.token_dim;
  const std::uint64_t i = cfg.attn_dim;
  const std::uint64_t f = cfg.ffn_dim;

  c.embedding = cfg.embed_filters * cfg.embed_kernel + cfg.embed_filters  // filterbank
                + cfg.token_dim * cfg.token_dim + cfg.token_dim;          // token linear

  if (cfg.mha_layers > 0) {
    const std::uint64_t attn = 3 * (d * i + i) + (i * d + d);  // q,k,v,out with biases
    const std::uint64_t ffn = d * f + f * d;                   // bias-free
    const std::uint64_t norms = 4 * d;                         // two LayerNorms
    c.mha = d /* share token */ + cfg.mha_layers * (attn + ffn + norms);
  }

  c.ts_conv = cfg.conv_maps * cfg.conv_kernel + cfg.conv_maps          // temporal conv
              + 2 * cfg.conv_maps                                      // affine 1
              + cfg.conv_maps * cfg.conv_maps * cfg.n_channels + cfg.conv_maps  // spatial conv
              + 2 * cfg.conv_maps;                                     // affine 2

  c.mlp_projector = static_cast<std::uint64_t>(cfg.flatten_dim()) * cfg.out_dim + cfg.out_dim;

  c.head = cfg.conv_maps * cfg.conv_maps + cfg.conv_maps                        // 1x1 agg conv
           + cfg.head_blocks * (cfg.out_dim * cfg.out_dim + cfg.out_dim)        // residual linears
           + 2 * cfg.out_dim;                                                   // final LayerNorm

  c.total = c.embedding + c.mha + c.ts_conv + c.mlp_projector + c.head;
  return c;
}

// ---------------------------------------------------------------------------
// Parameter storage and forward pass
// ---------------------------------------------------------------------------

struct NamedTensor {
  std::string name;
  std::size_t rows = 0;
  std::size_t cols = 0;  // 1 for vectors
  std::vector<float> values;

  std::size_t numel() const { return rows * cols; }
  float at(std::size_t r, std::size_t c) const { return values[r * cols + c]; }
};

struct AtmmParams {
  std::vector<NamedTensor> tensors;

  NamedTensor& add(const std::string& name, std::size_t rows, std::size_t cols) {
    tensors.push_back({name, rows, cols, std::vector<float>(rows * cols, 0.0f)});
    return tensors.back();
  }
  const NamedTensor& get(const std::string& name) const {
    for (const auto& t : tensors)
      if (t.name == name) return t;
    throw ShapeError("missing parameter tensor: " + name);
  }
  std::uint64_t numel() const {
    std::uint64_t n = 0;
    for (const auto& t : tensors) n += t.numel();
    return n;
  }
};

namespace detail {

inline void atmm_layout(const AtmmConfig& cfg, AtmmParams& p) {
  p.add("embed.filter.w", cfg.embed_filters, cfg.embed_kernel);
  p.add("embed.filter.b", cfg.embed_filters, 1);
  p.add("embed.token.w", cfg.token_dim, cfg.token_dim);
  p.add("embed.token.b", cfg.token_dim, 1);
  if (cfg.mha_layers > 0) {
    p.add("mha.share_token", cfg.token_dim, 1);
    for (std::size_t l = 0; l < cfg.mha_layers; ++l) {
      const std::string pre = "mha." + std::to_string(l) + ".";
      p.add(pre + "q.w", cfg.attn_dim, cfg.token_dim);
      p.add(pre + "q.b", cfg.attn_dim, 1);
      p.add(pre + "k.w", cfg.attn_dim, cfg.token_dim);
      p.add(pre + "k.b", cfg.attn_dim, 1);
      p.add(pre + "v.w", cfg.attn_dim, cfg.token_dim);
      p.add(pre + "v.b", cfg.attn_dim, 1);
      p.add(pre + "out.w", cfg.token_dim, cfg.attn_dim);
      p.add(pre + "out.b", cfg.token_dim, 1);
      p.add(pre + "ln1.g", cfg.token_dim, 1);
      p.add(pre + "ln1.b", cfg.token_dim, 1);
      p.add(pre + "ffn.w1", cfg.ffn_dim, cfg.token_dim);
      p.add(pre + "ffn.w2", cfg.token_dim, cfg.ffn_dim);
      p.add(pre + "ln2.g", cfg.token_dim, 1);
      p.add(pre + "ln2.b", cfg.token_dim, 1);
    }
  }
  p.add("ts.conv1.w", cfg.conv_maps, cfg.conv_kernel);
  p.add("ts.conv1.b", cfg.conv_maps, 1);
  p.add("ts.aff1.g", cfg.conv_maps, 1);
  p.add("ts.aff1.b", cfg.conv_maps, 1);
  p.add("ts.conv2.w", cfg.conv_maps, cfg.conv_maps * cfg.n_channels);
  p.add("ts.conv2.b", cfg.conv_maps, 1);
  p.add("ts.aff2.g", cfg.conv_maps, 1);
  p.add("ts.aff2.b", cfg.conv_maps, 1);
  p.add("agg.w", cfg.conv_maps, cfg.conv_maps);
  p.add("agg.b", cfg.conv_maps, 1);
  p.add("proj.w", cfg.out_dim, cfg.flatten_dim());
  p.add("proj.b", cfg.out_dim, 1);
  for (std::size_t h = 0; h < cfg.head_blocks; ++h) {
    const std::string pre = "head." + std::to_string(h) + ".";
    p.add(pre + "w", cfg.out_dim, cfg.out_dim);
    p.add(pre + "b", cfg.out_dim, 1);
  }
  p.add("head.ln.g", cfg.out_dim, 1);
  p.add("head.ln.b", cfg.out_dim, 1);
}

inline double gelu(double x) {
  // tanh form
  const double c = 0.7978845608028653558798921198687;  // sqrt(2/pi)
  return 0.5 * x * (1.0 + std::tanh(c * (x + 0.044715 * x * x * x)));
}

inline double elu(double x) { return x >= 0.0 ? x : std::expm1(x); }

inline void layer_norm(std::vector<double>& row, const NamedTensor& g, const NamedTensor& b) {
  const double n = static_cast<double>(row.size());
  double mean = 0.0;
  for (double v : row) mean += v;
  mean /= n;
  double var = 0.0;
  for (double v : row) var += (v - mean) * (v - mean);
  var /= n;
  const double inv = 1.0 / std::sqrt(var + 1e-5);
  for (std::size_t i = 0; i < row.size(); ++i)
    row[i] = (row[i] - mean) * inv * g.values[i] + b.values[i];
}

}  // namespace detail

inline AtmmParams atmm_zero_params(const AtmmConfig& cfg) {
  cfg.validate();
  AtmmParams p;
  detail::atmm_layout(cfg, p);
  return p;
}

inline AtmmParams atmm_random_params(const AtmmConfig& cfg, std::uint64_t seed) {
  AtmmParams p = atmm_zero_params(cfg);
  Rng rng(seed);
  for (auto& t : p.tensors) {
    const bool is_norm_gain = t.name.ends_with("ln1.g") || t.name.ends_with("ln2.g") ||
                              t.name.ends_with("ln.g") || t.name.ends_with("aff1.g") ||
                              t.name.ends_with("aff2.g");
    const bool is_bias = t.name.ends_with(".b") && !is_norm_gain;
    if (is_norm_gain) {
      for (auto& v : t.values) v = 1.0f;
    } else if (is_bias) {
      // zero-init biases
    } else {
      const double scale = 1.0 / std::sqrt(static_cast<double>(std::max<std::size_t>(t.cols, 1)));
      for (auto& v : t.values) v = static_cast<float>(rng.normal() * scale);
    }
  }
  return p;
}

// Forward pass for one segment. Deterministic; normalization layers run in
// inference form (per-map affine for the conv stages).
inline std::vector<float> atmm_forward(const AtmmConfig& cfg, const AtmmParams& params,
                                       const EegSegment& seg) {
  cfg.validate();
  if (cfg.n_channels != kCanonicalChannels || cfg.n_samples != kSegmentSamples)
    throw ShapeError("forward pass expects the canonical 32x512 configuration");
  {
    AtmmParams expected;
    detail::atmm_layout(cfg, expected);
    if (expected.tensors.size() != params.tensors.size())
      throw ShapeError("parameter set does not match the config layout");
    for (std::size_t i = 0; i < expected.tensors.size(); ++i) {
      const auto& e = expected.tensors[i];
      const auto& a = params.tensors[i];
      if (a.name != e.name || a.rows != e.rows || a.cols != e.cols || a.values.size() != e.numel())
        throw ShapeError("parameter tensor mismatch at " + e.name);
    }
  }

  const std::size_t d = cfg.token_dim;
  const std::size_t frames = cfg.embed_frames();
  const std::size_t pad = (cfg.embed_kernel - 1) / 2;

  // Embedding: per-channel filterbank conv, flatten, shared token linear.
  const auto& fw = params.get("embed.filter.w");
  const auto& fb = params.get("embed.filter.b");
  const auto& tw = params.get("embed.token.w");
  const auto& tb = params.get("embed.token.b");

  std::vector<std::vector<double>> tokens;  // (channels [+ share]) x token_dim
  tokens.reserve(cfg.n_channels + 1);
  for (std::size_t c = 0; c < cfg.n_channels; ++c) {
    std::vector<double> feat(cfg.embed_filters * frames, 0.0);
    for (std::size_t m = 0; m < cfg.embed_filters; ++m) {
      for (std::size_t t = 0; t < frames; ++t) {
        double acc = fb.values[m];
        const long long start = static_cast<long long>(t * cfg.embed_stride) -
                                static_cast<long long>(pad);
        for (std::size_t k = 0; k < cfg.embed_kernel; ++k) {
          const long long s = start + static_cast<long long>(k);
          if (s < 0 || s >= static_cast<long long>(cfg.n_samples)) continue;
          acc += static_cast<double>(fw.at(m, k)) *
                 static_cast<double>(seg.at(c, static_cast<std::size_t>(s)));
        }
        feat[m * frames + t] = acc;
      }
    }
    std::vector<double> token(d, 0.0);
    for (std::size_t r = 0; r < d; ++r) {
      double acc = tb.values[r];
      for (std::size_t cc = 0; cc < d; ++cc) acc += static_cast<double>(tw.at(r, cc)) * feat[cc];
      token[r] = acc;
    }
    tokens.push_back(std::move(token));
  }

  // Attention stack over channel tokens plus the share token.
  if (cfg.mha_layers > 0) {
    const auto& share = params.get("mha.share_token");
    std::vector<double> st(d);
    for (std::size_t i = 0; i < d; ++i) st[i] = share.values[i];
    tokens.insert(tokens.begin(), std::move(st));

    const std::size_t n_tok = tokens.size();
    const std::size_t head_dim = cfg.attn_dim / cfg.mha_heads;
    const double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(head_dim));

    for (std::size_t l = 0; l < cfg.mha_layers; ++l) {
      const std::string pre = "mha." + std::to_string(l) + ".";
      const auto& qw = params.get(pre + "q.w");
      const auto& qb = params.get(pre + "q.b");
      const auto& kw = params.get(pre + "k.w");
      const auto& kb = params.get(pre + "k.b");
      const auto& vw = params.get(pre + "v.w");
      const auto& vb = params.get(pre + "v.b");
      const auto& ow = params.get(pre + "out.w");
      const auto& ob = params.get(pre + "out.b");

      auto project = [&](const NamedTensor& w, const NamedTensor& b,
                         const std::vector<double>& x) {
        std::vector<double> y(cfg.attn_dim);
        for (std::size_t r = 0; r < cfg.attn_dim; ++r) {
          double acc = b.values[r];
          for (std::size_t cc = 0; cc < d; ++cc) acc += static_cast<double>(w.at(r, cc)) * x[cc];
          y[r] = acc;
        }
        return y;
      };

      std::vector<std::vector<double>> q(n_tok), k(n_tok), v(n_tok);
      for (std::size_t t = 0; t < n_tok; ++t) {
        q[t] = project(qw, qb, tokens[t]);
        k[t] = project(kw, kb, tokens[t]);
        v[t] = project(vw, vb, tokens[t]);
      }

      std::vector<std::vector<double>> attn_out(n_tok, std::vector<double>(cfg.attn_dim, 0.0));
      std::vector<double> scores(n_tok);
      for (std::size_t h = 0; h < cfg.mha_heads; ++h) {
        const std::size_t off = h * head_dim;
        for (std::size_t t = 0; t < n_tok; ++t) {
          double max_s = -1e300;
          for (std::size_t u = 0; u < n_tok; ++u) {
            double s = 0.0;
            for (std::size_t x = 0; x < head_dim; ++x) s += q[t][off + x] * k[u][off + x];
            scores[u] = s * inv_sqrt;
            max_s = std::max(max_s, scores[u]);
          }
          double z = 0.0;
          for (std::size_t u = 0; u < n_tok; ++u) {
            scores[u] = std::exp(scores[u] - max_s);
            z += scores[u];
          }
          for (std::size_t u = 0; u < n_tok; ++u) {
            const double w = scores[u] / z;
            for (std::size_t x = 0; x < head_dim; ++x) attn_out[t][off + x] += w * v[u][off + x];
          }
        }
      }

      for (std::size_t t = 0; t < n_tok; ++t) {
        std::vector<double> res(d);
        for (std::size_t r = 0; r < d; ++r) {
          double acc = ob.values[r];
          for (std::size_t cc = 0; cc < cfg.attn_dim; ++cc)
            acc += static_cast<double>(ow.at(r, cc)) * attn_out[t][cc];
          res[r] = tokens[t][r] + acc;
        }
        detail::layer_norm(res, params.get(pre + "ln1.g"), params.get(pre + "ln1.b"));

        const auto& w1 = params.get(pre + "ffn.w1");
        const auto& w2 = params.get(pre + "ffn.w2");
        std::vector<double> hidden(cfg.ffn_dim);
        for (std::size_t r = 0; r < cfg.ffn_dim; ++r) {
          double acc = 0.0;
          for (std::size_t cc = 0; cc < d; ++cc) acc += static_cast<double>(w1.at(r, cc)) * res[cc];
          hidden[r] = detail::gelu(acc);
        }
        std::vector<double> ffn(d);
        for (std::size_t r = 0; r < d; ++r) {
          double acc = 0.0;
          for (std::size_t cc = 0; cc < cfg.ffn_dim; ++cc)
            acc += static_cast<double>(w2.at(r, cc)) * hidden[cc];
          ffn[r] = res[r] + acc;
        }
        detail::layer_norm(ffn, params.get(pre + "ln2.g"), params.get(pre + "ln2.b"));
        tokens[t] = std::move(ffn);
      }
    }
    tokens.erase(tokens.begin());  // drop the share token before the conv stage
  }

  // Temporal conv over each channel row, average pool, per-map affine, ELU.
  const std::size_t cw = cfg.conv_width();
  const std::size_t pw = cfg.pooled_width();
  const auto& c1w = params.get("ts.conv1.w");
  const auto& c1b = params.get("ts.conv1.b");
  const auto& a1g = params.get("ts.aff1.g");
  const auto& a1b = params.get("ts.aff1.b");

  // maps x channels x pooled_width
  std::vector<double> stage1(cfg.conv_maps * cfg.n_channels * pw, 0.0);
  std::vector<double> convrow(cw);
  for (std::size_t m = 0; m < cfg.conv_maps; ++m) {
    for (std::size_t c = 0; c < cfg.n_channels; ++c) {
      for (std::size_t t = 0; t < cw; ++t) {
        double acc = c1b.values[m];
        for (std::size_t k = 0; k < cfg.conv_kernel; ++k)
          acc += static_cast<double>(c1w.at(m, k)) * tokens[c][t + k];
        convrow[t] = acc;
      }
      for (std::size_t t = 0; t < pw; ++t) {
        double acc = 0.0;
        for (std::size_t k = 0; k < cfg.pool_len; ++k) acc += convrow[t * cfg.pool_stride + k];
        const double pooled = acc / static_cast<double>(cfg.pool_len);
        stage1[(m * cfg.n_channels + c) * pw + t] =
            detail::elu(pooled * a1g.values[m] + a1b.values[m]);
      }
    }
  }

  // Spatial conv collapses the channel axis.
  const auto& c2w = params.get("ts.conv2.w");
  const auto& c2b = params.get("ts.conv2.b");
  const auto& a2g = params.get("ts.aff2.g");
  const auto& a2b = params.get("ts.aff2.b");
  std::vector<double> stage2(cfg.conv_maps * pw, 0.0);
  for (std::size_t m = 0; m < cfg.conv_maps; ++m) {
    for (std::size_t t = 0; t < pw; ++t) {
      double acc = c2b.values[m];
      for (std::size_t im = 0; im < cfg.conv_maps; ++im)
        for (std::size_t c = 0; c < cfg.n_channels; ++c)
          acc += static_cast<double>(c2w.at(m, im * cfg.n_channels + c)) *
                 stage1[(im * cfg.n_channels + c) * pw + t];
      stage2[m * pw + t] = detail::elu(acc * a2g.values[m] + a2b.values[m]);
    }
  }

  // 1x1 aggregation conv mixing the maps, then flatten.
  const auto& aw = params.get("agg.w");
  const auto& ab = params.get("agg.b");
  std::vector<double> agg(cfg.conv_maps * pw, 0.0);
  for (std::size_t m = 0; m < cfg.conv_maps; ++m)
    for (std::size_t t = 0; t < pw; ++t) {
      double acc = ab.values[m];
      for (std::size_t im = 0; im < cfg.conv_maps; ++im)
        acc += static_cast<double>(aw.at(m, im)) * stage2[im * pw + t];
      agg[m * pw + t] = acc;
    }

  // Projector and residual refinement head.
  const auto& pjw = params.get("proj.w");
  const auto& pjb = params.get("proj.b");
  std::vector<double> out(cfg.out_dim);
  for (std::size_t r = 0; r < cfg.out_dim; ++r) {
    double acc = pjb.values[r];
    for (std::size_t cc = 0; cc < cfg.flatten_dim(); ++cc)
      acc += static_cast<double>(pjw.at(r, cc)) * agg[cc];
    out[r] = acc;
  }
  for (std::size_t h = 0; h < cfg.head_blocks; ++h) {
    const std::string pre = "head." + std::to_string(h) + ".";
    const auto& hw = params.get(pre + "w");
    const auto& hb = params.get(pre + "b");
    std::vector<double> delta(cfg.out_dim);
    for (std::size_t r = 0; r < cfg.out_dim; ++r) {
      double acc = hb.values[r];
      for (std::size_t cc = 0; cc < cfg.out_dim; ++cc)
        acc += static_cast<double>(hw.at(r, cc)) * detail::gelu(out[cc]);
      delta[r] = acc;
    }
    for (std::size_t r = 0; r < cfg.out_dim; ++r) out[r] += delta[r];
  }
  detail::layer_norm(out, params.get("head.ln.g"), params.get("head.ln.b"));

  std::vector<float> result(cfg.out_dim);
  for (std::size_t r = 0; r < cfg.out_dim; ++r) result[r] = static_cast<float>(out[r]);
  for (float v : result)
    if (!std::isfinite(v)) throw DataError("forward pass produced non-finite output");
  return result;
}

// ---------------------------------------------------------------------------
// Reference MLP encoder with analytic gradients
// ---------------------------------------------------------------------------

enum class Activation { gelu, identity };

inline double activate(Activation a, double x) {
  return a == Activation::gelu ? detail::gelu(x) : x;
}

inline double activate_grad(Activation a, double x) {
  if (a == Activation::identity) return 1.0;
  const double c = 0.7978845608028653558798921198687;
  const double u = c * (x + 0.044715 * x * x * x);
  const double t = std::tanh(u);
  const double du = c * (1.0 + 3.0 * 0.044715 * x * x);
  return 0.5 * (1.0 + t) + 0.5 * x * (1.0 - t * t) * du;
}

// Fully connected stack: affine -> activation -> ... -> affine (no activation
// after the last layer). Double precision throughout so gradient checks hold
// at 1e-4 relative error.
struct MlpEncoder {
  std::vector<std::size_t> widths;          // [in, hidden..., out]
  std::vector<std::vector<double>> weights;  // layer l: widths[l+1] x widths[l], row-major
  std::vector<std::vector<double>> biases;   // layer l: widths[l+1]
  Activation activation = Activation::gelu;

  static MlpEncoder make(const std::vector<std::size_t>& layer_widths, std::uint64_t seed,
                         Activation act = Activation::gelu) {
    if (layer_widths.size() < 2) throw ParamError("encoder needs at least input and output widths");
    MlpEncoder enc;
    enc.widths = layer_widths;
    enc.activation = act;
    Rng rng(seed);
    for (std::size_t l = 0; l + 1 < layer_widths.size(); ++l) {
      const std::size_t rows = layer_widths[l + 1], cols = layer_widths[l];
      std::vector<double> w(rows * cols);
      const double scale = 1.0 / std::sqrt(static_cast<double>(cols));
      for (auto& x : w) x = rng.normal() * scale;
      enc.weights.push_back(std::move(w));
      enc.biases.emplace_back(rows, 0.0);
    }
    return enc;
  }

  std::size_t in_dim() const { return widths.front(); }
  std::size_t out_dim() const { return widths.back(); }
  std::size_t n_layers() const { return weights.size(); }

  std::size_t parameter_count() const {
    std::size_t n = 0;
    for (std::size_t l = 0; l < n_layers(); ++l) n += weights[l].size() + biases[l].size();
    return n;
  }

  // Flattened parameter view in (w0, b0, w1, b1, ...) order.
  std::vector<double> parameters() const {
    std::vector<double> out;
    out.reserve(parameter_count());
    for (std::size_t l = 0; l < n_layers(); ++l) {
      out.insert(out.end(), weights[l].begin(), weights[l].end());
      out.insert(out.end(), biases[l].begin(), biases[l].end());
    }
    return out;
  }

  void set_parameters(const std::vector<double>& flat) {
    if (flat.size() != parameter_count()) throw ShapeError("parameter vector size mismatch");
    std::size_t off = 0;
    for (std::size_t l = 0; l < n_layers(); ++l) {
      std::copy_n(flat.begin() + off, weights[l].size(), weights[l].begin());
      off += weights[l].size();
      std::copy_n(flat.begin() + off, biases[l].size(), biases[l].begin());
      off += biases[l].size();
    }
  }

  std::vector<double> forward(const std::vector<double>& x) const {
    if (x.size() != in_dim()) throw ShapeError("input width mismatch");
    std::vector<double> cur = x;
    for (std::size_t l = 0; l < n_layers(); ++l) {
      const std::size_t rows = widths[l + 1], cols = widths[l];
      std::vector<double> next(rows);
      for (std::size_t r = 0; r < rows; ++r) {
        double acc = biases[l][r];
        for (std::size_t c = 0; c < cols; ++c) acc += weights[l][r * cols + c] * cur[c];
        next[r] = acc;
      }
      if (l + 1 < n_layers())
        for (auto& v : next) v = activate(activation, v);
      cur = std::move(next);
    }
    return cur;
  }
};

struct MlpGradients {
  std::vector<std::vector<double>> weight_grads;
  std::vector<std::vector<double>> bias_grads;
  std::vector<std::vector<double>> features;  // per-item outputs

  std::vector<double> flat() const {
    std::vector<double> out;
    for (std::size_t l = 0; l < weight_grads.size(); ++l) {
      out.insert(out.end(), weight_grads[l].begin(), weight_grads[l].end());
      out.insert(out.end(), bias_grads[l].begin(), bias_grads[l].end());
    }
    return out;
  }
};

// Forward a batch and backpropagate the given upstream gradients into exact
// parameter gradients (summed over the batch).
inline MlpGradients mlp_apply_and_grad(const MlpEncoder& enc,
                                       const std::vector<std::vector<double>>& inputs,
                                       const std::vector<std::vector<double>>& upstream) {
  if (inputs.size() != upstream.size())
    throw ShapeError("inputs and upstream gradients must pair up");
  MlpGradients g;
  g.weight_grads.resize(enc.n_layers());
  g.bias_grads.resize(enc.n_layers());
  for (std::size_t l = 0; l < enc.n_layers(); ++l) {
    g.weight_grads[l].assign(enc.weights[l].size(), 0.0);
    g.bias_grads[l].assign(enc.biases[l].size(), 0.0);
  }

  for (std::size_t item = 0; item < inputs.size(); ++item) {
    const auto& x = inputs[item];
    if (x.size() != enc.in_dim()) throw ShapeError("input width mismatch");
    if (upstream[item].size() != enc.out_dim()) throw ShapeError("upstream width mismatch");

    // forward, keeping pre-activations and activations
    std::vector<std::vector<double>> acts;     // activations entering each layer
    std::vector<std::vector<double>> preacts;  // affine outputs per layer
    acts.push_back(x);
    for (std::size_t l = 0; l < enc.n_layers(); ++l) {
      const std::size_t rows = enc.widths[l + 1], cols = enc.widths[l];
      std::vector<double> z(rows);
      for (std::size_t r = 0; r < rows; ++r) {
        double acc = enc.biases[l][r];
        for (std::size_t c = 0; c < cols; ++c) acc += enc.weights[l][r * cols + c] * acts[l][c];
        z[r] = acc;
      }
      preacts.push_back(z);
      if (l + 1 < enc.n_layers()) {
        std::vector<double> a(rows);
        for (std::size_t r = 0; r < rows; ++r) a[r] = activate(enc.activation, z[r]);
        acts.push_back(std::move(a));
      } else {
        acts.push_back(z);
      }
    }
    g.features.push_back(acts.back());

    // backward
    std::vector<double> delta = upstream[item];
    for (std::size_t li = enc.n_layers(); li-- > 0;) {
      const std::size_t rows = enc.widths[li + 1], cols = enc.widths[li];
      if (li + 1 < enc.n_layers())
        for (std::size_t r = 0; r < rows; ++r)
          delta[r] *= activate_grad(enc.activation, preacts[li][r]);
      for (std::size_t r = 0; r < rows; ++r) {
        g.bias_grads[li][r] += delta[r];
        for (std::size_t c = 0; c < cols; ++c)
          g.weight_grads[li][r * cols + c] += delta[r] * acts[li][c];
      }
      if (li > 0) {
        std::vector<double> prev(cols, 0.0);
        for (std::size_t r = 0; r < rows; ++r)
          for (std::size_t c = 0; c < cols; ++c)
            prev[c] += enc.weights[li][r * cols + c] * delta[r];
        delta = std::move(prev);
      }
    }
  }
  return g;
}

}  // namespace wavekit
