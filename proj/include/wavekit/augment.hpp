#pragma once

#include <cmath>
#include <cstdint>
#include <string>

#include "wavekit/errors.hpp"
#include "wavekit/preprocess.hpp"
#include "wavekit/rng.hpp"

// The five augmentation/normalization transforms. All statistics are
// population statistics (divide by N), and every standard deviation is
// clamped to max(sigma, 1e-8) before dividing.

namespace wavekit {

enum class NormalizeMode { global_z, global_std, channel_z, channel_std, amplitude };

inline constexpr double kSigmaFloor = 1e-8;

inline std::string to_string(NormalizeMode m) {
  switch (m) {
    case NormalizeMode::global_z: return "global_z";
    case NormalizeMode::global_std: return "global_std";
    case NormalizeMode::channel_z: return "channel_z";
    case NormalizeMode::channel_std: return "channel_std";
    case NormalizeMode::amplitude: return "amplitude";
  }
  throw ParamError("invalid normalize mode");
}

inline NormalizeMode normalize_mode_from(const std::string& s) {
  if (s == "global_z") return NormalizeMode::global_z;
  if (s == "global_std") return NormalizeMode::global_std;
  if (s == "channel_z") return NormalizeMode::channel_z;
  if (s == "channel_std") return NormalizeMode::channel_std;
  if (s == "amplitude") return NormalizeMode::amplitude;
  throw ParamError("unknown normalize mode: " + s);
}

struct AugmentSpec {
  NormalizeMode mode = NormalizeMode::global_z;
  double amplitude_a = 0.1;  // only for amplitude mode, must stay in [0, 1)
  std::uint64_t seed = 0;
};

namespace detail {

struct MeanStd {
  double mean;
  double std_clamped;
};

inline MeanStd mean_std(const float* begin, std::size_t count) {
  double sum = 0.0;
  for (std::size_t i = 0; i < count; ++i) sum += begin[i];
  const double mean = sum / static_cast<double>(count);
  double var = 0.0;
  for (std::size_t i = 0; i < count; ++i) {
    const double d = begin[i] - mean;
    var += d * d;
  }
  var /= static_cast<double>(count);
  return {mean, std::max(std::sqrt(var), kSigmaFloor)};
}

}  // namespace detail

// The four deterministic modes. `amplitude` is seeded and lives in
// amplitude_jitter below.
inline EegSegment normalize(const EegSegment& seg, NormalizeMode mode) {
  EegSegment out = seg;
  switch (mode) {
    case NormalizeMode::global_z: {
      const auto ms = detail::mean_std(seg.data.data(), seg.data.size());
      for (auto& v : out.data) v = static_cast<float>((v - ms.mean) / ms.std_clamped);
      break;
    }
    case NormalizeMode::global_std: {
      const auto ms = detail::mean_std(seg.data.data(), seg.data.size());
      for (auto& v : out.data) v = static_cast<float>(v / ms.std_clamped);
      break;
    }
    case NormalizeMode::channel_z: {
      for (std::size_t c = 0; c < kCanonicalChannels; ++c) {
        const auto ms = detail::mean_std(seg.data.data() + c * kSegmentSamples, kSegmentSamples);
        for (std::size_t s = 0; s < kSegmentSamples; ++s)
          out.at(c, s) = static_cast<float>((seg.at(c, s) - ms.mean) / ms.std_clamped);
      }
      break;
    }
    case NormalizeMode::channel_std: {
      for (std::size_t c = 0; c < kCanonicalChannels; ++c) {
        const auto ms = detail::mean_std(seg.data.data() + c * kSegmentSamples, kSegmentSamples);
        for (std::size_t s = 0; s < kSegmentSamples; ++s)
          out.at(c, s) = static_cast<float>(seg.at(c, s) / ms.std_clamped);
      }
      break;
    }
    case NormalizeMode::amplitude:
      throw ParamError("amplitude mode requires amplitude_jitter(seg, a, seed)");
  }
  return out;
}

struct JitterResult {
  EegSegment segment;
  double scale;  // the drawn factor, recorded for provenance
};

// One scale factor per segment, drawn from U(1-a, 1+a).
inline JitterResult amplitude_jitter(const EegSegment& seg, double a, std::uint64_t seed) {
  if (a < 0.0 || a >= 1.0 || !std::isfinite(a))
    throw ParamError("fluctuation amplitude must lie in [0, 1)");
  Rng rng(seed);
  const double scale = rng.uniform(1.0 - a, 1.0 + a);
  JitterResult result;
  result.segment = seg;
  result.scale = scale;
  const float s = static_cast<float>(scale);
  for (auto& v : result.segment.data) v *= s;
  return result;
}

inline EegSegment apply_augment(const EegSegment& seg, const AugmentSpec& spec) {
  if (spec.mode == NormalizeMode::amplitude)
    return amplitude_jitter(seg, spec.amplitude_a, spec.seed).segment;
  return normalize(seg, spec.mode);
}

}  // namespace wavekit
