#pragma once

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "wavekit/errors.hpp"
#include "wavekit/signalio.hpp"

// Montage unification, resampling and fixed-duration segmentation. Arbitrary
// recordings come in, canonical 32x512 one-second segments at 512 Hz come out.

namespace wavekit {

inline constexpr std::size_t kCanonicalChannels = 32;
inline constexpr std::size_t kSegmentSamples = 512;
inline constexpr double kCanonicalRateHz = 512.0;

// Canonical segment: exactly 32 channels x 512 samples, channel-major.
struct EegSegment {
  std::array<float, kCanonicalChannels * kSegmentSamples> data{};
  std::string source_id;

  float at(std::size_t c, std::size_t s) const { return data[c * kSegmentSamples + s]; }
  float& at(std::size_t c, std::size_t s) { return data[c * kSegmentSamples + s]; }

  bool operator==(const EegSegment&) const = default;
};

// Canonical channel list with planar head-projection coordinates
// (x grows to the right ear, y grows to the nasion, outer ring at radius 1).
struct MontageMap {
  std::vector<std::string> canonical_channels;
  std::vector<std::pair<double, double>> positions;  // parallel to canonical_channels

  static MontageMap standard_32();
};

inline MontageMap MontageMap::standard_32() {
  MontageMap m;
  const std::vector<std::pair<std::string, std::pair<double, double>>> table = {
      {"Fp1", {-0.31, 0.95}}, {"Fp2", {0.31, 0.95}},   {"F7", {-0.81, 0.59}},
      {"F3", {-0.45, 0.51}},  {"Fz", {0.00, 0.40}},    {"F4", {0.45, 0.51}},
      {"F8", {0.81, 0.59}},   {"FC5", {-0.67, 0.29}},  {"FC1", {-0.25, 0.25}},
      {"FC2", {0.25, 0.25}},  {"FC6", {0.67, 0.29}},   {"T7", {-1.00, 0.00}},
      {"C3", {-0.40, 0.00}},  {"Cz", {0.00, 0.00}},    {"C4", {0.40, 0.00}},
      {"T8", {1.00, 0.00}},   {"CP5", {-0.67, -0.29}}, {"CP1", {-0.25, -0.25}},
      {"CP2", {0.25, -0.25}}, {"CP6", {0.67, -0.29}},  {"P7", {-0.81, -0.59}},
      {"P3", {-0.45, -0.51}}, {"Pz", {0.00, -0.40}},   {"P4", {0.45, -0.51}},
      {"P8", {0.81, -0.59}},  {"POz", {0.00, -0.60}},  {"O1", {-0.31, -0.95}},
      {"Oz", {0.00, -0.80}},  {"O2", {0.31, -0.95}},   {"AFz", {0.00, 0.60}},
      {"CPz", {0.00, -0.20}}, {"FCz", {0.00, 0.20}},
  };
  for (const auto& [label, pos] : table) {
    m.canonical_channels.push_back(label);
    m.positions.push_back(pos);
  }
  return m;
}

namespace detail {

// Case-insensitive, whitespace-stripped label key. The old temporal names
// T3/T4/T5/T6 alias to T7/T8/P7/P8.
inline std::string normalize_label(const std::string& raw) {
  std::string s;
  for (char c : raw)
    if (!std::isspace(static_cast<unsigned char>(c)))
      s.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  if (s == "t3") return "t7";
  if (s == "t4") return "t8";
  if (s == "t5") return "p7";
  if (s == "t6") return "p8";
  return s;
}

}  // namespace detail

// Map a recording onto the canonical channel set. Channels present in the
// input are copied verbatim (first occurrence wins); missing channels are
// reconstructed as an inverse-distance-weighted blend of the 3 nearest
// present electrodes in the planar layout.
inline RawRecording unify_montage(const RawRecording& rec, const MontageMap& map) {
  if (map.canonical_channels.size() != map.positions.size())
    throw FormatError("montage labels and positions disagree in size");

  std::map<std::string, std::size_t> input_by_key;
  for (std::size_t i = 0; i < rec.channel_labels.size(); ++i)
    input_by_key.emplace(detail::normalize_label(rec.channel_labels[i]), i);

  const std::size_t n_out = map.canonical_channels.size();
  std::vector<std::optional<std::size_t>> source(n_out);
  std::size_t recognized = 0;
  for (std::size_t c = 0; c < n_out; ++c) {
    auto it = input_by_key.find(detail::normalize_label(map.canonical_channels[c]));
    if (it != input_by_key.end()) {
      source[c] = it->second;
      ++recognized;
    }
  }
  if (recognized == 0) throw MontageError("no input channel matches the canonical montage");

  const std::size_t n = rec.n_samples();
  RawRecording out;
  out.channel_labels = map.canonical_channels;
  out.sampling_rate_hz = rec.sampling_rate_hz;
  out.data.resize(n_out * n);

  for (std::size_t c = 0; c < n_out; ++c) {
    if (source[c]) {
      std::copy_n(rec.data.begin() + *source[c] * n, n, out.data.begin() + c * n);
      continue;
    }
    // k = 3 nearest present electrodes, inverse-distance weights.
    std::vector<std::pair<double, std::size_t>> dist;
    for (std::size_t o = 0; o < n_out; ++o) {
      if (!source[o]) continue;
      const double dx = map.positions[c].first - map.positions[o].first;
      const double dy = map.positions[c].second - map.positions[o].second;
      dist.emplace_back(std::sqrt(dx * dx + dy * dy), o);
    }
    std::sort(dist.begin(), dist.end());
    const std::size_t k = std::min<std::size_t>(3, dist.size());
    double wsum = 0.0;
    std::vector<std::pair<double, std::size_t>> weights;
    for (std::size_t i = 0; i < k; ++i) {
      const double w = 1.0 / std::max(dist[i].first, 1e-12);
      weights.emplace_back(w, dist[i].second);
      wsum += w;
    }
    for (std::size_t s = 0; s < n; ++s) {
      double acc = 0.0;
      for (const auto& [w, o] : weights) acc += w * rec.at(*source[o], s);
      out.at(c, s) = static_cast<float>(acc / wsum);
    }
  }
  return out;
}

// Linear-interpolation resampling. The output grid places sample i at
// i / target_hz; positions past the end of the input clamp to the final
// input sample, so both grids cover the same span. Output sample count
// rounds half-up from n * target / source.
inline RawRecording resample(const RawRecording& rec, double target_hz) {
  if (target_hz <= 0.0 || !std::isfinite(target_hz))
    throw ParamError("target rate must be positive");
  const std::size_t n = rec.n_samples();
  if (n < 2) throw ResampleError("need at least 2 samples to resample");

  if (rec.sampling_rate_hz == target_hz) {
    RawRecording out = rec;
    return out;  // exact identity
  }

  const double ratio = target_hz / rec.sampling_rate_hz;
  const std::size_t m =
      static_cast<std::size_t>(std::max<long long>(1, std::llround(static_cast<double>(n) * ratio)));

  RawRecording out;
  out.channel_labels = rec.channel_labels;
  out.sampling_rate_hz = target_hz;
  out.data.resize(rec.n_channels() * m);

  for (std::size_t c = 0; c < rec.n_channels(); ++c) {
    auto src = rec.channel(c);
    for (std::size_t i = 0; i < m; ++i) {
      double u = static_cast<double>(i) / ratio;  // position in source sample units
      u = std::min(u, static_cast<double>(n - 1));
      const std::size_t lo = static_cast<std::size_t>(u);
      const std::size_t hi = std::min(lo + 1, n - 1);
      const double frac = u - static_cast<double>(lo);
      out.data[c * m + i] =
          static_cast<float>((1.0 - frac) * src[lo] + frac * src[hi]);
    }
  }
  return out;
}

// Cut a canonical-rate 32-channel recording into 1-second segments.
// Shorter recordings are tiled up to one segment; longer ones split into
// floor(m / 512) non-overlapping segments, dropping any trailing remainder.
inline std::vector<EegSegment> segment(const RawRecording& rec,
                                       const std::string& source_id = "") {
  if (rec.n_channels() != kCanonicalChannels)
    throw PipelineOrderError("segmentation expects 32 canonical channels, got " +
                             std::to_string(rec.n_channels()));
  if (std::abs(rec.sampling_rate_hz - kCanonicalRateHz) > 1e-9)
    throw PipelineOrderError("segmentation expects 512 Hz input");
  const std::size_t m = rec.n_samples();
  if (m == 0) throw PipelineOrderError("cannot segment an empty recording");

  std::vector<EegSegment> out;
  if (m < kSegmentSamples) {
    EegSegment seg;
    seg.source_id = source_id.empty() ? "seg0" : source_id + "#0";
    for (std::size_t c = 0; c < kCanonicalChannels; ++c)
      for (std::size_t s = 0; s < kSegmentSamples; ++s)
        seg.at(c, s) = rec.at(c, s % m);  // temporal repetition
    out.push_back(std::move(seg));
    return out;
  }
  const std::size_t count = m / kSegmentSamples;
  out.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    EegSegment seg;
    seg.source_id =
        (source_id.empty() ? "seg" : source_id + "#") + std::to_string(k);
    for (std::size_t c = 0; c < kCanonicalChannels; ++c)
      for (std::size_t s = 0; s < kSegmentSamples; ++s)
        seg.at(c, s) = rec.at(c, k * kSegmentSamples + s);
    out.push_back(std::move(seg));
  }
  return out;
}

// montage -> 512 Hz -> 1 s segments.
inline std::vector<EegSegment> preprocess_pipeline(const RawRecording& rec,
                                                   const MontageMap& map,
                                                   const std::string& source_id = "") {
  return segment(resample(unify_montage(rec, map), kCanonicalRateHz), source_id);
}

// Segment -> recording, for feeding segments back through file codecs.
inline RawRecording to_recording(const EegSegment& seg, const MontageMap& map) {
  RawRecording rec;
  rec.channel_labels = map.canonical_channels;
  rec.sampling_rate_hz = kCanonicalRateHz;
  rec.data.assign(seg.data.begin(), seg.data.end());
  return rec;
}

inline EegSegment to_segment(const RawRecording& rec, const std::string& source_id = "") {
  if (rec.n_channels() != kCanonicalChannels || rec.n_samples() != kSegmentSamples)
    throw ShapeError("recording is not canonical 32x512");
  EegSegment seg;
  seg.source_id = source_id;
  std::copy(rec.data.begin(), rec.data.end(), seg.data.begin());
  return seg;
}

}  // namespace wavekit
