#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "wavekit/encoder.hpp"
#include "wavekit/errors.hpp"
#include "wavekit/signalio.hpp"

// Named-tensor container in the same header+payload style as the other
// binary formats: magic "WTN1", length-prefixed JSON table of {name, rows,
// cols}, then the concatenated f32 payloads in table order.

namespace wavekit {

inline std::vector<std::uint8_t> encode_tensors(const std::vector<NamedTensor>& tensors) {
  json table = json::array();
  std::size_t payload = 0;
  for (const auto& t : tensors) {
    if (t.values.size() != t.numel()) throw ShapeError("tensor " + t.name + " shape mismatch");
    table.push_back({{"name", t.name}, {"rows", t.rows}, {"cols", t.cols}});
    payload += t.numel();
  }
  json header;
  header["tensors"] = std::move(table);

  std::vector<std::uint8_t> out;
  out.reserve(8 + payload * 4 + 64);
  detail::append_header(out, "WTN1", header);
  for (const auto& t : tensors)
    for (float v : t.values) detail::put_f32le(out, v);
  return out;
}

inline std::vector<NamedTensor> decode_tensors(std::span<const std::uint8_t> bytes) {
  std::size_t offset = 0;
  const json header = detail::read_header(bytes, "WTN1", &offset);
  if (!header.is_object() || !header.contains("tensors") || !header["tensors"].is_array())
    throw FormatError("tensor container header must carry a tensors array");

  std::vector<NamedTensor> tensors;
  std::uint64_t total = 0;
  for (const auto& meta : header["tensors"]) {
    if (!meta.is_object() || !meta.contains("name") || !meta.contains("rows") ||
        !meta.contains("cols"))
      throw FormatError("tensor metadata must carry name, rows and cols");
    NamedTensor t;
    t.name = meta["name"].get<std::string>();
    t.rows = meta["rows"].get<std::size_t>();
    t.cols = meta["cols"].get<std::size_t>();
    total += static_cast<std::uint64_t>(t.rows) * t.cols;
    tensors.push_back(std::move(t));
  }
  if (bytes.size() - offset != total * 4)
    throw LengthError("payload holds " + std::to_string(bytes.size() - offset) +
                      " bytes, header implies " + std::to_string(total * 4));

  const std::uint8_t* p = bytes.data() + offset;
  for (auto& t : tensors) {
    t.values.resize(t.numel());
    for (std::size_t i = 0; i < t.values.size(); ++i) t.values[i] = detail::get_f32le(p + i * 4);
    p += t.numel() * 4;
  }
  return tensors;
}

inline std::vector<NamedTensor> decode_tensors(const std::vector<std::uint8_t>& bytes) {
  return decode_tensors(std::span<const std::uint8_t>(bytes));
}

// MLP encoder <-> tensor container.
inline std::vector<std::uint8_t> encode_mlp(const MlpEncoder& enc) {
  std::vector<NamedTensor> tensors;
  NamedTensor meta;
  meta.name = "mlp.widths";
  meta.rows = enc.widths.size();
  meta.cols = 1;
  for (std::size_t w : enc.widths) meta.values.push_back(static_cast<float>(w));
  tensors.push_back(std::move(meta));

  NamedTensor act;
  act.name = "mlp.activation";
  act.rows = 1;
  act.cols = 1;
  act.values.push_back(enc.activation == Activation::gelu ? 1.0f : 0.0f);
  tensors.push_back(std::move(act));

  for (std::size_t l = 0; l < enc.n_layers(); ++l) {
    NamedTensor w;
    w.name = "mlp." + std::to_string(l) + ".w";
    w.rows = enc.widths[l + 1];
    w.cols = enc.widths[l];
    for (double x : enc.weights[l]) w.values.push_back(static_cast<float>(x));
    tensors.push_back(std::move(w));
    NamedTensor b;
    b.name = "mlp." + std::to_string(l) + ".b";
    b.rows = enc.widths[l + 1];
    b.cols = 1;
    for (double x : enc.biases[l]) b.values.push_back(static_cast<float>(x));
    tensors.push_back(std::move(b));
  }
  return encode_tensors(tensors);
}

inline MlpEncoder decode_mlp(std::span<const std::uint8_t> bytes) {
  const auto tensors = decode_tensors(bytes);
  if (tensors.size() < 2 || tensors[0].name != "mlp.widths" || tensors[1].name != "mlp.activation")
    throw FormatError("not an MLP container");
  MlpEncoder enc;
  for (float w : tensors[0].values) enc.widths.push_back(static_cast<std::size_t>(w));
  if (enc.widths.size() < 2) throw FormatError("MLP needs at least two widths");
  enc.activation = tensors[1].values.at(0) != 0.0f ? Activation::gelu : Activation::identity;
  std::size_t idx = 2;
  for (std::size_t l = 0; l + 1 < enc.widths.size(); ++l) {
    if (idx + 1 >= tensors.size() + 1) throw FormatError("missing MLP layer tensors");
    const auto& w = tensors.at(idx++);
    const auto& b = tensors.at(idx++);
    if (w.rows != enc.widths[l + 1] || w.cols != enc.widths[l] || b.rows != enc.widths[l + 1])
      throw ShapeError("MLP layer tensor shape mismatch");
    enc.weights.emplace_back(w.values.begin(), w.values.end());
    enc.biases.emplace_back(b.values.begin(), b.values.end());
  }
  return enc;
}

inline MlpEncoder decode_mlp(const std::vector<std::uint8_t>& bytes) {
  return decode_mlp(std::span<const std::uint8_t>(bytes));
}

// ATMM parameter persistence.
inline std::vector<std::uint8_t> encode_atmm(const AtmmParams& params) {
  return encode_tensors(params.tensors);
}

inline AtmmParams decode_atmm(std::span<const std::uint8_t> bytes) {
  AtmmParams p;
  p.tensors = decode_tensors(bytes);
  return p;
}

}  // namespace wavekit
