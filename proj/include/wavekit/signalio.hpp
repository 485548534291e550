#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "wavekit/errors.hpp"

// File formats and ingestion/persistence for recordings, feature packs and
// instruction corpora. Every codec is a pure function: encoding the same
// value twice yields identical bytes, and decode(encode(v)) == v bit-exactly
// (floats travel as raw little-endian IEEE-754 words).

namespace wavekit {

using json = nlohmann::json;

// ---------------------------------------------------------------------------
// Domain types
// ---------------------------------------------------------------------------

// Multichannel EEG time series, channel-major (row c holds channel c).
struct RawRecording {
  std::vector<std::string> channel_labels;
  double sampling_rate_hz = 0.0;
  std::vector<float> data;  // channel_labels.size() * n_samples() floats

  std::size_t n_channels() const { return channel_labels.size(); }
  std::size_t n_samples() const {
    return channel_labels.empty() ? 0 : data.size() / channel_labels.size();
  }
  float at(std::size_t c, std::size_t s) const { return data[c * n_samples() + s]; }
  float& at(std::size_t c, std::size_t s) { return data[c * n_samples() + s]; }
  std::span<const float> channel(std::size_t c) const {
    return {data.data() + c * n_samples(), n_samples()};
  }
  std::span<float> channel(std::size_t c) {
    return {data.data() + c * n_samples(), n_samples()};
  }

  bool operator==(const RawRecording&) const = default;
};

// Unit-norm embedding plus its provenance tags.
struct TaggedFeature {
  std::vector<float> vec;
  std::string category;
  std::string dataset;
  std::string modality;  // "image" or "text"

  bool operator==(const TaggedFeature&) const = default;
};

struct FeaturePack {
  std::vector<TaggedFeature> entries;
  std::size_t dim = 768;

  bool operator==(const FeaturePack&) const = default;
};

enum class InstructionKind { description, qa_open, qa_closed, mcq };
enum class Scenario { analysis, consultation };

struct Instruction {
  std::string question;
  std::string answer;
  InstructionKind kind = InstructionKind::description;
  Scenario scenario = Scenario::analysis;
  std::string dataset;

  bool operator==(const Instruction&) const = default;
};

struct InstructionCorpus {
  std::vector<Instruction> items;

  bool operator==(const InstructionCorpus&) const = default;
};

// ---------------------------------------------------------------------------
// Enum <-> string
// ---------------------------------------------------------------------------

inline std::string to_string(InstructionKind k) {
  switch (k) {
    case InstructionKind::description: return "description";
    case InstructionKind::qa_open: return "qa_open";
    case InstructionKind::qa_closed: return "qa_closed";
    case InstructionKind::mcq: return "mcq";
  }
  throw FormatError("invalid instruction kind");
}

inline InstructionKind instruction_kind_from(const std::string& s) {
  if (s == "description") return InstructionKind::description;
  if (s == "qa_open") return InstructionKind::qa_open;
  if (s == "qa_closed") return InstructionKind::qa_closed;
  if (s == "mcq") return InstructionKind::mcq;
  throw FormatError("unknown instruction kind: " + s);
}

inline std::string to_string(Scenario s) {
  return s == Scenario::analysis ? "analysis" : "consultation";
}

inline Scenario scenario_from(const std::string& s) {
  if (s == "analysis") return Scenario::analysis;
  if (s == "consultation") return Scenario::consultation;
  throw FormatError("unknown scenario: " + s);
}

// ---------------------------------------------------------------------------
// Little-endian primitives
// ---------------------------------------------------------------------------

namespace detail {

inline void put_u32le(std::vector<std::uint8_t>& out, std::uint32_t v) {
  out.push_back(static_cast<std::uint8_t>(v & 0xFF));
  out.push_back(static_cast<std::uint8_t>((v >> 8) & 0xFF));
  out.push_back(static_cast<std::uint8_t>((v >> 16) & 0xFF));
  out.push_back(static_cast<std::uint8_t>((v >> 24) & 0xFF));
}

inline std::uint32_t get_u32le(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

inline void put_f32le(std::vector<std::uint8_t>& out, float f) {
  put_u32le(out, std::bit_cast<std::uint32_t>(f));
}

inline float get_f32le(const std::uint8_t* p) {
  return std::bit_cast<float>(get_u32le(p));
}

// Header check shared by the binary formats: magic, declared header length,
// JSON parse. Returns the parsed header and the payload offset.
inline json read_header(std::span<const std::uint8_t> bytes, const char magic[4],
                        std::size_t* payload_offset) {
  if (bytes.size() < 8) throw FormatError("file too short for magic and header length");
  if (std::memcmp(bytes.data(), magic, 4) != 0)
    throw FormatError(std::string("bad magic, expected ") + std::string(magic, 4));
  const std::uint64_t header_len = get_u32le(bytes.data() + 4);
  if (8 + header_len > bytes.size()) throw FormatError("declared header length exceeds file size");
  json header = json::parse(bytes.begin() + 8, bytes.begin() + 8 + header_len,
                            /*cb=*/nullptr, /*allow_exceptions=*/false);
  if (header.is_discarded()) throw FormatError("header is not valid JSON");
  *payload_offset = 8 + static_cast<std::size_t>(header_len);
  return header;
}

inline void append_header(std::vector<std::uint8_t>& out, const char magic[4],
                          const json& header) {
  out.insert(out.end(), magic, magic + 4);
  const std::string h = header.dump();  // compact, keys sorted: canonical
  put_u32le(out, static_cast<std::uint32_t>(h.size()));
  out.insert(out.end(), h.begin(), h.end());
}

inline void check_finite_payload(std::span<const float> values) {
  for (float v : values)
    if (!std::isfinite(v)) throw DataError("payload contains NaN or Inf");
}

}  // namespace detail

// ---------------------------------------------------------------------------
// EEGB recording codec
//   magic "EEGB" | u32le header length | JSON {channels, fs, n} | f32le payload
// ---------------------------------------------------------------------------

inline std::vector<std::uint8_t> encode_recording(const RawRecording& rec) {
  if (rec.sampling_rate_hz <= 0.0 || !std::isfinite(rec.sampling_rate_hz))
    throw FormatError("sampling rate must be a positive finite number");
  if (!rec.channel_labels.empty() && rec.data.size() % rec.channel_labels.size() != 0)
    throw LengthError("data size is not a multiple of the channel count");
  if (rec.channel_labels.empty() && !rec.data.empty())
    throw LengthError("data present but no channels declared");
  detail::check_finite_payload(rec.data);

  json header;
  header["channels"] = rec.channel_labels;
  header["fs"] = rec.sampling_rate_hz;
  header["n"] = rec.n_samples();

  std::vector<std::uint8_t> out;
  out.reserve(8 + rec.data.size() * 4 + 64);
  detail::append_header(out, "EEGB", header);
  for (float v : rec.data) detail::put_f32le(out, v);
  return out;
}

inline RawRecording decode_recording(std::span<const std::uint8_t> bytes) {
  std::size_t offset = 0;
  const json header = detail::read_header(bytes, "EEGB", &offset);

  if (!header.is_object() || !header.contains("channels") || !header.contains("fs") ||
      !header.contains("n"))
    throw FormatError("recording header must carry channels, fs and n");
  if (!header["channels"].is_array()) throw FormatError("channels must be an array");
  if (!header["n"].is_number_unsigned()) throw FormatError("n must be a non-negative integer");
  if (!header["fs"].is_number()) throw FormatError("fs must be a number");

  RawRecording rec;
  for (const auto& c : header["channels"]) {
    if (!c.is_string()) throw FormatError("channel labels must be strings");
    rec.channel_labels.push_back(c.get<std::string>());
  }
  rec.sampling_rate_hz = header["fs"].get<double>();
  if (rec.sampling_rate_hz <= 0.0 || !std::isfinite(rec.sampling_rate_hz))
    throw FormatError("sampling rate must be positive");

  const std::uint64_t n = header["n"].get<std::uint64_t>();
  const std::uint64_t expected = static_cast<std::uint64_t>(rec.channel_labels.size()) * n * 4;
  if (bytes.size() - offset != expected)
    throw LengthError("payload holds " + std::to_string(bytes.size() - offset) +
                      " bytes, header implies " + std::to_string(expected));

  rec.data.resize(rec.channel_labels.size() * static_cast<std::size_t>(n));
  for (std::size_t i = 0; i < rec.data.size(); ++i)
    rec.data[i] = detail::get_f32le(bytes.data() + offset + i * 4);
  detail::check_finite_payload(rec.data);
  return rec;
}

inline RawRecording decode_recording(const std::vector<std::uint8_t>& bytes) {
  return decode_recording(std::span<const std::uint8_t>(bytes));
}

// ---------------------------------------------------------------------------
// FPK feature pack codec
//   magic "FPK1" | u32le header length | JSON {dim, count, entries} | f32le payload
// ---------------------------------------------------------------------------

inline std::vector<std::uint8_t> encode_feature_pack(const FeaturePack& pack) {
  if (pack.dim == 0) throw FormatError("feature dim must be positive");
  json entries = json::array();
  for (const auto& e : pack.entries) {
    if (e.vec.size() != pack.dim)
      throw FormatError("entry dim " + std::to_string(e.vec.size()) + " != pack dim " +
                        std::to_string(pack.dim));
    if (e.category.empty() || e.dataset.empty())
      throw FormatError("entries need non-empty category and dataset tags");
    if (e.modality != "image" && e.modality != "text")
      throw FormatError("modality must be image or text, got: " + e.modality);
    detail::check_finite_payload(e.vec);
    entries.push_back({{"category", e.category}, {"dataset", e.dataset}, {"modality", e.modality}});
  }

  json header;
  header["dim"] = pack.dim;
  header["count"] = pack.entries.size();
  header["entries"] = std::move(entries);

  std::vector<std::uint8_t> out;
  detail::append_header(out, "FPK1", header);
  for (const auto& e : pack.entries)
    for (float v : e.vec) detail::put_f32le(out, v);
  return out;
}

inline FeaturePack decode_feature_pack(std::span<const std::uint8_t> bytes) {
  std::size_t offset = 0;
  const json header = detail::read_header(bytes, "FPK1", &offset);

  if (!header.is_object() || !header.contains("dim") || !header.contains("count") ||
      !header.contains("entries"))
    throw FormatError("feature pack header must carry dim, count and entries");
  if (!header["dim"].is_number_unsigned() || header["dim"].get<std::uint64_t>() == 0)
    throw FormatError("dim must be a positive integer");
  if (!header["count"].is_number_unsigned()) throw FormatError("count must be an integer");
  if (!header["entries"].is_array()) throw FormatError("entries must be an array");

  FeaturePack pack;
  pack.dim = header["dim"].get<std::size_t>();
  const std::uint64_t count = header["count"].get<std::uint64_t>();
  if (header["entries"].size() != count)
    throw FormatError("entry table size disagrees with count");

  const std::uint64_t expected = count * pack.dim * 4;
  if (bytes.size() - offset != expected)
    throw LengthError("payload holds " + std::to_string(bytes.size() - offset) +
                      " bytes, header implies " + std::to_string(expected));

  pack.entries.reserve(count);
  const std::uint8_t* p = bytes.data() + offset;
  for (const auto& meta : header["entries"]) {
    if (!meta.is_object() || !meta.contains("category") || !meta.contains("dataset") ||
        !meta.contains("modality"))
      throw FormatError("entry metadata must carry category, dataset and modality");
    TaggedFeature e;
    e.category = meta["category"].get<std::string>();
    e.dataset = meta["dataset"].get<std::string>();
    e.modality = meta["modality"].get<std::string>();
    if (e.category.empty() || e.dataset.empty())
      throw FormatError("entries need non-empty category and dataset tags");
    if (e.modality != "image" && e.modality != "text")
      throw FormatError("modality must be image or text, got: " + e.modality);
    e.vec.resize(pack.dim);
    for (std::size_t i = 0; i < pack.dim; ++i) e.vec[i] = detail::get_f32le(p + i * 4);
    p += pack.dim * 4;
    detail::check_finite_payload(e.vec);
    pack.entries.push_back(std::move(e));
  }
  return pack;
}

inline FeaturePack decode_feature_pack(const std::vector<std::uint8_t>& bytes) {
  return decode_feature_pack(std::span<const std::uint8_t>(bytes));
}

// ---------------------------------------------------------------------------
// JSONL instruction corpus codec (one object per line, UTF-8)
// ---------------------------------------------------------------------------

inline json to_json(const Instruction& ins) {
  return json{{"question", ins.question},
              {"answer", ins.answer},
              {"kind", to_string(ins.kind)},
              {"scenario", to_string(ins.scenario)},
              {"dataset", ins.dataset}};
}

inline Instruction instruction_from_json(const json& j) {
  if (!j.is_object()) throw FormatError("instruction line must be a JSON object");
  for (const char* key : {"question", "answer", "kind", "scenario", "dataset"})
    if (!j.contains(key) || !j[key].is_string())
      throw FormatError(std::string("instruction needs string field: ") + key);
  Instruction ins;
  ins.question = j["question"].get<std::string>();
  ins.answer = j["answer"].get<std::string>();
  if (ins.question.empty() || ins.answer.empty())
    throw FormatError("question and answer must be non-empty");
  ins.kind = instruction_kind_from(j["kind"].get<std::string>());
  ins.scenario = scenario_from(j["scenario"].get<std::string>());
  ins.dataset = j["dataset"].get<std::string>();
  return ins;
}

inline std::string encode_instructions(const InstructionCorpus& corpus) {
  std::string out;
  for (const auto& ins : corpus.items) {
    if (ins.question.empty() || ins.answer.empty())
      throw FormatError("question and answer must be non-empty");
    out += to_json(ins).dump();
    out += '\n';
  }
  return out;
}

inline InstructionCorpus decode_instructions(std::string_view text) {
  InstructionCorpus corpus;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    start = end + 1;
    if (line.empty() || line == "\r") continue;
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded()) throw FormatError("line is not valid JSON");
    corpus.items.push_back(instruction_from_json(j));
  }
  return corpus;
}

// ---------------------------------------------------------------------------
// File helpers
// ---------------------------------------------------------------------------

inline std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return bytes;
}

// Write-temp-then-rename so readers never observe a half-written file.
inline void write_file_atomic(const std::filesystem::path& path,
                              std::span<const std::uint8_t> bytes) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw FormatError("cannot open " + tmp.string() + " for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) throw FormatError("short write to " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

inline void write_file_atomic(const std::filesystem::path& path, const std::string& text) {
  write_file_atomic(path, std::span<const std::uint8_t>(
                              reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

}  // namespace wavekit
