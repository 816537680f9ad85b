//
// Copyright 2026 The NVDP Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

// File formats for embedding sequences (".emb"), released samples (".nvs")
// and posterior archives, plus the synthetic dataset generator.
//
// ".emb": "NVDPE1", u32 d, u32 count, then per record: u32 id length, id
// (UTF-8), u8 label tag (0 = int64, 1 = float64), 8-byte label, u32 n, n * d
// float32 values. ".nvs": "NVDPS1", u32 d, u32 count, then per record: u32 id
// length, id, u32 m, m float64 weights, m * d float32 vectors. All integers
// and floats are little-endian.

#ifndef NVDP_EMBEDDING_IO_H_
#define NVDP_EMBEDDING_IO_H_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "nvdp/binary_io.h"
#include "nvdp/errors.h"
#include "nvdp/model.h"
#include "nvdp/posterior.h"
#include "nvdp/samplers.h"
#include "nvdp/types.h"

namespace nvdp {

inline constexpr std::string_view kEmbeddingMagic = "NVDPE1";
inline constexpr std::string_view kSanitizedMagic = "NVDPS1";

using Label = std::variant<std::int64_t, double>;

struct EmbeddingRecord {
  std::string id;
  Label label = std::int64_t{0};
  Matrix x;  // n x d

  bool operator==(const EmbeddingRecord& other) const {
    return id == other.id && label == other.label && x.rows() == other.x.rows() &&
           x.cols() == other.x.cols() && x == other.x;
  }
};

struct SanitizedRecord {
  std::string id;
  WeightedVectorSample sample;
};

inline double LabelValue(const Label& label) {
  return std::holds_alternative<std::int64_t>(label)
             ? static_cast<double>(std::get<std::int64_t>(label))
             : std::get<double>(label);
}

namespace internal {

inline constexpr std::uint32_t kMaxIdBytes = 1u << 16;

// Sequential reader over a record file; every read is bounds-checked against
// the file size so truncation is reported with its byte offset.
class RecordFileReader {
 public:
  RecordFileReader(const std::string& path, std::string_view magic) : in_(path, std::ios::binary) {
    if (!in_) throw FormatError("cannot open " + path);
    in_.seekg(0, std::ios::end);
    size_ = static_cast<std::size_t>(in_.tellg());
    in_.seekg(0);
    ByteReader header = Chunk(std::min<std::size_t>(size_, magic.size()));
    ExpectMagic(header, magic);
    ByteReader dims = Chunk(8);
    d_ = dims.U32();
    count_ = dims.U32();
    if (d_ == 0) throw FormatError("header declares d = 0");
  }

  std::uint32_t d() const { return d_; }
  std::uint32_t count() const { return count_; }
  std::size_t offset() const { return offset_; }

  // The returned reader views an internal buffer valid until the next call.
  ByteReader Chunk(std::size_t n) {
    if (size_ - offset_ < n) {
      throw FormatError("truncated file at byte offset " + std::to_string(offset_) + ": need " +
                        std::to_string(n) + " bytes, have " + std::to_string(size_ - offset_));
    }
    buffer_.resize(n);
    in_.read(buffer_.data(), static_cast<std::streamsize>(n));
    if (!in_) throw FormatError("read failed at byte offset " + std::to_string(offset_));
    ByteReader out(buffer_, offset_);
    offset_ += n;
    return out;
  }

  std::string ReadId() {
    const std::uint32_t len = Chunk(4).U32();
    if (len > kMaxIdBytes) {
      throw FormatError("record id length " + std::to_string(len) + " at byte offset " +
                        std::to_string(offset_ - 4) + " is implausible");
    }
    return std::string(Chunk(len).Bytes(len));
  }

  void ExpectEnd() const {
    if (offset_ != size_) {
      throw FormatError(std::to_string(size_ - offset_) + " trailing bytes at byte offset " +
                        std::to_string(offset_));
    }
  }

 private:
  std::ifstream in_;
  std::size_t size_ = 0;
  std::size_t offset_ = 0;
  std::uint32_t d_ = 0;
  std::uint32_t count_ = 0;
  std::string buffer_;
};

// Writes the header with a placeholder count that Close() patches.
class RecordFileWriter {
 public:
  RecordFileWriter(const std::string& path, std::string_view magic, int d)
      : path_(path), out_(path, std::ios::binary | std::ios::trunc) {
    if (!out_) throw FormatError("cannot write " + path);
    if (d < 1) throw ArgumentError("record file dimension must be positive");
    ByteWriter w;
    w.Bytes(magic);
    w.U32(static_cast<std::uint32_t>(d));
    w.U32(0);
    Append(w.data());
  }
  ~RecordFileWriter() {
    if (!closed_) {
      try {
        Close();
      } catch (...) {
      }
    }
  }

  void Append(std::string_view bytes) {
    out_.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out_) throw FormatError("write failed: " + path_);
  }
  void CountRecord() { ++count_; }

  void Close() {
    if (closed_) return;
    closed_ = true;
    ByteWriter w;
    w.U32(count_);
    out_.seekp(10);
    Append(w.data());
    out_.close();
    if (!out_) throw FormatError("write failed: " + path_);
  }

 private:
  std::string path_;
  std::ofstream out_;
  std::uint32_t count_ = 0;
  bool closed_ = false;
};

inline void PutId(ByteWriter& w, const std::string& id) {
  if (id.size() > kMaxIdBytes) throw ArgumentError("record id is longer than 65536 bytes");
  w.U32(static_cast<std::uint32_t>(id.size()));
  w.Bytes(id);
}

}  // namespace internal

class EmbeddingWriter {
 public:
  EmbeddingWriter(const std::string& path, int d) : d_(d), file_(path, kEmbeddingMagic, d) {}

  void Write(const EmbeddingRecord& r) {
    if (r.x.cols() != d_) {
      throw FormatError("record \"" + r.id + "\" has d = " + std::to_string(r.x.cols()) +
                        " but the file has d = " + std::to_string(d_));
    }
    if (r.x.rows() < 1) throw ArgumentError("record \"" + r.id + "\" is empty");
    if (!r.x.allFinite()) throw ArgumentError("record \"" + r.id + "\" has non-finite values");
    ByteWriter w;
    internal::PutId(w, r.id);
    if (std::holds_alternative<std::int64_t>(r.label)) {
      w.U8(0);
      w.I64(std::get<std::int64_t>(r.label));
    } else {
      w.U8(1);
      w.F64(std::get<double>(r.label));
    }
    w.U32(static_cast<std::uint32_t>(r.x.rows()));
    for (Eigen::Index k = 0; k < r.x.size(); ++k) w.F32(static_cast<float>(r.x.data()[k]));
    file_.Append(w.data());
    file_.CountRecord();
  }

  void Close() { file_.Close(); }

 private:
  int d_;
  internal::RecordFileWriter file_;
};

class EmbeddingReader {
 public:
  explicit EmbeddingReader(const std::string& path) : file_(path, kEmbeddingMagic) {}

  int d() const { return static_cast<int>(file_.d()); }
  std::uint32_t count() const { return file_.count(); }

  // Next record in file order, or nullopt after the last one.
  std::optional<EmbeddingRecord> Next() {
    if (read_ == file_.count()) {
      file_.ExpectEnd();
      return std::nullopt;
    }
    EmbeddingRecord r;
    r.id = file_.ReadId();
    ByteReader label = file_.Chunk(9);
    const std::uint8_t tag = label.U8();
    if (tag == 0) {
      r.label = label.I64();
    } else if (tag == 1) {
      r.label = label.F64();
    } else {
      throw FormatError("record \"" + r.id + "\": unknown label tag " + std::to_string(tag) +
                        " at byte offset " + std::to_string(file_.offset() - 9));
    }
    const std::uint32_t n = file_.Chunk(4).U32();
    if (n == 0) {
      throw FormatError("record \"" + r.id + "\" has no vectors (byte offset " +
                        std::to_string(file_.offset() - 4) + ")");
    }
    const std::size_t values = static_cast<std::size_t>(n) * file_.d();
    ByteReader payload = file_.Chunk(values * 4);
    r.x.resize(n, file_.d());
    for (std::size_t k = 0; k < values; ++k) r.x.data()[k] = payload.F32();
    if (!r.x.allFinite()) throw FormatError("record \"" + r.id + "\" has non-finite values");
    ++read_;
    return r;
  }

 private:
  internal::RecordFileReader file_;
  std::uint32_t read_ = 0;
};

inline void WriteEmbeddings(const std::string& path, int d, std::span<const EmbeddingRecord> records) {
  EmbeddingWriter w(path, d);
  for (const EmbeddingRecord& r : records) w.Write(r);
  w.Close();
}

inline std::vector<EmbeddingRecord> ReadEmbeddings(const std::string& path) {
  EmbeddingReader reader(path);
  std::vector<EmbeddingRecord> out;
  while (auto r = reader.Next()) out.push_back(std::move(*r));
  return out;
}

class SanitizedWriter {
 public:
  SanitizedWriter(const std::string& path, int d) : d_(d), file_(path, kSanitizedMagic, d) {}

  void Write(const SanitizedRecord& r) {
    const WeightedVectorSample& s = r.sample;
    if (s.d() != d_ || s.z.rows() != s.m()) {
      throw FormatError("sample \"" + r.id + "\" does not match the file dimension " +
                        std::to_string(d_));
    }
    ByteWriter w;
    internal::PutId(w, r.id);
    w.U32(static_cast<std::uint32_t>(s.m()));
    for (int k = 0; k < s.m(); ++k) w.F64(s.pi[k]);
    for (Eigen::Index k = 0; k < s.z.size(); ++k) w.F32(static_cast<float>(s.z.data()[k]));
    file_.Append(w.data());
    file_.CountRecord();
  }

  void Close() { file_.Close(); }

 private:
  int d_;
  internal::RecordFileWriter file_;
};

class SanitizedReader {
 public:
  explicit SanitizedReader(const std::string& path) : file_(path, kSanitizedMagic) {}

  int d() const { return static_cast<int>(file_.d()); }
  std::uint32_t count() const { return file_.count(); }

  std::optional<SanitizedRecord> Next() {
    if (read_ == file_.count()) {
      file_.ExpectEnd();
      return std::nullopt;
    }
    SanitizedRecord r;
    r.id = file_.ReadId();
    const std::uint32_t m = file_.Chunk(4).U32();
    if (m == 0) throw FormatError("sample \"" + r.id + "\" has no components");
    WeightedVectorSample& s = r.sample;
    ByteReader weights = file_.Chunk(static_cast<std::size_t>(m) * 8);
    s.pi.resize(m);
    s.log_pi.resize(m);
    for (std::uint32_t k = 0; k < m; ++k) {
      s.pi[k] = weights.F64();
      if (!(s.pi[k] >= 0.0 && s.pi[k] <= 1.0)) {
        throw FormatError("sample \"" + r.id + "\" has weight " + std::to_string(s.pi[k]) +
                          " outside [0, 1]");
      }
      s.log_pi[k] = std::log(s.pi[k]);
    }
    const std::size_t values = static_cast<std::size_t>(m) * file_.d();
    ByteReader payload = file_.Chunk(values * 4);
    s.z.resize(m, file_.d());
    for (std::size_t k = 0; k < values; ++k) s.z.data()[k] = payload.F32();
    ++read_;
    return r;
  }

 private:
  internal::RecordFileReader file_;
  std::uint32_t read_ = 0;
};

inline std::vector<SanitizedRecord> ReadSanitized(const std::string& path) {
  SanitizedReader reader(path);
  std::vector<SanitizedRecord> out;
  while (auto r = reader.Next()) out.push_back(std::move(*r));
  return out;
}

// Posterior archive: a directory of NNNNNN.dpq files and a manifest.txt
// listing "file<TAB>id" per line in record order.
struct ArchivedPosterior {
  std::string id;
  DPPosterior q;
};

inline void WritePosteriorArchive(const std::string& dir, std::span<const ArchivedPosterior> items) {
  std::filesystem::create_directories(dir);
  std::ostringstream manifest;
  for (std::size_t i = 0; i < items.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof(name), "%06zu.dpq", i);
    WriteFile((std::filesystem::path(dir) / name).string(), SerializePosterior(items[i].q));
    if (items[i].id.find_first_of("\t\n") != std::string::npos) {
      throw ArgumentError("posterior id \"" + items[i].id + "\" contains a tab or newline");
    }
    manifest << name << '\t' << items[i].id << '\n';
  }
  WriteFile((std::filesystem::path(dir) / "manifest.txt").string(), manifest.str());
}

inline std::vector<ArchivedPosterior> ReadPosteriorArchive(const std::string& dir) {
  const std::string manifest_path = (std::filesystem::path(dir) / "manifest.txt").string();
  std::istringstream manifest(ReadFile(manifest_path));
  std::vector<ArchivedPosterior> out;
  std::string line;
  int line_no = 0;
  while (std::getline(manifest, line)) {
    ++line_no;
    if (line.empty()) continue;
    const std::size_t tab = line.find('\t');
    if (tab == std::string::npos) {
      throw FormatError(manifest_path + ":" + std::to_string(line_no) + ": expected file<TAB>id");
    }
    const std::string file = line.substr(0, tab);
    try {
      out.push_back({line.substr(tab + 1),
                     DeserializePosterior(ReadFile((std::filesystem::path(dir) / file).string()))});
    } catch (const FormatError& e) {
      throw FormatError(file + ": " + e.what());
    }
  }
  return out;
}

struct SyntheticConfig {
  int n_examples = 200;
  int d = 8;
  int n_min = 2;
  int n_max = 12;
  int n_classes = 2;
  double class_separation = 6.0;
  std::uint64_t seed = 0;
};

// Class k has mean (sep / sqrt 2) * (+-e_{k mod d}), so distinct class means
// are sep apart; tokens add unit Gaussian noise. Labels are balanced and
// shuffled.
inline std::vector<EmbeddingRecord> GenerateSynthetic(const SyntheticConfig& c) {
  if (c.n_examples < 0 || c.d < 1 || c.n_min < 1 || c.n_max < c.n_min || c.n_classes < 1 ||
      c.n_classes > 2 * c.d || !(c.class_separation >= 0.0) || !std::isfinite(c.class_separation)) {
    throw ArgumentError("invalid synthetic dataset configuration");
  }
  Rng rng({c.seed, 0});
  std::vector<std::int64_t> labels(c.n_examples);
  for (int i = 0; i < c.n_examples; ++i) labels[i] = i % c.n_classes;
  for (int i = c.n_examples - 1; i > 0; --i) {
    std::swap(labels[i], labels[rng.NextU64() % static_cast<std::uint64_t>(i + 1)]);
  }
  const double scale = c.class_separation / std::sqrt(2.0);
  std::vector<EmbeddingRecord> out;
  out.reserve(c.n_examples);
  for (int i = 0; i < c.n_examples; ++i) {
    const int span = c.n_max - c.n_min + 1;
    const int n = c.n_min + static_cast<int>(rng.NextU64() % static_cast<std::uint64_t>(span));
    const std::int64_t k = labels[i];
    RowVector mean = RowVector::Zero(c.d);
    mean[k % c.d] = k < c.d ? scale : -scale;
    EmbeddingRecord r;
    char id[32];
    std::snprintf(id, sizeof(id), "ex%06d", i);
    r.id = id;
    r.label = k;
    r.x.resize(n, c.d);
    for (int t = 0; t < n; ++t) {
      for (int j = 0; j < c.d; ++j) {
        // Rounded through float32 so the in-memory dataset equals its file form.
        r.x(t, j) = static_cast<float>(mean[j] + rng.Normal());
      }
    }
    out.push_back(std::move(r));
  }
  return out;
}

inline std::vector<Example> ToExamples(std::span<const EmbeddingRecord> records) {
  std::vector<Example> out;
  out.reserve(records.size());
  for (const EmbeddingRecord& r : records) out.push_back({r.x, LabelValue(r.label)});
  return out;
}

}  // namespace nvdp

#endif  // NVDP_EMBEDDING_IO_H_
