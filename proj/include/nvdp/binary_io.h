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

// Little-endian byte encoding shared by the file formats.

#ifndef NVDP_BINARY_IO_H_
#define NVDP_BINARY_IO_H_

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>
#include <string_view>
#include <vector>

#include "nvdp/errors.h"

namespace nvdp {

class ByteWriter {
 public:
  void Bytes(std::string_view s) { buffer_.insert(buffer_.end(), s.begin(), s.end()); }
  void U8(std::uint8_t v) { buffer_.push_back(static_cast<char>(v)); }
  void U32(std::uint32_t v) { Le(v); }
  void I64(std::int64_t v) { Le(static_cast<std::uint64_t>(v)); }
  void F64(double v) { Le(std::bit_cast<std::uint64_t>(v)); }
  void F32(float v) { Le(std::bit_cast<std::uint32_t>(v)); }

  const std::string& data() const { return buffer_; }
  std::string Take() { return std::move(buffer_); }
  void Clear() { buffer_.clear(); }

 private:
  template <typename U>
  void Le(U v) {
    for (std::size_t i = 0; i < sizeof(U); ++i) {
      buffer_.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
    }
  }

  std::string buffer_;
};

// Bounds-checked reader over an in-memory buffer. Truncation raises a
// FormatError carrying the byte offset.
class ByteReader {
 public:
  explicit ByteReader(std::string_view data, std::size_t base_offset = 0)
      : data_(data), base_(base_offset) {}

  std::size_t offset() const { return base_ + pos_; }
  std::size_t remaining() const { return data_.size() - pos_; }
  bool AtEnd() const { return pos_ == data_.size(); }

  std::string_view Bytes(std::size_t n) {
    Need(n);
    std::string_view out = data_.substr(pos_, n);
    pos_ += n;
    return out;
  }
  std::uint8_t U8() { return static_cast<std::uint8_t>(Bytes(1)[0]); }
  std::uint32_t U32() { return Le<std::uint32_t>(); }
  std::int64_t I64() { return static_cast<std::int64_t>(Le<std::uint64_t>()); }
  double F64() { return std::bit_cast<double>(Le<std::uint64_t>()); }
  float F32() { return std::bit_cast<float>(Le<std::uint32_t>()); }

 private:
  void Need(std::size_t n) const {
    if (remaining() < n) {
      throw FormatError("truncated payload at byte offset " + std::to_string(offset()) +
                        ": need " + std::to_string(n) + " bytes, have " +
                        std::to_string(remaining()));
    }
  }

  template <typename U>
  U Le() {
    std::string_view b = Bytes(sizeof(U));
    U v = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i) {
      v |= static_cast<U>(static_cast<unsigned char>(b[i])) << (8 * i);
    }
    return v;
  }

  std::string_view data_;
  std::size_t base_;
  std::size_t pos_ = 0;
};

// Checks a 6-byte magic of the form PREFIX + version digit.
inline void ExpectMagic(ByteReader& reader, std::string_view expected) {
  if (reader.remaining() < expected.size()) {
    throw FormatError("malformed header: file too short for magic \"" +
                      std::string(expected) + "\"");
  }
  const std::string_view got = reader.Bytes(expected.size());
  if (got == expected) return;
  const std::string_view prefix = expected.substr(0, expected.size() - 1);
  if (got.substr(0, prefix.size()) == prefix) {
    throw FormatError("version mismatch: expected \"" + std::string(expected) + "\", got \"" +
                      std::string(got) + "\"");
  }
  throw FormatError("malformed header: bad magic, expected \"" + std::string(expected) + "\"");
}

inline std::string ReadFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path);
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

inline void WriteFile(const std::string& path, std::string_view bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError("cannot write " + path);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw FormatError("write failed: " + path);
}

}  // namespace nvdp

#endif  // NVDP_BINARY_IO_H_
