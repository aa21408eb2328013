// Copyright 2026 The ULK Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef ULK_NN_CHECKPOINT_H_
#define ULK_NN_CHECKPOINT_H_

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "ulk/nn/model.h"

namespace ulk {

// .ulkm layout, all integers little-endian:
//   "ULKM"                      4 bytes
//   version                     u16 (= 1)
//   descriptor length           u32, then that many bytes of UTF-8 text:
//                               "<spec> boundary=<n> frozen=<0|1> provenance=<p>"
//   layer count                 u32
//   per layer: tensor count     u32
//     per tensor: byte count    u64, then byte count / 8 IEEE-754 doubles
inline constexpr std::uint16_t kCheckpointVersion = 1;

std::vector<std::uint8_t> EncodeCheckpoint(const ModelArtifact& model);
// Throws BadMagicError, VersionError, TruncatedError or ByteCountError.
ModelArtifact DecodeCheckpoint(std::span<const std::uint8_t> bytes);

void SaveCheckpoint(const ModelArtifact& model, const std::filesystem::path& path);
ModelArtifact LoadCheckpoint(const std::filesystem::path& path);

std::vector<std::uint8_t> ReadFileBytes(const std::filesystem::path& path);
void WriteFileBytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

// Little-endian primitive codec shared by the binary formats.
class ByteWriter {
 public:
  void U16(std::uint16_t v);
  void U32(std::uint32_t v);
  void U64(std::uint64_t v);
  void F64(double v);
  void Bytes(std::span<const std::uint8_t> b);
  void Text(const std::string& s) {
    Bytes({reinterpret_cast<const std::uint8_t*>(s.data()), s.size()});
  }
  std::vector<std::uint8_t>& buffer() { return buf_; }

 private:
  std::vector<std::uint8_t> buf_;
};

class ByteReader {
 public:
  explicit ByteReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}
  std::uint16_t U16();
  std::uint32_t U32();
  std::uint64_t U64();
  double F64();
  std::span<const std::uint8_t> Take(std::size_t n);
  std::size_t remaining() const { return bytes_.size() - pos_; }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

}  // namespace ulk

#endif  // ULK_NN_CHECKPOINT_H_
