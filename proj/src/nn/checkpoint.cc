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

#include "ulk/nn/checkpoint.h"

#include <cstring>
#include <fstream>
#include <sstream>

#include "ulk/common/error.h"

namespace ulk {

void ByteWriter::U16(std::uint16_t v) {
  for (int i = 0; i < 2; ++i) buf_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}
void ByteWriter::U32(std::uint32_t v) {
  for (int i = 0; i < 4; ++i) buf_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}
void ByteWriter::U64(std::uint64_t v) {
  for (int i = 0; i < 8; ++i) buf_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}
void ByteWriter::F64(double v) {
  std::uint64_t bits = 0;
  std::memcpy(&bits, &v, sizeof bits);
  U64(bits);
}
void ByteWriter::Bytes(std::span<const std::uint8_t> b) { buf_.insert(buf_.end(), b.begin(), b.end()); }

std::span<const std::uint8_t> ByteReader::Take(std::size_t n) {
  if (remaining() < n) {
    throw TruncatedError("unexpected end of data: need " + std::to_string(n) + " bytes at offset " +
                         std::to_string(pos_) + ", have " + std::to_string(remaining()));
  }
  auto out = bytes_.subspan(pos_, n);
  pos_ += n;
  return out;
}
std::uint16_t ByteReader::U16() {
  auto b = Take(2);
  return static_cast<std::uint16_t>(b[0] | (b[1] << 8));
}
std::uint32_t ByteReader::U32() {
  auto b = Take(4);
  std::uint32_t v = 0;
  for (int i = 3; i >= 0; --i) v = (v << 8) | b[static_cast<std::size_t>(i)];
  return v;
}
std::uint64_t ByteReader::U64() {
  auto b = Take(8);
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | b[static_cast<std::size_t>(i)];
  return v;
}
double ByteReader::F64() {
  std::uint64_t bits = U64();
  double v = 0.0;
  std::memcpy(&v, &bits, sizeof v);
  return v;
}

std::vector<std::uint8_t> EncodeCheckpoint(const ModelArtifact& model) {
  ByteWriter w;
  w.Text("ULKM");
  w.U16(kCheckpointVersion);
  std::string desc = model.spec().Describe() + " boundary=" +
                     std::to_string(model.feature_boundary()) +
                     " frozen=" + (model.features_frozen() ? "1" : "0") +
                     " provenance=" + model.provenance().Describe();
  w.U32(static_cast<std::uint32_t>(desc.size()));
  w.Text(desc);
  w.U32(static_cast<std::uint32_t>(model.params().size()));
  for (const auto& layer : model.params()) {
    w.U32(static_cast<std::uint32_t>(layer.size()));
    for (const auto& t : layer) {
      w.U64(static_cast<std::uint64_t>(t.size()) * 8);
      for (double v : t.values()) w.F64(v);
    }
  }
  return std::move(w.buffer());
}

ModelArtifact DecodeCheckpoint(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  auto magic = r.Take(4);
  if (std::memcmp(magic.data(), "ULKM", 4) != 0) throw BadMagicError("not a .ulkm checkpoint (bad magic)");
  std::uint16_t version = r.U16();
  if (version != kCheckpointVersion) {
    throw VersionError("unsupported checkpoint version " + std::to_string(version));
  }
  std::uint32_t desc_len = r.U32();
  auto desc_bytes = r.Take(desc_len);
  std::string desc(desc_bytes.begin(), desc_bytes.end());

  std::string spec_text;
  bool frozen = false;
  Provenance provenance;
  std::size_t boundary = 0;
  {
    std::stringstream in(desc);
    std::string token;
    while (in >> token) {
      if (token.rfind("boundary=", 0) == 0) {
        boundary = std::stoull(token.substr(9));
      } else if (token.rfind("frozen=", 0) == 0) {
        frozen = token.substr(7) == "1";
      } else if (token.rfind("provenance=", 0) == 0) {
        provenance = Provenance::Parse(token.substr(11));
      } else {
        spec_text += token + " ";
      }
    }
  }
  ModelSpec spec = ParseModelSpec(spec_text);
  auto layers = Layout(spec);
  if (boundary != layers.size() - 1) throw FormatError("checkpoint feature boundary disagrees with spec");

  std::uint32_t layer_count = r.U32();
  if (layer_count != layers.size()) {
    throw ByteCountError("checkpoint declares " + std::to_string(layer_count) + " layers, spec has " +
                         std::to_string(layers.size()));
  }
  ParamSet params(layers.size());
  for (std::size_t i = 0; i < layers.size(); ++i) {
    std::uint32_t tensors = r.U32();
    if (tensors != layers[i].param_shapes.size()) {
      throw ByteCountError(layers[i].Name(i) + ": declares " + std::to_string(tensors) + " tensors");
    }
    for (std::size_t j = 0; j < tensors; ++j) {
      const Shape& shape = layers[i].param_shapes[j];
      std::uint64_t byte_count = r.U64();
      if (byte_count != NumElements(shape) * 8) {
        throw ByteCountError(layers[i].Name(i) + ": tensor " + std::to_string(j) + " declares " +
                             std::to_string(byte_count) + " bytes, shape " + ShapeString(shape) +
                             " needs " + std::to_string(NumElements(shape) * 8));
      }
      std::vector<double> data(NumElements(shape));
      if (r.remaining() < byte_count) {
        throw TruncatedError(layers[i].Name(i) + ": payload truncated");
      }
      for (double& v : data) v = r.F64();
      params[i].emplace_back(shape, std::move(data));
    }
  }
  if (r.remaining() != 0) throw ByteCountError("trailing bytes after checkpoint payload");
  return ModelArtifact(std::move(spec), std::move(params), std::move(provenance), frozen);
}

std::vector<std::uint8_t> ReadFileBytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in), {});
}

void WriteFileBytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

void SaveCheckpoint(const ModelArtifact& model, const std::filesystem::path& path) {
  WriteFileBytes(path, EncodeCheckpoint(model));
}

ModelArtifact LoadCheckpoint(const std::filesystem::path& path) {
  return DecodeCheckpoint(ReadFileBytes(path));
}

}  // namespace ulk
