// Copyright 2026 The segsynth Authors.
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

#include "segsynth/tensor_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "segsynth/error.hpp"

namespace segsynth {

static_assert(std::endian::native == std::endian::little,
              "ATSB encoding assumes a little-endian host");

namespace {

constexpr char kMagic[4] = {'A', 'T', 'S', 'B'};
constexpr std::size_t kFixedHeader = 8;

std::size_t shape_product(std::span<const std::uint32_t> shape) {
  std::size_t n = 1;
  for (auto d : shape) n *= d;
  return n;
}

template <typename T>
void put(std::vector<std::uint8_t>& out, T value) {
  std::uint8_t buf[sizeof(T)];
  std::memcpy(buf, &value, sizeof(T));
  out.insert(out.end(), buf, buf + sizeof(T));
}

template <typename T>
T get(std::span<const std::uint8_t> bytes, std::size_t offset) {
  T value;
  std::memcpy(&value, bytes.data() + offset, sizeof(T));
  return value;
}

}  // namespace

std::size_t Tensor::element_count() const { return shape_product(shape); }

std::vector<std::uint8_t> encode_tensor(std::span<const std::uint32_t> shape,
                                        std::span<const float> values) {
  if (shape.empty() || shape.size() > 4) {
    throw Error(ErrorCode::ShapeMismatch, "ndim must be in [1, 4], got " +
                                              std::to_string(shape.size()));
  }
  if (shape_product(shape) != values.size()) {
    throw Error(ErrorCode::ShapeMismatch,
                "shape holds " + std::to_string(shape_product(shape)) + " values, got " +
                    std::to_string(values.size()));
  }
  std::vector<std::uint8_t> out;
  out.reserve(kFixedHeader + 4 * shape.size() + 4 * values.size());
  out.insert(out.end(), kMagic, kMagic + 4);
  put<std::uint16_t>(out, kAtsbVersion);
  put<std::uint8_t>(out, kAtsbDtypeF32);
  put<std::uint8_t>(out, static_cast<std::uint8_t>(shape.size()));
  for (auto d : shape) put<std::uint32_t>(out, d);
  const auto* raw = reinterpret_cast<const std::uint8_t*>(values.data());
  out.insert(out.end(), raw, raw + values.size() * sizeof(float));
  return out;
}

Tensor decode_tensor(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kMagic, 4) != 0) {
    throw Error(ErrorCode::BadMagic, "missing ATSB magic");
  }
  if (bytes.size() < kFixedHeader) {
    throw Error(ErrorCode::TruncatedPayload, "header shorter than 8 bytes");
  }
  const auto version = get<std::uint16_t>(bytes, 4);
  if (version != kAtsbVersion) {
    throw Error(ErrorCode::UnsupportedVersion, "version " + std::to_string(version));
  }
  const auto dtype = get<std::uint8_t>(bytes, 6);
  if (dtype != kAtsbDtypeF32) {
    throw Error(ErrorCode::UnsupportedDtype, "dtype code " + std::to_string(dtype));
  }
  const auto ndim = get<std::uint8_t>(bytes, 7);
  if (ndim < 1 || ndim > 4) {
    throw Error(ErrorCode::SchemaViolation, "ndim " + std::to_string(ndim) + " outside [1, 4]");
  }
  const std::size_t header = kFixedHeader + 4u * ndim;
  if (bytes.size() < header) {
    throw Error(ErrorCode::TruncatedPayload, "shape block truncated");
  }
  Tensor t;
  t.shape.resize(ndim);
  for (std::size_t i = 0; i < ndim; ++i) {
    t.shape[i] = get<std::uint32_t>(bytes, kFixedHeader + 4 * i);
  }
  const std::size_t n = t.element_count();
  if (bytes.size() - header != n * sizeof(float)) {
    throw Error(ErrorCode::TruncatedPayload,
                "payload has " + std::to_string(bytes.size() - header) + " bytes, expected " +
                    std::to_string(n * sizeof(float)));
  }
  t.values.resize(n);
  std::memcpy(t.values.data(), bytes.data() + header, n * sizeof(float));
  return t;
}

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoFailure, "cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::IoFailure, "short write to " + path.string());
}

Tensor read_tensor(const std::filesystem::path& path) {
  const auto bytes = read_file_bytes(path);
  return decode_tensor(bytes);
}

void write_tensor(const std::filesystem::path& path, std::span<const std::uint32_t> shape,
                  std::span<const float> values) {
  const auto bytes = encode_tensor(shape, values);
  write_file_bytes(path, bytes);
}

}  // namespace segsynth
