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

#include "segsynth/random.hpp"
#include "test_util.hpp"

namespace segsynth {
namespace {

using testing::TempDir;

std::vector<std::uint8_t> header_2x3() {
  return {0x41, 0x54, 0x53, 0x42, 0x01, 0x00, 0x00, 0x02,
          0x02, 0x00, 0x00, 0x00, 0x03, 0x00, 0x00, 0x00};
}

TEST(TensorIoTest, DecodesHandWrittenHeader) {
  auto bytes = header_2x3();
  for (int i = 0; i < 6; ++i) {
    const float v = static_cast<float>(i) * 0.5f;
    std::uint8_t raw[4];
    std::memcpy(raw, &v, 4);
    bytes.insert(bytes.end(), raw, raw + 4);
  }
  ASSERT_EQ(bytes.size(), 16u + 24u);
  const Tensor t = decode_tensor(bytes);
  EXPECT_EQ(t.shape, (std::vector<std::uint32_t>{2, 3}));
  EXPECT_EQ(t.values, (std::vector<float>{0.0f, 0.5f, 1.0f, 1.5f, 2.0f, 2.5f}));
}

TEST(TensorIoTest, EncoderMatchesHandWrittenHeader) {
  const std::vector<std::uint32_t> shape = {2, 3};
  const std::vector<float> values(6, 1.0f);
  const auto bytes = encode_tensor(shape, values);
  const auto expected = header_2x3();
  ASSERT_EQ(bytes.size(), 40u);
  EXPECT_TRUE(std::equal(expected.begin(), expected.end(), bytes.begin()));
}

TEST(TensorIoTest, FileSizes) {
  TempDir dir;
  const std::vector<std::uint32_t> one = {1};
  const std::vector<float> zero = {0.0f};
  write_tensor(dir / "a.atsb", one, zero);
  EXPECT_EQ(std::filesystem::file_size(dir / "a.atsb"), 16u);

  const std::vector<std::uint32_t> two_by_two = {2, 2};
  const std::vector<float> four = {1, 2, 3, 4};
  write_tensor(dir / "b.atsb", two_by_two, four);
  EXPECT_EQ(std::filesystem::file_size(dir / "b.atsb"), 16u + 16u);
  EXPECT_EQ(read_tensor(dir / "b.atsb").values, four);
}

TEST(TensorIoTest, ShapeMismatchOnWrite) {
  TempDir dir;
  const std::vector<std::uint32_t> shape = {2, 2};
  const std::vector<float> three = {1, 2, 3};
  EXPECT_SEG_ERROR(write_tensor(dir / "c.atsb", shape, three), ErrorCode::ShapeMismatch);
  const std::vector<std::uint32_t> five_dims = {1, 1, 1, 1, 1};
  const std::vector<float> one = {1};
  EXPECT_SEG_ERROR(encode_tensor(five_dims, one), ErrorCode::ShapeMismatch);
}

TEST(TensorIoTest, RejectsBadHeaders) {
  auto bytes = encode_tensor(std::vector<std::uint32_t>{2}, std::vector<float>{1, 2});

  auto npyx = bytes;
  std::memcpy(npyx.data(), "NPYX", 4);
  EXPECT_SEG_ERROR(decode_tensor(npyx), ErrorCode::BadMagic);

  auto version = bytes;
  version[4] = 2;
  EXPECT_SEG_ERROR(decode_tensor(version), ErrorCode::UnsupportedVersion);

  auto dtype = bytes;
  dtype[6] = 1;
  EXPECT_SEG_ERROR(decode_tensor(dtype), ErrorCode::UnsupportedDtype);

  auto truncated = bytes;
  truncated.pop_back();
  EXPECT_SEG_ERROR(decode_tensor(truncated), ErrorCode::TruncatedPayload);

  auto trailing = bytes;
  trailing.push_back(0);
  EXPECT_SEG_ERROR(decode_tensor(trailing), ErrorCode::TruncatedPayload);

  auto ndim = bytes;
  ndim[7] = 0;
  EXPECT_SEG_ERROR(decode_tensor(ndim), ErrorCode::SchemaViolation);

  EXPECT_SEG_ERROR(decode_tensor(std::vector<std::uint8_t>{'A', 'T', 'S', 'B', 1}),
                   ErrorCode::TruncatedPayload);
}

TEST(TensorIoTest, MissingFileIsIoFailure) {
  TempDir dir;
  EXPECT_SEG_ERROR(read_tensor(dir / "nope.atsb"), ErrorCode::IoFailure);
}

// Any finite float32 payload survives a file round trip bit for bit.
TEST(TensorIoTest, RoundTripIsBitwiseLossless) {
  TempDir dir;
  SplitMix64 rng(2024);
  for (int trial = 0; trial < 200; ++trial) {
    const int ndim = 1 + static_cast<int>(rng.below(4));
    std::vector<std::uint32_t> shape(ndim);
    for (auto& d : shape) d = 1 + static_cast<std::uint32_t>(rng.below(5));
    std::size_t n = 1;
    for (auto d : shape) n *= d;
    std::vector<float> values(n);
    for (auto& v : values) {
      std::uint32_t bits;
      do {
        bits = static_cast<std::uint32_t>(rng.next());
        v = std::bit_cast<float>(bits);
      } while (!std::isfinite(v));
    }
    const auto path = dir / "t.atsb";
    write_tensor(path, shape, values);
    const Tensor back = read_tensor(path);
    ASSERT_EQ(back.shape, shape);
    ASSERT_EQ(std::memcmp(back.values.data(), values.data(), n * sizeof(float)), 0);
  }
}

}  // namespace
}  // namespace segsynth
