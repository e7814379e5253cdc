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

#include "segsynth/png_io.hpp"

#include <png.h>

#include <csetjmp>
#include <cstdio>
#include <cstring>
#include <string>

#include "segsynth/error.hpp"
#include "segsynth/tensor_io.hpp"

namespace segsynth {

namespace {

// libpng reports errors by longjmp; every libpng call below sits inside a
// setjmp region whose frame only holds objects constructed before setjmp.
struct ErrorSink {
  char message[256] = {};
};

void on_png_error(png_structp png, png_const_charp message) {
  auto* sink = static_cast<ErrorSink*>(png_get_error_ptr(png));
  std::snprintf(sink->message, sizeof(sink->message), "%s", message);
  png_longjmp(png, 1);
}

void on_png_warning(png_structp, png_const_charp) {}

void write_to_vector(png_structp png, png_bytep data, png_size_t length) {
  auto* out = static_cast<std::vector<std::uint8_t>*>(png_get_io_ptr(png));
  out->insert(out->end(), data, data + length);
}

void flush_noop(png_structp) {}

struct ReadCursor {
  std::span<const std::uint8_t> bytes;
  std::size_t offset = 0;
};

void read_from_span(png_structp png, png_bytep data, png_size_t length) {
  auto* cursor = static_cast<ReadCursor*>(png_get_io_ptr(png));
  if (cursor->offset + length > cursor->bytes.size()) {
    png_error(png, "unexpected end of data");
  }
  std::memcpy(data, cursor->bytes.data() + cursor->offset, length);
  cursor->offset += length;
}

std::vector<std::uint8_t> encode_png(int width, int height, int color_type, const Palette* palette,
                                     const std::uint8_t* pixels, std::size_t bytes_per_row) {
  std::vector<std::uint8_t> out;
  ErrorSink sink;
  png_color plte[256];
  if (palette != nullptr) {
    for (int i = 0; i < 256; ++i) {
      plte[i] = png_color{(*palette)[i].r, (*palette)[i].g, (*palette)[i].b};
    }
  }
  png_structp png =
      png_create_write_struct(PNG_LIBPNG_VER_STRING, &sink, on_png_error, on_png_warning);
  if (png == nullptr) throw Error(ErrorCode::IoFailure, "png_create_write_struct failed");
  png_infop info = png_create_info_struct(png);
  if (info == nullptr) {
    png_destroy_write_struct(&png, nullptr);
    throw Error(ErrorCode::IoFailure, "png_create_info_struct failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw Error(ErrorCode::IoFailure, std::string("libpng: ") + sink.message);
  }
  png_set_write_fn(png, &out, write_to_vector, flush_noop);
  png_set_IHDR(png, info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height), 8,
               color_type, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  if (palette != nullptr) png_set_PLTE(png, info, plte, 256);
  png_write_info(png, info);
  for (int y = 0; y < height; ++y) {
    png_write_row(png, pixels + static_cast<std::size_t>(y) * bytes_per_row);
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  return out;
}

enum class DecodeMode { kIndices, kRgb };

// Returns the decoded pixels and writes the dimensions to width/height.
std::vector<std::uint8_t> decode_png(std::span<const std::uint8_t> bytes, DecodeMode mode,
                                     int& width, int& height) {
  if (bytes.size() < 8 || png_sig_cmp(bytes.data(), 0, 8) != 0) {
    throw Error(ErrorCode::IoFailure, "not a PNG stream");
  }
  std::vector<std::uint8_t> pixels;
  std::vector<png_bytep> rows;
  ReadCursor cursor{bytes, 0};
  ErrorSink sink;
  bool bad_layout = false;
  png_structp png =
      png_create_read_struct(PNG_LIBPNG_VER_STRING, &sink, on_png_error, on_png_warning);
  if (png == nullptr) throw Error(ErrorCode::IoFailure, "png_create_read_struct failed");
  png_infop info = png_create_info_struct(png);
  if (info == nullptr) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw Error(ErrorCode::IoFailure, "png_create_info_struct failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw Error(ErrorCode::IoFailure, std::string("libpng: ") + sink.message);
  }
  png_set_read_fn(png, &cursor, read_from_span);
  png_read_info(png, info);
  const int color = png_get_color_type(png, info);
  const int depth = png_get_bit_depth(png, info);
  int channels = 1;
  if (mode == DecodeMode::kIndices) {
    if ((color != PNG_COLOR_TYPE_PALETTE && color != PNG_COLOR_TYPE_GRAY) || depth == 16) {
      bad_layout = true;
    } else if (depth < 8) {
      png_set_packing(png);
    }
  } else {
    channels = 3;
    if (depth == 16) png_set_strip_16(png);
    if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
    if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
    if (color == PNG_COLOR_TYPE_GRAY || color == PNG_COLOR_TYPE_GRAY_ALPHA) {
      png_set_gray_to_rgb(png);
    }
    if ((color & PNG_COLOR_MASK_ALPHA) != 0 || png_get_valid(png, info, PNG_INFO_tRNS) != 0) {
      png_set_strip_alpha(png);
    }
  }
  if (!bad_layout) {
    png_read_update_info(png, info);
    width = static_cast<int>(png_get_image_width(png, info));
    height = static_cast<int>(png_get_image_height(png, info));
    const std::size_t rowbytes = png_get_rowbytes(png, info);
    if (rowbytes != static_cast<std::size_t>(width) * channels) {
      bad_layout = true;
    } else {
      pixels.resize(rowbytes * height);
      rows.resize(height);
      for (int y = 0; y < height; ++y) rows[y] = pixels.data() + rowbytes * y;
      png_read_image(png, rows.data());
      png_read_end(png, nullptr);
    }
  }
  png_destroy_read_struct(&png, &info, nullptr);
  if (bad_layout) {
    throw Error(ErrorCode::IoFailure, mode == DecodeMode::kIndices
                                          ? "mask PNG must be 8-bit palette-indexed or grayscale"
                                          : "unsupported PNG layout");
  }
  return pixels;
}

}  // namespace

std::vector<std::uint8_t> encode_mask_png(const SegMask& mask, const ClassCatalog& catalog) {
  if (mask.width <= 0 || mask.height <= 0 ||
      mask.labels.size() != static_cast<std::size_t>(mask.width) * mask.height) {
    throw Error(ErrorCode::ShapeMismatch, "mask dimensions do not match its label count");
  }
  for (auto v : mask.labels) {
    if (!is_valid_label(v)) {
      throw Error(ErrorCode::InvalidLabel, "label " + std::to_string(v) + " is not a VOC class");
    }
  }
  return encode_png(mask.width, mask.height, PNG_COLOR_TYPE_PALETTE, &catalog.palette,
                    mask.labels.data(), static_cast<std::size_t>(mask.width));
}

void write_mask_png(const std::filesystem::path& path, const SegMask& mask,
                    const ClassCatalog& catalog) {
  write_file_bytes(path, encode_mask_png(mask, catalog));
}

SegMask decode_mask_png(std::span<const std::uint8_t> bytes) {
  SegMask mask;
  mask.labels = decode_png(bytes, DecodeMode::kIndices, mask.width, mask.height);
  for (auto v : mask.labels) {
    if (!is_valid_label(v)) {
      throw Error(ErrorCode::InvalidLabel, "mask contains label " + std::to_string(v));
    }
  }
  return mask;
}

SegMask read_mask_png(const std::filesystem::path& path) {
  return decode_mask_png(read_file_bytes(path));
}

std::vector<std::uint8_t> encode_rgb_png(const RgbImage& image) {
  if (image.width <= 0 || image.height <= 0 ||
      image.pixels.size() != static_cast<std::size_t>(image.width) * image.height * 3) {
    throw Error(ErrorCode::ShapeMismatch, "image dimensions do not match its pixel count");
  }
  return encode_png(image.width, image.height, PNG_COLOR_TYPE_RGB, nullptr, image.pixels.data(),
                    static_cast<std::size_t>(image.width) * 3);
}

void write_rgb_png(const std::filesystem::path& path, const RgbImage& image) {
  write_file_bytes(path, encode_rgb_png(image));
}

RgbImage decode_rgb_png(std::span<const std::uint8_t> bytes) {
  RgbImage image;
  image.pixels = decode_png(bytes, DecodeMode::kRgb, image.width, image.height);
  return image;
}

RgbImage read_rgb_png(const std::filesystem::path& path) {
  return decode_rgb_png(read_file_bytes(path));
}

}  // namespace segsynth
