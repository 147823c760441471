#include "rpd/image_io.hpp"

#include <png.h>

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>
#include <stdexcept>
#include <vector>

namespace rpd {
namespace {

struct RawImage {
  int width = 0;
  int height = 0;
  int bit_depth = 0;   // 8 or 16
  int channels = 0;    // 1 or 3
  std::vector<std::uint16_t> samples;  // interleaved, channel-major per pixel

  std::uint16_t at(int v, int u, int c = 0) const {
    return samples[(static_cast<std::size_t>(v) * width + u) * channels + c];
  }
};

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

bool has_pgm_magic(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  char magic[2] = {0, 0};
  in.read(magic, 2);
  return in && magic[0] == 'P' && magic[1] == '5';
}

RawImage read_pgm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("not found: " + path);
  std::string magic;
  in >> magic;
  if (magic != "P5") throw std::runtime_error("unsupported PGM magic in " + path);
  auto next_int = [&in, &path]() {
    // Skips whitespace and '#' comment lines.
    for (;;) {
      int c = in.peek();
      if (c == '#') {
        std::string dummy;
        std::getline(in, dummy);
      } else if (std::isspace(c)) {
        in.get();
      } else {
        break;
      }
    }
    long x = -1;
    in >> x;
    if (!in || x < 0) throw std::runtime_error("bad PGM header in " + path);
    return x;
  };
  RawImage img;
  img.width = static_cast<int>(next_int());
  img.height = static_cast<int>(next_int());
  long maxval = next_int();
  in.get();  // single whitespace before raster
  if (img.width <= 0 || img.height <= 0) throw std::runtime_error("zero-dimension image: " + path);
  img.bit_depth = maxval > 255 ? 16 : 8;
  img.channels = 1;
  std::size_t n = static_cast<std::size_t>(img.width) * img.height;
  img.samples.resize(n);
  if (img.bit_depth == 8) {
    std::vector<unsigned char> buf(n);
    in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(n));
    if (!in) throw std::runtime_error("truncated PGM raster in " + path);
    for (std::size_t i = 0; i < n; ++i) img.samples[i] = buf[i];
  } else {
    std::vector<unsigned char> buf(n * 2);
    in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(n * 2));
    if (!in) throw std::runtime_error("truncated PGM raster in " + path);
    for (std::size_t i = 0; i < n; ++i)
      img.samples[i] = static_cast<std::uint16_t>((buf[2 * i] << 8) | buf[2 * i + 1]);
  }
  return img;
}

void write_pgm(const RawImage& img, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write: " + path);
  out << "P5\n" << img.width << " " << img.height << "\n"
      << (img.bit_depth == 16 ? 65535 : 255) << "\n";
  std::size_t n = static_cast<std::size_t>(img.width) * img.height;
  if (img.bit_depth == 8) {
    std::vector<unsigned char> buf(n);
    for (std::size_t i = 0; i < n; ++i) buf[i] = static_cast<unsigned char>(img.samples[i]);
    out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(n));
  } else {
    std::vector<unsigned char> buf(n * 2);
    for (std::size_t i = 0; i < n; ++i) {
      buf[2 * i] = static_cast<unsigned char>(img.samples[i] >> 8);
      buf[2 * i + 1] = static_cast<unsigned char>(img.samples[i] & 0xff);
    }
    out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(n * 2));
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

RawImage read_png(const std::string& path) {
  FilePtr fp(std::fopen(path.c_str(), "rb"));
  if (!fp) throw std::runtime_error("not found: " + path);
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png_create_info_struct(png);
  if (!png || !info) throw std::runtime_error("libpng init failed");
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw std::runtime_error("failed to decode PNG: " + path);
  }
  png_init_io(png, fp.get());
  png_read_info(png, info);

  png_uint_32 w, h;
  int bit_depth, color_type;
  png_get_IHDR(png, info, &w, &h, &bit_depth, &color_type, nullptr, nullptr, nullptr);
  if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color_type == PNG_COLOR_TYPE_GRAY && bit_depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (color_type & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
  png_read_update_info(png, info);
  png_get_IHDR(png, info, &w, &h, &bit_depth, &color_type, nullptr, nullptr, nullptr);

  RawImage img;
  img.width = static_cast<int>(w);
  img.height = static_cast<int>(h);
  img.bit_depth = bit_depth;
  img.channels = png_get_channels(png, info);

  std::size_t row_bytes = png_get_rowbytes(png, info);
  std::vector<unsigned char> raster(row_bytes * h);
  std::vector<png_bytep> rows(h);
  for (png_uint_32 v = 0; v < h; ++v) rows[v] = raster.data() + v * row_bytes;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);

  std::size_t n = static_cast<std::size_t>(img.width) * img.height * img.channels;
  img.samples.resize(n);
  if (bit_depth == 8) {
    for (std::size_t i = 0; i < n; ++i) img.samples[i] = raster[i];
  } else if (bit_depth == 16) {
    // PNG samples are big-endian.
    for (std::size_t i = 0; i < n; ++i)
      img.samples[i] = static_cast<std::uint16_t>((raster[2 * i] << 8) | raster[2 * i + 1]);
  } else {
    throw std::runtime_error("unsupported bit depth in " + path);
  }
  return img;
}

void write_png(const RawImage& img, const std::string& path) {
  FilePtr fp(std::fopen(path.c_str(), "wb"));
  if (!fp) throw std::runtime_error("cannot write: " + path);
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png_create_info_struct(png);
  if (!png || !info) throw std::runtime_error("libpng init failed");
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw std::runtime_error("failed to encode PNG: " + path);
  }
  png_init_io(png, fp.get());
  int color_type = img.channels == 3 ? PNG_COLOR_TYPE_RGB : PNG_COLOR_TYPE_GRAY;
  png_set_IHDR(png, info, img.width, img.height, img.bit_depth, color_type,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);

  std::size_t row_samples = static_cast<std::size_t>(img.width) * img.channels;
  std::size_t bytes_per_sample = img.bit_depth / 8;
  std::vector<unsigned char> row(row_samples * bytes_per_sample);
  for (int v = 0; v < img.height; ++v) {
    const std::uint16_t* src = img.samples.data() + static_cast<std::size_t>(v) * row_samples;
    if (img.bit_depth == 8) {
      for (std::size_t i = 0; i < row_samples; ++i) row[i] = static_cast<unsigned char>(src[i]);
    } else {
      for (std::size_t i = 0; i < row_samples; ++i) {
        row[2 * i] = static_cast<unsigned char>(src[i] >> 8);
        row[2 * i + 1] = static_cast<unsigned char>(src[i] & 0xff);
      }
    }
    png_write_row(png, row.data());
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

RawImage read_any(const std::string& path) {
  if (has_pgm_magic(path)) return read_pgm(path);
  return read_png(path);
}

bool wants_pgm(const std::string& path) {
  return path.size() >= 4 && path.compare(path.size() - 4, 4, ".pgm") == 0;
}

}  // namespace

GrayImage load_gray_image(const std::string& path) {
  RawImage raw = read_any(path);
  if (raw.bit_depth != 8)
    throw std::runtime_error("unsupported bit depth for gray image: " + path);
  if (raw.width < 2 || raw.height < 2) throw std::runtime_error("image too small: " + path);
  GrayImage img(raw.height, raw.width);
  for (int v = 0; v < raw.height; ++v)
    for (int u = 0; u < raw.width; ++u) {
      if (raw.channels == 3) {
        img(v, u) = 0.299f * raw.at(v, u, 0) + 0.587f * raw.at(v, u, 1) + 0.114f * raw.at(v, u, 2);
      } else {
        img(v, u) = raw.at(v, u);
      }
    }
  return img;
}

void save_gray_image(const GrayImage& img, const std::string& path) {
  RawImage raw;
  raw.width = static_cast<int>(img.cols());
  raw.height = static_cast<int>(img.rows());
  raw.bit_depth = 8;
  raw.channels = 1;
  raw.samples.resize(static_cast<std::size_t>(raw.width) * raw.height);
  for (int v = 0; v < raw.height; ++v)
    for (int u = 0; u < raw.width; ++u) {
      float x = std::round(img(v, u));
      raw.samples[static_cast<std::size_t>(v) * raw.width + u] =
          static_cast<std::uint16_t>(std::clamp(x, 0.0f, 255.0f));
    }
  wants_pgm(path) ? write_pgm(raw, path) : write_png(raw, path);
}

DisparityMap load_disparity(const std::string& path) {
  RawImage raw = read_any(path);
  if (raw.bit_depth != 16 || raw.channels != 1)
    throw std::runtime_error("disparity file must be 16-bit single channel: " + path);
  DisparityMap map(raw.height, raw.width);
  for (int v = 0; v < raw.height; ++v)
    for (int u = 0; u < raw.width; ++u) {
      std::uint16_t s = raw.at(v, u);
      map(v, u) = s == 0 ? kInvalidDisparity : static_cast<float>(s) / 256.0f;
    }
  return map;
}

void save_disparity(const DisparityMap& map, const std::string& path) {
  RawImage raw;
  raw.width = static_cast<int>(map.cols());
  raw.height = static_cast<int>(map.rows());
  raw.bit_depth = 16;
  raw.channels = 1;
  raw.samples.resize(static_cast<std::size_t>(raw.width) * raw.height);
  for (int v = 0; v < raw.height; ++v)
    for (int u = 0; u < raw.width; ++u) {
      float d = map(v, u);
      std::uint16_t s = 0;
      if (is_valid(d)) {
        double scaled = std::round(static_cast<double>(d) * 256.0);
        if (scaled < 0 || scaled > 65535)
          throw std::runtime_error("disparity exceeds encoding range");
        s = static_cast<std::uint16_t>(scaled);
      }
      raw.samples[static_cast<std::size_t>(v) * raw.width + u] = s;
    }
  wants_pgm(path) ? write_pgm(raw, path) : write_png(raw, path);
}

LabelMap load_labels(const std::string& path) {
  RawImage raw = read_any(path);
  if (raw.channels != 1) throw std::runtime_error("label file must be single channel: " + path);
  LabelMap labels(raw.height, raw.width);
  for (int v = 0; v < raw.height; ++v)
    for (int u = 0; u < raw.width; ++u) labels(v, u) = raw.at(v, u);
  return labels;
}

void save_labels(const LabelMap& labels, const std::string& path) {
  RawImage raw;
  raw.width = static_cast<int>(labels.cols());
  raw.height = static_cast<int>(labels.rows());
  raw.bit_depth = 16;
  raw.channels = 1;
  raw.samples.resize(static_cast<std::size_t>(raw.width) * raw.height);
  for (int v = 0; v < raw.height; ++v)
    for (int u = 0; u < raw.width; ++u) {
      int k = labels(v, u);
      if (k < 0 || k > 65535) throw std::runtime_error("label exceeds encoding range");
      raw.samples[static_cast<std::size_t>(v) * raw.width + u] = static_cast<std::uint16_t>(k);
    }
  wants_pgm(path) ? write_pgm(raw, path) : write_png(raw, path);
}

Rgb8 overlay_palette(int label) {
  static const Rgb8 kPalette[12] = {
      {230, 25, 75},  {60, 180, 75},   {255, 225, 25}, {0, 130, 200},
      {245, 130, 48}, {145, 30, 180},  {70, 240, 240}, {240, 50, 230},
      {210, 245, 60}, {250, 190, 190}, {0, 128, 128},  {170, 110, 40}};
  return kPalette[(label - 1) % 12];
}

Rgb8 overlay_tint(float gray, int label) {
  Rgb8 c = overlay_palette(label);
  auto mix = [gray](unsigned char p) {
    float x = std::round((gray + p) * 0.5f);
    return static_cast<unsigned char>(std::clamp(x, 0.0f, 255.0f));
  };
  return {mix(c.r), mix(c.g), mix(c.b)};
}

void save_overlay(const GrayImage& img, const LabelMap& labels, const std::string& path) {
  if (img.rows() != labels.rows() || img.cols() != labels.cols())
    throw std::runtime_error("overlay: dimension mismatch");
  RawImage raw;
  raw.width = static_cast<int>(img.cols());
  raw.height = static_cast<int>(img.rows());
  raw.bit_depth = 8;
  raw.channels = 3;
  raw.samples.resize(static_cast<std::size_t>(raw.width) * raw.height * 3);
  for (int v = 0; v < raw.height; ++v)
    for (int u = 0; u < raw.width; ++u) {
      float g = std::clamp(std::round(img(v, u)), 0.0f, 255.0f);
      Rgb8 c{static_cast<unsigned char>(g), static_cast<unsigned char>(g),
             static_cast<unsigned char>(g)};
      if (labels(v, u) > 0) c = overlay_tint(img(v, u), labels(v, u));
      std::size_t i = (static_cast<std::size_t>(v) * raw.width + u) * 3;
      raw.samples[i] = c.r;
      raw.samples[i + 1] = c.g;
      raw.samples[i + 2] = c.b;
    }
  write_png(raw, path);
}

}  // namespace rpd
