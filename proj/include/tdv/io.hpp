// File I/O: PNG (8/16-bit, via libpng), binary PGM/PPM, CSV heightmaps with
// a rows,cols header, and big-endian SRTM .hgt tiles.

#ifndef TDV_IO_HPP
#define TDV_IO_HPP

#include <png.h>

#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>
#include <sstream>

#include "tdv/fields.hpp"

namespace tdv {

struct Image {
  std::vector<ScalarField> channels;  // 1 (grey) or 3 (colour), values in [0,1]

  bool grey() const { return channels.size() == 1; }
  int rows() const { return channels.front().rows(); }
  int cols() const { return channels.front().cols(); }
};

namespace detail {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

inline bool has_suffix(const std::string& s, const std::string& suf) {
  return s.size() >= suf.size() && s.compare(s.size() - suf.size(), suf.size(), suf) == 0;
}

inline Image load_png(const std::string& path) {
  FilePtr f(std::fopen(path.c_str(), "rb"));
  if (!f) throw error("load_image: cannot open " + path);
  png_byte header[8];
  if (std::fread(header, 1, 8, f.get()) != 8 || png_sig_cmp(header, 0, 8))
    throw error("load_image: " + path + " is not a PNG file");

  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) throw error("load_image: libpng init failure");
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw error("load_image: corrupt PNG " + path);
  }
  png_init_io(png, f.get());
  png_set_sig_bytes(png, 8);
  png_read_info(png, info);

  const int bit_depth = png_get_bit_depth(png, info);
  const int color_type = png_get_color_type(png, info);
  if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color_type == PNG_COLOR_TYPE_GRAY && bit_depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
  png_set_strip_alpha(png);
  png_read_update_info(png, info);

  const int rows = int(png_get_image_height(png, info));
  const int cols = int(png_get_image_width(png, info));
  const int depth = png_get_bit_depth(png, info);
  const int nch = int(png_get_channels(png, info));
  const double denom = depth == 16 ? 65535.0 : 255.0;

  std::vector<png_byte> rowbuf(png_get_rowbytes(png, info));
  Image img;
  const int out_ch = nch >= 3 ? 3 : 1;
  for (int k = 0; k < out_ch; ++k) img.channels.emplace_back(pixel_grid(rows, cols));
  for (int r = 0; r < rows; ++r) {
    png_read_row(png, rowbuf.data(), nullptr);
    for (int c = 0; c < cols; ++c)
      for (int k = 0; k < out_ch; ++k) {
        double val;
        if (depth == 16) {
          const std::size_t o = std::size_t(c * nch + k) * 2;
          val = double((unsigned(rowbuf[o]) << 8) | rowbuf[o + 1]);
        } else {
          val = double(rowbuf[std::size_t(c * nch + k)]);
        }
        img.channels[std::size_t(k)].at(r, c) = val / denom;
      }
  }
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return img;
}

inline void save_png(const std::string& path, const Image& img, int bit_depth) {
  if (bit_depth != 8 && bit_depth != 16) throw error("save_image: PNG depth must be 8 or 16");
  FilePtr f(std::fopen(path.c_str(), "wb"));
  if (!f) throw error("save_image: cannot write " + path);
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) throw error("save_image: libpng init failure");
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw error("save_image: PNG write failure for " + path);
  }
  png_init_io(png, f.get());
  const int rows = img.rows(), cols = img.cols();
  const int nch = img.grey() ? 1 : 3;
  png_set_IHDR(png, info, png_uint_32(cols), png_uint_32(rows), bit_depth,
               nch == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);

  const double scale = bit_depth == 16 ? 65535.0 : 255.0;
  std::vector<png_byte> rowbuf(std::size_t(cols) * nch * (bit_depth / 8));
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c)
      for (int k = 0; k < nch; ++k) {
        double x = img.channels[std::size_t(k)].at(r, c);
        x = std::min(1.0, std::max(0.0, x));  // clip before quantised save
        const unsigned q = unsigned(std::lround(x * scale));
        if (bit_depth == 16) {
          rowbuf[std::size_t(c * nch + k) * 2] = png_byte(q >> 8);
          rowbuf[std::size_t(c * nch + k) * 2 + 1] = png_byte(q & 0xFF);
        } else {
          rowbuf[std::size_t(c * nch + k)] = png_byte(q);
        }
      }
    png_write_row(png, rowbuf.data());
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

inline Image load_pnm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw error("load_image: cannot open " + path);
  std::string magic;
  in >> magic;
  if (magic != "P5" && magic != "P6")
    throw error("load_image: unsupported format in " + path + " (need binary PGM/PPM)");
  auto next_int = [&in, &path]() {
    int v;
    while (true) {
      in >> std::ws;
      if (in.peek() == '#') {
        std::string line;
        std::getline(in, line);
        continue;
      }
      if (!(in >> v)) throw error("load_image: corrupt header in " + path);
      return v;
    }
  };
  const int cols = next_int(), rows = next_int(), maxval = next_int();
  if (rows <= 0 || cols <= 0 || maxval <= 0 || maxval > 65535)
    throw error("load_image: corrupt header in " + path);
  in.get();  // single whitespace after maxval
  const int nch = magic == "P6" ? 3 : 1;
  const int bytes = maxval > 255 ? 2 : 1;
  std::vector<unsigned char> buf(std::size_t(rows) * cols * nch * bytes);
  in.read(reinterpret_cast<char*>(buf.data()), std::streamsize(buf.size()));
  if (std::size_t(in.gcount()) != buf.size()) throw error("load_image: truncated data in " + path);

  Image img;
  for (int k = 0; k < nch; ++k) img.channels.emplace_back(pixel_grid(rows, cols));
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c)
      for (int k = 0; k < nch; ++k) {
        const std::size_t o = (std::size_t(r) * cols * nch + std::size_t(c) * nch + k) * bytes;
        const unsigned v = bytes == 2 ? (unsigned(buf[o]) << 8) | buf[o + 1] : buf[o];
        img.channels[std::size_t(k)].at(r, c) = double(v) / double(maxval);
      }
  return img;
}

inline void save_pnm(const std::string& path, const Image& img) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw error("save_image: cannot write " + path);
  const int nch = img.grey() ? 1 : 3;
  out << (nch == 1 ? "P5" : "P6") << "\n"
      << img.cols() << " " << img.rows() << "\n255\n";
  for (int r = 0; r < img.rows(); ++r)
    for (int c = 0; c < img.cols(); ++c)
      for (int k = 0; k < nch; ++k) {
        double x = img.channels[std::size_t(k)].at(r, c);
        x = std::min(1.0, std::max(0.0, x));
        out.put(char(std::lround(x * 255.0)));
      }
}

}  // namespace detail

inline Image load_image(const std::string& path) {
  std::ifstream probe(path, std::ios::binary);
  if (!probe) throw error("load_image: cannot open " + path);
  char magic[2] = {0, 0};
  probe.read(magic, 2);
  probe.close();
  if (magic[0] == 'P' && (magic[1] == '5' || magic[1] == '6')) return detail::load_pnm(path);
  if ((unsigned char)magic[0] == 0x89 && magic[1] == 'P') return detail::load_png(path);
  throw error("load_image: unsupported format (expect PNG or binary PGM/PPM): " + path);
}

inline void save_image(const std::string& path, const Image& img, int png_bit_depth = 8) {
  if (detail::has_suffix(path, ".png")) return detail::save_png(path, img, png_bit_depth);
  if (detail::has_suffix(path, ".pgm") || detail::has_suffix(path, ".ppm"))
    return detail::save_pnm(path, img);
  throw error("save_image: unsupported extension for " + path);
}

inline void save_image(const std::string& path, const ScalarField& f, int png_bit_depth = 8) {
  save_image(path, Image{{f}}, png_bit_depth);
}

// ---- heightmaps ----

struct Heightmap {
  ScalarField values;
  ScalarField valid;  // 1 where data present, 0 at voids
};

// CSV: first line "rows,cols", then rows lines of comma-separated values.
inline void save_csv(const std::string& path, const ScalarField& f) {
  std::ofstream out(path);
  if (!out) throw error("save_csv: cannot write " + path);
  out.precision(17);
  out << f.rows() << "," << f.cols() << "\n";
  for (int r = 0; r < f.rows(); ++r) {
    for (int c = 0; c < f.cols(); ++c) out << (c ? "," : "") << f.at(r, c);
    out << "\n";
  }
}

inline ScalarField load_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw error("load_heightmap: cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw error("load_heightmap: empty CSV " + path);
  int rows = 0, cols = 0;
  if (std::sscanf(line.c_str(), "%d,%d", &rows, &cols) != 2 || rows <= 0 || cols <= 0)
    throw error("load_heightmap: CSV header must be rows,cols in " + path);
  ScalarField f(pixel_grid(rows, cols));
  for (int r = 0; r < rows; ++r) {
    if (!std::getline(in, line)) throw error("load_heightmap: truncated CSV " + path);
    std::stringstream ss(line);
    std::string cell;
    for (int c = 0; c < cols; ++c) {
      if (!std::getline(ss, cell, ',')) throw error("load_heightmap: short row in " + path);
      f.at(r, c) = std::stod(cell);
    }
  }
  return f;
}

constexpr std::int16_t kSrtmVoid = -32768;

// SRTM .hgt: big-endian int16, square tile with odd side (shared-edge
// convention); -32768 marks voids.
inline Heightmap load_hgt(const std::string& path) {
  std::ifstream in(path, std::ios::binary | std::ios::ate);
  if (!in) throw error("load_heightmap: cannot open " + path);
  const auto bytes = std::size_t(in.tellg());
  if (bytes == 0 || bytes % 2 != 0) throw error("load_heightmap: .hgt size must be 2*n^2 bytes");
  const std::size_t samples = bytes / 2;
  const auto n = std::size_t(std::llround(std::sqrt(double(samples))));
  if (n * n != samples)
    throw error("load_heightmap: .hgt is not a square tile (" + std::to_string(samples) +
                " samples)");
  if (n % 2 == 0)
    throw error("load_heightmap: .hgt side " + std::to_string(n) +
                " is even; SRTM tiles have odd sides (e.g. 3601, 1201)");
  in.seekg(0);
  std::vector<unsigned char> buf(bytes);
  in.read(reinterpret_cast<char*>(buf.data()), std::streamsize(bytes));
  if (std::size_t(in.gcount()) != bytes) throw error("load_heightmap: truncated .hgt " + path);

  Heightmap hm{ScalarField(pixel_grid(int(n), int(n))), ScalarField(pixel_grid(int(n), int(n)), 1.0)};
  for (std::size_t i = 0; i < samples; ++i) {
    const std::int16_t raw = std::int16_t((unsigned(buf[2 * i]) << 8) | buf[2 * i + 1]);
    if (raw == kSrtmVoid) {
      hm.values.v[i] = 0;
      hm.valid.v[i] = 0;
    } else {
      hm.values.v[i] = double(raw);
    }
  }
  return hm;
}

inline Heightmap load_heightmap(const std::string& path) {
  if (detail::has_suffix(path, ".hgt")) return load_hgt(path);
  if (detail::has_suffix(path, ".csv")) {
    ScalarField f = load_csv(path);
    return Heightmap{f, ScalarField(f.grid, 1.0)};
  }
  throw error("load_heightmap: unsupported extension (need .csv or .hgt): " + path);
}

}  // namespace tdv

#endif  // TDV_IO_HPP
