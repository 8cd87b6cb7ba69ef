#include "celldev/gray_image.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>

namespace celldev::flags {

GrayImage::GrayImage(int width, int height, std::uint8_t fill)
    : width_(width), height_(height) {
  if (width < 1 || height < 1) throw std::invalid_argument("image dimensions must be >= 1");
  levels_.assign(static_cast<std::size_t>(width) * height, fill);
}

std::uint8_t discretize(double v) {
  if (!(v > 0.0)) return 0;
  if (v >= 1.0) return 255;
  return static_cast<std::uint8_t>(std::floor(v * 255.0 + 0.5));
}

void write_pgm(std::ostream& out, const GrayImage& img, PgmFormat format) {
  out << (format == PgmFormat::ascii ? "P2" : "P5") << "\n"
      << img.width() << " " << img.height() << "\n255\n";
  if (format == PgmFormat::binary) {
    out.write(reinterpret_cast<const char*>(img.levels().data()),
              static_cast<std::streamsize>(img.levels().size()));
  } else {
    for (int r = 0; r < img.height(); ++r) {
      for (int c = 0; c < img.width(); ++c) out << (c ? " " : "") << int(img.at(r, c));
      out << "\n";
    }
  }
  if (!out) throw std::runtime_error("failed writing graymap");
}

namespace {

// Next header integer, skipping whitespace and '#' comments.
int header_int(std::istream& in) {
  for (;;) {
    int ch = in.peek();
    if (ch == EOF) throw std::runtime_error("truncated graymap header");
    if (std::isspace(ch)) {
      in.get();
    } else if (ch == '#') {
      std::string skip;
      std::getline(in, skip);
    } else {
      break;
    }
  }
  int value = 0;
  if (!(in >> value)) throw std::runtime_error("bad graymap header");
  return value;
}

}  // namespace

GrayImage read_pgm(std::istream& in) {
  char magic[2] = {};
  if (!in.read(magic, 2) || magic[0] != 'P' || (magic[1] != '2' && magic[1] != '5'))
    throw std::runtime_error("not a P2/P5 graymap");
  const int width = header_int(in);
  const int height = header_int(in);
  const int maxval = header_int(in);
  if (width < 1 || height < 1) throw std::runtime_error("bad graymap dimensions");
  if (maxval < 1 || maxval > 255) throw std::runtime_error("unsupported graymap maxval");

  GrayImage img(width, height);
  auto store = [&](int r, int c, int v) {
    if (v < 0 || v > maxval) throw std::runtime_error("graymap sample out of range");
    img.at(r, c) = static_cast<std::uint8_t>(maxval == 255 ? v : (v * 255 + maxval / 2) / maxval);
  };
  if (magic[1] == '5') {
    in.get();  // single whitespace after maxval
    std::vector<unsigned char> raw(static_cast<std::size_t>(width) * height);
    if (!in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size())))
      throw std::runtime_error("truncated graymap data");
    for (int r = 0; r < height; ++r)
      for (int c = 0; c < width; ++c) store(r, c, raw[static_cast<std::size_t>(r) * width + c]);
  } else {
    for (int r = 0; r < height; ++r)
      for (int c = 0; c < width; ++c) store(r, c, header_int(in));
  }
  return img;
}

void save_pgm(const std::string& path, const GrayImage& img, PgmFormat format) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  write_pgm(out, img, format);
}

GrayImage load_pgm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  return read_pgm(in);
}

}  // namespace celldev::flags
