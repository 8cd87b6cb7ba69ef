#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace celldev::flags {

// Row-major grid of gray levels 0..255.
class GrayImage {
 public:
  GrayImage(int width, int height, std::uint8_t fill = 0);

  int width() const { return width_; }
  int height() const { return height_; }
  std::uint8_t at(int row, int col) const { return levels_[index(row, col)]; }
  std::uint8_t& at(int row, int col) { return levels_[index(row, col)]; }
  const std::vector<std::uint8_t>& levels() const { return levels_; }

  friend bool operator==(const GrayImage&, const GrayImage&) = default;

 private:
  std::size_t index(int row, int col) const {
    return static_cast<std::size_t>(row) * width_ + col;
  }

  int width_;
  int height_;
  std::vector<std::uint8_t> levels_;
};

// Clamps to [0,1] (NaN maps to 0) and rounds v*255 half-up.
std::uint8_t discretize(double v);

enum class PgmFormat { ascii, binary };

void write_pgm(std::ostream& out, const GrayImage& img, PgmFormat format = PgmFormat::binary);
// Accepts P2 and P5 with maxval up to 255; levels are rescaled to 0..255
// when maxval differs.
GrayImage read_pgm(std::istream& in);
void save_pgm(const std::string& path, const GrayImage& img,
              PgmFormat format = PgmFormat::binary);
GrayImage load_pgm(const std::string& path);

}  // namespace celldev::flags
