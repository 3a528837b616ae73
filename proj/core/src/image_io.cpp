#include "raloha/image_io.hpp"

#include <cctype>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <vector>

namespace raloha {

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path + " for reading");
  std::string bytes((std::istreambuf_iterator<char>(in)),
                    std::istreambuf_iterator<char>());
  if (!in.good() && !in.eof()) throw IoError("read failure on " + path);
  return bytes;
}

}  // namespace

ImageBuffer load_image(const std::string& path) {
  const std::string bytes = slurp(path);
  if (bytes.size() < 2 || bytes[0] != 'P' ||
      (bytes[1] != '5' && bytes[1] != '6')) {
    throw ParseError("unsupported magic (want P5 or P6)", 0);
  }
  const int channels = bytes[1] == '5' ? 1 : 3;

  // Offset-aware header parse; comments (# to end of line) may appear
  // wherever whitespace may.
  std::size_t pos = 2;
  auto skip_ws = [&]() {
    while (pos < bytes.size()) {
      const char c = bytes[pos];
      if (std::isspace(static_cast<unsigned char>(c))) {
        ++pos;
      } else if (c == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else {
        break;
      }
    }
  };
  auto read_uint = [&](const char* what) -> std::uint64_t {
    skip_ws();
    if (pos >= bytes.size() ||
        !std::isdigit(static_cast<unsigned char>(bytes[pos]))) {
      throw ParseError(std::string("expected ") + what, pos);
    }
    std::uint64_t v = 0;
    while (pos < bytes.size() &&
           std::isdigit(static_cast<unsigned char>(bytes[pos]))) {
      v = v * 10 + std::uint64_t(bytes[pos] - '0');
      if (v > 0xFFFFFFFFULL) throw ParseError("numeric overflow in header", pos);
      ++pos;
    }
    return v;
  };

  const std::uint64_t width = read_uint("width");
  const std::uint64_t height = read_uint("height");
  const std::uint64_t maxval = read_uint("maxval");
  if (width == 0 || height == 0) {
    throw ParseError("zero image dimension", pos);
  }
  if (maxval == 0 || maxval > 65535) {
    throw ParseError("maxval out of range [1,65535]", pos);
  }
  if (pos >= bytes.size() ||
      !std::isspace(static_cast<unsigned char>(bytes[pos]))) {
    throw ParseError("expected single whitespace before raster", pos);
  }
  ++pos;

  const int bytes_per_sample = maxval > 255 ? 2 : 1;
  const std::uint64_t n_samples = width * height * std::uint64_t(channels);
  const std::uint64_t need = n_samples * bytes_per_sample;
  if (bytes.size() - pos < need) {
    throw ParseError("truncated raster payload", bytes.size());
  }

  ImageBuffer out;
  out.bit_depth = bytes_per_sample * 8;
  out.source = path;
  out.planes.assign(channels, Patch(height, width));
  const unsigned char* raw =
      reinterpret_cast<const unsigned char*>(bytes.data()) + pos;
  const double inv = 1.0 / double(maxval);
  for (std::uint64_t i = 0; i < height; ++i) {
    for (std::uint64_t j = 0; j < width; ++j) {
      for (int c = 0; c < channels; ++c) {
        std::uint64_t sample;
        if (bytes_per_sample == 1) {
          sample = *raw++;
        } else {
          sample = (std::uint64_t(raw[0]) << 8) | raw[1];  // big-endian
          raw += 2;
        }
        const double v = double(sample) * inv;
        out.planes[c](Eigen::Index(i), Eigen::Index(j)) =
            v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v);
      }
    }
  }
  return out;
}

ImageBuffer load_image_expect(const std::string& path, int expect_channels) {
  ImageBuffer img = load_image(path);
  if (img.channels() != expect_channels) {
    throw InvalidShapeError("channel mismatch: " + path + " has " +
                            std::to_string(img.channels()) +
                            " channel(s), expected " +
                            std::to_string(expect_channels));
  }
  return img;
}

void save_image(const std::string& path, const ImageBuffer& image,
                int bit_depth) {
  if (bit_depth != 8 && bit_depth != 16) {
    throw InvalidConfigError("save_image: bit depth must be 8 or 16");
  }
  const int channels = image.channels();
  if (channels != 1 && channels != 3) {
    throw InvalidShapeError("save_image: need 1 or 3 planes, got " +
                            std::to_string(channels));
  }
  const int rows = image.rows();
  const int cols = image.cols();
  for (const Patch& p : image.planes) {
    if (p.rows() != rows || p.cols() != cols) {
      throw InvalidShapeError("save_image: plane dimensions differ");
    }
  }

  const std::uint32_t maxval = bit_depth == 8 ? 255u : 65535u;
  std::string payload;
  payload += channels == 1 ? "P5" : "P6";
  payload += "\n" + std::to_string(cols) + " " + std::to_string(rows) + "\n" +
             std::to_string(maxval) + "\n";
  payload.reserve(payload.size() +
                  std::size_t(rows) * cols * channels * (bit_depth / 8));
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) {
      for (int c = 0; c < channels; ++c) {
        double v = image.planes[c](i, j);
        v = v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v);
        const std::uint32_t s = std::uint32_t(std::floor(v * maxval + 0.5));
        if (bit_depth == 8) {
          payload += char(s & 0xFF);
        } else {
          payload += char((s >> 8) & 0xFF);
          payload += char(s & 0xFF);
        }
      }
    }
  }

  std::ofstream outf(path, std::ios::binary | std::ios::trunc);
  if (!outf) throw IoError("cannot open " + path + " for writing");
  outf.write(payload.data(), std::streamsize(payload.size()));
  if (!outf.good()) throw IoError("write failure on " + path);
}

void save_image(const std::string& path, const ImageBuffer& image) {
  save_image(path, image, image.bit_depth);
}

}  // namespace raloha
