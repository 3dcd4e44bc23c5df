#include "facegraph/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <cctype>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include "facegraph/error.hpp"
#include "facegraph/imaging.hpp"

namespace facegraph {
namespace {

namespace fs = std::filesystem;

std::vector<std::uint8_t> read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::string lower_extension(const fs::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return ext;
}

RasterImage read_png(const fs::path& path) {
  png_image image;
  std::memset(&image, 0, sizeof(image));
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&image, path.string().c_str())) {
    throw Error(ErrorCode::IoError, path.string() + ": " + image.message);
  }
  image.format = PNG_FORMAT_RGB;
  RasterImage out(static_cast<int>(image.width), static_cast<int>(image.height),
                  PixelFormat::RGB8);
  if (!png_image_finish_read(&image, nullptr, out.bytes().data(), 0, nullptr)) {
    png_image_free(&image);
    throw Error(ErrorCode::IoError, path.string() + ": " + image.message);
  }
  return out;
}

std::uint32_t le32(const std::vector<std::uint8_t>& d, std::size_t off) {
  return d[off] | (d[off + 1] << 8) | (d[off + 2] << 16) | (static_cast<std::uint32_t>(d[off + 3]) << 24);
}
std::uint16_t le16(const std::vector<std::uint8_t>& d, std::size_t off) {
  return static_cast<std::uint16_t>(d[off] | (d[off + 1] << 8));
}

RasterImage read_bmp(const fs::path& path) {
  const auto data = read_file(path);
  if (data.size() < 54 || data[0] != 'B' || data[1] != 'M') {
    throw Error(ErrorCode::IoError, path.string() + ": not a BMP file");
  }
  const std::uint32_t pixel_offset = le32(data, 10);
  const std::uint32_t header_size = le32(data, 14);
  const auto width = static_cast<std::int32_t>(le32(data, 18));
  const auto raw_height = static_cast<std::int32_t>(le32(data, 22));
  const std::uint16_t bpp = le16(data, 28);
  const std::uint32_t compression = le32(data, 30);
  if (width <= 0 || raw_height == 0 || compression != 0 ||
      (bpp != 8 && bpp != 24 && bpp != 32)) {
    throw Error(ErrorCode::IoError, path.string() + ": unsupported BMP variant");
  }
  const bool bottom_up = raw_height > 0;
  const int height = bottom_up ? raw_height : -raw_height;
  const std::size_t stride = ((static_cast<std::size_t>(width) * bpp + 31) / 32) * 4;
  if (pixel_offset + stride * height > data.size()) {
    throw Error(ErrorCode::IoError, path.string() + ": truncated BMP");
  }
  std::vector<std::uint8_t> palette;
  if (bpp == 8) {
    const std::size_t pal_off = 14 + header_size;
    palette.assign(data.begin() + static_cast<std::ptrdiff_t>(pal_off),
                   data.begin() + static_cast<std::ptrdiff_t>(std::min<std::size_t>(pixel_offset, data.size())));
  }
  RasterImage out(width, height, PixelFormat::RGB8);
  for (int row = 0; row < height; ++row) {
    const int y = bottom_up ? height - 1 - row : row;
    const std::size_t base = pixel_offset + stride * row;
    for (int x = 0; x < width; ++x) {
      std::uint8_t r = 0, g = 0, b = 0;
      if (bpp == 8) {
        const std::size_t idx = static_cast<std::size_t>(data[base + x]) * 4;
        if (idx + 2 >= palette.size()) throw Error(ErrorCode::IoError, path.string() + ": bad palette index");
        b = palette[idx];
        g = palette[idx + 1];
        r = palette[idx + 2];
      } else {
        const std::size_t p = base + static_cast<std::size_t>(x) * (bpp / 8);
        b = data[p];
        g = data[p + 1];
        r = data[p + 2];
      }
      out.at(x, y, 0) = r;
      out.at(x, y, 1) = g;
      out.at(x, y, 2) = b;
    }
  }
  return out;
}

RasterImage read_ppm(const fs::path& path) {
  const auto data = read_file(path);
  std::size_t pos = 0;
  auto next_token = [&]() -> std::string {
    while (pos < data.size()) {
      if (data[pos] == '#') {
        while (pos < data.size() && data[pos] != '\n') ++pos;
      } else if (std::isspace(data[pos])) {
        ++pos;
      } else {
        break;
      }
    }
    std::string token;
    while (pos < data.size() && !std::isspace(data[pos])) token.push_back(static_cast<char>(data[pos++]));
    return token;
  };
  const std::string magic = next_token();
  if (magic != "P6") throw Error(ErrorCode::IoError, path.string() + ": only binary P6 PPM is supported");
  int width = 0, height = 0, maxval = 0;
  try {
    width = std::stoi(next_token());
    height = std::stoi(next_token());
    maxval = std::stoi(next_token());
  } catch (const std::exception&) {
    throw Error(ErrorCode::IoError, path.string() + ": malformed PPM header");
  }
  ++pos;  // single whitespace before raster
  if (width <= 0 || height <= 0 || maxval <= 0 || maxval > 255) {
    throw Error(ErrorCode::IoError, path.string() + ": unsupported PPM dimensions or depth");
  }
  RasterImage out(width, height, PixelFormat::RGB8);
  if (pos + out.sample_count() > data.size()) throw Error(ErrorCode::IoError, path.string() + ": truncated PPM");
  auto dst = out.bytes();
  for (std::size_t i = 0; i < dst.size(); ++i) {
    dst[i] = maxval == 255 ? data[pos + i] : round_to_byte(data[pos + i] * 255.0 / maxval);
  }
  return out;
}

}  // namespace

bool is_image_path(const fs::path& path) {
  const auto ext = lower_extension(path);
  return ext == ".png" || ext == ".bmp" || ext == ".ppm";
}

RasterImage read_image(const fs::path& path) {
  const auto ext = lower_extension(path);
  if (ext == ".png") return read_png(path);
  if (ext == ".bmp") return read_bmp(path);
  if (ext == ".ppm") return read_ppm(path);
  throw Error(ErrorCode::IoError, path.string() + ": unsupported image extension");
}

void write_png(const fs::path& path, const RasterImage& img) {
  RasterImage src = img.format() == PixelFormat::Binary ? mask_to_gray(img) : img;
  if (src.format() == PixelFormat::HSVf) src = hsv_to_rgb(src);
  png_image image;
  std::memset(&image, 0, sizeof(image));
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(src.width());
  image.height = static_cast<png_uint_32>(src.height());
  image.format = src.format() == PixelFormat::RGB8 ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  if (!png_image_write_to_file(&image, path.string().c_str(), 0, src.bytes().data(), 0, nullptr)) {
    throw Error(ErrorCode::IoError, path.string() + ": " + image.message);
  }
}

}  // namespace facegraph
