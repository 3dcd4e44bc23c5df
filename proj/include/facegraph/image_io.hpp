#pragma once

#include <filesystem>

#include "facegraph/image.hpp"

namespace facegraph {

/// Decodes PNG, BMP (uncompressed 8/24/32-bit) or binary PPM (P6) into RGB8.
/// Throws IoError on unreadable or unsupported files.
RasterImage read_image(const std::filesystem::path& path);

/// Writes Gray8, RGB8 or Binary (as 0/255) images as PNG.
void write_png(const std::filesystem::path& path, const RasterImage& img);

bool is_image_path(const std::filesystem::path& path);

}  // namespace facegraph
