#pragma once

#include <filesystem>

#include "physio/encoders.hpp"

namespace physio {

enum class ImageFormat { Png, Jpeg };

std::string_view extension(ImageFormat f);  // ".png" / ".jpg"

/// 8-bit single-channel PNG, lossless.
void write_png(const Image8& img, const std::filesystem::path& file);
/// JPEG at the given quality (1..100). Lossy; kept for byte-compatible
/// replication of jpg-based datasets.
void write_jpeg(const Image8& img, const std::filesystem::path& file, int quality);

/// Reads a grayscale PNG or JPEG, chosen by file extension.
Image8 read_image(const std::filesystem::path& file);

}  // namespace physio
