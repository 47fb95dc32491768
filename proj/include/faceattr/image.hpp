#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "faceattr/tensor.hpp"

namespace faceattr {

struct ImageRecord {
    std::string image_id;
    /// [C,H,W], C in {1,3}, values in [0,1].
    Tensor pixels;
};

/// Decodes a binary or ASCII portable pixmap/graymap (P2, P3, P5, P6) to
/// [C,H,W] in [0,1]. Throws IoError naming `path` on malformed data.
Tensor decode_pnm(std::span<const std::uint8_t> bytes, const std::string& path);

/// Decodes a JPEG when the library was built with libjpeg; throws IoError
/// otherwise.
Tensor decode_jpeg(std::span<const std::uint8_t> bytes, const std::string& path);

bool jpeg_supported() noexcept;

/// Reads any supported raster file, sniffing the format from its magic bytes.
Tensor read_raster(const std::string& path);

/// Bilinear resampling with pixel-center alignment and edge clamping.
Tensor resize_bilinear(const Tensor& image, std::size_t height, std::size_t width);

/// 1 channel <-> 3 channels (replication / ITU-R 601 luma).
Tensor convert_channels(const Tensor& image, std::size_t channels);

/// Decode, convert to `channels` (0 keeps the file's), resize, and tag with
/// the file name as image id.
ImageRecord load_image(const std::string& path, std::size_t height, std::size_t width,
                       std::size_t channels = 0);

/// Loads `root/<id>` for every id, preserving order.
std::vector<Tensor> load_images(const std::string& root, std::span<const std::string> ids, std::size_t height,
                                std::size_t width, std::size_t channels);

/// Binary P5 (1 channel) or P6 (3 channels) with maxval 255; values are
/// clamped to [0,1] and rounded. Each line of `comments` becomes a header
/// comment after the magic number.
void write_pnm(const std::string& path, const Tensor& image, const std::string& comments = "");

} // namespace faceattr
