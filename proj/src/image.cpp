#include "faceattr/image.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string_view>

#include "faceattr/error.hpp"

#ifdef FACEATTR_HAVE_JPEG
#include <jpeglib.h>
#endif

namespace faceattr {

namespace {

class PnmReader {
public:
    PnmReader(std::span<const std::uint8_t> bytes, const std::string& path) : bytes_(bytes), path_(path) {}

    void skip_space_and_comments() {
        while (pos_ < bytes_.size()) {
            const char c = static_cast<char>(bytes_[pos_]);
            if (c == '#') {
                while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
            } else if (std::isspace(static_cast<unsigned char>(c))) {
                ++pos_;
            } else {
                break;
            }
        }
    }

    unsigned long number() {
        skip_space_and_comments();
        if (pos_ >= bytes_.size() || !std::isdigit(bytes_[pos_])) fail("expected a decimal number");
        unsigned long value = 0;
        while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_])) {
            value = value * 10 + (bytes_[pos_] - '0');
            if (value > 1000000000UL) fail("header value too large");
            ++pos_;
        }
        return value;
    }

    std::uint8_t byte() {
        if (pos_ >= bytes_.size()) fail("truncated pixel data");
        return bytes_[pos_++];
    }

    void single_whitespace() {
        if (pos_ >= bytes_.size() || !std::isspace(bytes_[pos_])) fail("missing whitespace after header");
        ++pos_;
    }

    [[noreturn]] void fail(const std::string& what) const { throw IoError(path_, "invalid pixmap: " + what); }

    std::size_t pos_ = 0;

private:
    std::span<const std::uint8_t> bytes_;
    const std::string& path_;
};

std::vector<std::uint8_t> read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError(path, "cannot open file");
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

} // namespace

Tensor decode_pnm(std::span<const std::uint8_t> bytes, const std::string& path) {
    PnmReader r(bytes, path);
    if (bytes.size() < 2 || bytes[0] != 'P') r.fail("missing P magic");
    const char kind = static_cast<char>(bytes[1]);
    if (kind != '2' && kind != '3' && kind != '5' && kind != '6') r.fail(std::string("unsupported kind P") + kind);
    r.pos_ = 2;
    const std::size_t channels = (kind == '3' || kind == '6') ? 3 : 1;
    const unsigned long width = r.number();
    const unsigned long height = r.number();
    const unsigned long maxval = r.number();
    if (width == 0 || height == 0) r.fail("zero extent");
    if (maxval == 0 || maxval > 65535) r.fail("maxval out of range");
    const bool ascii = kind == '2' || kind == '3';
    const bool wide = maxval > 255;
    if (!ascii) r.single_whitespace();

    Tensor out({channels, height, width});
    const float scale = 1.0f / static_cast<float>(maxval);
    for (std::size_t y = 0; y < height; ++y) {
        for (std::size_t x = 0; x < width; ++x) {
            for (std::size_t c = 0; c < channels; ++c) {
                unsigned long v;
                if (ascii) {
                    v = r.number();
                } else if (wide) {
                    v = static_cast<unsigned long>(r.byte()) << 8;
                    v |= r.byte();
                } else {
                    v = r.byte();
                }
                if (v > maxval) r.fail("sample exceeds maxval");
                out.at(c, y, x) = static_cast<float>(v) * scale;
            }
        }
    }
    return out;
}

bool jpeg_supported() noexcept {
#ifdef FACEATTR_HAVE_JPEG
    return true;
#else
    return false;
#endif
}

#ifdef FACEATTR_HAVE_JPEG
namespace {

struct JpegErrorManager {
    jpeg_error_mgr base;
    std::jmp_buf jump;
    char message[JMSG_LENGTH_MAX];
};

void jpeg_error_exit(j_common_ptr info) {
    auto* mgr = reinterpret_cast<JpegErrorManager*>(info->err);
    (*info->err->format_message)(info, mgr->message);
    std::longjmp(mgr->jump, 1);
}

void jpeg_quiet(j_common_ptr) {}

} // namespace
#endif

Tensor decode_jpeg(std::span<const std::uint8_t> bytes, const std::string& path) {
#ifdef FACEATTR_HAVE_JPEG
    jpeg_decompress_struct info{};
    JpegErrorManager err{};
    info.err = jpeg_std_error(&err.base);
    err.base.error_exit = jpeg_error_exit;
    err.base.output_message = jpeg_quiet;
    std::vector<std::uint8_t> raw;
    std::size_t width = 0, height = 0, channels = 0;
    if (setjmp(err.jump)) {
        jpeg_destroy_decompress(&info);
        throw IoError(path, std::string("invalid JPEG: ") + err.message);
    }
    jpeg_create_decompress(&info);
    jpeg_mem_src(&info, bytes.data(), static_cast<unsigned long>(bytes.size()));
    jpeg_read_header(&info, TRUE);
    if (info.num_components != 1) info.out_color_space = JCS_RGB;
    jpeg_start_decompress(&info);
    width = info.output_width;
    height = info.output_height;
    channels = static_cast<std::size_t>(info.output_components);
    raw.resize(width * height * channels);
    while (info.output_scanline < info.output_height) {
        JSAMPROW row = raw.data() + static_cast<std::size_t>(info.output_scanline) * width * channels;
        jpeg_read_scanlines(&info, &row, 1);
    }
    jpeg_finish_decompress(&info);
    jpeg_destroy_decompress(&info);

    Tensor out({channels, height, width});
    for (std::size_t y = 0; y < height; ++y)
        for (std::size_t x = 0; x < width; ++x)
            for (std::size_t c = 0; c < channels; ++c)
                out.at(c, y, x) = static_cast<float>(raw[(y * width + x) * channels + c]) / 255.0f;
    return out;
#else
    (void)bytes;
    throw IoError(path, "JPEG support not compiled in; convert images to PPM");
#endif
}

Tensor read_raster(const std::string& path) {
    const std::vector<std::uint8_t> bytes = read_file(path);
    if (bytes.size() >= 2 && bytes[0] == 'P') return decode_pnm(bytes, path);
    if (bytes.size() >= 3 && bytes[0] == 0xFF && bytes[1] == 0xD8 && bytes[2] == 0xFF) return decode_jpeg(bytes, path);
    throw IoError(path, "unrecognized image format");
}

Tensor resize_bilinear(const Tensor& image, std::size_t height, std::size_t width) {
    if (image.rank() != 3 || image.empty()) throw ShapeError("resize_bilinear: expected non-empty [C,H,W]");
    if (height == 0 || width == 0) throw ArgumentError("resize_bilinear: target extent must be positive");
    const std::size_t channels = image.dim(0), in_h = image.dim(1), in_w = image.dim(2);
    if (in_h == height && in_w == width) return image;

    struct Tap {
        std::size_t lo, hi;
        float frac;
    };
    auto taps = [](std::size_t in_extent, std::size_t out_extent) {
        std::vector<Tap> result(out_extent);
        const double scale = static_cast<double>(in_extent) / static_cast<double>(out_extent);
        for (std::size_t i = 0; i < out_extent; ++i) {
            double src = (static_cast<double>(i) + 0.5) * scale - 0.5;
            src = std::clamp(src, 0.0, static_cast<double>(in_extent - 1));
            const auto lo = static_cast<std::size_t>(std::floor(src));
            const std::size_t hi = std::min(lo + 1, in_extent - 1);
            result[i] = {lo, hi, static_cast<float>(src - static_cast<double>(lo))};
        }
        return result;
    };
    const std::vector<Tap> ys = taps(in_h, height), xs = taps(in_w, width);

    Tensor out({channels, height, width});
    for (std::size_t c = 0; c < channels; ++c) {
        for (std::size_t y = 0; y < height; ++y) {
            const Tap& ty = ys[y];
            for (std::size_t x = 0; x < width; ++x) {
                const Tap& tx = xs[x];
                const float top = image.at(c, ty.lo, tx.lo) * (1 - tx.frac) + image.at(c, ty.lo, tx.hi) * tx.frac;
                const float bottom =
                    image.at(c, ty.hi, tx.lo) * (1 - tx.frac) + image.at(c, ty.hi, tx.hi) * tx.frac;
                out.at(c, y, x) = top * (1 - ty.frac) + bottom * ty.frac;
            }
        }
    }
    return out;
}

Tensor convert_channels(const Tensor& image, std::size_t channels) {
    const std::size_t have = image.dim(0);
    if (channels == 0 || channels == have) return image;
    const std::size_t h = image.dim(1), w = image.dim(2);
    if (have == 1 && channels == 3) {
        Tensor out({3, h, w});
        for (std::size_t c = 0; c < 3; ++c)
            std::copy(image.values().begin(), image.values().end(), out.values().begin() + c * h * w);
        return out;
    }
    if (have == 3 && channels == 1) {
        Tensor out({1, h, w});
        for (std::size_t i = 0; i < h * w; ++i)
            out[i] = 0.299f * image[i] + 0.587f * image[h * w + i] + 0.114f * image[2 * h * w + i];
        return out;
    }
    throw ArgumentError("convert_channels: cannot convert " + std::to_string(have) + " to " +
                        std::to_string(channels) + " channels");
}

ImageRecord load_image(const std::string& path, std::size_t height, std::size_t width, std::size_t channels) {
    Tensor pixels = read_raster(path);
    pixels = resize_bilinear(convert_channels(pixels, channels), height, width);
    for (auto& v : pixels.values()) v = std::clamp(v, 0.0f, 1.0f);
    return {std::filesystem::path(path).filename().string(), std::move(pixels)};
}

std::vector<Tensor> load_images(const std::string& root, std::span<const std::string> ids, std::size_t height,
                                std::size_t width, std::size_t channels) {
    std::vector<Tensor> images;
    images.reserve(ids.size());
    for (const auto& id : ids) {
        const std::string path = (std::filesystem::path(root) / id).string();
        images.push_back(load_image(path, height, width, channels).pixels);
    }
    return images;
}

void write_pnm(const std::string& path, const Tensor& image, const std::string& comments) {
    if (image.rank() != 3 || (image.dim(0) != 1 && image.dim(0) != 3)) {
        throw ShapeError("write_pnm: expected [1|3,H,W], got " + shape_string(image.shape()));
    }
    const std::size_t c = image.dim(0), h = image.dim(1), w = image.dim(2);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError(path, "cannot create file");
    out << (c == 3 ? "P6" : "P5") << '\n';
    std::size_t start = 0;
    while (start < comments.size()) {
        std::size_t end = comments.find('\n', start);
        if (end == std::string::npos) end = comments.size();
        const std::string_view line(comments.data() + start, end - start);
        out << (line.starts_with('#') ? "" : "# ") << line << '\n';
        start = end + 1;
    }
    out << w << ' ' << h << "\n255\n";
    std::vector<char> raw(c * h * w);
    for (std::size_t y = 0; y < h; ++y)
        for (std::size_t x = 0; x < w; ++x)
            for (std::size_t k = 0; k < c; ++k) {
                const float v = std::clamp(image.at(k, y, x), 0.0f, 1.0f);
                raw[(y * w + x) * c + k] = static_cast<char>(static_cast<unsigned char>(std::lround(v * 255.0f)));
            }
    out.write(raw.data(), static_cast<std::streamsize>(raw.size()));
    if (!out) throw IoError(path, "write failed");
}

} // namespace faceattr
