#include "cawm/image_io.hpp"

#include <png.h>

#include <cmath>
#include <cstdio>
#include <memory>
#include <vector>

#include "cawm/error.hpp"

namespace cawm {

namespace {

struct FileCloser {
    void operator()(std::FILE* f) const {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

[[noreturn]] void png_error_fn(png_structp png, png_const_charp msg) {
    throw IoError(std::string("libpng: ") + msg);
    (void)png;
}

void png_warn_fn(png_structp, png_const_charp) {}

}  // namespace

Tensor<float> load_png(const std::string& path) {
    FilePtr fp(std::fopen(path.c_str(), "rb"));
    if (!fp) throw IoError("cannot open image: " + path);

    unsigned char sig[8];
    if (std::fread(sig, 1, 8, fp.get()) != 8 || png_sig_cmp(sig, 0, 8) != 0)
        throw UnsupportedFormatError("not a PNG file: " + path);

    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr,
                                             png_error_fn, png_warn_fn);
    if (!png) throw IoError("png_create_read_struct failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_read_struct(&png, nullptr, nullptr);
        throw IoError("png_create_info_struct failed");
    }
    try {
        png_init_io(png, fp.get());
        png_set_sig_bytes(png, 8);
        png_read_info(png, info);

        const png_byte depth = png_get_bit_depth(png, info);
        const png_byte color = png_get_color_type(png, info);
        if (depth == 16)
            throw UnsupportedFormatError("16-bit PNG not supported: " + path);
        if (color == PNG_COLOR_TYPE_PALETTE)
            throw UnsupportedFormatError("palette PNG not supported: " + path);
        if (depth < 8) png_set_expand_gray_1_2_4_to_8(png);
        if (color & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
        png_read_update_info(png, info);

        const png_uint_32 W = png_get_image_width(png, info);
        const png_uint_32 H = png_get_image_height(png, info);
        const png_byte channels = png_get_channels(png, info);
        if (channels != 1 && channels != 3)
            throw UnsupportedFormatError("unsupported channel count " +
                                         std::to_string(channels) + ": " + path);

        std::vector<std::vector<png_byte>> rows(
            H, std::vector<png_byte>(png_get_rowbytes(png, info)));
        std::vector<png_bytep> row_ptrs(H);
        for (png_uint_32 r = 0; r < H; ++r) row_ptrs[r] = rows[r].data();
        png_read_image(png, row_ptrs.data());
        png_read_end(png, nullptr);
        png_destroy_read_struct(&png, &info, nullptr);

        Tensor<float> out = Tensor<float>::zeros(
            {1, channels, static_cast<int64_t>(H), static_cast<int64_t>(W)});
        for (png_uint_32 h = 0; h < H; ++h)
            for (png_uint_32 w = 0; w < W; ++w)
                for (png_byte c = 0; c < channels; ++c)
                    out.at(0, c, h, w) =
                        static_cast<float>(rows[h][w * channels + c]) / 255.0f;
        return out;
    } catch (...) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw;
    }
}

void save_png(const Tensor<float>& img, const std::string& path) {
    const Shape s = img.shape();
    if (s.b != 1 || (s.c != 1 && s.c != 3))
        throw UsageError("save_png: expected (1,1,H,W) or (1,3,H,W), got " + s.str());

    FilePtr fp(std::fopen(path.c_str(), "wb"));
    if (!fp) throw IoError("cannot open image for writing: " + path);

    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr,
                                              png_error_fn, png_warn_fn);
    if (!png) throw IoError("png_create_write_struct failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_write_struct(&png, nullptr);
        throw IoError("png_create_info_struct failed");
    }
    try {
        png_init_io(png, fp.get());
        png_set_IHDR(png, info, static_cast<png_uint_32>(s.w),
                     static_cast<png_uint_32>(s.h), 8,
                     s.c == 3 ? PNG_COLOR_TYPE_RGB : PNG_COLOR_TYPE_GRAY,
                     PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
                     PNG_FILTER_TYPE_DEFAULT);
        png_write_info(png, info);

        std::vector<png_byte> row(static_cast<size_t>(s.w * s.c));
        for (int64_t h = 0; h < s.h; ++h) {
            for (int64_t w = 0; w < s.w; ++w)
                for (int64_t c = 0; c < s.c; ++c) {
                    float v = img.at(0, c, h, w);
                    v = v < 0.0f ? 0.0f : (v > 1.0f ? 1.0f : v);
                    row[static_cast<size_t>(w * s.c + c)] =
                        static_cast<png_byte>(std::floor(v * 255.0f + 0.5f));
                }
            png_write_row(png, row.data());
        }
        png_write_end(png, info);
        png_destroy_write_struct(&png, &info);
    } catch (...) {
        png_destroy_write_struct(&png, &info);
        throw;
    }
}

}  // namespace cawm
