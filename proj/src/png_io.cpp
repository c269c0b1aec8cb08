#include "metafas/png_io.hpp"

#include <png.h>

#include <cmath>
#include <cstdio>
#include <memory>

#include "metafas/common.hpp"

namespace metafas::png {

namespace {

struct FileCloser {
    void operator()(std::FILE* f) const {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

}  // namespace

Image8 read(const std::string& path) {
    FilePtr fp(std::fopen(path.c_str(), "rb"));
    if (!fp) throw DataError("cannot open PNG for reading: " + path);

    png_structp png_ptr = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png_ptr) throw DataError("png_create_read_struct failed");
    png_infop info_ptr = png_create_info_struct(png_ptr);
    if (!info_ptr) {
        png_destroy_read_struct(&png_ptr, nullptr, nullptr);
        throw DataError("png_create_info_struct failed");
    }
    if (setjmp(png_jmpbuf(png_ptr))) {
        png_destroy_read_struct(&png_ptr, &info_ptr, nullptr);
        throw DataError("failed to decode PNG: " + path);
    }

    png_init_io(png_ptr, fp.get());
    png_read_info(png_ptr, info_ptr);

    png_uint_32 width = png_get_image_width(png_ptr, info_ptr);
    png_uint_32 height = png_get_image_height(png_ptr, info_ptr);
    png_byte color_type = png_get_color_type(png_ptr, info_ptr);
    png_byte bit_depth = png_get_bit_depth(png_ptr, info_ptr);

    if (bit_depth == 16) png_set_strip_16(png_ptr);
    if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png_ptr);
    if (color_type == PNG_COLOR_TYPE_GRAY && bit_depth < 8) png_set_expand_gray_1_2_4_to_8(png_ptr);
    if (png_get_valid(png_ptr, info_ptr, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png_ptr);
    if (color_type & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png_ptr);
    png_read_update_info(png_ptr, info_ptr);

    int channels = png_get_channels(png_ptr, info_ptr);
    if (channels != 1 && channels != 3) {
        png_destroy_read_struct(&png_ptr, &info_ptr, nullptr);
        throw DataError("unsupported PNG channel count in " + path);
    }

    Image8 img;
    img.h = static_cast<int>(height);
    img.w = static_cast<int>(width);
    img.channels = channels;
    img.v.resize(static_cast<size_t>(img.h) * img.w * channels);

    std::vector<png_bytep> rows(height);
    for (png_uint_32 y = 0; y < height; ++y)
        rows[y] = img.v.data() + static_cast<size_t>(y) * width * channels;
    png_read_image(png_ptr, rows.data());
    png_read_end(png_ptr, nullptr);
    png_destroy_read_struct(&png_ptr, &info_ptr, nullptr);
    return img;
}

void write(const std::string& path, const Image8& img) {
    if (img.channels != 1 && img.channels != 3) throw DataError("PNG write: channels must be 1 or 3");
    FilePtr fp(std::fopen(path.c_str(), "wb"));
    if (!fp) throw DataError("cannot open PNG for writing: " + path);

    png_structp png_ptr = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png_ptr) throw DataError("png_create_write_struct failed");
    png_infop info_ptr = png_create_info_struct(png_ptr);
    if (!info_ptr) {
        png_destroy_write_struct(&png_ptr, nullptr);
        throw DataError("png_create_info_struct failed");
    }
    if (setjmp(png_jmpbuf(png_ptr))) {
        png_destroy_write_struct(&png_ptr, &info_ptr);
        throw DataError("failed to encode PNG: " + path);
    }

    png_init_io(png_ptr, fp.get());
    png_set_IHDR(png_ptr, info_ptr, img.w, img.h, 8,
                 img.channels == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png_ptr, info_ptr);

    std::vector<png_bytep> rows(img.h);
    for (int y = 0; y < img.h; ++y)
        rows[y] = const_cast<png_bytep>(img.v.data() + static_cast<size_t>(y) * img.w * img.channels);
    png_write_image(png_ptr, rows.data());
    png_write_end(png_ptr, nullptr);
    png_destroy_write_struct(&png_ptr, &info_ptr);
}

namespace {
std::uint8_t quantize(double x) {
    double q = std::lround(x * 255.0);
    if (q < 0) q = 0;
    if (q > 255) q = 255;
    return static_cast<std::uint8_t>(q);
}
}  // namespace

Image8 from_tensor_rgb(const Tensor& t) {
    if (t.c != 3) throw DataError("from_tensor_rgb: expected 3 channels");
    Image8 img;
    img.h = t.h;
    img.w = t.w;
    img.channels = 3;
    img.v.resize(static_cast<size_t>(t.h) * t.w * 3);
    for (int y = 0; y < t.h; ++y)
        for (int x = 0; x < t.w; ++x)
            for (int ch = 0; ch < 3; ++ch)
                img.v[(static_cast<size_t>(y) * t.w + x) * 3 + ch] = quantize(t.at(ch, y, x));
    return img;
}

Tensor to_tensor_rgb(const Image8& img) {
    if (img.channels != 3) throw DataError("to_tensor_rgb: expected 3 channels");
    Tensor t(3, img.h, img.w);
    for (int y = 0; y < img.h; ++y)
        for (int x = 0; x < img.w; ++x)
            for (int ch = 0; ch < 3; ++ch)
                t.at(ch, y, x) = img.v[(static_cast<size_t>(y) * img.w + x) * 3 + ch] / 255.0;
    return t;
}

Image8 from_tensor_gray(const Tensor& t) {
    if (t.c != 1) throw DataError("from_tensor_gray: expected 1 channel");
    Image8 img;
    img.h = t.h;
    img.w = t.w;
    img.channels = 1;
    img.v.resize(static_cast<size_t>(t.h) * t.w);
    for (int y = 0; y < t.h; ++y)
        for (int x = 0; x < t.w; ++x) img.v[static_cast<size_t>(y) * t.w + x] = quantize(t.at(0, y, x));
    return img;
}

Tensor to_tensor_gray(const Image8& img) {
    if (img.channels != 1) throw DataError("to_tensor_gray: expected 1 channel");
    Tensor t(1, img.h, img.w);
    for (int y = 0; y < img.h; ++y)
        for (int x = 0; x < img.w; ++x) t.at(0, y, x) = img.v[static_cast<size_t>(y) * img.w + x] / 255.0;
    return t;
}

}  // namespace metafas::png
