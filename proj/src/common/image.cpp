// SPDX-License-Identifier: Apache-2.0
#include "pathnav/image.hpp"

#include "pathnav/error.hpp"
#include "pathnav/fileio.hpp"

#include <png.h>

#include <algorithm>
#include <cstring>
#include <fstream>
#include <iterator>

namespace pathnav
{

Image::Image(int w, int h, Rgb fill): width(w), height(h), pixels(static_cast<std::size_t>(w) * h * 3)
{
    for (std::size_t i = 0; i < pixels.size(); i += 3)
    {
        pixels[i] = fill[0];
        pixels[i + 1] = fill[1];
        pixels[i + 2] = fill[2];
    }
}

FloatImage::FloatImage(int w, int h, int c):
    width(w), height(h), channels(c), values(static_cast<std::size_t>(w) * h * c, 0.0f)
{
}

FloatImage to_float(const Image& img)
{
    FloatImage out(img.width, img.height, 3);
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x)
        {
            const auto* p = img.at(x, y);
            for (int c = 0; c < 3; ++c)
                out.at(c, x, y) = static_cast<float>(p[c]) / 255.0f;
        }
    return out;
}

Image resize_to_fit(const Image& img, int max_edge)
{
    if (max_edge <= 0)
        throw Error(ErrorCode::Precondition, "max_edge must be positive");
    const int long_edge = std::max(img.width, img.height);
    if (long_edge <= max_edge)
        return img;

    const double scale = static_cast<double>(long_edge) / max_edge;
    const int ow = std::max(1, static_cast<int>(img.width / scale));
    const int oh = std::max(1, static_cast<int>(img.height / scale));
    Image out(ow, oh);
    for (int oy = 0; oy < oh; ++oy)
    {
        const int y0 = static_cast<int>(oy * static_cast<double>(img.height) / oh);
        const int y1 = std::max(y0 + 1, static_cast<int>((oy + 1) * static_cast<double>(img.height) / oh));
        for (int ox = 0; ox < ow; ++ox)
        {
            const int x0 = static_cast<int>(ox * static_cast<double>(img.width) / ow);
            const int x1 = std::max(x0 + 1, static_cast<int>((ox + 1) * static_cast<double>(img.width) / ow));
            std::array<std::uint32_t, 3> sum{};
            for (int y = y0; y < y1; ++y)
                for (int x = x0; x < x1; ++x)
                {
                    const auto* p = img.at(x, y);
                    sum[0] += p[0];
                    sum[1] += p[1];
                    sum[2] += p[2];
                }
            const auto n = static_cast<std::uint32_t>((y1 - y0) * (x1 - x0));
            out.set(ox, oy,
                    {static_cast<std::uint8_t>((sum[0] + n / 2) / n), static_cast<std::uint8_t>((sum[1] + n / 2) / n),
                     static_cast<std::uint8_t>((sum[2] + n / 2) / n)});
        }
    }
    return out;
}

Image crop(const Image& img, int x, int y, int w, int h)
{
    if (x < 0 || y < 0 || w < 0 || h < 0 || x + w > img.width || y + h > img.height)
        throw Error(ErrorCode::Range, "crop window outside image");
    Image out(w, h);
    for (int row = 0; row < h; ++row)
        std::memcpy(out.at(0, row), img.at(x, y + row), static_cast<std::size_t>(w) * 3);
    return out;
}

std::vector<std::uint8_t> encode_png(const Image& img)
{
    png_image image;
    std::memset(&image, 0, sizeof(image));
    image.version = PNG_IMAGE_VERSION;
    image.width = static_cast<png_uint_32>(img.width);
    image.height = static_cast<png_uint_32>(img.height);
    image.format = PNG_FORMAT_RGB;

    png_alloc_size_t size = 0;
    if (!png_image_write_to_memory(&image, nullptr, &size, 0, img.pixels.data(), 0, nullptr))
        throw Error(ErrorCode::Io, std::string("png encode: ") + image.message);
    std::vector<std::uint8_t> out(size);
    if (!png_image_write_to_memory(&image, out.data(), &size, 0, img.pixels.data(), 0, nullptr))
        throw Error(ErrorCode::Io, std::string("png encode: ") + image.message);
    out.resize(size);
    return out;
}

Image decode_png(std::span<const std::uint8_t> bytes)
{
    png_image image;
    std::memset(&image, 0, sizeof(image));
    image.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_memory(&image, bytes.data(), bytes.size()))
        throw Error(ErrorCode::Io, std::string("png decode: ") + image.message);
    image.format = PNG_FORMAT_RGB;
    Image out(static_cast<int>(image.width), static_cast<int>(image.height));
    if (!png_image_finish_read(&image, nullptr, out.pixels.data(), 0, nullptr))
    {
        png_image_free(&image);
        throw Error(ErrorCode::Io, std::string("png decode: ") + image.message);
    }
    return out;
}

void write_png(const std::filesystem::path& path, const Image& img)
{
    write_file_atomic(path, encode_png(img));
}

Image read_png(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error(ErrorCode::Io, "cannot open " + path.string());
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return decode_png(bytes);
}

} // namespace pathnav
