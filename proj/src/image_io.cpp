#include "sodkit/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <sstream>
#include <stdexcept>

namespace sodkit {

ImageU8::ImageU8(int c, int h, int w, std::uint8_t fill) : channels(c), height(h), width(w) {
    if ((c != 1 && c != 3) || h <= 0 || w <= 0)
        throw std::invalid_argument("ImageU8: bad shape");
    data.assign(static_cast<std::size_t>(c) * h * w, fill);
}

namespace {

std::string lower_ext(const std::string& path) {
    const auto dot = path.rfind('.');
    if (dot == std::string::npos) return "";
    std::string ext = path.substr(dot + 1);
    std::transform(ext.begin(), ext.end(), ext.begin(),
                   [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
    return ext;
}

int read_pnm_token(std::istream& is) {
    // Skips whitespace and '#' comments.
    for (;;) {
        int ch = is.peek();
        if (ch == '#') {
            std::string line;
            std::getline(is, line);
        } else if (std::isspace(ch)) {
            is.get();
        } else {
            break;
        }
    }
    int value;
    if (!(is >> value)) throw std::runtime_error("malformed PNM header");
    return value;
}

ImageU8 read_pnm(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open image: " + path);
    char p, kind;
    is.get(p);
    is.get(kind);
    if (p != 'P' || (kind != '5' && kind != '6'))
        throw std::runtime_error("unsupported PNM type (need P5/P6): " + path);
    const int w = read_pnm_token(is);
    const int h = read_pnm_token(is);
    const int maxval = read_pnm_token(is);
    if (maxval != 255)
        throw std::runtime_error("only 8-bit PNM supported: " + path);
    is.get();  // single whitespace after maxval
    ImageU8 img(kind == '5' ? 1 : 3, h, w);
    is.read(reinterpret_cast<char*>(img.data.data()),
            static_cast<std::streamsize>(img.data.size()));
    if (!is) throw std::runtime_error("truncated PNM payload: " + path);
    return img;
}

void write_pnm(const std::string& path, const ImageU8& img) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open for writing: " + path);
    os << (img.channels == 1 ? "P5" : "P6") << "\n"
       << img.width << " " << img.height << "\n255\n";
    os.write(reinterpret_cast<const char*>(img.data.data()),
             static_cast<std::streamsize>(img.data.size()));
    if (!os) throw std::runtime_error("write failure: " + path);
}

struct FileCloser {
    void operator()(std::FILE* f) const {
        if (f) std::fclose(f);
    }
};

ImageU8 read_png(const std::string& path) {
    std::unique_ptr<std::FILE, FileCloser> fp(std::fopen(path.c_str(), "rb"));
    if (!fp) throw std::runtime_error("cannot open image: " + path);

    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw std::runtime_error("libpng init failure");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw std::runtime_error("malformed PNG: " + path);
    }
    png_init_io(png, fp.get());
    png_read_info(png, info);

    png_uint_32 w, h;
    int bit_depth, color_type;
    png_get_IHDR(png, info, &w, &h, &bit_depth, &color_type, nullptr, nullptr, nullptr);
    if (bit_depth == 16) png_set_strip_16(png);
    if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
    if (color_type == PNG_COLOR_TYPE_GRAY && bit_depth < 8) png_set_expand_gray_1_2_4_to_8(png);
    if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
    if (color_type & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
    png_read_update_info(png, info);

    const int channels = png_get_channels(png, info);
    if (channels != 1 && channels != 3) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw std::runtime_error("unsupported PNG channel count: " + path);
    }
    ImageU8 img(channels, static_cast<int>(h), static_cast<int>(w));
    std::vector<png_bytep> rows(h);
    for (png_uint_32 y = 0; y < h; ++y)
        rows[y] = img.data.data() + static_cast<std::size_t>(y) * w * channels;
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);
    return img;
}

void write_png(const std::string& path, const ImageU8& img) {
    std::unique_ptr<std::FILE, FileCloser> fp(std::fopen(path.c_str(), "wb"));
    if (!fp) throw std::runtime_error("cannot open for writing: " + path);

    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        png_destroy_write_struct(&png, &info);
        throw std::runtime_error("libpng init failure");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw std::runtime_error("PNG write failure: " + path);
    }
    png_init_io(png, fp.get());
    png_set_IHDR(png, info, img.width, img.height, 8,
                 img.channels == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    // Fixed settings keep the byte stream reproducible across runs.
    png_set_compression_level(png, 6);
    png_write_info(png, info);
    std::vector<png_bytep> rows(img.height);
    for (int y = 0; y < img.height; ++y)
        rows[y] = const_cast<png_bytep>(
            img.data.data() + static_cast<std::size_t>(y) * img.width * img.channels);
    png_write_image(png, rows.data());
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

}  // namespace

ImageU8 read_image(const std::string& path) {
    const std::string ext = lower_ext(path);
    if (ext == "png") return read_png(path);
    if (ext == "pgm" || ext == "ppm") return read_pnm(path);
    throw std::runtime_error("unsupported image format: " + path);
}

void write_image(const std::string& path, const ImageU8& img) {
    const std::string ext = lower_ext(path);
    if (ext == "png") return write_png(path, img);
    if (ext == "pgm" || ext == "ppm") {
        if ((ext == "pgm") != (img.channels == 1))
            throw std::runtime_error("channel count does not match PNM extension: " + path);
        return write_pnm(path, img);
    }
    throw std::runtime_error("unsupported image format: " + path);
}

ImageU8 to_image(const DepthMap& depth) {
    ImageU8 img(1, depth.height, depth.width);
    img.data = depth.intensities;
    return img;
}

DepthMap to_depth(const ImageU8& img) {
    DepthMap d(img.height, img.width);
    if (img.channels == 1) {
        d.intensities = img.data;
    } else {
        for (int y = 0; y < img.height; ++y)
            for (int x = 0; x < img.width; ++x) {
                const double luma = 0.299 * img.at(y, x, 0) + 0.587 * img.at(y, x, 1) +
                                    0.114 * img.at(y, x, 2);
                d.at(y, x) = static_cast<std::uint8_t>(std::lround(luma));
            }
    }
    return d;
}

ImageU8 to_image(const HhaImage& hha) {
    ImageU8 img(3, hha.height, hha.width);
    for (int y = 0; y < hha.height; ++y)
        for (int x = 0; x < hha.width; ++x) {
            const std::size_t i = static_cast<std::size_t>(y) * hha.width + x;
            for (int c = 0; c < 3; ++c) img.at(y, x, c) = hha.channels[c][i];
        }
    return img;
}

ImageU8 resize_bilinear_u8(const ImageU8& img, int out_h, int out_w) {
    if (out_h == img.height && out_w == img.width) return img;
    ImageU8 out(img.channels, out_h, out_w);
    const double sy = static_cast<double>(img.height) / out_h;
    const double sx = static_cast<double>(img.width) / out_w;
    for (int y = 0; y < out_h; ++y) {
        double fy = std::clamp((y + 0.5) * sy - 0.5, 0.0, static_cast<double>(img.height - 1));
        const int y0 = static_cast<int>(fy);
        const int y1 = std::min(y0 + 1, img.height - 1);
        const double wy = fy - y0;
        for (int x = 0; x < out_w; ++x) {
            double fx = std::clamp((x + 0.5) * sx - 0.5, 0.0, static_cast<double>(img.width - 1));
            const int x0 = static_cast<int>(fx);
            const int x1 = std::min(x0 + 1, img.width - 1);
            const double wx = fx - x0;
            for (int c = 0; c < img.channels; ++c) {
                const double top = img.at(y0, x0, c) + (img.at(y0, x1, c) - static_cast<double>(img.at(y0, x0, c))) * wx;
                const double bot = img.at(y1, x0, c) + (img.at(y1, x1, c) - static_cast<double>(img.at(y1, x0, c))) * wx;
                out.at(y, x, c) = static_cast<std::uint8_t>(
                    std::clamp(std::floor(top + (bot - top) * wy + 0.5), 0.0, 255.0));
            }
        }
    }
    return out;
}

}  // namespace sodkit
