#ifndef SODKIT_IMAGE_IO_HPP
#define SODKIT_IMAGE_IO_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "sodkit/depth.hpp"

namespace sodkit {

// 8-bit interleaved image, 1 (gray) or 3 (RGB) channels.
struct ImageU8 {
    int channels = 0;
    int height = 0;
    int width = 0;
    std::vector<std::uint8_t> data;  // row-major, interleaved

    ImageU8() = default;
    ImageU8(int c, int h, int w, std::uint8_t fill = 0);
    std::uint8_t at(int y, int x, int c) const {
        return data[(static_cast<std::size_t>(y) * width + x) * channels + c];
    }
    std::uint8_t& at(int y, int x, int c) {
        return data[(static_cast<std::size_t>(y) * width + x) * channels + c];
    }
};

// Dispatches on extension: .png, .pgm (P5), .ppm (P6). 8-bit only.
ImageU8 read_image(const std::string& path);
void write_image(const std::string& path, const ImageU8& img);

ImageU8 to_image(const DepthMap& depth);
DepthMap to_depth(const ImageU8& img);  // converts RGB to luma if needed
ImageU8 to_image(const HhaImage& hha);

ImageU8 resize_bilinear_u8(const ImageU8& img, int out_h, int out_w);

}  // namespace sodkit

#endif
