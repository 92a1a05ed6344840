#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "proxpose/errors.hpp"

namespace proxpose {

// Interleaved 8-bit RGB raster, row-major.
struct ImageRgb8 {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> pixels; // size = width * height * 3

    ImageRgb8() = default;
    ImageRgb8(int w, int h) : width(w), height(h), pixels(static_cast<size_t>(w) * h * 3, 0) {}

    std::uint8_t* at(int x, int y) {
        return pixels.data() + (static_cast<size_t>(y) * width + x) * 3;
    }
    const std::uint8_t* at(int x, int y) const {
        return pixels.data() + (static_cast<size_t>(y) * width + x) * 3;
    }
    bool empty() const { return width <= 0 || height <= 0; }
};

// 16-bit depth raster in millimeters; 0 marks an invalid measurement.
struct DepthFrame {
    int width = 0;
    int height = 0;
    std::vector<std::uint16_t> values; // size = width * height

    DepthFrame() = default;
    DepthFrame(int w, int h) : width(w), height(h), values(static_cast<size_t>(w) * h, 0) {}

    std::uint16_t& at(int x, int y) { return values[static_cast<size_t>(y) * width + x]; }
    std::uint16_t at(int x, int y) const { return values[static_cast<size_t>(y) * width + x]; }
    bool in_bounds(int x, int y) const { return x >= 0 && x < width && y >= 0 && y < height; }
};

// RGB image bytes (PNG/JPEG/...); format detected from content.
ImageRgb8 decode_image(const std::string& bytes);
ImageRgb8 load_image(const std::string& path);
std::string encode_png(const ImageRgb8& img);
void save_png(const ImageRgb8& img, const std::string& path);

// Depth I/O. PGM is binary P5, maxval 65535, big-endian sample bytes.
// PNG uses a single 16-bit gray channel.
DepthFrame decode_depth_pgm(const std::string& bytes);
std::string encode_depth_pgm(const DepthFrame& frame);
DepthFrame decode_depth_png(const std::string& bytes);
std::string encode_depth_png(const DepthFrame& frame);
// Dispatches on file extension (.pgm / .png).
DepthFrame load_depth(const std::string& path);
void save_depth(const DepthFrame& frame, const std::string& path);

} // namespace proxpose
