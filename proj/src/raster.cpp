#include "proxpose/raster.hpp"

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>

#include <cctype>
#include <sstream>

#include "proxpose/annotations.hpp" // read_file / write_file

namespace proxpose {

namespace {

cv::Mat decode_cv(const std::string& bytes, int flags, const char* what) {
    cv::Mat buf(1, static_cast<int>(bytes.size()), CV_8UC1,
                const_cast<char*>(bytes.data()));
    cv::Mat img = cv::imdecode(buf, flags);
    if (img.empty()) throw IoError(std::string("cannot decode ") + what);
    return img;
}

std::string extension_of(const std::string& path) {
    auto dot = path.find_last_of('.');
    if (dot == std::string::npos) return "";
    std::string ext = path.substr(dot + 1);
    for (auto& c : ext) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return ext;
}

} // namespace

ImageRgb8 decode_image(const std::string& bytes) {
    cv::Mat bgr = decode_cv(bytes, cv::IMREAD_COLOR, "raster image");
    ImageRgb8 out(bgr.cols, bgr.rows);
    for (int y = 0; y < bgr.rows; ++y) {
        const cv::Vec3b* row = bgr.ptr<cv::Vec3b>(y);
        for (int x = 0; x < bgr.cols; ++x) {
            std::uint8_t* px = out.at(x, y);
            px[0] = row[x][2];
            px[1] = row[x][1];
            px[2] = row[x][0];
        }
    }
    return out;
}

ImageRgb8 load_image(const std::string& path) { return decode_image(read_file(path)); }

std::string encode_png(const ImageRgb8& img) {
    if (img.empty()) throw ConfigError("cannot encode an empty image");
    cv::Mat bgr(img.height, img.width, CV_8UC3);
    for (int y = 0; y < img.height; ++y) {
        cv::Vec3b* row = bgr.ptr<cv::Vec3b>(y);
        for (int x = 0; x < img.width; ++x) {
            const std::uint8_t* px = img.at(x, y);
            row[x] = cv::Vec3b(px[2], px[1], px[0]);
        }
    }
    std::vector<uchar> buf;
    if (!cv::imencode(".png", bgr, buf)) throw IoError("PNG encode failed");
    return std::string(buf.begin(), buf.end());
}

void save_png(const ImageRgb8& img, const std::string& path) {
    write_file(path, encode_png(img));
}

DepthFrame decode_depth_pgm(const std::string& bytes) {
    std::istringstream in(bytes);
    auto next_token = [&in]() -> std::string {
        std::string tok;
        for (;;) {
            int c = in.peek();
            if (c == EOF) throw ParseError("PGM: truncated header");
            if (std::isspace(c)) { in.get(); continue; }
            if (c == '#') { std::string line; std::getline(in, line); continue; }
            in >> tok;
            return tok;
        }
    };
    if (next_token() != "P5") throw ParseError("PGM: not a binary P5 file");
    int w = 0, h = 0;
    long maxval = 0;
    try {
        w = std::stoi(next_token());
        h = std::stoi(next_token());
        maxval = std::stol(next_token());
    } catch (const std::exception&) {
        throw ParseError("PGM: malformed header");
    }
    if (w < 1 || h < 1) throw ParseError("PGM: non-positive dimensions");
    if (maxval != 65535) throw ParseError("PGM: expected maxval 65535");
    in.get(); // single whitespace byte after maxval

    DepthFrame frame(w, h);
    const size_t need = static_cast<size_t>(w) * h * 2;
    const size_t pos = static_cast<size_t>(in.tellg());
    if (bytes.size() < pos + need) throw ParseError("PGM: truncated pixel data");
    const auto* p = reinterpret_cast<const std::uint8_t*>(bytes.data()) + pos;
    for (size_t i = 0; i < frame.values.size(); ++i) {
        frame.values[i] = static_cast<std::uint16_t>((p[2 * i] << 8) | p[2 * i + 1]);
    }
    return frame;
}

std::string encode_depth_pgm(const DepthFrame& frame) {
    if (frame.width < 1 || frame.height < 1)
        throw ConfigError("cannot encode an empty depth frame");
    std::string out = "P5\n" + std::to_string(frame.width) + " " +
                      std::to_string(frame.height) + "\n65535\n";
    out.reserve(out.size() + frame.values.size() * 2);
    for (std::uint16_t v : frame.values) {
        out.push_back(static_cast<char>(v >> 8));
        out.push_back(static_cast<char>(v & 0xFF));
    }
    return out;
}

DepthFrame decode_depth_png(const std::string& bytes) {
    cv::Mat img = decode_cv(bytes, cv::IMREAD_UNCHANGED, "depth PNG");
    if (img.type() != CV_16UC1)
        throw ParseError("depth PNG: expected a single 16-bit gray channel");
    DepthFrame frame(img.cols, img.rows);
    for (int y = 0; y < img.rows; ++y) {
        const std::uint16_t* row = img.ptr<std::uint16_t>(y);
        for (int x = 0; x < img.cols; ++x) frame.at(x, y) = row[x];
    }
    return frame;
}

std::string encode_depth_png(const DepthFrame& frame) {
    if (frame.width < 1 || frame.height < 1)
        throw ConfigError("cannot encode an empty depth frame");
    cv::Mat img(frame.height, frame.width, CV_16UC1);
    for (int y = 0; y < frame.height; ++y) {
        std::uint16_t* row = img.ptr<std::uint16_t>(y);
        for (int x = 0; x < frame.width; ++x) row[x] = frame.at(x, y);
    }
    std::vector<uchar> buf;
    if (!cv::imencode(".png", img, buf)) throw IoError("depth PNG encode failed");
    return std::string(buf.begin(), buf.end());
}

DepthFrame load_depth(const std::string& path) {
    const std::string ext = extension_of(path);
    const std::string bytes = read_file(path);
    if (ext == "pgm") return decode_depth_pgm(bytes);
    if (ext == "png") return decode_depth_png(bytes);
    throw ConfigError("unsupported depth format '." + ext + "' (want .pgm or .png)");
}

void save_depth(const DepthFrame& frame, const std::string& path) {
    const std::string ext = extension_of(path);
    if (ext == "pgm") return write_file(path, encode_depth_pgm(frame));
    if (ext == "png") return write_file(path, encode_depth_png(frame));
    throw ConfigError("unsupported depth format '." + ext + "' (want .pgm or .png)");
}

} // namespace proxpose
