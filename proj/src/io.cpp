#include "ridlab/io.hpp"

#include "ridlab/errors.hpp"

#include <openssl/evp.h>
#include <png.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>
#include <sstream>

namespace ridlab::io {

namespace {

constexpr std::uint32_t kFormatVersion = 1;

std::string to_hex(const unsigned char* data, unsigned len) {
    static const char* digits = "0123456789abcdef";
    std::string s(2 * len, '0');
    for (unsigned i = 0; i < len; ++i) {
        s[2 * i] = digits[data[i] >> 4];
        s[2 * i + 1] = digits[data[i] & 0xF];
    }
    return s;
}

void expect_magic(ByteReader& r, std::string_view magic, const std::string& source) {
    if (r.bytes(4) != magic)
        throw MissingInputError(source + ": not a " + std::string(magic) + " file");
    const std::uint32_t version = r.u32();
    if (version != kFormatVersion)
        throw MissingInputError(source + ": unsupported " + std::string(magic) + " version " +
                                std::to_string(version));
}

struct FileCloser {
    void operator()(std::FILE* f) const {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

}  // namespace

std::string sha256_hex(std::string_view bytes) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1)
        throw std::runtime_error("SHA-256 digest failed");
    return to_hex(md, len);
}

std::string sha256_file(const fs::path& path) { return sha256_hex(read_file(path)); }

void ByteWriter::u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) u8(static_cast<std::uint8_t>(v >> (8 * i)));
}

void ByteWriter::f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }

void ByteWriter::f64(double v) {
    const auto bits = std::bit_cast<std::uint64_t>(v);
    for (int i = 0; i < 8; ++i) u8(static_cast<std::uint8_t>(bits >> (8 * i)));
}

void ByteReader::need(std::size_t n) const {
    if (data_.size() - pos_ < n) throw MissingInputError(source_ + ": truncated data");
}

std::string ByteReader::bytes(std::size_t n) {
    need(n);
    std::string s = data_.substr(pos_, n);
    pos_ += n;
    return s;
}

std::uint8_t ByteReader::u8() {
    need(1);
    return static_cast<std::uint8_t>(data_[pos_++]);
}

std::uint32_t ByteReader::u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(u8()) << (8 * i);
    return v;
}

float ByteReader::f32() { return std::bit_cast<float>(u32()); }

double ByteReader::f64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(u8()) << (8 * i);
    return std::bit_cast<double>(v);
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw MissingInputError("cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const fs::path& path, std::string_view bytes) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

std::string encode_cser(const sigmodel::ComplexSeries& series) {
    ByteWriter w;
    w.bytes("CSER");
    w.u32(kFormatVersion);
    w.u32(static_cast<std::uint32_t>(series.size()));
    w.f64(series.sample_rate);
    w.f64(series.start_time);
    for (const auto& s : series.samples) {
        w.f32(static_cast<float>(s.real()));
        w.f32(static_cast<float>(s.imag()));
    }
    return w.str();
}

sigmodel::ComplexSeries decode_cser(const std::string& bytes, const std::string& source) {
    ByteReader r(bytes, source);
    expect_magic(r, "CSER", source);
    const std::uint32_t n = r.u32();
    sigmodel::ComplexSeries s;
    s.sample_rate = r.f64();
    s.start_time = r.f64();
    s.samples.resize(n);
    for (auto& v : s.samples) {
        const float re = r.f32();
        const float im = r.f32();
        v = {re, im};
    }
    return s;
}

void write_cser(const fs::path& path, const sigmodel::ComplexSeries& series) {
    write_file(path, encode_cser(series));
}

sigmodel::ComplexSeries read_cser(const fs::path& path) {
    return decode_cser(read_file(path), path.string());
}

std::string encode_tfrb(const tfa::TimeFrequencyGrid& grid) {
    ByteWriter w;
    w.bytes("TFRB");
    w.u32(kFormatVersion);
    w.u32(static_cast<std::uint32_t>(grid.rows()));
    w.u32(static_cast<std::uint32_t>(grid.cols()));
    w.u32(0);
    w.f64(grid.time_axis.start);
    w.f64(grid.time_axis.step);
    w.f64(grid.freq_axis.start);
    w.f64(grid.freq_axis.step);
    for (double v : grid.values()) w.f32(static_cast<float>(v));
    return w.str();
}

tfa::TimeFrequencyGrid decode_tfrb(const std::string& bytes, const std::string& source) {
    ByteReader r(bytes, source);
    expect_magic(r, "TFRB", source);
    const std::uint32_t rows = r.u32();
    const std::uint32_t cols = r.u32();
    if (r.u32() != 0) throw MissingInputError(source + ": unsupported TFRB dtype");
    tfa::Axis time{r.f64(), 0.0};
    time.step = r.f64();
    tfa::Axis freq{r.f64(), 0.0};
    freq.step = r.f64();
    tfa::TimeFrequencyGrid g(rows, cols, time, freq);
    for (double& v : g.values()) v = r.f32();
    const double peak = g.max_value();
    if (peak == 1.0) g.tag = tfa::Normalization::UnitMax;
    return g;
}

void write_tfrb(const fs::path& path, const tfa::TimeFrequencyGrid& grid) {
    write_file(path, encode_tfrb(grid));
}

tfa::TimeFrequencyGrid read_tfrb(const fs::path& path) {
    return decode_tfrb(read_file(path), path.string());
}

void write_png(const fs::path& path, const GrayImage& image) {
    require(image.width > 0 && image.height > 0 &&
                image.pixels.size() == static_cast<std::size_t>(image.width) * image.height,
            "malformed image");
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    FilePtr file(std::fopen(path.c_str(), "wb"));
    if (!file) throw std::runtime_error("cannot write " + path.string());
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        png_destroy_write_struct(&png, &info);
        throw std::runtime_error("libpng initialisation failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw std::runtime_error("PNG encoding failed: " + path.string());
    }
    png_init_io(png, file.get());
    png_set_IHDR(png, info, image.width, image.height, 8, PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE,
                 PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_set_compression_level(png, 6);
    png_write_info(png, info);
    for (int y = 0; y < image.height; ++y)
        png_write_row(png, image.pixels.data() + static_cast<std::size_t>(y) * image.width);
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

GrayImage read_png(const fs::path& path) {
    FilePtr file(std::fopen(path.c_str(), "rb"));
    if (!file) throw MissingInputError("cannot read " + path.string());
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw std::runtime_error("libpng initialisation failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw MissingInputError("PNG decoding failed: " + path.string());
    }
    png_init_io(png, file.get());
    png_read_info(png, info);
    GrayImage img;
    img.width = static_cast<int>(png_get_image_width(png, info));
    img.height = static_cast<int>(png_get_image_height(png, info));
    const auto color = png_get_color_type(png, info);
    const auto depth = png_get_bit_depth(png, info);
    if (color != PNG_COLOR_TYPE_GRAY || depth != 8) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw MissingInputError("expected 8-bit grayscale PNG: " + path.string());
    }
    img.pixels.resize(static_cast<std::size_t>(img.width) * img.height);
    for (int y = 0; y < img.height; ++y)
        png_read_row(png, img.pixels.data() + static_cast<std::size_t>(y) * img.width, nullptr);
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);
    return img;
}

GrayImage to_gray(const std::vector<double>& row_major, int width, int height, double scale) {
    require(row_major.size() == static_cast<std::size_t>(width) * height, "image size mismatch");
    GrayImage img{width, height, std::vector<std::uint8_t>(row_major.size(), 0)};
    if (!(scale > 0.0)) return img;
    for (std::size_t i = 0; i < row_major.size(); ++i) {
        const double v = std::clamp(row_major[i] / scale, 0.0, 1.0);
        img.pixels[i] = static_cast<std::uint8_t>(std::lround(255.0 * v));
    }
    return img;
}

void write_tfr_png(const fs::path& path, const tfa::TimeFrequencyGrid& grid) {
    const int w = static_cast<int>(grid.cols());
    const int h = static_cast<int>(grid.rows());
    std::vector<double> flipped(grid.values().size());
    for (int r = 0; r < h; ++r)
        for (int c = 0; c < w; ++c)
            flipped[static_cast<std::size_t>(h - 1 - r) * w + c] = grid.at(r, c);
    write_png(path, to_gray(flipped, w, h, grid.max_value()));
}

}  // namespace ridlab::io
