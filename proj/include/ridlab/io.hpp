#pragma once

#include "ridlab/sigmodel.hpp"
#include "ridlab/tfa.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace ridlab::io {

namespace fs = std::filesystem;

std::string sha256_hex(std::string_view bytes);
std::string sha256_file(const fs::path& path);

/// Little-endian binary encoder.
class ByteWriter {
  public:
    void bytes(std::string_view b) { out_.append(b); }
    void u8(std::uint8_t v) { out_.push_back(static_cast<char>(v)); }
    void u32(std::uint32_t v);
    void f32(float v);
    void f64(double v);
    const std::string& str() const { return out_; }

  private:
    std::string out_;
};

/// Little-endian binary decoder over an in-memory buffer; throws MissingInputError on
/// truncation.
class ByteReader {
  public:
    explicit ByteReader(std::string data, std::string source = "buffer")
        : data_(std::move(data)), source_(std::move(source)) {}
    std::string bytes(std::size_t n);
    std::uint8_t u8();
    std::uint32_t u32();
    float f32();
    double f64();
    bool at_end() const { return pos_ == data_.size(); }

  private:
    void need(std::size_t n) const;
    std::string data_;
    std::string source_;
    std::size_t pos_ = 0;
};

std::string read_file(const fs::path& path);
void write_file(const fs::path& path, std::string_view bytes);

/// "CSER" v1: magic, u32 version, u32 length, f64 sample_rate, f64 start_time,
/// then interleaved f32 (re, im).
std::string encode_cser(const sigmodel::ComplexSeries& series);
sigmodel::ComplexSeries decode_cser(const std::string& bytes, const std::string& source = "buffer");
void write_cser(const fs::path& path, const sigmodel::ComplexSeries& series);
sigmodel::ComplexSeries read_cser(const fs::path& path);

/// "TFRB" v1: magic, u32 version, u32 rows, u32 cols, u32 dtype (0 = f32),
/// f64 time_start, time_step, freq_start, freq_step, row-major f32 payload.
std::string encode_tfrb(const tfa::TimeFrequencyGrid& grid);
tfa::TimeFrequencyGrid decode_tfrb(const std::string& bytes, const std::string& source = "buffer");
void write_tfrb(const fs::path& path, const tfa::TimeFrequencyGrid& grid);
tfa::TimeFrequencyGrid read_tfrb(const fs::path& path);

/// 8-bit grayscale image, row 0 at the top.
struct GrayImage {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> pixels;
};

void write_png(const fs::path& path, const GrayImage& image);
GrayImage read_png(const fs::path& path);

/// Maps values linearly from [0, scale] to [0, 255].
GrayImage to_gray(const std::vector<double>& row_major, int width, int height, double scale);

/// Grayscale export of a TFR with the lowest frequency in the bottom image row.
void write_tfr_png(const fs::path& path, const tfa::TimeFrequencyGrid& grid);

}  // namespace ridlab::io
