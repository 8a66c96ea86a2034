#include <doctest.h>

#include "ridlab/errors.hpp"
#include "ridlab/io.hpp"

#include <filesystem>

using namespace ridlab;
using namespace ridlab::io;

TEST_SUITE("io") {

TEST_CASE("SHA-256 reference vectors") {
    CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
}

TEST_CASE("CSER round trip at f32 precision and a fixed layout") {
    sigmodel::ComplexSeries s;
    s.sample_rate = 1000.0;
    s.start_time = 0.25;
    s.samples = {{1.0, -2.0}, {0.1, 0.2}, {3.5, 0.0}};
    const auto bytes = encode_cser(s);
    CHECK(bytes.size() == 4 + 4 + 4 + 8 + 8 + 3 * 8);
    CHECK(bytes.substr(0, 4) == "CSER");
    const auto back = decode_cser(bytes);
    CHECK(back.sample_rate == 1000.0);
    CHECK(back.start_time == 0.25);
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(back.samples[i].real() == static_cast<float>(s.samples[i].real()));
        CHECK(back.samples[i].imag() == static_cast<float>(s.samples[i].imag()));
    }
    CHECK(encode_cser(back) == bytes);
    CHECK_THROWS_AS(decode_cser(bytes.substr(0, 30)), MissingInputError);
    CHECK_THROWS_AS(decode_cser("TFRB" + bytes.substr(4)), MissingInputError);
}

TEST_CASE("TFRB round trip keeps axes and payload") {
    tfa::TimeFrequencyGrid g(3, 2, tfa::Axis{0.1, 0.01}, tfa::Axis{-500.0, 250.0});
    for (std::size_t i = 0; i < 6; ++i) g.values()[i] = 0.125 * i;
    const auto bytes = encode_tfrb(g);
    CHECK(bytes.size() == 4 + 4 * 4 + 4 * 8 + 6 * 4);
    const auto back = decode_tfrb(bytes);
    CHECK(back.rows() == 3);
    CHECK(back.cols() == 2);
    CHECK(back.values() == g.values());
    CHECK(back.freq_axis.start == -500.0);
    CHECK(back.time_axis.step == 0.01);
    CHECK(encode_tfrb(back) == bytes);
    std::string bad = bytes;
    bad[4] = 9;
    CHECK_THROWS_AS(decode_tfrb(bad), MissingInputError);
}

TEST_CASE("PNG round trip and deterministic encoding") {
    GrayImage img{5, 3, {}};
    for (int i = 0; i < 15; ++i) img.pixels.push_back(static_cast<std::uint8_t>(i * 17));
    const auto dir = std::filesystem::temp_directory_path() / "ridlab_io_test";
    write_png(dir / "a.png", img);
    write_png(dir / "b.png", img);
    CHECK(read_file(dir / "a.png") == read_file(dir / "b.png"));
    const auto back = read_png(dir / "a.png");
    CHECK(back.width == 5);
    CHECK(back.height == 3);
    CHECK(back.pixels == img.pixels);
    CHECK_THROWS_AS(read_png(dir / "missing.png"), MissingInputError);
    std::filesystem::remove_all(dir);

    const auto gray = to_gray({0.0, 0.5, 1.0, 2.0}, 2, 2, 1.0);
    CHECK(gray.pixels == std::vector<std::uint8_t>{0, 128, 255, 255});
}

}
