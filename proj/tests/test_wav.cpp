#include <catch2/catch_amalgamated.hpp>

#include <cstring>
#include <random>
#include <sstream>

#include "selebi/wav.hpp"

using namespace selebi;

namespace {

Signald integer_grid(Eigen::Index n, int bits, unsigned seed) {
  std::mt19937 gen(seed);
  const std::int32_t full = 1 << (bits - 1);
  std::uniform_int_distribution<std::int32_t> dist(-full, full - 1);
  Vectord x(n);
  for (auto& v : x) v = double(dist(gen)) / full;
  x[0] = -1.0;
  x[1] = double(full - 1) / full;
  return Signald(x, 44100);
}

std::string bytes(std::initializer_list<int> b) {
  std::string s;
  for (int v : b) s.push_back(char(v));
  return s;
}

std::string le32(std::uint32_t v) { return bytes({int(v & 0xFF), int((v >> 8) & 0xFF), int((v >> 16) & 0xFF), int(v >> 24)}); }
std::string le16(std::uint16_t v) { return bytes({v & 0xFF, v >> 8}); }

std::string fmt_chunk(std::uint16_t tag, std::uint16_t ch, std::uint32_t rate, std::uint16_t bits) {
  const std::uint16_t align = std::uint16_t(ch * bits / 8);
  return "fmt " + le32(16) + le16(tag) + le16(ch) + le32(rate) + le32(rate * align) + le16(align) + le16(bits);
}

std::string riff(const std::string& body) { return "RIFF" + le32(std::uint32_t(4 + body.size())) + "WAVE" + body; }

WavData parse(const std::string& s) {
  std::istringstream in(s);
  return read_wav(in);
}

}  // namespace

TEST_CASE("integer PCM round-trips bit-exactly", "[wav]") {
  for (auto [format, bits] : {std::pair{SampleFormat::Pcm16, 16}, std::pair{SampleFormat::Pcm24, 24}}) {
    const auto left = integer_grid(1001, bits, 1);
    const auto right = integer_grid(1001, bits, 2);
    std::stringstream io;
    CHECK(write_wav(io, {left, right}, format) == 0);
    CHECK(io.str().size() == 44 + 1001 * 2 * std::size_t(bits / 8) + ((1001 * 2 * bits / 8) & 1));
    const auto back = read_wav(io);
    CHECK(back.format == format);
    CHECK(back.sample_rate == 44100);
    REQUIRE(back.channels.size() == 2);
    CHECK(back.channels[0].samples == left.samples);
    CHECK(back.channels[1].samples == right.samples);
  }
}

TEST_CASE("float32 round-trips representable values", "[wav]") {
  Vectord x(5);
  x << 0.0, 0.5, -1.75, 3.0, double(float(0.1));
  std::stringstream io;
  CHECK(write_wav(io, {Signald(x, 8000)}, SampleFormat::Float32) == 0);
  const auto back = read_wav(io);
  CHECK(back.format == SampleFormat::Float32);
  CHECK(back.channels[0].samples == x);
}

TEST_CASE("channels are interleaved frame by frame", "[wav]") {
  Vectord a(2), b(2);
  a << 1.0 / 32768, 3.0 / 32768;
  b << 2.0 / 32768, 4.0 / 32768;
  std::stringstream io;
  write_wav(io, {Signald(a, 100), Signald(b, 100)}, SampleFormat::Pcm16);
  CHECK(io.str().substr(44) == bytes({1, 0, 2, 0, 3, 0, 4, 0}));
  CHECK(io.str().substr(0, 4) == "RIFF");
  CHECK(io.str().substr(8, 8) == "WAVEfmt ");
}

TEST_CASE("integer output clamps and counts clipping", "[wav]") {
  Vectord x(6);
  x << 1.0, -1.0, 1.5, -2.0, 0.99999, -1.00001;
  std::stringstream io;
  CHECK(write_wav(io, {Signald(x, 100)}, SampleFormat::Pcm16) == 4);
  const auto y = read_wav(io).channels[0].samples;
  CHECK(y[0] == 32767.0 / 32768);
  CHECK(y[1] == -1.0);
  CHECK(y[2] == 32767.0 / 32768);
  CHECK(y[3] == -1.0);
  CHECK(y[4] == 32767.0 / 32768);
  std::stringstream io24;
  CHECK(write_wav(io24, {Signald(x, 100)}, SampleFormat::Pcm24) == 4);
}

TEST_CASE("reader skips unknown chunks and accepts the extensible tag", "[wav]") {
  const std::string data = "data" + le32(4) + le16(0x4000) + le16(0xC000);
  const auto w = parse(riff(fmt_chunk(1, 1, 16000, 16) + "LIST" + le32(3) + "abc" + bytes({0}) + data));
  REQUIRE(w.frames() == 2);
  CHECK(w.channels[0].samples[0] == 0.5);
  CHECK(w.channels[0].samples[1] == -0.5);

  std::string ext = "fmt " + le32(40) + le16(0xFFFE) + le16(1) + le32(16000) + le32(48000) + le16(3) + le16(24) +
                    le16(22) + le16(24) + le32(4) + le16(1) + std::string(14, '\0');
  const auto e = parse(riff(ext + "data" + le32(3) + bytes({0, 0, 0x80})));
  CHECK(e.format == SampleFormat::Pcm24);
  CHECK(e.channels[0].samples[0] == -1.0);
  CHECK(parse(riff(fmt_chunk(1, 2, 16000, 16) + "data" + le32(0))).frames() == 0);
}

TEST_CASE("corrupt or unsupported files raise WavError", "[wav]") {
  const std::string fmt = fmt_chunk(1, 1, 16000, 16);
  CHECK_THROWS_AS(parse(""), WavError);
  CHECK_THROWS_AS(parse("RIFX" + le32(4) + "WAVE"), WavError);
  CHECK_THROWS_AS(parse(riff(fmt)), WavError);
  CHECK_THROWS_AS(parse(riff("data" + le32(2) + bytes({0, 0}))), WavError);
  CHECK_THROWS_AS(parse(riff(fmt + "data" + le32(8) + bytes({0, 0}))), WavError);
  CHECK_THROWS_AS(parse(riff(fmt + "data" + le32(3) + bytes({0, 0, 0}))), WavError);
  CHECK_THROWS_AS(parse(riff(fmt_chunk(1, 1, 16000, 8) + "data" + le32(1) + bytes({0}))), WavError);
  CHECK_THROWS_AS(parse(riff(fmt_chunk(1, 0, 16000, 16) + "data" + le32(0))), WavError);
  CHECK_THROWS_AS(parse(riff(fmt_chunk(3, 1, 16000, 32) + "data" + le32(4) + bytes({0, 0, 0xC0, 0x7F}))), WavError);
  CHECK_THROWS_AS(read_wav("/nonexistent/file.wav"), WavError);
}
