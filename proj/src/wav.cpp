#include "selebi/wav.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

namespace selebi {

std::string to_string(SampleFormat f) {
  switch (f) {
    case SampleFormat::Pcm16: return "pcm16";
    case SampleFormat::Pcm24: return "pcm24";
    case SampleFormat::Float32: return "float32";
  }
  throw std::invalid_argument("invalid sample format");
}

namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

std::uint32_t le32(const unsigned char* p) {
  return std::uint32_t(p[0]) | std::uint32_t(p[1]) << 8 | std::uint32_t(p[2]) << 16 | std::uint32_t(p[3]) << 24;
}

std::uint16_t le16(const unsigned char* p) { return std::uint16_t(p[0] | p[1] << 8); }

void put16(std::ostream& out, std::uint16_t v) {
  const char b[2] = {char(v & 0xFF), char(v >> 8)};
  out.write(b, 2);
}

void put32(std::ostream& out, std::uint32_t v) {
  const char b[4] = {char(v & 0xFF), char((v >> 8) & 0xFF), char((v >> 16) & 0xFF), char(v >> 24)};
  out.write(b, 4);
}

void read_exact(std::istream& in, unsigned char* dst, std::size_t n, const char* what) {
  in.read(reinterpret_cast<char*>(dst), std::streamsize(n));
  if (std::size_t(in.gcount()) != n) throw WavError(std::string("truncated WAV file (") + what + ")");
}

int bytes_per_sample(SampleFormat f) { return f == SampleFormat::Pcm16 ? 2 : f == SampleFormat::Pcm24 ? 3 : 4; }

}  // namespace

WavData read_wav(std::istream& in) {
  unsigned char riff[12];
  read_exact(in, riff, 12, "header");
  if (std::memcmp(riff, "RIFF", 4) != 0 || std::memcmp(riff + 8, "WAVE", 4) != 0)
    throw WavError("not a RIFF/WAVE file");

  bool have_fmt = false;
  int channels = 0;
  WavData wav;
  std::vector<unsigned char> data;
  bool have_data = false;
  while (!have_data) {
    unsigned char head[8];
    in.read(reinterpret_cast<char*>(head), 8);
    if (in.gcount() == 0) break;
    if (in.gcount() != 8) throw WavError("truncated WAV file (chunk header)");
    const std::uint32_t size = le32(head + 4);
    if (std::memcmp(head, "fmt ", 4) == 0) {
      if (size < 16) throw WavError("fmt chunk too short");
      std::vector<unsigned char> fmt(size + (size & 1));
      read_exact(in, fmt.data(), fmt.size(), "fmt chunk");
      std::uint16_t tag = le16(&fmt[0]);
      channels = le16(&fmt[2]);
      const std::uint32_t rate = le32(&fmt[4]);
      const int bits = le16(&fmt[14]);
      if (tag == kFormatExtensible) {
        if (size < 40) throw WavError("extensible fmt chunk too short");
        tag = le16(&fmt[24]);
      }
      if (tag == kFormatPcm && bits == 16) wav.format = SampleFormat::Pcm16;
      else if (tag == kFormatPcm && bits == 24) wav.format = SampleFormat::Pcm24;
      else if (tag == kFormatFloat && bits == 32) wav.format = SampleFormat::Float32;
      else
        throw WavError("unsupported sample format (tag " + std::to_string(tag) + ", " + std::to_string(bits) +
                       " bits); expected PCM16, PCM24 or float32");
      if (channels < 1) throw WavError("WAV file has no channels");
      if (rate == 0 || rate > 0x7FFFFFFF) throw WavError("invalid sample rate");
      if (le16(&fmt[12]) != channels * bytes_per_sample(wav.format)) throw WavError("inconsistent block alignment");
      wav.sample_rate = int(rate);
      have_fmt = true;
    } else if (std::memcmp(head, "data", 4) == 0) {
      if (!have_fmt) throw WavError("data chunk before fmt chunk");
      data.resize(size);
      read_exact(in, data.data(), size, "data chunk");
      have_data = true;
    } else {
      in.ignore(std::streamsize(size) + (size & 1));
      if (!in) throw WavError("truncated WAV file (chunk body)");
    }
  }
  if (!have_fmt) throw WavError("missing fmt chunk");
  if (!have_data) throw WavError("missing data chunk");

  const int width = bytes_per_sample(wav.format);
  const std::size_t block = std::size_t(width) * channels;
  if (data.size() % block != 0) throw WavError("data chunk is not a whole number of frames");
  const auto frames = Eigen::Index(data.size() / block);
  std::vector<Vectord> out(channels, Vectord(frames));
  const unsigned char* p = data.data();
  for (Eigen::Index n = 0; n < frames; ++n)
    for (int c = 0; c < channels; ++c, p += width) {
      double v = 0.0;
      switch (wav.format) {
        case SampleFormat::Pcm16: v = std::int16_t(le16(p)) / 32768.0; break;
        case SampleFormat::Pcm24: {
          std::int32_t s = std::int32_t(p[0] | p[1] << 8 | p[2] << 16);
          if (s & 0x800000) s -= 0x1000000;
          v = s / 8388608.0;
          break;
        }
        case SampleFormat::Float32: {
          const std::uint32_t bitsv = le32(p);
          float f;
          std::memcpy(&f, &bitsv, 4);
          if (!std::isfinite(f)) throw WavError("float sample is NaN or infinite");
          v = f;
          break;
        }
      }
      out[c][n] = v;
    }
  for (auto& ch : out) wav.channels.emplace_back(std::move(ch), wav.sample_rate);
  return wav;
}

WavData read_wav(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw WavError("cannot open '" + path + "'");
  return read_wav(in);
}

Eigen::Index write_wav(std::ostream& out, const std::vector<Signald>& channels, SampleFormat format) {
  if (channels.empty()) throw std::invalid_argument("no channels to write");
  const Eigen::Index frames = channels.front().length();
  const int rate = channels.front().sample_rate;
  for (const auto& c : channels)
    if (c.length() != frames || c.sample_rate != rate) throw std::invalid_argument("channels differ in length or rate");
  const int width = bytes_per_sample(format);
  const auto nch = std::uint16_t(channels.size());
  const std::uint64_t bytes = std::uint64_t(frames) * nch * width;
  if (bytes + 36 > 0xFFFFFFFFull) throw std::invalid_argument("audio too long for a RIFF file");

  out.write("RIFF", 4);
  put32(out, std::uint32_t(36 + bytes + (bytes & 1)));
  out.write("WAVEfmt ", 8);
  put32(out, 16);
  put16(out, format == SampleFormat::Float32 ? kFormatFloat : kFormatPcm);
  put16(out, nch);
  put32(out, std::uint32_t(rate));
  put32(out, std::uint32_t(rate) * nch * width);
  put16(out, std::uint16_t(nch * width));
  put16(out, std::uint16_t(8 * width));
  out.write("data", 4);
  put32(out, std::uint32_t(bytes));

  Eigen::Index clipped = 0;
  auto quantize = [&](double x, double scale) {
    const double q = std::round(x * scale);
    const double c = std::clamp(q, -scale, scale - 1.0);
    clipped += c != q;
    return std::int32_t(c);
  };
  std::vector<char> buf(std::size_t(nch) * width);
  for (Eigen::Index n = 0; n < frames; ++n) {
    char* p = buf.data();
    for (const auto& ch : channels) {
      const double x = ch.samples[n];
      if (format == SampleFormat::Float32) {
        const float f = float(x);
        std::uint32_t u;
        std::memcpy(&u, &f, 4);
        for (int b = 0; b < 4; ++b) *p++ = char((u >> (8 * b)) & 0xFF);
      } else {
        const std::int32_t s = quantize(x, format == SampleFormat::Pcm16 ? 32768.0 : 8388608.0);
        for (int b = 0; b < width; ++b) *p++ = char((std::uint32_t(s) >> (8 * b)) & 0xFF);
      }
    }
    out.write(buf.data(), std::streamsize(buf.size()));
  }
  if (bytes & 1) out.put('\0');
  if (!out) throw WavError("write failed");
  return clipped;
}

Eigen::Index write_wav(const std::string& path, const std::vector<Signald>& channels, SampleFormat format) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw WavError("cannot open '" + path + "' for writing");
  return write_wav(out, channels, format);
}

}  // namespace selebi
