#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "selebi/signal.hpp"

namespace selebi {

enum class SampleFormat { Pcm16, Pcm24, Float32 };

std::string to_string(SampleFormat f);

class WavError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct WavData {
  std::vector<Signald> channels;
  int sample_rate = 0;
  SampleFormat format = SampleFormat::Pcm16;

  Eigen::Index frames() const { return channels.empty() ? 0 : channels.front().length(); }
};

/// RIFF/WAVE reader for PCM16, PCM24 and IEEE float32 (plain or extensible format tags).
/// Integer samples map to [-1, 1) by division by 2^(bits-1). Throws WavError.
WavData read_wav(std::istream& in);
WavData read_wav(const std::string& path);

/// Interleaves and writes the channels. Integer formats round and clamp to full scale;
/// returns the number of clamped samples.
Eigen::Index write_wav(std::ostream& out, const std::vector<Signald>& channels, SampleFormat format);
Eigen::Index write_wav(const std::string& path, const std::vector<Signald>& channels, SampleFormat format);

}  // namespace selebi
