#pragma once

#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "selebi/signal.hpp"

namespace selebi {

/// ceil(alpha * hop), guarding against representation error just above an integer.
inline Eigen::Index stretched_hop(double alpha, Eigen::Index hop) {
  return static_cast<Eigen::Index>(std::ceil(alpha * static_cast<double>(hop) - 1e-9));
}

/// Regular time-frequency lattice: N frames spaced by `hop`, M channels.
struct UniformGrid {
  Eigen::Index hop = 0;
  Eigen::Index frames = 0;
  Eigen::Index channels = 0;
  Eigen::Index window_length = 0;
  Eigen::Index signal_length = 0;

  /// Builds a grid for a signal of length L; L must already satisfy a*N = L and M | L.
  static UniformGrid make(Eigen::Index hop, Eigen::Index channels,
                          Eigen::Index window_length, Eigen::Index signal_length) {
    if (hop <= 0 || channels <= 0 || window_length <= 0 || signal_length <= 0)
      throw std::invalid_argument("grid parameters must be positive");
    UniformGrid g{hop, signal_length / hop, channels, window_length, signal_length};
    g.validate();
    return g;
  }

  void validate() const {
    if (hop * frames != signal_length)
      throw std::invalid_argument("hop does not divide signal length");
    if (signal_length % channels != 0)
      throw std::invalid_argument("channel count does not divide signal length");
    if (window_length > channels)
      throw PainlessViolation("window length exceeds channel count");
  }

  Eigen::Index position(Eigen::Index n) const { return n * hop; }

  /// Smallest admissible length >= len (multiple of both hop and channels).
  static Eigen::Index admissible_length(Eigen::Index len, Eigen::Index hop,
                                        Eigen::Index channels) {
    const Eigen::Index step = std::lcm(hop, channels);
    return std::max<Eigen::Index>(1, (len + step - 1) / step) * step;
  }

  bool operator==(const UniformGrid&) const = default;
};

/// Frame layout with per-frame hops and window lengths.
///
/// `hops[n]` is the distance from frame n to frame n+1; the last hop closes the
/// circle back to position L, so sum(hops) == L and positions[0] == 0.
struct NonuniformGrid {
  std::vector<Eigen::Index> hops;
  std::vector<Eigen::Index> positions;
  std::vector<Eigen::Index> window_lengths;
  Eigen::Index channels = 0;
  Eigen::Index signal_length = 0;

  static NonuniformGrid make(std::vector<Eigen::Index> hops,
                             std::vector<Eigen::Index> window_lengths,
                             Eigen::Index channels) {
    NonuniformGrid g;
    g.hops = std::move(hops);
    g.window_lengths = std::move(window_lengths);
    g.channels = channels;
    g.positions.resize(g.hops.size());
    Eigen::Index acc = 0;
    for (std::size_t n = 0; n < g.hops.size(); ++n) {
      g.positions[n] = acc;
      acc += g.hops[n];
    }
    g.signal_length = acc;
    g.validate();
    return g;
  }

  static NonuniformGrid from_uniform(const UniformGrid& u) {
    return make(std::vector<Eigen::Index>(u.frames, u.hop),
                std::vector<Eigen::Index>(u.frames, u.window_length), u.channels);
  }

  Eigen::Index frames() const { return static_cast<Eigen::Index>(hops.size()); }

  /// Hop that led into frame n (A_n - A_{n-1}); frame 0 wraps to the closing hop.
  Eigen::Index incoming_hop(Eigen::Index n) const {
    return n > 0 ? hops[n - 1] : hops.back();
  }

  /// Same window lengths, hops replaced by ceil(alpha * hop).
  NonuniformGrid stretched(double alpha) const {
    std::vector<Eigen::Index> h(hops.size());
    for (std::size_t n = 0; n < hops.size(); ++n) h[n] = stretched_hop(alpha, hops[n]);
    return make(std::move(h), window_lengths, channels);
  }

  void validate() const {
    if (hops.empty()) throw std::invalid_argument("grid has no frames");
    if (window_lengths.size() != hops.size())
      throw std::invalid_argument("window length count does not match frame count");
    if (channels <= 0) throw std::invalid_argument("channel count must be positive");
    for (auto h : hops)
      if (h <= 0) throw std::invalid_argument("hops must be positive");
    for (auto w : window_lengths) {
      if (w <= 0) throw std::invalid_argument("window lengths must be positive");
      if (w > channels) throw PainlessViolation("window length exceeds channel count");
    }
  }

  bool operator==(const NonuniformGrid&) const = default;
};

}  // namespace selebi
