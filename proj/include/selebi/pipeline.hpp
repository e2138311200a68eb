#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "selebi/adaptive_grid.hpp"
#include "selebi/gabor.hpp"
#include "selebi/percussion.hpp"

namespace selebi {

enum class Method { PhaseVocoder, Selebi };

Method parse_method(const std::string& name);
std::string to_string(Method m);

struct StretchConfig {
  double alpha = 2.0;
  Eigen::Index window_length = 2048;  // V
  Eigen::Index synthesis_hop = 128;   // nominal ã; the analysis hop is derived from it
  Eigen::Index channels = 0;          // M; 0 selects the automatic size below
  double beta = 4.0;
  double theta_mag = 0.01;
  double theta_p_low = 0.5;
  double theta_p_high = 0.75;
  Eigen::Index median_kernel = 5;
  double min_prominence = 0.1;
  double refine_band = 0.01;
  MpdBand band = MpdBand::AroundUnity;
  /// Channel used for event detection in multichannel input; -1 uses the mixdown.
  int detect_channel = -1;

  /// floor(ã / alpha), at least 1.
  Eigen::Index analysis_hop() const;
  /// ceil(alpha a).
  Eigen::Index stretched_hop() const;
  /// M. Automatic: the smallest multiple k a >= ceil(V alpha) with k 5-smooth, so the
  /// padded length stays a small multiple of M.
  Eigen::Index fft_size() const;
  PercussionConfig percussion() const;
  AdaptiveGridConfig grid() const;
  /// Throws std::invalid_argument naming the violated constraint.
  void validate() const;
};

struct PaddingInfo {
  Eigen::Index input = 0;     // samples read
  Eigen::Index padded = 0;    // analysis length L
  Eigen::Index rendered = 0;  // synthesis length before trimming
  Eigen::Index output = 0;    // ceil(alpha input)
};

struct StretchReport {
  Method method = Method::PhaseVocoder;
  double alpha = 0.0;
  Eigen::Index analysis_hop = 0;
  Eigen::Index synthesis_hop = 0;
  Eigen::Index channels = 0;
  int sample_rate = 0;
  int audio_channels = 1;
  int detect_channel = -1;
  PercussiveEvents events;
  Eigen::Index frames = 0;
  std::map<Eigen::Index, Eigen::Index> hop_histogram;
  Eigen::Index min_window = 0;
  Eigen::Index max_window = 0;
  PaddingInfo padding;
  double rms_ratio = 0.0;
  double seconds = 0.0;
};

/// Serialized report; `include_timing` false drops the wall-clock field.
std::string to_json(const StretchReport& report, bool include_timing = true);

/// Frame operator singular on an analysis or synthesis grid; carries the grid for dumping.
class GridFailure : public std::runtime_error {
 public:
  GridFailure(const std::string& what, NonuniformGrid grid, Eigen::Index sample)
      : std::runtime_error(what), grid_(std::move(grid)), sample_(sample) {}
  const NonuniformGrid& grid() const { return grid_; }
  Eigen::Index sample() const { return sample_; }

 private:
  NonuniformGrid grid_;
  Eigen::Index sample_;
};

/// Zero-pads to the smallest admissible analysis length.
Signald pad_signal(const Signald& x, const StretchConfig& cfg);

/// Pre-analysis on the uniform grid of the padded signal.
PercussionAnalysis detect_events(const Signald& padded, const StretchConfig& cfg);

/// Adaptive analysis grid for the given events on a padded signal of length L.
AdaptiveGrid analysis_grid(const PercussiveEvents& events, Eigen::Index L, const StretchConfig& cfg);

/// Analysis coefficients of the padded signal on `grid`: the uniform DGT when the grid
/// has constant hop a and length V, the NSDGT otherwise.
ComplexMatrix<double> analyze(const Signald& padded, const NonuniformGrid& grid, const StretchConfig& cfg);

/// Phase generation and synthesis on `grid` stretched by alpha, trimmed to `output_length`.
Signald synthesize_stretched(const ComplexMatrix<double>& X, const NonuniformGrid& grid,
                             const StretchConfig& cfg, Eigen::Index output_length, int sample_rate);

struct StretchResult {
  std::vector<Signald> channels;
  StretchReport report;
  AdaptiveGrid grid;
  PercussionAnalysis analysis;
};

/// Baseline uniform phase vocoder with identity phase locking.
Signald stretch_pv(const Signald& x, const StretchConfig& cfg);

/// Adaptive-grid stretching of one channel.
StretchResult stretch_selebi(const Signald& x, const StretchConfig& cfg);

/// Any number of equal-length channels. Events are detected once, on the mixdown or on
/// cfg.detect_channel, and every channel is rendered on the same grid.
StretchResult stretch(const std::vector<Signald>& channels, Method method, const StretchConfig& cfg);

}  // namespace selebi
