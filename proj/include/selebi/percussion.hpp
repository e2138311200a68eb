#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "selebi/gabor.hpp"

namespace selebi {

using Matrixd = RealMatrix<double>;
using Mask = Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic>;

/// How the MPD band test reads its two thresholds.
enum class MpdBand {
  /// low < mpd - 1 < high, taken literally.
  Literal,
  /// 1 - low < mpd < 1 + high: both thresholds measured from the impulse value 1.
  AroundUnity,
};

struct MaskThresholds {
  double magnitude = 0.01;
  double low = 0.5;
  double high = 0.75;
  MpdBand band = MpdBand::AroundUnity;
};

struct PercussiveEvent {
  Eigen::Index frame = 0;  // index on the pre-analysis grid
  double rate = 0.0;       // compression rate in (0, 1]

  bool operator==(const PercussiveEvent&) const = default;
};

using PercussiveEvents = std::vector<PercussiveEvent>;

/// Mixed time-frequency partial derivative of the phase, scaled so an impulse reads 1
/// and a steady sinusoid reads 0. Values at negligible-magnitude bins are meaningless.
Matrixd mpd(const UniformSpectrogram<double>& X);

/// Binary percussive mask. |X| is divided by `magnitude_reference` before comparison
/// with the magnitude threshold; a non-positive reference selects the global max of |X|.
Mask percussive_mask(const ComplexMatrix<double>& X, const Matrixd& mpd_values,
                     const MaskThresholds& thresholds, double magnitude_reference = 0.0);

/// Running median with an odd kernel; the window is truncated at the edges.
Vectord median_filter(const Vectord& values, Eigen::Index kernel);

/// Per-frame share of masked magnitude, median filtered and clamped to [0, 1].
Vectord compression_curve(const ComplexMatrix<double>& X, const Mask& mask, Eigen::Index median_kernel);

/// Topographic prominence of the peak (plateau) spanning [first, last].
double peak_prominence(const Vectord& r, Eigen::Index first, Eigen::Index last);

/// Interior local maxima with prominence >= min_prominence. Plateaus resolve to their
/// middle sample (lower middle for even widths).
PercussiveEvents find_events(const Vectord& r, double min_prominence);

/// Moves each event to the frame with the largest salience among its neighbours whose
/// curve value lies within `band` of the peak. Neighbourhoods stop at adjacent events.
PercussiveEvents refine_events(const PercussiveEvents& events, const Vectord& r,
                               const Vectord& salience, double band);

struct PercussionConfig {
  MaskThresholds thresholds;
  Eigen::Index median_kernel = 5;
  double min_prominence = 0.1;
  /// Peak-top tolerance for refining events by masked magnitude; 0 disables refinement.
  double refine_band = 0.01;
};

/// Everything the pre-analysis computes, kept for diagnostics.
struct PercussionAnalysis {
  UniformSpectrogram<double> spectrogram;
  Matrixd mpd;
  Mask mask;
  Vectord curve;
  PercussiveEvents events;
};

/// DGT of x on `grid` with window g, then MPD, mask, curve and events (refined by
/// per-frame masked magnitude). The magnitude
/// reference is the peak of |x| times the peak of g (the largest possible magnitude of a
/// full-scale impulse), so thresholds scale with input gain.
PercussionAnalysis analyze_percussion(const Signald& x, const Window<double>& g,
                                      const UniformGrid& grid, const PercussionConfig& cfg);

void write_curve_csv(std::ostream& out, const Vectord& curve);
void write_events_csv(std::ostream& out, const PercussiveEvents& events);
/// Sparse dump: one (frame, bin) row per set mask entry.
void write_mask_csv(std::ostream& out, const Mask& mask);

}  // namespace selebi
