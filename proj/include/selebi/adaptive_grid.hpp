#pragma once

#include <iosfwd>
#include <stdexcept>
#include <vector>

#include "selebi/grid.hpp"
#include "selebi/percussion.hpp"

namespace selebi {

/// Transition too short to hold even one ramp frame.
class DegenerateTransition : public std::runtime_error {
 public:
  DegenerateTransition() : std::runtime_error("transition region shorter than one hop") {}
};

/// Shortest window for an event of compression rate r: floor(V - r^2 (1 - 1/alpha) V), at least 2.
Eigen::Index shortest_window(Eigen::Index V, double rate, double alpha);

/// Per-frame window lengths on the original uniform grid (N frames, hop a). Each event
/// shortens the window to its S_k and ramps back to V in steps of 2a over ceil(V / 2a)
/// frames on either side; overlapping events take the elementwise minimum. Neighbourhoods
/// are truncated at the signal edges rather than wrapped.
IndexVector window_length_vector(const PercussiveEvents& events, Eigen::Index V, Eigen::Index a,
                                 Eigen::Index N, double alpha);

enum class RegionType {
  ConstantLong,   // v == V
  ConstantShort,  // plateau below V
  LongToShort,    // v decreasing
  ShortToLong,    // v increasing
};

/// Half-open frame range [start, end) on the original grid; covers samples
/// [start * a, end * a). `event` is the event whose frame lies in the region, or -1.
struct Region {
  RegionType type = RegionType::ConstantLong;
  Eigen::Index start = 0;
  Eigen::Index end = 0;
  Eigen::Index event = -1;

  Eigen::Index frames() const { return end - start; }
  bool operator==(const Region&) const = default;
};

using RegionMap = std::vector<Region>;

/// Splits [0, N) into maximal runs by the direction of v across each hop interval (the
/// last interval wraps to frame 0). Flat runs at V are long, flat runs at an event's S_k
/// or at a local minimum are short; other flat runs join the preceding transition, so a
/// turn below V splits into increasing then decreasing. Frame 0 always starts a region.
RegionMap segment_regions(const IndexVector& v, Eigen::Index V, const PercussiveEvents& events = {},
                          double alpha = 1.0);

/// round(S / (alpha beta)), at least 1.
Eigen::Index adaptive_hop(Eigen::Index S, double alpha, double beta);

/// floor(2 / (a_st + a_end) * (a N_org - (a_st - a_end) / 2)); throws DegenerateTransition below 1.
Eigen::Index transition_frame_count(Eigen::Index a_st, Eigen::Index a_end, Eigen::Index N_org,
                                    Eigen::Index a);

struct TransitionHops {
  /// Linear ramp ordered from the a_st side to the a_end side.
  std::vector<Eigen::Index> ramp;
  /// floor(residual / 2) (when positive) and the rest; sums with the ramp to a N_org.
  std::vector<Eigen::Index> correction;

  Eigen::Index total() const;
};

/// Ramp a_l = floor(a_max - l / N_new (a_max - a_min)), l = 1..N_new, plus correction hops.
/// Throws std::invalid_argument if the ramp alone overshoots a N_org.
TransitionHops transition_hops(Eigen::Index a_st, Eigen::Index a_end, Eigen::Index N_new,
                               Eigen::Index N_org, Eigen::Index a);

/// Frame count from transition_frame_count, reduced until the ramp fits; a single hop of
/// the whole region when nothing fits.
TransitionHops plan_transition(Eigen::Index a_st, Eigen::Index a_end, Eigen::Index N_org,
                               Eigen::Index a);

/// Realised hops for one region.
struct RegionPlan {
  Region region;
  Eigen::Index a_st = 0;
  Eigen::Index a_end = 0;
  Eigen::Index first_frame = 0;  // index of the region's first frame in the new grid
  std::vector<Eigen::Index> hops;
  /// Positions in `hops` of correction or compensation hops.
  std::vector<std::size_t> corrections;
};

struct AdaptiveGrid {
  NonuniformGrid grid;
  IndexVector v;
  RegionMap regions;
  std::vector<RegionPlan> plans;
};

struct AdaptiveGridConfig {
  Eigen::Index hop = 64;             // a
  Eigen::Index window_length = 2048;  // V
  Eigen::Index channels = 4096;       // M
  double alpha = 2.0;
  double beta = 4.0;
};

/// Nonuniform analysis grid for the given window lengths. Long regions keep hop a,
/// short regions tile with the adaptive hop, transitions ramp linearly between the
/// boundary hops. Region boundaries stay at their original positions.
AdaptiveGrid build_grid(const IndexVector& v, const RegionMap& regions, const AdaptiveGridConfig& cfg);

/// Events to grid in one step; N = L / a.
AdaptiveGrid adaptive_grid(const PercussiveEvents& events, Eigen::Index signal_length,
                           const AdaptiveGridConfig& cfg);

void write_grid_csv(std::ostream& out, const NonuniformGrid& grid);

}  // namespace selebi
