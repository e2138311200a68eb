#pragma once

#include <vector>

#include "selebi/grid.hpp"
#include "selebi/percussion.hpp"

namespace selebi {

/// Per-column incoming hop: entry n is the hop that led into frame n (entry 0 unused).
using HopSequence = std::vector<Eigen::Index>;

/// Incoming hops of a uniform grid with N frames.
HopSequence uniform_hops(Eigen::Index hop, Eigen::Index frames);
/// Incoming hops of a nonuniform grid (entry 0 is the closing hop).
HopSequence incoming_hops(const NonuniformGrid& grid);

/// Instantaneous frequency (radians per sample) from the heterodyned phase difference
/// across each incoming hop. Column 0 holds the bin centre 2 pi m / M.
Matrixd phase_time_derivative(const Matrixd& phase, const HopSequence& hops, Eigen::Index M);

/// Accumulates ceil(alpha a_n) times the time derivative, starting from `initial`.
/// No wrapping is applied.
Matrixd propagate_phase(const Matrixd& dphase, double alpha, const HopSequence& hops,
                        const Vectord& initial);

/// Peaks of one magnitude column: strict circular local maxima above `floor`. Bins that
/// exceed a neighbour by less than 1e-9 of the column maximum do not count as larger.
std::vector<Eigen::Index> spectral_peaks(const Eigen::Ref<const Vectord>& magnitude, double floor);

/// Peak owning each bin; -1 everywhere when there are no peaks. The boundary between two
/// neighbouring peaks is the lowest bin between them (first one on ties), which goes to
/// the closer peak (the lower one on ties).
std::vector<Eigen::Index> regions_of_influence(const Eigen::Ref<const Vectord>& magnitude,
                                               const std::vector<Eigen::Index>& peaks);

/// Identity phase locking: every bin keeps its original offset to the peak that owns it,
/// relative to that peak's propagated phase. Columns without peaks stay as propagated.
Matrixd identity_phase_lock(const Matrixd& magnitude, const Matrixd& phase, const Matrixd& propagated,
                            double floor = 0.0);

}  // namespace selebi
