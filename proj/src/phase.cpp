#include "selebi/phase.hpp"

#include <cmath>
#include <stdexcept>

namespace selebi {

HopSequence uniform_hops(Eigen::Index hop, Eigen::Index frames) { return HopSequence(frames, hop); }

HopSequence incoming_hops(const NonuniformGrid& grid) {
  HopSequence h(grid.frames());
  for (Eigen::Index n = 0; n < grid.frames(); ++n) h[n] = grid.incoming_hop(n);
  return h;
}

Matrixd phase_time_derivative(const Matrixd& phase, const HopSequence& hops, Eigen::Index M) {
  const Eigen::Index N = phase.cols();
  if (static_cast<Eigen::Index>(hops.size()) != N) throw std::invalid_argument("hop count does not match frames");
  if (phase.rows() != M) throw std::invalid_argument("phase rows do not match channel count");
  Matrixd d(M, N);
  for (Eigen::Index m = 0; m < M; ++m) d(m, 0) = 2.0 * M_PI * double(m) / double(M);
  for (Eigen::Index n = 1; n < N; ++n) {
    const double a = static_cast<double>(hops[n]);
    if (!(a > 0)) throw std::invalid_argument("hops must be positive");
    for (Eigen::Index m = 0; m < M; ++m) {
      const double omega = 2.0 * M_PI * double(m) / double(M);
      d(m, n) = princarg(phase(m, n) - phase(m, n - 1) - omega * a) / a + omega;
    }
  }
  return d;
}

Matrixd propagate_phase(const Matrixd& dphase, double alpha, const HopSequence& hops,
                        const Vectord& initial) {
  const Eigen::Index N = dphase.cols();
  if (static_cast<Eigen::Index>(hops.size()) != N) throw std::invalid_argument("hop count does not match frames");
  if (initial.size() != dphase.rows()) throw std::invalid_argument("initial phase has the wrong size");
  if (!(alpha > 0)) throw std::invalid_argument("stretch factor must be positive");
  Matrixd out(dphase.rows(), N);
  if (N == 0) return out;
  out.col(0) = initial;
  for (Eigen::Index n = 1; n < N; ++n)
    out.col(n) = out.col(n - 1) + static_cast<double>(stretched_hop(alpha, hops[n])) * dphase.col(n);
  return out;
}

std::vector<Eigen::Index> spectral_peaks(const Eigen::Ref<const Vectord>& magnitude, double floor) {
  const Eigen::Index M = magnitude.size();
  std::vector<Eigen::Index> peaks;
  if (M < 3) return peaks;
  const double tol = 1e-9 * magnitude.maxCoeff();
  for (Eigen::Index m = 0; m < M; ++m) {
    const double v = magnitude[m];
    if (v > floor && v > magnitude[wrap(m - 1, M)] + tol && v > magnitude[(m + 1) % M] + tol)
      peaks.push_back(m);
  }
  return peaks;
}

std::vector<Eigen::Index> regions_of_influence(const Eigen::Ref<const Vectord>& magnitude,
                                               const std::vector<Eigen::Index>& peaks) {
  const Eigen::Index M = magnitude.size();
  std::vector<Eigen::Index> owner(M, -1);
  if (peaks.empty()) return owner;
  if (peaks.size() == 1) {
    std::fill(owner.begin(), owner.end(), peaks.front());
    return owner;
  }
  const std::size_t P = peaks.size();
  for (std::size_t k = 0; k < P; ++k) {
    const Eigen::Index lo = peaks[k];
    const Eigen::Index hi = peaks[(k + 1) % P];
    const Eigen::Index span = wrap(hi - lo, M);
    Eigen::Index valley = 1;
    for (Eigen::Index s = 1; s < span; ++s)
      if (magnitude[(lo + s) % M] < magnitude[(lo + valley) % M]) valley = s;
    owner[lo] = lo;
    for (Eigen::Index s = 1; s < span; ++s) {
      const bool lower = s < valley || (s == valley && valley <= span - valley);
      owner[(lo + s) % M] = lower ? lo : hi;
    }
  }
  return owner;
}

Matrixd identity_phase_lock(const Matrixd& magnitude, const Matrixd& phase, const Matrixd& propagated,
                            double floor) {
  if (magnitude.rows() != phase.rows() || magnitude.cols() != phase.cols() ||
      propagated.rows() != phase.rows() || propagated.cols() != phase.cols())
    throw std::invalid_argument("phase locking inputs differ in shape");
  Matrixd out = propagated;
  for (Eigen::Index n = 0; n < phase.cols(); ++n) {
    const auto peaks = spectral_peaks(magnitude.col(n), floor);
    if (peaks.empty()) continue;
    const auto owner = regions_of_influence(magnitude.col(n), peaks);
    for (Eigen::Index m = 0; m < phase.rows(); ++m) {
      const Eigen::Index p = owner[m];
      if (p != m) out(m, n) = propagated(p, n) + (phase(m, n) - phase(p, n));
    }
  }
  return out;
}

}  // namespace selebi
