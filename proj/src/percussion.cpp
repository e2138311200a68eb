#include "selebi/percussion.hpp"

#include <algorithm>
#include <ostream>
#include <stdexcept>

namespace selebi {

Matrixd mpd(const UniformSpectrogram<double>& X) {
  const auto& C = X.coefficients;
  const Eigen::Index M = C.rows();
  const Eigen::Index N = C.cols();
  // Frequency-direction phase increment as a complex product, then its change across
  // one hop. An impulse advances arg by 2*pi*a/M per frame.
  const double scale = static_cast<double>(M) / (2.0 * M_PI * static_cast<double>(X.grid.hop));
  ComplexMatrix<double> P(M, N);
  for (Eigen::Index n = 0; n < N; ++n)
    for (Eigen::Index m = 0; m < M; ++m) P(m, n) = C((m + 1) % M, n) * std::conj(C(m, n));
  Matrixd out(M, N);
  for (Eigen::Index n = 0; n < N; ++n) {
    const Eigen::Index prev = wrap(n - 1, N);
    for (Eigen::Index m = 0; m < M; ++m)
      out(m, n) = std::arg(P(m, n) * std::conj(P(m, prev))) * scale;
  }
  return out;
}

Mask percussive_mask(const ComplexMatrix<double>& X, const Matrixd& mpd_values,
                     const MaskThresholds& t, double magnitude_reference) {
  if (X.rows() != mpd_values.rows() || X.cols() != mpd_values.cols())
    throw std::invalid_argument("spectrogram and MPD dimensions differ");
  if (!(t.magnitude > 0.0)) throw std::invalid_argument("magnitude threshold must be positive");
  if (!(t.low < t.high)) throw std::invalid_argument("MPD band thresholds out of order");

  const Matrixd mag = X.cwiseAbs();
  const double ref = magnitude_reference > 0.0 ? magnitude_reference : mag.maxCoeff();
  Mask mask = Mask::Zero(X.rows(), X.cols());
  if (!(ref > 0.0)) return mask;
  const double floor = t.magnitude * ref;
  for (Eigen::Index n = 0; n < X.cols(); ++n)
    for (Eigen::Index m = 0; m < X.rows(); ++m) {
      if (!(mag(m, n) > floor)) continue;
      const double p = mpd_values(m, n);
      const bool in_band = t.band == MpdBand::Literal ? (t.low < p - 1.0 && p - 1.0 < t.high)
                                                      : (1.0 - t.low < p && p < 1.0 + t.high);
      mask(m, n) = in_band ? 1 : 0;
    }
  return mask;
}

Vectord median_filter(const Vectord& values, Eigen::Index kernel) {
  if (kernel < 1 || kernel % 2 == 0) throw std::invalid_argument("median kernel must be odd and positive");
  const Eigen::Index n = values.size();
  const Eigen::Index half = kernel / 2;
  Vectord out(n);
  std::vector<double> buf;
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::Index lo = std::max<Eigen::Index>(0, i - half);
    const Eigen::Index hi = std::min<Eigen::Index>(n - 1, i + half);
    buf.assign(values.data() + lo, values.data() + hi + 1);
    const std::size_t mid = buf.size() / 2;
    std::nth_element(buf.begin(), buf.begin() + mid, buf.end());
    double med = buf[mid];
    if (buf.size() % 2 == 0) {
      const double lower = *std::max_element(buf.begin(), buf.begin() + mid);
      med = 0.5 * (med + lower);
    }
    out[i] = med;
  }
  return out;
}

Vectord compression_curve(const ComplexMatrix<double>& X, const Mask& mask, Eigen::Index median_kernel) {
  if (X.rows() != mask.rows() || X.cols() != mask.cols())
    throw std::invalid_argument("spectrogram and mask dimensions differ");
  const Matrixd mag = X.cwiseAbs();
  const Vectord total = mag.colwise().sum().transpose();
  const Vectord percussive = mag.cwiseProduct(mask.cast<double>()).colwise().sum().transpose();
  const double silence = 1e-8 * (total.size() ? total.maxCoeff() : 0.0);
  Vectord ratio = Vectord::Zero(total.size());
  for (Eigen::Index n = 0; n < total.size(); ++n)
    if (total[n] > silence && total[n] > 0.0) ratio[n] = std::clamp(percussive[n] / total[n], 0.0, 1.0);
  return median_filter(ratio, median_kernel).cwiseMax(0.0).cwiseMin(1.0);
}

namespace {
// Ratio curves carry rounding noise; values closer than this compare equal.
constexpr double kLevelTolerance = 1e-9;
}  // namespace

double peak_prominence(const Vectord& r, Eigen::Index first, Eigen::Index last) {
  const double h = r[first];
  const Eigen::Index n = r.size();
  double left_min = h;
  for (Eigen::Index i = first - 1; i >= 0 && r[i] <= h + kLevelTolerance; --i)
    left_min = std::min(left_min, r[i]);
  double right_min = h;
  for (Eigen::Index i = last + 1; i < n && r[i] <= h + kLevelTolerance; ++i)
    right_min = std::min(right_min, r[i]);
  return h - std::max(left_min, right_min);
}

PercussiveEvents find_events(const Vectord& r, double min_prominence) {
  if (min_prominence < 0.0) throw std::invalid_argument("min_prominence must be nonnegative");
  PercussiveEvents events;
  const Eigen::Index n = r.size();
  Eigen::Index i = 1;
  while (i < n - 1) {
    if (!(r[i] > r[i - 1] + kLevelTolerance)) {
      ++i;
      continue;
    }
    Eigen::Index j = i;
    while (j + 1 < n && std::abs(r[j + 1] - r[i]) <= kLevelTolerance) ++j;
    if (j + 1 < n && r[j + 1] < r[i] - kLevelTolerance && r[i] > 0.0) {
      if (peak_prominence(r, i, j) >= min_prominence) {
        const Eigen::Index centre = i + (j - i) / 2;
        events.push_back({centre, r[centre]});
      }
    }
    i = j + 1;
  }
  return events;
}

PercussiveEvents refine_events(const PercussiveEvents& events, const Vectord& r,
                               const Vectord& salience, double band) {
  PercussiveEvents out = events;
  const Eigen::Index n = r.size();
  for (std::size_t k = 0; k < events.size(); ++k) {
    const Eigen::Index peak = events[k].frame;
    const double floor = r[peak] - band;
    const Eigen::Index left_stop = k > 0 ? events[k - 1].frame : -1;
    const Eigen::Index right_stop = k + 1 < events.size() ? events[k + 1].frame : n;
    Eigen::Index lo = peak, hi = peak;
    while (lo - 1 > left_stop && r[lo - 1] >= floor) --lo;
    while (hi + 1 < right_stop && r[hi + 1] >= floor) ++hi;
    Eigen::Index best = peak;
    for (Eigen::Index i = lo; i <= hi; ++i)
      if (salience[i] > salience[best]) best = i;
    out[k] = {best, r[best]};
  }
  return out;
}

PercussionAnalysis analyze_percussion(const Signald& x, const Window<double>& g,
                                      const UniformGrid& grid, const PercussionConfig& cfg) {
  PercussionAnalysis a{dgt(x, g, grid), {}, {}, {}, {}};
  a.mpd = mpd(a.spectrogram);
  const double reference = x.samples.cwiseAbs().maxCoeff() * g.values.maxCoeff();
  if (reference > 0.0) {
    a.mask = percussive_mask(a.spectrogram.coefficients, a.mpd, cfg.thresholds, reference);
  } else {
    a.mask = Mask::Zero(grid.channels, grid.frames);
  }
  a.curve = compression_curve(a.spectrogram.coefficients, a.mask, cfg.median_kernel);
  a.events = find_events(a.curve, cfg.min_prominence);
  const Vectord salience =
      a.spectrogram.coefficients.cwiseAbs().cwiseProduct(a.mask.cast<double>()).colwise().sum().transpose();
  a.events = refine_events(a.events, a.curve, salience, cfg.refine_band);
  return a;
}

void write_curve_csv(std::ostream& out, const Vectord& curve) {
  out << "frame,r\n";
  for (Eigen::Index n = 0; n < curve.size(); ++n) out << n << ',' << curve[n] << '\n';
}

void write_events_csv(std::ostream& out, const PercussiveEvents& events) {
  out << "frame,rate\n";
  for (const auto& e : events) out << e.frame << ',' << e.rate << '\n';
}

void write_mask_csv(std::ostream& out, const Mask& mask) {
  out << "frame,bin\n";
  for (Eigen::Index n = 0; n < mask.cols(); ++n)
    for (Eigen::Index m = 0; m < mask.rows(); ++m)
      if (mask(m, n)) out << n << ',' << m << '\n';
}

}  // namespace selebi
