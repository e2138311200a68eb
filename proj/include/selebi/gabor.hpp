#pragma once

// Discrete Gabor transform on a cyclic signal, its nonstationary variant with
// per-frame windows and hops, and the painless-case dual windows that invert
// both. Windows are centered on their frame position with circular wrap, and
// coefficients use the frequency-invariant phase exp(-i 2 pi m (l - A_n) / M).

#include <algorithm>
#include <complex>
#include <vector>

#include <unsupported/Eigen/FFT>

#include "selebi/grid.hpp"
#include "selebi/signal.hpp"

namespace selebi {

template <typename Scalar>
using ComplexMatrix = Eigen::Matrix<std::complex<Scalar>, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Scalar>
using RealMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

/// Real taper of length W. Sample j sits at offset j - center() from the frame position.
template <typename Scalar>
struct Window {
  Vector<Scalar> values;

  Eigen::Index length() const { return values.size(); }
  Eigen::Index center() const { return (values.size() - 1) / 2; }
  Eigen::Index offset(Eigen::Index j) const { return j - center(); }
};

/// Symmetric Hann (endpoints zero).
template <typename Scalar = double>
Window<Scalar> make_hann(Eigen::Index length) {
  if (length < 2) throw std::invalid_argument("Hann window needs at least 2 samples");
  Window<Scalar> w;
  w.values.resize(length);
  const Scalar denom = static_cast<Scalar>(length - 1);
  for (Eigen::Index j = 0; j < length; ++j)
    w.values[j] = Scalar(0.5) - Scalar(0.5) * std::cos(Scalar(2) * Scalar(M_PI) * j / denom);
  // Pin exact symmetry against cos rounding.
  for (Eigen::Index j = 0; j < length / 2; ++j) w.values[length - 1 - j] = w.values[j];
  return w;
}

template <typename Scalar, typename Grid>
struct Spectrogram {
  ComplexMatrix<Scalar> coefficients;
  Grid grid;

  Eigen::Index channels() const { return coefficients.rows(); }
  Eigen::Index frames() const { return coefficients.cols(); }
  RealMatrix<Scalar> magnitude() const { return coefficients.cwiseAbs(); }
  RealMatrix<Scalar> phase() const { return coefficients.unaryExpr([](const std::complex<Scalar>& c) { return std::arg(c); }); }
};

template <typename Scalar>
using UniformSpectrogram = Spectrogram<Scalar, UniformGrid>;
template <typename Scalar>
using NonuniformSpectrogram = Spectrogram<Scalar, NonuniformGrid>;

namespace detail {

template <typename Scalar>
class FrameTransformer {
 public:
  explicit FrameTransformer(Eigen::Index channels)
      : channels_(channels), buffer_(channels), spectrum_(channels) {
    fft_.SetFlag(Eigen::FFT<Scalar>::Unscaled);
  }

  /// One column: windowed segment around `position`, embedded circularly into M points.
  template <typename Column>
  void analyze(const Vector<Scalar>& x, const Window<Scalar>& g, Eigen::Index position,
               Column&& out) {
    const Eigen::Index L = x.size();
    std::fill(buffer_.begin(), buffer_.end(), std::complex<Scalar>(0));
    for (Eigen::Index j = 0; j < g.length(); ++j) {
      const Eigen::Index k = g.offset(j);
      buffer_[wrap(k, channels_)] += x[wrap(position + k, L)] * g.values[j];
    }
    fft_.fwd(spectrum_, buffer_);
    for (Eigen::Index m = 0; m < channels_; ++m) out[m] = spectrum_[m];
  }

  /// Overlap-adds the real part of the unscaled inverse DFT of `column`, weighted by `dual`.
  template <typename Column>
  void synthesize(const Column& column, const Window<Scalar>& dual, Eigen::Index position,
                  Vector<Scalar>& out) {
    const Eigen::Index L = out.size();
    for (Eigen::Index m = 0; m < channels_; ++m) spectrum_[m] = column[m];
    fft_.inv(buffer_, spectrum_);
    for (Eigen::Index j = 0; j < dual.length(); ++j) {
      const Eigen::Index k = dual.offset(j);
      out[wrap(position + k, L)] += dual.values[j] * buffer_[wrap(k, channels_)].real();
    }
  }

 private:
  Eigen::Index channels_;
  Eigen::FFT<Scalar> fft_;
  std::vector<std::complex<Scalar>> buffer_;
  std::vector<std::complex<Scalar>> spectrum_;
};

/// Diagonal of the frame operator: M * sum_n g_n[l - A_n]^2 over Z_L.
template <typename Scalar>
Vector<Scalar> frame_diagonal(const std::vector<Window<Scalar>>& windows,
                              const std::vector<Eigen::Index>& positions,
                              Eigen::Index channels, Eigen::Index length) {
  Vector<Scalar> diag = Vector<Scalar>::Zero(length);
  for (std::size_t n = 0; n < windows.size(); ++n) {
    const auto& g = windows[n];
    for (Eigen::Index j = 0; j < g.length(); ++j)
      diag[wrap(positions[n] + g.offset(j), length)] += g.values[j] * g.values[j];
  }
  return diag * static_cast<Scalar>(channels);
}

inline constexpr double kFrameTolerance = 1e-12;

}  // namespace detail

/// Uniform DGT, coefficients M x N.
template <typename Scalar>
UniformSpectrogram<Scalar> dgt(const Signal<Scalar>& x, const Window<Scalar>& g,
                               const UniformGrid& grid) {
  grid.validate();
  if (x.length() != grid.signal_length)
    throw std::invalid_argument("signal length does not match grid");
  if (g.length() > grid.channels) throw PainlessViolation("window length exceeds channel count");
  UniformSpectrogram<Scalar> X{ComplexMatrix<Scalar>(grid.channels, grid.frames), grid};
  detail::FrameTransformer<Scalar> ft(grid.channels);
  for (Eigen::Index n = 0; n < grid.frames; ++n)
    ft.analyze(x.samples, g, grid.position(n), X.coefficients.col(n));
  return X;
}

/// Canonical dual g / (M * sum_n g[l - n a]^2) for the painless uniform case.
template <typename Scalar>
Window<Scalar> dual_window(const Window<Scalar>& g, const UniformGrid& grid) {
  if (g.length() > grid.channels) throw PainlessViolation("window length exceeds channel count");
  // The squared-overlap sum is a-periodic; evaluating on one period suffices.
  Vector<Scalar> period = Vector<Scalar>::Zero(grid.hop);
  for (Eigen::Index j = 0; j < g.length(); ++j)
    period[wrap(g.offset(j), grid.hop)] += g.values[j] * g.values[j];
  period *= static_cast<Scalar>(grid.channels);
  const Scalar tol = static_cast<Scalar>(detail::kFrameTolerance) * period.maxCoeff();
  Window<Scalar> dual{Vector<Scalar>::Zero(g.length())};
  for (Eigen::Index j = 0; j < g.length(); ++j) {
    if (g.values[j] == Scalar(0)) continue;
    const Scalar s = period[wrap(g.offset(j), grid.hop)];
    if (!(s > tol)) throw FrameNotInvertible(wrap(g.offset(j), grid.signal_length));
    dual.values[j] = g.values[j] / s;
  }
  return dual;
}

/// Inverse uniform DGT by overlap-add with the synthesis window.
template <typename Scalar>
Signal<Scalar> idgt(const ComplexMatrix<Scalar>& X, const Window<Scalar>& dual,
                    const UniformGrid& grid, int sample_rate = 22050) {
  grid.validate();
  if (X.rows() != grid.channels || X.cols() != grid.frames)
    throw std::invalid_argument("coefficient dimensions do not match grid");
  Vector<Scalar> out = Vector<Scalar>::Zero(grid.signal_length);
  detail::FrameTransformer<Scalar> ft(grid.channels);
  for (Eigen::Index n = 0; n < grid.frames; ++n)
    ft.synthesize(X.col(n), dual, grid.position(n), out);
  return Signal<Scalar>(std::move(out), sample_rate);
}

/// Hann windows of the grid's per-frame lengths.
template <typename Scalar = double>
std::vector<Window<Scalar>> hann_windows(const NonuniformGrid& grid) {
  std::vector<Window<Scalar>> w;
  w.reserve(grid.window_lengths.size());
  for (auto len : grid.window_lengths) w.push_back(make_hann<Scalar>(len));
  return w;
}

/// Nonstationary DGT with windows g_n placed at A_n.
template <typename Scalar>
NonuniformSpectrogram<Scalar> nsdgt(const Signal<Scalar>& x,
                                    const std::vector<Window<Scalar>>& windows,
                                    const NonuniformGrid& grid) {
  grid.validate();
  if (x.length() != grid.signal_length)
    throw std::invalid_argument("signal length does not match grid");
  if (static_cast<Eigen::Index>(windows.size()) != grid.frames())
    throw std::invalid_argument("window count does not match grid");
  NonuniformSpectrogram<Scalar> X{ComplexMatrix<Scalar>(grid.channels, grid.frames()), grid};
  detail::FrameTransformer<Scalar> ft(grid.channels);
  for (Eigen::Index n = 0; n < grid.frames(); ++n) {
    if (windows[n].length() > grid.channels)
      throw PainlessViolation("window length exceeds channel count");
    ft.analyze(x.samples, windows[n], grid.positions[n], X.coefficients.col(n));
  }
  return X;
}

/// Painless-case duals g_n[l] / S[l + A_n]; S must be positive on all of Z_L.
template <typename Scalar>
std::vector<Window<Scalar>> nsdgt_dual_windows(const std::vector<Window<Scalar>>& windows,
                                               const NonuniformGrid& grid) {
  grid.validate();
  for (const auto& g : windows)
    if (g.length() > grid.channels) throw PainlessViolation("window length exceeds channel count");
  const Vector<Scalar> diag =
      detail::frame_diagonal(windows, grid.positions, grid.channels, grid.signal_length);
  const Scalar tol = static_cast<Scalar>(detail::kFrameTolerance) * diag.maxCoeff();
  for (Eigen::Index l = 0; l < diag.size(); ++l)
    if (!(diag[l] > tol)) throw FrameNotInvertible(l);
  std::vector<Window<Scalar>> duals;
  duals.reserve(windows.size());
  for (std::size_t n = 0; n < windows.size(); ++n) {
    const auto& g = windows[n];
    Window<Scalar> d{Vector<Scalar>(g.length())};
    for (Eigen::Index j = 0; j < g.length(); ++j)
      d.values[j] = g.values[j] / diag[wrap(grid.positions[n] + g.offset(j), grid.signal_length)];
    duals.push_back(std::move(d));
  }
  return duals;
}

/// Inverse NSDGT: overlap-add of per-frame inverse DFTs weighted by the duals.
template <typename Scalar>
Signal<Scalar> insdgt(const ComplexMatrix<Scalar>& X, const std::vector<Window<Scalar>>& duals,
                      const NonuniformGrid& grid, int sample_rate = 22050) {
  grid.validate();
  if (X.rows() != grid.channels || X.cols() != grid.frames() ||
      static_cast<Eigen::Index>(duals.size()) != grid.frames())
    throw std::invalid_argument("coefficient dimensions do not match grid");
  Vector<Scalar> out = Vector<Scalar>::Zero(grid.signal_length);
  detail::FrameTransformer<Scalar> ft(grid.channels);
  for (Eigen::Index n = 0; n < grid.frames(); ++n)
    ft.synthesize(X.col(n), duals[n], grid.positions[n], out);
  return Signal<Scalar>(std::move(out), sample_rate);
}

}  // namespace selebi
