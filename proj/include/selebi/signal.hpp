#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>

#include <Eigen/Dense>

namespace selebi {

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using Vectord = Vector<double>;
using IndexVector = Eigen::Matrix<Eigen::Index, Eigen::Dynamic, 1>;

/// Raised when a frame operator has a (numerically) vanishing diagonal.
class FrameNotInvertible : public std::runtime_error {
 public:
  explicit FrameNotInvertible(Eigen::Index sample)
      : std::runtime_error("frame operator not invertible at sample " +
                           std::to_string(sample)),
        sample_(sample) {}

  Eigen::Index sample() const noexcept { return sample_; }

 private:
  Eigen::Index sample_;
};

/// A window longer than the channel count was requested.
class PainlessViolation : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Mono real-valued audio with its sample rate.
template <typename Scalar>
struct Signal {
  Vector<Scalar> samples;
  int sample_rate = 22050;

  Signal() = default;
  Signal(Vector<Scalar> s, int rate) : samples(std::move(s)), sample_rate(rate) {
    if (sample_rate <= 0) throw std::invalid_argument("sample rate must be positive");
    if (!samples.allFinite()) throw std::invalid_argument("signal contains NaN or Inf");
  }

  Eigen::Index length() const { return samples.size(); }
};

using Signald = Signal<double>;

/// Euclidean modulo into [0, n).
inline Eigen::Index wrap(Eigen::Index i, Eigen::Index n) {
  const Eigen::Index r = i % n;
  return r < 0 ? r + n : r;
}

/// Principal argument, maps to [-pi, pi).
template <typename Scalar>
Scalar princarg(Scalar x) {
  constexpr Scalar two_pi = Scalar(2) * Scalar(M_PI);
  return x - two_pi * std::round(x / two_pi);
}

}  // namespace selebi
