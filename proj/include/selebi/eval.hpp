#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "selebi/pipeline.hpp"

namespace selebi {

enum class CaseKind { Impulse, SinusoidImpulse, HarmonicImpulse, Transient, SinusoidTransient };

std::string to_string(CaseKind kind);
CaseKind parse_case(const std::string& name);
const std::vector<CaseKind>& all_cases();

struct Partial {
  double frequency = 0.0;  // Hz
  double amplitude = 0.0;  // relative to the percussive peak
};

/// One synthetic test signal: a percussive component (unit impulse or a 50 Hz decaying
/// transient normalised to peak 1) at `onset`, plus stationary partials.
struct SyntheticCase {
  CaseKind kind = CaseKind::Impulse;
  int sample_rate = 22050;
  Eigen::Index length = 24576;
  Eigen::Index onset = 12288;
  double transient_frequency = 50.0;
  double decay = 0.25 / 6.907755278982137;  // seconds; -60 dB after 250 ms
  std::vector<Partial> partials;

  bool impulsive() const { return kind == CaseKind::Impulse || kind == CaseKind::SinusoidImpulse || kind == CaseKind::HarmonicImpulse; }
};

/// Case with the standard partials for its kind. duration * fs must exceed 4 * 2048.
SyntheticCase make_case(CaseKind kind, int sample_rate = 22050, double duration = 24576.0 / 22050.0,
                        Eigen::Index onset = 12288);

/// Percussive component alone, starting at `at`, over `length` samples.
Vectord percussive_component(const SyntheticCase& c, Eigen::Index length, Eigen::Index at);
/// Stationary partials over `length` samples, phase zero at sample 0.
Vectord tonal_component(const SyntheticCase& c, Eigen::Index length);

Signald gen_case(const SyntheticCase& c);
/// Percussive part moved to round(alpha onset) unstretched; partials regenerated over
/// ceil(alpha length) samples.
Signald gen_ground_truth(const SyntheticCase& c, double alpha);

struct Interval {
  Eigen::Index first = 0;  // frames, inclusive
  Eigen::Index last = 0;
};

/// Thrown when the reference spectrogram has zero norm on the interval.
class UndefinedReference : public std::domain_error {
 public:
  UndefinedReference() : std::domain_error("reference spectrogram is zero on the interval") {}
};

/// || |X_perf| - |X| ||_F / || X_perf ||_F over columns [first, last].
double spectral_error(const ComplexMatrix<double>& X_perf, const ComplexMatrix<double>& X, const Interval& interval);

/// Evaluation spectrogram: Hann window V at hop ã with M channels; the signal is
/// zero-padded to a multiple of lcm(ã, M).
ComplexMatrix<double> evaluation_dgt(const Signald& x, const StretchConfig& cfg, Eigen::Index length);

/// First and last evaluation frames whose percussive ground-truth energy is within
/// `floor_db` of its peak.
Interval percussive_interval(const SyntheticCase& c, double alpha, const StretchConfig& cfg, double floor_db = -60.0);

struct ErrorResult {
  Method method = Method::PhaseVocoder;
  CaseKind kind = CaseKind::Impulse;
  double alpha = 0.0;
  double error = 0.0;
  Interval interval;
};

/// Stretches the case with `method` and scores it against the ground truth.
ErrorResult evaluate(const SyntheticCase& c, Method method, double alpha, const StretchConfig& base = {});

/// Cross product in method, case, alpha order. Rows are independent; `workers` > 1
/// evaluates them on that many threads without changing the result.
std::vector<ErrorResult> run_table(const std::vector<Method>& methods, const std::vector<CaseKind>& cases,
                                   const std::vector<double>& alphas, const StretchConfig& base = {},
                                   unsigned workers = 1);

/// Header `method,case,alpha,error,frames_lo,frames_hi`, six significant digits.
void write_table_csv(std::ostream& out, const std::vector<ErrorResult>& rows);

/// Samples between the first and last point within `radius` of `centre` where |y| reaches
/// `floor_db` relative to the largest |y| in that range (0 if nothing does).
Eigen::Index temporal_support(const Vectord& y, Eigen::Index centre, Eigen::Index radius, double floor_db = -40.0);

/// Two hand-drum strokes: a noise-burst attack over damped membrane modes.
Signald bongo_fixture(int sample_rate = 22050, Eigen::Index length = 24576);

}  // namespace selebi
