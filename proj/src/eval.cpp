#include "selebi/eval.hpp"

#include <atomic>
#include <cmath>
#include <exception>
#include <iomanip>
#include <mutex>
#include <ostream>
#include <random>
#include <stdexcept>
#include <thread>

namespace selebi {

std::string to_string(CaseKind kind) {
  switch (kind) {
    case CaseKind::Impulse: return "impulse";
    case CaseKind::SinusoidImpulse: return "sinusoid+impulse";
    case CaseKind::HarmonicImpulse: return "harmonic+impulse";
    case CaseKind::Transient: return "transient";
    case CaseKind::SinusoidTransient: return "sinusoid+transient";
  }
  throw std::invalid_argument("invalid case kind");
}

CaseKind parse_case(const std::string& name) {
  for (auto k : all_cases())
    if (to_string(k) == name) return k;
  throw std::invalid_argument("unknown case '" + name + "'");
}

const std::vector<CaseKind>& all_cases() {
  static const std::vector<CaseKind> cases{CaseKind::Impulse, CaseKind::SinusoidImpulse, CaseKind::HarmonicImpulse,
                                           CaseKind::Transient, CaseKind::SinusoidTransient};
  return cases;
}

SyntheticCase make_case(CaseKind kind, int sample_rate, double duration, Eigen::Index onset) {
  SyntheticCase c;
  c.kind = kind;
  c.sample_rate = sample_rate;
  c.length = static_cast<Eigen::Index>(std::llround(duration * sample_rate));
  c.onset = onset;
  if (sample_rate <= 0) throw std::invalid_argument("sample rate must be positive");
  if (c.length <= 4 * 2048) throw std::invalid_argument("case must be longer than four windows");
  if (onset < 0 || onset >= c.length) throw std::invalid_argument("onset outside the signal");
  switch (kind) {
    case CaseKind::Impulse:
    case CaseKind::Transient: break;
    case CaseKind::SinusoidImpulse:
    case CaseKind::SinusoidTransient: c.partials = {{1000.0, 0.5}}; break;
    case CaseKind::HarmonicImpulse: c.partials = {{1000.0, 0.5}, {2000.0, 0.25}, {3000.0, 0.125}}; break;
    default: throw std::invalid_argument("invalid case kind");
  }
  return c;
}

namespace {

// Decaying carrier normalised to unit peak; stops once the envelope is below 1e-9.
Vectord transient_waveform(const SyntheticCase& c) {
  std::vector<double> w;
  for (Eigen::Index l = 0;; ++l) {
    const double t = double(l) / c.sample_rate;
    const double env = std::exp(-t / c.decay);
    if (env < 1e-9) break;
    w.push_back(env * std::sin(2.0 * M_PI * c.transient_frequency * t));
  }
  Vectord v = Eigen::Map<Vectord>(w.data(), Eigen::Index(w.size()));
  return v / v.cwiseAbs().maxCoeff();
}

}  // namespace

Vectord percussive_component(const SyntheticCase& c, Eigen::Index length, Eigen::Index at) {
  Vectord x = Vectord::Zero(length);
  if (at < 0 || at >= length) return x;
  if (c.impulsive()) {
    x[at] = 1.0;
    return x;
  }
  const Vectord w = transient_waveform(c);
  const Eigen::Index n = std::min(w.size(), length - at);
  x.segment(at, n) = w.head(n);
  return x;
}

Vectord tonal_component(const SyntheticCase& c, Eigen::Index length) {
  Vectord x = Vectord::Zero(length);
  for (const auto& p : c.partials)
    for (Eigen::Index l = 0; l < length; ++l)
      x[l] += p.amplitude * std::sin(2.0 * M_PI * p.frequency * double(l) / c.sample_rate);
  return x;
}

Signald gen_case(const SyntheticCase& c) {
  return Signald(percussive_component(c, c.length, c.onset) + tonal_component(c, c.length), c.sample_rate);
}

namespace {

Eigen::Index stretched_length(const SyntheticCase& c, double alpha) {
  return static_cast<Eigen::Index>(std::ceil(alpha * double(c.length) - 1e-9));
}

Eigen::Index stretched_onset(const SyntheticCase& c, double alpha) {
  return static_cast<Eigen::Index>(std::llround(alpha * double(c.onset)));
}

}  // namespace

Signald gen_ground_truth(const SyntheticCase& c, double alpha) {
  if (!(alpha > 0)) throw std::invalid_argument("stretch factor must be positive");
  const Eigen::Index n = stretched_length(c, alpha);
  return Signald(percussive_component(c, n, stretched_onset(c, alpha)) + tonal_component(c, n), c.sample_rate);
}

double spectral_error(const ComplexMatrix<double>& X_perf, const ComplexMatrix<double>& X, const Interval& iv) {
  if (X_perf.rows() != X.rows() || X_perf.cols() != X.cols())
    throw std::invalid_argument("spectrogram dimensions differ");
  if (iv.first < 0 || iv.last < iv.first || iv.last >= X.cols()) throw std::invalid_argument("invalid interval");
  const Eigen::Index n = iv.last - iv.first + 1;
  const auto ref = X_perf.middleCols(iv.first, n).cwiseAbs();
  const double denom = ref.norm();
  if (!(denom > 0.0)) throw UndefinedReference();
  return (ref - X.middleCols(iv.first, n).cwiseAbs()).norm() / denom;
}

ComplexMatrix<double> evaluation_dgt(const Signald& x, const StretchConfig& cfg, Eigen::Index length) {
  const Eigen::Index hop = cfg.stretched_hop();
  const Eigen::Index L = UniformGrid::admissible_length(std::max(length, x.length()), hop, cfg.fft_size());
  Vectord padded = Vectord::Zero(L);
  padded.head(x.length()) = x.samples;
  const auto grid = UniformGrid::make(hop, cfg.fft_size(), cfg.window_length, L);
  return dgt(Signald(std::move(padded), x.sample_rate), make_hann(cfg.window_length), grid).coefficients;
}

Interval percussive_interval(const SyntheticCase& c, double alpha, const StretchConfig& cfg, double floor_db) {
  const Eigen::Index n = stretched_length(c, alpha);
  const Signald p(percussive_component(c, n, stretched_onset(c, alpha)), c.sample_rate);
  const Vectord energy = evaluation_dgt(p, cfg, n).cwiseAbs2().colwise().sum().transpose();
  const double floor = energy.maxCoeff() * std::pow(10.0, floor_db / 10.0);
  Interval iv{-1, -1};
  for (Eigen::Index k = 0; k < energy.size(); ++k)
    if (energy[k] >= floor) {
      if (iv.first < 0) iv.first = k;
      iv.last = k;
    }
  if (iv.first < 0) throw UndefinedReference();
  return iv;
}

ErrorResult evaluate(const SyntheticCase& c, Method method, double alpha, const StretchConfig& base) {
  StretchConfig cfg = base;
  cfg.alpha = alpha;
  const Signald x = gen_case(c);
  const Signald y = stretch({x}, method, cfg).channels.front();
  const Signald truth = gen_ground_truth(c, alpha);
  const Eigen::Index n = truth.length();
  const Interval iv = percussive_interval(c, alpha, cfg);
  const double e = spectral_error(evaluation_dgt(truth, cfg, n), evaluation_dgt(y, cfg, n), iv);
  return {method, c.kind, alpha, e, iv};
}

std::vector<ErrorResult> run_table(const std::vector<Method>& methods, const std::vector<CaseKind>& cases,
                                   const std::vector<double>& alphas, const StretchConfig& base,
                                   unsigned workers) {
  struct Job {
    Method method;
    CaseKind kind;
    double alpha;
  };
  std::vector<Job> jobs;
  for (auto m : methods)
    for (auto k : cases)
      for (double a : alphas) jobs.push_back({m, k, a});
  std::vector<ErrorResult> rows(jobs.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto work = [&] {
    for (std::size_t i; (i = next++) < jobs.size();) {
      try {
        rows[i] = evaluate(make_case(jobs[i].kind), jobs[i].method, jobs[i].alpha, base);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < std::min<std::size_t>(std::max(workers, 1u), jobs.size()); ++t) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
  return rows;
}

void write_table_csv(std::ostream& out, const std::vector<ErrorResult>& rows) {
  out << "method,case,alpha,error,frames_lo,frames_hi\n";
  const auto flags = out.flags();
  const auto prec = out.precision();
  out << std::setprecision(6);
  for (const auto& r : rows)
    out << to_string(r.method) << ',' << to_string(r.kind) << ',' << r.alpha << ',' << r.error << ','
        << r.interval.first << ',' << r.interval.last << '\n';
  out.flags(flags);
  out.precision(prec);
}

Eigen::Index temporal_support(const Vectord& y, Eigen::Index centre, Eigen::Index radius, double floor_db) {
  const Eigen::Index lo = std::max<Eigen::Index>(0, centre - radius);
  const Eigen::Index hi = std::min<Eigen::Index>(y.size() - 1, centre + radius);
  if (hi < lo) return 0;
  const Vectord seg = y.segment(lo, hi - lo + 1).cwiseAbs();
  const double peak = seg.maxCoeff();
  if (!(peak > 0.0)) return 0;
  const double floor = peak * std::pow(10.0, floor_db / 20.0);
  Eigen::Index first = -1, last = -1;
  for (Eigen::Index i = 0; i < seg.size(); ++i)
    if (seg[i] >= floor) {
      if (first < 0) first = i;
      last = i;
    }
  return last - first + 1;
}

Signald bongo_fixture(int sample_rate, Eigen::Index length) {
  std::mt19937 gen(7);
  std::normal_distribution<double> noise(0.0, 1.0);
  Vectord x = Vectord::Zero(length);
  const std::vector<std::pair<double, double>> strokes{{0.29, 1.0}, {0.72, 0.7}};
  const std::vector<std::pair<double, double>> modes{{190.0, 1.0}, {305.0, 0.5}, {420.0, 0.25}};
  for (const auto& [when, gain] : strokes) {
    const auto start = static_cast<Eigen::Index>(when * sample_rate);
    for (Eigen::Index l = start; l < length; ++l) {
      const double t = double(l - start) / sample_rate;
      const double env = std::exp(-t / 0.06);
      if (env < 1e-6) break;
      double v = std::exp(-t / 0.002) * noise(gen);
      for (const auto& [f, a] : modes) v += a * env * std::sin(2.0 * M_PI * f * t);
      x[l] += 0.5 * gain * v;
    }
  }
  return Signald(std::move(x), sample_rate);
}

}  // namespace selebi
