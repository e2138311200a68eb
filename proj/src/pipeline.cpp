#include "selebi/pipeline.hpp"

#include <chrono>
#include <cmath>

#include <nlohmann/json.hpp>

#include "selebi/phase.hpp"

namespace selebi {

Method parse_method(const std::string& name) {
  if (name == "pv") return Method::PhaseVocoder;
  if (name == "selebi") return Method::Selebi;
  throw std::invalid_argument("unknown method '" + name + "' (expected pv or selebi)");
}

std::string to_string(Method m) { return m == Method::PhaseVocoder ? "pv" : "selebi"; }

Eigen::Index StretchConfig::analysis_hop() const {
  return std::max<Eigen::Index>(1, static_cast<Eigen::Index>(std::floor(double(synthesis_hop) / alpha + 1e-9)));
}

Eigen::Index StretchConfig::stretched_hop() const { return selebi::stretched_hop(alpha, analysis_hop()); }

namespace {

bool smooth(Eigen::Index n) {
  for (Eigen::Index p : {2, 3, 5})
    while (n % p == 0) n /= p;
  return n == 1;
}

}  // namespace

Eigen::Index StretchConfig::fft_size() const {
  if (channels > 0) return channels;
  const auto target = static_cast<Eigen::Index>(std::ceil(double(window_length) * alpha - 1e-9));
  const Eigen::Index a = analysis_hop();
  Eigen::Index k = (target + a - 1) / a;
  while (!smooth(k)) ++k;
  return k * a;
}

PercussionConfig StretchConfig::percussion() const {
  PercussionConfig p;
  p.thresholds = {theta_mag, theta_p_low, theta_p_high, band};
  p.median_kernel = median_kernel;
  p.min_prominence = min_prominence;
  p.refine_band = refine_band;
  return p;
}

AdaptiveGridConfig StretchConfig::grid() const {
  return {analysis_hop(), window_length, fft_size(), alpha, beta};
}

void StretchConfig::validate() const {
  if (!std::isfinite(alpha) || alpha < 1.0)
    throw std::invalid_argument("stretch factor must satisfy alpha >= 1");
  if (window_length < 2) throw std::invalid_argument("window length must be at least 2");
  if (synthesis_hop < 1) throw std::invalid_argument("synthesis hop must be positive");
  if (fft_size() < window_length) throw std::invalid_argument("FFT size must be at least the window length");
  if (!(beta > 1.0)) throw std::invalid_argument("beta must exceed 1");
  if (!(theta_mag > 0.0)) throw std::invalid_argument("magnitude threshold must be positive");
  if (!(theta_p_low >= 0.0 && theta_p_low < theta_p_high))
    throw std::invalid_argument("MPD thresholds must satisfy 0 <= low < high");
  if (median_kernel < 1 || median_kernel % 2 == 0)
    throw std::invalid_argument("median kernel must be odd and positive");
  if (!(min_prominence >= 0.0)) throw std::invalid_argument("minimum prominence must be nonnegative");
  if (!(refine_band >= 0.0)) throw std::invalid_argument("refinement band must be nonnegative");
  if (2 * stretched_hop() > window_length)
    throw std::invalid_argument("synthesis hop too large for the window length");
}

std::string to_json(const StretchReport& r, bool include_timing) {
  nlohmann::ordered_json j;
  j["method"] = to_string(r.method);
  j["alpha"] = r.alpha;
  j["analysis_hop"] = r.analysis_hop;
  j["synthesis_hop"] = r.synthesis_hop;
  j["fft_size"] = r.channels;
  j["sample_rate"] = r.sample_rate;
  j["audio_channels"] = r.audio_channels;
  j["detect_channel"] = r.detect_channel;
  j["event_count"] = r.events.size();
  auto events = nlohmann::ordered_json::array();
  for (const auto& e : r.events)
    events.push_back({{"frame", e.frame},
                      {"sample", e.frame * r.analysis_hop},
                      {"seconds", double(e.frame * r.analysis_hop) / r.sample_rate},
                      {"rate", e.rate}});
  j["events"] = events;
  nlohmann::ordered_json hist = nlohmann::ordered_json::object();
  for (const auto& [hop, count] : r.hop_histogram) hist[std::to_string(hop)] = count;
  j["grid"] = {{"frames", r.frames}, {"hop_histogram", hist}, {"min_window", r.min_window},
               {"max_window", r.max_window}};
  j["padding"] = {{"input", r.padding.input},
                  {"padded", r.padding.padded},
                  {"rendered", r.padding.rendered},
                  {"output", r.padding.output}};
  j["rms_ratio"] = r.rms_ratio;
  if (include_timing) j["seconds"] = r.seconds;
  return j.dump(2);
}

Signald pad_signal(const Signald& x, const StretchConfig& cfg) {
  const Eigen::Index L = UniformGrid::admissible_length(x.length(), cfg.analysis_hop(), cfg.fft_size());
  Vectord y = Vectord::Zero(L);
  y.head(x.length()) = x.samples;
  return Signald(std::move(y), x.sample_rate);
}

namespace {

UniformGrid uniform_grid(Eigen::Index L, const StretchConfig& cfg) {
  return UniformGrid::make(cfg.analysis_hop(), cfg.fft_size(), cfg.window_length, L);
}

bool is_uniform(const NonuniformGrid& grid, const StretchConfig& cfg) {
  const Eigen::Index a = cfg.analysis_hop();
  for (Eigen::Index n = 0; n < grid.frames(); ++n)
    if (grid.hops[n] != a || grid.window_lengths[n] != cfg.window_length) return false;
  return grid.channels == cfg.fft_size();
}

}  // namespace

PercussionAnalysis detect_events(const Signald& padded, const StretchConfig& cfg) {
  return analyze_percussion(padded, make_hann(cfg.window_length), uniform_grid(padded.length(), cfg),
                            cfg.percussion());
}

AdaptiveGrid analysis_grid(const PercussiveEvents& events, Eigen::Index L, const StretchConfig& cfg) {
  return adaptive_grid(events, L, cfg.grid());
}

ComplexMatrix<double> analyze(const Signald& padded, const NonuniformGrid& grid, const StretchConfig& cfg) {
  if (is_uniform(grid, cfg))
    return dgt(padded, make_hann(cfg.window_length), uniform_grid(padded.length(), cfg)).coefficients;
  return nsdgt(padded, hann_windows(grid), grid).coefficients;
}

Signald synthesize_stretched(const ComplexMatrix<double>& X, const NonuniformGrid& grid,
                             const StretchConfig& cfg, Eigen::Index output_length, int sample_rate) {
  const Matrixd mag = X.cwiseAbs();
  Matrixd phi(X.rows(), X.cols());
  for (Eigen::Index n = 0; n < X.cols(); ++n)
    for (Eigen::Index m = 0; m < X.rows(); ++m) phi(m, n) = std::arg(X(m, n));
  const auto hops = incoming_hops(grid);
  const Matrixd dphi = phase_time_derivative(phi, hops, grid.channels);
  const Matrixd prop = propagate_phase(dphi, cfg.alpha, hops, phi.col(0));
  const double floor = X.size() ? cfg.theta_mag * mag.maxCoeff() : 0.0;
  const Matrixd locked = identity_phase_lock(mag, phi, prop, floor);

  ComplexMatrix<double> Y(X.rows(), X.cols());
  for (Eigen::Index n = 0; n < X.cols(); ++n)
    for (Eigen::Index m = 0; m < X.rows(); ++m) Y(m, n) = std::polar(mag(m, n), locked(m, n));

  const NonuniformGrid out_grid = grid.stretched(cfg.alpha);
  std::vector<Window<double>> duals;
  try {
    duals = nsdgt_dual_windows(hann_windows(out_grid), out_grid);
  } catch (const FrameNotInvertible& e) {
    throw GridFailure(std::string("synthesis ") + e.what(), out_grid, e.sample());
  }
  Signald y = insdgt(Y, duals, out_grid, sample_rate);
  if (output_length > y.length()) throw std::logic_error("stretched grid shorter than requested output");
  return Signald(y.samples.head(output_length), sample_rate);
}

StretchResult stretch(const std::vector<Signald>& channels, Method method, const StretchConfig& cfg) {
  const auto start = std::chrono::steady_clock::now();
  cfg.validate();
  if (channels.empty()) throw std::invalid_argument("no audio channels");
  const Eigen::Index length = channels.front().length();
  const int rate = channels.front().sample_rate;
  if (length == 0) throw std::invalid_argument("empty input");
  for (const auto& c : channels)
    if (c.length() != length || c.sample_rate != rate)
      throw std::invalid_argument("channels differ in length or sample rate");
  if (cfg.detect_channel >= static_cast<int>(channels.size()))
    throw std::invalid_argument("detection channel out of range");

  std::vector<Signald> padded;
  for (const auto& c : channels) padded.push_back(pad_signal(c, cfg));
  const Eigen::Index L = padded.front().length();
  const Eigen::Index output_length = static_cast<Eigen::Index>(std::ceil(cfg.alpha * double(length) - 1e-9));

  StretchResult result{{}, {}, {}, {}};
  if (method == Method::Selebi) {
    Signald detect = padded.front();
    if (cfg.detect_channel >= 0) {
      detect = padded[cfg.detect_channel];
    } else if (padded.size() > 1) {
      Vectord mix = Vectord::Zero(L);
      for (const auto& p : padded) mix += p.samples;
      detect = Signald(mix / double(padded.size()), rate);
    }
    result.analysis = detect_events(detect, cfg);
    result.grid = analysis_grid(result.analysis.events, L, cfg);
  } else {
    result.grid.grid = NonuniformGrid::from_uniform(uniform_grid(L, cfg));
  }
  const NonuniformGrid& grid = result.grid.grid;

  double in_energy = 0.0, out_energy = 0.0;
  for (std::size_t c = 0; c < padded.size(); ++c) {
    ComplexMatrix<double> X;
    try {
      X = analyze(padded[c], grid, cfg);
    } catch (const FrameNotInvertible& e) {
      throw GridFailure(std::string("analysis ") + e.what(), grid, e.sample());
    }
    result.channels.push_back(synthesize_stretched(X, grid, cfg, output_length, rate));
    in_energy += channels[c].samples.squaredNorm();
    out_energy += result.channels.back().samples.squaredNorm();
  }

  StretchReport& r = result.report;
  r.method = method;
  r.alpha = cfg.alpha;
  r.analysis_hop = cfg.analysis_hop();
  r.synthesis_hop = cfg.stretched_hop();
  r.channels = cfg.fft_size();
  r.sample_rate = rate;
  r.audio_channels = static_cast<int>(channels.size());
  r.detect_channel = cfg.detect_channel;
  r.events = result.analysis.events;
  r.frames = grid.frames();
  for (auto h : grid.hops) ++r.hop_histogram[h];
  r.min_window = *std::min_element(grid.window_lengths.begin(), grid.window_lengths.end());
  r.max_window = *std::max_element(grid.window_lengths.begin(), grid.window_lengths.end());
  Eigen::Index rendered = 0;
  for (auto h : grid.hops) rendered += selebi::stretched_hop(cfg.alpha, h);
  r.padding = {length, L, rendered, output_length};
  const double in_rms = std::sqrt(in_energy / double(length * channels.size()));
  const double out_rms = std::sqrt(out_energy / double(output_length * channels.size()));
  r.rms_ratio = in_rms > 0.0 ? out_rms / in_rms : 0.0;
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

Signald stretch_pv(const Signald& x, const StretchConfig& cfg) {
  return std::move(stretch({x}, Method::PhaseVocoder, cfg).channels.front());
}

StretchResult stretch_selebi(const Signald& x, const StretchConfig& cfg) {
  return stretch({x}, Method::Selebi, cfg);
}

}  // namespace selebi
