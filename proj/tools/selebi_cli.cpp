// selebi: time-stretch WAV files, run the synthetic error table, dump diagnostics.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <thread>

#include <CLI11.hpp>

#include "selebi/eval.hpp"
#include "selebi/pipeline.hpp"
#include "selebi/wav.hpp"

using namespace selebi;

namespace {

constexpr int kOk = 0;
constexpr int kInternal = 1;
constexpr int kUsage = 2;
constexpr int kGridFailure = 3;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void add_analysis_flags(CLI::App* app, StretchConfig& cfg) {
  app->add_option("--window-length", cfg.window_length, "Hann window length V")->capture_default_str();
  app->add_option("--synthesis-hop", cfg.synthesis_hop, "nominal synthesis hop")->capture_default_str();
  app->add_option("--beta", cfg.beta, "hop reduction around events")->capture_default_str();
  app->add_option("--theta-mag", cfg.theta_mag, "magnitude gate")->capture_default_str();
  app->add_option("--theta-p-low", cfg.theta_p_low, "lower MPD threshold")->capture_default_str();
  app->add_option("--theta-p-high", cfg.theta_p_high, "upper MPD threshold")->capture_default_str();
  app->add_option("--median-kernel", cfg.median_kernel, "median filter length (odd)")->capture_default_str();
  app->add_option("--min-prominence", cfg.min_prominence, "event prominence floor")->capture_default_str();
}

void add_config_flags(CLI::App* app, StretchConfig& cfg, std::string& method) {
  app->add_option("--alpha", cfg.alpha, "stretch factor (>= 1)")->capture_default_str();
  app->add_option("--method", method, "pv or selebi")->capture_default_str()->check(CLI::IsMember({"pv", "selebi"}));
  add_analysis_flags(app, cfg);
  app->add_option("--detect-channel", cfg.detect_channel, "channel used for detection (-1: mixdown)")
      ->capture_default_str();
}

WavData load(const std::string& path) {
  try {
    return read_wav(path);
  } catch (const WavError& e) {
    throw UsageError(path + ": " + e.what());
  }
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw UsageError("cannot write '" + path.string() + "'");
  return out;
}

std::filesystem::path failure_dump_path(const std::string& output) {
  return std::filesystem::path(output).concat(".grid-failure.csv");
}

int cmd_stretch(const std::string& in, const std::string& out, const std::string& method, const StretchConfig& cfg,
                bool report) {
  cfg.validate();
  const WavData wav = load(in);
  if (wav.frames() == 0) throw UsageError(in + ": no audio frames");
  StretchResult r;
  try {
    r = stretch(wav.channels, parse_method(method), cfg);
  } catch (const GridFailure& e) {
    const auto dump = failure_dump_path(out);
    std::ofstream d(dump);
    if (d) write_grid_csv(d, e.grid());
    std::cerr << "selebi: " << e.what() << "\n" << "grid dump: " << (d ? dump.string() : "(not writable)") << "\n";
    return kGridFailure;
  }
  Eigen::Index clipped = 0;
  try {
    clipped = write_wav(out, r.channels, wav.format);
  } catch (const WavError& e) {
    throw UsageError(e.what());
  }
  if (clipped > 0) std::cerr << "warning: " << clipped << " samples clipped to full scale\n";
  if (report) std::cout << to_json(r.report) << "\n";
  return kOk;
}

std::vector<Method> parse_methods(const std::vector<std::string>& names) {
  std::vector<Method> m;
  for (const auto& n : names) m.push_back(parse_method(n));
  return m;
}

int cmd_bench(const std::string& out, const std::vector<double>& alphas, const std::vector<std::string>& methods,
              const StretchConfig& cfg, unsigned jobs) {
  std::ofstream file = open_out(out);
  for (double a : alphas) {
    StretchConfig c = cfg;
    c.alpha = a;
    c.validate();
  }
  const auto rows = run_table(parse_methods(methods), all_cases(), alphas, cfg, jobs);
  write_table_csv(file, rows);
  if (!file) throw UsageError("write failed for '" + out + "'");
  return kOk;
}

int cmd_inspect(const std::string& in, const std::vector<std::string>& dumps, const std::string& dir,
                const std::string& method, const StretchConfig& cfg) {
  cfg.validate();
  const WavData wav = load(in);
  if (wav.frames() == 0) throw UsageError(in + ": no audio frames");
  if (cfg.detect_channel >= int(wav.channels.size())) throw std::invalid_argument("detection channel out of range");
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw UsageError("cannot create '" + dir + "': " + ec.message());

  Signald x = wav.channels.front();
  if (cfg.detect_channel >= 0) {
    x = wav.channels[cfg.detect_channel];
  } else if (wav.channels.size() > 1) {
    Vectord mix = Vectord::Zero(wav.frames());
    for (const auto& c : wav.channels) mix += c.samples;
    x = Signald(mix / double(wav.channels.size()), wav.sample_rate);
  }
  const Signald padded = pad_signal(x, cfg);
  const PercussionAnalysis a = detect_events(padded, cfg);
  const NonuniformGrid grid = parse_method(method) == Method::Selebi
                                  ? analysis_grid(a.events, padded.length(), cfg).grid
                                  : NonuniformGrid::from_uniform(UniformGrid::make(cfg.analysis_hop(), cfg.fft_size(),
                                                                                   cfg.window_length, padded.length()));
  const std::filesystem::path base(dir);
  for (const auto& d : dumps) {
    const auto path = base / (d + ".csv");
    std::ofstream out = open_out(path);
    if (d == "events") write_events_csv(out, a.events);
    else if (d == "grid") write_grid_csv(out, grid);
    else if (d == "mask") write_mask_csv(out, a.mask);
    else write_curve_csv(out, a.curve);
    if (!out) throw UsageError("write failed for '" + path.string() + "'");
    std::cerr << "wrote " << path.string() << "\n";
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Percussion-aware time stretching on adaptive Gabor grids"};
  app.require_subcommand(1);

  StretchConfig cfg;
  std::string method = "selebi";

  auto* stretch_cmd = app.add_subcommand("stretch", "time-stretch a WAV file");
  std::string in, out;
  bool report = false;
  stretch_cmd->add_option("input", in, "input WAV")->required();
  stretch_cmd->add_option("output", out, "output WAV")->required();
  stretch_cmd->add_flag("--report", report, "print the run report as JSON on stdout");
  add_config_flags(stretch_cmd, cfg, method);

  auto* bench_cmd = app.add_subcommand("bench", "error table on the synthetic cases");
  std::string table = "table.csv";
  std::vector<double> alphas{2.0, 4.0};
  std::vector<std::string> methods{"pv", "selebi"};
  unsigned jobs = std::max(1u, std::thread::hardware_concurrency());
  bench_cmd->add_option("--out", table, "CSV path")->capture_default_str();
  bench_cmd->add_option("--alphas", alphas, "stretch factors")->delimiter(',')->capture_default_str();
  bench_cmd->add_option("--methods", methods, "methods")->delimiter(',')->check(CLI::IsMember({"pv", "selebi"}));
  bench_cmd->add_option("--jobs", jobs, "worker threads")->check(CLI::PositiveNumber);
  add_analysis_flags(bench_cmd, cfg);

  auto* inspect_cmd = app.add_subcommand("inspect", "dump analysis diagnostics as CSV");
  std::vector<std::string> dumps;
  std::string dir = ".";
  inspect_cmd->add_option("input", in, "input WAV")->required();
  inspect_cmd->add_option("--dump", dumps, "events, grid, mask or curve")
      ->required()
      ->delimiter(',')
      ->check(CLI::IsMember({"events", "grid", "mask", "curve"}));
  inspect_cmd->add_option("--out", dir, "output directory")->capture_default_str();
  add_config_flags(inspect_cmd, cfg, method);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*stretch_cmd) return cmd_stretch(in, out, method, cfg, report);
    if (*bench_cmd) return cmd_bench(table, alphas, methods, cfg, jobs);
    return cmd_inspect(in, dumps, dir, method, cfg);
  } catch (const UsageError& e) {
    std::cerr << "selebi: " << e.what() << "\n";
    return kUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "selebi: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "selebi: internal error: " << e.what() << "\n";
    return kInternal;
  }
}
