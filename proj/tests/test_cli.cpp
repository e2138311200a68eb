#include <catch2/catch_amalgamated.hpp>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "selebi/eval.hpp"
#include "selebi/wav.hpp"

using namespace selebi;
namespace fs = std::filesystem;

namespace {

const fs::path& workdir() {
  static const fs::path dir = [] {
    fs::path d = fs::temp_directory_path() / ("selebi_cli_" + std::to_string(::getpid()));
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

fs::path tmp(const std::string& name) { return workdir() / name; }

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run cli(const std::string& args) {
  const auto out = tmp("stdout.txt"), err = tmp("stderr.txt");
  const std::string cmd = std::string(SELEBI_CLI) + " " + args + " >" + out.string() + " 2>" + err.string();
  const int status = std::system(cmd.c_str());
  REQUIRE(WIFEXITED(status));
  return {WEXITSTATUS(status), slurp(out), slurp(err)};
}

fs::path impulse_wav(SampleFormat format = SampleFormat::Pcm16, double amp = 0.5, int channels = 1) {
  Vectord x = Vectord::Zero(22050);
  x[12288] = amp;
  std::vector<Signald> ch(channels, Signald(x, 22050));
  const auto p = tmp("impulse_" + to_string(format) + std::to_string(channels) + ".wav");
  write_wav(p.string(), ch, format);
  return p;
}

std::vector<std::string> lines(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

}  // namespace

TEST_CASE("stretch writes alpha times the input length", "[cli][stretch]") {
  const auto in = impulse_wav();
  const auto out = tmp("stretched.wav");
  auto r = cli("stretch " + in.string() + " " + out.string() + " --alpha 2 --method selebi");
  CHECK(r.code == 0);
  CHECK(r.out.empty());
  const auto w = read_wav(out.string());
  CHECK(w.frames() == 44100);
  CHECK(w.sample_rate == 22050);
  CHECK(w.format == SampleFormat::Pcm16);

  r = cli("stretch " + in.string() + " " + out.string() + " --report");
  REQUIRE(r.code == 0);
  const auto j = nlohmann::json::parse(r.out);
  CHECK(j["event_count"] == 1);
  CHECK(j["events"][0]["sample"] == 12288);
  CHECK(j["padding"]["output"] == 44100);
}

TEST_CASE("stretch keeps bit depth and channel count", "[cli][stretch]") {
  for (auto format : {SampleFormat::Pcm24, SampleFormat::Float32}) {
    const auto in = impulse_wav(format, 0.5, 2);
    const auto out = tmp("stereo.wav");
    REQUIRE(cli("stretch " + in.string() + " " + out.string() + " --alpha 1.5 --method pv").code == 0);
    const auto w = read_wav(out.string());
    CHECK(w.format == format);
    CHECK(w.channels.size() == 2);
    CHECK(w.frames() == 33075);
  }
}

TEST_CASE("integer overshoot is clamped with a warning", "[cli][stretch]") {
  const auto in = impulse_wav(SampleFormat::Pcm16, 32767.0 / 32768);
  const auto out = tmp("clipped.wav");
  const auto r = cli("stretch " + in.string() + " " + out.string());
  CHECK(r.code == 0);
  CHECK_THAT(r.err, Catch::Matchers::ContainsSubstring("clipped"));
  CHECK(read_wav(out.string()).channels[0].samples.maxCoeff() == 32767.0 / 32768);
  const auto f = impulse_wav(SampleFormat::Float32, 32767.0 / 32768);
  CHECK(cli("stretch " + f.string() + " " + out.string()).err.empty());
}

TEST_CASE("invalid input and configuration exit with 2", "[cli][errors]") {
  const auto in = impulse_wav();
  const auto out = tmp("never.wav");
  auto r = cli("stretch " + in.string() + " " + out.string() + " --alpha 0.5");
  CHECK(r.code == 2);
  CHECK_THAT(r.err, Catch::Matchers::ContainsSubstring("alpha >= 1"));
  CHECK_FALSE(fs::exists(out));

  std::ofstream(tmp("corrupt.wav")) << "RIFF1234WAVEjunk";
  CHECK(cli("stretch " + tmp("corrupt.wav").string() + " " + out.string()).code == 2);
  CHECK(cli("stretch " + tmp("missing.wav").string() + " " + out.string()).code == 2);
  CHECK(cli("stretch " + in.string() + " " + out.string() + " --method wsola").code == 2);
  CHECK(cli("stretch " + in.string() + " " + out.string() + " --median-kernel 4").code == 2);
  CHECK(cli("stretch " + in.string() + " " + out.string() + " --detect-channel 3").code == 2);
  CHECK(cli("stretch " + in.string()).code == 2);
  CHECK(cli("").code == 2);
  CHECK(cli("bench --out /nonexistent/dir/table.csv --alphas 2").code == 2);
  CHECK(cli("bench --out " + tmp("t.csv").string() + " --alphas 0.5").code == 2);
}

TEST_CASE("frame failure exits with 3 and dumps the grid", "[cli][errors]") {
  // Windows this short leave zero-valued Hann frames around the event.
  const auto in = impulse_wav();
  const auto out = tmp("degenerate.wav");
  const auto r = cli("stretch " + in.string() + " " + out.string() + " --window-length 6 --synthesis-hop 2 --median-kernel 1");
  CHECK(r.code == 3);
  const fs::path dump = out.string() + ".grid-failure.csv";
  CHECK_THAT(r.err, Catch::Matchers::ContainsSubstring(dump.string()));
  REQUIRE(fs::exists(dump));
  CHECK(lines(slurp(dump)).front() == "position,hop,window_length");
}

TEST_CASE("inspect dumps events, grid, mask and curve", "[cli][inspect]") {
  const auto bongo = tmp("bongo.wav");
  write_wav(bongo.string(), {bongo_fixture()}, SampleFormat::Pcm16);
  const auto dir = tmp("inspect");
  auto r = cli("inspect " + bongo.string() + " --dump events,grid,mask,curve --out " + dir.string());
  REQUIRE(r.code == 0);
  CHECK(r.out.empty());
  const auto events = lines(slurp(dir / "events.csv"));
  CHECK(events.front() == "frame,rate");
  CHECK(events.size() == 3);
  Eigen::Index total = 0;
  const auto grid = lines(slurp(dir / "grid.csv"));
  CHECK(grid.front() == "position,hop,window_length");
  for (std::size_t i = 1; i < grid.size(); ++i) total += std::stol(grid[i].substr(grid[i].find(',') + 1));
  CHECK(total == 24576);
  CHECK(lines(slurp(dir / "mask.csv")).front() == "frame,bin");
  CHECK(lines(slurp(dir / "curve.csv")).size() == 1 + 24576 / 64);

  r = cli("inspect " + bongo.string() + " --dump grid --method pv --alpha 4 --out " + dir.string());
  REQUIRE(r.code == 0);
  const auto uniform = lines(slurp(dir / "grid.csv"));
  for (std::size_t i = 1; i < uniform.size(); ++i) CHECK(uniform[i].substr(uniform[i].find(',')) == ",32,2048");

  const auto silence = tmp("silence.wav");
  write_wav(silence.string(), {Signald(Vectord::Zero(22050), 22050)}, SampleFormat::Pcm16);
  REQUIRE(cli("inspect " + silence.string() + " --dump events --out " + dir.string()).code == 0);
  CHECK(slurp(dir / "events.csv") == "frame,rate\n");
  CHECK(cli("inspect " + silence.string() + " --dump spectrum --out " + dir.string()).code == 2);
}

TEST_CASE("bench writes the error table", "[cli][bench]") {
  const auto table = tmp("table.csv");
  REQUIRE(cli("bench --out " + table.string() + " --alphas 2").code == 0);
  auto rows = lines(slurp(table));
  CHECK(rows.front() == "method,case,alpha,error,frames_lo,frames_hi");
  CHECK(rows.size() == 1 + 10);

  REQUIRE(cli("bench --out " + table.string() + " --methods pv").code == 0);
  rows = lines(slurp(table));
  REQUIRE(rows.size() == 1 + 10);
  for (std::size_t i = 1; i < rows.size(); ++i) CHECK(rows[i].rfind("pv,", 0) == 0);

  REQUIRE(cli("bench --out " + table.string()).code == 0);
  CHECK(lines(slurp(table)).size() == 1 + 20);
}
