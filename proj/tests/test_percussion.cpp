#include <catch2/catch_amalgamated.hpp>

#include <sstream>

#include "selebi/percussion.hpp"
#include "test_support.hpp"

using namespace selebi;
using namespace selebi::testing;
using Catch::Approx;

namespace {

constexpr int kRate = 22050;
constexpr Eigen::Index kLength = 24576;
constexpr Eigen::Index kHop = 64;
constexpr Eigen::Index kChannels = 4096;
constexpr Eigen::Index kWindow = 2048;

UniformGrid working_grid() { return UniformGrid::make(kHop, kChannels, kWindow, kLength); }

Vectord impulse_at(Eigen::Index pos) {
  Vectord x = Vectord::Zero(kLength);
  x[pos] = 1.0;
  return x;
}

Vectord tone(double freq, double amp) {
  Vectord x(kLength);
  for (Eigen::Index l = 0; l < kLength; ++l) x[l] = amp * std::sin(2.0 * M_PI * freq * l / kRate);
  return x;
}

}  // namespace

TEST_CASE("MPD calibration anchors", "[percussion][mpd]") {
  const auto grid = working_grid();
  const auto g = make_hann(kWindow);

  SECTION("exact-bin sinusoid reads 0 inside the main lobe") {
    const Eigen::Index m0 = 100;
    Vectord x(kLength);
    for (Eigen::Index l = 0; l < kLength; ++l) x[l] = std::sin(2.0 * M_PI * m0 * l / kChannels);
    const auto X = dgt(Signald(x, kRate), g, grid);
    const auto D = mpd(X);
    for (Eigen::Index n = 40; n < grid.frames - 40; n += 7)
      for (Eigen::Index m = m0 - 3; m <= m0 + 3; ++m) REQUIRE(std::abs(D(m, n)) < 0.1);
  }

  SECTION("impulse reads 1 where the window sees it") {
    const Eigen::Index pos = 12288;
    const auto X = dgt(Signald(impulse_at(pos), kRate), g, grid);
    const auto D = mpd(X);
    const Matrixd mag = X.coefficients.cwiseAbs();
    int checked = 0;
    for (Eigen::Index n = 0; n < grid.frames; ++n)
      for (Eigen::Index m = 0; m < kChannels; m += 17)
        if (mag(m, n) > 0.01 && mag(m, wrap(n - 1, grid.frames)) > 0.01) {
          REQUIRE(D(m, n) == Approx(1.0).margin(0.1));
          ++checked;
        }
    CHECK(checked > 1000);
  }

  SECTION("silence masks everything") {
    const auto X = dgt(Signald(Vectord::Zero(kLength), kRate), g, grid);
    CHECK(percussive_mask(X.coefficients, mpd(X), {}).cast<int>().sum() == 0);
  }
}

TEST_CASE("mask rejects steady tones and keeps impulse ridges", "[percussion][mask]") {
  const auto grid = working_grid();
  const auto g = make_hann(kWindow);

  SECTION("periodic exact-bin sinusoid") {
    Vectord x(kLength);
    for (Eigen::Index l = 0; l < kLength; ++l) x[l] = std::sin(2.0 * M_PI * 100 * l / kChannels);
    const auto a = analyze_percussion(Signald(x, kRate), g, grid, {});
    CHECK(a.mask.cast<double>().mean() < 1e-3);
    CHECK(a.curve.maxCoeff() < 0.01);
    CHECK(a.events.empty());
  }

  SECTION("impulse plus 1 kHz tone against the component-support oracle") {
    const Eigen::Index pos = 12288;
    const Vectord imp = impulse_at(pos);
    const Vectord sin = tone(1000.0, 0.5);
    const Matrixd Mi = dgt(Signald(imp, kRate), g, grid).coefficients.cwiseAbs();
    const Matrixd Ms = dgt(Signald(sin, kRate), g, grid).coefficients.cwiseAbs();
    const Signald mix(imp + sin, kRate);
    const auto X = dgt(mix, g, grid);
    const double ref = mix.samples.cwiseAbs().maxCoeff();
    const Mask mask = percussive_mask(X.coefficients, mpd(X), {}, ref);

    int agree = 0, total = 0, tone_bins = 0;
    for (Eigen::Index n = 20; n < grid.frames - 20; ++n)
      for (Eigen::Index m = 0; m < kChannels; ++m) {
        const bool impulse_dominant = Mi(m, n) > 10 * Ms(m, n) && Mi(m, n) > 0.02 * ref;
        const bool tone_dominant = Ms(m, n) > 10 * Mi(m, n) && Ms(m, n) > 0.02 * ref;
        if (!impulse_dominant && !tone_dominant) continue;
        ++total;
        tone_bins += tone_dominant;
        agree += (mask(m, n) == 1) == impulse_dominant;
      }
    CHECK(tone_bins > 1000);
    CHECK(double(agree) / total > 0.99);
  }

  SECTION("literal band reading rejects the impulse anchor") {
    const auto X = dgt(Signald(impulse_at(12288), kRate), g, grid);
    MaskThresholds literal;
    literal.band = MpdBand::Literal;
    CHECK(percussive_mask(X.coefficients, mpd(X), literal, 1.0).cast<int>().sum() == 0);
    CHECK(percussive_mask(X.coefficients, mpd(X), {}, 1.0).cast<int>().sum() > 0);
  }

  SECTION("threshold validation") {
    const auto X = dgt(Signald(impulse_at(100), kRate), g, grid);
    MaskThresholds bad;
    bad.low = 0.8;
    bad.high = 0.7;
    CHECK_THROWS_AS(percussive_mask(X.coefficients, mpd(X), bad), std::invalid_argument);
    bad = {};
    bad.magnitude = 0.0;
    CHECK_THROWS_AS(percussive_mask(X.coefficients, mpd(X), bad), std::invalid_argument);
  }
}

TEST_CASE("mask is monotone in the magnitude threshold", "[percussion][property]") {
  const auto grid = working_grid();
  const auto g = make_hann(kWindow);
  const auto x = strikes(kLength, {6400, 16000}, {1.0, 0.6});
  const auto X = dgt(x, g, grid);
  const auto D = mpd(X);
  Mask previous = percussive_mask(X.coefficients, D, {0.001, 0.5, 0.75}, 1.0);
  for (double theta : {0.003, 0.01, 0.03, 0.1, 0.3}) {
    const Mask next = percussive_mask(X.coefficients, D, {theta, 0.5, 0.75}, 1.0);
    CHECK((next.array() <= previous.array()).all());
    previous = next;
  }
}

TEST_CASE("compression curve", "[percussion][curve]") {
  const auto grid = working_grid();
  const auto g = make_hann(kWindow);
  const auto X = dgt(strikes(kLength, {6400}, {1.0}), g, grid);

  const Vectord ones = compression_curve(X.coefficients, Mask::Ones(kChannels, grid.frames), 5);
  const Vectord zeros = compression_curve(X.coefficients, Mask::Zero(kChannels, grid.frames), 5);
  CHECK(zeros.isZero(0.0));
  // Frames the strike never reaches are silent and read 0.
  for (Eigen::Index n = 0; n < grid.frames; ++n) CHECK((ones[n] == Approx(1.0) || ones[n] == 0.0));
  CHECK(ones[110] == Approx(1.0));

  const auto a = analyze_percussion(Signald(impulse_at(12288), kRate), g, grid, {});
  Eigen::Index arg = 0;
  a.curve.maxCoeff(&arg);
  CHECK(a.curve.maxCoeff() == Approx(1.0).margin(1e-9));
  CHECK(std::abs(arg - 192) <= 16);
  REQUIRE(a.events.size() == 1);
  CHECK(a.events[0].frame == 192);

  CHECK_THROWS_AS(median_filter(Vectord::Zero(5), 4), std::invalid_argument);
}

TEST_CASE("median filter", "[percussion][curve]") {
  Vectord v(7);
  v << 0, 0, 1, 0, 0, 5, 5;
  const Vectord f = median_filter(v, 3);
  Vectord expected(7);
  expected << 0, 0, 0, 0, 0, 5, 5;
  CHECK(f == expected);
  CHECK(median_filter(v, 1) == v);
}

TEST_CASE("curve is invariant to input gain", "[percussion][property]") {
  const auto grid = working_grid();
  const auto g = make_hann(kWindow);
  const auto x = strikes(kLength, {6400, 16000}, {1.0, 0.5});
  const Vectord sin = tone(700.0, 0.3);
  const Signald mix(x.samples + sin, kRate);
  const auto base = analyze_percussion(mix, g, grid, {});
  for (double c : {0.5, 2.0}) {
    const auto scaled = analyze_percussion(Signald(c * mix.samples, kRate), g, grid, {});
    CHECK((scaled.curve - base.curve).cwiseAbs().maxCoeff() < 1e-9);
    CHECK(scaled.events == base.events);
  }
}

TEST_CASE("find_events", "[percussion][peaks]") {
  CHECK(find_events(Vectord::Zero(50), 0.1).empty());

  Vectord tri = Vectord::Zero(21);
  for (int i = 0; i <= 8; ++i) tri[2 + i] = tri[18 - i] = 0.1 * i;
  tri[10] = 0.8;
  auto ev = find_events(tri, 0.1);
  REQUIRE(ev.size() == 1);
  CHECK(ev[0].frame == 10);
  CHECK(ev[0].rate == Approx(0.8));

  Vectord plateau = Vectord::Zero(12);
  plateau.segment(3, 4).setConstant(0.6);
  ev = find_events(plateau, 0.1);
  REQUIRE(ev.size() == 1);
  CHECK(ev[0].frame == 4);

  // Smaller peak sitting on the flank of a larger one: prominence is measured from the
  // higher of the two bounding minima.
  Vectord two(9);
  two << 0, 0.9, 0.5, 0.55, 0.2, 0, 0, 0, 0;
  CHECK(peak_prominence(two, 3, 3) == Approx(0.05));
  ev = find_events(two, 0.1);
  REQUIRE(ev.size() == 1);
  CHECK(ev[0].frame == 1);
  CHECK(find_events(two, 0.0).size() == 2);

  CHECK_THROWS_AS(find_events(two, -1.0), std::invalid_argument);
}

TEST_CASE("find_events ignores sub-threshold ripple", "[percussion][property]") {
  std::mt19937 gen(77);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    const Eigen::Index n = 120;
    Vectord r = Vectord::Zero(n);
    const int bumps = 1 + trial % 3;
    for (int b = 0; b < bumps; ++b) {
      const double centre = 15 + 40 * b + 10 * unit(gen);
      const double height = 0.3 + 0.7 * unit(gen);
      for (Eigen::Index i = 0; i < n; ++i)
        r[i] = std::max(r[i], height * std::max(0.0, 1.0 - std::abs(i - centre) / 6.0));
    }
    const auto clean = find_events(r, 0.1);
    Vectord noisy = r;
    for (Eigen::Index i = 0; i < n; ++i) noisy[i] += 0.02 * unit(gen);
    const auto rippled = find_events(noisy, 0.1);
    REQUIRE(rippled.size() == clean.size());
    for (std::size_t k = 0; k < clean.size(); ++k) {
      CHECK(std::abs(rippled[k].frame - clean[k].frame) <= 1);
      CHECK(rippled[k].frame >= 0);
      CHECK(rippled[k].frame < n);
      if (k > 0) CHECK(rippled[k].frame > rippled[k - 1].frame);
    }
  }
}

TEST_CASE("two strikes are found near their onsets", "[percussion][events]") {
  const auto grid = working_grid();
  const auto g = make_hann(kWindow);
  const auto a = analyze_percussion(strikes(kLength, {6400, 16000}, {1.0, 0.7}), g, grid, {});
  REQUIRE(a.events.size() == 2);
  CHECK(std::abs(a.events[0].frame - 6400 / kHop) <= 2);
  CHECK(std::abs(a.events[1].frame - 16000 / kHop) <= 2);
  for (const auto& e : a.events) {
    CHECK(e.rate > 0.0);
    CHECK(e.rate <= 1.0);
  }

  std::ostringstream curve, events, mask;
  write_curve_csv(curve, a.curve);
  write_events_csv(events, a.events);
  write_mask_csv(mask, a.mask);
  const std::string c = curve.str(), e = events.str(), m = mask.str();
  CHECK(c.rfind("frame,r\n", 0) == 0);
  CHECK(e.rfind("frame,rate\n", 0) == 0);
  CHECK(std::count(e.begin(), e.end(), '\n') == 3);
  CHECK(std::count(m.begin(), m.end(), '\n') == 1 + a.mask.cast<int>().sum());
}

TEST_CASE("refinement moves events within the peak top only", "[percussion][events]") {
  Vectord r(9);
  r << 0.0, 0.5, 0.995, 1.0, 0.998, 0.2, 0.996, 0.999, 0.0;
  Vectord salience(9);
  salience << 9.0, 0.0, 1.0, 2.0, 5.0, 9.0, 3.0, 1.0, 9.0;
  const PercussiveEvents events{{3, 1.0}, {7, 0.999}};
  const auto refined = refine_events(events, r, salience, 0.01);
  REQUIRE(refined.size() == 2);
  CHECK(refined[0] == PercussiveEvent{4, 0.998});
  CHECK(refined[1] == PercussiveEvent{6, 0.996});
  CHECK(refine_events(events, r, salience, 0.0) == events);
}
