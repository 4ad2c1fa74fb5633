#include <doctest.h>

#include <cmath>
#include <numeric>

#include "support/support.hpp"
#include "wbsig/dsp.hpp"
#include "wbsig/error.hpp"
#include "wbsig/rng.hpp"

using namespace wbsig;
using wbsig::testing::peak_frequency;
using wbsig::testing::tone;

namespace {

Samples random_samples(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  return dsp::complex_noise(n, 1.0, rng);
}

double energy(std::span<const Complex> x) {
  double e = 0.0;
  for (const auto& v : x) e += std::norm(v);
  return e;
}

// |H(f)| of real taps centred on their midpoint.
double magnitude_response(const std::vector<double>& taps, double f) {
  Complex h{};
  const double mid = 0.5 * static_cast<double>(taps.size() - 1);
  for (std::size_t i = 0; i < taps.size(); ++i) h += taps[i] * std::polar(1.0, -2.0 * M_PI * f * (static_cast<double>(i) - mid));
  return std::abs(h);
}

}  // namespace

TEST_CASE("fft round trip and unscaled forward transform") {
  Samples x = random_samples(1024, 1);
  const Samples orig = x;
  dsp::fft(x);
  CHECK(energy(x) == doctest::Approx(1024.0 * energy(orig)).epsilon(1e-12));
  dsp::ifft(x);
  for (std::size_t i = 0; i < x.size(); ++i) CHECK(std::abs(x[i] - orig[i]) < 1e-12);

  Samples impulse(8);
  impulse[0] = 1.0;
  dsp::fft(impulse);
  for (const auto& v : impulse) CHECK(std::abs(v - Complex(1.0, 0.0)) < 1e-15);
}

TEST_CASE("bin frequencies span [-0.5, 0.5)") {
  CHECK(dsp::bin_frequency(0, 8) == 0.0);
  CHECK(dsp::bin_frequency(1, 8) == 0.125);
  CHECK(dsp::bin_frequency(4, 8) == -0.5);
  CHECK(dsp::bin_frequency(7, 8) == -0.125);
}

TEST_CASE("lowpass with cutoff 0.5 and one tap is all-pass") {
  const auto taps = dsp::design_filter(dsp::FilterSpec::lowpass(0.5, 1));
  REQUIRE(taps.size() == 1);
  CHECK(taps[0] == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("lowpass taps: symmetric, unit DC gain, stopband below -40 dB at twice the cutoff") {
  for (double cutoff : {0.05, 0.1, 0.2}) {
    const auto taps = dsp::design_filter(dsp::FilterSpec::lowpass(cutoff, 129));
    for (std::size_t i = 0; i < taps.size(); ++i) CHECK(taps[i] == taps[taps.size() - 1 - i]);
    CHECK(std::accumulate(taps.begin(), taps.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(20.0 * std::log10(magnitude_response(taps, 2.0 * cutoff)) < -40.0);
  }
}

TEST_CASE("invalid filter specs are rejected") {
  CHECK_THROWS_AS(dsp::design_filter(dsp::FilterSpec::lowpass(0.6, 31)), ParameterError);
  CHECK_THROWS_AS(dsp::design_filter(dsp::FilterSpec::lowpass(0.2, 30)), ParameterError);
  CHECK_THROWS_AS(dsp::design_filter(dsp::FilterSpec::root_raised_cosine(4, 1.5, 65)), ParameterError);
}

TEST_CASE("RRC self-convolution is Nyquist at the symbol period") {
  const auto taps = dsp::design_filter(dsp::FilterSpec::root_raised_cosine(4, 0.25, 65));
  for (std::size_t i = 0; i < taps.size(); ++i) CHECK(taps[i] == doctest::Approx(taps[taps.size() - 1 - i]));
  std::vector<Complex> c(taps.begin(), taps.end());
  const Samples rc = dsp::convolve(c, taps, dsp::ConvolveMode::Full);
  const std::size_t centre = taps.size() - 1;
  const double peak = rc[centre].real();
  for (std::size_t lag = 4; lag + centre < rc.size(); lag += 4) {
    CHECK(std::abs(rc[centre + lag]) / peak < 1e-3);
    CHECK(std::abs(rc[centre - lag]) / peak < 1e-3);
  }
}

TEST_CASE("gaussian taps are positive and sum to one") {
  const auto taps = dsp::design_filter(dsp::FilterSpec::gaussian(8, 0.35, 33));
  for (double t : taps) CHECK(t > 0.0);
  CHECK(std::accumulate(taps.begin(), taps.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("blackman-harris is the periodic 4-term window") {
  const auto w = dsp::blackman_harris(512);
  CHECK(w[0] == doctest::Approx(0.35875 - 0.48829 + 0.14128 - 0.01168));
  CHECK(w[256] == doctest::Approx(0.35875 + 0.48829 + 0.14128 + 0.01168));
  for (std::size_t i = 1; i < 256; ++i) CHECK(w[i] == doctest::Approx(w[512 - i]));
}

TEST_CASE("frequency_translate") {
  const Samples x = random_samples(4096, 2);
  SUBCASE("zero shift is bit-identical") { CHECK(dsp::frequency_translate(x, 0.0) == x); }
  SUBCASE("energy is preserved") {
    const Samples y = dsp::frequency_translate(x, 0.37);
    CHECK(energy(y) == doctest::Approx(energy(x)).epsilon(1e-9));
  }
  SUBCASE("shift and unshift restore the input") {
    const Samples y = dsp::frequency_translate(dsp::frequency_translate(x, 0.123), -0.123);
    for (std::size_t i = 0; i < x.size(); ++i) CHECK(std::abs(y[i] - x[i]) < 1e-9);
  }
  SUBCASE("tone at 0.10 moves to 0.30") {
    CHECK(std::abs(peak_frequency(dsp::frequency_translate(tone(4096, 0.1), 0.2)) - 0.3) <= 1.0 / 4096);
  }
}

TEST_CASE("resample") {
  SUBCASE("rate 1 is identity") {
    const Samples x = random_samples(2048, 3);
    const Samples y = dsp::resample(x, 1.0);
    REQUIRE(y.size() == x.size());
    for (std::size_t i = 0; i < x.size(); ++i) CHECK(std::abs(y[i] - x[i]) < 1e-9);
  }
  SUBCASE("output length is round(len * rate)") {
    CHECK(dsp::resample(random_samples(1000, 4), 1.37).size() == 1370);
    CHECK(dsp::resample(random_samples(1001, 4), 0.5).size() == 501);
  }
  SUBCASE("tone at 0.2 lands at 0.2 / rate") {
    CHECK(peak_frequency(dsp::resample(tone(8192, 0.2), 2.0)) == doctest::Approx(0.1).epsilon(1e-3));
    CHECK(peak_frequency(dsp::resample(tone(8192, 0.2), 0.5)) == doctest::Approx(0.4).epsilon(1e-3));
  }
  SUBCASE("content that would alias is signalled") {
    dsp::ResampleOptions opts;
    opts.occupied_half_band = 0.3;
    CHECK_THROWS_AS(dsp::resample(tone(1024, 0.3), 0.5, opts), ParameterError);
  }
  SUBCASE("up then down reproduces in-band content to -40 dB") {
    Rng rng(5);
    Samples x = dsp::complex_noise(16384, 1.0, rng);
    x = dsp::convolve(x, dsp::design_filter(dsp::FilterSpec::lowpass(0.4, 255, 80.0)));
    const Samples y = dsp::resample(dsp::resample(x, 2.0), 0.5);
    REQUIRE(y.size() == x.size());
    Samples fx(x.begin() + 1024, x.end() - 1024), fy(y.begin() + 1024, y.end() - 1024);
    dsp::fft(fx);
    dsp::fft(fy);
    double err = 0.0, ref = 0.0;
    for (std::size_t k = 0; k < fx.size(); ++k) {
      if (std::abs(dsp::bin_frequency(k, fx.size())) >= 0.4) continue;
      err += std::norm(std::abs(fy[k]) - std::abs(fx[k]));
      ref += std::norm(fx[k]);
    }
    CHECK(10.0 * std::log10(err / ref) < -40.0);
  }
}

TEST_CASE("spectrogram shape and axes") {
  SUBCASE("262,144 samples give 512 x 512") {
    const auto s = dsp::spectrogram(random_samples(262144, 6));
    CHECK(s.rows() == 512);
    CHECK(s.cols() == 512);
  }
  SUBCASE("DC tone stays within one row of the centre") {
    // A bin-centred tone leaks only into bins +-1..3 of the window's DFT,
    // with amplitudes a0 and a_k / 2.
    constexpr double a0 = 0.35875, a1 = 0.48829, a2 = 0.14128, a3 = 0.01168;
    const double inner = a0 * a0 + 2.0 * (a1 / 2) * (a1 / 2);
    const double mainlobe = inner / (inner + 2.0 * ((a2 / 2) * (a2 / 2) + (a3 / 2) * (a3 / 2)));
    const auto s = dsp::spectrogram(tone(512 * 16, 0.0));
    for (std::size_t c = 0; c < s.cols(); ++c) {
      double total = 0.0, near = 0.0;
      for (std::size_t r = 0; r < s.rows(); ++r) {
        total += std::norm(s.at(r, c));
        if (r + 1 >= 256 && r <= 257) near += std::norm(s.at(r, c));
      }
      CHECK(near / total == doctest::Approx(mainlobe).epsilon(1e-9));
    }
  }
  SUBCASE("zero input gives a zero spectrogram") {
    const auto s = dsp::spectrogram(Samples(2048));
    for (const auto& v : s.values()) CHECK(v == Complex{});
  }
  SUBCASE("short input is rejected") { CHECK_THROWS_AS(dsp::spectrogram(Samples(100)), ParameterError); }
  SUBCASE("windowed Parseval") {
    const Samples x = random_samples(512 * 8, 7);
    const auto s = dsp::spectrogram(x);
    const auto w = dsp::blackman_harris(512);
    double windowed = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) windowed += std::norm(x[i] * w[i % 512]);
    double total = 0.0;
    for (const auto& v : s.values()) total += std::norm(v);
    CHECK(total == doctest::Approx(512.0 * windowed).epsilon(1e-6));
  }
}

TEST_CASE("measure_power") {
  SUBCASE("unit modulus") { CHECK(dsp::measure_power(tone(1000, 0.1)) == doctest::Approx(1.0).epsilon(1e-9)); }
  SUBCASE("zero buffer") { CHECK(dsp::measure_power(Samples(64)) == 0.0); }
  SUBCASE("white noise over half the band") {
    Rng rng(8);
    const Samples x = dsp::complex_noise(262144, 2.0, rng);
    CHECK(dsp::measure_power(x, std::nullopt, dsp::FrequencyBand{-0.25, 0.25}) == doctest::Approx(1.0).epsilon(0.05));
  }
  SUBCASE("empty region") {
    CHECK_THROWS_AS(dsp::measure_power(tone(64, 0.0), dsp::SampleRange{10, 10}), ParameterError);
  }
}

TEST_CASE("require_finite rejects NaN") {
  Samples x(4);
  x[2] = Complex(std::nan(""), 0.0);
  CHECK_THROWS_AS(dsp::require_finite(x), ParameterError);
}
