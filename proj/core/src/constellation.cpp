#include <cmath>
#include <numbers>

#include "wbsig/error.hpp"
#include "wbsig/modem.hpp"

namespace wbsig::modem {
namespace {

std::vector<Complex> normalized(std::vector<Complex> points) {
  double energy = 0.0;
  for (const auto& p : points) energy += std::norm(p);
  const double g = 1.0 / std::sqrt(energy / static_cast<double>(points.size()));
  for (auto& p : points) p *= g;
  return points;
}

// Odd-integer grid of width x height points centred on the origin.
std::vector<Complex> rectangular_grid(int width, int height) {
  std::vector<Complex> points;
  points.reserve(static_cast<std::size_t>(width * height));
  for (int q = 0; q < height; ++q) {
    for (int i = 0; i < width; ++i) {
      points.emplace_back(2 * i - (width - 1), 2 * q - (height - 1));
    }
  }
  return points;
}

// Square grid of side 3 * 2^(k-1) with 2^(k-2)-wide squares cut from each
// corner, giving 2^(2k+1) points for k >= 2 (32-cross uses 1-wide corners).
std::vector<Complex> cross_grid(int order) {
  const int side = order == 32 ? 6 : order == 128 ? 12 : 24;
  const int corner = side / 6;
  std::vector<Complex> points;
  for (int q = 0; q < side; ++q) {
    for (int i = 0; i < side; ++i) {
      const bool in_corner_i = i < corner || i >= side - corner;
      const bool in_corner_q = q < corner || q >= side - corner;
      if (in_corner_i && in_corner_q) continue;
      points.emplace_back(2 * i - (side - 1), 2 * q - (side - 1));
    }
  }
  return points;
}

}  // namespace

std::vector<Complex> build_constellation(SignalClass c) {
  const ModFamily family = class_to_family(c);
  const int order = class_order(c);
  std::vector<Complex> points;

  if (c == SignalClass::OOK) return {Complex(0.0, 0.0), Complex(std::sqrt(2.0), 0.0)};

  switch (family) {
    case ModFamily::ASK:
      for (int k = 0; k < order; ++k) points.emplace_back(k, 0.0);
      break;
    case ModFamily::PAM:
      for (int k = 0; k < order; ++k) points.emplace_back(2 * k - (order - 1), 0.0);
      break;
    case ModFamily::PSK:
      for (int k = 0; k < order; ++k) {
        const double phase = 2.0 * std::numbers::pi * k / order;
        // Snap exact axis points so BPSK/QPSK carry no rounding residue.
        double re = std::cos(phase), im = std::sin(phase);
        if (std::abs(re) < 1e-12) re = 0.0;
        if (std::abs(im) < 1e-12) im = 0.0;
        points.emplace_back(re, im);
      }
      break;
    case ModFamily::QAM:
      if (c == SignalClass::QAM32) {
        points = rectangular_grid(8, 4);
      } else if (c == SignalClass::QAM32Cross || c == SignalClass::QAM128Cross ||
                 c == SignalClass::QAM512Cross) {
        points = cross_grid(order);
      } else {
        const int side = static_cast<int>(std::lround(std::sqrt(order)));
        points = rectangular_grid(side, side);
      }
      break;
    default:
      throw ParameterError("build_constellation: class " + std::string(class_name(c)) +
                           " has no constellation");
  }
  return normalized(std::move(points));
}

}  // namespace wbsig::modem
