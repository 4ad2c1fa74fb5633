#pragma once

#include <filesystem>

#include "wbsig/example.hpp"

namespace wbsig::tools {

/// Canonical spectrogram as an 8-bit RGB image: power in dB mapped to gray
/// over a 60 dB window below the peak, frequency increasing upward, each
/// annotation outlined in a colour keyed to its family.
void write_spectrogram_png(const WidebandExample& x, const std::filesystem::path& path);

}  // namespace wbsig::tools
