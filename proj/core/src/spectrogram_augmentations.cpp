#include <algorithm>
#include <cmath>
#include <numeric>

#include "wbsig/error.hpp"
#include "wbsig/rng.hpp"
#include "wbsig/spectrogram_augmentations.hpp"

namespace wbsig::augment {
namespace {

using dsp::Spectrogram;

constexpr std::size_t kCanonical = 512;

struct PixelRect {
  double r0, r1, c0, c1;
};

PixelRect to_pixels(const SignalAnnotation& a, std::size_t rows, std::size_t cols) {
  const auto R = static_cast<double>(rows), C = static_cast<double>(cols);
  return {(a.f_low() + 0.5) * R, (a.f_high() + 0.5) * R, a.t_start * C, a.t_stop() * C};
}

// Affine pixel map: r' = r * scale + row_offset, c' = c * scale + col_offset,
// into a rows' x cols' canvas with clipping.
struct PixelMap {
  double scale = 1.0;
  double row_offset = 0.0;
  double col_offset = 0.0;
  std::size_t rows = 0, cols = 0;          // source canvas
  std::size_t out_rows = 0, out_cols = 0;  // destination canvas
};

std::optional<SignalAnnotation> map_box(const SignalAnnotation& a, const PixelMap& m) {
  const bool identity = m.scale == 1.0 && m.row_offset == 0.0 && m.col_offset == 0.0 && m.rows == m.out_rows &&
                        m.cols == m.out_cols;
  if (identity) return a;
  const PixelRect p = to_pixels(a, m.rows, m.cols);
  const auto R = static_cast<double>(m.out_rows), C = static_cast<double>(m.out_cols);
  const double r0 = std::clamp(p.r0 * m.scale + m.row_offset, 0.0, R);
  const double r1 = std::clamp(p.r1 * m.scale + m.row_offset, 0.0, R);
  const double c0 = std::clamp(p.c0 * m.scale + m.col_offset, 0.0, C);
  const double c1 = std::clamp(p.c1 * m.scale + m.col_offset, 0.0, C);
  if (r1 - r0 <= 1e-9 || c1 - c0 <= 1e-9) return std::nullopt;
  SignalAnnotation out = a;
  out.t_start = c0 / C;
  out.duration = (c1 - c0) / C;
  out.bandwidth = (r1 - r0) / R;
  out.f_center = 0.5 * (r0 + r1) / R - 0.5;
  return out;
}

void map_boxes(const std::vector<SignalAnnotation>& in, const PixelMap& m, std::vector<SignalAnnotation>& out) {
  for (const auto& a : in) {
    if (auto b = map_box(a, m)) out.push_back(*b);
  }
}

// Pixel power of complex Gaussian noise is exponential: mean = median / ln 2.
Spectrogram noise_canvas(std::size_t rows, std::size_t cols, double median_power, Rng& rng) {
  Spectrogram s(rows, cols);
  const double power = median_power / std::log(2.0);
  for (auto& v : s.values()) v = rng.complex_normal(power);
  return s;
}

// Copies `src` into `dst` with src(r, c) landing at (r + dr, c + dc).
void blit(const Spectrogram& src, Spectrogram& dst, std::ptrdiff_t dr, std::ptrdiff_t dc) {
  const auto rows = static_cast<std::ptrdiff_t>(dst.rows()), cols = static_cast<std::ptrdiff_t>(dst.cols());
  for (std::ptrdiff_t r = 0; r < static_cast<std::ptrdiff_t>(src.rows()); ++r) {
    const auto rr = r + dr;
    if (rr < 0 || rr >= rows) continue;
    for (std::ptrdiff_t c = 0; c < static_cast<std::ptrdiff_t>(src.cols()); ++c) {
      const auto cc = c + dc;
      if (cc < 0 || cc >= cols) continue;
      dst.at(static_cast<std::size_t>(rr), static_cast<std::size_t>(cc)) =
          src.at(static_cast<std::size_t>(r), static_cast<std::size_t>(c));
    }
  }
}

Spectrogram mosaic_grid(const SpecSample& s, std::span<const SpecSample> extras) {
  const std::size_t R = s.spectrogram.rows(), C = s.spectrogram.cols();
  Spectrogram grid(2 * R, 2 * C);
  for (std::size_t q = 0; q < 4; ++q) {
    const auto& part = q == 0 ? s.spectrogram : extras[q - 1].spectrogram;
    detail::require(part.rows() == R && part.cols() == C, "mosaic: all spectrograms must share a shape");
    blit(part, grid, static_cast<std::ptrdiff_t>((q / 2) * R), static_cast<std::ptrdiff_t>((q % 2) * C));
  }
  return grid;
}

const std::vector<SignalAnnotation>& quadrant_boxes(const SpecSample& s, std::span<const SpecSample> extras,
                                                    std::size_t q) {
  return q == 0 ? s.annotations : extras[q - 1].annotations;
}

// Crops or pads one axis: returns the source-to-destination offset.
std::ptrdiff_t fit_offset(std::size_t size, std::size_t target, std::size_t crop_offset) {
  if (size > target) return -static_cast<std::ptrdiff_t>(std::min(crop_offset, size - target));
  return static_cast<std::ptrdiff_t>((target - size) / 2);
}

}  // namespace

std::string_view spec_augmentation_name(SpecAugmentation v) {
  static constexpr std::string_view kNames[] = {"resize", "spec_drop_samples", "spec_patch_shuffle", "translation",
                                                "random_resize_crop", "mosaic_crop", "mosaic_downsample"};
  const auto i = static_cast<std::size_t>(v);
  detail::require(i < kNumSpecAugmentations, "unknown spectrogram augmentation");
  return kNames[i];
}

SpecAugmentation spec_params_kind(const SpecAugParams& params) {
  return static_cast<SpecAugmentation>(params.index());
}

SpecSample to_spec_sample(const WidebandExample& x, bool keep_iq) {
  SpecSample s{dsp::spectrogram(x.iq), x.annotations, std::nullopt};
  if (keep_iq) s.iq = x.iq;
  return s;
}

double background_power(const SpecSample& s) {
  const auto& spec = s.spectrogram;
  const std::size_t R = spec.rows(), C = spec.cols();
  std::vector<char> covered(R * C, 0);
  for (const auto& a : s.annotations) {
    const PixelRect p = to_pixels(a, R, C);
    const auto r0 = static_cast<std::size_t>(std::clamp(std::floor(p.r0), 0.0, static_cast<double>(R)));
    const auto r1 = static_cast<std::size_t>(std::clamp(std::ceil(p.r1), 0.0, static_cast<double>(R)));
    const auto c0 = static_cast<std::size_t>(std::clamp(std::floor(p.c0), 0.0, static_cast<double>(C)));
    const auto c1 = static_cast<std::size_t>(std::clamp(std::ceil(p.c1), 0.0, static_cast<double>(C)));
    for (std::size_t r = r0; r < r1; ++r) {
      for (std::size_t c = c0; c < c1; ++c) covered[r * C + c] = 1;
    }
  }
  std::vector<double> powers;
  for (std::size_t i = 0; i < R * C; ++i) {
    if (!covered[i]) powers.push_back(std::norm(spec.values()[i]));
  }
  if (powers.empty()) {
    for (const auto& v : spec.values()) powers.push_back(std::norm(v));
  }
  if (powers.empty()) return 0.0;
  auto mid = powers.begin() + static_cast<std::ptrdiff_t>(powers.size() / 2);
  std::nth_element(powers.begin(), mid, powers.end());
  return *mid;
}

SpecAugParams draw_spec_params(SpecAugmentation variant, const SpecSample& s, Rng& rng) {
  const auto R = static_cast<std::int64_t>(s.spectrogram.rows());
  const auto C = static_cast<std::int64_t>(s.spectrogram.cols());
  switch (variant) {
    case SpecAugmentation::Resize:
      return ResizeParams{static_cast<std::size_t>(rng.uniform_int(R * 3 / 4, R * 5 / 4)),
                          static_cast<std::size_t>(rng.uniform_int(C * 3 / 4, C * 5 / 4))};
    case SpecAugmentation::SpecDropSamples:
      return SpecDropSamplesParams{rng.uniform(0.001, 0.01), static_cast<std::size_t>(rng.uniform_int(1, 16)),
                                   static_cast<SpecDropFill>(rng.uniform_int(0, 7))};
    case SpecAugmentation::SpecPatchShuffle:
      return SpecPatchShuffleParams{static_cast<std::size_t>(rng.uniform_int(2, 16)), rng.uniform(0.01, 0.05)};
    case SpecAugmentation::Translation:
      return TranslationParams{static_cast<std::ptrdiff_t>(rng.uniform_int(-C / 4, C / 4)),
                               static_cast<std::ptrdiff_t>(rng.uniform_int(-R / 4, R / 4))};
    case SpecAugmentation::RandomResizeCrop: {
      detail::require(s.iq.has_value(), "random_resize_crop: source samples required");
      static constexpr std::size_t kSizes[] = {256, 512, 1024};
      RandomResizeCropParams p;
      p.fft_size = kSizes[rng.uniform_int(0, 2)];
      const std::size_t cols = s.iq->size() / p.fft_size;
      if (p.fft_size > kCanonical) p.row_offset = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(p.fft_size - kCanonical)));
      if (cols > kCanonical) p.col_offset = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(cols - kCanonical)));
      return p;
    }
    case SpecAugmentation::MosaicCrop:
      return MosaicCropParams{static_cast<std::size_t>(rng.uniform_int(0, R)),
                              static_cast<std::size_t>(rng.uniform_int(0, C))};
    case SpecAugmentation::MosaicDownsample: return MosaicDownsampleParams{};
  }
  throw ParameterError("draw_spec_params: unknown spectrogram augmentation");
}

SpecSample apply_spec_augmentation(const SpecSample& s, const SpecAugParams& params,
                                   std::span<const SpecSample> extras, Rng& rng) {
  const SpecAugmentation kind = spec_params_kind(params);
  const bool mosaic = kind == SpecAugmentation::MosaicCrop || kind == SpecAugmentation::MosaicDownsample;
  detail::require(extras.size() == (mosaic ? 3u : 0u),
                  mosaic ? "mosaic augmentations need exactly 3 extra spectrograms"
                         : "this augmentation takes no extra spectrograms");

  const std::size_t R = s.spectrogram.rows(), C = s.spectrogram.cols();
  SpecSample out;
  out.iq = s.iq;

  std::visit(
      [&](const auto& p) {
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, ResizeParams>) {
          detail::require(p.rows > 0 && p.cols > 0, "resize: target must be non-empty");
          out.spectrogram = noise_canvas(p.rows, p.cols, background_power(s), rng);
          blit(s.spectrogram, out.spectrogram, 0, 0);
          map_boxes(s.annotations, {1.0, 0.0, 0.0, R, C, p.rows, p.cols}, out.annotations);
        } else if constexpr (std::is_same_v<P, SpecDropSamplesParams>) {
          detail::require(p.max_region >= 1, "spec_drop_samples: max_region must be >= 1");
          out.spectrogram = s.spectrogram;
          out.annotations = s.annotations;
          const auto values = s.spectrogram.values();
          Complex mean{}, min_v{}, max_v{}, low{};
          if (!values.empty()) {
            mean = std::accumulate(values.begin(), values.end(), Complex{}) / static_cast<double>(values.size());
            const auto by_mag = [](const Complex& a, const Complex& b) { return std::abs(a) < std::abs(b); };
            min_v = *std::min_element(values.begin(), values.end(), by_mag);
            max_v = *std::max_element(values.begin(), values.end(), by_mag);
            std::vector<double> mags(values.size());
            std::transform(values.begin(), values.end(), mags.begin(), [](const Complex& v) { return std::abs(v); });
            auto tenth = mags.begin() + static_cast<std::ptrdiff_t>(mags.size() / 10);
            std::nth_element(mags.begin(), tenth, mags.end());
            low = *tenth;
          }
          const double mean_len = 0.5 * static_cast<double>(p.max_region + 1);
          const auto regions = static_cast<std::size_t>(std::llround(p.drop_rate * static_cast<double>(R * C) / mean_len));
          for (std::size_t k = 0; k < regions && R > 0 && C > 0; ++k) {
            const auto r = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(R) - 1));
            const auto c0 = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(C) - 1));
            const auto c1 = std::min(C, c0 + static_cast<std::size_t>(rng.uniform_int(1, static_cast<std::int64_t>(p.max_region))));
            const Complex before = c0 > 0 ? s.spectrogram.at(r, c0 - 1) : (c1 < C ? s.spectrogram.at(r, c1) : Complex{});
            const Complex after = c1 < C ? s.spectrogram.at(r, c1) : before;
            Complex value{};
            switch (p.fill) {
              case SpecDropFill::FrontFill: value = before; break;
              case SpecDropFill::BackFill: value = after; break;
              case SpecDropFill::Mean: value = mean; break;
              case SpecDropFill::Zero: value = 0.0; break;
              case SpecDropFill::Low: value = low; break;
              case SpecDropFill::Min: value = min_v; break;
              case SpecDropFill::Max: value = max_v; break;
              case SpecDropFill::Ones: value = 1.0; break;
            }
            for (std::size_t c = c0; c < c1; ++c) out.spectrogram.at(r, c) = value;
          }
        } else if constexpr (std::is_same_v<P, SpecPatchShuffleParams>) {
          detail::require(p.patch_size >= 1, "spec_patch_shuffle: patch_size must be >= 1");
          out.spectrogram = s.spectrogram;
          out.annotations = s.annotations;
          const std::size_t ps = p.patch_size;
          std::vector<Complex> tile(ps * ps);
          for (std::size_t r0 = 0; r0 + ps <= R; r0 += ps) {
            for (std::size_t c0 = 0; c0 + ps <= C; c0 += ps) {
              if (!rng.bernoulli(p.shuffle_ratio)) continue;
              for (std::size_t i = 0; i < ps * ps; ++i) tile[i] = s.spectrogram.at(r0 + i / ps, c0 + i % ps);
              for (std::size_t i = tile.size(); i > 1; --i) {
                std::swap(tile[i - 1], tile[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(i) - 1))]);
              }
              for (std::size_t i = 0; i < ps * ps; ++i) out.spectrogram.at(r0 + i / ps, c0 + i % ps) = tile[i];
            }
          }
        } else if constexpr (std::is_same_v<P, TranslationParams>) {
          if (p.col_shift == 0 && p.row_shift == 0) {
            out.spectrogram = s.spectrogram;
            out.annotations = s.annotations;
            return;
          }
          out.spectrogram = noise_canvas(R, C, background_power(s), rng);
          blit(s.spectrogram, out.spectrogram, p.row_shift, p.col_shift);
          map_boxes(s.annotations,
                    {1.0, static_cast<double>(p.row_shift), static_cast<double>(p.col_shift), R, C, R, C},
                    out.annotations);
        } else if constexpr (std::is_same_v<P, RandomResizeCropParams>) {
          detail::require(s.iq.has_value(), "random_resize_crop: source samples required");
          detail::require(p.fft_size == 256 || p.fft_size == 512 || p.fft_size == 1024,
                          "random_resize_crop: fft_size must be 256, 512 or 1024");
          SpecSample resized{dsp::spectrogram(*s.iq, {p.fft_size, p.fft_size, 0}), s.annotations, std::nullopt};
          const std::size_t rows = resized.spectrogram.rows(), cols = resized.spectrogram.cols();
          const auto dr = fit_offset(rows, kCanonical, p.row_offset);
          const auto dc = fit_offset(cols, kCanonical, p.col_offset);
          out.spectrogram = noise_canvas(kCanonical, kCanonical, background_power(resized), rng);
          blit(resized.spectrogram, out.spectrogram, dr, dc);
          map_boxes(s.annotations,
                    {1.0, static_cast<double>(dr), static_cast<double>(dc), rows, cols, kCanonical, kCanonical},
                    out.annotations);
        } else if constexpr (std::is_same_v<P, MosaicCropParams>) {
          detail::require(p.row_offset <= R && p.col_offset <= C, "mosaic_crop: window outside the grid");
          const Spectrogram grid = mosaic_grid(s, extras);
          out.spectrogram = Spectrogram(R, C);
          blit(grid, out.spectrogram, -static_cast<std::ptrdiff_t>(p.row_offset),
               -static_cast<std::ptrdiff_t>(p.col_offset));
          for (std::size_t q = 0; q < 4; ++q) {
            const double dr = static_cast<double>((q / 2) * R) - static_cast<double>(p.row_offset);
            const double dc = static_cast<double>((q % 2) * C) - static_cast<double>(p.col_offset);
            map_boxes(quadrant_boxes(s, extras, q), {1.0, dr, dc, R, C, R, C}, out.annotations);
          }
        } else if constexpr (std::is_same_v<P, MosaicDownsampleParams>) {
          const Spectrogram grid = mosaic_grid(s, extras);
          out.spectrogram = Spectrogram(R, C);
          for (std::size_t r = 0; r < R; ++r) {
            for (std::size_t c = 0; c < C; ++c) {
              out.spectrogram.at(r, c) = 0.25 * (grid.at(2 * r, 2 * c) + grid.at(2 * r + 1, 2 * c) +
                                                 grid.at(2 * r, 2 * c + 1) + grid.at(2 * r + 1, 2 * c + 1));
            }
          }
          for (std::size_t q = 0; q < 4; ++q) {
            const double dr = 0.5 * static_cast<double>((q / 2) * R);
            const double dc = 0.5 * static_cast<double>((q % 2) * C);
            map_boxes(quadrant_boxes(s, extras, q), {0.5, dr, dc, R, C, R, C}, out.annotations);
          }
        }
      },
      params);
  return out;
}

SpecSample apply_spec_augmentation(const SpecSample& s, SpecAugmentation variant, std::span<const SpecSample> extras,
                                   Rng& rng) {
  return apply_spec_augmentation(s, draw_spec_params(variant, s, rng), extras, rng);
}

}  // namespace wbsig::augment
