#include <algorithm>
#include <cmath>

#include "wbsig/error.hpp"
#include "wbsig/targets.hpp"

namespace wbsig::targets {

std::size_t num_labels(LabelGranularity g) {
  switch (g) {
    case LabelGranularity::Fine53: return kNumClasses;
    case LabelGranularity::Family6: return kNumFamilies;
    case LabelGranularity::Detection1: return 1;
  }
  throw ParameterError("unknown label granularity");
}

int label_index(SignalClass c, LabelGranularity g) {
  switch (g) {
    case LabelGranularity::Fine53: return class_index(c);
    case LabelGranularity::Family6: return family_index(class_to_family(c));
    case LabelGranularity::Detection1: return 0;
  }
  throw ParameterError("unknown label granularity");
}

BoxTarget to_box(const SignalAnnotation& a, LabelGranularity g) {
  return {a.t_start + 0.5 * a.duration, a.f_center, a.duration, a.bandwidth, label_index(a.signal_class, g),
          std::nullopt};
}

std::vector<BoxTarget> to_boxes(std::span<const SignalAnnotation> annotations, LabelGranularity g) {
  std::vector<BoxTarget> out;
  out.reserve(annotations.size());
  for (const auto& a : annotations) out.push_back(to_box(a, g));
  return out;
}

std::vector<BoxTarget> to_boxes(const WidebandExample& x, LabelGranularity g) {
  return to_boxes(x.annotations, g);
}

PixelBox box_pixels(const BoxTarget& box, std::size_t rows, std::size_t cols) {
  const auto R = static_cast<double>(rows), C = static_cast<double>(cols);
  const auto clamp_to = [](double v, double hi) { return static_cast<std::size_t>(std::clamp(v, 0.0, hi)); };
  PixelBox p;
  p.col0 = clamp_to(std::floor(box.t0() * C), C);
  p.col1 = clamp_to(std::ceil(box.t1() * C), C);
  p.row0 = clamp_to(std::floor((box.f0() + 0.5) * R), R);
  p.row1 = clamp_to(std::ceil((box.f1() + 0.5) * R), R);
  p.col1 = std::max(p.col1, p.col0);
  p.row1 = std::max(p.row1, p.row0);
  return p;
}

MaskTarget to_mask(std::span<const SignalAnnotation> annotations, LabelGranularity g, std::size_t rows,
                   std::size_t cols) {
  MaskTarget mask(num_labels(g), rows, cols);
  for (const auto& a : annotations) {
    const BoxTarget box = to_box(a, g);
    const PixelBox p = box_pixels(box, rows, cols);
    const auto ch = static_cast<std::size_t>(box.class_index);
    for (std::size_t r = p.row0; r < p.row1; ++r) {
      for (std::size_t c = p.col0; c < p.col1; ++c) mask.at(ch, r, c) = 1.0f;
    }
  }
  return mask;
}

MaskTarget to_mask(const WidebandExample& x, LabelGranularity g) {
  return to_mask(x.annotations, g);
}

std::vector<BoxTarget> mask_to_boxes(const MaskTarget& mask, double threshold) {
  const std::size_t R = mask.rows(), C = mask.cols();
  std::vector<BoxTarget> out;
  std::vector<char> seen(R * C);
  std::vector<std::size_t> stack;

  for (std::size_t ch = 0; ch < mask.channels(); ++ch) {
    std::fill(seen.begin(), seen.end(), 0);
    const auto on = [&](std::size_t r, std::size_t c) { return mask.at(ch, r, c) >= threshold; };
    for (std::size_t r = 0; r < R; ++r) {
      for (std::size_t c = 0; c < C; ++c) {
        if (seen[r * C + c] || !on(r, c)) continue;
        std::size_t rmin = r, rmax = r, cmin = c, cmax = c;
        seen[r * C + c] = 1;
        stack.assign(1, r * C + c);
        while (!stack.empty()) {
          const std::size_t idx = stack.back();
          stack.pop_back();
          const std::size_t pr = idx / C, pc = idx % C;
          rmin = std::min(rmin, pr), rmax = std::max(rmax, pr);
          cmin = std::min(cmin, pc), cmax = std::max(cmax, pc);
          const auto visit = [&](std::size_t nr, std::size_t nc) {
            const std::size_t n = nr * C + nc;
            if (!seen[n] && on(nr, nc)) {
              seen[n] = 1;
              stack.push_back(n);
            }
          };
          if (pr > 0) visit(pr - 1, pc);
          if (pr + 1 < R) visit(pr + 1, pc);
          if (pc > 0) visit(pr, pc - 1);
          if (pc + 1 < C) visit(pr, pc + 1);
        }
        const double t0 = static_cast<double>(cmin) / static_cast<double>(C);
        const double t1 = static_cast<double>(cmax + 1) / static_cast<double>(C);
        const double f0 = static_cast<double>(rmin) / static_cast<double>(R) - 0.5;
        const double f1 = static_cast<double>(rmax + 1) / static_cast<double>(R) - 0.5;
        out.push_back({0.5 * (t0 + t1), 0.5 * (f0 + f1), t1 - t0, f1 - f0, static_cast<int>(ch), std::nullopt});
      }
    }
  }
  return out;
}

double box_score_from_mask(const MaskTarget& prob, const BoxTarget& box, std::size_t channel) {
  detail::require(channel < prob.channels(), "box_score_from_mask: channel out of range");
  const PixelBox p = box_pixels(box, prob.rows(), prob.cols());
  detail::require(p.area() > 0, "box_score_from_mask: box covers no pixels");
  double sum = 0.0;
  for (std::size_t r = p.row0; r < p.row1; ++r) {
    for (std::size_t c = p.col0; c < p.col1; ++c) sum += prob.at(channel, r, c);
  }
  return sum / static_cast<double>(p.area());
}

}  // namespace wbsig::targets
