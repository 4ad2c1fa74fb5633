#include <fftw3.h>

#include <map>
#include <mutex>
#include <utility>

#include "wbsig/dsp.hpp"

namespace wbsig::dsp {
namespace {

// FFTW planning is not thread-safe; execution of an existing plan is. Plans
// are created once per (size, direction) under a lock and reused through the
// new-array execute interface. FFTW_ESTIMATE keeps plan selection
// deterministic, so results do not depend on timing.
class PlanCache {
 public:
  ~PlanCache() {
    for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
  }

  fftw_plan get(std::size_t n, int sign) {
    std::lock_guard lock(mutex_);
    auto key = std::make_pair(n, sign);
    if (auto it = plans_.find(key); it != plans_.end()) return it->second;
    auto* scratch = fftw_alloc_complex(n);
    fftw_plan plan = fftw_plan_dft_1d(static_cast<int>(n), scratch, scratch, sign,
                                      FFTW_ESTIMATE | FFTW_UNALIGNED);
    fftw_free(scratch);
    plans_.emplace(key, plan);
    return plan;
  }

 private:
  std::mutex mutex_;
  std::map<std::pair<std::size_t, int>, fftw_plan> plans_;
};

PlanCache& cache() {
  static PlanCache instance;
  return instance;
}

void execute(std::span<Complex> data, int sign) {
  if (data.empty()) return;
  fftw_plan plan = cache().get(data.size(), sign);
  auto* ptr = reinterpret_cast<fftw_complex*>(data.data());
  fftw_execute_dft(plan, ptr, ptr);
}

}  // namespace

void fft(std::span<Complex> data) { execute(data, FFTW_FORWARD); }

void ifft(std::span<Complex> data) {
  execute(data, FFTW_BACKWARD);
  const double scale = 1.0 / static_cast<double>(data.size());
  for (auto& v : data) v *= scale;
}

double bin_frequency(std::size_t k, std::size_t n) {
  const auto half = (n + 1) / 2;  // bins >= half are negative frequencies
  const auto kk = static_cast<double>(k);
  const auto nn = static_cast<double>(n);
  return k < half ? kk / nn : (kk - nn) / nn;
}

}  // namespace wbsig::dsp
