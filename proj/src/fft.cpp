#include "fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <tuple>
#include <vector>

namespace ciflow::fft {
namespace {

// FFTW planning is not thread-safe; execution with the new-array interface is.
// ESTIMATE planning keeps the chosen algorithm (and hence the bits) identical
// from run to run; UNALIGNED lets one plan serve any std::vector buffer.
class PlanCache {
 public:
  fftw_plan get(int dim, int n, int sign) {
    std::lock_guard lock(mutex_);
    const auto key = std::make_tuple(dim, n, sign);
    if (auto it = plans_.find(key); it != plans_.end()) return it->second;
    std::vector<int> dims(static_cast<std::size_t>(dim), n);
    std::size_t total = 1;
    for (int d = 0; d < dim; ++d) total *= static_cast<std::size_t>(n);
    std::vector<fftw_complex> in(total), out(total);
    fftw_plan plan = fftw_plan_dft(dim, dims.data(), in.data(), out.data(), sign,
                                   FFTW_ESTIMATE | FFTW_UNALIGNED);
    plans_.emplace(key, plan);
    return plan;
  }

  ~PlanCache() {
    for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
  }

 private:
  std::mutex mutex_;
  std::map<std::tuple<int, int, int>, fftw_plan> plans_;
};

PlanCache& cache() {
  static PlanCache instance;
  return instance;
}

void execute(const SpectralGrid& grid, std::span<const Complex> in, std::span<Complex> out, int sign) {
  if (in.size() != grid.size() || out.size() != grid.size())
    throw PreconditionError("fft buffer size does not match grid");
  fftw_plan plan = cache().get(grid.dim(), grid.n(), sign);
  // The plan is out-of-place and may clobber its input, so always run from a copy.
  std::vector<Complex> scratch(in.begin(), in.end());
  fftw_execute_dft(plan, reinterpret_cast<fftw_complex*>(scratch.data()),
                   reinterpret_cast<fftw_complex*>(out.data()));
}

}  // namespace

void forward(const SpectralGrid& grid, std::span<const Complex> physical, std::span<Complex> spectral) {
  execute(grid, physical, spectral, FFTW_FORWARD);
  const double norm = 1.0 / static_cast<double>(grid.size());
  for (auto& c : spectral) c *= norm;
}

void inverse(const SpectralGrid& grid, std::span<const Complex> spectral, std::span<Complex> physical) {
  execute(grid, spectral, physical, FFTW_BACKWARD);
}

}  // namespace ciflow::fft
