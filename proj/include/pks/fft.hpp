#pragma once

#include <fftw3.h>

#include <complex>
#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <new>
#include <utility>
#include <vector>

#include "pks/grid.hpp"

namespace pks {

/// Allocator backed by fftw_malloc so every buffer has the alignment the
/// SIMD codelets of a shared plan expect.
template <class T>
struct FftwAllocator {
  using value_type = T;

  FftwAllocator() noexcept = default;
  template <class U>
  FftwAllocator(const FftwAllocator<U>&) noexcept {}

  T* allocate(std::size_t n) {
    if (n == 0) return nullptr;
    void* p = fftw_malloc(n * sizeof(T));
    if (p == nullptr) throw std::bad_alloc();
    return static_cast<T*>(p);
  }
  void deallocate(T* p, std::size_t) noexcept { fftw_free(p); }

  template <class U>
  bool operator==(const FftwAllocator<U>&) const noexcept { return true; }
};

using Complex = std::complex<double>;
using RealBuffer = std::vector<double, FftwAllocator<double>>;
using ComplexBuffer = std::vector<Complex, FftwAllocator<Complex>>;

namespace detail {

/// Forward/backward plans for one grid shape. Plans are immutable after
/// creation and executed through the new-array interface, which FFTW
/// guarantees to be thread-safe.
class FftPlans {
 public:
  explicit FftPlans(const TorusGrid& grid) : grid_(grid) {
    std::vector<int> dims(grid.dim());
    for (int a = 0; a < grid.dim(); ++a) dims[a] = grid.n();  // all axes equal, order irrelevant
    RealBuffer real(grid.size());
    ComplexBuffer spec(grid.spectral_size());
    auto* c = reinterpret_cast<fftw_complex*>(spec.data());
    forward_ = fftw_plan_dft_r2c(grid.dim(), dims.data(), real.data(), c, FFTW_ESTIMATE);
    backward_ = fftw_plan_dft_c2r(grid.dim(), dims.data(), c, real.data(), FFTW_ESTIMATE);
  }
  FftPlans(const FftPlans&) = delete;
  FftPlans& operator=(const FftPlans&) = delete;
  ~FftPlans() {
    fftw_destroy_plan(forward_);
    fftw_destroy_plan(backward_);
  }

  void forward(const double* in, Complex* out) const {
    fftw_execute_dft_r2c(forward_, const_cast<double*>(in), reinterpret_cast<fftw_complex*>(out));
  }
  // c2r destroys its input.
  void backward(Complex* in, double* out) const {
    fftw_execute_dft_c2r(backward_, reinterpret_cast<fftw_complex*>(in), out);
  }

  static std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
  }

 private:
  TorusGrid grid_;
  fftw_plan forward_{};
  fftw_plan backward_{};
};

inline std::shared_ptr<const FftPlans> plans_for(const TorusGrid& grid) {
  static std::map<std::pair<int, int>, std::shared_ptr<const FftPlans>> cache;
  std::lock_guard lock(FftPlans::planner_mutex());
  auto key = std::make_pair(grid.dim(), grid.n());
  auto it = cache.find(key);
  if (it == cache.end()) it = cache.emplace(key, std::make_shared<FftPlans>(grid)).first;
  return it->second;
}

}  // namespace detail
}  // namespace pks
