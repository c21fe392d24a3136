#include "gearcrack/fft.hpp"

#include <fftw3.h>

#include <algorithm>
#include <memory>
#include <mutex>

#include "gearcrack/error.hpp"

namespace gearcrack::fft {
namespace {

std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

struct FftwFree {
  void operator()(void* p) const { fftw_free(p); }
};

template <typename T>
using Buffer = std::unique_ptr<T[], FftwFree>;

template <typename T>
Buffer<T> allocate(std::size_t n) {
  auto* p = static_cast<T*>(fftw_malloc(sizeof(T) * std::max<std::size_t>(n, 1)));
  if (p == nullptr) throw Error("fftw_malloc failed");
  return Buffer<T>(p);
}

class Plan {
 public:
  explicit Plan(fftw_plan p) : plan_(p) {
    if (plan_ == nullptr) throw Error("FFTW planning failed");
  }
  Plan(const Plan&) = delete;
  Plan& operator=(const Plan&) = delete;
  ~Plan() {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(plan_);
  }
  void execute() const { fftw_execute(plan_); }

 private:
  fftw_plan plan_;
};

std::vector<cplx> complex_transform(std::span<const cplx> x, int sign) {
  const std::size_t n = x.size();
  if (n == 0) return {};
  auto in = allocate<fftw_complex>(n);
  auto out = allocate<fftw_complex>(n);
  std::unique_ptr<Plan> plan;
  {
    std::lock_guard lock(planner_mutex());
    plan = std::make_unique<Plan>(
        fftw_plan_dft_1d(static_cast<int>(n), in.get(), out.get(), sign, FFTW_ESTIMATE));
  }
  for (std::size_t i = 0; i < n; ++i) {
    in[i][0] = x[i].real();
    in[i][1] = x[i].imag();
  }
  plan->execute();
  std::vector<cplx> result(n);
  const double scale = sign == FFTW_BACKWARD ? 1.0 / static_cast<double>(n) : 1.0;
  for (std::size_t i = 0; i < n; ++i) result[i] = cplx(out[i][0], out[i][1]) * scale;
  return result;
}

}  // namespace

std::vector<cplx> rfft(std::span<const double> x) {
  const std::size_t n = x.size();
  if (n == 0) return {};
  auto in = allocate<double>(n);
  auto out = allocate<fftw_complex>(n / 2 + 1);
  std::unique_ptr<Plan> plan;
  {
    std::lock_guard lock(planner_mutex());
    plan = std::make_unique<Plan>(
        fftw_plan_dft_r2c_1d(static_cast<int>(n), in.get(), out.get(), FFTW_ESTIMATE));
  }
  std::copy(x.begin(), x.end(), in.get());
  plan->execute();
  std::vector<cplx> result(n / 2 + 1);
  for (std::size_t i = 0; i < result.size(); ++i) result[i] = cplx(out[i][0], out[i][1]);
  return result;
}

std::vector<double> irfft(std::span<const cplx> bins, std::size_t n) {
  if (n == 0) return {};
  if (bins.size() != n / 2 + 1) throw DomainError("irfft: bin count does not match length");
  auto in = allocate<fftw_complex>(n / 2 + 1);
  auto out = allocate<double>(n);
  std::unique_ptr<Plan> plan;
  {
    std::lock_guard lock(planner_mutex());
    // c2r destroys its input, which is a private copy here.
    plan = std::make_unique<Plan>(
        fftw_plan_dft_c2r_1d(static_cast<int>(n), in.get(), out.get(), FFTW_ESTIMATE));
  }
  for (std::size_t i = 0; i < bins.size(); ++i) {
    in[i][0] = bins[i].real();
    in[i][1] = bins[i].imag();
  }
  plan->execute();
  std::vector<double> result(n);
  const double scale = 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) result[i] = out[i] * scale;
  return result;
}

std::vector<cplx> fft(std::span<const cplx> x) { return complex_transform(x, FFTW_FORWARD); }

std::vector<cplx> ifft(std::span<const cplx> x) { return complex_transform(x, FFTW_BACKWARD); }

}  // namespace gearcrack::fft
