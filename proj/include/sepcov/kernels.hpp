#pragma once

// Data-parallel inner loops behind the covariance, projection and streaming
// Hilbert-Schmidt computations. Every kernel has a portable scalar reference
// and vectorized variants; the variant is picked once at startup from CPU
// features and can be overridden for testing.
//
// Each variant uses a fixed reduction order, so results are deterministic for
// a given ISA. Variants agree with the scalar reference to rounding only.

#include <cstddef>
#include <optional>
#include <string_view>

namespace sepcov::kernels {

enum class Isa { Scalar, Avx2, Neon };

std::string_view to_string(Isa isa) noexcept;
std::optional<Isa> parse_isa(std::string_view name) noexcept;

/// True if the variant was compiled in and the running CPU supports it.
bool isa_available(Isa isa) noexcept;

/// Best available variant, unless SEPCOV_ISA names an available one.
Isa detect_isa() noexcept;

Isa active_isa() noexcept;

/// Returns false (and changes nothing) if the variant is unavailable.
bool set_active_isa(Isa isa) noexcept;

struct KernelTable {
  // sum_i a[i] * b[i]
  double (*dot)(const double* a, const double* b, std::size_t n);
  // y[i] += alpha * x[i]
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  // sum_i a[i]*b[i] - c[i]*d[i]
  double (*dot_diff)(const double* a, const double* b, const double* c,
                     const double* d, std::size_t n);
  // out[i] = a[i] - b[i]
  void (*sub)(const double* a, const double* b, double* out, std::size_t n);
};

const KernelTable& table(Isa isa);
const KernelTable& active();

inline double dot(const double* a, const double* b, std::size_t n) {
  return active().dot(a, b, n);
}
inline void axpy(double alpha, const double* x, double* y, std::size_t n) {
  active().axpy(alpha, x, y, n);
}
inline double dot_diff(const double* a, const double* b, const double* c,
                       const double* d, std::size_t n) {
  return active().dot_diff(a, b, c, d, n);
}
inline void sub(const double* a, const double* b, double* out, std::size_t n) {
  active().sub(a, b, out, n);
}

/// RAII override of the active variant, for equivalence tests.
class ScopedIsa {
 public:
  explicit ScopedIsa(Isa isa) : previous_(active_isa()) { set_active_isa(isa); }
  ~ScopedIsa() { set_active_isa(previous_); }
  ScopedIsa(const ScopedIsa&) = delete;
  ScopedIsa& operator=(const ScopedIsa&) = delete;

 private:
  Isa previous_;
};

namespace detail {
extern const KernelTable scalar_table;
#if defined(SEPCOV_HAVE_AVX2)
extern const KernelTable avx2_table;
#endif
#if defined(SEPCOV_HAVE_NEON)
extern const KernelTable neon_table;
#endif
}  // namespace detail

}  // namespace sepcov::kernels
