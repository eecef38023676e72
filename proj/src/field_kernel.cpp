#include "microtrap/field_kernel.hpp"

#include "microtrap/constants.hpp"

#include <cmath>
#include <cstdlib>
#include <mutex>
#include <stdexcept>

namespace microtrap {

#if defined(MICROTRAP_HAVE_AVX2_TU)
void field_kernel_avx2(const CoilBatch&, const double*, const double*, const double*,
                       std::size_t, double*, double*, double*);
#endif

void CoilSpec::validate() const {
    if (!(radius > 0.0) || !std::isfinite(radius))
        throw std::invalid_argument("coil radius must be positive and finite");
    if (!std::isfinite(current))
        throw std::invalid_argument("coil current must be finite");
    if (!std::isfinite(phase))
        throw std::invalid_argument("coil phase must be finite");
    if (turns < 1)
        throw std::invalid_argument("coil turns must be >= 1");
    if (!center.finite())
        throw std::invalid_argument("coil center must be finite");
}

double CoilSpec::instantaneous_current(double rf_phase) const {
    return current * std::cos(phase + rf_phase) * static_cast<double>(turns);
}

CoilBatch CoilBatch::from(std::span<const CoilSpec> coils, double rf_phase) {
    CoilBatch b;
    const std::size_t n = coils.size();
    b.cx.reserve(n);
    b.cy.reserve(n);
    b.cz.reserve(n);
    b.radius.reserve(n);
    b.prefactor.reserve(n);
    for (const CoilSpec& c : coils) {
        c.validate();
        b.cx.push_back(c.center.x);
        b.cy.push_back(c.center.y);
        b.cz.push_back(c.center.z);
        b.radius.push_back(c.radius);
        b.prefactor.push_back(constants.mu0 * c.instantaneous_current(rf_phase) /
                              (2.0 * kPi));
    }
    return b;
}

bool avx2_kernel_available() {
#if defined(MICROTRAP_HAVE_AVX2_TU) && defined(__x86_64__)
    return __builtin_cpu_supports("avx2");
#else
    return false;
#endif
}

FieldKernelFn field_kernel(KernelKind kind) {
    switch (kind) {
    case KernelKind::Scalar:
        return &field_kernel_scalar;
    case KernelKind::Avx2:
#if defined(MICROTRAP_HAVE_AVX2_TU)
        if (avx2_kernel_available()) return &field_kernel_avx2;
#endif
        throw std::invalid_argument("AVX2 field kernel not available on this machine");
    }
    throw std::invalid_argument("unknown kernel kind");
}

namespace {

std::optional<KernelKind> g_forced;
std::once_flag g_env_once;

void apply_env_override() {
    if (const char* env = std::getenv("MTSIM_KERNEL")) {
        const std::string v(env);
        if (v == "scalar") g_forced = KernelKind::Scalar;
        else if (v == "avx2") g_forced = KernelKind::Avx2;
    }
}

} // namespace

KernelKind active_kernel() {
    std::call_once(g_env_once, apply_env_override);
    if (g_forced) return *g_forced;
    return avx2_kernel_available() ? KernelKind::Avx2 : KernelKind::Scalar;
}

FieldKernelFn active_field_kernel() { return field_kernel(active_kernel()); }

void force_kernel(std::optional<KernelKind> kind) {
    std::call_once(g_env_once, apply_env_override);
    g_forced = kind;
}

std::string kernel_name(KernelKind kind) {
    return kind == KernelKind::Scalar ? "scalar" : "avx2";
}

} // namespace microtrap
