#pragma once

#include "microtrap/coil.hpp"

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace microtrap {

// Structure-of-arrays snapshot of a coil layout at one drive phase, the input
// format shared by all field kernels. `prefactor` folds the per-coil constant
// mu0 * I_instantaneous * turns / (2 pi) so kernels touch no globals.
struct CoilBatch {
    std::vector<double> cx, cy, cz; // centers [m]
    std::vector<double> radius;     // [m]
    std::vector<double> prefactor;  // [T m]

    std::size_t size() const { return radius.size(); }

    static CoilBatch from(std::span<const CoilSpec> coils, double rf_phase);
};

// Accumulates the magnetic field of every coil in `batch` at `n` points.
// Outputs are fully overwritten. Implementations must follow the exact
// floating-point operation sequence of the scalar reference kernel so that
// every kernel returns bitwise-identical results.
using FieldKernelFn = void (*)(const CoilBatch& batch,
                               const double* px, const double* py, const double* pz,
                               std::size_t n,
                               double* bx, double* by, double* bz);

enum class KernelKind { Scalar, Avx2 };

// Reference implementation (always available).
void field_kernel_scalar(const CoilBatch&, const double*, const double*, const double*,
                         std::size_t, double*, double*, double*);

// True when the binary carries the AVX2 kernel and the CPU supports it.
bool avx2_kernel_available();

// Kernel lookup; throws std::invalid_argument if `kind` is unavailable here.
FieldKernelFn field_kernel(KernelKind kind);

// Best kernel for this machine, honoring a prior force_kernel() override.
KernelKind active_kernel();
FieldKernelFn active_field_kernel();

// Pin kernel selection (std::nullopt restores auto-detection). Used by the
// equivalence tests and the MTSIM_KERNEL=scalar|avx2 environment override.
void force_kernel(std::optional<KernelKind> kind);

std::string kernel_name(KernelKind kind);

} // namespace microtrap
