#include "microtrap/field_kernel.hpp"

#include "loop_math.hpp"

namespace microtrap {

void field_kernel_scalar(const CoilBatch& batch,
                         const double* px, const double* py, const double* pz,
                         std::size_t n,
                         double* bx, double* by, double* bz) {
    const std::size_t nc = batch.size();
    for (std::size_t i = 0; i < n; ++i) {
        double ax = 0.0, ay = 0.0, az = 0.0;
        const double x = px[i], y = py[i], z = pz[i];
        for (std::size_t c = 0; c < nc; ++c) {
            detail::loop_accumulate(x - batch.cx[c], y - batch.cy[c], z - batch.cz[c],
                                    batch.radius[c], batch.prefactor[c], ax, ay, az);
        }
        bx[i] = ax;
        by[i] = ay;
        bz[i] = az;
    }
}

} // namespace microtrap
