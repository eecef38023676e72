// AVX2 field kernel: vectorizes the scalar reference over four evaluation
// points per register, coils in the inner loop. Both branches of the
// near-axis switch are evaluated and blended per lane; the arithmetic of the
// selected branch replays the scalar operation sequence exactly (no FMA, the
// TU is compiled with -ffp-contract=off), so results are bitwise identical
// to field_kernel_scalar. See src/loop_math.hpp for the contract.

#include "microtrap/field_kernel.hpp"

#if defined(__AVX2__)

#include "loop_math.hpp"

#include <immintrin.h>

namespace microtrap {
namespace {

inline __m256d broadcast(double v) { return _mm256_set1_pd(v); }

} // namespace

void field_kernel_avx2(const CoilBatch& batch,
                       const double* px, const double* py, const double* pz,
                       std::size_t n,
                       double* bx, double* by, double* bz) {
    const std::size_t nc = batch.size();
    const std::size_t n4 = n - (n % 4);

    const __m256d vhalf = broadcast(0.5);
    const __m256d vone = broadcast(1.0);
    const __m256d vpi = broadcast(detail::kPiLocal);
    const __m256d vswitch = broadcast(detail::kNearAxisSwitch);

    for (std::size_t i = 0; i < n4; i += 4) {
        const __m256d x = _mm256_loadu_pd(px + i);
        const __m256d y = _mm256_loadu_pd(py + i);
        const __m256d z = _mm256_loadu_pd(pz + i);

        __m256d ax = _mm256_setzero_pd();
        __m256d ay = _mm256_setzero_pd();
        __m256d az = _mm256_setzero_pd();

        for (std::size_t c = 0; c < nc; ++c) {
            const __m256d vR = broadcast(batch.radius[c]);
            const __m256d vpref = broadcast(batch.prefactor[c]);

            const __m256d dx = _mm256_sub_pd(x, broadcast(batch.cx[c]));
            const __m256d dy = _mm256_sub_pd(y, broadcast(batch.cy[c]));
            const __m256d dz = _mm256_sub_pd(z, broadcast(batch.cz[c]));

            const __m256d rho2 =
                _mm256_add_pd(_mm256_mul_pd(dx, dx), _mm256_mul_pd(dy, dy));
            const __m256d z2 = _mm256_mul_pd(dz, dz);
            const __m256d R2 = _mm256_mul_pd(vR, vR);

            const __m256d thr = _mm256_mul_pd(vswitch, vR);
            const __m256d use_full =
                _mm256_cmp_pd(rho2, _mm256_mul_pd(thr, thr), _CMP_GT_OQ);

            // ---- full elliptic branch ----
            const __m256d rho = _mm256_sqrt_pd(rho2);
            const __m256d sum_rr = _mm256_add_pd(vR, rho);
            const __m256d dif_rr = _mm256_sub_pd(vR, rho);
            const __m256d Q = _mm256_add_pd(_mm256_mul_pd(sum_rr, sum_rr), z2);
            const __m256d A = _mm256_add_pd(_mm256_mul_pd(dif_rr, dif_rr), z2);
            const __m256d m = _mm256_div_pd(
                _mm256_mul_pd(_mm256_mul_pd(broadcast(4.0), vR), rho), Q);

            // fixed-iteration AGM, identical to detail::agm_ke
            __m256d a = vone;
            __m256d g = _mm256_sqrt_pd(_mm256_sub_pd(vone, m));
            __m256d sum = _mm256_mul_pd(vhalf, m);
            __m256d pow2 = vone;
            for (int it = 0; it < detail::kAgmIterations; ++it) {
                const __m256d cc = _mm256_mul_pd(vhalf, _mm256_sub_pd(a, g));
                const __m256d an = _mm256_mul_pd(vhalf, _mm256_add_pd(a, g));
                g = _mm256_sqrt_pd(_mm256_mul_pd(a, g));
                a = an;
                sum = _mm256_add_pd(sum, _mm256_mul_pd(pow2, _mm256_mul_pd(cc, cc)));
                pow2 = _mm256_add_pd(pow2, pow2);
            }
            const __m256d K = _mm256_div_pd(vpi, _mm256_mul_pd(broadcast(2.0), a));
            const __m256d E = _mm256_mul_pd(K, _mm256_sub_pd(vone, sum));

            const __m256d pref_q = _mm256_div_pd(vpref, _mm256_sqrt_pd(Q));
            const __m256d r2sum = _mm256_add_pd(rho2, z2);
            const __m256d bz_term = _mm256_add_pd(
                K, _mm256_div_pd(_mm256_mul_pd(E, _mm256_sub_pd(R2, r2sum)), A));
            const __m256d lat_term = _mm256_sub_pd(
                _mm256_div_pd(_mm256_mul_pd(E, _mm256_add_pd(R2, r2sum)), A), K);
            const __m256d brho_over_rho = _mm256_div_pd(
                _mm256_mul_pd(_mm256_mul_pd(pref_q, dz), lat_term), rho2);
            const __m256d bx_full = _mm256_mul_pd(brho_over_rho, dx);
            const __m256d by_full = _mm256_mul_pd(brho_over_rho, dy);
            const __m256d bz_full = _mm256_mul_pd(pref_q, bz_term);

            // ---- near-axis expansion ----
            const __m256d D = _mm256_add_pd(R2, z2);
            const __m256d sD = _mm256_sqrt_pd(D);
            const __m256d D32 = _mm256_mul_pd(D, sD);
            const __m256d D52 = _mm256_mul_pd(D32, D);
            const __m256d D72 = _mm256_mul_pd(D52, D);
            const __m256d p = _mm256_mul_pd(vpref, vpi);
            const __m256d pR2 = _mm256_mul_pd(p, R2);
            const __m256d b0 = _mm256_div_pd(pR2, D32);
            const __m256d m3r = _mm256_mul_pd(_mm256_mul_pd(broadcast(-3.0), p), R2);
            const __m256d b0p = _mm256_div_pd(_mm256_mul_pd(m3r, dz), D52);
            const __m256d b0pp = _mm256_div_pd(
                _mm256_mul_pd(
                    m3r, _mm256_sub_pd(D, _mm256_mul_pd(broadcast(5.0), z2))),
                D72);
            const __m256d b0ppp = _mm256_div_pd(
                _mm256_mul_pd(
                    _mm256_mul_pd(
                        _mm256_mul_pd(_mm256_mul_pd(broadcast(-15.0), p), R2), dz),
                    _mm256_sub_pd(_mm256_mul_pd(broadcast(7.0), z2),
                                  _mm256_mul_pd(broadcast(3.0), D))),
                _mm256_mul_pd(D72, D));
            const __m256d lat = _mm256_add_pd(
                _mm256_mul_pd(broadcast(-0.5), b0p),
                _mm256_mul_pd(rho2, _mm256_mul_pd(broadcast(0.0625), b0ppp)));
            const __m256d bx_ser = _mm256_mul_pd(dx, lat);
            const __m256d by_ser = _mm256_mul_pd(dy, lat);
            const __m256d bz_ser = _mm256_sub_pd(
                b0, _mm256_mul_pd(_mm256_mul_pd(broadcast(0.25), rho2), b0pp));

            ax = _mm256_add_pd(ax, _mm256_blendv_pd(bx_ser, bx_full, use_full));
            ay = _mm256_add_pd(ay, _mm256_blendv_pd(by_ser, by_full, use_full));
            az = _mm256_add_pd(az, _mm256_blendv_pd(bz_ser, bz_full, use_full));
        }

        _mm256_storeu_pd(bx + i, ax);
        _mm256_storeu_pd(by + i, ay);
        _mm256_storeu_pd(bz + i, az);
    }

    if (n4 < n) {
        field_kernel_scalar(batch, px + n4, py + n4, pz + n4, n - n4,
                            bx + n4, by + n4, bz + n4);
    }
}

} // namespace microtrap

#endif // __AVX2__
