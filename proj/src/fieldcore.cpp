#include "microtrap/fieldcore.hpp"

#include "microtrap/errors.hpp"
#include "microtrap/parallel.hpp"

#include <array>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <string>

namespace microtrap {

FieldEvaluator::FieldEvaluator(std::span<const CoilSpec> coils, double rf_phase)
    : coils_(coils.begin(), coils.end()),
      batch_(CoilBatch::from(coils, rf_phase)),
      rf_phase_(rf_phase) {}

double FieldEvaluator::min_filament_distance(const Vec3& p, std::size_t* index) const {
    double best = std::numeric_limits<double>::infinity();
    std::size_t best_i = 0;
    for (std::size_t c = 0; c < batch_.size(); ++c) {
        const double dx = p.x - batch_.cx[c];
        const double dy = p.y - batch_.cy[c];
        const double dz = p.z - batch_.cz[c];
        const double rho = std::sqrt(dx * dx + dy * dy);
        const double dr = rho - batch_.radius[c];
        const double d2 = dr * dr + dz * dz;
        if (d2 < best) {
            best = d2;
            best_i = c;
        }
    }
    if (index) *index = best_i;
    return std::sqrt(best);
}

void FieldEvaluator::guard_singularity(const Vec3& p) const {
    if (batch_.size() == 0) return;
    std::size_t idx = 0;
    const double d = min_filament_distance(p, &idx);
    if (d < kSingularDistance) {
        throw SingularityError(
            "field evaluation point (" + std::to_string(p.x) + ", " +
                std::to_string(p.y) + ", " + std::to_string(p.z) +
                ") lies on the filament of coil " + std::to_string(idx),
            idx);
    }
}

Vec3 FieldEvaluator::field(const Vec3& p) const {
    guard_singularity(p);
    double bx, by, bz;
    active_field_kernel()(batch_, &p.x, &p.y, &p.z, 1, &bx, &by, &bz);
    return {bx, by, bz};
}

void FieldEvaluator::jacobian_into(const Vec3& p, double h, FieldSample& out) const {
    // 13-point stencil: center, then per axis [+h, -h, +h/2, -h/2].
    std::array<double, 13> xs, ys, zs, bx, by, bz;
    auto put = [&](std::size_t i, const Vec3& q) {
        xs[i] = q.x;
        ys[i] = q.y;
        zs[i] = q.z;
    };
    put(0, p);
    const std::array<Vec3, 3> axes{Vec3{1, 0, 0}, Vec3{0, 1, 0}, Vec3{0, 0, 1}};
    for (int j = 0; j < 3; ++j) {
        put(1 + 4 * j, p + axes[j] * h);
        put(2 + 4 * j, p - axes[j] * h);
        put(3 + 4 * j, p + axes[j] * (0.5 * h));
        put(4 + 4 * j, p - axes[j] * (0.5 * h));
    }

    active_field_kernel()(batch_, xs.data(), ys.data(), zs.data(), 13,
                          bx.data(), by.data(), bz.data());

    out.point = p;
    out.B = {bx[0], by[0], bz[0]};
    for (int j = 0; j < 3; ++j) {
        const std::size_t ph = 1 + 4 * j, mh = 2 + 4 * j, ph2 = 3 + 4 * j,
                          mh2 = 4 + 4 * j;
        // Richardson-extrapolated central difference:
        //   col = (4 D_{h/2} - D_h) / 3
        const double inv2h = 1.0 / (2.0 * h);
        const double invh = 1.0 / h;
        const Vec3 Dh{(bx[ph] - bx[mh]) * inv2h, (by[ph] - by[mh]) * inv2h,
                      (bz[ph] - bz[mh]) * inv2h};
        const Vec3 Dh2{(bx[ph2] - bx[mh2]) * invh, (by[ph2] - by[mh2]) * invh,
                       (bz[ph2] - bz[mh2]) * invh};
        const Vec3 col = (Dh2 * 4.0 - Dh) / 3.0;
        out.jacobian(0, j) = col.x;
        out.jacobian(1, j) = col.y;
        out.jacobian(2, j) = col.z;
    }
}

FieldSample FieldEvaluator::sample(const Vec3& p) const {
    std::size_t idx = 0;
    const double d = batch_.size() ? min_filament_distance(p, &idx)
                                   : std::numeric_limits<double>::infinity();
    if (d < kSingularDistance) {
        throw SingularityError("jacobian stencil center lies on the filament of coil " +
                                   std::to_string(idx),
                               idx);
    }
    const double h = std::max(1e-9, 1e-6 * d);
    if (d - h < kSingularDistance) {
        // Stencil may straddle the filament; check each stencil point.
        const std::array<Vec3, 3> axes{Vec3{1, 0, 0}, Vec3{0, 1, 0}, Vec3{0, 0, 1}};
        for (int j = 0; j < 3; ++j) {
            for (double s : {h, -h, 0.5 * h, -0.5 * h}) guard_singularity(p + axes[j] * s);
        }
    }
    FieldSample out;
    jacobian_into(p, h, out);
    return out;
}

void FieldEvaluator::field_many(std::span<const Vec3> points, std::span<Vec3> out,
                                int threads) const {
    if (out.size() < points.size())
        throw std::invalid_argument("field_many: output span too small");
    for (const Vec3& p : points) guard_singularity(p);

    std::exception_ptr err;
    std::mutex err_mutex;
    parallel_for(points.size(), threads, [&](std::size_t b, std::size_t e) {
        try {
            std::vector<double> xs(e - b), ys(e - b), zs(e - b), bx(e - b), by(e - b),
                bz(e - b);
            for (std::size_t i = b; i < e; ++i) {
                xs[i - b] = points[i].x;
                ys[i - b] = points[i].y;
                zs[i - b] = points[i].z;
            }
            active_field_kernel()(batch_, xs.data(), ys.data(), zs.data(), e - b,
                                  bx.data(), by.data(), bz.data());
            for (std::size_t i = b; i < e; ++i) out[i] = {bx[i - b], by[i - b], bz[i - b]};
        } catch (...) {
            std::lock_guard<std::mutex> lk(err_mutex);
            if (!err) err = std::current_exception();
        }
    });
    if (err) std::rethrow_exception(err);
}

void FieldEvaluator::sample_many(std::span<const Vec3> points,
                                 std::span<FieldSample> out, int threads) const {
    if (out.size() < points.size())
        throw std::invalid_argument("sample_many: output span too small");
    std::exception_ptr err;
    std::mutex err_mutex;
    parallel_for(points.size(), threads, [&](std::size_t b, std::size_t e) {
        try {
            for (std::size_t i = b; i < e; ++i) out[i] = sample(points[i]);
        } catch (...) {
            std::lock_guard<std::mutex> lk(err_mutex);
            if (!err) err = std::current_exception();
        }
    });
    if (err) std::rethrow_exception(err);
}

FieldSample loop_field(const CoilSpec& coil, const Vec3& point) {
    return FieldEvaluator(std::span<const CoilSpec>(&coil, 1)).sample(point);
}

FieldSample array_field(std::span<const CoilSpec> coils, const Vec3& point,
                        double rf_phase) {
    return FieldEvaluator(coils, rf_phase).sample(point);
}

Mat3 field_jacobian(std::span<const CoilSpec> coils, const Vec3& point, double rf_phase) {
    return array_field(coils, point, rf_phase).jacobian;
}

} // namespace microtrap
