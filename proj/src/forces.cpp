#include "microtrap/forces.hpp"

#include "microtrap/constants.hpp"
#include "microtrap/parallel.hpp"

#include <cmath>
#include <exception>
#include <mutex>
#include <stdexcept>

namespace microtrap {

void ScanGrid::validate() const {
    if (axes.empty() || axes.size() > 3)
        throw std::invalid_argument("scan grid must have 1 to 3 axes");
    for (const auto& a : axes) {
        if (a.count < 1) throw std::invalid_argument("scan axis count must be >= 1");
        const double n2 = a.direction.norm2();
        if (!(std::abs(n2 - 1.0) < 1e-9))
            throw std::invalid_argument("scan axis direction must be a unit vector");
        if (!std::isfinite(a.start) || !std::isfinite(a.stop))
            throw std::invalid_argument("scan axis range must be finite");
    }
}

std::vector<int> ScanGrid::indices(std::size_t k) const {
    std::vector<int> idx(axes.size(), 0);
    for (int j = static_cast<int>(axes.size()) - 1; j >= 0; --j) {
        const std::size_t n = static_cast<std::size_t>(axes[j].count);
        idx[j] = static_cast<int>(k % n);
        k /= n;
    }
    return idx;
}

Vec3 ScanGrid::point(std::size_t k) const {
    Vec3 p = origin;
    const auto idx = indices(k);
    for (std::size_t j = 0; j < axes.size(); ++j)
        p += axes[j].direction * axes[j].coordinate(idx[j]);
    return p;
}

std::vector<Vec3> ScanGrid::points() const {
    std::vector<Vec3> pts(total());
    for (std::size_t k = 0; k < pts.size(); ++k) pts[k] = point(k);
    return pts;
}

MomentModel MomentModel::adiabatic(double mu_eff) {
    MomentModel m;
    m.mode = MomentMode::AdiabaticFollow;
    m.mu_eff = mu_eff;
    m.validate();
    return m;
}

MomentModel MomentModel::pinned(double mu_eff, const Vec3& direction) {
    MomentModel m;
    m.mode = MomentMode::Pinned;
    m.mu_eff = mu_eff;
    m.direction = direction.normalized();
    m.validate();
    return m;
}

void MomentModel::validate() const {
    // mu_eff = 0 is legal: a first-order field-insensitive (clock-state) moment
    // feels no force.
    if (!(mu_eff >= 0.0) || !std::isfinite(mu_eff))
        throw std::invalid_argument("moment mu_eff must be nonnegative and finite");
    if (mode == MomentMode::Pinned) {
        if (!direction.finite() || !(std::abs(direction.norm() - 1.0) < 1e-9))
            throw std::invalid_argument("pinned moment direction must be a unit vector");
    }
}

ForceResult dipole_force(const FieldSample& sample, const MomentModel& moment,
                         const Vec3& external_B) {
    moment.validate();
    Vec3 bhat;
    int multiplier;
    if (moment.mode == MomentMode::AdiabaticFollow) {
        const Vec3 total = sample.B + external_B;
        const double mag = total.norm();
        if (!(mag > 0.0))
            throw std::invalid_argument(
                "adiabatic moment undefined at a field zero; add a bias field");
        bhat = total / mag;
        multiplier = 2;
    } else {
        bhat = moment.direction;
        multiplier = 1;
    }
    // F_i = mu_eff * sum_j bhat_j dB_j/dx_i; the uniform external field has
    // zero gradient so only the coil-field jacobian enters.
    const Vec3 F = sample.jacobian.left_multiply(bhat) * moment.mu_eff;
    return {F, multiplier};
}

std::vector<ForceMapRow> force_map(std::span<const CoilSpec> coils,
                                   const MomentModel& moment, const ScanGrid& grid,
                                   const Vec3& external_B, double rf_phase,
                                   int threads) {
    grid.validate();
    moment.validate();
    const FieldEvaluator eval(coils, rf_phase);
    const std::vector<Vec3> pts = grid.points();
    std::vector<ForceMapRow> rows(pts.size());

    std::exception_ptr err;
    std::mutex err_mutex;
    parallel_for(pts.size(), threads, [&](std::size_t b, std::size_t e) {
        try {
            for (std::size_t i = b; i < e; ++i) {
                const FieldSample s = eval.sample(pts[i]);
                const ForceResult f = dipole_force(s, moment, external_B);
                rows[i] = {pts[i], s.B, f.F};
            }
        } catch (...) {
            std::lock_guard<std::mutex> lk(err_mutex);
            if (!err) err = std::current_exception();
        }
    });
    if (err) std::rethrow_exception(err);
    return rows;
}

double adiabaticity_ratio(double B_magnitude, const MomentModel& moment,
                          double f_drive) {
    moment.validate();
    if (!(B_magnitude >= 0.0) || !std::isfinite(B_magnitude))
        throw std::invalid_argument("field magnitude must be non-negative");
    if (!(f_drive > 0.0))
        throw std::invalid_argument("drive frequency must be positive");
    const double f_larmor = moment.mu_eff * B_magnitude / constants.planck_h;
    return f_larmor / f_drive;
}

} // namespace microtrap
