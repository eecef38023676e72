#include "microtrap/spinsim.hpp"

#include "microtrap/constants.hpp"
#include "microtrap/errors.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace microtrap {

namespace {

using std::complex;
using cd = complex<double>;

constexpr cd kI{0.0, 1.0};

std::size_t checked_dim(int n) {
    if (n < 1 || n > SpinState::kMaxSpins)
        throw ResourceError("spin count must lie in [1, " +
                            std::to_string(SpinState::kMaxSpins) + "], got " +
                            std::to_string(n));
    return std::size_t{1} << n;
}

// Diagonal energies: the zz couplings plus local z fields.
std::vector<double> diagonal_energies(const HamiltonianSpec& ham) {
    const std::size_t dim = checked_dim(ham.n);
    std::vector<double> diag(dim, 0.0);
    for (std::size_t k = 0; k < dim; ++k) {
        double e = 0.0;
        for (int i = 0; i < ham.n; ++i) {
            const int si = SpinState::sz_of(k, i);
            for (int j = i + 1; j < ham.n; ++j)
                e += ham.zz_at(i, j) * si * SpinState::sz_of(k, j);
            if (!ham.local.empty()) e += ham.local[i].z * si;
        }
        diag[k] = e;
    }
    return diag;
}

// out = H v, with precomputed diagonal.
void apply_hamiltonian(const HamiltonianSpec& ham, const std::vector<double>& diag,
                       const std::vector<cd>& v, std::vector<cd>& out) {
    const std::size_t dim = v.size();
    for (std::size_t k = 0; k < dim; ++k) out[k] = diag[k] * v[k];
    for (int j = 0; j < ham.n; ++j) {
        const double hx = ham.transverse_field + (ham.local.empty() ? 0.0 : ham.local[j].x);
        const double hy = ham.local.empty() ? 0.0 : ham.local[j].y;
        if (hx == 0.0 && hy == 0.0) continue;
        const std::size_t b = std::size_t{1} << j;
        for (std::size_t k = 0; k < dim; ++k) {
            const std::size_t kk = k ^ b;
            // <k| H |kk> for the sigma_x / sigma_y parts of site j.
            const cd elem{hx, hy * SpinState::sz_of(kk, j)};
            out[k] += elem * v[kk];
        }
    }
}

double vec_norm(const std::vector<cd>& v) {
    double s = 0.0;
    for (const cd& a : v) s += std::norm(a);
    return std::sqrt(s);
}

} // namespace

SpinState SpinState::basis_state(int n, std::size_t index) {
    const std::size_t dim = checked_dim(n);
    if (index >= dim) throw std::invalid_argument("basis index out of range");
    SpinState s;
    s.n = n;
    s.amp.assign(dim, cd{0.0, 0.0});
    s.amp[index] = 1.0;
    return s;
}

SpinState SpinState::all_up(int n) { return basis_state(n, 0); }

SpinState SpinState::plus_state(int n) {
    const std::size_t dim = checked_dim(n);
    SpinState s;
    s.n = n;
    s.amp.assign(dim, cd{1.0 / std::sqrt(static_cast<double>(dim)), 0.0});
    return s;
}

double SpinState::norm() const { return vec_norm(amp); }

void SpinState::normalize() {
    const double nrm = norm();
    if (!(nrm > 0.0)) throw std::invalid_argument("cannot normalize a zero state");
    for (cd& a : amp) a /= nrm;
}

void HamiltonianSpec::validate() const {
    checked_dim(n);
    if (zz.size() != static_cast<std::size_t>(n) * n)
        throw std::invalid_argument("zz coupling matrix must be n x n");
    for (int i = 0; i < n; ++i) {
        if (zz_at(i, i) != 0.0)
            throw std::invalid_argument("zz diagonal must be zero");
        for (int j = 0; j < n; ++j) {
            const double a = zz_at(i, j), b = zz_at(j, i);
            if (!std::isfinite(a))
                throw std::invalid_argument("zz couplings must be finite");
            if (std::abs(a - b) > 1e-12 * std::max({std::abs(a), std::abs(b), 1e-300}))
                throw std::invalid_argument("zz coupling matrix must be symmetric");
        }
    }
    if (!std::isfinite(transverse_field))
        throw std::invalid_argument("transverse field must be finite");
    if (!local.empty() && local.size() != static_cast<std::size_t>(n))
        throw std::invalid_argument("local field list must have one entry per site");
    for (const Vec3& h : local)
        if (!h.finite()) throw std::invalid_argument("local fields must be finite");
}

HamiltonianSpec HamiltonianSpec::from_coupling(const CouplingMatrix& cm,
                                               double transverse_field_hz,
                                               const LatticeLayout* layout) {
    HamiltonianSpec ham;
    ham.n = static_cast<int>(cm.size());
    checked_dim(ham.n);
    ham.zz.assign(cm.size() * cm.size(), 0.0);
    for (std::size_t i = 0; i < cm.size(); ++i)
        for (std::size_t j = 0; j < cm.size(); ++j)
            if (i != j) ham.zz[i * cm.size() + j] = cm.J(i, j) * constants.planck_h;
    ham.transverse_field = transverse_field_hz * constants.planck_h;
    if (layout) {
        ham.local.assign(cm.size(), Vec3{});
        for (std::size_t q = 0; q < cm.size(); ++q) {
            for (const Site& s : layout->sites) {
                if (s.index == cm.site_index[q] && s.pinned) {
                    ham.local[q] = s.pinned->axis * s.pinned->strength;
                }
            }
        }
    }
    ham.validate();
    return ham;
}

namespace {

SpinState evolve_exact(const SpinState& state, const HamiltonianSpec& ham, double t) {
    const std::size_t dim = state.dim();
    const std::vector<double> diag = diagonal_energies(ham);

    double dmin = diag[0], dmax = diag[0];
    for (double d : diag) {
        dmin = std::min(dmin, d);
        dmax = std::max(dmax, d);
    }
    const double mu = 0.5 * (dmin + dmax);

    double off = 0.0;
    for (int j = 0; j < ham.n; ++j) {
        const double hx =
            ham.transverse_field + (ham.local.empty() ? 0.0 : ham.local[j].x);
        const double hy = ham.local.empty() ? 0.0 : ham.local[j].y;
        off += std::hypot(hx, hy);
    }
    const double nu = std::max(dmax - mu, mu - dmin) + off; // >= ||H - mu I||_2

    const double theta = nu * std::abs(t) / constants.hbar;
    const int slices = std::max(1, static_cast<int>(std::ceil(theta / 8.0)));
    const double dt = t / slices;

    // Shifted Hamiltonian applied through the diagonal.
    std::vector<double> diag_shift(diag);
    for (double& d : diag_shift) d -= mu;

    std::vector<cd> v(state.amp);
    std::vector<cd> term(dim), tmp(dim), acc(dim);
    const cd step_factor = -kI * (dt / constants.hbar);

    for (int s = 0; s < slices; ++s) {
        acc = v;
        term = v;
        double acc_norm = vec_norm(acc);
        for (int k = 1; k <= 160; ++k) {
            apply_hamiltonian(ham, diag_shift, term, tmp);
            const cd f = step_factor / static_cast<double>(k);
            for (std::size_t q = 0; q < dim; ++q) term[q] = f * tmp[q];
            for (std::size_t q = 0; q < dim; ++q) acc[q] += term[q];
            const double tn = vec_norm(term);
            acc_norm = std::max(acc_norm, vec_norm(acc));
            if (tn <= 1e-16 * acc_norm) break;
        }
        v = acc;
    }

    // Undo the spectral shift with a global phase.
    const cd phase = std::exp(-kI * (mu * t / constants.hbar));
    SpinState out;
    out.n = state.n;
    out.amp.resize(dim);
    for (std::size_t q = 0; q < dim; ++q) out.amp[q] = phase * v[q];
    return out;
}

SpinState evolve_trotter(const SpinState& state, const HamiltonianSpec& ham, double t,
                         double trotter_dt) {
    if (!(trotter_dt > 0.0))
        throw std::invalid_argument("trotter evolution needs a positive time step");
    const std::size_t dim = state.dim();
    const std::vector<double> diag = diagonal_energies(ham);

    const int steps =
        std::max(1, static_cast<int>(std::ceil(std::abs(t) / trotter_dt)));
    const double dt = t / steps;

    // Half-step diagonal phases.
    std::vector<cd> half_phase(dim);
    for (std::size_t k = 0; k < dim; ++k)
        half_phase[k] = std::exp(-kI * (diag[k] * dt / (2.0 * constants.hbar)));

    // Per-site transverse rotations for a full step.
    struct SiteRot {
        cd off_ud; // acts on (up, down) pair: u' = c u + off_ud d
        cd off_du; // d' = off_du u + c d
        double c;
        bool identity;
    };
    std::vector<SiteRot> rot(ham.n);
    for (int j = 0; j < ham.n; ++j) {
        const double hx =
            ham.transverse_field + (ham.local.empty() ? 0.0 : ham.local[j].x);
        const double hy = ham.local.empty() ? 0.0 : ham.local[j].y;
        const double m = std::hypot(hx, hy);
        if (m == 0.0) {
            rot[j] = {cd{}, cd{}, 1.0, true};
            continue;
        }
        const double phi = m * dt / constants.hbar;
        const double nx = hx / m, ny = hy / m;
        const double c = std::cos(phi), s = std::sin(phi);
        rot[j] = {-kI * s * cd{nx, -ny}, -kI * s * cd{nx, ny}, c, false};
    }

    std::vector<cd> v(state.amp);
    auto apply_half_diag = [&] {
        for (std::size_t k = 0; k < dim; ++k) v[k] *= half_phase[k];
    };
    auto apply_rotations = [&] {
        for (int j = 0; j < ham.n; ++j) {
            if (rot[j].identity) continue;
            const std::size_t b = std::size_t{1} << j;
            for (std::size_t k = 0; k < dim; ++k) {
                if (k & b) continue; // visit each (up, down) pair once
                const cd u = v[k], d = v[k | b];
                v[k] = rot[j].c * u + rot[j].off_ud * d;
                v[k | b] = rot[j].off_du * u + rot[j].c * d;
            }
        }
    };

    for (int s = 0; s < steps; ++s) {
        apply_half_diag();
        apply_rotations();
        apply_half_diag();
    }

    SpinState out;
    out.n = state.n;
    out.amp = std::move(v);
    return out;
}

} // namespace

SpinState evolve(const SpinState& state, const HamiltonianSpec& ham, double t,
                 EvolveMethod method, double trotter_dt) {
    ham.validate();
    if (state.n != ham.n)
        throw std::invalid_argument("state and Hamiltonian spin counts differ");
    if (state.dim() != (std::size_t{1} << state.n))
        throw std::invalid_argument("state vector has wrong dimension");
    if (!std::isfinite(t)) throw std::invalid_argument("evolution time must be finite");
    if (method == EvolveMethod::Exact) return evolve_exact(state, ham, t);
    return evolve_trotter(state, ham, t, trotter_dt);
}

GroundState ground_state(const HamiltonianSpec& ham) {
    ham.validate();
    if (ham.n > 10)
        throw ResourceError("dense ground-state solve limited to 10 spins");
    const std::size_t dim = std::size_t{1} << ham.n;
    const std::vector<double> diag = diagonal_energies(ham);

    bool has_y = false;
    for (const Vec3& h : ham.local)
        if (h.y != 0.0) has_y = true;

    GroundState gs;
    gs.state.n = ham.n;
    gs.state.amp.assign(dim, cd{});

    if (!has_y) {
        Eigen::MatrixXd H = Eigen::MatrixXd::Zero(dim, dim);
        for (std::size_t k = 0; k < dim; ++k) H(k, k) = diag[k];
        for (int j = 0; j < ham.n; ++j) {
            const double hx =
                ham.transverse_field + (ham.local.empty() ? 0.0 : ham.local[j].x);
            if (hx == 0.0) continue;
            const std::size_t b = std::size_t{1} << j;
            for (std::size_t k = 0; k < dim; ++k) H(k, k ^ b) += hx;
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(H);
        gs.energy = solver.eigenvalues()(0);
        for (std::size_t k = 0; k < dim; ++k)
            gs.state.amp[k] = solver.eigenvectors()(k, 0);

        // Without local z or y terms the global spin flip commutes with H and
        // the lowest pair can be exactly degenerate. Report the flip-symmetric
        // combination so the result is deterministic instead of solver-dependent.
        bool flip_sym = true;
        for (const Vec3& h : ham.local)
            if (h.z != 0.0) flip_sym = false;
        const auto& ev = solver.eigenvalues();
        const double spread = std::max(std::abs(ev(0)), std::abs(ev(dim - 1)));
        if (flip_sym && ev(1) - ev(0) <= 1e-9 * std::max(spread, 1e-300)) {
            const std::size_t mask = dim - 1;
            Eigen::VectorXd w(dim);
            for (std::size_t k = 0; k < dim; ++k)
                w(k) = solver.eigenvectors()(k, 0) + solver.eigenvectors()(k ^ mask, 0);
            if (w.norm() < 1e-6) {
                // Flip-antisymmetric ground vector: symmetrize across the pair.
                for (std::size_t k = 0; k < dim; ++k)
                    w(k) = solver.eigenvectors()(k, 0) + solver.eigenvectors()(k, 1) +
                           solver.eigenvectors()(k ^ mask, 0) +
                           solver.eigenvectors()(k ^ mask, 1);
            }
            if (w.norm() > 1e-6) {
                w.normalize();
                for (std::size_t k = 0; k < dim; ++k) gs.state.amp[k] = w(k);
            }
        }
    } else {
        Eigen::MatrixXcd H = Eigen::MatrixXcd::Zero(dim, dim);
        for (std::size_t k = 0; k < dim; ++k) H(k, k) = diag[k];
        for (int j = 0; j < ham.n; ++j) {
            const double hx =
                ham.transverse_field + (ham.local.empty() ? 0.0 : ham.local[j].x);
            const double hy = ham.local.empty() ? 0.0 : ham.local[j].y;
            if (hx == 0.0 && hy == 0.0) continue;
            const std::size_t b = std::size_t{1} << j;
            for (std::size_t k = 0; k < dim; ++k) {
                const std::size_t kk = k ^ b;
                H(k, kk) += cd{hx, hy * SpinState::sz_of(kk, j)};
            }
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(H);
        gs.energy = solver.eigenvalues()(0);
        for (std::size_t k = 0; k < dim; ++k)
            gs.state.amp[k] = solver.eigenvectors()(k, 0);
    }
    return gs;
}

Observables observables(const SpinState& state) {
    const std::size_t dim = state.dim();
    Observables o;
    o.sx.assign(state.n, 0.0);
    o.sz.assign(state.n, 0.0);
    for (int j = 0; j < state.n; ++j) {
        const std::size_t b = std::size_t{1} << j;
        double sx = 0.0, sz = 0.0;
        for (std::size_t k = 0; k < dim; ++k) {
            sx += std::real(std::conj(state.amp[k ^ b]) * state.amp[k]);
            sz += SpinState::sz_of(k, j) * std::norm(state.amp[k]);
        }
        o.sx[j] = sx;
        o.sz[j] = sz;
        o.mean_sx += sx;
        o.mean_sz += sz;
        o.magnetization += sz;
    }
    o.mean_sx /= state.n;
    o.mean_sz /= state.n;
    return o;
}

double zz_correlation(const SpinState& state, int i, int j) {
    if (i < 0 || j < 0 || i >= state.n || j >= state.n)
        throw std::invalid_argument("zz_correlation: site index out of range");
    double c = 0.0;
    for (std::size_t k = 0; k < state.dim(); ++k)
        c += SpinState::sz_of(k, i) * SpinState::sz_of(k, j) * std::norm(state.amp[k]);
    return c;
}

double mean_zz_correlation(const SpinState& state,
                           const std::vector<std::pair<int, int>>& pairs) {
    if (pairs.empty()) throw std::invalid_argument("no pairs given");
    double s = 0.0;
    for (const auto& [i, j] : pairs) s += zz_correlation(state, i, j);
    return s / pairs.size();
}

namespace {

std::vector<std::pair<int, int>> nn_pairs(const CouplingMatrix& cm) {
    const double d = cm.nn_distance();
    std::vector<std::pair<int, int>> pairs;
    for (std::size_t i = 0; i < cm.size(); ++i)
        for (std::size_t j = i + 1; j < cm.size(); ++j)
            if (cm.distance(i, j) <= d * (1.0 + 1e-9))
                pairs.emplace_back(static_cast<int>(i), static_cast<int>(j));
    return pairs;
}

} // namespace

std::vector<SweepPoint> gamma_sweep(const CouplingMatrix& shape,
                                    const SweepSpec& spec) {
    const std::size_t n = shape.size();
    checked_dim(static_cast<int>(n));
    if (!(spec.bf_hz != 0.0) || !std::isfinite(spec.bf_hz))
        throw std::invalid_argument("sweep transverse field must be nonzero");

    const auto pairs = nn_pairs(shape);
    if (pairs.empty()) throw std::invalid_argument("sweep needs at least one pair");
    const double j_ref = shape.J(pairs[0].first, pairs[0].second);
    if (j_ref == 0.0)
        throw std::invalid_argument("nearest-neighbor coupling of the shape is zero");

    const double bf_energy = -std::abs(spec.bf_hz) * constants.planck_h;

    std::vector<SweepPoint> out;
    out.reserve(spec.gammas.size());
    for (double gamma : spec.gammas) {
        HamiltonianSpec ham;
        ham.n = static_cast<int>(n);
        ham.zz.assign(n * n, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                if (i == j) continue;
                // shape normalized so the nearest-neighbor entry is +1, then
                // J_nn(gamma) = gamma * B_f by definition of gamma.
                ham.zz[i * n + j] = gamma * bf_energy * (shape.J(i, j) / j_ref);
            }
        }
        ham.transverse_field = bf_energy;
        ham.validate();

        SpinState st = spec.ground
                           ? ground_state(ham).state
                           : evolve(SpinState::plus_state(ham.n), ham,
                                    spec.evolve_time, EvolveMethod::Exact);
        SweepPoint pt;
        pt.gamma = gamma;
        pt.obs = observables(st);
        pt.nn_zz = mean_zz_correlation(st, pairs);
        out.push_back(std::move(pt));
    }
    return out;
}

ClusterResult make_cluster_state(const CouplingMatrix& cm, bool include_long_range) {
    const int n = static_cast<int>(cm.size());
    const std::size_t dim = checked_dim(n);

    const auto edges = nn_pairs(cm);
    if (edges.empty()) throw std::invalid_argument("cluster state needs edges");
    const double j_ref = cm.J(edges[0].first, edges[0].second);
    if (j_ref == 0.0)
        throw std::invalid_argument("nearest-neighbor coupling is zero");

    std::vector<int> degree(n, 0);
    for (const auto& [i, j] : edges) {
        ++degree[i];
        ++degree[j];
    }

    // theta matrix: ideal = pi/4 on nearest-neighbor edges only; realistic
    // adds every pair scaled by its coupling relative to the NN reference.
    std::vector<double> theta_ideal(static_cast<std::size_t>(n) * n, 0.0);
    for (const auto& [i, j] : edges) {
        theta_ideal[static_cast<std::size_t>(i) * n + j] = kPi / 4.0;
    }
    std::vector<double> theta_real(static_cast<std::size_t>(n) * n, 0.0);
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            theta_real[static_cast<std::size_t>(i) * n + j] =
                include_long_range ? (kPi / 4.0) * (cm.J(i, j) / j_ref)
                                   : theta_ideal[static_cast<std::size_t>(i) * n + j];

    const double amp0 = 1.0 / std::sqrt(static_cast<double>(dim));
    const double global = kPi / 4.0 * static_cast<double>(edges.size());

    auto build = [&](const std::vector<double>& theta) {
        SpinState st;
        st.n = n;
        st.amp.resize(dim);
        for (std::size_t k = 0; k < dim; ++k) {
            double phase = global;
            for (int i = 0; i < n; ++i) {
                const int si = SpinState::sz_of(k, i);
                phase -= (kPi / 4.0) * degree[i] * si;
                for (int j = i + 1; j < n; ++j)
                    phase += theta[static_cast<std::size_t>(i) * n + j] * si *
                             SpinState::sz_of(k, j);
            }
            st.amp[k] = std::polar(amp0, phase);
        }
        return st;
    };

    const SpinState ideal = build(theta_ideal);
    SpinState real = build(theta_real);

    cd overlap{};
    for (std::size_t k = 0; k < dim; ++k)
        overlap += std::conj(ideal.amp[k]) * real.amp[k];

    ClusterResult res;
    res.state = std::move(real);
    res.fidelity = std::norm(overlap);
    res.edges = edges;
    return res;
}

FalloffResult correlation_falloff_check(const CouplingMatrix& cm, int dimension) {
    if (dimension < 1 || dimension > 3)
        throw std::invalid_argument("lattice dimension must be 1, 2, or 3");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    std::size_t count = 0;
    std::vector<double> seen;
    for (std::size_t i = 0; i < cm.size(); ++i) {
        for (std::size_t j = i + 1; j < cm.size(); ++j) {
            const double J = std::abs(cm.J(i, j));
            const double b = cm.distance(i, j);
            if (!(J > 0.0) || !(b > 0.0)) continue;
            const double lx = std::log(b), ly = std::log(J);
            sx += lx;
            sy += ly;
            sxx += lx * lx;
            sxy += lx * ly;
            ++count;
            bool fresh = true;
            for (double s : seen)
                if (std::abs(b - s) < 1e-9 * s) {
                    fresh = false;
                    break;
                }
            if (fresh) seen.push_back(b);
        }
    }
    // A power-law exponent needs a real spread of separations to be credible.
    if (seen.size() < 4)
        throw std::invalid_argument(
            "falloff check needs pairs at 4 or more distinct distances");
    const double denom = count * sxx - sx * sx;
    const double slope = (count * sxy - sx * sy) / denom;

    FalloffResult r;
    r.exponent = -slope;
    r.dimension = dimension;
    r.pass = r.exponent > dimension + 1e-6;
    return r;
}

} // namespace microtrap
