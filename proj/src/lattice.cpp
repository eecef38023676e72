#include "microtrap/lattice.hpp"

#include "microtrap/constants.hpp"
#include "microtrap/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>

namespace microtrap {

namespace {

using nlohmann::json;

json vec3_json(const Vec3& v) { return json::array({v.x, v.y, v.z}); }

Vec3 vec3_from(const json& j, const char* what) {
    if (!j.is_array() || j.size() != 3)
        throw ConfigError(std::string("layout JSON: ") + what +
                          " must be an array of 3 numbers");
    return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

void add_site_and_coil(LatticeLayout& lay, int index, double x, double y,
                       double height, const LayoutOptions& opt) {
    Site s;
    s.index = index;
    s.position = {x, y, height};
    s.trap_frequency = opt.trap_frequency;
    lay.sites.push_back(s);

    CoilSpec c;
    c.center = {x, y, 0.0};
    c.radius = opt.coil_radius;
    c.current = opt.coil_current;
    c.phase = opt.coil_phase;
    c.turns = opt.coil_turns;
    lay.coils.push_back(c);
}

void check_generator_args(int n, double a, double height, const LayoutOptions& opt) {
    if (n < 1) throw std::invalid_argument("lattice site count must be >= 1");
    if (!(a > 0.0)) throw std::invalid_argument("lattice constant must be positive");
    if (!(height > 0.0))
        throw std::invalid_argument("ion height above the coil plane must be positive");
    if (!(opt.coil_radius > 0.0))
        throw std::invalid_argument("coil radius must be positive");
}

} // namespace

std::string layout_kind_name(LayoutKind k) {
    switch (k) {
    case LayoutKind::Line: return "line";
    case LayoutKind::Square: return "square";
    case LayoutKind::Ring: return "ring";
    case LayoutKind::LadderRing: return "ladder_ring";
    case LayoutKind::Custom: return "custom";
    }
    return "custom";
}

LayoutKind layout_kind_from_name(const std::string& name) {
    if (name == "line") return LayoutKind::Line;
    if (name == "square") return LayoutKind::Square;
    if (name == "ring") return LayoutKind::Ring;
    if (name == "ladder_ring") return LayoutKind::LadderRing;
    if (name == "custom") return LayoutKind::Custom;
    throw ConfigError("unknown layout kind '" + name + "'");
}

std::size_t LatticeLayout::occupied_count() const {
    return static_cast<std::size_t>(
        std::count_if(sites.begin(), sites.end(),
                      [](const Site& s) { return s.occupied; }));
}

std::vector<int> LatticeLayout::occupied_indices() const {
    std::vector<int> out;
    for (const Site& s : sites)
        if (s.occupied) out.push_back(s.index);
    return out;
}

LatticeLayout make_line(int n, double a, double height, const LayoutOptions& opt) {
    check_generator_args(n, a, height, opt);
    LatticeLayout lay;
    lay.kind = LayoutKind::Line;
    lay.lattice_constant = a;
    lay.ion_height = height;
    const double x0 = -0.5 * a * (n - 1);
    for (int i = 0; i < n; ++i) add_site_and_coil(lay, i, x0 + i * a, 0.0, height, opt);
    return lay;
}

LatticeLayout make_square(int nx, int ny, double a, double height,
                          const LayoutOptions& opt) {
    if (ny < 1) throw std::invalid_argument("lattice site count must be >= 1");
    check_generator_args(nx, a, height, opt);
    LatticeLayout lay;
    lay.kind = LayoutKind::Square;
    lay.lattice_constant = a;
    lay.ion_height = height;
    const double x0 = -0.5 * a * (nx - 1);
    const double y0 = -0.5 * a * (ny - 1);
    int idx = 0;
    for (int iy = 0; iy < ny; ++iy)
        for (int ix = 0; ix < nx; ++ix)
            add_site_and_coil(lay, idx++, x0 + ix * a, y0 + iy * a, height, opt);
    return lay;
}

LatticeLayout make_ring(int n, double a, double height, const LayoutOptions& opt) {
    check_generator_args(n, a, height, opt);
    if (n < 3) throw std::invalid_argument("ring needs at least 3 sites");
    LatticeLayout lay;
    lay.kind = LayoutKind::Ring;
    lay.lattice_constant = a;
    lay.ion_height = height;
    const double r = a / (2.0 * std::sin(kPi / n));
    for (int k = 0; k < n; ++k) {
        const double th = 2.0 * kPi * k / n;
        add_site_and_coil(lay, k, r * std::cos(th), r * std::sin(th), height, opt);
    }
    RingInfo info;
    info.n = n;
    info.circumradius = r;
    info.nn_chord = a;
    info.nnn_chord = 2.0 * a * std::cos(kPi / n);
    lay.ring = info;
    return lay;
}

LatticeLayout make_ladder_ring(int n_rungs, double a1, double delta_r, double height,
                               const LayoutOptions& opt) {
    check_generator_args(n_rungs, a1, height, opt);
    if (n_rungs < 3) throw std::invalid_argument("ladder ring needs at least 3 rungs");
    if (!(delta_r > 0.0)) throw std::invalid_argument("rung length must be positive");
    LatticeLayout lay;
    lay.kind = LayoutKind::LadderRing;
    lay.lattice_constant = a1;
    lay.ion_height = height;
    const double r1 = a1 / (2.0 * std::sin(kPi / n_rungs));
    const double r2 = r1 + delta_r;
    for (int k = 0; k < n_rungs; ++k) {
        const double th = 2.0 * kPi * k / n_rungs;
        add_site_and_coil(lay, k, r1 * std::cos(th), r1 * std::sin(th), height, opt);
    }
    for (int k = 0; k < n_rungs; ++k) {
        const double th = 2.0 * kPi * k / n_rungs;
        add_site_and_coil(lay, n_rungs + k, r2 * std::cos(th), r2 * std::sin(th),
                          height, opt);
    }
    LadderInfo info;
    info.n_rungs = n_rungs;
    info.a1 = a1;
    info.a2 = a1 + 4.0 * kPi * delta_r / n_rungs;
    info.delta_r = delta_r;
    lay.ladder = info;
    return lay;
}

LatticeLayout apply_defects(const LatticeLayout& layout,
                            const std::vector<int>& vacancies,
                            const std::vector<std::pair<int, PinnedField>>& pins,
                            bool keep_vacated_coils_driven) {
    LatticeLayout out = layout;
    auto site_at = [&out](int idx) -> Site& {
        for (Site& s : out.sites)
            if (s.index == idx) return s;
        throw std::invalid_argument("defect refers to unknown site index " +
                                    std::to_string(idx));
    };
    for (int idx : vacancies) {
        Site& s = site_at(idx);
        s.occupied = false;
        if (!keep_vacated_coils_driven) {
            if (out.coils.size() != out.sites.size())
                throw std::invalid_argument(
                    "cannot switch off vacancy coils: layout has no 1:1 site/coil map");
            const std::size_t pos = static_cast<std::size_t>(&s - out.sites.data());
            out.coils[pos].current = 0.0;
        }
    }
    for (const auto& [idx, pin] : pins) {
        if (!(std::abs(pin.axis.norm() - 1.0) < 1e-9))
            throw std::invalid_argument("pinned field axis must be a unit vector");
        if (!std::isfinite(pin.strength))
            throw std::invalid_argument("pinned field strength must be finite");
        site_at(idx).pinned = pin;
    }
    return out;
}

double ring_nnn_excess(int n) {
    if (n < 3) throw std::invalid_argument("ring_nnn_excess needs n >= 3");
    const double c = std::cos(kPi / n);
    return 1.0 / (c * c * c) - 1.0;
}

int smallest_ring_below(double excess_threshold) {
    if (!(excess_threshold > 0.0))
        throw std::invalid_argument("excess threshold must be positive");
    const double c = std::pow(1.0 + excess_threshold, -1.0 / 3.0);
    int n = std::max(3, static_cast<int>(std::ceil(kPi / std::acos(c))));
    while (n > 3 && ring_nnn_excess(n - 1) < excess_threshold) --n;
    while (ring_nnn_excess(n) >= excess_threshold) ++n;
    return n;
}

double ladder_leg_asymmetry(int n_rungs, double a1, double delta_r) {
    if (n_rungs < 3) throw std::invalid_argument("ladder needs n >= 3 rungs");
    if (!(a1 > 0.0) || !(delta_r > 0.0))
        throw std::invalid_argument("ladder spacings must be positive");
    const double a2 = a1 + 4.0 * kPi * delta_r / n_rungs;
    const double q = a1 / a2;
    return 1.0 - q * q * q;
}

int ladder_rungs_for_asymmetry(double threshold, double a1, double delta_r) {
    if (!(threshold > 0.0 && threshold < 1.0))
        throw std::invalid_argument("asymmetry threshold must lie in (0,1)");
    if (!(a1 > 0.0) || !(delta_r > 0.0))
        throw std::invalid_argument("ladder spacings must be positive");
    const double x = std::pow(1.0 - threshold, -1.0 / 3.0) - 1.0;
    const double n_star = 4.0 * kPi * delta_r / (a1 * x);
    return static_cast<int>(std::llround(n_star));
}

RatioReport ratio_analysis(const LatticeLayout& layout) {
    RatioReport rep;
    rep.kind = layout.kind;

    const auto occ = layout.occupied_indices();
    if (occ.size() < 2)
        throw std::invalid_argument("ratio analysis needs at least two occupied sites");

    auto pos_of = [&layout](int idx) -> const Vec3& {
        for (const Site& s : layout.sites)
            if (s.index == idx) return s.position;
        throw std::invalid_argument("unknown site index");
    };

    if (layout.kind == LayoutKind::Ring && layout.ring) {
        const RingInfo& ri = *layout.ring;
        rep.nn_distance = ri.nn_chord;
        rep.rows.push_back({0, 1, ri.nn_chord, 1.0, 1.0});
        const double over = ri.nnn_chord / ri.nn_chord;
        rep.rows.push_back({0, 2, ri.nnn_chord, over, 1.0 / (over * over * over)});
        rep.headline_ratio = ring_nnn_excess(ri.n);
        return rep;
    }

    if (layout.kind == LayoutKind::LadderRing && layout.ladder) {
        const LadderInfo& li = *layout.ladder;
        rep.nn_distance = std::min(li.a1, li.delta_r);
        rep.rows.push_back({0, 1, li.a1, li.a1 / rep.nn_distance, 1.0});
        const double over = li.a2 / li.a1;
        rep.rows.push_back(
            {li.n_rungs, li.n_rungs + 1, li.a2, over, 1.0 / (over * over * over)});
        rep.rows.push_back({0, li.n_rungs, li.delta_r, li.delta_r / rep.nn_distance,
                            std::pow(li.a1 / li.delta_r, 3.0)});
        rep.headline_ratio = ladder_leg_asymmetry(li.n_rungs, li.a1, li.delta_r);
        return rep;
    }

    // Generic layouts: shortest distinct pair distances.
    std::map<long long, RatioRow> buckets; // keyed by rounded log-distance
    double nn = std::numeric_limits<double>::infinity();
    for (std::size_t u = 0; u < occ.size(); ++u) {
        for (std::size_t v = u + 1; v < occ.size(); ++v) {
            const double d = (pos_of(occ[u]) - pos_of(occ[v])).norm();
            nn = std::min(nn, d);
            const long long key = std::llround(std::log(d) * 1e9);
            if (!buckets.count(key))
                buckets[key] = {occ[u], occ[v], d, 0.0, 0.0};
        }
    }
    rep.nn_distance = nn;
    for (auto& [key, row] : buckets) {
        row.over_nn = row.distance / nn;
        const double q = nn / row.distance;
        row.cubic_ratio = q * q * q;
        rep.rows.push_back(row);
        if (rep.rows.size() >= 8) break;
    }
    return rep;
}

json RatioReport::to_json() const {
    json rows_j = json::array();
    for (const auto& r : rows) {
        rows_j.push_back({{"i", r.i},
                          {"j", r.j},
                          {"distance_m", r.distance},
                          {"over_nn", r.over_nn},
                          {"cubic_ratio", r.cubic_ratio}});
    }
    json j{{"kind", layout_kind_name(kind)},
           {"nn_distance_m", nn_distance},
           {"rows", rows_j}};
    if (headline_ratio) j["headline_ratio"] = *headline_ratio;
    return j;
}

json LatticeLayout::to_json() const {
    json sites_j = json::array();
    for (const Site& s : sites) {
        json sj{{"index", s.index},
                {"position_m", vec3_json(s.position)},
                {"trap_frequency_rad_s", vec3_json(s.trap_frequency)},
                {"occupied", s.occupied}};
        if (s.pinned) {
            sj["pinned"] = {{"axis", vec3_json(s.pinned->axis)},
                            {"strength_J", s.pinned->strength}};
        }
        sites_j.push_back(sj);
    }
    json coils_j = json::array();
    for (const CoilSpec& c : coils) {
        coils_j.push_back({{"center_m", vec3_json(c.center)},
                           {"radius_m", c.radius},
                           {"current_A", c.current},
                           {"phase_rad", c.phase},
                           {"turns", c.turns}});
    }
    json j{{"kind", layout_kind_name(kind)},
           {"lattice_constant_m", lattice_constant},
           {"ion_height_m", ion_height},
           {"sites", sites_j},
           {"coils", coils_j},
           {"constants",
            {{"mu0", constants.mu0},
             {"eps0", constants.eps0},
             {"bohr_magneton", constants.bohr_magneton},
             {"elementary_charge", constants.elementary_charge},
             {"hbar", constants.hbar},
             {"planck_h", constants.planck_h},
             {"amu", constants.amu}}}};
    if (ring) {
        j["ring"] = {{"n", ring->n},
                     {"circumradius_m", ring->circumradius},
                     {"nn_chord_m", ring->nn_chord},
                     {"nnn_chord_m", ring->nnn_chord}};
    }
    if (ladder) {
        j["ladder"] = {{"n_rungs", ladder->n_rungs},
                       {"a1_m", ladder->a1},
                       {"a2_m", ladder->a2},
                       {"delta_r_m", ladder->delta_r}};
    }
    return j;
}

LatticeLayout LatticeLayout::from_json(const json& j) {
    LatticeLayout lay;
    try {
        lay.kind = layout_kind_from_name(j.at("kind").get<std::string>());
        lay.lattice_constant = j.at("lattice_constant_m").get<double>();
        lay.ion_height = j.value("ion_height_m", 0.0);
        for (const json& sj : j.at("sites")) {
            Site s;
            s.index = sj.at("index").get<int>();
            s.position = vec3_from(sj.at("position_m"), "site position");
            s.trap_frequency =
                vec3_from(sj.at("trap_frequency_rad_s"), "site trap frequency");
            s.occupied = sj.value("occupied", true);
            if (sj.contains("pinned")) {
                PinnedField p;
                p.axis = vec3_from(sj["pinned"].at("axis"), "pinned axis");
                p.strength = sj["pinned"].at("strength_J").get<double>();
                s.pinned = p;
            }
            lay.sites.push_back(s);
        }
        for (const json& cj : j.at("coils")) {
            CoilSpec c;
            c.center = vec3_from(cj.at("center_m"), "coil center");
            c.radius = cj.at("radius_m").get<double>();
            c.current = cj.at("current_A").get<double>();
            c.phase = cj.value("phase_rad", 0.0);
            c.turns = cj.value("turns", 1);
            c.validate();
            lay.coils.push_back(c);
        }
        if (j.contains("ring")) {
            RingInfo ri;
            ri.n = j["ring"].at("n").get<int>();
            ri.circumradius = j["ring"].at("circumradius_m").get<double>();
            ri.nn_chord = j["ring"].at("nn_chord_m").get<double>();
            ri.nnn_chord = j["ring"].at("nnn_chord_m").get<double>();
            lay.ring = ri;
        }
        if (j.contains("ladder")) {
            LadderInfo li;
            li.n_rungs = j["ladder"].at("n_rungs").get<int>();
            li.a1 = j["ladder"].at("a1_m").get<double>();
            li.a2 = j["ladder"].at("a2_m").get<double>();
            li.delta_r = j["ladder"].at("delta_r_m").get<double>();
            lay.ladder = li;
        }
        if (j.contains("constants")) {
            const double mu0 = j["constants"].value("mu0", constants.mu0);
            if (std::abs(mu0 - constants.mu0) > 1e-18)
                throw ConfigError("layout JSON was produced with a different "
                                  "physical-constants table (mu0 mismatch)");
        }
    } catch (const json::exception& e) {
        throw ConfigError(std::string("malformed layout JSON: ") + e.what());
    }
    if (lay.sites.empty()) throw ConfigError("layout JSON has no sites");
    return lay;
}

} // namespace microtrap
