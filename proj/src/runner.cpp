#include "microtrap/runner.hpp"

#include "microtrap/constants.hpp"
#include "microtrap/coupling.hpp"
#include "microtrap/errors.hpp"
#include "microtrap/fieldcore.hpp"
#include "microtrap/forces.hpp"
#include "microtrap/io.hpp"
#include "microtrap/lattice.hpp"
#include "microtrap/spinsim.hpp"
#include "microtrap/version.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

namespace microtrap {

namespace {

using nlohmann::json;

constexpr double two_pi = 2.0 * kPi;

// ---- section/key registry (strict unknown-key rejection) ----

void validate_config(const ConfigDoc& cfg) {
    static const std::map<std::string, std::vector<std::string>> registry{
        {"layout",
         {"kind", "n", "nx", "ny", "n_rungs", "a", "a1", "delta_r", "height",
          "coil_radius", "coil_current", "coil_phase", "coil_turns",
          "trap_frequency", "json_path", "vacancies", "pin_sites", "pin_axis",
          "pin_strength", "drive_vacated_coils"}},
        {"drive", {"rf_phase", "f_rf", "impedance", "duty_cycle"}},
        {"moment", {"mode", "mu_eff", "direction", "external_field"}},
        {"scan",
         {"origin", "axis1_dir", "axis1_start", "axis1_stop", "axis1_count",
          "axis2_dir", "axis2_start", "axis2_stop", "axis2_count", "axis3_dir",
          "axis3_start", "axis3_stop", "axis3_count"}},
        {"ion", {"species"}},
        {"couple",
         {"alpha", "orientation", "eval_azimuth", "eval_radius", "eval_height",
          "force_component", "falloff_dimension"}},
        {"table", {"species", "heights", "beta_distance"}},
        {"spin",
         {"mode", "gammas", "bf", "ground", "time", "method", "dt", "initial",
          "include_long_range", "transverse_field", "export_state"}},
        {"report", {"scale_factors", "current_law"}},
        {"thresholds", {"targets"}},
    };
    std::vector<std::string> sections;
    for (const auto& [name, keys] : registry) sections.push_back(name);
    cfg.validate_sections(sections);
    for (const auto& [name, keys] : registry) {
        if (!cfg.has_section(name)) continue;
        if (name == "table") {
            // species-suffixed trap frequency keys are allowed dynamically
            for (const auto& sec : cfg.sections()) {
                if (sec.name != "table") continue;
                for (const auto& e : sec.entries) {
                    if (e.key.rfind("trap_frequency_", 0) == 0) continue;
                    if (std::find(keys.begin(), keys.end(), e.key) == keys.end())
                        throw ConfigError(cfg.source() + ":" +
                                          std::to_string(e.line) +
                                          ": unknown key '" + e.key +
                                          "' in [table]");
                }
            }
            continue;
        }
        cfg.validate_keys(name, keys);
    }
}

// ---- builders ----

LatticeLayout build_layout(const ConfigDoc& cfg) {
    if (!cfg.has_section("layout"))
        throw ConfigError(cfg.source() + ": missing [layout] section");
    const std::string kind = cfg.string_value("layout", "kind");

    LayoutOptions opt;
    opt.coil_radius = cfg.quantity_or("layout", "coil_radius", Dim::Length, 2.5e-6);
    opt.coil_current = cfg.quantity_or("layout", "coil_current", Dim::Current, 10e-3);
    opt.coil_phase = cfg.quantity_or("layout", "coil_phase", Dim::Angle, 0.0);
    opt.coil_turns = static_cast<int>(cfg.integer_or("layout", "coil_turns", 1));
    const double f_trap =
        cfg.quantity_or("layout", "trap_frequency", Dim::Frequency, 1e6);
    const double w_trap = two_pi * f_trap;
    opt.trap_frequency = {w_trap, w_trap, w_trap};

    LatticeLayout lay;
    try {
        if (kind == "line") {
            lay = make_line(static_cast<int>(cfg.integer("layout", "n")),
                            cfg.quantity("layout", "a", Dim::Length),
                            cfg.quantity("layout", "height", Dim::Length), opt);
        } else if (kind == "square") {
            lay = make_square(static_cast<int>(cfg.integer("layout", "nx")),
                              static_cast<int>(cfg.integer("layout", "ny")),
                              cfg.quantity("layout", "a", Dim::Length),
                              cfg.quantity("layout", "height", Dim::Length), opt);
        } else if (kind == "ring") {
            lay = make_ring(static_cast<int>(cfg.integer("layout", "n")),
                            cfg.quantity("layout", "a", Dim::Length),
                            cfg.quantity("layout", "height", Dim::Length), opt);
        } else if (kind == "ladder_ring") {
            lay = make_ladder_ring(static_cast<int>(cfg.integer("layout", "n_rungs")),
                                   cfg.quantity("layout", "a1", Dim::Length),
                                   cfg.quantity("layout", "delta_r", Dim::Length),
                                   cfg.quantity("layout", "height", Dim::Length), opt);
        } else if (kind == "custom") {
            const std::string path = cfg.string_value("layout", "json_path");
            lay = LatticeLayout::from_json(json::parse(read_text_file(path)));
        } else {
            cfg.fail("layout", "kind",
                     "unknown layout kind '" + kind +
                         "' (line, square, ring, ladder_ring, custom)");
        }
    } catch (const json::exception& e) {
        throw ConfigError("layout JSON: " + std::string(e.what()));
    } catch (const std::invalid_argument& e) {
        throw ConfigError(cfg.source() + ": [layout]: " + e.what());
    }

    const std::vector<int> vacancies = cfg.int_list_or("layout", "vacancies");
    const std::vector<int> pin_sites = cfg.int_list_or("layout", "pin_sites");
    std::vector<std::pair<int, PinnedField>> pins;
    if (!pin_sites.empty()) {
        PinnedField pf;
        pf.axis = cfg.vec3_or("layout", "pin_axis", Dim::Dimensionless, {0, 0, 1})
                      .normalized();
        pf.strength = cfg.quantity("layout", "pin_strength", Dim::Energy);
        for (int s : pin_sites) pins.emplace_back(s, pf);
    }
    if (!vacancies.empty() || !pins.empty()) {
        const bool keep = cfg.boolean_or("layout", "drive_vacated_coils", true);
        try {
            lay = apply_defects(lay, vacancies, pins, keep);
        } catch (const std::invalid_argument& e) {
            throw ConfigError(cfg.source() + ": [layout]: " + e.what());
        }
    }
    return lay;
}

MomentModel build_moment(const ConfigDoc& cfg) {
    const double mu = cfg.quantity_or("moment", "mu_eff", Dim::MagneticMoment,
                                      0.5 * constants.bohr_magneton);
    const std::string mode = cfg.string_or("moment", "mode", "adiabatic");
    try {
        if (mode == "adiabatic") return MomentModel::adiabatic(mu);
        if (mode == "pinned") {
            const Vec3 dir =
                cfg.vec3_or("moment", "direction", Dim::Dimensionless, {0, 0, 1});
            return MomentModel::pinned(mu, dir);
        }
    } catch (const std::invalid_argument& e) {
        throw ConfigError(cfg.source() + ": [moment]: " + e.what());
    }
    cfg.fail("moment", "mode", "unknown moment mode '" + mode +
                                   "' (adiabatic or pinned)");
}

Vec3 external_field(const ConfigDoc& cfg) {
    return cfg.vec3_or("moment", "external_field", Dim::MagneticField, {0, 0, 0});
}

ScanGrid build_scan(const ConfigDoc& cfg) {
    if (!cfg.has_section("scan"))
        throw ConfigError(cfg.source() + ": missing [scan] section");
    ScanGrid grid;
    grid.origin = cfg.vec3_or("scan", "origin", Dim::Length, {0, 0, 0});
    for (int a = 1; a <= 3; ++a) {
        const std::string p = "axis" + std::to_string(a);
        if (!cfg.has("scan", p + "_dir")) {
            if (a == 1)
                throw ConfigError(cfg.source() + ": [scan] needs at least axis1");
            break;
        }
        ScanAxis ax;
        ax.label = p;
        Vec3 dir = cfg.vec3("scan", p + "_dir", Dim::Dimensionless);
        const double nrm = dir.norm();
        if (!(nrm > 0.0)) cfg.fail("scan", p + "_dir", "direction must be nonzero");
        ax.direction = dir / nrm;
        ax.start = cfg.quantity("scan", p + "_start", Dim::Length);
        ax.stop = cfg.quantity("scan", p + "_stop", Dim::Length);
        ax.count = static_cast<int>(cfg.integer("scan", p + "_count"));
        if (ax.count < 2) cfg.fail("scan", p + "_count", "count must be >= 2");
        if (!(ax.start < ax.stop))
            cfg.fail("scan", p + "_start", "start must be less than stop");
        grid.axes.push_back(ax);
    }
    try {
        grid.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(cfg.source() + ": [scan]: " + e.what());
    }
    return grid;
}

IonSpecies build_ion(const ConfigDoc& cfg) {
    if (!cfg.has_section("ion"))
        throw ConfigError(cfg.source() + ": missing [ion] section (species = ...)");
    return IonSpecies::by_name(cfg.string_value("ion", "species"));
}

enum class ForceComponent { Lateral, Vertical, Magnitude };

struct CoupleSetup {
    CouplingConfig coupling;
    double eval_azimuth = kPi / 4.0;
    double eval_radius = -1.0; // <0: use each coil's radius
    double eval_height = -1.0; // <0: use the layout ion height
    ForceComponent component = ForceComponent::Lateral;
    int falloff_dimension = 0; // 0: infer from layout kind
};

CoupleSetup build_couple(const ConfigDoc& cfg, const LatticeLayout& lay) {
    CoupleSetup s;
    s.coupling.alpha = cfg.quantity_or("couple", "alpha", Dim::Dimensionless, 2.0);
    const std::string orient = cfg.string_or("couple", "orientation", "lateral");
    if (orient == "lateral") s.coupling.orientation = ModeOrientation::Lateral;
    else if (orient == "vertical") s.coupling.orientation = ModeOrientation::Vertical;
    else cfg.fail("couple", "orientation", "expected lateral or vertical");
    try {
        s.coupling.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(cfg.source() + ": [couple]: " + e.what());
    }
    s.eval_azimuth = cfg.quantity_or("couple", "eval_azimuth", Dim::Angle, kPi / 4.0);
    s.eval_radius = cfg.quantity_or("couple", "eval_radius", Dim::Length, -1.0);
    s.eval_height = cfg.quantity_or("couple", "eval_height", Dim::Length, -1.0);
    const std::string comp = cfg.string_or(
        "couple", "force_component",
        s.coupling.orientation == ModeOrientation::Lateral ? "lateral" : "vertical");
    if (comp == "lateral") s.component = ForceComponent::Lateral;
    else if (comp == "vertical") s.component = ForceComponent::Vertical;
    else if (comp == "magnitude") s.component = ForceComponent::Magnitude;
    else cfg.fail("couple", "force_component",
                  "expected lateral, vertical, or magnitude");
    int d = static_cast<int>(cfg.integer_or("couple", "falloff_dimension", 0));
    if (d == 0) {
        switch (lay.kind) {
        case LayoutKind::Square: d = 2; break;
        default: d = 1; break;
        }
    }
    s.falloff_dimension = d;
    return s;
}

double pick_component(const Vec3& F, ForceComponent c) {
    switch (c) {
    case ForceComponent::Lateral: return std::hypot(F.x, F.y);
    case ForceComponent::Vertical: return std::abs(F.z);
    case ForceComponent::Magnitude: return F.norm();
    }
    return F.norm();
}

// The working point of each site's microtrap: on the ring above the coil
// filament, radius `eval_radius` from the coil axis at `eval_azimuth`, a
// height `eval_height` above the coil plane.
Vec3 site_eval_point(const CoilSpec& coil, const CoupleSetup& s, double ion_height) {
    const double r = s.eval_radius > 0.0 ? s.eval_radius : coil.radius;
    const double h = s.eval_height > 0.0 ? s.eval_height : ion_height;
    return coil.center +
           Vec3{r * std::cos(s.eval_azimuth), r * std::sin(s.eval_azimuth), h};
}

// One force magnitude per layout site (vacant sites get 0). The field of the
// WHOLE array is sampled at each occupied site's working point.
std::vector<double> site_forces(const LatticeLayout& lay, const MomentModel& moment,
                                const Vec3& ext_B, const CoupleSetup& setup,
                                double rf_phase, int threads) {
    if (lay.coils.size() != lay.sites.size())
        throw ConfigError("coupling pipeline needs a layout with one coil per site");
    const FieldEvaluator eval(lay.coils, rf_phase);
    std::vector<Vec3> pts;
    std::vector<std::size_t> rows;
    for (std::size_t k = 0; k < lay.sites.size(); ++k) {
        if (!lay.sites[k].occupied) continue;
        rows.push_back(k);
        pts.push_back(site_eval_point(lay.coils[k], setup, lay.ion_height));
    }
    std::vector<FieldSample> samples(pts.size());
    eval.sample_many(pts, samples, threads);
    std::vector<double> F(lay.sites.size(), 0.0);
    for (std::size_t q = 0; q < rows.size(); ++q) {
        const ForceResult fr = dipole_force(samples[q], moment, ext_B);
        F[rows[q]] = pick_component(fr.F, setup.component);
    }
    return F;
}

// ---- output helpers ----

struct Artifacts {
    std::vector<std::string> files;
    const RunOptions* opts = nullptr;

    std::filesystem::path path(const std::string& name) const {
        return opts->out_dir / name;
    }
    void add(const std::filesystem::path& p) { files.push_back(p.string()); }
};

void write_grid(Artifacts& art, const std::string& stem, const CsvTable& table,
                const json& as_json) {
    const std::string& fmt = art.opts->format;
    if (fmt != "json") {
        const auto p = art.path(stem + ".csv");
        table.write(p);
        art.add(p);
    }
    if (fmt == "json" || fmt == "both") {
        const auto p = art.path(stem + ".json");
        write_text_file(p, as_json.dump(2) + "\n");
        art.add(p);
    }
}

void write_json_file(Artifacts& art, const std::string& name, const json& j) {
    const auto p = art.path(name);
    write_text_file(p, j.dump(2) + "\n");
    art.add(p);
}

// ---- verbs ----

void run_field(const ConfigDoc& cfg, const RunOptions& opts, Artifacts& art) {
    const LatticeLayout lay = build_layout(cfg);
    const ScanGrid grid = build_scan(cfg);
    const double rf_phase = cfg.quantity_or("drive", "rf_phase", Dim::Angle, 0.0);
    const double f_rf = cfg.quantity_or("drive", "f_rf", Dim::Frequency, 0.0);
    const MomentModel moment = build_moment(cfg);
    const Vec3 ext = external_field(cfg);

    const FieldEvaluator eval(lay.coils, rf_phase);
    const std::vector<Vec3> pts = grid.points();
    std::vector<Vec3> B(pts.size());
    eval.field_many(pts, B, opts.threads);

    std::vector<std::string> cols{"x", "y", "z", "Bx", "By", "Bz", "Bmag"};
    const bool with_adiabaticity = f_rf > 0.0;
    if (with_adiabaticity) cols.push_back("adiabaticity_ratio");
    CsvTable table(cols);
    table.resize(pts.size());
    json jrows = json::array();
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const Vec3 tot = B[i] + ext; // bias included: this is the field a moment sees
        const double mag = tot.norm();
        std::vector<double> row{pts[i].x, pts[i].y, pts[i].z,
                                tot.x,    tot.y,    tot.z,    mag};
        if (with_adiabaticity)
            row.push_back(adiabaticity_ratio(mag, moment, f_rf));
        table.set_row(i, row);
    }
    if (opts.format != "csv") {
        for (std::size_t i = 0; i < pts.size(); ++i) {
            const Vec3 tot = B[i] + ext;
            jrows.push_back({{"x", pts[i].x},
                             {"y", pts[i].y},
                             {"z", pts[i].z},
                             {"B", {tot.x, tot.y, tot.z}}});
        }
    }
    write_grid(art, "field_map", table, json{{"rows", jrows}});
}

void run_force(const ConfigDoc& cfg, const RunOptions& opts, Artifacts& art) {
    const LatticeLayout lay = build_layout(cfg);
    const ScanGrid grid = build_scan(cfg);
    const double rf_phase = cfg.quantity_or("drive", "rf_phase", Dim::Angle, 0.0);
    const MomentModel moment = build_moment(cfg);
    const Vec3 ext = external_field(cfg);

    const auto rows =
        force_map(lay.coils, moment, grid, ext, rf_phase, opts.threads);

    CsvTable table({"x", "y", "z", "Fx", "Fy", "Fz", "log10_abs_Fx", "log10_abs_Fz"});
    table.resize(rows.size());
    json jrows = json::array();
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const Vec3& F = rows[i].F;
        table.set_row(i, {rows[i].point.x, rows[i].point.y, rows[i].point.z, F.x, F.y,
                          F.z, std::log10(std::abs(F.x)), std::log10(std::abs(F.z))});
        if (opts.format != "csv") {
            jrows.push_back({{"x", rows[i].point.x},
                             {"y", rows[i].point.y},
                             {"z", rows[i].point.z},
                             {"F", {F.x, F.y, F.z}}});
        }
    }
    write_grid(art, "force_map", table, json{{"rows", jrows}});
}

void run_couple(const ConfigDoc& cfg, const RunOptions& opts, Artifacts& art) {
    const LatticeLayout lay = build_layout(cfg);
    const MomentModel moment = build_moment(cfg);
    const Vec3 ext = external_field(cfg);
    const CoupleSetup setup = build_couple(cfg, lay);
    const double rf_phase = cfg.quantity_or("drive", "rf_phase", Dim::Angle, 0.0);

    if (cfg.has_section("table")) {
        // Species comparison: the drive force is taken at the working point
        // of the coil nearest the array center, re-evaluated at each listed
        // ion height; the coupling separation is the lattice constant.
        std::istringstream in(cfg.string_value("table", "species"));
        std::vector<IonSpecies> species;
        std::vector<double> trap_f;
        std::string name;
        while (in >> name) {
            IonSpecies sp = IonSpecies::by_name(name);
            std::string key = "trap_frequency_" + sp.name;
            key.erase(std::remove(key.begin(), key.end(), '+'), key.end());
            trap_f.push_back(cfg.quantity("table", key, Dim::Frequency));
            species.push_back(std::move(sp));
        }
        if (species.empty())
            throw ConfigError(cfg.source() + ": [table] species list is empty");
        const auto heights = cfg.quantity_list("table", "heights", Dim::Length);
        const double a = cfg.quantity_or("table", "beta_distance", Dim::Length,
                                         lay.lattice_constant);
        if (!(a > 0.0))
            throw ConfigError(cfg.source() + ": [table] needs a positive "
                              "coupling separation (layout lattice constant "
                              "or beta_distance)");

        Vec3 centroid{};
        for (const CoilSpec& c : lay.coils) centroid += c.center;
        centroid = centroid / static_cast<double>(lay.coils.size());
        std::size_t mid = 0;
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < lay.coils.size(); ++k) {
            const double d2 = (lay.coils[k].center - centroid).norm2();
            if (d2 < best) {
                best = d2;
                mid = k;
            }
        }

        const FieldEvaluator eval(lay.coils, rf_phase);
        std::vector<double> F(heights.size());
        for (std::size_t q = 0; q < heights.size(); ++q) {
            CoupleSetup at = setup;
            at.eval_height = heights[q];
            const Vec3 pt = site_eval_point(lay.coils[mid], at, lay.ion_height);
            const ForceResult fr = dipole_force(eval.sample(pt), moment, ext);
            F[q] = pick_component(fr.F, setup.component);
        }

        std::ostringstream csv;
        csv << "species,mass_kg,trap_frequency_hz,beta";
        for (double d : heights) csv << ",J_hz_at_" << format_double(d) << "_m";
        csv << '\n';
        json jsp = json::array();
        for (std::size_t s = 0; s < species.size(); ++s) {
            const double w = two_pi * trap_f[s];
            const double beta = binding_parameter(species[s], w, a);
            csv << species[s].name << ',' << format_double(species[s].mass) << ','
                << format_double(trap_f[s]) << ',' << format_double(beta);
            json jrow{{"species", species[s].name},
                      {"trap_frequency_hz", trap_f[s]},
                      {"beta", beta}};
            json jj = json::array();
            for (std::size_t q = 0; q < heights.size(); ++q) {
                const double J =
                    coupling_strength(F[q], species[s], w, a, setup.coupling);
                csv << ',' << format_double(J);
                jj.push_back({{"height_m", heights[q]},
                              {"force_n", F[q]},
                              {"J_hz", J}});
            }
            jrow["couplings"] = jj;
            jsp.push_back(jrow);
            csv << '\n';
        }
        const auto pcsv = art.path("species_table.csv");
        write_text_file(pcsv, csv.str());
        art.add(pcsv);
        write_json_file(art, "species_table.json",
                        json{{"separation_m", a}, {"rows", jsp}});
        return;
    }

    const IonSpecies ion = build_ion(cfg);

    if (cfg.has_section("scan")) {
        // Coupling map: nearest-neighbor J for an ion moved over the scan
        // grid, from the drive force at each point, with the pair separation
        // fixed at the lattice constant.
        const ScanGrid grid = build_scan(cfg);
        const double w_ref = setup.coupling.orientation == ModeOrientation::Lateral
                                 ? lay.sites.at(0).trap_frequency.x
                                 : lay.sites.at(0).trap_frequency.z;
        const double a_sep = lay.lattice_constant;
        const FieldEvaluator eval(lay.coils, rf_phase);
        const std::vector<Vec3> pts = grid.points();
        std::vector<FieldSample> samples(pts.size());
        eval.sample_many(pts, samples, opts.threads);

        CsvTable table({"x", "y", "z", "force_n", "J_hz", "log10_abs_J"});
        table.resize(pts.size());
        json jrows = json::array();
        for (std::size_t i = 0; i < pts.size(); ++i) {
            const ForceResult fr = dipole_force(samples[i], moment, ext);
            const double F = pick_component(fr.F, setup.component);
            const double J = coupling_strength(F, ion, w_ref, a_sep, setup.coupling);
            table.set_row(i, {pts[i].x, pts[i].y, pts[i].z, F, J,
                              std::log10(std::abs(J))});
            if (opts.format != "csv")
                jrows.push_back({{"x", pts[i].x},
                                 {"y", pts[i].y},
                                 {"z", pts[i].z},
                                 {"force_n", F},
                                 {"J_hz", J}});
        }
        write_grid(art, "coupling_map", table,
                   json{{"separation_m", a_sep}, {"rows", jrows}});
        return;
    }

    const std::vector<double> F =
        site_forces(lay, moment, ext, setup, rf_phase, opts.threads);
    const CouplingMatrix cm = coupling_matrix(lay, F, ion, setup.coupling);

    const auto pcsv = art.path("couplings.csv");
    write_text_file(pcsv, cm.to_csv());
    art.add(pcsv);
    write_json_file(art, "couplings.json", cm.to_json());

    const double w_ref = setup.coupling.orientation == ModeOrientation::Lateral
                             ? lay.sites.at(0).trap_frequency.x
                             : lay.sites.at(0).trap_frequency.z;
    json summary{
        {"ion", ion.name},
        {"nn_distance_m", cm.nn_distance()},
        {"nn_coupling_hz", cm.nn_coupling()},
        {"binding_parameter", binding_parameter(ion, w_ref, cm.nn_distance())},
    };
    // The falloff fit needs a spread of pair distances; small layouts skip it.
    try {
        const FalloffResult falloff =
            correlation_falloff_check(cm, setup.falloff_dimension);
        summary["falloff_exponent"] = falloff.exponent;
        summary["falloff_dimension"] = falloff.dimension;
        summary["falloff_pass"] = falloff.pass;
    } catch (const std::invalid_argument&) {
    }
    write_json_file(art, "couple_summary.json", summary);
}

void run_spin(const ConfigDoc& cfg, const RunOptions& opts, Artifacts& art) {
    const LatticeLayout lay = build_layout(cfg);
    const MomentModel moment = build_moment(cfg);
    const Vec3 ext = external_field(cfg);
    const CoupleSetup setup = build_couple(cfg, lay);
    const IonSpecies ion = build_ion(cfg);
    const double rf_phase = cfg.quantity_or("drive", "rf_phase", Dim::Angle, 0.0);

    const std::vector<double> F =
        site_forces(lay, moment, ext, setup, rf_phase, opts.threads);
    const CouplingMatrix cm = coupling_matrix(lay, F, ion, setup.coupling);

    const std::string mode = cfg.string_or("spin", "mode", "sweep");

    if (mode == "sweep") {
        SweepSpec spec;
        spec.gammas = cfg.number_list("spin", "gammas");
        spec.bf_hz = cfg.quantity_or("spin", "bf", Dim::Frequency, 1.0);
        spec.ground = cfg.boolean_or("spin", "ground", true);
        spec.evolve_time = cfg.quantity_or("spin", "time", Dim::Time, 0.0);
        std::vector<SweepPoint> pts;
        try {
            pts = gamma_sweep(cm, spec);
        } catch (const std::invalid_argument& e) {
            throw ConfigError(cfg.source() + ": [spin]: " + e.what());
        }
        const std::size_t nsite = pts.empty() ? 0 : pts[0].obs.sx.size();
        std::vector<std::string> cols{"gamma",   "abs_gamma",    "mean_sx",
                                      "mean_sz", "nn_zz", "magnetization"};
        for (std::size_t j = 0; j < nsite; ++j)
            cols.push_back("sx_" + std::to_string(j));
        for (std::size_t j = 0; j < nsite; ++j)
            cols.push_back("sz_" + std::to_string(j));
        CsvTable table(cols);
        table.resize(pts.size());
        for (std::size_t i = 0; i < pts.size(); ++i) {
            std::vector<double> row{pts[i].gamma,       std::abs(pts[i].gamma),
                                    pts[i].obs.mean_sx, pts[i].obs.mean_sz,
                                    pts[i].nn_zz,       pts[i].obs.magnetization};
            row.insert(row.end(), pts[i].obs.sx.begin(), pts[i].obs.sx.end());
            row.insert(row.end(), pts[i].obs.sz.begin(), pts[i].obs.sz.end());
            table.set_row(i, row);
        }
        json jrows = json::array();
        for (const auto& p : pts)
            jrows.push_back({{"gamma", p.gamma},
                             {"mean_sx", p.obs.mean_sx},
                             {"nn_zz", p.nn_zz}});
        write_grid(art, "gamma_sweep", table, json{{"rows", jrows}});
        return;
    }

    if (mode == "cluster") {
        const bool long_range = cfg.boolean_or("spin", "include_long_range", true);
        ClusterResult res;
        try {
            res = make_cluster_state(cm, long_range);
        } catch (const std::invalid_argument& e) {
            throw ConfigError(cfg.source() + ": [spin]: " + e.what());
        }
        json edges = json::array();
        for (const auto& [i, j] : res.edges) edges.push_back({i, j});
        write_json_file(art, "cluster.json",
                        json{{"n", res.state.n},
                             {"include_long_range", long_range},
                             {"fidelity", res.fidelity},
                             {"edges", edges}});
        if (cfg.boolean_or("spin", "export_state", false)) {
            CsvTable st({"basis_index", "re", "im"});
            st.resize(res.state.dim());
            for (std::size_t k = 0; k < res.state.dim(); ++k)
                st.set_row(k, {static_cast<double>(k), res.state.amp[k].real(),
                               res.state.amp[k].imag()});
            const auto p = art.path("cluster_state.csv");
            st.write(p);
            art.add(p);
        }
        return;
    }

    if (mode == "evolve") {
        const double bf_hz =
            cfg.quantity_or("spin", "transverse_field", Dim::Frequency, 0.0);
        HamiltonianSpec ham;
        try {
            ham = HamiltonianSpec::from_coupling(cm, bf_hz, &lay);
        } catch (const std::invalid_argument& e) {
            throw ConfigError(cfg.source() + ": [spin]: " + e.what());
        }
        const double t = cfg.quantity("spin", "time", Dim::Time);
        const std::string method = cfg.string_or("spin", "method", "exact");
        const double dt = cfg.quantity_or("spin", "dt", Dim::Time, 0.0);
        const std::string initial = cfg.string_or("spin", "initial", "plus");
        SpinState st;
        try {
            if (initial == "plus") st = SpinState::plus_state(ham.n);
            else if (initial == "up") st = SpinState::all_up(ham.n);
            else if (initial.rfind("basis:", 0) == 0)
                st = SpinState::basis_state(ham.n, std::stoul(initial.substr(6)));
            else
                cfg.fail("spin", "initial", "expected plus, up, or basis:<k>");
            st = evolve(st, ham, t,
                        method == "trotter" ? EvolveMethod::Trotter
                                            : EvolveMethod::Exact,
                        dt);
        } catch (const std::invalid_argument& e) {
            throw ConfigError(cfg.source() + ": [spin]: " + e.what());
        }
        const Observables obs = observables(st);
        json jsx = json::array(), jsz = json::array();
        for (double v : obs.sx) jsx.push_back(v);
        for (double v : obs.sz) jsz.push_back(v);
        write_json_file(art, "evolve_observables.json",
                        json{{"n", st.n},
                             {"time_s", t},
                             {"method", method},
                             {"sx", jsx},
                             {"sz", jsz},
                             {"mean_sx", obs.mean_sx},
                             {"mean_sz", obs.mean_sz},
                             {"norm", st.norm()}});
        if (cfg.boolean_or("spin", "export_state", true)) {
            CsvTable stt({"basis_index", "re", "im"});
            stt.resize(st.dim());
            for (std::size_t k = 0; k < st.dim(); ++k)
                stt.set_row(k, {static_cast<double>(k), st.amp[k].real(),
                                st.amp[k].imag()});
            const auto p = art.path("evolve_state.csv");
            stt.write(p);
            art.add(p);
        }
        return;
    }

    cfg.fail("spin", "mode", "unknown spin mode '" + mode +
                                 "' (sweep, cluster, evolve)");
}

void run_report(const ConfigDoc& cfg, const RunOptions& opts, Artifacts& art) {
    const LatticeLayout lay = build_layout(cfg);
    const MomentModel moment = build_moment(cfg);
    const Vec3 ext = external_field(cfg);
    const CoupleSetup setup = build_couple(cfg, lay);
    const IonSpecies ion = build_ion(cfg);
    const double rf_phase = cfg.quantity_or("drive", "rf_phase", Dim::Angle, 0.0);
    const double f_rf = cfg.quantity_or("drive", "f_rf", Dim::Frequency, 1e6);
    const double impedance =
        cfg.quantity_or("drive", "impedance", Dim::Resistance, 50.0);
    const double duty = cfg.quantity_or("drive", "duty_cycle", Dim::Dimensionless, 1.0);

    // Target site: the occupied site closest to the array centroid.
    Vec3 centroid{};
    std::size_t nocc = 0;
    for (const Site& s : lay.sites)
        if (s.occupied) {
            centroid += s.position;
            ++nocc;
        }
    if (nocc == 0) throw ConfigError("report needs at least one occupied site");
    centroid = centroid / static_cast<double>(nocc);
    std::size_t target_row = 0;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < lay.sites.size(); ++k) {
        if (!lay.sites[k].occupied) continue;
        const double d = (lay.sites[k].position - centroid).norm2();
        if (d < best) {
            best = d;
            target_row = k;
        }
    }
    // Its nearest occupied neighbor.
    std::size_t neighbor_row = target_row;
    best = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < lay.sites.size(); ++k) {
        if (!lay.sites[k].occupied || k == target_row) continue;
        const double d =
            (lay.sites[k].position - lay.sites[target_row].position).norm2();
        if (d < best) {
            best = d;
            neighbor_row = k;
        }
    }

    const std::vector<double> F =
        site_forces(lay, moment, ext, setup, rf_phase, opts.threads);
    const CouplingMatrix cm = coupling_matrix(lay, F, ion, setup.coupling);
    const double nn_d = nocc > 1 ? cm.nn_distance() : lay.lattice_constant;
    const double nn_j = nocc > 1 ? cm.nn_coupling() : 0.0;

    const double w_ref = setup.coupling.orientation == ModeOrientation::Lateral
                             ? lay.sites[target_row].trap_frequency.x
                             : lay.sites[target_row].trap_frequency.z;
    const double beta = binding_parameter(ion, w_ref, nn_d);
    const std::string beta_flag =
        beta > 0.5 ? "warn" : (beta > 0.1 ? "marginal" : "ok");

    const FieldEvaluator eval(lay.coils, rf_phase);
    const Vec3 work_pt =
        site_eval_point(lay.coils[target_row], setup, lay.ion_height);
    const double Bmag = (eval.field(work_pt) + ext).norm();
    const double adiab = adiabaticity_ratio(Bmag, moment, f_rf);

    const PowerBudget power = power_budget(lay, impedance, duty);

    double crosstalk = 0.0;
    if (nocc > 1 && lay.coils.size() == lay.sites.size()) {
        crosstalk = crosstalk_ratio(lay, lay.sites[target_row].index,
                                    lay.sites[neighbor_row].index);
    }

    std::optional<FalloffResult> falloff;
    if (nocc > 2) {
        try {
            falloff = correlation_falloff_check(cm, setup.falloff_dimension);
        } catch (const std::invalid_argument&) {
            // Too few distinct pair distances for a credible fit.
        }
    }

    const std::vector<double> factors =
        cfg.has("report", "scale_factors")
            ? cfg.number_list("report", "scale_factors")
            : std::vector<double>{0.1, 0.5, 2.0, 10.0};
    const std::string law_s =
        cfg.string_or("report", "current_law", "constant_current");
    CurrentLaw law;
    if (law_s == "constant_current") law = CurrentLaw::ConstantCurrent;
    else if (law_s == "constant_current_density")
        law = CurrentLaw::ConstantCurrentDensity;
    else cfg.fail("report", "current_law",
                  "expected constant_current or constant_current_density");

    ScalePoint base;
    base.coil_radius = lay.coils[target_row].radius;
    base.lattice_a = nn_d;
    base.omega_T = w_ref;
    base.current = lay.coils[target_row].current;
    base.coupling_hz = nn_j;

    json jscales = json::array();
    std::ostringstream txt;
    txt << "design report: " << layout_kind_name(lay.kind) << ", "
        << lay.sites.size() << " sites (" << nocc << " occupied), nn spacing "
        << format_double(nn_d) << " m\n";
    txt << "ion: " << ion.name << ", trap frequency "
        << format_double(w_ref / two_pi) << " Hz\n";
    txt << "binding parameter beta = " << format_double(beta) << " (" << beta_flag
        << (beta_flag == "ok" ? ": <= 0.1" : beta_flag == "marginal"
                                                 ? ": exceeds 0.1"
                                                 : ": exceeds 0.5")
        << ")\n";
    txt << "adiabaticity ratio = " << format_double(adiab) << " ("
        << (adiab >= 10.0 ? "ok: >= 10" : "warn: < 10") << ")\n";
    txt << "nearest-neighbor coupling J = " << format_double(nn_j) << " Hz\n";
    txt << "power: " << power.driven_loops << " driven loops, "
        << format_double(power.per_loop_w) << " W per loop, "
        << format_double(power.total_w) << " W total (duty "
        << format_double(power.duty_cycle) << ")\n";
    if (nocc > 1) {
        txt << "crosstalk |B_neighbor/B_target| = " << format_double(crosstalk)
            << " (" << (crosstalk < 1e-3 ? "ok: < 1e-3" : "warn: >= 1e-3") << ")\n";
    }
    if (falloff) {
        txt << "coupling falloff exponent = " << format_double(falloff->exponent)
            << " (D = " << falloff->dimension << ", "
            << (falloff->pass ? "pass" : "fail") << ")\n";
    }
    for (double r : factors) {
        const ScalingReport sr = scaling_report(base, r, law);
        jscales.push_back(sr.to_json());
        txt << "scale r = " << format_double(r) << " (" << law_s
            << "): J x " << format_double(sr.j_ratio) << " -> "
            << format_double(sr.scaled_coupling_hz) << " Hz"
            << (sr.coil_overlap ? " [coil overlap]" : "") << "\n";
    }

    json j{{"layout_kind", layout_kind_name(lay.kind)},
           {"sites", lay.sites.size()},
           {"occupied", nocc},
           {"ion", ion.name},
           {"nn_distance_m", nn_d},
           {"nn_coupling_hz", nn_j},
           {"binding_parameter", beta},
           {"binding_parameter_flag", beta_flag},
           {"field_at_working_point_t", Bmag},
           {"adiabaticity_ratio", adiab},
           {"adiabatic_ok", adiab >= 10.0},
           {"power", power.to_json()},
           {"scaling", jscales}};
    if (nocc > 1) {
        j["crosstalk_ratio"] = crosstalk;
        j["crosstalk_ok"] = crosstalk < 1e-3;
    }
    if (falloff) {
        j["falloff_exponent"] = falloff->exponent;
        j["falloff_pass"] = falloff->pass;
    }
    write_json_file(art, "report.json", j);
    const auto ptxt = art.path("report.txt");
    write_text_file(ptxt, txt.str());
    art.add(ptxt);
}

void run_layout(const ConfigDoc& cfg, const RunOptions&, Artifacts& art) {
    const LatticeLayout lay = build_layout(cfg);
    write_json_file(art, "layout.json", lay.to_json());

    json jr = ratio_analysis(lay).to_json();
    if (cfg.has("thresholds", "targets")) {
        const auto targets = cfg.number_list("thresholds", "targets");
        json jt = json::array();
        for (double t : targets) {
            json row{{"target", t}};
            if (lay.kind == LayoutKind::Ring) {
                row["smallest_ring_n"] = smallest_ring_below(t);
            } else if (lay.kind == LayoutKind::LadderRing && lay.ladder) {
                row["rungs_for_asymmetry"] =
                    ladder_rungs_for_asymmetry(t, lay.ladder->a1, lay.ladder->delta_r);
            }
            jt.push_back(row);
        }
        jr["thresholds"] = jt;
    }
    write_json_file(art, "ratios.json", jr);
}

} // namespace

std::vector<std::string> run_verb(const std::string& verb, const ConfigDoc& cfg,
                                  const RunOptions& opts) {
    validate_config(cfg);
    std::filesystem::create_directories(opts.out_dir);
    if (opts.format != "csv" && opts.format != "json" && opts.format != "both")
        throw ConfigError("unknown output format '" + opts.format +
                          "' (csv, json, both)");
    if (opts.threads < 1) throw ConfigError("thread count must be >= 1");

    Artifacts art;
    art.opts = &opts;

    if (verb == "field") run_field(cfg, opts, art);
    else if (verb == "force") run_force(cfg, opts, art);
    else if (verb == "couple") run_couple(cfg, opts, art);
    else if (verb == "spin") run_spin(cfg, opts, art);
    else if (verb == "report") run_report(cfg, opts, art);
    else if (verb == "layout") run_layout(cfg, opts, art);
    else throw ConfigError("unknown verb '" + verb + "'");

    RunManifest man;
    man.tool = kToolName;
    man.version = kVersion;
    man.verb = verb;
    man.kernel = kernel_name(active_kernel());
    man.config_hash = cfg.fingerprint();
    man.outputs = art.files;
    const auto mp = opts.out_dir / "manifest.json";
    man.write(mp);
    art.add(mp);
    return art.files;
}

} // namespace microtrap
