#include "qbm2/app/config.hpp"

#include <cmath>
#include <fstream>
#include <set>

#include "qbm2/errors.hpp"

namespace qbm2::app {

namespace {

using nlohmann::json;

// View of one JSON object that records which keys were read, so leftovers
// can be reported as unknown.
class Section {
public:
    Section(const json& j, std::string path) : j_(j), path_(std::move(path))
    {
        if (!j_.is_object()) {
            fail("", "expected an object");
        }
    }

    ~Section() = default;
    Section(const Section&) = delete;
    Section& operator=(const Section&) = delete;

    [[noreturn]] void fail(const std::string& key, const std::string& msg) const
    {
        throw ConfigError(field(key) + ": " + msg);
    }

    std::string field(const std::string& key) const
    {
        if (key.empty()) {
            return path_.empty() ? "<root>" : path_;
        }
        return path_.empty() ? key : path_ + "." + key;
    }

    bool has(const std::string& key) const { return j_.contains(key); }

    const json& raw(const std::string& key)
    {
        if (!j_.contains(key)) {
            fail(key, "missing");
        }
        seen_.insert(key);
        return j_.at(key);
    }

    double number(const std::string& key)
    {
        const auto& v = raw(key);
        if (!v.is_number()) {
            fail(key, "expected a number");
        }
        const double x = v.get<double>();
        if (!std::isfinite(x)) {
            fail(key, "must be finite");
        }
        return x;
    }

    double number(const std::string& key, double fallback)
    {
        return has(key) ? number(key) : fallback;
    }

    std::size_t count(const std::string& key, std::size_t fallback)
    {
        if (!has(key)) {
            return fallback;
        }
        const auto& v = raw(key);
        if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0)) {
            fail(key, "expected a non-negative integer");
        }
        return v.get<std::size_t>();
    }

    std::string text(const std::string& key, const std::string& fallback)
    {
        if (!has(key)) {
            return fallback;
        }
        const auto& v = raw(key);
        if (!v.is_string()) {
            fail(key, "expected a string");
        }
        return v.get<std::string>();
    }

    bool flag(const std::string& key, bool fallback)
    {
        if (!has(key)) {
            return fallback;
        }
        const auto& v = raw(key);
        if (!v.is_boolean()) {
            fail(key, "expected true or false");
        }
        return v.get<bool>();
    }

    void finish() const
    {
        for (const auto& [key, value] : j_.items()) {
            if (!seen_.count(key)) {
                fail(key, "unknown key");
            }
        }
    }

private:
    const json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

std::vector<double> numbers(Section& s, const std::string& key, std::size_t n)
{
    const auto& v = s.raw(key);
    if (!v.is_array() || (n != 0 && v.size() != n)) {
        s.fail(key, n ? "expected an array of " + std::to_string(n) + " numbers"
                      : std::string("expected an array of numbers"));
    }
    std::vector<double> out;
    for (const auto& e : v) {
        if (!e.is_number() || !std::isfinite(e.get<double>())) {
            s.fail(key, "expected finite numbers");
        }
        out.push_back(e.get<double>());
    }
    return out;
}

Ordering parse_ordering(Section& s, const std::string& key, Ordering fallback)
{
    const auto name = s.text(key, fallback == Ordering::Lab ? "lab" : "cm_rel");
    if (name == "lab") {
        return Ordering::Lab;
    }
    if (name == "cm_rel") {
        return Ordering::CmRel;
    }
    s.fail(key, "expected \"lab\" or \"cm_rel\"");
}

const char* ordering_name(Ordering o)
{
    return o == Ordering::Lab ? "lab" : "cm_rel";
}

DriveKind parse_drive(Section& s, const std::string& key, DriveKind fallback)
{
    static const std::array<std::pair<const char*, DriveKind>, 3> kNames{
        {{"exact", DriveKind::Exact}, {"markov", DriveKind::Markov},
         {"weak_damping", DriveKind::WeakDamping}}};
    std::string dflt;
    for (const auto& [n, k] : kNames) {
        if (k == fallback) {
            dflt = n;
        }
    }
    const auto name = s.text(key, dflt);
    for (const auto& [n, k] : kNames) {
        if (name == n) {
            return k;
        }
    }
    s.fail(key, "expected \"exact\", \"markov\" or \"weak_damping\"");
}

const char* drive_name(DriveKind k)
{
    switch (k) {
    case DriveKind::Exact: return "exact";
    case DriveKind::Markov: return "markov";
    case DriveKind::WeakDamping: return "weak_damping";
    }
    return "exact";
}

const char* lattice_name(LatticeKind k)
{
    switch (k) {
    case LatticeKind::Diagonal: return "diagonal";
    case LatticeKind::Antidiagonal: return "antidiagonal";
    case LatticeKind::Full: return "full";
    case LatticeKind::Wigner: return "wigner";
    }
    return "diagonal";
}

void parse_system(Section& s, SystemConfig& sys)
{
    sys.mass = s.number("mass");
    sys.omega = s.number("omega");
    sys.kappa = s.number("kappa", 0.0);
    if (s.has("k")) {
        const auto& v = s.raw("k");
        if (!v.is_number_integer()) {
            s.fail("k", "expected an integer");
        }
        sys.k = v.get<int>();
    }
    sys.constants.hbar = s.number("hbar", 1.0);
    sys.constants.k_B = s.number("k_B", 1.0);
    if (!(sys.mass > 0.0)) {
        s.fail("mass", "must be positive");
    }
    if (!(sys.omega >= 0.0)) {
        s.fail("omega", "must be non-negative");
    }
    if (!(sys.constants.hbar > 0.0)) {
        s.fail("hbar", "must be positive");
    }
    if (!(sys.constants.k_B > 0.0)) {
        s.fail("k_B", "must be positive");
    }
    s.finish();
}

void parse_bath(Section& s, BathSection& b, const SystemConfig& sys)
{
    const auto kind = s.text("kind", "ohmic");
    b.temperature = s.number("temperature", 0.0);
    if (!(b.temperature >= 0.0)) {
        s.fail("temperature", "must be non-negative");
    }
    b.counterterm = s.flag("counterterm", false);
    if (kind == "ohmic") {
        b.kind = BathKind::Ohmic;
        b.damping = s.number("damping");
        b.cutoff = s.number("cutoff");
        b.mass_scale = s.number("mass_scale", sys.cm_mass());
        if (!(b.damping >= 0.0)) {
            s.fail("damping", "must be non-negative");
        }
        if (!(b.cutoff > 0.0)) {
            s.fail("cutoff", "must be positive");
        }
        if (!(b.mass_scale > 0.0)) {
            s.fail("mass_scale", "must be positive");
        }
    } else if (kind == "discrete") {
        b.kind = BathKind::Discrete;
        const auto& arr = s.raw("modes");
        if (!arr.is_array()) {
            s.fail("modes", "expected an array");
        }
        for (std::size_t n = 0; n < arr.size(); ++n) {
            Section m(arr[n], s.field("modes") + "[" + std::to_string(n) + "]");
            BathMode mode;
            mode.mass = m.number("mass");
            mode.frequency = m.number("frequency");
            mode.coupling = m.number("coupling");
            if (!(mode.mass > 0.0)) {
                m.fail("mass", "must be positive");
            }
            if (!(mode.frequency > 0.0)) {
                m.fail("frequency", "must be positive");
            }
            m.finish();
            b.modes.push_back(mode);
        }
    } else if (kind == "none") {
        b.kind = BathKind::None;
    } else {
        s.fail("kind", "expected \"ohmic\", \"discrete\" or \"none\"");
    }
    s.finish();
}

void parse_grid(Section& s, GridSection& g)
{
    g.t_max = s.number("t_max");
    g.dt = s.number("dt");
    g.output_stride = s.count("output_stride", 1);
    if (!(g.dt > 0.0)) {
        s.fail("dt", "must be positive");
    }
    if (!(g.t_max >= g.dt)) {
        s.fail("t_max", "must be at least one step");
    }
    if (g.output_stride == 0) {
        s.fail("output_stride", "must be at least 1");
    }
    s.finish();
}

InitialState parse_initial(Section& s, double hbar)
{
    const auto kind = s.text("kind", "");
    InitialState out;
    if (kind == "gaussian") {
        GaussianState g;
        g.hbar = hbar;
        g.ordering = parse_ordering(s, "ordering", Ordering::CmRel);
        const auto mean = numbers(s, "mean", 4);
        const auto& rows = s.raw("cov");
        if (!rows.is_array() || rows.size() != 4) {
            s.fail("cov", "expected 4 rows of 4 numbers");
        }
        for (int i = 0; i < 4; ++i) {
            g.mean(i) = mean[static_cast<std::size_t>(i)];
            const auto& row = rows[static_cast<std::size_t>(i)];
            if (!row.is_array() || row.size() != 4) {
                s.fail("cov", "expected 4 rows of 4 numbers");
            }
            for (int k = 0; k < 4; ++k) {
                const auto& e = row[static_cast<std::size_t>(k)];
                if (!e.is_number()) {
                    s.fail("cov", "expected numbers");
                }
                g.cov(i, k) = e.get<double>();
            }
        }
        try {
            validate_state(g);
        } catch (const ConfigError& e) {
            s.fail("cov", e.what());
        }
        out = g;
    } else if (kind == "widths") {
        Widths w;
        w.a2 = s.number("a2");
        w.b2 = s.number("b2");
        w.c2 = s.number("c2");
        w.d2 = s.number("d2");
        for (const auto& [key, v] : {std::pair{"a2", w.a2}, {"b2", w.b2}, {"c2", w.c2}, {"d2", w.d2}}) {
            if (!(v > 0.0)) {
                s.fail(key, "must be positive");
            }
        }
        out = w;
    } else if (kind == "superposition") {
        SuperpositionSpec sp;
        sp.L0 = s.number("L0");
        sp.P0 = s.number("P0", 0.0);
        sp.delta = s.number("delta");
        if (!(sp.delta > 0.0)) {
            s.fail("delta", "must be positive");
        }
        const auto& amps = s.raw("s");
        if (!amps.is_array() || amps.size() != 4) {
            s.fail("s", "expected four amplitudes [re, im]");
        }
        for (std::size_t k = 0; k < 4; ++k) {
            const auto& a = amps[k];
            if (a.is_number()) {
                sp.s[k] = {a.get<double>(), 0.0};
            } else if (a.is_array() && a.size() == 2 && a[0].is_number() && a[1].is_number()) {
                sp.s[k] = {a[0].get<double>(), a[1].get<double>()};
            } else {
                s.fail("s", "expected four amplitudes [re, im]");
            }
        }
        if (!(state_norm(sp, hbar) > 1e-300)) {
            s.fail("s", "amplitudes describe a null state");
        }
        out = sp;
    } else {
        s.fail("kind", "expected \"gaussian\", \"widths\" or \"superposition\"");
    }
    s.finish();
    return out;
}

LatticeAxis parse_axis(const json& j, const std::string& path)
{
    Section s(j, path);
    LatticeAxis a;
    a.lo = s.number("lo");
    a.hi = s.number("hi");
    a.n = s.count("n", 1);
    if (a.n == 0) {
        s.fail("n", "must be at least 1");
    }
    if (a.n > 1 && !(a.hi > a.lo)) {
        s.fail("hi", "must exceed lo");
    }
    s.finish();
    return a;
}

json axis_json(const LatticeAxis& a)
{
    return {{"lo", a.lo}, {"hi", a.hi}, {"n", a.n}};
}

}  // namespace

RunConfig parse_config(const nlohmann::json& j)
{
    Section root(j, "");
    RunConfig cfg;
    {
        const auto& v = root.raw("version");
        if (!v.is_number_integer() || v.get<int>() != kConfigVersion) {
            root.fail("version", "unsupported config version (expected "
                                     + std::to_string(kConfigVersion) + ")");
        }
    }
    {
        Section s(root.raw("system"), "system");
        parse_system(s, cfg.system);
    }
    if (root.has("bath")) {
        Section s(root.raw("bath"), "bath");
        parse_bath(s, cfg.bath, cfg.system);
    }
    if (root.has("grid")) {
        Section s(root.raw("grid"), "grid");
        parse_grid(s, cfg.grid);
    }
    if (root.has("initial_state")) {
        Section s(root.raw("initial_state"), "initial_state");
        cfg.initial = parse_initial(s, cfg.system.constants.hbar);
    }
    if (root.has("evolve")) {
        Section s(root.raw("evolve"), "evolve");
        cfg.evolve.drive = parse_drive(s, "drive", DriveKind::Exact);
        if (s.has("omega_renormalized")) {
            cfg.evolve.omega_renormalized = s.number("omega_renormalized");
            if (!(*cfg.evolve.omega_renormalized >= 0.0)) {
                s.fail("omega_renormalized", "must be non-negative");
            }
        }
        cfg.evolve.output = parse_ordering(s, "output", Ordering::CmRel);
        s.finish();
    }
    if (root.has("oracle")) {
        Section s(root.raw("oracle"), "oracle");
        cfg.oracle.modes = s.count("modes", cfg.oracle.modes);
        cfg.oracle.omega_max = s.number("omega_max", cfg.oracle.omega_max);
        cfg.oracle.threshold = s.number("threshold", cfg.oracle.threshold);
        if (cfg.oracle.modes == 0) {
            s.fail("modes", "must be at least 1");
        }
        if (!(cfg.oracle.omega_max > 0.0)) {
            s.fail("omega_max", "must be positive");
        }
        if (!(cfg.oracle.threshold > 0.0)) {
            s.fail("threshold", "must be positive");
        }
        s.finish();
    }
    if (root.has("decohere")) {
        Section s(root.raw("decohere"), "decohere");
        cfg.decohere.horizons = numbers(s, "horizons", 0);
        for (const double t : cfg.decohere.horizons) {
            if (!(t > 0.0)) {
                s.fail("horizons", "horizons must be positive");
            }
        }
        const auto kind = s.text("lattice", "diagonal");
        if (kind == "diagonal") {
            cfg.decohere.lattice = LatticeKind::Diagonal;
        } else if (kind == "antidiagonal") {
            cfg.decohere.lattice = LatticeKind::Antidiagonal;
        } else if (kind == "full") {
            cfg.decohere.lattice = LatticeKind::Full;
        } else if (kind == "wigner") {
            cfg.decohere.lattice = LatticeKind::Wigner;
        } else {
            s.fail("lattice", "expected \"diagonal\", \"antidiagonal\", \"full\" or \"wigner\"");
        }
        const auto& axes = s.raw("axes");
        if (axes.is_object()) {
            const auto a = parse_axis(axes, s.field("axes"));
            cfg.decohere.axes = {a, a, a, a};
        } else if (axes.is_array() && axes.size() == 4) {
            for (std::size_t k = 0; k < 4; ++k) {
                cfg.decohere.axes[k] = parse_axis(axes[k], s.field("axes") + "[" + std::to_string(k) + "]");
            }
        } else {
            s.fail("axes", "expected one axis object or an array of four");
        }
        cfg.decohere.coupled_relative = s.flag("coupled_relative", false);
        s.finish();
    }
    if (root.has("uncertainty")) {
        Section s(root.raw("uncertainty"), "uncertainty");
        cfg.uncertainty.drive = parse_drive(s, "drive", DriveKind::WeakDamping);
        cfg.uncertainty.delta = s.number("delta", 1.0);
        if (!(cfg.uncertainty.delta > 0.0)) {
            s.fail("delta", "must be positive");
        }
        s.finish();
    }
    root.finish();
    return cfg;
}

RunConfig load_config(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open config file " + path.string());
    }
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw ConfigError("config file " + path.string() + " is not valid JSON: " + e.what());
    }
    return parse_config(j);
}

nlohmann::json to_json(const RunConfig& cfg)
{
    json j;
    j["version"] = cfg.version;
    const auto& sys = cfg.system;
    j["system"] = {{"mass", sys.mass},   {"omega", sys.omega},           {"kappa", sys.kappa},
                   {"k", sys.k},         {"hbar", sys.constants.hbar},   {"k_B", sys.constants.k_B}};

    json bath{{"temperature", cfg.bath.temperature}, {"counterterm", cfg.bath.counterterm}};
    switch (cfg.bath.kind) {
    case BathKind::Ohmic:
        bath["kind"] = "ohmic";
        bath["damping"] = cfg.bath.damping;
        bath["cutoff"] = cfg.bath.cutoff;
        bath["mass_scale"] = cfg.bath.mass_scale;
        break;
    case BathKind::Discrete: {
        bath["kind"] = "discrete";
        json modes = json::array();
        for (const auto& m : cfg.bath.modes) {
            modes.push_back({{"mass", m.mass}, {"frequency", m.frequency}, {"coupling", m.coupling}});
        }
        bath["modes"] = modes;
        break;
    }
    case BathKind::None: bath["kind"] = "none"; break;
    }
    j["bath"] = bath;

    if (cfg.grid.dt > 0.0) {
        j["grid"] = {{"t_max", cfg.grid.t_max},
                     {"dt", cfg.grid.dt},
                     {"output_stride", cfg.grid.output_stride}};
    }

    if (const auto* g = std::get_if<GaussianState>(&cfg.initial)) {
        json cov = json::array();
        for (int i = 0; i < 4; ++i) {
            cov.push_back({g->cov(i, 0), g->cov(i, 1), g->cov(i, 2), g->cov(i, 3)});
        }
        j["initial_state"] = {{"kind", "gaussian"},
                              {"ordering", ordering_name(g->ordering)},
                              {"mean", {g->mean(0), g->mean(1), g->mean(2), g->mean(3)}},
                              {"cov", cov}};
    } else if (const auto* w = std::get_if<Widths>(&cfg.initial)) {
        j["initial_state"] = {{"kind", "widths"}, {"a2", w->a2}, {"b2", w->b2}, {"c2", w->c2}, {"d2", w->d2}};
    } else if (const auto* sp = std::get_if<SuperpositionSpec>(&cfg.initial)) {
        json amps = json::array();
        for (const auto& a : sp->s) {
            amps.push_back({a.real(), a.imag()});
        }
        j["initial_state"] = {{"kind", "superposition"}, {"L0", sp->L0}, {"P0", sp->P0},
                              {"delta", sp->delta},      {"s", amps}};
    }

    json evolve{{"drive", drive_name(cfg.evolve.drive)}, {"output", ordering_name(cfg.evolve.output)}};
    if (cfg.evolve.omega_renormalized) {
        evolve["omega_renormalized"] = *cfg.evolve.omega_renormalized;
    }
    j["evolve"] = evolve;
    j["oracle"] = {{"modes", cfg.oracle.modes},
                   {"omega_max", cfg.oracle.omega_max},
                   {"threshold", cfg.oracle.threshold}};
    if (!cfg.decohere.horizons.empty()) {
        json axes = json::array();
        for (const auto& a : cfg.decohere.axes) {
            axes.push_back(axis_json(a));
        }
        j["decohere"] = {{"horizons", cfg.decohere.horizons},
                         {"lattice", lattice_name(cfg.decohere.lattice)},
                         {"axes", axes},
                         {"coupled_relative", cfg.decohere.coupled_relative}};
    }
    j["uncertainty"] = {{"drive", drive_name(cfg.uncertainty.drive)}, {"delta", cfg.uncertainty.delta}};
    return j;
}

SpectralDensity make_spectral_density(const BathSection& bath)
{
    switch (bath.kind) {
    case BathKind::Ohmic:
        if (bath.damping == 0.0) {
            return SpectralDensity::discrete({});
        }
        return SpectralDensity::ohmic(bath.mass_scale, bath.damping, bath.cutoff);
    case BathKind::Discrete: return SpectralDensity::discrete(bath.modes);
    case BathKind::None: return SpectralDensity::discrete({});
    }
    return SpectralDensity::discrete({});
}

}  // namespace qbm2::app
