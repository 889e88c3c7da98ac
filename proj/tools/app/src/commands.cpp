#include "qbm2/app/commands.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <memory>
#include <ostream>

#include "qbm2/analysis.hpp"
#include "qbm2/coefficients.hpp"
#include "qbm2/csv.hpp"
#include "qbm2/elementary.hpp"
#include "qbm2/errors.hpp"
#include "qbm2/kernels.hpp"
#include "qbm2/oracle.hpp"
#include "qbm2/propagator.hpp"

namespace qbm2::app {

namespace {

using nlohmann::json;

// Rows of numbers written either as CSV with a header or as a JSON array of
// objects keyed by the header.
class RowSink {
public:
    RowSink(const std::filesystem::path& dir, const std::string& stem, std::vector<std::string> header,
            OutputFormat format)
        : header_(std::move(header)), format_(format)
    {
        path_ = dir / (stem + (format == OutputFormat::Csv ? ".csv" : ".json"));
        out_.open(path_);
        if (!out_) {
            throw ResourceError("cannot write " + path_.string());
        }
        if (format_ == OutputFormat::Csv) {
            csv_ = std::make_unique<CsvWriter>(out_, header_);
        } else {
            out_ << "[";
        }
    }

    RowSink(const RowSink&) = delete;
    RowSink& operator=(const RowSink&) = delete;

    ~RowSink()
    {
        if (format_ == OutputFormat::Json) {
            out_ << (rows_ ? "\n]\n" : "]\n");
        }
    }

    void row(std::span<const double> values)
    {
        if (csv_) {
            csv_->row(values);
        } else {
            if (values.size() != header_.size()) {
                throw RangeError("row width does not match header");
            }
            out_ << (rows_ ? ",\n  {" : "\n  {");
            for (std::size_t k = 0; k < values.size(); ++k) {
                out_ << (k ? ", " : "") << '"' << header_[k] << "\": "
                     << (std::isfinite(values[k]) ? format_double(values[k]) : "null");
            }
            out_ << "}";
        }
        ++rows_;
    }

    void row(std::initializer_list<double> values) { row(std::span<const double>(values.begin(), values.size())); }

    std::string file_name() const { return path_.filename().string(); }
    std::size_t rows() const noexcept { return rows_; }

private:
    std::vector<std::string> header_;
    OutputFormat format_;
    std::filesystem::path path_;
    std::ofstream out_;
    std::unique_ptr<CsvWriter> csv_;
    std::size_t rows_ = 0;
};

const std::vector<std::string>& trajectory_header()
{
    static const std::vector<std::string> h{"t",     "mean1", "mean2", "mean3", "mean4",
                                            "cov11", "cov12", "cov13", "cov14", "cov22",
                                            "cov23", "cov24", "cov33", "cov34", "cov44"};
    return h;
}

void write_trajectory(RowSink& sink, const StateTrajectory& traj)
{
    std::vector<double> row(15);
    for (std::size_t n = 0; n < traj.t.size(); ++n) {
        const auto& s = traj.states[n];
        row[0] = traj.t[n];
        for (int i = 0; i < 4; ++i) {
            row[static_cast<std::size_t>(1 + i)] = s.mean(i);
        }
        std::size_t k = 5;
        for (int i = 0; i < 4; ++i) {
            for (int j = i; j < 4; ++j) {
                row[k++] = s.cov(i, j);
            }
        }
        sink.row(row);
    }
}

json state_json(const GaussianState& s)
{
    json cov = json::array();
    for (int i = 0; i < 4; ++i) {
        cov.push_back({s.cov(i, 0), s.cov(i, 1), s.cov(i, 2), s.cov(i, 3)});
    }
    return {{"ordering", s.ordering == Ordering::Lab ? "lab" : "cm_rel"},
            {"mean", {s.mean(0), s.mean(1), s.mean(2), s.mean(3)}},
            {"cov", cov}};
}

json finite_or_null(double v)
{
    return std::isfinite(v) ? json(v) : json(nullptr);
}

const GridSection& require_grid(const RunConfig& cfg)
{
    if (!(cfg.grid.dt > 0.0)) {
        throw ConfigError("grid: section required for this command");
    }
    return cfg.grid;
}

std::size_t stride_of(const RunConfig& cfg, const CommandOptions& opt)
{
    const std::size_t s = opt.stride.value_or(cfg.grid.output_stride);
    if (s == 0) {
        throw ConfigError("--stride must be at least 1");
    }
    return s;
}

GaussianState initial_gaussian(const RunConfig& cfg)
{
    const double hbar = cfg.system.constants.hbar;
    if (const auto* g = std::get_if<GaussianState>(&cfg.initial)) {
        return *g;
    }
    if (const auto* w = std::get_if<Widths>(&cfg.initial)) {
        return cm_rel_product_state(w->a2, w->b2, w->c2, w->d2, hbar);
    }
    throw ConfigError("initial_state: a \"gaussian\" or \"widths\" state is required");
}

KernelTable bath_table(const RunConfig& cfg, double t_max)
{
    return tabulate_kernels(make_spectral_density(cfg.bath), cfg.bath.temperature, t_max, cfg.grid.dt,
                            cfg.system.constants);
}

// Frequency of the centre-of-mass equation, shifted up when the counterterm is on.
double cm_omega(const RunConfig& cfg, const SpectralDensity& sd)
{
    const auto& sys = cfg.system;
    return cfg.bath.counterterm ? counterterm_frequency(sd, sys.mass, sys.omega) : sys.omega;
}

CmDrive make_drive(const RunConfig& cfg, DriveKind kind)
{
    const auto& sys = cfg.system;
    const double omega_eff = cfg.evolve.omega_renormalized.value_or(sys.omega);
    switch (kind) {
    case DriveKind::Exact: {
        const auto kt = bath_table(cfg, cfg.grid.t_max);
        const double w = cm_omega(cfg, make_spectral_density(cfg.bath));
        auto traj = std::make_shared<const CoefficientTrajectory>(
            coefficient_trajectory(kt, sys.mass, w, cfg.grid.t_max));
        return TrajectoryDrive{std::move(traj), w};
    }
    case DriveKind::Markov: {
        if (cfg.bath.kind == BathKind::Discrete) {
            throw ConfigError("evolve.drive: the Fokker-Planck limit needs an ohmic bath");
        }
        return MarkovDrive{markov_limit_constants(sys.cm_mass(), cfg.bath.ohmic_damping(),
                                                  cfg.bath.temperature, sys.constants),
                           omega_eff};
    }
    case DriveKind::WeakDamping: {
        if (cfg.bath.kind == BathKind::Discrete) {
            throw ConfigError("drive: the weak-damping drive needs an ohmic bath");
        }
        auto d = weak_damping_drive(sys, cfg.bath.ohmic_damping(), cfg.bath.temperature);
        d.omega_renormalized = omega_eff;
        return d;
    }
    }
    throw ConfigError("unknown drive");
}

void write_summary(const std::filesystem::path& dir, const json& summary)
{
    std::ofstream out(dir / "summary.json");
    if (!out) {
        throw ResourceError("cannot write summary.json");
    }
    out << summary.dump(2) << "\n";
}

double min_rs(const StateTrajectory& traj)
{
    double m = std::numeric_limits<double>::infinity();
    for (const auto& s : traj.states) {
        m = std::min(m, robertson_schrodinger_min(s));
    }
    return m;
}

}  // namespace

json cmd_coeffs(const RunConfig& cfg, const CommandOptions& opt)
{
    const auto& grid = require_grid(cfg);
    const auto kt = bath_table(cfg, grid.t_max);
    CoefficientOptions co;
    co.stride = stride_of(cfg, opt);
    const double w = cm_omega(cfg, make_spectral_density(cfg.bath));
    const auto traj = coefficient_trajectory(kt, cfg.system.mass, w, grid.t_max, co);

    RowSink sink(opt.out_dir, "coeffs", {"t", "dOmega2", "Gamma", "Delta", "Sigma"}, opt.format);
    std::size_t gaps = 0;
    for (std::size_t i = 0; i < traj.t.size(); ++i) {
        sink.row({traj.t[i], traj.dOmega2[i], traj.Gamma[i], traj.Delta[i], traj.Sigma[i]});
        gaps += traj.valid[i] ? 0 : 1;
    }
    const std::size_t last = traj.t.size() - 1;
    return {{"command", "coeffs"},
            {"output", sink.file_name()},
            {"rows", sink.rows()},
            {"gaps", gaps},
            {"final",
             {{"t", traj.t[last]},
              {"dOmega2", finite_or_null(traj.dOmega2[last])},
              {"Gamma", finite_or_null(traj.Gamma[last])},
              {"Delta", finite_or_null(traj.Delta[last])},
              {"Sigma", finite_or_null(traj.Sigma[last])}}},
            {"convention", traj.convention_tag}};
}

json cmd_evolve(const RunConfig& cfg, const CommandOptions& opt)
{
    const auto& grid = require_grid(cfg);
    require_quadratic(cfg.system);
    const auto state = initial_gaussian(cfg);
    const auto drive = make_drive(cfg, cfg.evolve.drive);
    const auto traj = evolve(state, cfg.system, drive, FlowGrid{grid.t_max, grid.dt, stride_of(cfg, opt)},
                             cfg.evolve.output);

    RowSink sink(opt.out_dir, "trajectory", trajectory_header(), opt.format);
    write_trajectory(sink, traj);
    return {{"command", "evolve"},
            {"output", sink.file_name()},
            {"rows", sink.rows()},
            {"final_time", traj.t.back()},
            {"final_state", state_json(traj.states.back())},
            {"min_robertson_schrodinger", min_rs(traj)}};
}

json cmd_entangle(const RunConfig& cfg, const CommandOptions& opt)
{
    const auto& grid = require_grid(cfg);
    const auto& sys = cfg.system;
    const auto* w = std::get_if<Widths>(&cfg.initial);
    if (!w) {
        throw ConfigError("initial_state: entangle needs a \"widths\" state");
    }
    if (sys.omega != 0.0) {
        throw ConfigError("system.omega: entangle models free particles, set omega to 0");
    }
    if (cfg.bath.kind != BathKind::Ohmic) {
        throw ConfigError("bath.kind: entangle needs an ohmic bath");
    }
    const double gamma = cfg.bath.damping;
    const double T = cfg.bath.temperature;
    const auto dent = disentanglement_time(*w, sys.mass, gamma, T, sys.constants);
    if (!(dent.diffusion > 0.0)) {
        throw ConfigError("bath: entangle needs positive damping and temperature");
    }
    const auto scaling = duan_scaling(sys.mass, dent.diffusion, sys.constants);

    MarkovDrive drive{{0.0, 0.0, dent.diffusion}, 0.0};
    const auto state = cm_rel_product_state(w->a2, w->b2, w->c2, w->d2, sys.constants.hbar);
    const auto traj = evolve(state, sys, drive, FlowGrid{grid.t_max, grid.dt, stride_of(cfg, opt)});

    RowSink sink(opt.out_dir, "entangle", {"t", "variance_u", "variance_v", "lhs", "separable"},
                 opt.format);
    json crossing = nullptr;
    for (std::size_t n = 0; n < traj.t.size(); ++n) {
        const auto rep = duan_check(traj.states[n], scaling);
        sink.row({traj.t[n], rep.variance_u, rep.variance_v, rep.lhs, rep.separable ? 1.0 : 0.0});
        if (rep.separable && crossing.is_null()) {
            crossing = traj.t[n];
        }
    }
    return {{"command", "entangle"},
            {"output", sink.file_name()},
            {"rows", sink.rows()},
            {"t_dent", finite_or_null(dent.t)},
            {"already_separable", dent.already_separable},
            {"A", dent.A},
            {"B", dent.B},
            {"C", dent.C},
            {"diffusion", dent.diffusion},
            {"first_separable_output", crossing},
            {"output_step", grid.dt * static_cast<double>(stride_of(cfg, opt))}};
}

json cmd_uncertainty(const RunConfig& cfg, const CommandOptions& opt)
{
    const auto& grid = require_grid(cfg);
    const auto& sys = cfg.system;
    require_quadratic(sys);
    const double hbar = sys.constants.hbar;
    const double delta = cfg.uncertainty.delta;

    // Without an explicit state, the product of width-delta oscillator
    // ground-state shapes the closed forms assume.
    const bool closed = std::holds_alternative<std::monostate>(cfg.initial);
    GaussianState state;
    if (closed) {
        if (!(sys.omega > 0.0)) {
            throw ConfigError("system.omega: the default uncertainty state needs omega > 0");
        }
        const double m1 = sys.cm_mass(), m2 = sys.rel_mass(), w = sys.omega;
        state = cm_rel_product_state(delta * hbar / (2.0 * m1 * w), hbar * m1 * w / (2.0 * delta),
                                     delta * hbar / (2.0 * m2 * w), hbar * m2 * w / (2.0 * delta), hbar);
    } else {
        state = initial_gaussian(cfg);
    }
    const auto drive = make_drive(cfg, cfg.uncertainty.drive);
    const auto traj = evolve(state, sys, drive, FlowGrid{grid.t_max, grid.dt, stride_of(cfg, opt)});
    const auto rows = uncertainty_product(traj);

    const double gamma = cfg.bath.ohmic_damping();
    const bool have_closed_form = closed && gamma < 2.0 * sys.omega;
    RowSink sink(opt.out_dir, "uncertainty", {"t", "U", "U_lab", "lab_bound", "f_cm", "f_rel", "ratio"},
                 opt.format);
    double worst = 0.0;
    for (const auto& r : rows) {
        double fc = std::numeric_limits<double>::quiet_NaN(), fr = fc, ratio = fc;
        if (have_closed_form) {
            const auto f = closed_form_fcm_frel(sys.omega, gamma, cfg.bath.temperature, delta, r.t,
                                                sys.constants);
            fc = f.f_cm;
            fr = f.f_rel;
            ratio = r.U / (fc * fr);
            worst = std::max(worst, std::abs(ratio - 1.0));
        }
        sink.row({r.t, r.U, r.U_lab, r.lab_bound ? 1.0 : 0.0, fc, fr, ratio});
    }
    return {{"command", "uncertainty"},
            {"output", sink.file_name()},
            {"rows", sink.rows()},
            {"U0", rows.front().U},
            {"closed_form", have_closed_form},
            {"max_relative_deviation", have_closed_form ? json(worst) : json(nullptr)}};
}

json cmd_decohere(const RunConfig& cfg, const CommandOptions& opt)
{
    const auto& grid = require_grid(cfg);
    const auto& sys = cfg.system;
    const auto* sp = std::get_if<SuperpositionSpec>(&cfg.initial);
    if (!sp) {
        throw ConfigError("initial_state: decohere needs a \"superposition\" state");
    }
    const auto& d = cfg.decohere;
    if (d.horizons.empty()) {
        throw ConfigError("decohere.horizons: at least one horizon is required");
    }
    const auto spec = normalized(*sp, sys.constants.hbar);
    double t_max = 0.0;
    for (const double t : d.horizons) {
        t_max = std::max(t_max, t);
    }
    const auto kt = bath_table(cfg, t_max);
    const double omega_free =
        d.coupled_relative ? relative_frequency(sys.mass, sys.omega, sys.kappa) : sys.omega;
    const double w = cm_omega(cfg, make_spectral_density(cfg.bath));
    (void)grid;

    json horizons = json::array();
    for (std::size_t h = 0; h < d.horizons.size(); ++h) {
        const double t = d.horizons[h];
        const auto ef = build_elementary(kt, sys.mass, w, t, omega_free);
        const auto pd = build_propagator(ef, kt);
        const ReducedDensity rho(pd, spec);

        std::vector<LatticeSample> samples;
        const auto& ax = d.axes[0];
        switch (d.lattice) {
        case LatticeKind::Diagonal:
            for (std::size_t k = 0; k < ax.n; ++k) {
                const double x = ax.at(k);
                samples.push_back({Eigen::Vector4d(x, x, x, x), rho(x, x, x, x)});
            }
            break;
        case LatticeKind::Antidiagonal:
            for (std::size_t k = 0; k < ax.n; ++k) {
                const double x = ax.at(k);
                samples.push_back({Eigen::Vector4d(x, x, -x, -x), rho(x, x, -x, -x)});
            }
            break;
        case LatticeKind::Full: samples = sample_density(rho, d.axes); break;
        case LatticeKind::Wigner: samples = sample_wigner(rho, d.axes); break;
        }
        const bool wigner = d.lattice == LatticeKind::Wigner;
        RowSink sink(opt.out_dir, "decohere_" + std::to_string(h),
                     wigner ? std::vector<std::string>{"X1", "X2", "P1", "P2", "re", "im"}
                            : std::vector<std::string>{"x1", "x2", "y1", "y2", "re", "im"},
                     opt.format);
        for (const auto& s : samples) {
            sink.row({s.point(0), s.point(1), s.point(2), s.point(3), s.value.real(), s.value.imag()});
        }

        json coherence = nullptr;
        if (spec.s[0] != cplx{} && spec.s[3] != cplx{}) {
            try {
                coherence = cat_coherence(rho);
            } catch (const NumericalError&) {
            }
        }
        const auto slice = diagonal_slice(rho, ax);
        std::vector<double> xs(ax.n);
        for (std::size_t k = 0; k < ax.n; ++k) {
            xs[k] = ax.at(k);
        }
        const auto vis = fringe_visibility(xs, slice, -0.5 * std::abs(spec.L0), 0.5 * std::abs(spec.L0));
        horizons.push_back({{"t", t},
                            {"output", sink.file_name()},
                            {"b", pd.b},
                            {"a11", pd.a11},
                            {"a12", pd.a12},
                            {"a22", pd.a22},
                            {"trace", lattice_trace(rho, d.axes[0], d.axes[1])},
                            {"coherence", coherence},
                            {"visibility", vis.value},
                            {"visibility_flat", vis.flat}});
    }
    return {{"command", "decohere"}, {"horizons", horizons}};
}

json cmd_oracle(const RunConfig& cfg, const CommandOptions& opt)
{
    const auto& grid = require_grid(cfg);
    const auto& sys = cfg.system;
    if (cfg.bath.kind != BathKind::Ohmic || !(cfg.bath.damping > 0.0)) {
        throw ConfigError("bath.kind: the oracle samples an ohmic bath with positive damping");
    }
    const auto state = initial_gaussian(cfg);
    const auto sd = make_spectral_density(cfg.bath);
    const auto bath = discretize_ohmic(sd, cfg.oracle.modes, cfg.oracle.omega_max);
    const double threshold = opt.threshold.value_or(cfg.oracle.threshold);
    const FlowGrid fg{grid.t_max, grid.dt, stride_of(cfg, opt)};

    const auto kt = tabulate_kernels(bath.spectral_density(), cfg.bath.temperature, grid.t_max, grid.dt,
                                     sys.constants);
    const double w = cm_omega(cfg, bath.spectral_density());
    auto traj = std::make_shared<const CoefficientTrajectory>(
        coefficient_trajectory(kt, sys.mass, w, grid.t_max));
    const auto master = evolve(state, sys, TrajectoryDrive{traj, w}, fg, Ordering::Lab);
    const auto exact = evolve_exact(bath, sys, state, cfg.bath.temperature, fg, cfg.bath.counterterm);
    const auto rep = compare_master_vs_oracle(master, exact.reduced, threshold);

    {
        RowSink sink(opt.out_dir, "oracle", {"t", "cov_error", "mean_error"}, opt.format);
        for (std::size_t n = 0; n < rep.t.size(); ++n) {
            sink.row({rep.t[n], rep.cov_error[n], rep.mean_error[n]});
        }
        RowSink m(opt.out_dir, "master", trajectory_header(), opt.format);
        write_trajectory(m, master);
        RowSink e(opt.out_dir, "exact", trajectory_header(), opt.format);
        write_trajectory(e, exact.reduced);
    }
    const bool pass = rep.max_error <= threshold;
    json summary{{"command", "oracle"},
                 {"max_error", rep.max_error},
                 {"max_mean_error", rep.max_mean_error},
                 {"threshold", threshold},
                 {"pass", pass},
                 {"diagnosis", rep.diagnosis},
                 {"damping_ratio", rep.damping_ratio},
                 {"recurrence_time", bath.recurrence_time()},
                 {"recurrence_warning", exact.recurrence_warning},
                 {"min_robertson_schrodinger", min_rs(exact.reduced)}};
    if (opt.compare && !pass) {
        write_summary(opt.out_dir, summary);
        throw ThresholdExceeded("oracle comparison failed: max relative error "
                                + format_double(rep.max_error) + " exceeds " + format_double(threshold)
                                + " (diagnosis " + rep.diagnosis + ")");
    }
    return summary;
}

const std::vector<std::string>& command_names()
{
    static const std::vector<std::string> names{"coeffs", "evolve", "entangle", "uncertainty", "decohere",
                                                "oracle"};
    return names;
}

namespace {

json diagnostic(const std::exception& e)
{
    json d{{"status", "error"}, {"message", e.what()}};
    if (const auto* q = dynamic_cast<const QuadratureError*>(&e)) {
        d["kind"] = "QuadratureError";
        d["estimate"] = q->estimate();
        d["error_estimate"] = q->error_estimate();
        d["l1_norm"] = q->l1_norm();
    } else if (const auto* h = dynamic_cast<const DegenerateHorizonError*>(&e)) {
        d["kind"] = "DegenerateHorizonError";
        d["horizon"] = h->horizon();
    } else if (const auto* s = dynamic_cast<const SingularCoefficientError*>(&e)) {
        d["kind"] = "SingularCoefficientError";
        d["time"] = s->time();
    } else if (dynamic_cast<const ConfigError*>(&e)) {
        d["kind"] = "ConfigError";
    } else if (dynamic_cast<const UnsupportedError*>(&e)) {
        d["kind"] = "UnsupportedError";
    } else if (dynamic_cast<const DomainError*>(&e)) {
        d["kind"] = "DomainError";
    } else if (dynamic_cast<const RangeError*>(&e)) {
        d["kind"] = "RangeError";
    } else if (dynamic_cast<const ResourceError*>(&e)) {
        d["kind"] = "ResourceError";
    } else if (dynamic_cast<const NumericalError*>(&e)) {
        d["kind"] = "NumericalError";
    } else if (dynamic_cast<const ThresholdExceeded*>(&e)) {
        d["kind"] = "ThresholdExceeded";
    } else {
        d["kind"] = "RuntimeError";
    }
    return d;
}

int fail(const std::exception& e, int code, const CommandOptions& opt, std::ostream& err)
{
    const auto d = diagnostic(e);
    err << "qbm2: " << d["kind"].get<std::string>() << ": " << e.what() << "\n";
    std::error_code ec;
    if (std::filesystem::is_directory(opt.out_dir, ec)) {
        std::ofstream out(opt.out_dir / "error.json");
        out << d.dump(2) << "\n";
    }
    return code;
}

}  // namespace

int run_command(const std::string& name, const std::filesystem::path& config, const CommandOptions& opt,
                std::ostream& err)
{
    try {
        const auto cfg = load_config(config);
        std::filesystem::create_directories(opt.out_dir);
        json summary;
        if (name == "coeffs") {
            summary = cmd_coeffs(cfg, opt);
        } else if (name == "evolve") {
            summary = cmd_evolve(cfg, opt);
        } else if (name == "entangle") {
            summary = cmd_entangle(cfg, opt);
        } else if (name == "uncertainty") {
            summary = cmd_uncertainty(cfg, opt);
        } else if (name == "decohere") {
            summary = cmd_decohere(cfg, opt);
        } else if (name == "oracle") {
            summary = cmd_oracle(cfg, opt);
        } else {
            throw ConfigError("unknown command " + name);
        }
        write_summary(opt.out_dir, summary);
        return kExitOk;
    } catch (const ConfigError& e) {
        return fail(e, kExitConfig, opt, err);
    } catch (const std::exception& e) {
        return fail(e, kExitNumerical, opt, err);
    }
}

}  // namespace qbm2::app
