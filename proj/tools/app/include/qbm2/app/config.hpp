#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "qbm2/analysis.hpp"
#include "qbm2/dynamics.hpp"
#include "qbm2/gaussian_state.hpp"
#include "qbm2/propagator.hpp"
#include "qbm2/spectral.hpp"

namespace qbm2::app {

inline constexpr int kConfigVersion = 1;

enum class BathKind { Ohmic, Discrete, None };

struct BathSection {
    BathKind kind = BathKind::None;
    double mass_scale = 0.0;  // ohmic; defaults to the centre-of-mass mass 2M
    double damping = 0.0;
    double cutoff = 0.0;
    std::vector<BathMode> modes;  // discrete
    double temperature = 0.0;
    // Add the bath counterterm so Omega stays the late-time frequency.
    bool counterterm = false;

    // Damping of the ohmic density, zero for the other kinds.
    double ohmic_damping() const noexcept { return kind == BathKind::Ohmic ? damping : 0.0; }
};

struct GridSection {
    double t_max = 0.0;
    double dt = 0.0;
    std::size_t output_stride = 1;
};

using InitialState = std::variant<std::monostate, GaussianState, Widths, SuperpositionSpec>;

enum class DriveKind { Exact, Markov, WeakDamping };

struct EvolveOptions {
    DriveKind drive = DriveKind::Exact;
    std::optional<double> omega_renormalized;
    Ordering output = Ordering::CmRel;
};

struct OracleOptions {
    std::size_t modes = 400;
    double omega_max = 80.0;
    double threshold = 2e-2;
};

enum class LatticeKind { Diagonal, Antidiagonal, Full, Wigner };

struct DecohereOptions {
    std::vector<double> horizons;
    LatticeKind lattice = LatticeKind::Diagonal;
    std::array<LatticeAxis, 4> axes{};
    // Use sqrt(Omega^2 + 2 kappa / M2) for the relative motion instead of Omega.
    bool coupled_relative = false;
};

struct UncertaintyOptions {
    DriveKind drive = DriveKind::WeakDamping;
    // Width parameter of the initial product state (1 is coherent).
    double delta = 1.0;
};

struct RunConfig {
    int version = kConfigVersion;
    SystemConfig system;
    BathSection bath;
    GridSection grid;
    InitialState initial;
    EvolveOptions evolve;
    OracleOptions oracle;
    DecohereOptions decohere;
    UncertaintyOptions uncertainty;
};

// Throws ConfigError naming the offending field ("bath.damping: ...").
// Unknown keys and version mismatches are errors.
RunConfig parse_config(const nlohmann::json& j);
RunConfig load_config(const std::filesystem::path& path);

// Canonical form; parse_config(to_json(c)) reproduces c exactly.
nlohmann::json to_json(const RunConfig& cfg);

SpectralDensity make_spectral_density(const BathSection& bath);

}  // namespace qbm2::app
