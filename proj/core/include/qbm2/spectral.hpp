#pragma once

#include <variant>
#include <vector>

namespace qbm2 {

// I(w) = mass_scale * damping * w * exp(-w^2 / cutoff^2)
struct OhmicGaussianCutoff {
    double mass_scale = 1.0;
    double damping = 0.0;
    double cutoff = 1.0;
};

struct BathMode {
    double mass = 1.0;
    double frequency = 1.0;
    double coupling = 0.0;
};

struct DiscreteModes {
    std::vector<BathMode> modes;
};

enum class SpectralKind { OhmicGaussianCutoff, Discrete };

// Which density a point evaluation returns: the per-oscillator I(w) or the
// centre-of-mass density 4 I(w) seen through the doubled coupling.
enum class DensityForm { PerOscillator, CentreOfMass };

class SpectralDensity {
public:
    // Throws ConfigError unless damping > 0 and cutoff > 0.
    static SpectralDensity ohmic(double mass_scale, double damping, double cutoff);
    // Throws ConfigError unless every mass and frequency is positive.
    static SpectralDensity discrete(std::vector<BathMode> modes);

    SpectralKind kind() const noexcept;
    const OhmicGaussianCutoff& ohmic_params() const;
    const std::vector<BathMode>& modes() const;

    // Copy with every coupling scaled by `factor` (kernels scale by factor^2).
    SpectralDensity scaled_coupling(double factor) const;

private:
    explicit SpectralDensity(std::variant<OhmicGaussianCutoff, DiscreteModes> form);
    std::variant<OhmicGaussianCutoff, DiscreteModes> form_;
};

// Point evaluation; rejected with UnsupportedError for a discrete (delta comb)
// density. Requires omega >= 0.
double spectral_density(const SpectralDensity& sd, double omega,
                        DensityForm form = DensityForm::PerOscillator);

// Weight C^2/(2 m w) * kModeWeight carried by one discrete mode.
double mode_weight(const BathMode& mode);

}  // namespace qbm2
