#include "qbm2/spectral.hpp"

#include <cmath>
#include <string>

#include "qbm2/constants.hpp"
#include "qbm2/errors.hpp"

namespace qbm2 {

SpectralDensity::SpectralDensity(std::variant<OhmicGaussianCutoff, DiscreteModes> form)
    : form_(std::move(form))
{
}

SpectralDensity SpectralDensity::ohmic(double mass_scale, double damping, double cutoff)
{
    if (!(mass_scale > 0.0) || !std::isfinite(mass_scale)) {
        throw ConfigError("ohmic spectral density: mass_scale must be positive");
    }
    if (!(damping > 0.0) || !std::isfinite(damping)) {
        throw ConfigError("ohmic spectral density: damping must be positive");
    }
    if (!(cutoff > 0.0) || !std::isfinite(cutoff)) {
        throw ConfigError("ohmic spectral density: cutoff must be positive");
    }
    return SpectralDensity(OhmicGaussianCutoff{mass_scale, damping, cutoff});
}

SpectralDensity SpectralDensity::discrete(std::vector<BathMode> modes)
{
    for (std::size_t n = 0; n < modes.size(); ++n) {
        const auto& m = modes[n];
        if (!(m.mass > 0.0) || !(m.frequency > 0.0) || !std::isfinite(m.coupling)) {
            throw ConfigError("discrete spectral density: mode " + std::to_string(n)
                              + " needs positive mass and frequency and a finite coupling");
        }
    }
    return SpectralDensity(DiscreteModes{std::move(modes)});
}

SpectralKind SpectralDensity::kind() const noexcept
{
    return std::holds_alternative<OhmicGaussianCutoff>(form_) ? SpectralKind::OhmicGaussianCutoff
                                                              : SpectralKind::Discrete;
}

const OhmicGaussianCutoff& SpectralDensity::ohmic_params() const
{
    if (const auto* p = std::get_if<OhmicGaussianCutoff>(&form_)) {
        return *p;
    }
    throw UnsupportedError("spectral density is not ohmic");
}

const std::vector<BathMode>& SpectralDensity::modes() const
{
    if (const auto* p = std::get_if<DiscreteModes>(&form_)) {
        return p->modes;
    }
    throw UnsupportedError("spectral density has no discrete modes");
}

SpectralDensity SpectralDensity::scaled_coupling(double factor) const
{
    if (const auto* p = std::get_if<OhmicGaussianCutoff>(&form_)) {
        auto q = *p;
        q.damping *= factor * factor;
        return SpectralDensity(q);
    }
    auto modes = std::get<DiscreteModes>(form_).modes;
    for (auto& m : modes) {
        m.coupling *= factor;
    }
    return SpectralDensity(DiscreteModes{std::move(modes)});
}

double spectral_density(const SpectralDensity& sd, double omega, DensityForm form)
{
    if (!(omega >= 0.0)) {
        throw ConfigError("spectral density evaluated at negative frequency");
    }
    if (sd.kind() == SpectralKind::Discrete) {
        throw UnsupportedError("point evaluation of a discrete (delta comb) spectral density");
    }
    const auto& p = sd.ohmic_params();
    const double x = omega / p.cutoff;
    const double base = p.mass_scale * p.damping * omega * std::exp(-x * x);
    return form == DensityForm::CentreOfMass ? 4.0 * base : base;
}

double mode_weight(const BathMode& mode)
{
    return kModeWeight * mode.coupling * mode.coupling / (2.0 * mode.mass * mode.frequency);
}

}  // namespace qbm2
