#include "qbm2/errors.hpp"

namespace qbm2 {

QuadratureError::QuadratureError(const std::string& what, double estimate, double error_estimate,
                                 double l1_norm)
    : NumericalError(what + " (estimate " + std::to_string(estimate) + ", error estimate "
                     + std::to_string(error_estimate) + ", L1 " + std::to_string(l1_norm) + ")")
    , estimate_(estimate)
    , error_estimate_(error_estimate)
    , l1_norm_(l1_norm)
{
}

DegenerateHorizonError::DegenerateHorizonError(const std::string& what, double horizon)
    : NumericalError(what + " at horizon t = " + std::to_string(horizon))
    , horizon_(horizon)
{
}

SingularCoefficientError::SingularCoefficientError(const std::string& what, double time)
    : NumericalError(what + " at t = " + std::to_string(time))
    , time_(time)
{
}

}  // namespace qbm2
