#pragma once

#include <cmath>

#include "lsl/errors.hpp"

namespace lsl {

/// Polytropic equation of state P(rho) = rho^gamma - 1, normalized so the
/// liquid boundary density is 1 (pressure vanishes there).
struct EquationOfState {
    double gamma = 1.0;

    explicit EquationOfState(double g) : gamma(g) {
        if (!(g >= 1.0 && g <= 2.0))
            throw config_error("EquationOfState: gamma must lie in [1, 2]");
    }

    bool isothermal() const { return gamma == 1.0; }

    double pressure(double rho) const {
        return isothermal() ? rho - 1.0 : std::pow(rho, gamma) - 1.0;
    }

    double rho_pow_gamma(double rho) const { return isothermal() ? rho : std::pow(rho, gamma); }

    // c_s^2 = dP/drho = gamma rho^{gamma-1}; exactly 1 for gamma = 1 so the
    // isothermal branch never evaluates rho^0.
    double sound_speed_sq(double rho) const {
        return isothermal() ? 1.0 : gamma * std::pow(rho, gamma - 1.0);
    }

    double sound_speed(double rho) const { return std::sqrt(sound_speed_sq(rho)); }

    // Specific internal energy, the antiderivative of P/rho^2.
    double internal_energy(double rho) const {
        if (isothermal()) return std::log(rho) + 1.0 / rho;
        return std::pow(rho, gamma - 1.0) / (gamma - 1.0) + 1.0 / rho;
    }
};

}  // namespace lsl
