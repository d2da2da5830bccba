// Solve a liquid equilibrium and print a few profile samples together with
// the hydrostatic-balance residual.

#include <cstdio>

#include "lsl/steady_state.hpp"

int main() {
    const double gamma = 1.2;
    const double kappa = 50.0;
    const lsl::StarProfile star = lsl::solve_liquid_star(gamma, kappa, 512);

    std::printf("gamma=%.3f kappa=%.1f  ->  R=%.8f, total mass=%.8f\n", gamma, kappa,
                star.radius, star.total_mass());
    std::printf("%10s %14s %14s\n", "y", "rho", "m(y)");
    for (std::size_t i = 0; i < star.grid.size(); i += star.grid.size() / 8)
        std::printf("%10.6f %14.8f %14.8f\n", star.grid.nodes[i], star.rho[i], star.mass[i]);
    std::printf("boundary pressure-drop margin: %.6f\n", lsl::taylor_sign_margin(star));
    std::printf("max hydrostatic residual (centered diff): %.3e\n",
                lsl::max_steady_residual(star));
    return 0;
}
