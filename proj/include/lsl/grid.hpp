#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "lsl/errors.hpp"

namespace lsl {

/// Ordered radial sample points on [0, R], shared by the steady-state,
/// spectral and dynamics layers.  nodes[0] is always 0.
struct RadialGrid {
    enum class Spacing { uniform, geometric };

    std::vector<double> nodes;
    Spacing spacing = Spacing::uniform;

    std::size_t size() const { return nodes.size(); }
    std::size_t cells() const { return nodes.empty() ? 0 : nodes.size() - 1; }
    double radius() const { return nodes.back(); }

    void validate() const {
        if (nodes.size() < 2)
            throw config_error("RadialGrid: need at least 2 nodes");
        if (nodes.front() != 0.0)
            throw config_error("RadialGrid: first node must be 0");
        for (std::size_t i = 1; i < nodes.size(); ++i)
            if (!(nodes[i] > nodes[i - 1]))
                throw config_error("RadialGrid: nodes must be strictly increasing");
    }

    static RadialGrid make_uniform(double radius, std::size_t n_cells) {
        if (!(radius > 0.0) || n_cells < 1)
            throw config_error("RadialGrid::make_uniform: radius > 0 and n_cells >= 1 required");
        RadialGrid g;
        g.spacing = Spacing::uniform;
        g.nodes.resize(n_cells + 1);
        for (std::size_t i = 0; i <= n_cells; ++i)
            g.nodes[i] = radius * static_cast<double>(i) / static_cast<double>(n_cells);
        g.nodes.back() = radius;
        return g;
    }

    // Spacing grows by a constant factor per cell; ratio 1 degenerates to uniform.
    static RadialGrid make_geometric(double radius, std::size_t n_cells, double ratio) {
        if (!(radius > 0.0) || n_cells < 1)
            throw config_error("RadialGrid::make_geometric: radius > 0 and n_cells >= 1 required");
        if (!(ratio > 0.0))
            throw config_error("RadialGrid::make_geometric: ratio must be positive");
        if (std::abs(ratio - 1.0) < 1e-14) return make_uniform(radius, n_cells);
        RadialGrid g;
        g.spacing = Spacing::geometric;
        const double n = static_cast<double>(n_cells);
        const double h0 = radius * (ratio - 1.0) / (std::pow(ratio, n) - 1.0);
        g.nodes.resize(n_cells + 1);
        g.nodes[0] = 0.0;
        double h = h0;
        for (std::size_t i = 1; i <= n_cells; ++i) {
            g.nodes[i] = g.nodes[i - 1] + h;
            h *= ratio;
        }
        g.nodes.back() = radius;
        return g;
    }
};

}  // namespace lsl
