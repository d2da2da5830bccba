#pragma once

#include <charconv>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "lsl/dynamics.hpp"
#include "lsl/errors.hpp"
#include "lsl/scaling.hpp"
#include "lsl/spectral.hpp"
#include "lsl/steady_state.hpp"

namespace lsl {

/// Shortest decimal representation that round-trips the double exactly.
inline std::string format_full(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

inline std::string format_optional(const std::optional<double>& v) {
    return v.has_value() ? format_full(*v) : std::string();
}

inline double parse_double(const std::string& tok) {
    double v = 0.0;
    const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (res.ec != std::errc())
        throw config_error("parse_double: bad numeric token '" + tok + "'");
    return v;
}

namespace detail {

inline std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw config_error("cannot open output file: " + path);
    return out;
}

inline std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string tok;
    std::stringstream ss(line);
    while (std::getline(ss, tok, ',')) out.push_back(tok);
    return out;
}

}  // namespace detail

/// Profile CSV: `# gamma=`, `# kappa=`, `# R=` comment lines, then
/// `y,rho,mass` rows at full round-trip precision.
inline void write_profile_csv(const std::string& path, const StarProfile& p,
                              const std::vector<std::string>& extra_comments = {}) {
    auto out = detail::open_out(path);
    out << "# gamma=" << format_full(p.gamma) << "\n";
    out << "# kappa=" << format_full(p.kappa) << "\n";
    out << "# R=" << format_full(p.radius) << "\n";
    for (const auto& line : extra_comments) out << "# " << line << "\n";
    out << "y,rho,mass\n";
    for (std::size_t i = 0; i < p.grid.size(); ++i)
        out << format_full(p.grid.nodes[i]) << ',' << format_full(p.rho[i]) << ','
            << format_full(p.mass[i]) << "\n";
}

inline void write_gaseous_csv(const std::string& path, const GaseousReference& g,
                              const std::vector<std::string>& extra_comments = {}) {
    auto out = detail::open_out(path);
    out << "# gamma=" << format_full(g.gamma) << "\n";
    out << "# rho_floor=" << format_full(g.rho_floor) << "\n";
    out << "# R=" << format_full(g.radius) << "\n";
    for (const auto& line : extra_comments) out << "# " << line << "\n";
    out << "y,rho,mass\n";
    for (std::size_t i = 0; i < g.grid.size(); ++i)
        out << format_full(g.grid.nodes[i]) << ',' << format_full(g.rho[i]) << ','
            << format_full(g.mass[i]) << "\n";
}

inline StarProfile read_profile_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw config_error("cannot open profile file: " + path);
    StarProfile p;
    std::string line;
    bool saw_header = false;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            const auto eq = line.find('=');
            if (eq == std::string::npos) continue;
            const std::string key = line.substr(2, eq - 2);
            const std::string val = line.substr(eq + 1);
            if (key == "gamma") p.gamma = parse_double(val);
            if (key == "kappa") p.kappa = parse_double(val);
            if (key == "R") p.radius = parse_double(val);
            continue;
        }
        if (!saw_header) {  // column header row
            if (line.rfind("y,", 0) != 0)
                throw config_error("read_profile_csv: missing y,rho,mass header in " + path);
            saw_header = true;
            continue;
        }
        const auto toks = detail::split_csv(line);
        if (toks.size() != 3)
            throw config_error("read_profile_csv: malformed row in " + path);
        p.grid.nodes.push_back(parse_double(toks[0]));
        p.rho.push_back(parse_double(toks[1]));
        p.mass.push_back(parse_double(toks[2]));
    }
    if (p.grid.nodes.size() < 2)
        throw config_error("read_profile_csv: no data rows in " + path);
    p.validate();
    return p;
}

/// Mode CSV: `# mu_star=`, `# growth_rate=`, `# residual=` then `y,chi`.
inline void write_mode_csv(const std::string& path, const RadialGrid& grid, const ModeResult& m,
                           const std::vector<std::string>& extra_comments = {}) {
    auto out = detail::open_out(path);
    out << "# mu_star=" << format_full(m.mu_star) << "\n";
    out << "# growth_rate=" << format_optional(m.growth_rate) << "\n";
    out << "# residual=" << format_full(m.residual) << "\n";
    for (const auto& line : extra_comments) out << "# " << line << "\n";
    out << "y,chi\n";
    for (std::size_t i = 0; i < grid.size(); ++i)
        out << format_full(grid.nodes[i]) << ',' << format_full(m.chi[i]) << "\n";
}

/// Sweep CSV: kappa,R,mu_star,mu0,C1,q_const,form_L11,weight_11,status.
inline void write_sweep_csv(const std::string& path, const std::vector<ScalingRecord>& records,
                            const std::vector<std::string>& extra_comments = {}) {
    auto out = detail::open_out(path);
    for (const auto& line : extra_comments) out << "# " << line << "\n";
    out << "kappa,R,mu_star,mu0,C1,q_const,form_L11,weight_11,status\n";
    for (const auto& r : records)
        out << format_full(r.kappa) << ',' << format_full(r.R) << ',' << format_full(r.mu_star)
            << ',' << format_optional(r.mu0) << ',' << format_full(r.C1) << ','
            << format_full(r.q_const) << ',' << format_full(r.form_L11) << ','
            << format_full(r.weight_11) << ',' << r.status << "\n";
}

/// Diagnostics CSV: t,norm,energy,boundary_radius,max_jacobian_dev.
inline void write_diagnostics_csv(const std::string& path, const Diagnostics& d,
                                  const std::vector<std::string>& extra_comments = {}) {
    auto out = detail::open_out(path);
    for (const auto& line : extra_comments) out << "# " << line << "\n";
    out << "# status=" << d.status << "\n";
    out << "t,norm,energy,boundary_radius,max_jacobian_dev\n";
    for (std::size_t i = 0; i < d.time.size(); ++i)
        out << format_full(d.time[i]) << ',' << format_full(d.norm[i]) << ','
            << format_full(d.energy[i]) << ',' << format_full(d.boundary_radius[i]) << ','
            << format_full(d.max_jacobian_dev[i]) << "\n";
}

/// Final Lagrangian state CSV: y,eta,vel.
inline void write_state_csv(const std::string& path, const LagrangianState& s,
                            const std::vector<std::string>& extra_comments = {}) {
    auto out = detail::open_out(path);
    for (const auto& line : extra_comments) out << "# " << line << "\n";
    out << "# t=" << format_full(s.time) << "\n";
    out << "y,eta,vel\n";
    for (std::size_t i = 0; i < s.y.size(); ++i)
        out << format_full(s.y[i]) << ',' << format_full(s.eta[i]) << ','
            << format_full(s.vel[i]) << "\n";
}

inline nlohmann::json verdict_to_json(const RegimeVerdict& v) {
    nlohmann::json j;
    j["gamma"] = v.gamma;
    j["case_id"] = v.case_id;
    j["slopes"] = v.slopes;
    j["residuals"] = v.residuals;
    j["checks"] = v.checks;
    j["pass"] = v.pass;
    return j;
}

inline nlohmann::json mode_to_json(const StarProfile& p, const ModeResult& m) {
    nlohmann::json j;
    j["gamma"] = p.gamma;
    j["kappa"] = p.kappa;
    j["R"] = p.radius;
    j["n_cells"] = p.grid.cells();
    j["mu_star"] = m.mu_star;
    j["unstable"] = m.mu0.has_value();
    if (m.mu0) j["mu0"] = *m.mu0;
    if (m.growth_rate) j["growth_rate"] = *m.growth_rate;
    j["residual"] = m.residual;
    j["interior_sign_changes"] = m.interior_sign_changes;
    j["bracket"] = {m.bracket_lo, m.bracket_hi};
    return j;
}

inline void write_json(const std::string& path, const nlohmann::json& j) {
    auto out = detail::open_out(path);
    out << j.dump(2) << "\n";
}

}  // namespace lsl
