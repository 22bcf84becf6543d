#include "kyle/params.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <sstream>

#include "kyle/errors.hpp"

namespace kyle {

namespace {

void require(bool ok, const char* field, const char* what) {
    if (!ok) throw DomainError(field, what);
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& text) {
    std::size_t used = 0;
    double out = 0.0;
    try {
        out = std::stod(text, &used);
    } catch (const std::exception&) {
        throw DomainError(key, "not a number: '" + text + "'");
    }
    if (used != text.size()) throw DomainError(key, "trailing characters in '" + text + "'");
    return out;
}

std::uint64_t parse_count(const std::string& key, const std::string& text) {
    std::uint64_t out = 0;
    const auto* end = text.data() + text.size();
    const auto res = std::from_chars(text.data(), end, out);
    if (res.ec != std::errc() || res.ptr != end) throw DomainError(key, "not an unsigned integer: '" + text + "'");
    return out;
}

}  // namespace

ValidatedParams validate(const ModelParams& p) {
    require(std::isfinite(p.sigma) && p.sigma > 0.0, "sigma", "must be > 0");
    require(std::isfinite(p.horizon) && p.horizon > 0.0, "horizon", "must be > 0");
    require(std::isfinite(p.sigma_xi) && p.sigma_xi > 0.0, "sigma_xi", "must be > 0");
    require(std::isfinite(p.sigma_beta) && p.sigma_beta >= 0.0, "sigma_beta", "must be >= 0");
    require(std::isfinite(p.eps) && p.eps >= 0.0, "eps", "must be >= 0");
    require(std::isfinite(p.gamma) && p.gamma >= 0.0, "gamma", "must be >= 0");
    require(std::isfinite(p.m_xi), "m_xi", "must be finite");
    require(std::isfinite(p.m_beta), "m_beta", "must be finite");

    ValidatedParams out;
    out.raw = p;
    out.eg = p.eps * p.gamma;
    out.var_z_t = p.sigma * p.sigma * p.horizon + p.sigma_beta * p.sigma_beta;
    out.sigma_e = std::sqrt(p.sigma_xi * p.sigma_xi + out.eg * out.eg * out.var_z_t);
    require(std::isfinite(out.sigma_e) && out.sigma_e >= p.sigma_xi, "sigma_e", "overflow");
    out.vec.u = {out.eg * out.var_z_t, p.sigma_xi * p.sigma_xi};
    out.vec.w = {out.eg, 1.0};
    out.vec.v = {1.0, -out.eg};
    return out;
}

void validate(const RunConfig& c) {
    require(c.n_paths >= 1, "n_paths", "must be >= 1");
    require(c.n_steps >= 2, "n_steps", "must be >= 2");
    require(c.grid_refinement >= 0 && c.grid_refinement <= 60, "grid_refinement", "must be in [0, 60]");
    require(c.t_stop_fraction > 0.0 && c.t_stop_fraction <= 1.0, "t_stop_fraction", "must be in (0, 1]");
}

void apply_setting(const std::string& key, const std::string& value, ModelParams& p, RunConfig& c) {
    if (key == "sigma") p.sigma = parse_double(key, value);
    else if (key == "horizon") p.horizon = parse_double(key, value);
    else if (key == "sigma_xi") p.sigma_xi = parse_double(key, value);
    else if (key == "sigma_beta") p.sigma_beta = parse_double(key, value);
    else if (key == "eps") p.eps = parse_double(key, value);
    else if (key == "gamma") p.gamma = parse_double(key, value);
    else if (key == "m_xi") p.m_xi = parse_double(key, value);
    else if (key == "m_beta") p.m_beta = parse_double(key, value);
    else if (key == "n_paths") c.n_paths = parse_count(key, value);
    else if (key == "n_steps") c.n_steps = parse_count(key, value);
    else if (key == "grid_refinement") c.grid_refinement = static_cast<int>(parse_count(key, value));
    else if (key == "seed") c.seed = parse_count(key, value);
    else if (key == "t_stop_fraction") c.t_stop_fraction = parse_double(key, value);
    else throw DomainError(key, "unknown config key");
}

void load_config(std::istream& in, ModelParams& p, RunConfig& c) {
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw DomainError("config", "line " + std::to_string(lineno) + " has no '='");
        }
        apply_setting(trim(line.substr(0, eq)), trim(line.substr(eq + 1)), p, c);
    }
}

void load_config_file(const std::string& path, ModelParams& p, RunConfig& c) {
    std::ifstream in(path);
    if (!in) throw DomainError("config", "cannot open " + path);
    load_config(in, p, c);
}

}  // namespace kyle
