#include "kyle/validation.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>

#include "json.hpp"
#include "kyle/errors.hpp"
#include "kyle/pricing.hpp"
#include "kyle/rng.hpp"
#include "kyle/stats.hpp"
#include "kyle/transport.hpp"

namespace kyle {

namespace {

constexpr std::size_t kMinRefinementPaths = 1000;
constexpr std::size_t kMinCrossSectionPaths = 10000;
constexpr std::size_t kMinTerminalLawPaths = 100000;
constexpr double kMinEss = 100.0;

// Stream ids for draws that are not simulation paths; far above any path index.
constexpr std::uint64_t kStreamPde = 0xFFFF'0000'0000'0001ull;
constexpr std::uint64_t kStreamOt = 0xFFFF'0000'0000'0002ull;
constexpr std::uint64_t kStreamUtility = 0xFFFF'0000'0000'0010ull;

void require_paths(std::size_t have, std::size_t need, const char* what) {
    if (have < need) {
        throw InsufficientPaths(std::string(what) + ": need " + std::to_string(need) + " paths, have " +
                                std::to_string(have));
    }
}

std::string fmt(double x) {
    std::ostringstream os;
    os << x;
    return os.str();
}

double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double tol) {
    std::function<double(double, double, double, double, double, double, double, int)> rec =
        [&](double lo, double hi, double flo, double fmid, double fhi, double whole, double eps, int depth) {
            const double mid = 0.5 * (lo + hi);
            const double lm = 0.5 * (lo + mid);
            const double rm = 0.5 * (mid + hi);
            const double flm = f(lm);
            const double frm = f(rm);
            const double left = (mid - lo) / 6.0 * (flo + 4.0 * flm + fmid);
            const double right = (hi - mid) / 6.0 * (fmid + 4.0 * frm + fhi);
            const double diff = left + right - whole;
            if (depth <= 0 || std::abs(diff) <= 15.0 * eps) return left + right + diff / 15.0;
            return rec(lo, mid, flo, flm, fmid, left, 0.5 * eps, depth - 1) +
                   rec(mid, hi, fmid, frm, fhi, right, 0.5 * eps, depth - 1);
        };
    const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
    return rec(a, b, fa, fm, fb, (b - a) / 6.0 * (fa + 4.0 * fm + fb), tol, 50);
}

}  // namespace

bool evaluate(CheckResult& c) {
    const double band = std::max(c.tolerance, 3.0 * c.std_error);
    switch (c.kind) {
        case CheckKind::kWithin:
            c.passed = std::abs(c.estimate - c.target) <= band;
            break;
        case CheckKind::kAtMost:
            c.passed = band > 0.0 ? c.estimate - c.target <= band : c.estimate < c.target;
            break;
        case CheckKind::kAtLeast:
            c.passed = band > 0.0 ? c.target - c.estimate <= band : c.estimate > c.target;
            break;
    }
    return c.passed;
}

CheckResult make_check(std::string group, std::string name, double estimate, double target, double std_error,
                       double tolerance, std::uint64_t n_samples, CheckKind kind) {
    CheckResult c;
    c.group = std::move(group);
    c.name = std::move(name);
    c.estimate = estimate;
    c.target = target;
    c.std_error = std_error;
    c.tolerance = tolerance;
    c.n_samples = n_samples;
    c.kind = kind;
    evaluate(c);
    return c;
}

bool ValidationReport::ok() const {
    if (checks.empty()) return false;
    return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed != c.control; });
}

// ---------------------------------------------------------------------------
// deterministic checks

std::vector<CheckResult> check_calibration_closed_forms() {
    std::vector<CheckResult> out;
    const std::string g = "calibration";

    // eps = 0: bisection against the closed form
    const ModelParams eps0_sets[] = {
        {1.0, 1.0, 1.0, 0.0, 0.0, 1.0, 0.0, 0.0},
        {2.0, 0.5, 1.5, 0.3, 0.0, 0.7, 0.2, -0.1},
        {0.8, 3.0, 0.6, 1.0, 0.0, 2.0, 0.0, 0.0},
    };
    int idx = 0;
    for (const auto& p : eps0_sets) {
        const auto vp = validate(p);
        const double v_closed = solve_v(vp).v;
        const double v_bisect = vp.sigma_e / bisect_lambda(vp);
        out.push_back(make_check(g, "eps0_bisection_vs_closed_form[" + std::to_string(idx++) + "]",
                                 std::abs(v_bisect - v_closed) / v_closed, 0.0, 0.0, 1e-10, 1));
    }
    {
        const auto vp = validate({1.0, 1.0, 1.0, 0.0, 0.0, 1.0, 0.0, 0.0});
        out.push_back(make_check(g, "eps0_golden_ratio", solve_v(vp).v, 0.5 * (1.0 + std::sqrt(5.0)), 0.0,
                                 1e-12, 1));
    }
    {
        const auto vp = validate({2.0, 1.0, 3.0, 0.5, 0.1, 0.0, 0.0, 0.0});
        const auto c = solve_v(vp);
        out.push_back(make_check(g, "gamma0_v_equals_sigma_sqrtT", c.v, 2.0, 0.0, 0.0, 1));
        out.push_back(make_check(g, "gamma0_lambda", c.lambda_T, 1.5, 0.0, 1e-15, 1));
    }
    {
        // default set: roundtrip residual and the admissible band for v eps gamma / sigma_e
        const auto vp = validate(ModelParams{});
        const auto c = solve_v(vp);
        out.push_back(make_check(g, "roundtrip_residual", objective_F(c.lambda_T, vp), 0.0, 0.0, 1e-10, 1));
        const double ratio = c.v * vp.eg / vp.sigma_e;
        out.push_back(make_check(g, "band_upper", ratio, 1.0, 0.0, 0.0, 1, CheckKind::kAtMost));
        out.push_back(make_check(g, "band_lower", ratio, v_band_lower(vp), 0.0, 0.0, 1, CheckKind::kAtLeast));
    }
    return out;
}

std::vector<CheckResult> check_k2_identity(const Coefficients& co) {
    const std::string g = "k2_identity";
    const double T = co.horizon();
    const double s = co.params().raw.sigma;
    const double target = co.calibration().v * co.calibration().v / (s * s * T);
    const double quad = adaptive_simpson([&](double t) { return co.k(t) * co.k(t); }, 0.0, T, 1e-13);
    return {make_check(g, "closed_form", co.int_k_squared(T) / T, target, 0.0, 1e-9, 1),
            make_check(g, "quadrature", quad / T, target, 0.0, 1e-9, 1)};
}

std::vector<CheckResult> check_sigma_degeneracy(const Coefficients& co) {
    const std::string g = "sigma_degeneracy";
    const auto& vp = co.params();
    const auto& p = vp.raw;
    const double T = co.horizon();
    const double scale = vp.var_z_t * p.sigma_xi * p.sigma_xi / (vp.sigma_e * vp.sigma_e);
    const Mat2 expected = scale * outer(vp.vec.v, vp.vec.v);
    std::vector<CheckResult> out;
    out.push_back(make_check(g, "sigma_T_rank_one", max_abs(co.sigma(T) - expected), 0.0, 0.0, 1e-10, 1));

    const double t = T * (1.0 - 1e-6);
    const Vec2 w = vp.vec.w;
    const double v = co.calibration().v;
    const double lhs = dot(w, co.sigma_inv(t) * w) * (T - t);
    const double w2 = dot(w, w);
    const double rhs = w2 * w2 / (p.sigma * p.sigma * (vp.sigma_e * vp.sigma_e / (v * v) - vp.eg * vp.eg));
    out.push_back(make_check(g, "inverse_asymptotics", lhs, rhs, 0.0, 0.01 * std::abs(rhs), 1));
    return out;
}

std::vector<CheckResult> check_pde(const Coefficients& co, std::uint64_t seed, int n_points) {
    const double T = co.horizon();
    const double h = 1e-4 * std::max(1.0, T);
    PathRng rng(seed, kStreamPde);
    double worst = 0.0;
    for (int i = 0; i < n_points; ++i) {
        const double t = T * (0.01 + 0.98 * rng.uniform());
        const double chi = -3.0 + 6.0 * rng.uniform();
        worst = std::max(worst, std::abs(pde_residual(t, chi, co, h)));
    }
    return {make_check("pde", "max_abs_residual", worst, 0.0, 0.0, 1e-6, static_cast<std::uint64_t>(n_points))};
}

std::vector<CheckResult> check_ot_duality(const ValidatedParams& vp, const Calibration& c, std::uint64_t seed,
                                          std::size_t n_triples, std::size_t n_push) {
    const std::string g = "ot_duality";
    const auto zl = source_z(vp);
    const auto xl = source_xi(vp);
    PathRng rng(seed, kStreamOt);
    double min_slack = std::numeric_limits<double>::infinity();
    double max_gap = 0.0;
    for (std::size_t i = 0; i < n_triples; ++i) {
        const double z = zl.mean + std::sqrt(zl.var) * rng.normal();
        const double xi = xl.mean + std::sqrt(xl.var) * rng.normal();
        const double chi = c.m + 2.0 * c.v * rng.normal();
        const double gc = gamma_c(z, xi, c, vp);
        min_slack = std::min(min_slack, gamma_potential(chi, c, vp) + gc - surplus(chi - z, xi, vp));
        const double at = ot_map(z, xi, c, vp);
        max_gap = std::max(max_gap, std::abs(gamma_potential(at, c, vp) + gc - surplus(at - z, xi, vp)));
    }
    std::vector<double> img(n_push);
    for (std::size_t i = 0; i < n_push; ++i) {
        const double z = zl.mean + std::sqrt(zl.var) * rng.normal();
        const double xi = xl.mean + std::sqrt(xl.var) * rng.normal();
        img[i] = ot_map(z, xi, c, vp);
    }
    const auto m = stats::mean(img);
    const auto var = stats::covariance(img, img);
    const auto tl = target_law(c);
    const auto nt = static_cast<std::uint64_t>(n_triples);
    const auto np = static_cast<std::uint64_t>(n_push);
    return {make_check(g, "min_slack", min_slack, -1e-12, 0.0, 0.0, nt, CheckKind::kAtLeast),
            make_check(g, "equality_gap_at_map", max_gap, 1e-10, 0.0, 0.0, nt, CheckKind::kAtMost),
            make_check(g, "pushforward_mean", m.value, tl.mean, m.std_error, 0.0, np),
            make_check(g, "pushforward_var", var.value, tl.var, var.std_error, 0.0, np)};
}

std::vector<CheckResult> check_limits(const ModelParams& base) {
    const std::string g = "limits";
    const double sweep[] = {0.5, 0.25, 0.1, 0.01, 0.001};
    auto lambda_at = [&](double eps, double gamma) {
        ModelParams p = base;
        p.eps = eps;
        p.gamma = gamma;
        return solve_v(validate(p)).lambda_T;
    };
    std::vector<CheckResult> out;
    auto add_sweep = [&](const std::string& tag, double limit, const std::function<double(double)>& lam,
                         double at_zero) {
        const double l_small = lam(sweep[4]);
        const double l_next = lam(sweep[3]);
        out.push_back(make_check(g, tag + ".monotone_tail", l_small - l_next, 0.0, 0.0, 0.0, 2,
                                 CheckKind::kAtLeast));
        out.push_back(make_check(g, tag + ".below_limit", limit - l_small, 0.0, 0.0, 0.0, 1, CheckKind::kAtLeast));
        out.push_back(make_check(g, tag + ".relative_gap", std::abs(l_small - limit) / limit, 0.01, 0.0, 0.0, 1,
                                 CheckKind::kAtMost));
        out.push_back(make_check(g, tag + ".at_zero", at_zero, limit, 0.0, 1e-14 * limit, 1));
    };
    const double gamma_limit = base.sigma_xi / (base.sigma * std::sqrt(base.horizon));
    add_sweep("gamma", gamma_limit, [&](double x) { return lambda_at(base.eps, x); }, lambda_at(base.eps, 0.0));

    ModelParams p0 = base;
    p0.eps = 0.0;
    const double xi_star = solve_v(validate(p0)).v;
    add_sweep("eps", base.sigma_xi / xi_star, [&](double x) { return lambda_at(x, base.gamma); },
              lambda_at(0.0, base.gamma));
    return out;
}

// ---------------------------------------------------------------------------
// Monte Carlo checks

std::vector<CheckResult> check_terminal_price(const Ensemble& coarse, const Ensemble& fine,
                                              const ValidatedParams& vp, const Calibration& c) {
    require_paths(std::min(coarse.n_paths, fine.n_paths), kMinRefinementPaths, "check_terminal_price");
    const std::string g = "terminal_price";
    const double ge = vp.eg;
    auto gaps = [&](const Ensemble& e) {
        std::vector<double> out(e.n_paths);
        for (std::size_t i = 0; i < e.n_paths; ++i) {
            out[i] = e.terminal.price[i] - (e.xi[i] - ge * (e.terminal.x[i] + e.beta[i]));
        }
        return stats::median_abs(std::move(out));
    };
    const double gc = gaps(coarse);
    const double gf = gaps(fine);

    // analytic-terminal mode: chi_T from the transport map, then the price rule at T
    const Coefficients co(vp, c);
    const double T = co.horizon();
    double worst = 0.0;
    for (std::size_t i = 0; i < fine.n_paths; ++i) {
        const double z = fine.terminal.s1[i];
        const double xi = fine.xi[i];
        const double chi_T = ot_map(z, xi, c, vp);
        worst = std::max(worst, std::abs(price(T, chi_T, co) - (xi - ge * (chi_T - z))));
    }
    const auto n = static_cast<std::uint64_t>(fine.n_paths);
    return {make_check(g, "median_gap_fine", gf, 0.0, 0.0, 1e-2, n),
            make_check(g, "refinement_ratio", gf / gc, 0.75, 0.0, 0.0, n, CheckKind::kAtMost),
            make_check(g, "analytic_terminal_identity", worst, 1e-10, 0.0, 0.0, n, CheckKind::kAtMost)};
}

std::vector<CheckResult> check_chi_terminal_ot(const Ensemble& coarse, const Ensemble& fine, const Ensemble& main,
                                               const ValidatedParams& vp, const Calibration& c) {
    require_paths(std::min(coarse.n_paths, fine.n_paths), kMinRefinementPaths, "check_chi_terminal_ot");
    const std::string g = "terminal_price";
    auto gaps = [&](const Ensemble& e) {
        std::vector<double> out(e.n_paths);
        for (std::size_t i = 0; i < e.n_paths; ++i) {
            out[i] = e.terminal.chi[i] - ot_map(e.terminal.s1[i], e.xi[i], c, vp);
        }
        return stats::median_abs(std::move(out));
    };
    const double gc = gaps(coarse);
    const double gf = gaps(fine);

    std::vector<double> w(main.n_paths);
    for (std::size_t i = 0; i < main.n_paths; ++i) w[i] = std::exp(main.terminal.logw[i]);
    const stats::Weighted q(w);
    const auto m = q.mean(main.terminal.chi);
    const auto var = q.covariance(main.terminal.chi, main.terminal.chi);
    const auto nf = static_cast<std::uint64_t>(fine.n_paths);
    const auto nm = static_cast<std::uint64_t>(main.n_paths);
    return {make_check(g, "chi_ot_refinement_ratio", gf / gc, 0.75, 0.0, 0.0, nf, CheckKind::kAtMost),
            make_check(g, "chi_q_mean", m.value, c.m, m.std_error, 0.0, nm),
            make_check(g, "chi_q_var", var.value, c.v * c.v, var.std_error, 0.0, nm)};
}

std::vector<CheckResult> check_increment_identity(const SimulatedPath& path, const Coefficients& co) {
    const std::string g = "martingale";
    const auto& p = co.params().raw;
    const auto& nodes = path.grid.nodes;
    double dp_gap = 0.0, affine_gap = 0.0, volterra_gap = 0.0, zq_gap = 0.0;
    double drift_sum = 0.0;
    for (std::size_t n = 0; n + 1 < nodes.size(); ++n) {
        const double t = nodes[n];
        const double dy = path.y[n + 1] - path.y[n];
        dp_gap = std::max(dp_gap, std::abs((path.price[n + 1] - path.price[n]) - co.p(t) * dy));
        drift_sum += p.gamma * p.sigma * p.sigma * (nodes[n + 1] - t) * path.price[n + 1];
        volterra_gap = std::max(volterra_gap, std::abs(path.chi[n + 1] - drift_sum - path.y[n + 1]));
        zq_gap = std::max(zq_gap, std::abs(path.zq[n + 1] - path.z[n + 1] - drift_sum));
        affine_gap = std::max(affine_gap, std::abs(path.price[n + 1] - price(nodes[n + 1], path.chi[n + 1], co)));
    }
    const auto n = static_cast<std::uint64_t>(nodes.size());
    return {make_check(g, "price_increment_equals_p_dY", dp_gap, 1e-10, 0.0, 0.0, n, CheckKind::kAtMost),
            make_check(g, "price_affine_in_chi", affine_gap, 1e-10, 0.0, 0.0, n, CheckKind::kAtMost),
            make_check(g, "volterra_relation", volterra_gap, 1e-10, 0.0, 0.0, n, CheckKind::kAtMost),
            make_check(g, "zq_relation", zq_gap, 1e-10, 0.0, 0.0, n, CheckKind::kAtMost)};
}

std::vector<CheckResult> check_price_martingale(const Ensemble& e, const Coefficients& co,
                                                const std::vector<double>& times, bool control) {
    require_paths(e.n_paths, kMinCrossSectionPaths, "check_price_martingale");
    const double T = co.horizon();
    std::vector<CheckResult> out;
    for (double t : times) {
        const Snapshot& now = e.at(t);
        const Snapshot& later = e.at(t + T / 8.0);
        std::vector<double> dy(e.n_paths);
        for (std::size_t i = 0; i < e.n_paths; ++i) dy[i] = later.y[i] - now.y[i];
        const auto slope = stats::ols_slope(now.chi, dy);
        auto c = make_check("martingale", std::string(control ? "control." : "") + "slope_dY_on_chi[t=" + fmt(t) + "]",
                            slope.value, 0.0, slope.std_error, 0.0, e.n_paths);
        c.control = control;
        out.push_back(c);
    }
    if (control) {
        // One verdict: the control is detected if any slope leaves its band.
        CheckResult worst = out.front();
        for (const auto& c : out) {
            if (std::abs(c.estimate) / c.std_error > std::abs(worst.estimate) / worst.std_error) worst = c;
        }
        worst.name = "control.max_abs_z_" + worst.name.substr(std::string("control.").size());
        return {worst};
    }
    return out;
}

std::vector<CheckResult> check_conditional_moments(const Ensemble& e, const Coefficients& co, double t) {
    require_paths(e.n_paths, kMinCrossSectionPaths, "check_conditional_moments");
    const std::string g = "conditional_moments";
    const Snapshot& s = e.at(t);
    const double t_node = e.grid.nodes[s.node];
    std::vector<double> r1(e.n_paths), r2(e.n_paths);
    for (std::size_t i = 0; i < e.n_paths; ++i) {
        r1[i] = s.s1[i] - s.mu1[i];
        r2[i] = e.xi[i] - s.mu2[i];
    }
    // Zero-mean residuals: second moments are the covariance targets.
    auto second = [](const std::vector<double>& a, const std::vector<double>& b) {
        std::vector<double> prod(a.size());
        for (std::size_t i = 0; i < a.size(); ++i) prod[i] = a[i] * b[i];
        return stats::mean(prod);
    };
    const Mat2 S = co.sigma(t_node);
    const auto m1 = stats::mean(r1);
    const auto m2 = stats::mean(r2);
    const auto c11 = second(r1, r1);
    const auto c12 = second(r1, r2);
    const auto c22 = second(r2, r2);
    const std::string tag = "[t=" + fmt(t) + "]";
    const auto n = static_cast<std::uint64_t>(e.n_paths);
    return {make_check(g, "mean1" + tag, m1.value, 0.0, m1.std_error, 0.0, n),
            make_check(g, "mean2" + tag, m2.value, 0.0, m2.std_error, 0.0, n),
            make_check(g, "cov11" + tag, c11.value, S.a11, c11.std_error, 0.0, n),
            make_check(g, "cov12" + tag, c12.value, S.a12, c12.std_error, 0.0, n),
            make_check(g, "cov22" + tag, c22.value, S.a22, c22.std_error, 0.0, n)};
}

std::vector<CheckResult> check_q_law(const Ensemble& e, const ValidatedParams& vp) {
    require_paths(e.n_paths, kMinTerminalLawPaths, "check_q_law");
    const std::string g = "q_law";
    const auto& p = vp.raw;
    const Snapshot& s = e.terminal;
    std::vector<double> w(e.n_paths);
    for (std::size_t i = 0; i < e.n_paths; ++i) w[i] = std::exp(s.logw[i]);
    const stats::Weighted q(w);
    if (q.ess() < kMinEss) throw EffectiveSampleSizeTooLow("q-law: ESS " + fmt(q.ess()));

    const auto n = static_cast<std::uint64_t>(e.n_paths);
    const double t_n = e.grid.t_end();
    const auto m1 = q.mean(s.s1);
    const auto m2 = q.mean(e.xi);
    const auto v1 = q.covariance(s.s1, s.s1);
    const auto v2 = q.covariance(e.xi, e.xi);
    const auto c12 = q.covariance(s.s1, e.xi);
    const auto wm = stats::mean(w);
    return {make_check(g, "mean_zq_minus_beta", m1.value, -p.m_beta, m1.std_error, 0.0, n),
            make_check(g, "mean_xi", m2.value, p.m_xi, m2.std_error, 0.0, n),
            make_check(g, "var_zq_minus_beta", v1.value, p.sigma * p.sigma * t_n + p.sigma_beta * p.sigma_beta,
                       v1.std_error, 0.0, n),
            make_check(g, "var_xi", v2.value, p.sigma_xi * p.sigma_xi, v2.std_error, 0.0, n),
            make_check(g, "cross_covariance", c12.value, 0.0, c12.std_error, 0.0, n),
            make_check(g, "effective_sample_size", q.ess(), kMinEss, 0.0, 0.0, n, CheckKind::kAtLeast),
            make_check(g, "rn_weight_mean", wm.value, 1.0, wm.std_error, 0.0, n)};
}

double mm_profit_target(const ValidatedParams& vp, const Calibration& c) {
    const auto& p = vp.raw;
    const double lam = c.lambda_T;
    const double log_term = std::log1p(-p.gamma * lam * p.sigma * p.sigma * p.horizon);
    return (p.eps / lam) * (1.0 - vp.eg * vp.var_z_t / (vp.sigma_e * c.v)) * log_term;
}

double mm_profit_target_exact(const ValidatedParams& vp, const Calibration& c) {
    const auto& p = vp.raw;
    const double s2t = p.sigma * p.sigma * p.horizon;
    const double log_term = std::log1p(-p.gamma * c.lambda_T * s2t);
    return (vp.eg / (vp.sigma_e * vp.sigma_e)) * (-p.eps * vp.var_z_t * log_term - p.sigma_xi * p.sigma_xi * s2t);
}

std::vector<CheckResult> check_mm_profit(const Ensemble& e, const ValidatedParams& vp, const Calibration& c,
                                         bool control) {
    require_paths(e.n_paths, kMinTerminalLawPaths, "check_mm_profit");
    std::vector<double> profit(e.n_paths);
    for (std::size_t i = 0; i < e.n_paths; ++i) profit[i] = ensemble_mm_profit(e, i);
    const auto m = stats::mean(profit);
    const auto n = static_cast<std::uint64_t>(e.n_paths);
    if (control) {
        auto mc = make_check("mm_profit", "control.mean_vs_exact", m.value, mm_profit_target_exact(vp, c),
                             m.std_error, 0.0, n);
        mc.control = true;
        return {mc};
    }
    const double stated = mm_profit_target(vp, c);
    const double exact = mm_profit_target_exact(vp, c);
    std::vector<CheckResult> out{
        make_check("mm_profit", "mean_vs_stated_closed_form", m.value, stated, m.std_error, 0.0, n),
        make_check("mm_profit", "mean_vs_exact_closed_form", m.value, exact, m.std_error, 0.0, n)};
    if (vp.eg > 0.0) {
        out.push_back(make_check("mm_profit", "stated_closed_form_negative", stated, 0.0, 0.0, 0.0, 1,
                                 CheckKind::kAtMost));
        out.push_back(make_check("mm_profit", "exact_closed_form_negative", exact, 0.0, 0.0, 0.0, 1,
                                 CheckKind::kAtMost));
    }
    return out;
}

double insider_utility_closed_form(const ValidatedParams& vp, const Calibration& c, double xi, double b) {
    const auto& p = vp.raw;
    if (!(vp.eg > 0.0)) throw DomainError("eps*gamma", "closed form needs eps*gamma > 0");
    if (p.m_xi != 0.0 || p.m_beta != 0.0) throw DomainError("m_xi/m_beta", "closed form is stated for centred priors");
    const double lam = c.lambda_T;
    const double k = (c.v * lam / vp.sigma_e) * p.eps * p.gamma * p.gamma * p.sigma * p.sigma * p.horizon;
    if (!(k < 1.0)) throw DomainError("integrability", "(v Lambda / sigma_e) eps gamma^2 sigma^2 T >= 1");
    const Coefficients co(vp, c);
    const double u00 = co.s(0.0);
    const double alpha = b + c.m * vp.sigma_e / (c.v * lam) - xi / vp.eg;
    const double expo = -0.5 * p.gamma * (xi * xi / vp.eg + vp.eg * vp.sigma_e / (c.v * lam) * c.m * c.m) +
                        0.5 * p.eps * p.gamma * p.gamma * (c.v * lam / vp.sigma_e) * alpha * alpha / (1.0 - k);
    return -std::exp(-p.gamma * u00) / std::sqrt(1.0 - k) * std::exp(expo);
}

CheckResult check_insider_utility(const ValidatedParams& vp, const Calibration& c, double xi, double b,
                                  std::size_t n_samples, std::uint64_t seed) {
    const auto& p = vp.raw;
    const double target = insider_utility_closed_form(vp, c, xi, b);
    const Coefficients co(vp, c);
    const double pre = -std::exp(-p.gamma * co.s(0.0));
    const double sd = p.sigma * std::sqrt(p.horizon);
    // one stream per (xi, b) so the three cases are independent
    const auto tag = std::bit_cast<std::uint64_t>(xi) ^ (std::bit_cast<std::uint64_t>(b) >> 1);
    PathRng rng(seed ^ tag, kStreamUtility);
    std::vector<double> f(n_samples);
    for (std::size_t i = 0; i < n_samples; ++i) {
        const double z = sd * rng.normal();
        f[i] = pre * std::exp(-p.gamma * gamma_c(z - b, xi, c, vp));
    }
    const auto m = stats::mean(f);
    return make_check("insider_utility", "xi=" + fmt(xi) + ",b=" + fmt(b), m.value, target, m.std_error, 0.0,
                      n_samples);
}

// ---------------------------------------------------------------------------

ValidationReport run_validation(const ModelParams& params, const RunConfig& config,
                                const ValidationOptions& opt) {
    const auto started = std::chrono::steady_clock::now();
    const auto vp = validate(params);
    validate(config);
    const auto cal = solve_v(vp);
    const Coefficients co(vp, cal);
    const double T = vp.raw.horizon;

    ValidationReport rep;
    rep.params = params;
    rep.config = config;
    rep.calibration = cal;
    auto append = [&](std::vector<CheckResult> v) {
        rep.checks.insert(rep.checks.end(), std::make_move_iterator(v.begin()), std::make_move_iterator(v.end()));
    };

    append(check_calibration_closed_forms());
    append(check_k2_identity(co));
    append(check_sigma_degeneracy(co));
    append(check_pde(co, config.seed));
    append(check_ot_duality(vp, cal, config.seed));

    const std::vector<double> slope_times{T / 4.0, T / 2.0, 3.0 * T / 4.0};
    const std::vector<double> moment_times{T / 4.0, T / 2.0, 0.95 * T};
    SimOptions so = opt.sim;
    so.snapshot_times = {T / 4.0, 3.0 * T / 8.0, T / 2.0, 5.0 * T / 8.0, 3.0 * T / 4.0, 7.0 * T / 8.0, 0.95 * T};

    const TimeGrid grid = build_grid(config, vp);
    const auto n_paths = static_cast<std::size_t>(config.n_paths);

    RunConfig coarse_cfg = config;
    coarse_cfg.t_stop_fraction = 1.0;
    coarse_cfg.grid_refinement = std::max(0, config.grid_refinement - opt.refinement_drop);
    RunConfig fine_cfg = coarse_cfg;
    fine_cfg.grid_refinement = config.grid_refinement;
    const std::size_t n_ref = std::min(n_paths, opt.refinement_paths);
    SimOptions so_ref = opt.sim;
    so_ref.snapshot_times.clear();
    {
        const Ensemble coarse = simulate_ensemble(vp, cal, build_grid(coarse_cfg, vp), config.seed, n_ref, so_ref);
        const Ensemble fine = simulate_ensemble(vp, cal, build_grid(fine_cfg, vp), config.seed, n_ref, so_ref);
        const Ensemble main = simulate_ensemble(vp, cal, grid, config.seed, n_paths, so);
        append(check_terminal_price(coarse, fine, vp, cal));
        append(check_chi_terminal_ot(coarse, fine, main, vp, cal));
        append(check_increment_identity(simulate_path(vp, cal, grid, config.seed, 0, opt.sim), co));
        append(check_price_martingale(main, co, slope_times));
        for (double t : moment_times) append(check_conditional_moments(main, co, t));
        append(check_q_law(main, vp));
        append(check_mm_profit(main, vp, cal));
    }
    {
        SimOptions sc = so;
        sc.insider = InsiderMode::kMisspecified;
        sc.insider_v_scale = opt.control_v_scale;
        const Ensemble ctl = simulate_ensemble(vp, cal, grid, config.seed, n_paths, sc);
        append(check_price_martingale(ctl, co, slope_times, true));
        append(check_mm_profit(ctl, vp, cal, true));
    }

    if (vp.eg > 0.0 && vp.raw.m_xi == 0.0 && vp.raw.m_beta == 0.0) {
        for (auto [xi, b] : {std::pair{1.0, 0.3}, std::pair{-1.0, 0.0}, std::pair{0.0, 0.0}}) {
            rep.checks.push_back(check_insider_utility(vp, cal, xi, b, opt.utility_samples, config.seed));
        }
    }
    append(check_limits(params));

    if (opt.timing) {
        rep.runtime_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    }
    return rep;
}

std::string to_json(const ValidationReport& r) {
    using nlohmann::ordered_json;
    ordered_json j;
    const auto& p = r.params;
    j["params"] = {{"sigma", p.sigma},           {"horizon", p.horizon}, {"sigma_xi", p.sigma_xi},
                   {"sigma_beta", p.sigma_beta}, {"eps", p.eps},         {"gamma", p.gamma},
                   {"m_xi", p.m_xi},             {"m_beta", p.m_beta}};
    const auto& c = r.config;
    j["config"] = {{"n_paths", c.n_paths},
                   {"n_steps", c.n_steps},
                   {"grid_refinement", c.grid_refinement},
                   {"seed", c.seed},
                   {"t_stop_fraction", c.t_stop_fraction}};
    j["calibration"] = {{"v", r.calibration.v},
                        {"lambda", r.calibration.lambda_T},
                        {"m", r.calibration.m},
                        {"sigma_e", r.calibration.sigma_e},
                        {"g_v", r.calibration.g_v}};
    auto kind = [](CheckKind k) {
        switch (k) {
            case CheckKind::kAtMost: return "at_most";
            case CheckKind::kAtLeast: return "at_least";
            default: return "within";
        }
    };
    j["checks"] = ordered_json::array();
    for (const auto& ch : r.checks) {
        j["checks"].push_back({{"name", ch.group + "." + ch.name},
                               {"estimate", ch.estimate},
                               {"target", ch.target},
                               {"std_error", ch.std_error},
                               {"tolerance", ch.tolerance},
                               {"passed", ch.passed},
                               {"n_samples", ch.n_samples},
                               {"kind", kind(ch.kind)},
                               {"control", ch.control}});
    }
    j["runtime_seconds"] = r.runtime_seconds;
    return j.dump(2);
}

}  // namespace kyle
