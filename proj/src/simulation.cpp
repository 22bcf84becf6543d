#include "kyle/simulation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

#include "kyle/errors.hpp"
#include "kyle/rng.hpp"

namespace kyle {

std::size_t TimeGrid::node_at_or_before(double t) const {
    const double tol = 1e-12 * std::max(1.0, std::abs(nodes.back()));
    const auto it = std::upper_bound(nodes.begin(), nodes.end(), t + tol);
    if (it == nodes.begin()) throw DomainError("t", "before the first grid node");
    return static_cast<std::size_t>(it - nodes.begin()) - 1;
}

TimeGrid build_grid(const RunConfig& config, const ValidatedParams& params) {
    validate(config);
    const double t_n = params.raw.horizon * config.t_stop_fraction;
    const int L = config.grid_refinement;
    const auto N = static_cast<std::size_t>(config.n_steps);
    const double h = t_n / (static_cast<double>(N) + 1.0 - std::ldexp(1.0, -L));

    TimeGrid g;
    g.refinement = L;
    g.nodes.reserve(N + L + 1);
    for (std::size_t i = 0; i <= N; ++i) g.nodes.push_back(static_cast<double>(i) * h);
    double width = h;
    for (int j = 0; j < L; ++j) {
        width *= 0.5;
        g.nodes.push_back(g.nodes.back() + width);
    }
    g.nodes.back() = t_n;
    for (std::size_t i = 1; i < g.nodes.size(); ++i) {
        if (!(g.nodes[i] > g.nodes[i - 1])) throw DomainError("grid", "nodes not strictly increasing");
    }
    return g;
}

Coefficients insider_coefficients(const ValidatedParams& vp, const Calibration& calib, const SimOptions& opt) {
    if (opt.insider != InsiderMode::kMisspecified) return Coefficients(vp, calib);
    Calibration c = calib;
    c.v = calib.v * opt.insider_v_scale;
    c.lambda_T = vp.sigma_e / c.v - vp.eg;
    if (!(c.lambda_T > 0.0)) throw DomainError("insider_v_scale", "perturbed Lambda must stay positive");
    const auto& p = vp.raw;
    c.g_v = p.gamma * p.sigma * p.sigma * p.horizon * c.lambda_T;
    if (!(c.g_v < 1.0)) throw DomainError("insider_v_scale", "perturbed g_v must stay below 1");
    c.m = solve_m(vp, c.v, c.lambda_T, filter_gain_k(0.0, vp, c.v, c.lambda_T));
    return Coefficients(vp, c);
}

std::vector<StepCoef> build_step_table(const TimeGrid& grid, const Coefficients& market,
                                       const Coefficients& insider, InsiderMode mode) {
    const auto& p = market.params().raw;
    const double s2 = p.sigma * p.sigma;
    const Vec2 e1{1.0, 0.0};
    std::vector<StepCoef> table(grid.steps());
    for (std::size_t n = 0; n < grid.steps(); ++n) {
        const double t = grid.nodes[n];
        const double dt = grid.nodes[n + 1] - t;
        StepCoef& c = table[n];
        c.dt = dt;
        c.sdt = p.sigma * std::sqrt(dt);
        c.p = market.p(t);
        const Vec2 r = market.r(t);
        c.r1 = r.x;
        c.r2 = r.y;
        c.g1 = 0.0;
        c.g2 = 0.0;
        if (mode != InsiderMode::kZero) {
            const double d11 = s2 * t + p.sigma_beta * p.sigma_beta;
            // sigma_beta = 0 at t = 0: the first residual component is zero
            // on every path, so the pseudo-inverse gives the same drift.
            const Mat2 inv = d11 > 0.0 ? insider.sigma_inv(t)
                                       : Mat2::diag(0.0, 1.0 / (p.sigma_xi * p.sigma_xi));
            const Vec2 gain = s2 * (inv * (insider.r(t) - e1));
            c.g1 = gain.x;
            c.g2 = gain.y;
        }
        c.gs2dt = p.gamma * s2 * dt;
        c.neg_gamma = -p.gamma;
        c.hg2dt = 0.5 * p.gamma * p.gamma * s2 * dt;
    }
    return table;
}

namespace {

// Working state for a block of paths.
struct BlockState {
    std::vector<double> s1, mu1, mu2, chi, x, z, y, price, logw, iydp, ixdp, xi, beta, g, normals;
    std::vector<PathRng> rng;

    explicit BlockState(std::size_t n)
        : s1(n), mu1(n), mu2(n), chi(n), x(n), z(n), y(n), price(n), logw(n), iydp(n), ixdp(n),
          xi(n), beta(n), g(n), normals(n), rng(n) {}

    PathBlock view() {
        return {s1.data(), mu1.data(), mu2.data(), chi.data(), x.data(), z.data(), y.data(), price.data(),
                logw.data(), iydp.data(), ixdp.data(), xi.data(), beta.data()};
    }
};

void init_paths(BlockState& st, std::size_t n, std::uint64_t seed, std::uint64_t first_path,
                const ValidatedParams& vp, const Coefficients& market) {
    const auto& p = vp.raw;
    const Vec2 a0 = market.a(0.0);
    const double q0 = market.q(0.0);
    const double sqrt_eps = std::sqrt(p.eps);
    for (std::size_t i = 0; i < n; ++i) {
        PathRng& r = st.rng[i];
        r = PathRng(seed, first_path + i);
        st.xi[i] = p.m_xi + p.sigma_xi * r.normal();
        st.beta[i] = p.m_beta + p.sigma_beta * r.normal();
        st.g[i] = sqrt_eps * r.normal();
        st.s1[i] = -st.beta[i];
        st.mu1[i] = a0.x;
        st.mu2[i] = a0.y;
        st.chi[i] = st.x[i] = st.z[i] = st.y[i] = 0.0;
        st.price[i] = q0;
        st.logw[i] = st.iydp[i] = st.ixdp[i] = 0.0;
    }
}

void draw_normals(BlockState& st, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) st.normals[i] = st.rng[i].normal();
}

void resize(Snapshot& s, std::size_t n) {
    for (auto* v : {&s.s1, &s.mu1, &s.mu2, &s.chi, &s.x, &s.z, &s.y, &s.price, &s.logw, &s.int_y_dp,
                    &s.int_xb_dp}) {
        v->assign(n, 0.0);
    }
}

void capture(Snapshot& s, const BlockState& st, std::size_t offset, std::size_t n) {
    auto put = [&](std::vector<double>& dst, const std::vector<double>& src) {
        std::copy_n(src.begin(), n, dst.begin() + static_cast<std::ptrdiff_t>(offset));
    };
    put(s.s1, st.s1);
    put(s.mu1, st.mu1);
    put(s.mu2, st.mu2);
    put(s.chi, st.chi);
    put(s.x, st.x);
    put(s.z, st.z);
    put(s.y, st.y);
    put(s.price, st.price);
    put(s.logw, st.logw);
    put(s.int_y_dp, st.iydp);
    put(s.int_xb_dp, st.ixdp);
}

}  // namespace

const Snapshot& Ensemble::at(double t) const {
    const std::size_t node = grid.node_at_or_before(t);
    for (const auto& s : snapshots) {
        if (s.node == node) return s;
    }
    if (terminal.node == node) return terminal;
    throw DomainError("t", "no snapshot recorded at this time");
}

Ensemble simulate_ensemble(const ValidatedParams& vp, const Calibration& calib, const TimeGrid& grid,
                           std::uint64_t seed, std::size_t n_paths, const SimOptions& opt) {
    if (n_paths == 0) throw InsufficientPaths("simulate_ensemble: n_paths = 0");
    const Coefficients market(vp, calib);
    const Coefficients insider = insider_coefficients(vp, calib, opt);
    const auto table = build_step_table(grid, market, insider, opt.insider);
    const StepKernel kernel = select_step_kernel(opt.kernel);

    Ensemble e;
    e.grid = grid;
    e.n_paths = n_paths;
    e.p0 = market.q(0.0);
    e.xi.assign(n_paths, 0.0);
    e.beta.assign(n_paths, 0.0);
    e.g.assign(n_paths, 0.0);
    for (double t : opt.snapshot_times) {
        Snapshot s;
        s.t = t;
        s.node = grid.node_at_or_before(t);
        resize(s, n_paths);
        e.snapshots.push_back(std::move(s));
    }
    e.terminal.t = grid.t_end();
    e.terminal.node = grid.steps();
    resize(e.terminal, n_paths);

    // captures[node] lists snapshot indices to fill after reaching that node
    std::vector<std::vector<std::size_t>> captures(grid.nodes.size());
    for (std::size_t k = 0; k < e.snapshots.size(); ++k) captures[e.snapshots[k].node].push_back(k);

    const std::size_t bs = std::max<std::size_t>(1, opt.block_size);
    const std::size_t n_blocks = (n_paths + bs - 1) / bs;
    std::atomic<std::size_t> next{0};

    auto worker = [&]() {
        BlockState st(bs);
        for (std::size_t blk = next++; blk < n_blocks; blk = next++) {
            const std::size_t off = blk * bs;
            const std::size_t n = std::min(bs, n_paths - off);
            init_paths(st, n, seed, off, vp, market);
            std::copy_n(st.xi.begin(), n, e.xi.begin() + static_cast<std::ptrdiff_t>(off));
            std::copy_n(st.beta.begin(), n, e.beta.begin() + static_cast<std::ptrdiff_t>(off));
            std::copy_n(st.g.begin(), n, e.g.begin() + static_cast<std::ptrdiff_t>(off));
            for (std::size_t k : captures[0]) capture(e.snapshots[k], st, off, n);
            const PathBlock view = st.view();
            for (std::size_t step = 0; step < table.size(); ++step) {
                draw_normals(st, n);
                kernel(table[step], view, st.normals.data(), n);
                for (std::size_t k : captures[step + 1]) capture(e.snapshots[k], st, off, n);
            }
            capture(e.terminal, st, off, n);
        }
    };

    unsigned n_threads = opt.threads != 0 ? opt.threads : std::max(1u, std::thread::hardware_concurrency());
    n_threads = static_cast<unsigned>(std::min<std::size_t>(n_threads, n_blocks));
    if (n_threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned i = 0; i < n_threads; ++i) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    return e;
}

double ensemble_wealth(const Ensemble& e, std::size_t i) {
    const Snapshot& s = e.terminal;
    const double vf = e.xi[i] - e.g[i];
    return (s.x[i] + e.beta[i]) * (vf - s.price[i]) + s.int_xb_dp[i] + e.beta[i] * e.p0;
}

double ensemble_mm_profit(const Ensemble& e, std::size_t i) {
    const Snapshot& s = e.terminal;
    const double vf = e.xi[i] - e.g[i];
    return -s.y[i] * (vf - s.price[i]) - s.int_y_dp[i];
}

SimulatedPath simulate_path(const ValidatedParams& vp, const Calibration& calib, const TimeGrid& grid,
                            std::uint64_t seed, std::uint64_t path_index, const SimOptions& opt) {
    const Coefficients market(vp, calib);
    const Coefficients insider = insider_coefficients(vp, calib, opt);
    const auto table = build_step_table(grid, market, insider, opt.insider);
    const StepKernel kernel = select_step_kernel(opt.kernel);

    BlockState st(1);
    init_paths(st, 1, seed, path_index, vp, market);

    SimulatedPath out;
    out.grid = grid;
    out.xi = st.xi[0];
    out.beta = st.beta[0];
    out.g = st.g[0];
    const std::size_t nodes = grid.nodes.size();
    for (auto* v : {&out.chi, &out.zq, &out.mu_p1, &out.mu_p2, &out.x_star, &out.y, &out.price,
                    &out.rn_weight, &out.a1, &out.a2, &out.z}) {
        v->reserve(nodes);
    }
    out.dz.reserve(nodes - 1);

    const Vec2 vv = vp.vec.v;
    const Vec2 ww = vp.vec.w;
    auto record = [&]() {
        out.chi.push_back(st.chi[0]);
        out.zq.push_back(st.s1[0] + st.beta[0]);
        out.mu_p1.push_back(st.mu1[0]);
        out.mu_p2.push_back(st.mu2[0]);
        out.x_star.push_back(st.x[0]);
        out.y.push_back(st.y[0]);
        out.price.push_back(st.price[0]);
        out.rn_weight.push_back(std::exp(st.logw[0]));
        out.z.push_back(st.z[0]);
        const Vec2 res{st.s1[0] - st.mu1[0], st.xi[0] - st.mu2[0]};
        out.a1.push_back(dot(vv, res));
        out.a2.push_back(dot(ww, res));
    };
    record();
    const PathBlock view = st.view();
    for (const auto& c : table) {
        draw_normals(st, 1);
        out.dz.push_back(c.sdt * st.normals[0]);
        kernel(c, view, st.normals.data(), 1);
        record();
    }
    return out;
}

double wealth(const SimulatedPath& path, const ValidatedParams&) {
    const std::size_t n = path.price.size();
    double integral = 0.0;
    for (std::size_t i = 0; i + 1 < n; ++i) {
        integral += (path.x_star[i] + path.beta) * (path.price[i + 1] - path.price[i]);
    }
    const double vf = path.xi - path.g;
    return (path.x_star[n - 1] + path.beta) * (vf - path.price[n - 1]) + integral + path.beta * path.price[0];
}

double mm_profit(const SimulatedPath& path, const ValidatedParams&) {
    const std::size_t n = path.price.size();
    double integral = 0.0;
    for (std::size_t i = 0; i + 1 < n; ++i) integral += path.y[i] * (path.price[i + 1] - path.price[i]);
    const double vf = path.xi - path.g;
    return -path.y[n - 1] * (vf - path.price[n - 1]) - integral;
}

}  // namespace kyle
