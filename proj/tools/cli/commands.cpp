#include "commands.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <memory>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "kyle/calibration.hpp"
#include "kyle/coefficients.hpp"
#include "kyle/errors.hpp"
#include "kyle/simulation.hpp"
#include "kyle/stats.hpp"
#include "kyle/transport.hpp"
#include "kyle/validation.hpp"

namespace kyle::cli {

std::string format_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::vector<SweepRow> sweep(const std::string& name, const std::vector<double>& values, const ModelParams& base) {
    if (name != "gamma" && name != "eps") throw DomainError("param", "sweep supports gamma or eps, got '" + name + "'");
    if (values.empty()) throw DomainError("values", "empty sweep");
    std::vector<SweepRow> rows;
    for (std::size_t i = 0; i < values.size(); ++i) {
        const double x = values[i];
        if (!(x > 0.0)) throw DomainError("values", "sweep values must be positive");
        if (i > 0 && !(x < values[i - 1])) throw DomainError("values", "sweep values must be decreasing");
        ModelParams p = base;
        (name == "gamma" ? p.gamma : p.eps) = x;
        const auto vp = validate(p);
        const auto c = solve_v(vp);
        const Coefficients co(vp, c);
        rows.push_back({x, c.v, c.lambda_T, co.p(0.0), mm_profit_target(vp, c)});
    }
    return rows;
}

namespace {

struct Common {
    std::string config_path;
    std::string out_path;
    std::vector<std::string> sets;
    std::uint64_t seed = 0;
    std::uint64_t paths = 0;
    std::uint64_t steps = 0;
    int refine = -1;
};

void add_common(CLI::App* app, Common& c) {
    app->add_option("--config", c.config_path, "flat key = value config file");
    app->add_option("--out", c.out_path, "output file (default: stdout)");
    app->add_option("--set", c.sets, "override, key=value (repeatable)");
    app->add_option("--seed", c.seed, "master seed");
    app->add_option("--paths", c.paths, "number of Monte Carlo paths");
    app->add_option("--steps", c.steps, "uniform grid steps");
    app->add_option("--refine", c.refine, "log-refinement depth near T");
}

void resolve(const Common& c, CLI::App* app, ModelParams& p, RunConfig& rc) {
    if (!c.config_path.empty()) load_config_file(c.config_path, p, rc);
    if (const char* env = std::getenv("KYLE_SEED"); env != nullptr && *env != '\0') {
        apply_setting("seed", env, p, rc);
    }
    for (const auto& kv : c.sets) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) throw DomainError("--set", "expected key=value, got '" + kv + "'");
        apply_setting(kv.substr(0, eq), kv.substr(eq + 1), p, rc);
    }
    if (app->count("--seed") > 0) rc.seed = c.seed;
    if (app->count("--paths") > 0) rc.n_paths = c.paths;
    if (app->count("--steps") > 0) rc.n_steps = c.steps;
    if (app->count("--refine") > 0) {
        if (c.refine < 0) throw DomainError("grid_refinement", "must be >= 0");
        rc.grid_refinement = c.refine;
    }
    validate(p);
    validate(rc);
}

// Writes to --out when given, otherwise to the command's stdout stream.
class Sink {
public:
    Sink(const std::string& path, std::ostream& fallback) : os_(&fallback) {
        if (!path.empty()) {
            file_ = std::make_unique<std::ofstream>(path);
            if (!*file_) throw DomainError("--out", "cannot open " + path);
            os_ = file_.get();
        }
    }
    std::ostream& get() { return *os_; }

private:
    std::unique_ptr<std::ofstream> file_;
    std::ostream* os_;
};

int cmd_calibrate(const ModelParams& p, const Common& c, std::ostream& out) {
    const auto vp = validate(p);
    const auto cal = solve_v(vp);
    nlohmann::ordered_json j{{"v", cal.v},
                             {"lambda", cal.lambda_T},
                             {"m", cal.m},
                             {"sigma_e", cal.sigma_e},
                             {"g_v", cal.g_v}};
    Sink sink(c.out_path, out);
    sink.get() << j.dump(2) << "\n";
    return kOk;
}

int cmd_coeffs(const ModelParams& p, const Common& c, int grid, std::ostream& out) {
    if (grid < 1) throw DomainError("--grid", "must be >= 1");
    const auto vp = validate(p);
    const Coefficients co(vp, solve_v(vp));
    Sink sink(c.out_path, out);
    auto& os = sink.get();
    os << "t,p,q,s,k,r1,r2,f,S11,S12,S22,b,a1,a2,int_k2\n";
    const double T = vp.raw.horizon;
    for (int i = 0; i <= grid; ++i) {
        const double t = i == grid ? T : T * i / grid;
        const auto s = co.eval(t);
        const double row[] = {s.t, s.p, s.q, s.s, s.k, s.r.x, s.r.y, s.f, s.Sigma.a11, s.Sigma.a12,
                              s.Sigma.a22, s.b, s.a.x, s.a.y, s.int_k2};
        for (std::size_t k = 0; k < std::size(row); ++k) os << (k ? "," : "") << format_double(row[k]);
        os << "\n";
    }
    return kOk;
}

int cmd_simulate(const ModelParams& p, const RunConfig& rc, const Common& c, const std::string& paths_out,
                 std::uint64_t trace, std::ostream& out) {
    const auto vp = validate(p);
    const auto cal = solve_v(vp);
    const TimeGrid grid = build_grid(rc, vp);
    const Ensemble e = simulate_ensemble(vp, cal, grid, rc.seed, static_cast<std::size_t>(rc.n_paths));

    const Snapshot& s = e.terminal;
    const std::size_t n = e.n_paths;
    std::vector<double> price_gap(n), chi_gap(n), w(n), profit(n), wealth(n);
    for (std::size_t i = 0; i < n; ++i) {
        price_gap[i] = s.price[i] - (e.xi[i] - vp.eg * (s.x[i] + e.beta[i]));
        chi_gap[i] = s.chi[i] - ot_map(s.s1[i], e.xi[i], cal, vp);
        w[i] = std::exp(s.logw[i]);
        profit[i] = ensemble_mm_profit(e, i);
        wealth[i] = ensemble_wealth(e, i);
    }
    auto moments = [&](const std::vector<double>& x) {
        nlohmann::ordered_json j{{"mean", stats::mean(x).value}};
        if (n >= 2) j["variance"] = stats::covariance(x, x).value;
        return j;
    };
    nlohmann::ordered_json j;
    j["n_paths"] = n;
    j["t_end"] = grid.t_end();
    j["kernel"] = kernel_name(select_step_kernel());
    j["terminal"] = {{"chi", moments(s.chi)},     {"price", moments(s.price)}, {"y", moments(s.y)},
                     {"x_star", moments(s.x)},   {"rn_weight", moments(w)},   {"mm_profit", moments(profit)},
                     {"insider_wealth", moments(wealth)}};
    j["identity_gaps"] = {{"median_abs_terminal_price", stats::median_abs(price_gap)},
                          {"median_abs_chi_vs_ot_map", stats::median_abs(chi_gap)}};
    j["mm_profit_target"] = mm_profit_target(vp, cal);
    Sink sink(c.out_path, out);
    sink.get() << j.dump(2) << "\n";

    if (!paths_out.empty()) {
        const SimulatedPath path = simulate_path(vp, cal, grid, rc.seed, trace);
        std::ofstream f(paths_out);
        if (!f) throw DomainError("--paths-out", "cannot open " + paths_out);
        f << "t,chi,zq,mu_p1,mu_p2,x_star,y,price,a1,a2,rn_weight\n";
        for (std::size_t k = 0; k < grid.nodes.size(); ++k) {
            const double row[] = {grid.nodes[k], path.chi[k], path.zq[k], path.mu_p1[k], path.mu_p2[k],
                                  path.x_star[k], path.y[k], path.price[k], path.a1[k], path.a2[k],
                                  path.rn_weight[k]};
            for (std::size_t m = 0; m < std::size(row); ++m) f << (m ? "," : "") << format_double(row[m]);
            f << "\n";
        }
    }
    return kOk;
}

int cmd_validate(const ModelParams& p, const RunConfig& rc, const Common& c, bool timing, std::ostream& out,
                 std::ostream& err) {
    ValidationOptions opt;
    opt.timing = timing;
    const auto rep = run_validation(p, rc, opt);
    for (const auto& ch : rep.checks) {
        const bool good = ch.passed != ch.control;
        err << (good ? "ok   " : "FAIL ") << ch.group << "." << ch.name << (ch.control ? " (control)" : "")
            << "  estimate=" << format_double(ch.estimate) << " target=" << format_double(ch.target) << "\n";
    }
    Sink sink(c.out_path, out);
    sink.get() << to_json(rep) << "\n";
    return rep.ok() ? kOk : kCheckFailure;
}

int cmd_sweep(const ModelParams& p, const Common& c, const std::string& name, const std::vector<double>& values,
              std::ostream& out) {
    const auto rows = sweep(name, values, p);
    Sink sink(c.out_path, out);
    auto& os = sink.get();
    os << "value,v,lambda,p_0,mm_profit_target\n";
    for (const auto& r : rows) {
        os << format_double(r.value) << "," << format_double(r.v) << "," << format_double(r.lambda) << ","
           << format_double(r.p0) << "," << format_double(r.mm_profit_target) << "\n";
    }
    return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Gaussian Kyle equilibrium with a risk-averse, imperfectly informed insider"};
    app.require_subcommand(1);

    Common c_cal, c_coef, c_sim, c_val, c_sweep;
    auto* calibrate = app.add_subcommand("calibrate", "print v, lambda, m, sigma_e, g_v as JSON");
    add_common(calibrate, c_cal);

    int grid = 100;
    auto* coeffs = app.add_subcommand("coeffs", "coefficient curves on a uniform time grid (CSV)");
    add_common(coeffs, c_coef);
    coeffs->add_option("--grid", grid, "number of intervals on [0, T]");

    std::string paths_out;
    std::uint64_t trace = 0;
    auto* simulate = app.add_subcommand("simulate", "simulate paths and print terminal statistics (JSON)");
    add_common(simulate, c_sim);
    simulate->add_option("--paths-out", paths_out, "CSV trace of one path");
    simulate->add_option("--trace-path", trace, "path index written by --paths-out");

    bool no_timing = false;
    auto* validate_cmd = app.add_subcommand("validate", "run every check and write the JSON report");
    add_common(validate_cmd, c_val);
    validate_cmd->add_flag("--no-timing", no_timing, "report runtime_seconds = 0 (byte-stable output)");

    std::string param;
    std::vector<double> values;
    auto* sweep_cmd = app.add_subcommand("sweep", "lambda along a decreasing gamma or eps sequence (CSV)");
    add_common(sweep_cmd, c_sweep);
    sweep_cmd->add_option("--param", param, "gamma or eps")->required();
    sweep_cmd->add_option("--values", values, "comma-separated values")->delimiter(',')->required();

    std::vector<std::string> rev(args.rbegin(), args.rend() - (args.empty() ? 0 : 1));
    try {
        app.parse(rev);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n\n" << app.help();
        return kUsage;
    }

    try {
        ModelParams p;
        RunConfig rc;
        if (*calibrate) {
            resolve(c_cal, calibrate, p, rc);
            return cmd_calibrate(p, c_cal, out);
        }
        if (*coeffs) {
            resolve(c_coef, coeffs, p, rc);
            return cmd_coeffs(p, c_coef, grid, out);
        }
        if (*simulate) {
            resolve(c_sim, simulate, p, rc);
            return cmd_simulate(p, rc, c_sim, paths_out, trace, out);
        }
        if (*validate_cmd) {
            resolve(c_val, validate_cmd, p, rc);
            return cmd_validate(p, rc, c_val, !no_timing, out, err);
        }
        resolve(c_sweep, sweep_cmd, p, rc);
        return cmd_sweep(p, c_sweep, param, values, out);
    } catch (const DomainError& e) {
        err << "error: " << e.what() << "\n";
        return kUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kCheckFailure;
    }
}

}  // namespace kyle::cli
