#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>
#include <json.hpp>

#include "relmart/csv.hpp"
#include "relmart/sde.hpp"
#include "relmart/skew.hpp"
#include "relmart/validation.hpp"

using nlohmann::json;
using namespace relmart;

namespace {

AlphaSchedule schedule_from_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw CLI::ValidationError("--schedule", "cannot open " + path);
    json j;
    f >> j;
    return AlphaSchedule(j.at("cell_starts").get<std::vector<double>>(),
                         j.at("values").get<std::vector<double>>());
}

int run_simulate(const std::string& kind, double T, std::size_t steps, std::size_t paths,
                 std::uint64_t seed, const std::string& out) {
    const TimeGrid grid(T, steps);
    std::vector<SamplePath> result;
    result.reserve(paths);
    const RngStream base(seed, "simulate/" + kind);
    for (std::size_t i = 0; i < paths; ++i) {
        const RngStream st = base.fork(i);
        if (kind == "bm") {
            result.push_back(simulate_brownian(grid, st));
        } else if (kind == "driver") {
            result.push_back(simulate_driver_D(grid, st));
        } else {  // reflected
            result.push_back(reflected_decomposition(simulate_driver_D(grid, st)).M);
        }
    }
    write_paths_csv(out, result);
    std::cout << "wrote " << paths << " " << kind << " path(s) to " << out << "\n";
    return 0;
}

int run_construct(double alpha, const std::optional<std::string>& schedule_file,
                  double delta, double T, std::size_t steps, std::size_t paths,
                  std::uint64_t seed, const std::string& out) {
    const TimeGrid grid(T, steps);
    std::vector<SamplePath> result;
    result.reserve(paths);
    const RngStream base(seed, "construct-skew");
    std::optional<AlphaSchedule> sched;
    if (schedule_file) sched = schedule_from_file(*schedule_file);
    for (std::size_t i = 0; i < paths; ++i) {
        const RngStream st = base.fork(i);
        const SamplePath B = simulate_brownian(grid, st.fork(0));
        const SamplePath D = simulate_driver_D(grid, st.fork(1));
        result.push_back(sched
                             ? construct_Y_delta_2(B, D, *sched, delta, st.fork(2)).Y
                             : construct_Y_delta_1(B, D, SkewParams(alpha, delta),
                                                   st.fork(2))
                                   .Y);
    }
    write_paths_csv(out, result);
    std::cout << "wrote " << paths << " skew path(s) to " << out << "\n";
    return 0;
}

CoeffSpec coeffs_from_config(const json& j, double T) {
    const std::string kind = j.at("kind").get<std::string>();
    const json params = j.value("params", json::object());
    if (kind == "linear" || kind == "gbm") {
        const double s = params.value("sigma", 0.25);
        const double b = params.value("b", kind == "gbm" ? params.value("mu", 0.05) : 0.15);
        const double k = std::abs(s) + std::abs(b);
        return make_coeff_spec(
            kind, [s](double, double x, double) { return s * x; },
            [b](double, double x, double) { return b * x; }, k, k, false, T);
    }
    if (kind == "custom-table") {
        const auto xs = params.at("x").get<std::vector<double>>();
        const auto sig = params.at("sigma").get<std::vector<double>>();
        const auto bs = params.at("b").get<std::vector<double>>();
        if (xs.size() < 2 || xs.size() != sig.size() || xs.size() != bs.size())
            throw CLI::ValidationError("--config", "custom-table needs matching x/sigma/b");
        auto interp = [xs](const std::vector<double>& ys) {
            return [xs, ys](double, double x, double) {
                if (x <= xs.front()) return ys.front();
                if (x >= xs.back()) return ys.back();
                std::size_t i = 1;
                while (xs[i] < x) ++i;
                const double w = (x - xs[i - 1]) / (xs[i] - xs[i - 1]);
                return (1.0 - w) * ys[i - 1] + w * ys[i];
            };
        };
        double k = 0.0, cap = 0.0;
        for (std::size_t i = 0; i < xs.size(); ++i) {
            cap = std::max(cap, std::abs(sig[i]) + std::abs(bs[i]));
            if (i > 0) {
                const double dx = xs[i] - xs[i - 1];
                k = std::max(k, (std::abs(sig[i] - sig[i - 1]) +
                                 std::abs(bs[i] - bs[i - 1])) / dx);
            }
        }
        return make_coeff_spec("custom-table", interp(sig), interp(bs), cap, k, false, T);
    }
    throw CLI::ValidationError("--config", "unknown coeffs kind: " + kind);
}

int run_solve_sde(const std::string& config_path) {
    std::ifstream f(config_path);
    if (!f) throw CLI::ValidationError("--config", "cannot open " + config_path);
    json cfg;
    f >> cfg;

    const double T = cfg.value("T", 1.0);
    const std::size_t steps = cfg.value("steps", std::size_t{4096});
    const std::size_t paths = cfg.value("paths", std::size_t{1});
    const std::uint64_t seed = cfg.value("seed", std::uint64_t{1});
    const double z0 = cfg.value("z0", 0.0);
    const double delta = cfg.value("delta", 0.6);
    const std::string driver = cfg.value("driver", std::string("reflected"));
    const CoeffSpec coeffs = coeffs_from_config(cfg.at("coeffs"), T);
    const TimeGrid grid(T, steps);
    const RngStream base(seed, "solve-sde");

    std::vector<SamplePath> solutions;
    json path_reports = json::array();
    bool zeta_precedence_flagged = false;
    for (std::size_t i = 0; i < paths; ++i) {
        const RngStream st = base.fork(i);
        const SamplePath B = simulate_brownian(grid, st.fork(0));
        const SamplePath D = simulate_driver_D(grid, st.fork(1));
        SdeProblem prob;
        prob.coeffs = coeffs;
        if (driver == "reflected") {
            prob.driver = reflected_decomposition(D);
        } else if (driver == "ito-mckean") {
            prob.driver = ito_mckean(B, D, delta);
        } else if (driver == "bm") {
            SamplePath zero(grid);
            prob.driver = make_decomposition(B, zero, detect_zero_set(D, default_epsilon(grid)));
        } else {
            throw CLI::ValidationError("--config", "unknown driver: " + driver);
        }
        prob.D_path = D;
        prob.H_mask = prob.driver.H_ref;
        prob.z0 = z0;
        if (cfg.contains("zeta")) {
            prob.zeta = cfg["zeta"].get<double>();
            if (prob.H_mask[0] && *prob.zeta != z0) zeta_precedence_flagged = true;
        }

        SamplePath sol = prob.zeta ? picard_solve(prob, 25, 1e-6).solutions.front()
                                   : euler_solve(prob);
        const TestReport rr = eq11_residual(prob, sol);
        path_reports.push_back(json{{"path", i},
                                    {"terminal", sol.back()},
                                    {"eq11_residual", rr.statistic},
                                    {"eq11_pass", rr.pass}});
        solutions.push_back(std::move(sol));
    }

    const std::string out_csv = cfg.value("out", std::string("sde_paths.csv"));
    const std::string out_json = cfg.value("report", std::string("sde_report.json"));
    write_paths_csv(out_csv, solutions);
    json report{{"config", cfg},
                {"driver", driver},
                {"method", cfg.contains("zeta") ? "picard" : "euler"},
                {"zeta_takes_precedence_at_0", zeta_precedence_flagged},
                {"paths", path_reports}};
    std::ofstream rf(out_json);
    rf << report.dump(2) << "\n";
    std::cout << "wrote " << paths << " solution(s) to " << out_csv << ", report to "
              << out_json << "\n";
    return 0;
}

int run_price(double mu, double sigma_c, double delta, double S0, double T,
              std::size_t steps, std::size_t paths, std::uint64_t seed,
              std::optional<double> strike) {
    const TimeGrid grid(T, steps);
    const RngStream base(seed, "price");
    RunningStat euler_stat, closed_stat, diff_stat;
    for (std::size_t i = 0; i < paths; ++i) {
        const RngStream st = base.fork(i);
        const SamplePath B = simulate_brownian(grid, st.fork(0));
        const SamplePath D = simulate_driver_D(grid, st.fork(1));
        const SamplePath X = ito_mckean(B, D, delta).M;
        const auto [eu, cl] = geometric_skew_solve(mu, sigma_c, S0, X);
        const double pe = strike ? std::max(eu.back() - *strike, 0.0) : eu.back();
        const double pc = strike ? std::max(cl.back() - *strike, 0.0) : cl.back();
        euler_stat.add(pe);
        closed_stat.add(pc);
        diff_stat.add(std::abs(eu.back() - cl.back()));
    }
    json report{{"payoff", strike ? "call" : "terminal"},
                {"mc_euler", euler_stat.mean},
                {"mc_euler_se", euler_stat.std_error()},
                {"mc_closed_form", closed_stat.mean},
                {"mc_closed_form_se", closed_stat.std_error()},
                {"mean_terminal_abs_gap", diff_stat.mean}};
    if (strike) report["strike"] = *strike;
    std::cout << report.dump(2) << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Monte Carlo toolkit for relative-martingale-driven processes"};
    app.require_subcommand(1);

    // simulate
    auto* sim = app.add_subcommand("simulate", "simulate base paths and export CSV");
    std::string sim_kind = "bm", sim_out = "paths.csv";
    double sim_T = 1.0;
    std::size_t sim_steps = 1000, sim_paths = 1;
    std::uint64_t sim_seed = 1;
    sim->add_option("--kind", sim_kind)->check(CLI::IsMember({"bm", "driver", "reflected"}));
    sim->add_option("--T", sim_T);
    sim->add_option("--steps", sim_steps);
    sim->add_option("--paths", sim_paths);
    sim->add_option("--seed", sim_seed);
    sim->add_option("--out", sim_out);

    // construct-skew
    auto* cons = app.add_subcommand("construct-skew", "build skew-BM weak solutions");
    double cs_alpha = 0.5, cs_delta = 0.6, cs_T = 1.0;
    std::size_t cs_steps = 10000, cs_paths = 1;
    std::uint64_t cs_seed = 1;
    std::string cs_out = "paths.csv";
    std::string cs_sched;
    cons->add_option("--alpha", cs_alpha);
    cons->add_option("--schedule", cs_sched, "JSON file {cell_starts:[...], values:[...]}");
    cons->add_option("--delta", cs_delta);
    cons->add_option("--T", cs_T);
    cons->add_option("--paths", cs_paths);
    cons->add_option("--steps", cs_steps);
    cons->add_option("--seed", cs_seed);
    cons->add_option("--out", cs_out);

    // solve-sde
    auto* solve = app.add_subcommand("solve-sde", "solve an SDE driven by W = B + v");
    std::string sde_config;
    solve->add_option("--config", sde_config)->required();

    // validate
    auto* val = app.add_subcommand("validate", "run the statistical validation suite");
    std::string v_suite = "default", v_out;
    std::uint64_t v_seed = 20260809;
    std::vector<std::string> v_only;
    val->add_option("--suite", v_suite)->check(CLI::IsMember({"default", "fast"}));
    val->add_option("--seed", v_seed);
    val->add_option("--out", v_out);
    val->add_option("--only", v_only, "substring filters on criterion names");

    // price
    auto* price = app.add_subcommand("price", "geometric skew SDE: closed form vs MC");
    double p_mu = 0.0, p_sigma = 0.2, p_delta = 0.6, p_S0 = 1.0, p_T = 1.0;
    std::size_t p_steps = 4096, p_paths = 10000;
    std::uint64_t p_seed = 1;
    double p_strike = -1.0;
    price->add_option("--mu", p_mu);
    price->add_option("--sigma", p_sigma);
    price->add_option("--delta", p_delta);
    price->add_option("--s0", p_S0);
    price->add_option("--T", p_T);
    price->add_option("--steps", p_steps);
    price->add_option("--paths", p_paths);
    price->add_option("--seed", p_seed);
    price->add_option("--strike", p_strike, "call strike; omit for E[S_T]");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (sim->parsed())
            return run_simulate(sim_kind, sim_T, sim_steps, sim_paths, sim_seed, sim_out);
        if (cons->parsed())
            return run_construct(cs_alpha,
                                 cs_sched.empty() ? std::nullopt
                                                  : std::optional<std::string>(cs_sched),
                                 cs_delta, cs_T, cs_steps, cs_paths, cs_seed, cs_out);
        if (solve->parsed()) return run_solve_sde(sde_config);
        if (val->parsed()) {
            SuiteConfig cfg;
            cfg.suite = v_suite;
            cfg.seed = v_seed;
            cfg.out_dir = v_out;
            cfg.only = v_only;
            const SuiteResult res = run_suite(cfg);
            for (const auto& r : res.reports)
                std::cout << (r.pass ? "[PASS] " : "[FAIL] ") << r.name
                          << "  statistic=" << r.statistic << " threshold=" << r.threshold
                          << "\n";
            std::cout << (res.all_pass ? "ALL PASS" : "FAILURES PRESENT") << " ("
                      << res.reports.size() << " checks, " << res.wall_seconds << " s)\n";
            return res.all_pass ? 0 : 1;
        }
        if (price->parsed())
            return run_price(p_mu, p_sigma, p_delta, p_S0, p_T, p_steps, p_paths, p_seed,
                             p_strike < 0 ? std::nullopt : std::optional<double>(p_strike));
    } catch (const CLI::ValidationError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
