// Command-line front end: convergence tables, zeta studies, generic runs and
// the application demos.

#include <CLI11.hpp>
#include <cstdio>
#include <iostream>
#include <sstream>

#include "rsav/app.hpp"
#include "rsav/config.hpp"
#include "rsav/error.hpp"
#include "rsav/io.hpp"
#include "rsav/manufactured.hpp"

namespace fs = std::filesystem;
using namespace rsav;

namespace {

constexpr int kOk = 0;
constexpr int kConfigError = 1;
constexpr int kSolverError = 2;

std::vector<double> parse_list(const std::string& text, const char* what) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            out.push_back(std::stod(item, &used));
            if (used != item.size())
                throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw ConfigError(std::string("--") + what + ": cannot parse '" + item + "' as a number");
        }
    }
    if (out.empty())
        throw ConfigError(std::string("--") + what + " needs at least one value");
    return out;
}

std::string cell_name(const std::string& sol, double tau, double zeta) {
    char buf[128];
    if (zeta < 0)
        std::snprintf(buf, sizeof buf, "history_%s_tau%g_zopt.csv", sol.c_str(), tau);
    else
        std::snprintf(buf, sizeof buf, "history_%s_tau%g_z%g.csv", sol.c_str(), tau, zeta);
    return buf;
}

int run_convergence_cmd(const std::string& solution, const std::string& taus_s, const std::string& zetas_s,
                        const ConvergenceOptions& opts, const std::string& out_flag) {
    const AnalyticSolution sol{parse_solution(solution)};
    const auto taus = parse_list(taus_s, "taus");
    std::vector<double> zetas;
    for (double z : parse_list(zetas_s, "zetas")) {
        if (z > 1.0)
            throw ConfigError("--zetas values must be in [0, 1] (or negative for the optimal choice)");
        zetas.push_back(z);
    }
    for (double t : taus)
        if (!(t > 0.0))
            throw ConfigError("--taus values must be positive");

    const ErrorTable table = run_convergence(sol, taus, zetas, opts);
    const fs::path out = resolve_out_dir(out_flag);
    std::vector<fs::path> files;
    const fs::path csv = out / ("convergence_" + solution + ".csv");
    write_text_file(csv, table.to_csv());
    files.push_back(csv);
    bool failed = false;
    Series err{"error", {}, {}};
    for (const auto& c : table.rows) {
        if (!c.ok) {
            std::cerr << "cell tau=" << c.tau << " zeta=" << c.zeta << " failed: " << c.failure << '\n';
            failed = true;
            continue;
        }
        std::ostringstream h;
        h << diagnostics_csv_header() << '\n' << to_csv(c.initial) << '\n';
        for (const auto& r : c.history)
            h << to_csv(r) << '\n';
        const fs::path hp = out / cell_name(solution, c.tau, c.zeta);
        write_text_file(hp, h.str());
        files.push_back(hp);
    }
    std::cout << table.to_csv();
    nlohmann::json cfg = {{"command", "convergence"}, {"solution", solution}, {"taus", taus}, {"zetas", zetas},
                          {"h", opts.h},          {"T", opts.T},            {"eps", opts.eps},
                          {"eta_relax", opts.eta_relax}, {"M_relax", opts.M_relax}, {"tol", opts.tol}};
    write_manifest(out, cfg, files);
    return failed ? kSolverError : kOk;
}

int run_zeta_cmd(const std::string& solution, double tau, const ConvergenceOptions& opts,
                 const std::string& out_flag) {
    const AnalyticSolution sol{parse_solution(solution)};
    const ZetaHistory hist = run_zeta_study(sol, tau, opts.h, opts.T, opts.eta_relax, opts.M_relax, opts);
    const fs::path out = resolve_out_dir(out_flag);
    std::vector<fs::path> files{out / "zeta_history.csv", out / "zeta.svg", out / "energy.svg"};
    write_text_file(files[0], hist.to_csv());
    Series z{"zeta", {}, {}}, e{"E_GL", {}, {}};
    e.x.push_back(hist.initial.time);
    e.y.push_back(hist.initial.E_GL);
    for (const auto& r : hist.rows) {
        z.x.push_back(r.time);
        z.y.push_back(r.zeta);
        e.x.push_back(r.time);
        e.y.push_back(r.E_GL);
    }
    emit_line_plot({z}, files[1], "Optimal relaxation parameter", "t", "zeta");
    emit_line_plot({e}, files[2], "Discrete Ginzburg-Landau energy", "t", "E_GL");
    nlohmann::json cfg = {{"command", "zeta-study"}, {"solution", solution}, {"tau", tau}, {"h", opts.h},
                          {"T", opts.T}, {"eta_relax", opts.eta_relax}, {"M_relax", opts.M_relax}};
    write_manifest(out, cfg, files);
    long first_switch = -1;
    for (const auto& r : hist.rows)
        if (r.zeta > 0.5) {
            first_switch = r.step;
            break;
        }
    std::cout << "steps " << hist.rows.size() << ", first step with zeta > 0.5: " << first_switch
              << ", max R(zeta) " << hist.monitor.max_R << '\n';
    return kOk;
}

int run_config_cmd(RunConfig cfg, const std::string& out_flag, bool quiet) {
    if (!out_flag.empty())
        cfg.out_dir = out_flag;
    RunOptions opts;
    if (!quiet)
        opts.log = [](const std::string& m) { std::cerr << m << '\n'; };
    const RunSummary s = run_simulation(cfg, opts);
    std::printf("model %s: %ld steps in %.1f s, max|phi| %.6g, final E_GL %.10g, max R(zeta) %.3g\n",
                to_string(cfg.model).c_str(), s.steps, s.wall_ms / 1000.0, s.max_abs_phi, s.last.E_GL,
                s.monitor.max_R);
    if (cfg.model == ModelKind::tumor)
        std::printf("sigma range [%.6g, %.6g]\n", s.sigma_min, s.sigma_max);
    if (cfg.model == ModelKind::cho)
        std::printf("max mean-recursion error %.3g\n", s.max_mean_recursion_error);
    std::printf("outputs in %s\n", resolve_out_dir(cfg.out_dir).string().c_str());
    return kOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Relaxed SAV solver for Cahn-Hilliard systems with mass source"};
    app.require_subcommand(1);
    // -h is taken by the mesh-size option
    app.set_help_flag("--help", "Print this help message and exit");

    std::string out_dir = "out";
    ConvergenceOptions conv;
    std::string solution = "cos_linear", taus = "0.1,0.05,0.025,0.0125", zetas = "0,1";

    auto* c = app.add_subcommand("convergence", "L2(0,T;L2) errors of a manufactured solution");
    c->add_option("--solution", solution, "cos_linear | expcos_cos | expcost_sin2")->capture_default_str();
    c->add_option("--taus", taus, "comma-separated time steps")->capture_default_str();
    c->add_option("--zetas", zetas, "comma-separated fixed zeta values; negative = optimal")->capture_default_str();
    c->add_option("--h", conv.h, "mesh size")->capture_default_str();
    c->add_option("--T", conv.T, "final time")->capture_default_str();
    c->add_option("--eps", conv.eps, "interface parameter")->capture_default_str();
    c->add_option("--eta", conv.eta_relax, "relaxation constant eta")->capture_default_str();
    c->add_option("--M", conv.M_relax, "relaxation constant M")->capture_default_str();
    c->add_option("--threads", conv.threads, "worker threads (0 = all cores)");
    c->add_option("--out", out_dir, "output directory")->capture_default_str();

    double ztau = 0.01;
    ConvergenceOptions zopt;
    zopt.h = 0.01;
    std::string zsol = "cos_linear";
    auto* z = app.add_subcommand("zeta-study", "history of the optimal relaxation parameter");
    z->add_option("--solution", zsol)->capture_default_str();
    z->add_option("--tau", ztau)->capture_default_str();
    z->add_option("--h", zopt.h)->capture_default_str();
    z->add_option("--T", zopt.T)->capture_default_str();
    z->add_option("--eta", zopt.eta_relax)->capture_default_str();
    z->add_option("--M", zopt.M_relax)->capture_default_str();
    z->add_option("--out", out_dir)->capture_default_str();

    std::string config_path, run_out;
    bool quiet = false;
    auto* r = app.add_subcommand("run", "run a simulation described by a JSON config");
    r->add_option("--config", config_path, "config file")->required();
    r->add_option("--out", run_out, "output directory (overrides the config)");
    r->add_flag("--quiet", quiet);

    std::string app_name, app_config, app_out;
    bool print_config = false;
    auto* a = app.add_subcommand("app", "application demos with preset parameters");
    a->add_option("name", app_name, "cho | segment | inpaint | tumor")->required();
    a->add_option("--config", app_config, "config file replacing the built-in preset");
    a->add_option("--out", app_out, "output directory (overrides the config)");
    a->add_flag("--print-config", print_config, "print the built-in preset and exit");
    a->add_flag("--quiet", quiet);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n\n" << app.help();
        return kConfigError;
    }

    try {
        if (*c)
            return run_convergence_cmd(solution, taus, zetas, conv, out_dir);
        if (*z)
            return run_zeta_cmd(zsol, ztau, zopt, out_dir);
        if (*r)
            return run_config_cmd(load_config(config_path), run_out, quiet);
        if (*a) {
            if (print_config) {
                std::cout << preset_config_text(app_name);
                return kOk;
            }
            RunConfig cfg = app_config.empty() ? parse_config(preset_config_text(app_name), "preset:" + app_name)
                                               : load_config(app_config);
            if (to_string(cfg.model) != app_name)
                throw ConfigError("config model '" + to_string(cfg.model) + "' does not match app '" + app_name + "'");
            return run_config_cmd(cfg, app_out, quiet);
        }
    } catch (const SolverError& e) {
        std::cerr << "solver failure: " << e.what() << '\n';
        return kSolverError;
    } catch (const StepError& e) {
        std::cerr << "step failure: " << e.what() << '\n';
        return kSolverError;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kConfigError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kConfigError;
    }
    return kConfigError;
}
