#include "rsav/app.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <memory>
#include <numbers>
#include <random>
#include <set>
#include <sstream>

#include "rsav/error.hpp"
#include "rsav/io.hpp"
#include "rsav/models.hpp"

namespace rsav {

namespace fs = std::filesystem;

fs::path resolve_out_dir(const std::string& configured) {
    if (const char* env = std::getenv("RSAV_OUT_DIR"); env && *env)
        return fs::path(env);
    return fs::path(configured);
}

fs::path write_manifest(const fs::path& dir, const nlohmann::json& config, const std::vector<fs::path>& files) {
    nlohmann::json m;
    m["config"] = config;
    nlohmann::json arts = nlohmann::json::array();
    for (const auto& f : files)
        arts.push_back({{"path", fs::relative(f, dir).generic_string()}, {"fnv1a64", hex64(fnv1a64_file(f))}});
    m["artifacts"] = arts;
    const fs::path path = dir / "manifest.json";
    write_text_file(path, m.dump(2) + "\n");
    return path;
}

namespace {

Mesh make_mesh(const MeshConfig& mc) {
    return mc.dim == 1 ? build_interval_mesh(mc.a, mc.b, mc.cells) : build_friedrichs_keller(mc.nx, mc.ny, mc.lx, mc.ly);
}

NodalField binary_pm1(const NodalField& v) {
    NodalField out(v.size());
    for (std::size_t k = 0; k < v.size(); ++k)
        out[k] = v[k] >= 0.5 ? 1.0 : -1.0;
    return out;
}

NodalField binary01(const NodalField& v) {
    NodalField out(v.size());
    for (std::size_t k = 0; k < v.size(); ++k)
        out[k] = v[k] >= 0.5 ? 1.0 : 0.0;
    return out;
}

class Runner {
public:
    Runner(const RunConfig& cfg, const RunOptions& opts) : cfg_(cfg), opts_(opts) {}

    RunSummary run();

private:
    void log(const std::string& msg) const {
        if (opts_.log)
            opts_.log(msg);
    }
    void setup();
    NodalField initial_phi();
    void snapshot(long step, double time);
    bool wants_snapshot(long step) const;

    const RunConfig& cfg_;
    const RunOptions& opts_;
    Mesh mesh_;
    std::shared_ptr<const LumpedMass> mass_;
    std::shared_ptr<const CsrMatrix> S_;
    std::shared_ptr<const CsrMatrix> Sh_;
    PotentialSpec pot_;
    fs::path out_;
    SavState state_;
    NodalField sigma_;
    SegParams seg_;
    InpaintParams inp_;
    ChoParams cho_;
    RunSummary sum_;
    std::vector<DiagnosticsRow> rows_;
};

void Runner::setup() {
    mesh_ = make_mesh(cfg_.mesh);
    mass_ = std::make_shared<const LumpedMass>(assemble_lumped_mass(mesh_));
    S_ = std::make_shared<const CsrMatrix>(assemble_stiffness(mesh_));
    Sh_ = cfg_.mobility == 1.0
              ? S_
              : std::make_shared<const CsrMatrix>(
                    assemble_weighted_stiffness(mesh_, NodalField(mesh_.num_nodes(), cfg_.mobility)));
    pot_ = potential_by_name(cfg_.potential);
    out_ = resolve_out_dir(cfg_.out_dir);

    if (cfg_.model == ModelKind::segment) {
        std::string warn;
        const GrayscaleImage img = load_image(cfg_.seg_image, mesh_.nx + 1, mesh_.ny + 1);
        seg_ = cfg_.seg;
        seg_.image = image_to_field(img, mesh_, &warn);
        if (!warn.empty())
            log("warning: " + warn);
    }
    if (cfg_.model == ModelKind::inpaint) {
        std::string warn;
        inp_.image = binary_pm1(image_to_field(load_image(cfg_.inpaint_image, mesh_.nx + 1, mesh_.ny + 1), mesh_, &warn));
        if (!warn.empty())
            log("warning: " + warn);
        warn.clear();
        inp_.mask = binary01(image_to_field(load_image(cfg_.inpaint_mask, mesh_.nx + 1, mesh_.ny + 1), mesh_, &warn));
        if (!warn.empty())
            log("warning: " + warn);
    }
}

NodalField Runner::initial_phi() {
    const auto& ic = cfg_.initial;
    if (ic.type == "random") {
        std::mt19937_64 rng(cfg_.seed);
        std::uniform_real_distribution<double> u(0.0, ic.amplitude);
        NodalField v(mesh_.num_nodes());
        for (double& x : v)
            x = ic.base + u(rng);
        return v;
    }
    if (ic.type == "constant")
        return NodalField(mesh_.num_nodes(), ic.value);
    if (ic.type == "cosine") {
        const double L = mesh_.dim == 1 ? cfg_.mesh.b - cfg_.mesh.a : cfg_.mesh.lx;
        const double a = mesh_.dim == 1 ? cfg_.mesh.a : 0.0;
        return nodal_interpolate(mesh_, [&](double x, double y) {
            const double cx = std::cos(std::numbers::pi * (x - a) / L);
            return ic.base + ic.amplitude * (mesh_.dim == 1 ? cx : cx * std::cos(std::numbers::pi * y / cfg_.mesh.ly));
        });
    }
    if (ic.type == "tumor")
        return tumor_initial_phi(mesh_);
    // image
    if (cfg_.model == ModelKind::segment) {
        const auto [lo, hi] = std::minmax_element(seg_.image.begin(), seg_.image.end());
        NodalField v(seg_.image.size());
        for (std::size_t k = 0; k < v.size(); ++k)
            v[k] = *hi > *lo ? (seg_.image[k] - *lo) / (*hi - *lo) : 0.5;
        return v;
    }
    NodalField v = inp_.image;
    for (std::size_t k = 0; k < v.size(); ++k)
        if (inp_.mask[k] == 0.0)
            v[k] = cfg_.inpaint_fill;
    return v;
}

bool Runner::wants_snapshot(long step) const {
    if (step == 0 || step == cfg_.total_steps())
        return true;
    if (cfg_.snapshot_every > 0 && step % cfg_.snapshot_every == 0)
        return true;
    return std::find(cfg_.snapshot_steps.begin(), cfg_.snapshot_steps.end(), step) != cfg_.snapshot_steps.end();
}

void Runner::snapshot(long step, double time) {
    if (!opts_.write_outputs || !wants_snapshot(step))
        return;
    char name[64];
    const char* ext = mesh_.dim == 1 ? "csv" : "pgm";
    std::snprintf(name, sizeof name, "phi_%07ld.%s", step, ext);
    for (auto& f : emit_field_snapshot(state_.phi, mesh_, out_ / "snapshots" / name, step, time))
        sum_.files.push_back(f);
    if (cfg_.model == ModelKind::tumor) {
        std::snprintf(name, sizeof name, "sigma_%07ld.%s", step, ext);
        for (auto& f : emit_field_snapshot(sigma_, mesh_, out_ / "snapshots" / name, step, time))
            sum_.files.push_back(f);
    }
}

RunSummary Runner::run() {
    const auto start = std::chrono::steady_clock::now();
    setup();

    state_.phi = initial_phi();
    state_.step = 0;
    state_.time = 0.0;
    SchemeParams params = cfg_.scheme;
    params.eps = cfg_.stages.front().eps;
    params.tau = cfg_.stages.front().tau;
    state_.q = q_functional(state_.phi, pot_, params.eps, params.C0, *mass_);

    cho_ = cfg_.cho;
    if (cfg_.model == ModelKind::cho && cfg_.cho_c_from_mean)
        cho_.c = mass_->mean(state_.phi);
    double expected_mean = mass_->mean(state_.phi);
    if (cfg_.model == ModelKind::tumor) {
        sigma_.assign(mesh_.num_nodes(), cfg_.tumor_sigma0);
        sum_.sigma_min = sum_.sigma_max = cfg_.tumor_sigma0;
    }

    sum_.initial = initial_diagnostics(state_, pot_, params, *mass_, *S_);
    rows_.push_back(sum_.initial);
    sum_.max_abs_phi = norm_inf(state_.phi);
    snapshot(0, 0.0);

    const NodalField zeros(mesh_.num_nodes(), 0.0);
    for (std::size_t si = 0; si < cfg_.stages.size(); ++si) {
        const StageConfig& stage = cfg_.stages[si];
        params.eps = stage.eps;
        params.tau = stage.tau;
        params.validate();
        if (si > 0) {
            // Q_h depends on eps, so the scalar variable restarts consistent with the new energy
            state_.q = q_functional(state_.phi, pot_, params.eps, params.C0, *mass_);
            log("stage " + std::to_string(si) + " starts at step " + std::to_string(state_.step));
        }
        const BSolver solver({mass_, S_, Sh_, params.eps, params.tau},
                             {params.solver_tol, params.preconditioner, 0});
        inp_.lambda0 = stage.lambda0;

        for (long k = 0; k < stage.steps; ++k) {
            NodalField f = zeros, extra;
            double bound = 0.0;
            switch (cfg_.model) {
            case ModelKind::ch:
                break;
            case ModelKind::cho:
                f = cho_source(state_.phi, cho_);
                break;
            case ModelKind::segment:
                f = seg_source(state_.phi, seg_);
                bound = seg_source_bound(seg_);
                break;
            case ModelKind::inpaint:
                f = inpaint_source(state_.phi, inp_);
                bound = 2.0 * inp_.lambda0;
                break;
            case ModelKind::tumor: {
                sigma_ = tumor_sigma_step(sigma_, state_.phi, cfg_.tumor, mesh_, *mass_, params.tau,
                                          params.solver_tol, S_.get());
                TumorPhiInputs in =
                    tumor_phi_step_inputs(sigma_, state_.phi, cfg_.tumor, mesh_, *mass_, params.tau, S_.get());
                f = std::move(in.f);
                extra = std::move(in.extra_rhs);
                bound = cfg_.tumor.P_rate * cfg_.tumor.sigma_inf + cfg_.tumor.A_rate;
                const auto [lo, hi] = std::minmax_element(sigma_.begin(), sigma_.end());
                sum_.sigma_min = std::min(sum_.sigma_min, *lo);
                sum_.sigma_max = std::max(sum_.sigma_max, *hi);
                break;
            }
            }
            if (bound > 0.0)
                sum_.max_source_bound_ratio = std::max(sum_.max_source_bound_ratio, norm_inf(f) / bound);

            StepResult res = extra.empty()
                                 ? rsav_step(state_, solver, pot_, params, f, zeros)
                                 : rsav_step(state_, solver, pot_, params, f, zeros, std::span<const double>(extra));
            sum_.monitor.observe(res);
            expected_mean = (1.0 - params.tau * cho_.eta) * expected_mean + params.tau * cho_.eta * cho_.c;
            if (cfg_.model == ModelKind::cho)
                sum_.max_mean_recursion_error =
                    std::max(sum_.max_mean_recursion_error, std::abs(res.diag.mean_phi - expected_mean));
            if (opts_.observer)
                opts_.observer({static_cast<int>(si), &res, cfg_.model == ModelKind::tumor ? &sigma_ : nullptr,
                                expected_mean});

            state_ = std::move(res.state);
            sum_.max_abs_phi = std::max(sum_.max_abs_phi, norm_inf(state_.phi));
            if (cfg_.model == ModelKind::segment)
                std::tie(seg_.c1, seg_.c2) = seg_update_intensities(state_.phi, seg_, *mass_);
            if (state_.step % cfg_.diagnostics_every == 0 || state_.step == cfg_.total_steps())
                rows_.push_back(res.diag);
            sum_.last = res.diag;
            snapshot(state_.step, state_.time);
        }
    }
    sum_.steps = state_.step;
    sum_.final_phi = state_.phi;

    if (opts_.write_outputs) {
        std::ostringstream csv;
        csv << diagnostics_csv_header() << '\n';
        for (const auto& r : rows_)
            csv << to_csv(r) << '\n';
        write_text_file(out_ / "diagnostics.csv", csv.str());
        sum_.files.push_back(out_ / "diagnostics.csv");

        Series t_egl{"E_GL", {}, {}}, t_g{"G", {}, {}}, zeta{"zeta", {}, {}};
        for (const auto& r : rows_) {
            t_egl.x.push_back(r.time);
            t_egl.y.push_back(r.E_GL);
            t_g.x.push_back(r.time);
            t_g.y.push_back(r.G);
            if (r.step > 0) {
                zeta.x.push_back(r.time);
                zeta.y.push_back(r.zeta);
            }
        }
        emit_line_plot({t_egl, t_g}, out_ / "energy.svg", "Energies", "t", "energy");
        sum_.files.push_back(out_ / "energy.svg");
        if (!zeta.x.empty()) {
            emit_line_plot({zeta}, out_ / "zeta.svg", "Relaxation parameter", "t", "zeta");
            sum_.files.push_back(out_ / "zeta.svg");
        }
        nlohmann::json resolved = cfg_.resolved;
        resolved["output"]["dir"] = out_.generic_string();
        if (cfg_.model == ModelKind::cho)
            resolved["cho"]["c_used"] = cho_.c;
        sum_.files.push_back(write_manifest(out_, resolved, sum_.files));
    }
    sum_.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    return sum_;
}

} // namespace

RunSummary run_simulation(const RunConfig& cfg, const RunOptions& opts) {
    Runner r(cfg, opts);
    return r.run();
}

} // namespace rsav
