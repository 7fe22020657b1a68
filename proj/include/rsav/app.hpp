#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "rsav/config.hpp"
#include "rsav/sav.hpp"

namespace rsav {

/// Per-step view handed to RunOptions::observer.
struct StepEvent {
    int stage = 0;
    const StepResult* result = nullptr;
    /// nutrient field after this step (tumor model only, else empty)
    const NodalField* sigma = nullptr;
    /// mean predicted by the CHO recursion (CHO model only)
    double expected_mean = 0.0;
};

struct RunOptions {
    bool write_outputs = true;
    std::function<void(const StepEvent&)> observer;
    std::function<void(const std::string&)> log;
};

struct RunSummary {
    long steps = 0;
    double wall_ms = 0.0;
    StepMonitor monitor;
    DiagnosticsRow initial;
    DiagnosticsRow last;
    double max_abs_phi = 0.0;
    double sigma_min = 0.0;
    double sigma_max = 0.0;
    /// largest |mean(phi^n) - recursion| over the run (CHO model)
    double max_mean_recursion_error = 0.0;
    /// largest ratio |f| / closed-form bound (0 when the model has no bound)
    double max_source_bound_ratio = 0.0;
    NodalField final_phi;
    std::vector<std::filesystem::path> files;
};

/// Resolved output directory: RSAV_OUT_DIR overrides the configured one.
std::filesystem::path resolve_out_dir(const std::string& configured);

/// Executes the configured run. With write_outputs the directory receives
/// diagnostics.csv, snapshots/, energy.svg, zeta.svg and manifest.json.
RunSummary run_simulation(const RunConfig& cfg, const RunOptions& opts = {});

/// manifest.json listing the resolved config and FNV-1a 64 hashes of files.
std::filesystem::path write_manifest(const std::filesystem::path& dir, const nlohmann::json& config,
                                     const std::vector<std::filesystem::path>& files);

} // namespace rsav
