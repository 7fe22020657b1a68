#pragma once

#include <cstdint>
#include <json.hpp>
#include <string>
#include <vector>

#include "rsav/models.hpp"
#include "rsav/sav.hpp"

namespace rsav {

enum class ModelKind { ch, cho, segment, inpaint, tumor };

ModelKind parse_model(const std::string& name);
std::string to_string(ModelKind kind);

struct MeshConfig {
    int dim = 2;
    /// 1D
    int cells = 100;
    double a = 0.0;
    double b = 1.0;
    /// 2D
    int nx = 64;
    int ny = 64;
    /// side lengths of the 2D domain
    double lx = 1.0;
    double ly = 1.0;
};

/// One entry of the parameter schedule.
struct StageConfig {
    long steps = 1;
    double eps = 1.0;
    double tau = 0.01;
    /// inpainting fidelity weight
    double lambda0 = 0.0;
};

struct InitialConfig {
    /// random | constant | cosine | image | tumor
    std::string type = "random";
    double base = 0.0;
    double amplitude = 0.0;
    double value = 0.0;
};

struct RunConfig {
    MeshConfig mesh;
    ModelKind model = ModelKind::ch;
    std::string potential = "quartic";
    SchemeParams scheme;
    double mobility = 1.0;
    std::vector<StageConfig> stages;
    InitialConfig initial;

    ChoParams cho;
    /// take c as the mean of phi^0
    bool cho_c_from_mean = true;

    SegParams seg;
    std::string seg_image = "synthetic:shapes";

    std::string inpaint_image = "synthetic:double_stripe";
    std::string inpaint_mask = "synthetic:stripe_mask";
    double inpaint_fill = 0.0;

    TumorParams tumor;
    double tumor_sigma0 = 1.0;

    std::string out_dir = "out";
    /// 0 disables periodic snapshots
    long snapshot_every = 0;
    std::vector<long> snapshot_steps;
    long diagnostics_every = 1;
    std::uint64_t seed = 1;

    /// every field after defaults, as written to the manifest
    nlohmann::json resolved;

    long total_steps() const;
};

/// Parses and validates a JSON document. Errors carry the line number or the
/// offending field name.
RunConfig parse_config(const std::string& text, const std::string& source = "<config>");
RunConfig load_config(const std::string& path);

/// Built-in parameter sets for the application demos: cho, segment, inpaint, tumor.
std::string preset_config_text(const std::string& app);

} // namespace rsav
