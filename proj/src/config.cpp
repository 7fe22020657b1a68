#include "rsav/config.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "rsav/error.hpp"

namespace rsav {

using nlohmann::json;

ModelKind parse_model(const std::string& name) {
    if (name == "ch")
        return ModelKind::ch;
    if (name == "cho")
        return ModelKind::cho;
    if (name == "segment")
        return ModelKind::segment;
    if (name == "inpaint")
        return ModelKind::inpaint;
    if (name == "tumor")
        return ModelKind::tumor;
    throw ConfigError("unknown model '" + name + "' (valid models: ch, cho, segment, inpaint, tumor)");
}

std::string to_string(ModelKind kind) {
    switch (kind) {
    case ModelKind::ch:
        return "ch";
    case ModelKind::cho:
        return "cho";
    case ModelKind::segment:
        return "segment";
    case ModelKind::inpaint:
        return "inpaint";
    case ModelKind::tumor:
        return "tumor";
    }
    return "?";
}

long RunConfig::total_steps() const {
    long n = 0;
    for (const auto& s : stages)
        n += s.steps;
    return n;
}

namespace {

void check_keys(const json& obj, const std::string& where, std::initializer_list<const char*> allowed) {
    if (!obj.is_object())
        throw ConfigError(where + ": expected an object");
    const std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& [key, _] : obj.items())
        if (!ok.count(key)) {
            std::string list;
            for (const auto& k : ok)
                list += (list.empty() ? "" : ", ") + k;
            throw ConfigError(where + ": unknown field '" + key + "' (allowed: " + list + ")");
        }
}

template <class T>
T get_or(const json& obj, const char* key, const std::string& where, T fallback) {
    if (!obj.contains(key))
        return fallback;
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError(where + "." + key + ": wrong type");
    }
}

double positive(double v, const std::string& field) {
    if (!(v > 0.0) || !std::isfinite(v))
        throw ConfigError(field + " must be positive");
    return v;
}

double nonneg(double v, const std::string& field) {
    if (!(v >= 0.0) || !std::isfinite(v))
        throw ConfigError(field + " must be nonnegative");
    return v;
}

int line_of_offset(const std::string& text, std::size_t byte) {
    byte = std::min(byte, text.size());
    return 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(byte), '\n'));
}

} // namespace

RunConfig parse_config(const std::string& text, const std::string& source) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(source + ":" + std::to_string(line_of_offset(text, e.byte)) + ": parse error: " +
                          e.what());
    }
    check_keys(doc, "config",
               {"mesh", "model", "potential", "scheme", "mobility", "stages", "initial", "cho", "segment",
                "inpaint", "tumor", "output", "seed"});
    RunConfig cfg;

    if (!doc.contains("model"))
        throw ConfigError("model: required (valid models: ch, cho, segment, inpaint, tumor)");
    cfg.model = parse_model(get_or<std::string>(doc, "model", "config", ""));
    cfg.potential = get_or<std::string>(doc, "potential", "config",
                                        cfg.model == ModelKind::segment ? "double_well01" : "quartic");
    potential_by_name(cfg.potential);

    if (!doc.contains("mesh"))
        throw ConfigError("mesh: required");
    const json& m = doc["mesh"];
    check_keys(m, "mesh", {"dim", "cells", "a", "b", "nx", "ny", "lx", "ly"});
    cfg.mesh.dim = get_or<int>(m, "dim", "mesh", 2);
    if (cfg.mesh.dim != 1 && cfg.mesh.dim != 2)
        throw ConfigError("mesh.dim must be 1 or 2");
    cfg.mesh.cells = get_or<int>(m, "cells", "mesh", 100);
    cfg.mesh.a = get_or<double>(m, "a", "mesh", 0.0);
    cfg.mesh.b = get_or<double>(m, "b", "mesh", 1.0);
    cfg.mesh.nx = get_or<int>(m, "nx", "mesh", 64);
    cfg.mesh.ny = get_or<int>(m, "ny", "mesh", cfg.mesh.nx);
    cfg.mesh.lx = get_or<double>(m, "lx", "mesh", 1.0);
    cfg.mesh.ly = get_or<double>(m, "ly", "mesh", cfg.mesh.lx);
    if (cfg.mesh.dim == 1 && (cfg.mesh.cells < 1 || !(cfg.mesh.a < cfg.mesh.b)))
        throw ConfigError("mesh.cells must be >= 1 and mesh.a < mesh.b");
    if (cfg.mesh.dim == 2 && (cfg.mesh.nx < 1 || cfg.mesh.ny < 1))
        throw ConfigError("mesh.nx and mesh.ny must be >= 1");
    if (cfg.mesh.dim == 2 && !(cfg.mesh.lx > 0.0 && cfg.mesh.ly > 0.0))
        throw ConfigError("mesh.lx and mesh.ly must be positive");
    if (cfg.model != ModelKind::ch && cfg.model != ModelKind::cho && cfg.mesh.dim != 2)
        throw ConfigError("mesh.dim: model '" + to_string(cfg.model) + "' needs a 2D mesh");

    const json sch = doc.value("scheme", json::object());
    check_keys(sch, "scheme", {"eps", "tau", "C0", "eta_relax", "M_relax", "zeta", "tol", "preconditioner"});
    auto& sp = cfg.scheme;
    sp.eps = get_or<double>(sch, "eps", "scheme", 1.0);
    sp.tau = get_or<double>(sch, "tau", "scheme", 0.01);
    sp.C0 = get_or<double>(sch, "C0", "scheme", 1.0);
    sp.eta_relax = get_or<double>(sch, "eta_relax", "scheme", 0.95);
    sp.M_relax = get_or<double>(sch, "M_relax", "scheme", 1.0);
    sp.solver_tol = get_or<double>(sch, "tol", "scheme", 1e-12);
    sp.preconditioner = parse_preconditioner(get_or<std::string>(sch, "preconditioner", "scheme", "lu"));
    if (sch.contains("zeta")) {
        const json& z = sch["zeta"];
        if (z.is_string() && z.get<std::string>() == "optimal")
            sp.zeta = ZetaPolicy::optimal_choice();
        else if (z.is_number() && z.get<double>() >= 0.0 && z.get<double>() <= 1.0)
            sp.zeta = ZetaPolicy::fixed(z.get<double>());
        else
            throw ConfigError("scheme.zeta must be \"optimal\" or a number in [0, 1]");
    }

    cfg.mobility = positive(get_or<double>(doc, "mobility", "config", 1.0), "mobility");
    sp.m0 = cfg.mobility;

    const json ini = doc.value("initial", json::object());
    check_keys(ini, "initial", {"type", "base", "amplitude", "value"});
    const std::string default_init = cfg.model == ModelKind::segment || cfg.model == ModelKind::inpaint ? "image"
                                     : cfg.model == ModelKind::tumor                                   ? "tumor"
                                                                                                       : "random";
    cfg.initial.type = get_or<std::string>(ini, "type", "initial", default_init);
    cfg.initial.base = get_or<double>(ini, "base", "initial", cfg.model == ModelKind::cho ? -0.5 : 0.0);
    cfg.initial.amplitude = get_or<double>(ini, "amplitude", "initial", cfg.model == ModelKind::cho ? 0.2 : 0.1);
    cfg.initial.value = get_or<double>(ini, "value", "initial", 0.0);
    static const std::set<std::string> init_types{"random", "constant", "cosine", "image", "tumor"};
    if (!init_types.count(cfg.initial.type))
        throw ConfigError("initial.type '" + cfg.initial.type +
                          "' is not one of random, constant, cosine, image, tumor");
    if (cfg.initial.type == "image" && cfg.model != ModelKind::segment && cfg.model != ModelKind::inpaint)
        throw ConfigError("initial.type 'image' needs model segment or inpaint");
    if (cfg.initial.type == "tumor" && cfg.mesh.dim != 2)
        throw ConfigError("initial.type 'tumor' needs a 2D mesh");

    if (doc.contains("cho")) {
        const json& c = doc["cho"];
        check_keys(c, "cho", {"eta", "c"});
        cfg.cho.eta = get_or<double>(c, "eta", "cho", cfg.cho.eta);
        if (c.contains("c") && !c["c"].is_null()) {
            cfg.cho.c = get_or<double>(c, "c", "cho", 0.0);
            cfg.cho_c_from_mean = false;
        }
    }
    nonneg(cfg.cho.eta, "cho.eta");

    if (doc.contains("segment")) {
        const json& s = doc["segment"];
        check_keys(s, "segment", {"eta", "lambda1", "lambda2", "c1", "c2", "image"});
        cfg.seg.eta = get_or<double>(s, "eta", "segment", cfg.seg.eta);
        cfg.seg.lambda1 = get_or<double>(s, "lambda1", "segment", cfg.seg.lambda1);
        cfg.seg.lambda2 = get_or<double>(s, "lambda2", "segment", cfg.seg.lambda2);
        cfg.seg.c1 = get_or<double>(s, "c1", "segment", cfg.seg.c1);
        cfg.seg.c2 = get_or<double>(s, "c2", "segment", cfg.seg.c2);
        cfg.seg_image = get_or<std::string>(s, "image", "segment", cfg.seg_image);
    }
    positive(cfg.seg.eta, "segment.eta");
    positive(cfg.seg.lambda1, "segment.lambda1");
    positive(cfg.seg.lambda2, "segment.lambda2");

    double lambda0_default = 10.0;
    if (doc.contains("inpaint")) {
        const json& s = doc["inpaint"];
        check_keys(s, "inpaint", {"lambda0", "image", "mask", "fill"});
        lambda0_default = get_or<double>(s, "lambda0", "inpaint", lambda0_default);
        cfg.inpaint_image = get_or<std::string>(s, "image", "inpaint", cfg.inpaint_image);
        cfg.inpaint_mask = get_or<std::string>(s, "mask", "inpaint", cfg.inpaint_mask);
        cfg.inpaint_fill = get_or<double>(s, "fill", "inpaint", cfg.inpaint_fill);
    }

    if (doc.contains("tumor")) {
        const json& t = doc["tumor"];
        check_keys(t, "tumor", {"chi_sigma", "chi", "eta", "P", "A", "C", "sigma_inf", "sigma0", "nutrient_mobility"});
        auto& tp = cfg.tumor;
        tp.chi_sigma = get_or<double>(t, "chi_sigma", "tumor", tp.chi_sigma);
        tp.chi = get_or<double>(t, "chi", "tumor", tp.chi);
        tp.eta = get_or<double>(t, "eta", "tumor", tp.eta);
        tp.P_rate = get_or<double>(t, "P", "tumor", tp.P_rate);
        tp.A_rate = get_or<double>(t, "A", "tumor", tp.A_rate);
        tp.C_rate = get_or<double>(t, "C", "tumor", tp.C_rate);
        tp.sigma_inf = get_or<double>(t, "sigma_inf", "tumor", tp.sigma_inf);
        cfg.tumor_sigma0 = get_or<double>(t, "sigma0", "tumor", cfg.tumor_sigma0);
        tp.mobility_sigma = MobilitySpec::constant_value(
            positive(get_or<double>(t, "nutrient_mobility", "tumor", 1.0), "tumor.nutrient_mobility"));
    }
    cfg.tumor.mobility_phi = MobilitySpec::constant_value(cfg.mobility);
    positive(cfg.tumor.chi_sigma, "tumor.chi_sigma");
    nonneg(cfg.tumor.chi, "tumor.chi");
    nonneg(cfg.tumor.eta, "tumor.eta");
    nonneg(cfg.tumor.P_rate, "tumor.P");
    nonneg(cfg.tumor.A_rate, "tumor.A");
    nonneg(cfg.tumor.C_rate, "tumor.C");
    positive(cfg.tumor.sigma_inf, "tumor.sigma_inf");

    if (doc.contains("stages")) {
        const json& st = doc["stages"];
        if (!st.is_array() || st.empty())
            throw ConfigError("stages must be a non-empty array");
        for (std::size_t i = 0; i < st.size(); ++i) {
            const std::string where = "stages[" + std::to_string(i) + "]";
            check_keys(st[i], where, {"steps", "eps", "tau", "lambda0"});
            StageConfig s;
            s.steps = get_or<long>(st[i], "steps", where, 0);
            s.eps = get_or<double>(st[i], "eps", where, i == 0 ? sp.eps : cfg.stages.back().eps);
            s.tau = get_or<double>(st[i], "tau", where, i == 0 ? sp.tau : cfg.stages.back().tau);
            s.lambda0 = get_or<double>(st[i], "lambda0", where, i == 0 ? lambda0_default : cfg.stages.back().lambda0);
            if (s.steps < 1)
                throw ConfigError(where + ".steps must be >= 1");
            positive(s.eps, where + ".eps");
            positive(s.tau, where + ".tau");
            nonneg(s.lambda0, where + ".lambda0");
            cfg.stages.push_back(s);
        }
    } else {
        cfg.stages.push_back({100, sp.eps, sp.tau, lambda0_default});
    }
    sp.eps = cfg.stages.front().eps;
    sp.tau = cfg.stages.front().tau;
    sp.validate();

    if (cfg.model == ModelKind::cho)
        for (std::size_t i = 0; i < cfg.stages.size(); ++i)
            if (cfg.stages[i].tau * cfg.cho.eta >= 1.0)
                throw ConfigError("stages[" + std::to_string(i) +
                                  "]: tau * cho.eta must be < 1, otherwise the mean recursion "
                                  "m_n = (1 - tau eta) m_{n-1} + tau eta c loses its a priori bound");

    const json out = doc.value("output", json::object());
    check_keys(out, "output", {"dir", "snapshot_every", "snapshot_steps", "diagnostics_every"});
    cfg.out_dir = get_or<std::string>(out, "dir", "output", cfg.out_dir);
    cfg.snapshot_every = get_or<long>(out, "snapshot_every", "output", 0);
    cfg.snapshot_steps = get_or<std::vector<long>>(out, "snapshot_steps", "output", {});
    cfg.diagnostics_every = get_or<long>(out, "diagnostics_every", "output", 1);
    if (cfg.snapshot_every < 0)
        throw ConfigError("output.snapshot_every must be >= 0");
    if (cfg.diagnostics_every < 1)
        throw ConfigError("output.diagnostics_every must be >= 1");
    cfg.seed = get_or<std::uint64_t>(doc, "seed", "config", 1);

    json stages = json::array();
    for (const auto& s : cfg.stages)
        stages.push_back({{"steps", s.steps}, {"eps", s.eps}, {"tau", s.tau}, {"lambda0", s.lambda0}});
    cfg.resolved = {
        {"model", to_string(cfg.model)},
        {"potential", cfg.potential},
        {"mesh",
         {{"dim", cfg.mesh.dim}, {"cells", cfg.mesh.cells}, {"a", cfg.mesh.a}, {"b", cfg.mesh.b},
          {"nx", cfg.mesh.nx}, {"ny", cfg.mesh.ny}, {"lx", cfg.mesh.lx}, {"ly", cfg.mesh.ly}}},
        {"scheme",
         {{"C0", sp.C0}, {"eta_relax", sp.eta_relax}, {"M_relax", sp.M_relax},
          {"zeta", sp.zeta.optimal ? json("optimal") : json(sp.zeta.value)}, {"tol", sp.solver_tol},
          {"preconditioner", to_string(sp.preconditioner)}}},
        {"mobility", cfg.mobility},
        {"stages", stages},
        {"initial",
         {{"type", cfg.initial.type}, {"base", cfg.initial.base}, {"amplitude", cfg.initial.amplitude},
          {"value", cfg.initial.value}}},
        {"output",
         {{"dir", cfg.out_dir}, {"snapshot_every", cfg.snapshot_every}, {"snapshot_steps", cfg.snapshot_steps},
          {"diagnostics_every", cfg.diagnostics_every}}},
        {"seed", cfg.seed}};
    switch (cfg.model) {
    case ModelKind::cho:
        cfg.resolved["cho"] = {{"eta", cfg.cho.eta}, {"c", cfg.cho_c_from_mean ? json(nullptr) : json(cfg.cho.c)}};
        break;
    case ModelKind::segment:
        cfg.resolved["segment"] = {{"eta", cfg.seg.eta}, {"lambda1", cfg.seg.lambda1}, {"lambda2", cfg.seg.lambda2},
                                   {"c1", cfg.seg.c1},   {"c2", cfg.seg.c2},           {"image", cfg.seg_image}};
        break;
    case ModelKind::inpaint:
        cfg.resolved["inpaint"] = {{"image", cfg.inpaint_image}, {"mask", cfg.inpaint_mask}, {"fill", cfg.inpaint_fill}};
        break;
    case ModelKind::tumor:
        cfg.resolved["tumor"] = {{"chi_sigma", cfg.tumor.chi_sigma}, {"chi", cfg.tumor.chi},
                                 {"eta", cfg.tumor.eta},             {"P", cfg.tumor.P_rate},
                                 {"A", cfg.tumor.A_rate},            {"C", cfg.tumor.C_rate},
                                 {"sigma_inf", cfg.tumor.sigma_inf}, {"sigma0", cfg.tumor_sigma0},
                                 {"nutrient_mobility", cfg.tumor.mobility_sigma.m0}};
        break;
    case ModelKind::ch:
        break;
    }
    return cfg;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw ConfigError("cannot open config file " + path);
    std::ostringstream os;
    os << in.rdbuf();
    return parse_config(os.str(), path);
}

std::string preset_config_text(const std::string& app) {
    if (app == "cho")
        return R"({
  "model": "cho",
  "mesh": {"dim": 2, "nx": 100, "ny": 100},
  "stages": [{"steps": 50000, "eps": 0.01, "tau": 0.01}],
  "initial": {"type": "random", "base": -0.5, "amplitude": 0.2},
  "cho": {"eta": 0.001},
  "output": {"dir": "out/cho", "snapshot_steps": [0, 500, 10000, 50000], "diagnostics_every": 10},
  "seed": 1
}
)";
    if (app == "segment")
        return R"({
  "model": "segment",
  "mesh": {"dim": 2, "nx": 63, "ny": 63, "lx": 63, "ly": 63},
  "stages": [{"steps": 5000, "eps": 80, "tau": 0.001}, {"steps": 5000, "eps": 0.01}],
  "segment": {"eta": 0.1, "lambda1": 0.65, "lambda2": 1.0, "image": "synthetic:shapes"},
  "output": {"dir": "out/segment", "snapshot_steps": [0, 1000, 3000, 5000, 10000], "diagnostics_every": 10},
  "seed": 1
}
)";
    if (app == "inpaint")
        return R"({
  "model": "inpaint",
  "mesh": {"dim": 2, "nx": 63, "ny": 63, "lx": 63, "ly": 63},
  "stages": [{"steps": 3000, "eps": 100, "tau": 0.1, "lambda0": 10},
             {"steps": 1000, "eps": 5, "tau": 1, "lambda0": 0.1}],
  "inpaint": {"image": "synthetic:double_stripe", "mask": "synthetic:stripe_mask", "fill": 0},
  "output": {"dir": "out/inpaint", "snapshot_steps": [0, 3000, 4000], "diagnostics_every": 10},
  "seed": 1
}
)";
    if (app == "tumor")
        return R"({
  "model": "tumor",
  "mesh": {"dim": 2, "nx": 100, "ny": 100},
  "stages": [{"steps": 18000, "eps": 0.01, "tau": 0.001}],
  "tumor": {"chi_sigma": 25, "chi": 5, "eta": 5, "P": 1, "A": 0, "C": 1, "sigma_inf": 1, "sigma0": 1},
  "output": {"dir": "out/tumor", "snapshot_steps": [0, 8000, 13000, 18000], "diagnostics_every": 10},
  "seed": 1
}
)";
    throw ConfigError("unknown app '" + app + "' (valid: cho, segment, inpaint, tumor)");
}

} // namespace rsav
