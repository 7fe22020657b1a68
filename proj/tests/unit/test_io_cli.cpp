#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <random>
#include <sstream>
#include <sys/wait.h>

#include "rsav/app.hpp"
#include "rsav/config.hpp"
#include "rsav/error.hpp"
#include "rsav/io.hpp"
#include "rsav/mesh.hpp"

namespace fs = std::filesystem;
using namespace rsav;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("rsav_io_test_" + std::to_string(::getpid())) / name;
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

void spit(const fs::path& p, const std::string& s) {
    std::ofstream out(p, std::ios::binary);
    out << s;
}

int run_cli(const std::string& args, const fs::path& log) {
    const std::string cmd = std::string("\"") + RSAV_CLI_PATH + "\" " + args + " > \"" + log.string() + "\" 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::size_t count_lines(const std::string& s) {
    std::size_t n = 0;
    for (char c : s)
        n += c == '\n';
    return n;
}

const char* kSmallCh = R"({
  "model": "ch",
  "mesh": {"dim": 2, "nx": 8, "ny": 8},
  "scheme": {"eps": 0.1, "tau": 0.01},
  "stages": [{"steps": 20}],
  "initial": {"type": "random", "base": 0.0, "amplitude": 0.2},
  "output": {"snapshot_steps": [0, 20]},
  "seed": 7
})";

} // namespace

// ---------------------------------------------------------------- PGM

TEST(Pgm, HandWrittenP2Rescaled) {
    const fs::path d = scratch("p2");
    spit(d / "a.pgm", "P2\n# comment\n3 2\n255\n0 127 255\n255 127 0\n");
    const GrayscaleImage img = read_pgm(d / "a.pgm");
    ASSERT_EQ(img.width, 3);
    ASSERT_EQ(img.height, 2);
    EXPECT_DOUBLE_EQ(img.at(0, 0), 0.0);
    EXPECT_DOUBLE_EQ(img.at(1, 0), 127.0 / 255.0);
    EXPECT_DOUBLE_EQ(img.at(2, 0), 1.0);
    EXPECT_DOUBLE_EQ(img.at(0, 1), 1.0);
    EXPECT_DOUBLE_EQ(img.at(2, 1), 0.0);
}

TEST(Pgm, SixteenBitP5) {
    const fs::path d = scratch("p5_16");
    std::string s = "P5\n2 1\n65535\n";
    s += std::string("\x00\x00\xff\xff", 4);
    spit(d / "b.pgm", s);
    const GrayscaleImage img = read_pgm(d / "b.pgm");
    EXPECT_DOUBLE_EQ(img.at(0, 0), 0.0);
    EXPECT_DOUBLE_EQ(img.at(1, 0), 1.0);
}

TEST(Pgm, RoundTripWithinQuantization) {
    const fs::path d = scratch("roundtrip");
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    GrayscaleImage img{17, 11, {}};
    for (int k = 0; k < 17 * 11; ++k)
        img.pixels.push_back(u(rng));
    write_pgm(img, d / "r.pgm");
    const GrayscaleImage back = read_pgm(d / "r.pgm");
    ASSERT_EQ(back.width, 17);
    ASSERT_EQ(back.height, 11);
    for (std::size_t k = 0; k < img.pixels.size(); ++k)
        EXPECT_LE(std::abs(back.pixels[k] - img.pixels[k]), 1.0 / 255.0);
    EXPECT_EQ(slurp(d / "r.pgm").substr(0, 2), "P5");
}

TEST(Pgm, RoundHalfUp) {
    const fs::path d = scratch("halfup");
    GrayscaleImage img{2, 1, {0.5 / 255.0, 1.5 / 255.0}};
    write_pgm(img, d / "h.pgm");
    const GrayscaleImage back = read_pgm(d / "h.pgm");
    EXPECT_DOUBLE_EQ(back.pixels[0], 1.0 / 255.0);
    EXPECT_DOUBLE_EQ(back.pixels[1], 2.0 / 255.0);
}

TEST(Pgm, AllBlack) {
    const fs::path d = scratch("black");
    write_pgm(GrayscaleImage{5, 4, std::vector<double>(20, 0.0)}, d / "k.pgm");
    for (double v : read_pgm(d / "k.pgm").pixels)
        EXPECT_EQ(v, 0.0);
}

TEST(Pgm, MalformedAndTruncated) {
    const fs::path d = scratch("bad");
    spit(d / "magic.pgm", "P3\n2 2\n255\n0 0 0 0\n");
    spit(d / "header.pgm", "P2\n2 x\n255\n0 0 0 0\n");
    spit(d / "maxval.pgm", "P2\n2 2\n70000\n0 0 0 0\n");
    spit(d / "short2.pgm", "P2\n2 2\n255\n0 0 0\n");
    spit(d / "short5.pgm", std::string("P5\n2 2\n255\n\x01\x02", 14));
    spit(d / "range.pgm", "P2\n2 1\n10\n3 11\n");
    for (const char* f : {"magic.pgm", "header.pgm", "maxval.pgm", "short2.pgm", "short5.pgm", "range.pgm"})
        EXPECT_THROW(read_pgm(d / f), IoError) << f;
    EXPECT_THROW(read_pgm(d / "missing.pgm"), IoError);
}

// ---------------------------------------------------------------- snapshots

TEST(Snapshot, ConstantFieldIsMidGray) {
    const fs::path d = scratch("const");
    const Mesh m = build_friedrichs_keller(4, 3);
    const auto files = emit_field_snapshot(NodalField(m.num_nodes(), 0.3), m, d / "c.pgm", 12, 0.5);
    ASSERT_EQ(files.size(), 2u);
    const GrayscaleImage img = read_pgm(d / "c.pgm");
    ASSERT_EQ(img.width, 5);
    ASSERT_EQ(img.height, 4);
    for (double v : img.pixels)
        EXPECT_DOUBLE_EQ(v, 128.0 / 255.0);
    const std::string side = slurp(d / "c.pgm.txt");
    EXPECT_NE(side.find("min 0.29999999999999999\n"), std::string::npos);
    EXPECT_NE(side.find("step 12\n"), std::string::npos);
    EXPECT_NE(side.find("time 0.5\n"), std::string::npos);
}

TEST(Snapshot, TwoPhaseIsBlackAndWhite) {
    const fs::path d = scratch("twophase");
    const Mesh m = build_friedrichs_keller(6, 6);
    NodalField phi(m.num_nodes());
    for (std::size_t k = 0; k < phi.size(); ++k)
        phi[k] = m.nodes[k][0] < 0.5 ? -1.0 : 1.0;
    emit_field_snapshot(phi, m, d / "t.pgm");
    const GrayscaleImage img = read_pgm(d / "t.pgm");
    for (int j = 0; j <= 6; ++j)
        for (int i = 0; i <= 6; ++i)
            EXPECT_EQ(img.at(i, j), phi[m.grid_index(i, j)] < 0 ? 0.0 : 1.0);
    const std::string side = slurp(d / "t.pgm.txt");
    EXPECT_EQ(side.rfind("min -1\nmax 1\n", 0), 0u);
}

TEST(Snapshot, LoadedImageRoundTrips) {
    const fs::path d = scratch("imgsnap");
    const Mesh m = build_friedrichs_keller(20, 14);
    GrayscaleImage img = synthetic_image("shapes", 21, 15);
    img.pixels[0] = 0.0;
    img.pixels[1] = 1.0;
    emit_field_snapshot(image_to_field(img, m), m, d / "s.pgm");
    const GrayscaleImage back = read_pgm(d / "s.pgm");
    for (std::size_t k = 0; k < img.pixels.size(); ++k)
        EXPECT_LE(std::abs(back.pixels[k] - img.pixels[k]), 1.0 / 255.0);
}

TEST(Snapshot, OneDimensionalCsv) {
    const fs::path d = scratch("csv1d");
    const Mesh m = build_interval_mesh(0.0, 1.0, 4);
    emit_field_snapshot(NodalField{0.0, 0.25, 0.5, 0.75, 1.0}, m, d / "f.csv");
    EXPECT_EQ(slurp(d / "f.csv"), "x,value\n0,0\n0.25,0.25\n0.5,0.5\n0.75,0.75\n1,1\n");
}

TEST(Snapshot, WrongLengthRejected) {
    const fs::path d = scratch("len");
    const Mesh m = build_friedrichs_keller(2, 2);
    EXPECT_THROW(emit_field_snapshot(NodalField(3, 0.0), m, d / "x.pgm"), InputError);
}

// ---------------------------------------------------------------- line plots

TEST(LinePlot, EmptyInputWritesNothing) {
    const fs::path d = scratch("plot_empty");
    EXPECT_THROW(emit_line_plot({}, d / "a.svg"), InputError);
    EXPECT_FALSE(fs::exists(d / "a.svg"));
    EXPECT_THROW(emit_line_plot({Series{"e", {}, {}}}, d / "b.svg"), InputError);
    EXPECT_FALSE(fs::exists(d / "b.svg"));
    EXPECT_THROW(emit_line_plot({Series{"e", {0, 1}, {1}}}, d / "c.svg"), InputError);
    EXPECT_FALSE(fs::exists(d / "c.svg"));
}

TEST(LinePlot, SvgHasAxesAndLegend) {
    const fs::path d = scratch("plot");
    Series z{"zeta", {}, {}};
    for (int k = 0; k < 20; ++k) {
        z.x.push_back(0.1 * k);
        z.y.push_back(k < 12 ? 0.0 : 1.0);
    }
    emit_line_plot({z, Series{"E & co", {0, 1}, {2, 3}}}, d / "z.svg", "title <x>", "t", "zeta");
    const std::string s = slurp(d / "z.svg");
    EXPECT_EQ(s.rfind("<?xml", 0), 0u);
    EXPECT_NE(s.find("<svg"), std::string::npos);
    EXPECT_NE(s.find("<polyline"), std::string::npos);
    EXPECT_NE(s.find("zeta"), std::string::npos);
    EXPECT_NE(s.find("E &amp; co"), std::string::npos);
    EXPECT_NE(s.find("title &lt;x&gt;"), std::string::npos);
    EXPECT_NE(s.find("</svg>"), std::string::npos);
}

// ---------------------------------------------------------------- images

TEST(Images, SyntheticValuesInRange) {
    for (const char* n : {"disk", "shapes", "double_stripe", "stripe_mask"}) {
        const GrayscaleImage img = synthetic_image(n, 64, 64);
        EXPECT_EQ(img.pixels.size(), 64u * 64u);
        double lo = 1.0, hi = 0.0;
        for (double v : img.pixels) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        EXPECT_GE(lo, 0.0) << n;
        EXPECT_LE(hi, 1.0) << n;
        EXPECT_LT(lo, hi) << n;
    }
    EXPECT_THROW(synthetic_image("cow", 64, 64), ConfigError);
    EXPECT_THROW(load_image("synthetic:cow", 64, 64), ConfigError);
}

TEST(Images, ExactGridMapsPixelToNode) {
    const Mesh m = build_friedrichs_keller(3, 2);
    GrayscaleImage img{4, 3, {}};
    for (int k = 0; k < 12; ++k)
        img.pixels.push_back(k / 11.0);
    std::string warning;
    const NodalField f = image_to_field(img, m, &warning);
    EXPECT_TRUE(warning.empty());
    for (int j = 0; j < 3; ++j)
        for (int i = 0; i < 4; ++i)
            EXPECT_EQ(f[m.grid_index(i, j)], img.at(i, j));
}

TEST(Images, ResampleWarns) {
    const Mesh m = build_friedrichs_keller(4, 4);
    const GrayscaleImage img = synthetic_image("disk", 9, 9);
    std::string warning;
    const NodalField f = image_to_field(img, m, &warning);
    EXPECT_NE(warning.find("nearest"), std::string::npos);
    for (int j = 0; j <= 4; ++j)
        for (int i = 0; i <= 4; ++i)
            EXPECT_EQ(f[m.grid_index(i, j)], img.at(2 * i, 2 * j));
    EXPECT_THROW(image_to_field(img, build_interval_mesh(0, 1, 4)), ConfigError);
}

// ---------------------------------------------------------------- config

TEST(Config, MinimalConfigGetsDefaults) {
    const RunConfig c = parse_config(R"({"model": "ch", "mesh": {"dim": 1, "cells": 10}})");
    EXPECT_EQ(c.model, ModelKind::ch);
    EXPECT_EQ(c.scheme.C0, 1.0);
    EXPECT_EQ(c.scheme.solver_tol, 1e-12);
    EXPECT_TRUE(c.scheme.zeta.optimal);
    ASSERT_EQ(c.stages.size(), 1u);
    EXPECT_GE(c.stages[0].steps, 1);
    EXPECT_GE(c.diagnostics_every, 1);
    EXPECT_TRUE(c.resolved.contains("scheme"));
    EXPECT_EQ(c.resolved["mesh"]["cells"], 10);
}

TEST(Config, ChoTauEtaBoundRejected) {
    try {
        parse_config(R"({"model": "cho", "mesh": {"nx": 4}, "cho": {"eta": 10},
                         "stages": [{"steps": 1, "eps": 0.1, "tau": 0.1}]})");
        FAIL() << "expected ConfigError";
    } catch (const ConfigError& e) {
        EXPECT_NE(std::string(e.what()).find("mean recursion"), std::string::npos);
    }
}

TEST(Config, UnknownModelListsValidOnes) {
    try {
        parse_config(R"({"model": "navier_stokes", "mesh": {"nx": 4}})");
        FAIL() << "expected ConfigError";
    } catch (const ConfigError& e) {
        const std::string w = e.what();
        for (const char* n : {"ch", "cho", "segment", "inpaint", "tumor"})
            EXPECT_NE(w.find(n), std::string::npos);
    }
}

TEST(Config, ParseErrorCarriesLine) {
    try {
        parse_config("{\n  \"model\": \"ch\",\n  \"mesh\": {\"nx\": 4,}\n}", "bad.json");
        FAIL() << "expected ConfigError";
    } catch (const ConfigError& e) {
        EXPECT_EQ(std::string(e.what()).rfind("bad.json:3:", 0), 0u) << e.what();
    }
}

TEST(Config, ValidationNamesField) {
    auto msg = [](const std::string& text) {
        try {
            parse_config(text);
        } catch (const ConfigError& e) {
            return std::string(e.what());
        }
        return std::string();
    };
    EXPECT_NE(msg(R"({"model": "ch", "mesh": {"nx": 4, "bogus": 1}})").find("bogus"), std::string::npos);
    EXPECT_NE(msg(R"({"model": "ch", "mesh": {"nx": 4}, "stages": [{"steps": 0}]})").find("stages[0].steps"),
              std::string::npos);
    EXPECT_NE(msg(R"({"model": "ch", "mesh": {"nx": 4, "lx": -1}})").find("mesh.lx"), std::string::npos);
    EXPECT_NE(msg(R"({"model": "ch", "mesh": {"nx": 4}, "scheme": {"zeta": 2}})").find("scheme.zeta"),
              std::string::npos);
    EXPECT_NE(msg(R"({"model": "segment", "mesh": {"dim": 1}})").find("mesh.dim"), std::string::npos);
    EXPECT_NE(msg(R"({"model": "ch", "mesh": {"nx": "four"}})").find("mesh.nx"), std::string::npos);
    EXPECT_NE(msg(R"({"model": "ch", "mesh": {"nx": 4}, "output": {"diagnostics_every": 0}})")
                  .find("output.diagnostics_every"),
              std::string::npos);
    EXPECT_THROW(load_config("/nonexistent/rsav.json"), ConfigError);
}

TEST(Config, PresetsParse) {
    for (const char* a : {"cho", "segment", "inpaint", "tumor"}) {
        const RunConfig c = parse_config(preset_config_text(a), a);
        EXPECT_EQ(to_string(c.model), a);
        EXPECT_FALSE(c.stages.empty());
    }
    const RunConfig cho = parse_config(preset_config_text("cho"));
    EXPECT_EQ(cho.total_steps(), 50000);
    EXPECT_EQ(cho.snapshot_steps, (std::vector<long>{0, 500, 10000, 50000}));
    EXPECT_EQ(parse_config(preset_config_text("segment")).stages.size(), 2u);
    EXPECT_EQ(parse_config(preset_config_text("inpaint")).stages.size(), 2u);
    EXPECT_THROW(preset_config_text("cow"), ConfigError);
}

TEST(Config, MeshLengthsReachTheMesh) {
    const RunConfig c = parse_config(R"({"model": "ch", "mesh": {"nx": 4, "lx": 8, "ly": 2}})");
    EXPECT_EQ(c.mesh.lx, 8.0);
    EXPECT_EQ(c.mesh.ly, 2.0);
    EXPECT_EQ(parse_config(R"({"model": "ch", "mesh": {"nx": 4, "lx": 3}})").mesh.ly, 3.0);
}

// ---------------------------------------------------------------- runs

TEST(Run, DeterministicOutputsAndManifest) {
    const fs::path a = scratch("det_a"), b = scratch("det_b");
    RunConfig c = parse_config(kSmallCh);
    c.out_dir = a.string();
    const RunSummary sa = run_simulation(c);
    c.out_dir = b.string();
    run_simulation(c);
    EXPECT_EQ(sa.steps, 20);
    const std::string da = slurp(a / "diagnostics.csv");
    ASSERT_FALSE(da.empty());
    EXPECT_EQ(da, slurp(b / "diagnostics.csv"));
    EXPECT_EQ(count_lines(da), 1u + 21u);
    EXPECT_EQ(slurp(a / "snapshots" / "phi_0000020.pgm"), slurp(b / "snapshots" / "phi_0000020.pgm"));

    const nlohmann::json m = nlohmann::json::parse(slurp(a / "manifest.json"));
    EXPECT_EQ(m["config"]["seed"], 7);
    EXPECT_EQ(m["config"]["mesh"]["nx"], 8);
    bool saw_diag = false;
    for (const auto& art : m["artifacts"]) {
        const fs::path p = a / art["path"].get<std::string>();
        ASSERT_TRUE(fs::exists(p)) << p;
        EXPECT_EQ(art["fnv1a64"].get<std::string>(), hex64(fnv1a64_file(p)));
        saw_diag |= art["path"] == "diagnostics.csv";
    }
    EXPECT_TRUE(saw_diag);
}

TEST(Run, SeedChangesRandomStart) {
    const fs::path a = scratch("seed_a"), b = scratch("seed_b");
    RunConfig c = parse_config(kSmallCh);
    c.out_dir = a.string();
    run_simulation(c);
    c.seed = 8;
    c.out_dir = b.string();
    run_simulation(c);
    EXPECT_NE(slurp(a / "diagnostics.csv"), slurp(b / "diagnostics.csv"));
}

TEST(Run, OutDirEnvironmentOverride) {
    const fs::path d = scratch("envout");
    ::setenv("RSAV_OUT_DIR", d.string().c_str(), 1);
    EXPECT_EQ(resolve_out_dir("ignored"), d);
    RunConfig c = parse_config(kSmallCh);
    c.out_dir = (d / "not_used").string();
    run_simulation(c);
    ::unsetenv("RSAV_OUT_DIR");
    EXPECT_TRUE(fs::exists(d / "diagnostics.csv"));
    EXPECT_FALSE(fs::exists(d / "not_used"));
    EXPECT_EQ(resolve_out_dir("x"), fs::path("x"));
}

TEST(Fnv, KnownVectors) {
    EXPECT_EQ(fnv1a64(""), 0xcbf29ce484222325ULL);
    EXPECT_EQ(fnv1a64("a"), 0xaf63dc4c8601ec8cULL);
    EXPECT_EQ(hex64(0xcbf29ce484222325ULL), "cbf29ce484222325");
}

// ---------------------------------------------------------------- CLI

TEST(Cli, ConvergenceTwoRows) {
    const fs::path d = scratch("cli_conv");
    const int rc = run_cli("convergence --solution cos_linear --taus 0.1,0.05 --zetas 1 --h 0.001 --T 5 --out \"" +
                               d.string() + "\"",
                           d / "log.txt");
    ASSERT_EQ(rc, 0) << slurp(d / "log.txt");
    const std::string csv = slurp(d / "convergence_cos_linear.csv");
    EXPECT_EQ(count_lines(csv), 3u) << csv;
    EXPECT_TRUE(fs::exists(d / "manifest.json"));
    EXPECT_TRUE(fs::exists(d / "history_cos_linear_tau0.1_z1.csv"));
    EXPECT_TRUE(fs::exists(d / "history_cos_linear_tau0.05_z1.csv"));
}

TEST(Cli, UnknownSubcommandPrintsUsage) {
    const fs::path d = scratch("cli_bad");
    EXPECT_EQ(run_cli("frobnicate", d / "log.txt"), 1);
    EXPECT_NE(slurp(d / "log.txt").find("convergence"), std::string::npos);
    EXPECT_EQ(run_cli("", d / "log2.txt"), 1);
}

TEST(Cli, ConfigErrorExitsOne) {
    const fs::path d = scratch("cli_cfg");
    spit(d / "bad.json", R"({"model": "cho", "mesh": {"nx": 4}, "cho": {"eta": 200}})");
    EXPECT_EQ(run_cli("run --config \"" + (d / "bad.json").string() + "\"", d / "log.txt"), 1);
    EXPECT_NE(slurp(d / "log.txt").find("error"), std::string::npos);
    EXPECT_EQ(run_cli("run --config \"" + (d / "missing.json").string() + "\"", d / "log2.txt"), 1);
    EXPECT_EQ(run_cli("convergence --taus 0.1,x --out \"" + d.string() + "\"", d / "log3.txt"), 1);
    EXPECT_EQ(run_cli("app cow", d / "log4.txt"), 1);
}

TEST(Cli, RunWritesOutputs) {
    const fs::path d = scratch("cli_run");
    spit(d / "c.json", kSmallCh);
    const fs::path out = d / "out";
    ASSERT_EQ(run_cli("run --quiet --config \"" + (d / "c.json").string() + "\" --out \"" + out.string() + "\"",
                      d / "log.txt"),
              0)
        << slurp(d / "log.txt");
    for (const char* f : {"diagnostics.csv", "manifest.json", "energy.svg", "zeta.svg", "snapshots/phi_0000000.pgm",
                          "snapshots/phi_0000020.pgm"})
        EXPECT_TRUE(fs::exists(out / f)) << f;
}

TEST(Cli, PrintConfigMatchesPreset) {
    const fs::path d = scratch("cli_print");
    ASSERT_EQ(run_cli("app tumor --print-config", d / "p.json"), 0);
    EXPECT_EQ(slurp(d / "p.json"), preset_config_text("tumor"));
}
