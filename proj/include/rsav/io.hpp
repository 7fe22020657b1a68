#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "rsav/fem.hpp"
#include "rsav/mesh.hpp"

namespace rsav {

/// Row-major grayscale image with values in [0, 1]; row 0 is the first row stored in the file.
struct GrayscaleImage {
    int width = 0;
    int height = 0;
    std::vector<double> pixels;

    double& at(int i, int j) { return pixels[static_cast<std::size_t>(j) * width + i]; }
    double at(int i, int j) const { return pixels[static_cast<std::size_t>(j) * width + i]; }
};

/// Reads P2 or P5 files with maxval up to 65535 and rescales to [0, 1].
GrayscaleImage read_pgm(const std::filesystem::path& path);

/// Writes P5 at maxval 255 with round-half-up quantization.
void write_pgm(const GrayscaleImage& img, const std::filesystem::path& path);

/// Samples an image at the nodes of a structured 2D mesh. Pixel (i, j) maps to
/// grid node (i, j) when the sizes agree, otherwise nearest-neighbour
/// resampling is used and a message is stored in *warning.
NodalField image_to_field(const GrayscaleImage& img, const Mesh& mesh, std::string* warning = nullptr);

/// Synthetic stand-ins for the photographs used in the segmentation and inpainting demos.
/// Names: disk, shapes, double_stripe, stripe_mask.
GrayscaleImage synthetic_image(const std::string& name, int width, int height);

/// Loads "synthetic:<name>" or a PGM path.
GrayscaleImage load_image(const std::string& source, int width, int height);

/// 1D: two-column CSV (x,value). 2D: P5 heatmap mapping [min, max] to [0, 255]
/// plus a sidecar path + ".txt" holding min, max, step and time.
/// Returns the files written.
std::vector<std::filesystem::path> emit_field_snapshot(const NodalField& field, const Mesh& mesh,
                                                       const std::filesystem::path& path, long step = 0,
                                                       double time = 0.0);

struct Series {
    std::string name;
    std::vector<double> x;
    std::vector<double> y;
};

/// Static SVG line plot with axes, ticks and a legend.
void emit_line_plot(const std::vector<Series>& series, const std::filesystem::path& path,
                    const std::string& title = "", const std::string& xlabel = "", const std::string& ylabel = "");

void write_text_file(const std::filesystem::path& path, const std::string& content);

std::uint64_t fnv1a64(const std::string& bytes);
std::uint64_t fnv1a64_file(const std::filesystem::path& path);
std::string hex64(std::uint64_t v);

} // namespace rsav
