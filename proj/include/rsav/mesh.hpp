#pragma once

#include <array>
#include <cstddef>
#include <vector>

namespace rsav {

/// Uniform simplicial mesh of an interval or of a rectangle.
///
/// In 1D only the first coordinate of each node and the first two vertex
/// indices of each element are meaningful.
struct Mesh {
    int dim = 1;
    std::vector<std::array<double, 2>> nodes;
    std::vector<std::array<int, 3>> elements;
    double h = 0.0;
    /// grid subdivisions; ny == 0 in 1D
    int nx = 0;
    int ny = 0;

    std::size_t num_nodes() const { return nodes.size(); }
    std::size_t num_elements() const { return elements.size(); }
    int vertices_per_element() const { return dim + 1; }
    /// node index of grid point (i, j), 2D only
    int grid_index(int i, int j) const { return j * (nx + 1) + i; }
};

Mesh build_interval_mesh(double a, double b, int n_cells);

/// Rectangle [0, lx] x [0, ly] split into nx*ny cells, each cut along its
/// lower-left to upper-right diagonal.
Mesh build_friedrichs_keller(int nx, int ny, double lx = 1.0, double ly = 1.0);

/// Length (1D) or area (2D) of one element; negative for inverted triangles.
double element_measure(const Mesh& mesh, std::size_t e);

double domain_measure(const Mesh& mesh);

/// Throws AssemblyError if any structural invariant is violated.
void validate_mesh(const Mesh& mesh);

} // namespace rsav
