#include "rsav/mesh.hpp"

#include <cmath>
#include <set>
#include <string>

#include "rsav/error.hpp"

namespace rsav {

Mesh build_interval_mesh(double a, double b, int n_cells) {
    if (!(std::isfinite(a) && std::isfinite(b)) || !(a < b))
        throw ConfigError("interval mesh needs finite bounds with a < b");
    if (n_cells < 1)
        throw ConfigError("interval mesh needs at least one cell");

    Mesh m;
    m.dim = 1;
    m.nx = n_cells;
    m.h = (b - a) / n_cells;
    m.nodes.resize(n_cells + 1);
    for (int i = 0; i <= n_cells; ++i) {
        // last node pinned to b so the domain length is exact
        m.nodes[i] = {i == n_cells ? b : a + i * m.h, 0.0};
    }
    m.elements.reserve(n_cells);
    for (int i = 0; i < n_cells; ++i)
        m.elements.push_back({i, i + 1, -1});
    return m;
}

Mesh build_friedrichs_keller(int nx, int ny, double lx, double ly) {
    if (nx < 1 || ny < 1)
        throw ConfigError("Friedrichs-Keller mesh needs nx, ny >= 1");
    if (!(lx > 0.0 && ly > 0.0 && std::isfinite(lx) && std::isfinite(ly)))
        throw ConfigError("Friedrichs-Keller mesh needs positive finite side lengths");

    Mesh m;
    m.dim = 2;
    m.nx = nx;
    m.ny = ny;
    const double hx = lx / nx, hy = ly / ny;
    m.h = std::hypot(hx, hy);
    m.nodes.resize(static_cast<std::size_t>(nx + 1) * (ny + 1));
    for (int j = 0; j <= ny; ++j)
        for (int i = 0; i <= nx; ++i)
            m.nodes[m.grid_index(i, j)] = {i == nx ? lx : i * hx, j == ny ? ly : j * hy};

    m.elements.reserve(2 * static_cast<std::size_t>(nx) * ny);
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            const int a = m.grid_index(i, j);
            const int b = m.grid_index(i + 1, j);
            const int c = m.grid_index(i + 1, j + 1);
            const int d = m.grid_index(i, j + 1);
            m.elements.push_back({a, b, c});
            m.elements.push_back({a, c, d});
        }
    }
    return m;
}

double element_measure(const Mesh& mesh, std::size_t e) {
    const auto& el = mesh.elements[e];
    if (mesh.dim == 1)
        return mesh.nodes[el[1]][0] - mesh.nodes[el[0]][0];
    const auto& p0 = mesh.nodes[el[0]];
    const auto& p1 = mesh.nodes[el[1]];
    const auto& p2 = mesh.nodes[el[2]];
    return 0.5 * ((p1[0] - p0[0]) * (p2[1] - p0[1]) - (p2[0] - p0[0]) * (p1[1] - p0[1]));
}

double domain_measure(const Mesh& mesh) {
    double total = 0.0;
    for (std::size_t e = 0; e < mesh.num_elements(); ++e)
        total += element_measure(mesh, e);
    return total;
}

void validate_mesh(const Mesh& mesh) {
    if (mesh.dim != 1 && mesh.dim != 2)
        throw AssemblyError("mesh dimension must be 1 or 2");
    const int n = static_cast<int>(mesh.num_nodes());
    const int nv = mesh.vertices_per_element();
    for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
        const auto& el = mesh.elements[e];
        std::set<int> seen;
        for (int k = 0; k < nv; ++k) {
            if (el[k] < 0 || el[k] >= n)
                throw AssemblyError("element " + std::to_string(e) + " has an out-of-range vertex");
            seen.insert(el[k]);
        }
        if (static_cast<int>(seen.size()) != nv)
            throw AssemblyError("element " + std::to_string(e) + " repeats a vertex");
        if (!(element_measure(mesh, e) > 0.0))
            throw AssemblyError("element " + std::to_string(e) + " is degenerate or inverted");
    }
    if (mesh.dim == 1) {
        for (int i = 1; i < n; ++i)
            if (!(mesh.nodes[i][0] > mesh.nodes[i - 1][0]))
                throw AssemblyError("1D nodes must be strictly increasing");
    }
}

} // namespace rsav
