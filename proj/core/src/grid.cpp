#include "kerrborn/grid.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "kerrborn/errors.hpp"

namespace kerrborn {

std::string to_string(DomainKind kind) {
    return kind == DomainKind::Interval ? "interval" : "disk";
}

DomainKind domain_kind_from_string(const std::string& name) {
    if (name == "interval") return DomainKind::Interval;
    if (name == "disk") return DomainKind::Disk;
    throw ConfigError("unknown domain kind: " + name);
}

bool Grid::is_boundary(int node) const {
    return std::find(boundary.begin(), boundary.end(), node) != boundary.end();
}

int Grid::boundary_ordinal(int node) const {
    auto it = std::find(boundary.begin(), boundary.end(), node);
    return it == boundary.end() ? -1 : static_cast<int>(it - boundary.begin());
}

std::string Grid::metadata_json() const {
    std::ostringstream os;
    os << "{\"dimension\": " << dimension << ", \"resolution\": " << resolution
       << ", \"scheme\": \"" << scheme << "\", \"h\": " << h << "}";
    return os.str();
}

namespace {

Grid build_interval(int n) {
    Grid g;
    g.kind = DomainKind::Interval;
    g.dimension = 1;
    g.resolution = n;
    g.h = 1.0 / (n - 1);
    g.scheme = "fd2-interval";
    g.nodes.resize(n, 1);
    g.weights.resize(n);
    for (int i = 0; i < n; ++i) {
        g.nodes(i, 0) = i * g.h;
        g.weights(i) = (i == 0 || i == n - 1) ? g.h / 2.0 : g.h;
    }
    g.boundary = {0, n - 1};
    for (int i = 1; i < n - 1; ++i) g.interior.push_back(i);
    g.normals.resize(2, 1);
    g.normals << -1.0, 1.0;
    // a boundary "point" of the interval carries unit measure
    g.boundary_measure = Eigen::VectorXd::Ones(2);
    return g;
}

Grid build_disk(int n_radial) {
    Grid g;
    g.kind = DomainKind::Disk;
    g.dimension = 2;
    g.resolution = n_radial;
    g.n_radial = n_radial;
    g.n_angular = 4 * n_radial;
    g.scheme = "fd-polar-5pt";
    const double dr = 1.0 / n_radial;
    const double dtheta = 2.0 * std::numbers::pi / g.n_angular;
    g.h = std::max(dr, dtheta);  // angular arc at r=1 is dtheta

    const int n = 1 + n_radial * g.n_angular;
    g.nodes.resize(n, 2);
    g.weights.resize(n);
    g.nodes.row(0) << 0.0, 0.0;
    g.weights(0) = std::numbers::pi * dr * dr / 4.0;
    g.interior.push_back(0);
    for (int j = 1; j <= n_radial; ++j) {
        const double r = j * dr;
        const double w = (j == n_radial) ? r * (dr / 2.0) * dtheta : r * dr * dtheta;
        for (int m = 0; m < g.n_angular; ++m) {
            const int idx = 1 + (j - 1) * g.n_angular + m;
            const double th = m * dtheta;
            g.nodes(idx, 0) = r * std::cos(th);
            g.nodes(idx, 1) = r * std::sin(th);
            g.weights(idx) = w;
            if (j == n_radial)
                g.boundary.push_back(idx);
            else
                g.interior.push_back(idx);
        }
    }
    const int nb = static_cast<int>(g.boundary.size());
    g.normals.resize(nb, 2);
    g.boundary_measure.resize(nb);
    for (int b = 0; b < nb; ++b) {
        g.normals.row(b) = g.nodes.row(g.boundary[b]);  // unit radius on the boundary
        g.boundary_measure(b) = dtheta;                 // arc length at r=1
    }
    return g;
}

}  // namespace

Grid build_grid(DomainKind kind, int resolution) {
    if (resolution < 8)
        throw ConfigError("grid resolution must be >= 8, got " + std::to_string(resolution));
    return kind == DomainKind::Interval ? build_interval(resolution) : build_disk(resolution);
}

int locate_boundary_node(const Grid& grid, double location) {
    if (grid.kind == DomainKind::Interval) {
        if (location != 0.0 && location != 1.0)
            throw ConfigError("interval boundary location must be 0 or 1");
        return location == 0.0 ? grid.boundary.front() : grid.boundary.back();
    }
    const double two_pi = 2.0 * std::numbers::pi;
    double th = std::fmod(location, two_pi);
    if (th < 0) th += two_pi;
    const double dtheta = two_pi / grid.n_angular;
    int m = static_cast<int>(std::lround(th / dtheta)) % grid.n_angular;
    return grid.boundary[m];
}

}  // namespace kerrborn
