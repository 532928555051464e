#ifndef KERRBORN_GRID_HPP
#define KERRBORN_GRID_HPP

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace kerrborn {

enum class DomainKind { Interval, Disk };

std::string to_string(DomainKind kind);
DomainKind domain_kind_from_string(const std::string& name);

/// Discretization of Omega = [0,1] or the unit disk.
///
/// Interval: uniform nodes x_i = i*h, trapezoid quadrature weights.
/// Disk: polar grid with a single center node, rings r_j = j*dr and
/// n_angular equispaced angles; weights are the polar cell areas.
struct Grid {
    DomainKind kind = DomainKind::Interval;
    int dimension = 1;
    int resolution = 0;                 // interval: node count; disk: radial intervals
    Eigen::MatrixXd nodes;              // num_nodes x dimension
    Eigen::VectorXd weights;            // cell quadrature weights, sum ~ |Omega|
    std::vector<int> interior;          // interior node indices
    std::vector<int> boundary;          // boundary node indices
    Eigen::MatrixXd normals;            // boundary.size() x dimension, unit outward
    Eigen::VectorXd boundary_measure;   // boundary quadrature weight per boundary node
    double h = 0.0;                     // mesh parameter
    std::string scheme;                 // discretization metadata
    int n_radial = 0;                   // disk only
    int n_angular = 0;                  // disk only

    int num_nodes() const { return static_cast<int>(nodes.rows()); }
    bool is_boundary(int node) const;
    /// Position of `node` within the boundary index list, -1 if interior.
    int boundary_ordinal(int node) const;
    std::string metadata_json() const;
};

/// Builds the grid. `resolution` is the node count on the interval and the
/// number of radial intervals on the disk; must be >= 8.
Grid build_grid(DomainKind kind, int resolution);

/// Boundary node nearest to a domain-intrinsic boundary location:
/// interval: location 0 or 1 (endpoint x); disk: angle in [0, 2pi).
int locate_boundary_node(const Grid& grid, double location);

}  // namespace kerrborn

#endif
