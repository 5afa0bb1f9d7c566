#pragma once

#include "bcw/grid.hpp"

#include <functional>
#include <map>
#include <string>
#include <vector>

namespace bcw {

/// Neumann datum on the lateral boundary: one value per (time level, boundary
/// node), nodes in slice-rank order. The datum is the outward normal
/// derivative of the field.
struct NeumannSource {
    Grid grid;
    MatrixXd values;  // levels x 4I

    NeumannSource() = default;
    NeumannSource(const Grid& g, int levels);
    static NeumannSource zero(const Grid& g) { return NeumannSource(g, g.L + 1); }

    int levels() const { return static_cast<int>(values.rows()); }
};

struct SimOptions {
    bool record_boundary = true;
    std::vector<int> snapshot_levels;
    std::function<double(double t, double x, double y)> body_force;  // interior forcing
    std::string dump_dir;     // when set, every frame is written as a container
    double blowup_limit = 1e12;
};

struct SimResult {
    MatrixXd boundary;                // levels x 4I (when recorded)
    std::map<int, MatrixXd> snapshots;  // level -> (I+1)x(I+1) frame
};

/// Explicit second-order scheme for u_tt = c^2 lap(u), zero initial data,
/// prescribed outward normal derivative. Interior nodes take the five-point
/// central update; boundary nodes are then solved from the one-sided
/// second-order stencil, corners as the mean of their two side formulas.
/// The number of simulated levels follows the source (>= L+1 runs past the
/// nominal horizon, which ND assembly uses).
SimResult simulate(const SpeedField& speed, const NeumannSource& source,
                   const Grid& grid, const SimOptions& opt = {});

struct SolveRecord {
    bool dirichlet_trace = true;
    std::vector<int> snapshot_levels;
    std::string dump_dir;
};

struct SolveResult {
    BoundaryTrace dirichlet;  // full-time
    std::map<int, MatrixXd> snapshots;
};

/// Spec-shaped front end over simulate(): checks CFL against the speed field
/// and returns the full-time Dirichlet trace.
SolveResult solve_ibvp(const SpeedField& speed, const NeumannSource& source,
                       const Grid& grid, const SolveRecord& record = {});

/// Discrete L2(Omega, c^-2 dx) pairing of two snapshots: tensorized trapezoid
/// with weights (1/2,1,...,1,1/2) per axis.
double snapshot_inner_product(const MatrixXd& u, const MatrixXd& v,
                              const SpeedField& speed, const Grid& grid);

}  // namespace bcw
