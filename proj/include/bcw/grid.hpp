#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

namespace bcw {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Space-time lattice on [-1,1]^2 x [0,2T].
///
/// The time step is pinned to the stability bound dt = (sqrt(2)/2) dx / c_max
/// and T is derived as L*dt/2, so t_L = 2T holds exactly and the half-time
/// space (0,T) is the first Lh time nodes.
struct Grid {
    int I = 0;       // spatial intervals per axis, nodes 0..I
    int L = 0;       // time intervals on [0, 2T], nodes 0..L
    double dx = 0;   // 2/I
    double dt = 0;
    double T = 0;    // half horizon, T = L*dt/2
    int Lh = 0;      // half-time node count, ceil((L+1)/2)

    int nodes_per_side() const { return I + 1; }
    int boundary_nodes() const { return 4 * I; }          // per time slice
    int full_size() const { return 4 * I * (L + 1); }     // N_full
    int half_size() const { return 4 * I * Lh; }          // N_half
    double x(int i) const { return -1.0 + i * dx; }
    double t(int l) const { return l * dt; }

    bool operator==(const Grid&) const = default;
};

/// CFL-driven grid construction. The requested half horizon is rounded down
/// to a whole number of steps: L = floor(2*T_request/dt), T = L*dt/2.
Grid build_grid(int I, double T_request, double c_max);

/// Returns the factor-2 refinement sharing every other node in space and time
/// (same T, half the spacings). Used for forward simulation.
Grid refine_grid(const Grid& g);

enum class SpaceTag { FullTime, HalfTime };

/// Which of the four sides a spatial boundary node lies on (corners have two).
enum SideBit : unsigned {
    SideXMinus = 1u,
    SideXPlus = 2u,
    SideYMinus = 4u,
    SideYPlus = 8u,
};

struct BoundaryNode {
    int i = 0, j = 0;
    unsigned sides = 0;
    bool corner() const { return sides != 0 && (sides & (sides - 1)) != 0; }
};

/// Lexicographic enumeration of boundary grid points and its inverses.
///
/// Full-space index of (l,i,j) is l*4I + slice_rank(i,j), where slice ranks
/// follow (i,j) lexicographic order. Also carries a perimeter walk order
/// (counter-clockwise from (0,0)) used for source footprints along the
/// boundary polyline.
class BoundaryIndexMap {
public:
    explicit BoundaryIndexMap(const Grid& g);

    const Grid& grid() const { return grid_; }
    int slice_count() const { return nodes_.size(); }  // 4I
    const std::vector<BoundaryNode>& nodes() const { return nodes_; }
    const BoundaryNode& node(int rank) const { return nodes_[rank]; }

    /// -1 if (i,j) is not a boundary node.
    int slice_rank(int i, int j) const;

    int index(int l, int rank) const { return l * slice_count() + rank; }
    int index(int l, int i, int j) const;
    /// (l, rank) from a full- or half-space linear index.
    std::pair<int, int> level_rank(int idx) const;

    /// Perimeter walk: walk position -> slice rank, and inverse.
    int walk_to_rank(int w) const { return walk_[w]; }
    int rank_to_walk(int rank) const { return walk_inv_[rank]; }

private:
    Grid grid_;
    std::vector<BoundaryNode> nodes_;
    std::vector<int> rank_of_;  // (I+1)^2, -1 for interior
    std::vector<int> walk_, walk_inv_;
};

/// Nodal wave speed on the spatial lattice, bounded away from 0.
class SpeedField {
public:
    SpeedField(int I, MatrixXd values);
    static SpeedField constant(int I, double c);
    template <class F>
    static SpeedField from_function(int I, F f) {
        MatrixXd v(I + 1, I + 1);
        const double dx = 2.0 / I;
        for (int i = 0; i <= I; ++i)
            for (int j = 0; j <= I; ++j)
                v(i, j) = f(-1.0 + i * dx, -1.0 + j * dx);
        return SpeedField(I, std::move(v));
    }

    int I() const { return I_; }
    double operator()(int i, int j) const { return c_(i, j); }
    const MatrixXd& values() const { return c_; }
    double c_min() const { return cmin_; }
    double c_max() const { return cmax_; }

    /// Pointwise restriction to the coarse lattice of half the resolution.
    SpeedField restrict_coarse() const;

private:
    int I_;
    MatrixXd c_;
    double cmin_, cmax_;
};

bool cfl_satisfied(const Grid& g, const SpeedField& c, double tol = 1e-12);

/// Space-time boundary vector in lexicographic order.
struct BoundaryTrace {
    SpaceTag tag = SpaceTag::FullTime;
    Grid grid;
    VectorXd values;

    BoundaryTrace() = default;
    BoundaryTrace(SpaceTag t, const Grid& g);
    BoundaryTrace(SpaceTag t, const Grid& g, VectorXd v);

    int time_levels() const { return tag == SpaceTag::FullTime ? grid.L + 1 : grid.Lh; }
    int size() const { return static_cast<int>(values.size()); }
};

/// Trapezoid space-time pairing on the lateral boundary: weight tau_l * dx,
/// tau_l = dt/2 at the first and last time level of the trace's range.
double boundary_inner_product(const BoundaryTrace& a, const BoundaryTrace& b);

/// Dense matrix with tagged row/column boundary spaces.
struct OperatorMatrix {
    SpaceTag row_space = SpaceTag::FullTime;
    SpaceTag col_space = SpaceTag::FullTime;
    Grid grid;
    MatrixXd m;

    OperatorMatrix() = default;
    OperatorMatrix(SpaceTag r, SpaceTag c, const Grid& g);
    OperatorMatrix(SpaceTag r, SpaceTag c, const Grid& g, MatrixXd mat);

    void check_dims() const;
};

int space_size(const Grid& g, SpaceTag t);

}  // namespace bcw
