#pragma once

#include "bcw/grid.hpp"

namespace bcw {

/// Block-coefficient view of the smoothing operator J: row l integrates
/// (1/2) * int_{t_l}^{t_{L-l}} by the trapezoid rule, so block (l,k) is
/// coef(l,k) * Identity(4I) with coef dt/4 at the window ends and dt/2
/// inside. Row L/2 of an even-L grid is the degenerate empty window (zero).
struct TimeFilter {
    Grid grid;

    explicit TimeFilter(const Grid& g) : grid(g) {}

    double coef(int l, int k) const {
        const int L = grid.L;
        if (l < 0 || l >= grid.Lh) return 0.0;
        if (k < l || k > L - l || l == L - l) return 0.0;
        return (k == l || k == L - l) ? grid.dt / 4 : grid.dt / 2;
    }

    /// Inclusive column-block range [l, L-l] of row block l (empty if degenerate).
    bool row_window(int l, int& k0, int& k1) const {
        k0 = l;
        k1 = grid.L - l;
        return k0 < k1;
    }
};

/// Dense matrix forms (used by tests and small grids; large pipelines apply
/// the operators structurally).
OperatorMatrix assemble_J(const Grid& g);   // half x full
OperatorMatrix assemble_R(const Grid& g);   // half x half, anti-diagonal blocks
OperatorMatrix assemble_Pt(const Grid& g);  // half x full, [I | 0]

/// y = J x for a full-time stacked matrix/vector (rows = N_full).
MatrixXd apply_J(const Grid& g, const MatrixXd& x);
/// y = R x on the half-time space (block-row reversal).
MatrixXd apply_R(const Grid& g, const MatrixXd& x);

/// Connecting operator [K] = [J][L][Pt]^t - [R][L_T][R][J][Pt]^t from the
/// full ND matrix, exploiting the block structure of J, R, Pt (no dense
/// products with J are formed). L_T is the top-left half x half restriction.
OperatorMatrix assemble_K(const MatrixXd& nd_full, const Grid& g);

/// Matrix-free application of B = J T_D - R L_T R J T_N to the stacked
/// boundary traces of one harmonic function. Returns a half-time trace.
BoundaryTrace apply_B(const MatrixXd& nd_full, const Grid& g,
                      const BoundaryTrace& dirichlet_full,
                      const BoundaryTrace& neumann_full);

/// Operator bundle for one ND matrix. J/R/Pt are cheap structure; K is dense.
struct OperatorSet {
    Grid grid;
    TimeFilter J;
    OperatorMatrix K;

    explicit OperatorSet(const MatrixXd& nd_full, const Grid& g)
        : grid(g), J(g), K(assemble_K(nd_full, g)) {}
};

}  // namespace bcw
