#include "bcw/operators.hpp"

#include <algorithm>
#include <stdexcept>

namespace bcw {

OperatorMatrix assemble_J(const Grid& g) {
    OperatorMatrix J(SpaceTag::HalfTime, SpaceTag::FullTime, g);
    const TimeFilter f(g);
    const int nb = g.boundary_nodes();
    for (int l = 0; l < g.Lh; ++l) {
        for (int k = 0; k <= g.L; ++k) {
            const double c = f.coef(l, k);
            if (c == 0.0) continue;
            J.m.block(l * nb, k * nb, nb, nb).diagonal().setConstant(c);
        }
    }
    return J;
}

OperatorMatrix assemble_R(const Grid& g) {
    OperatorMatrix R(SpaceTag::HalfTime, SpaceTag::HalfTime, g);
    const int nb = g.boundary_nodes();
    for (int l = 0; l < g.Lh; ++l)
        R.m.block(l * nb, (g.Lh - 1 - l) * nb, nb, nb).setIdentity();
    return R;
}

OperatorMatrix assemble_Pt(const Grid& g) {
    OperatorMatrix Pt(SpaceTag::HalfTime, SpaceTag::FullTime, g);
    Pt.m.leftCols(g.half_size()).setIdentity();
    return Pt;
}

MatrixXd apply_J(const Grid& g, const MatrixXd& x) {
    if (x.rows() != g.full_size())
        throw std::invalid_argument("apply_J: expected full-time rows");
    const TimeFilter f(g);
    const int nb = g.boundary_nodes();
    MatrixXd y = MatrixXd::Zero(g.half_size(), x.cols());
    for (int l = 0; l < g.Lh; ++l) {
        int k0, k1;
        if (!f.row_window(l, k0, k1)) continue;
        auto out = y.middleRows(l * nb, nb);
        for (int k = k0; k <= k1; ++k)
            out.noalias() += f.coef(l, k) * x.middleRows(k * nb, nb);
    }
    return y;
}

MatrixXd apply_R(const Grid& g, const MatrixXd& x) {
    if (x.rows() != g.half_size())
        throw std::invalid_argument("apply_R: expected half-time rows");
    const int nb = g.boundary_nodes();
    MatrixXd y(x.rows(), x.cols());
    for (int l = 0; l < g.Lh; ++l)
        y.middleRows(l * nb, nb) = x.middleRows((g.Lh - 1 - l) * nb, nb);
    return y;
}

OperatorMatrix assemble_K(const MatrixXd& nd_full, const Grid& g) {
    const int N = g.full_size();
    const int Nh = g.half_size();
    const int nb = g.boundary_nodes();
    if (nd_full.rows() != N || nd_full.cols() != N)
        throw std::invalid_argument("assemble_K: ND matrix has wrong shape");
    const TimeFilter f(g);

    // Term 1: J * Lambda * Pt^t, i.e. J applied to the first Nh columns.
    // Column panels keep the accumulator in cache across the k sweep.
    OperatorMatrix K(SpaceTag::HalfTime, SpaceTag::HalfTime, g);
    const int panel = 1024;
    for (int c0 = 0; c0 < Nh; c0 += panel) {
        const int pc = std::min(panel, Nh - c0);
        for (int l = 0; l < g.Lh; ++l) {
            int k0, k1;
            if (!f.row_window(l, k0, k1)) continue;
            auto out = K.m.block(l * nb, c0, nb, pc);
            for (int k = k0; k <= k1; ++k)
                out.noalias() += f.coef(l, k) * nd_full.block(k * nb, c0, nb, pc);
        }
    }

    // Term 2: R * (L_T * (R J Pt^t)). The inner factor has block (r,k)
    // equal to coef(Lh-1-r, k) * I for k < Lh, so the product is a weighted
    // combination of block columns of L_T.
    const auto lambda_T = nd_full.topLeftCorner(Nh, Nh);
    MatrixXd M = MatrixXd::Zero(Nh, Nh);
    for (int k = 0; k < g.Lh; ++k) {
        auto out = M.middleCols(k * nb, nb);
        for (int r = 0; r < g.Lh; ++r) {
            const double c = f.coef(g.Lh - 1 - r, k);
            if (c == 0.0) continue;
            out.noalias() += c * lambda_T.middleCols(r * nb, nb);
        }
    }
    for (int l = 0; l < g.Lh; ++l)
        K.m.middleRows(l * nb, nb).noalias() -= M.middleRows((g.Lh - 1 - l) * nb, nb);
    return K;
}

BoundaryTrace apply_B(const MatrixXd& nd_full, const Grid& g,
                      const BoundaryTrace& dirichlet_full,
                      const BoundaryTrace& neumann_full) {
    if (dirichlet_full.tag != SpaceTag::FullTime || neumann_full.tag != SpaceTag::FullTime)
        throw std::invalid_argument("apply_B: traces must be full-time");
    if (!(dirichlet_full.grid == g) || !(neumann_full.grid == g))
        throw std::invalid_argument("apply_B: traces on a different grid");
    const int Nh = g.half_size();

    VectorXd jd = apply_J(g, dirichlet_full.values);
    VectorXd jn = apply_J(g, neumann_full.values);
    VectorXd rjn = apply_R(g, jn);
    VectorXd t(Nh);
    t.noalias() = nd_full.topLeftCorner(Nh, Nh) * rjn;
    VectorXd rt = apply_R(g, t);
    return BoundaryTrace(SpaceTag::HalfTime, g, jd - rt);
}

}  // namespace bcw
