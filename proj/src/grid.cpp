#include "bcw/grid.hpp"

#include <cmath>
#include <stdexcept>

namespace bcw {

Grid build_grid(int I, double T_request, double c_max) {
    if (I < 2) throw std::invalid_argument("build_grid: I must be >= 2");
    if (!(T_request > 0)) throw std::invalid_argument("build_grid: T must be positive");
    if (!(c_max > 0)) throw std::invalid_argument("build_grid: c_max must be positive");

    Grid g;
    g.I = I;
    g.dx = 2.0 / I;
    g.dt = (std::sqrt(2.0) / 2.0) * g.dx / c_max;
    // floor with a small guard so an exactly-integer ratio is not lost to
    // rounding; dt stays at the stability bound and T lands on a grid node.
    g.L = static_cast<int>(std::floor(2.0 * T_request / g.dt + 1e-9));
    if (g.L < 2) throw std::invalid_argument("build_grid: horizon shorter than two steps");
    g.T = 0.5 * g.L * g.dt;
    g.Lh = (g.L + 2) / 2;  // ceil((L+1)/2)
    return g;
}

Grid refine_grid(const Grid& g) {
    Grid f;
    f.I = 2 * g.I;
    f.L = 2 * g.L;
    f.dx = 0.5 * g.dx;
    f.dt = 0.5 * g.dt;
    f.T = g.T;
    f.Lh = (f.L + 2) / 2;
    return f;
}

BoundaryIndexMap::BoundaryIndexMap(const Grid& g) : grid_(g) {
    const int I = g.I;
    rank_of_.assign((I + 1) * (I + 1), -1);
    for (int i = 0; i <= I; ++i) {
        for (int j = 0; j <= I; ++j) {
            if (i != 0 && i != I && j != 0 && j != I) continue;
            BoundaryNode n;
            n.i = i;
            n.j = j;
            if (i == 0) n.sides |= SideXMinus;
            if (i == I) n.sides |= SideXPlus;
            if (j == 0) n.sides |= SideYMinus;
            if (j == I) n.sides |= SideYPlus;
            rank_of_[i * (I + 1) + j] = static_cast<int>(nodes_.size());
            nodes_.push_back(n);
        }
    }

    // Counter-clockwise perimeter walk starting at (0,0):
    // side y=-1 left to right, x=+1 bottom to top, y=+1 right to left,
    // x=-1 top to bottom.
    walk_.reserve(nodes_.size());
    for (int i = 0; i < I; ++i) walk_.push_back(slice_rank(i, 0));
    for (int j = 0; j < I; ++j) walk_.push_back(slice_rank(I, j));
    for (int i = I; i > 0; --i) walk_.push_back(slice_rank(i, I));
    for (int j = I; j > 0; --j) walk_.push_back(slice_rank(0, j));
    walk_inv_.assign(nodes_.size(), -1);
    for (size_t w = 0; w < walk_.size(); ++w) walk_inv_[walk_[w]] = static_cast<int>(w);
}

int BoundaryIndexMap::slice_rank(int i, int j) const {
    const int I = grid_.I;
    if (i < 0 || i > I || j < 0 || j > I) return -1;
    return rank_of_[i * (I + 1) + j];
}

int BoundaryIndexMap::index(int l, int i, int j) const {
    const int r = slice_rank(i, j);
    if (r < 0) throw std::invalid_argument("BoundaryIndexMap: not a boundary node");
    return index(l, r);
}

std::pair<int, int> BoundaryIndexMap::level_rank(int idx) const {
    const int nb = slice_count();
    return {idx / nb, idx % nb};
}

SpeedField::SpeedField(int I, MatrixXd values) : I_(I), c_(std::move(values)) {
    if (c_.rows() != I + 1 || c_.cols() != I + 1)
        throw std::invalid_argument("SpeedField: values must be (I+1)x(I+1)");
    cmin_ = c_.minCoeff();
    cmax_ = c_.maxCoeff();
    if (!(cmin_ > 0) || !std::isfinite(cmax_))
        throw std::invalid_argument("SpeedField: speed must be positive and finite");
}

SpeedField SpeedField::constant(int I, double c) {
    return SpeedField(I, MatrixXd::Constant(I + 1, I + 1, c));
}

SpeedField SpeedField::restrict_coarse() const {
    if (I_ % 2 != 0) throw std::invalid_argument("SpeedField: odd I cannot be restricted");
    const int Ic = I_ / 2;
    MatrixXd v(Ic + 1, Ic + 1);
    for (int i = 0; i <= Ic; ++i)
        for (int j = 0; j <= Ic; ++j) v(i, j) = c_(2 * i, 2 * j);
    return SpeedField(Ic, std::move(v));
}

bool cfl_satisfied(const Grid& g, const SpeedField& c, double tol) {
    return c.c_max() * g.dt / g.dx <= std::sqrt(2.0) / 2.0 + tol;
}

BoundaryTrace::BoundaryTrace(SpaceTag t, const Grid& g)
    : tag(t), grid(g), values(VectorXd::Zero(space_size(g, t))) {}

BoundaryTrace::BoundaryTrace(SpaceTag t, const Grid& g, VectorXd v)
    : tag(t), grid(g), values(std::move(v)) {
    if (values.size() != space_size(grid, tag))
        throw std::invalid_argument("BoundaryTrace: length does not match tagged space");
}

double boundary_inner_product(const BoundaryTrace& a, const BoundaryTrace& b) {
    if (a.tag != b.tag || !(a.grid == b.grid))
        throw std::invalid_argument("boundary_inner_product: mismatched spaces");
    const int nb = a.grid.boundary_nodes();
    const int nt = a.time_levels();
    const double dx = a.grid.dx;
    const double dt = a.grid.dt;
    double sum = 0.0;
    for (int l = 0; l < nt; ++l) {
        const double tau = (l == 0 || l == nt - 1) ? dt / 2 : dt;
        double slice = 0.0;
        for (int k = 0; k < nb; ++k) {
            const int idx = l * nb + k;
            slice += a.values[idx] * b.values[idx];
        }
        sum += tau * dx * slice;
    }
    return sum;
}

int space_size(const Grid& g, SpaceTag t) {
    return t == SpaceTag::FullTime ? g.full_size() : g.half_size();
}

OperatorMatrix::OperatorMatrix(SpaceTag r, SpaceTag c, const Grid& g)
    : row_space(r), col_space(c), grid(g),
      m(MatrixXd::Zero(space_size(g, r), space_size(g, c))) {}

OperatorMatrix::OperatorMatrix(SpaceTag r, SpaceTag c, const Grid& g, MatrixXd mat)
    : row_space(r), col_space(c), grid(g), m(std::move(mat)) {
    check_dims();
}

void OperatorMatrix::check_dims() const {
    if (m.rows() != space_size(grid, row_space) || m.cols() != space_size(grid, col_space))
        throw std::invalid_argument("OperatorMatrix: dimensions inconsistent with space tags");
}

}  // namespace bcw
