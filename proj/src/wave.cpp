#include "bcw/wave.hpp"

#include "bcw/io.hpp"

#include <cmath>
#include <stdexcept>

namespace bcw {

NeumannSource::NeumannSource(const Grid& g, int levels)
    : grid(g), values(MatrixXd::Zero(levels, g.boundary_nodes())) {}

namespace {

// One-sided second-order solve for the boundary ring of frame u, given the
// outward normal derivative f on the slice. Sides first (they only read
// interior values), then corners from the fresh side values.
void enforce_neumann(MatrixXd& u, const Eigen::Ref<const Eigen::RowVectorXd>& f,
                     const BoundaryIndexMap& bmap, double dx) {
    const int I = bmap.grid().I;
    const double s = 2.0 * dx;
    for (int j = 1; j < I; ++j) {
        u(0, j) = (4.0 * u(1, j) - u(2, j) + s * f[bmap.slice_rank(0, j)]) / 3.0;
        u(I, j) = (4.0 * u(I - 1, j) - u(I - 2, j) + s * f[bmap.slice_rank(I, j)]) / 3.0;
    }
    for (int i = 1; i < I; ++i) {
        u(i, 0) = (4.0 * u(i, 1) - u(i, 2) + s * f[bmap.slice_rank(i, 0)]) / 3.0;
        u(i, I) = (4.0 * u(i, I - 1) - u(i, I - 2) + s * f[bmap.slice_rank(i, I)]) / 3.0;
    }
    auto corner = [&](int ci, int cj, int di, int dj) {
        const double fv = f[bmap.slice_rank(ci, cj)];
        const double ax = (4.0 * u(ci + di, cj) - u(ci + 2 * di, cj) + s * fv) / 3.0;
        const double ay = (4.0 * u(ci, cj + dj) - u(ci, cj + 2 * dj) + s * fv) / 3.0;
        u(ci, cj) = 0.5 * (ax + ay);
    };
    corner(0, 0, 1, 1);
    corner(0, I, 1, -1);
    corner(I, 0, -1, 1);
    corner(I, I, -1, -1);
}

void record_boundary_row(MatrixXd& out, int l, const MatrixXd& u,
                         const BoundaryIndexMap& bmap) {
    const auto& nodes = bmap.nodes();
    for (size_t r = 0; r < nodes.size(); ++r) out(l, r) = u(nodes[r].i, nodes[r].j);
}

}  // namespace

SimResult simulate(const SpeedField& speed, const NeumannSource& source,
                   const Grid& grid, const SimOptions& opt) {
    if (speed.I() != grid.I)
        throw std::invalid_argument("simulate: speed field and grid disagree");
    if (source.values.cols() != grid.boundary_nodes())
        throw std::invalid_argument("simulate: source has wrong node count");
    const int levels = source.levels();
    const int n = grid.I + 1;
    const BoundaryIndexMap bmap(grid);

    // c^2 dt^2 / dx^2 per node; interior part only is used.
    const MatrixXd lam =
        (speed.values().array() * (grid.dt / grid.dx)).square().matrix();
    const double dt2 = grid.dt * grid.dt;

    SimResult res;
    if (opt.record_boundary) res.boundary = MatrixXd::Zero(levels, grid.boundary_nodes());
    auto want_snapshot = [&](int l) {
        for (int s : opt.snapshot_levels)
            if (s == l) return true;
        return false;
    };

    MatrixXd u_prev = MatrixXd::Zero(n, n);
    MatrixXd u_curr = MatrixXd::Zero(n, n);
    MatrixXd u_next = MatrixXd::Zero(n, n);
    MatrixXd force;
    if (opt.body_force) force.resize(n, n);

    enforce_neumann(u_curr, source.values.row(0), bmap, grid.dx);
    if (opt.record_boundary) record_boundary_row(res.boundary, 0, u_curr, bmap);
    if (want_snapshot(0)) res.snapshots[0] = u_curr;
    if (!opt.dump_dir.empty())
        save_matrix(opt.dump_dir + "/frame_00000.bctm", u_curr, grid_sidecar(grid));

    const int m = n - 2;
    for (int l = 0; l + 1 < levels; ++l) {
        auto c = u_curr.block(1, 1, m, m).array();
        auto lap = (u_curr.block(0, 1, m, m) + u_curr.block(2, 1, m, m) +
                    u_curr.block(1, 0, m, m) + u_curr.block(1, 2, m, m))
                       .array() -
                   4.0 * c;
        auto stiff = lam.block(1, 1, m, m).array() * lap;
        if (opt.body_force) {
            const double t = grid.t(l);
            for (int i = 1; i < n - 1; ++i)
                for (int j = 1; j < n - 1; ++j)
                    force(i, j) = opt.body_force(t, grid.x(i), grid.x(j));
            if (l == 0) {
                u_next.block(1, 1, m, m) =
                    (c + 0.5 * (stiff + dt2 * force.block(1, 1, m, m).array())).matrix();
            } else {
                u_next.block(1, 1, m, m) =
                    (2.0 * c - u_prev.block(1, 1, m, m).array() + stiff +
                     dt2 * force.block(1, 1, m, m).array())
                        .matrix();
            }
        } else if (l == 0) {
            // u^1 = u^-1 elimination of the initial velocity.
            u_next.block(1, 1, m, m) = (c + 0.5 * stiff).matrix();
        } else {
            u_next.block(1, 1, m, m) =
                (2.0 * c - u_prev.block(1, 1, m, m).array() + stiff).matrix();
        }

        enforce_neumann(u_next, source.values.row(l + 1), bmap, grid.dx);

        const double peak = u_next.array().abs().maxCoeff();
        if (!std::isfinite(peak) || peak > opt.blowup_limit)
            throw std::runtime_error("simulate: instability at level " +
                                     std::to_string(l + 1) + " (|u| ~ " +
                                     std::to_string(peak) + "), check CFL");

        u_prev.swap(u_curr);
        u_curr.swap(u_next);

        if (opt.record_boundary) record_boundary_row(res.boundary, l + 1, u_curr, bmap);
        if (want_snapshot(l + 1)) res.snapshots[l + 1] = u_curr;
        if (!opt.dump_dir.empty()) {
            char name[32];
            std::snprintf(name, sizeof(name), "/frame_%05d.bctm", l + 1);
            save_matrix(opt.dump_dir + name, u_curr, grid_sidecar(grid));
        }
    }
    return res;
}

SolveResult solve_ibvp(const SpeedField& speed, const NeumannSource& source,
                       const Grid& grid, const SolveRecord& record) {
    if (!cfl_satisfied(grid, speed))
        throw std::invalid_argument("solve_ibvp: CFL violated for this speed field");
    if (source.levels() < grid.L + 1)
        throw std::invalid_argument("solve_ibvp: source shorter than the horizon");

    SimOptions opt;
    opt.record_boundary = true;
    opt.snapshot_levels = record.snapshot_levels;
    opt.dump_dir = record.dump_dir;
    SimResult sim = simulate(speed, source, grid, opt);

    SolveResult out;
    out.snapshots = std::move(sim.snapshots);
    BoundaryTrace tr(SpaceTag::FullTime, grid);
    const int nb = grid.boundary_nodes();
    for (int l = 0; l <= grid.L; ++l)
        tr.values.segment(l * nb, nb) = sim.boundary.row(l).transpose();
    out.dirichlet = std::move(tr);
    return out;
}

double snapshot_inner_product(const MatrixXd& u, const MatrixXd& v,
                              const SpeedField& speed, const Grid& grid) {
    const int n = grid.I + 1;
    if (u.rows() != n || u.cols() != n || v.rows() != n || v.cols() != n)
        throw std::invalid_argument("snapshot_inner_product: shape mismatch");
    const double dx2 = grid.dx * grid.dx;
    double sum = 0.0;
    for (int i = 0; i < n; ++i) {
        const double wi = (i == 0 || i == n - 1) ? 0.5 : 1.0;
        for (int j = 0; j < n; ++j) {
            const double wj = (j == 0 || j == n - 1) ? 0.5 : 1.0;
            const double cinv2 = 1.0 / (speed(i, j) * speed(i, j));
            sum += wi * wj * u(i, j) * v(i, j) * cinv2 * dx2;
        }
    }
    return sum;
}

}  // namespace bcw
