#include "bcw/harmonics.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <stdexcept>

namespace bcw {

HarmonicFn HarmonicFn::log_center(double a, double b) {
    if (std::max(std::abs(a), std::abs(b)) <= 1.0)
        throw std::invalid_argument("HarmonicFn: singularity inside the closed domain");
    HarmonicFn f;
    f.kind = Kind::LogSingularity;
    f.a = a;
    f.b = b;
    return f;
}

HarmonicFn HarmonicFn::constant(double v) {
    HarmonicFn f;
    f.kind = Kind::Constant;
    f.c = v;
    return f;
}

double HarmonicFn::operator()(double x, double y) const {
    if (kind == Kind::Constant) return c;
    const double dx = x - a, dy = y - b;
    return std::log(dx * dx + dy * dy);
}

std::array<double, 2> HarmonicFn::gradient(double x, double y) const {
    if (kind == Kind::Constant) return {0.0, 0.0};
    const double dx = x - a, dy = y - b;
    const double r2 = dx * dx + dy * dy;
    return {2.0 * dx / r2, 2.0 * dy / r2};
}

std::vector<HarmonicFn> default_family() {
    return {
        HarmonicFn::log_center(2.3, 2.2),   HarmonicFn::log_center(-2.5, 2.1),
        HarmonicFn::log_center(2.7, -1.9),  HarmonicFn::log_center(-1.5, -2.5),
        HarmonicFn::log_center(-1.2, -2.5), HarmonicFn::constant(1.0),
    };
}

HarmonicTraces boundary_traces(const HarmonicFn& f, const Grid& g, CornerNormal corner) {
    const BoundaryIndexMap bmap(g);
    const int nb = g.boundary_nodes();
    VectorXd d(nb), n(nb);
    const double diag = corner == CornerNormal::UnitDiagonal ? 1.0 / std::sqrt(2.0) : 0.5;
    for (int r = 0; r < nb; ++r) {
        const auto& node = bmap.node(r);
        const double x = g.x(node.i), y = g.x(node.j);
        d[r] = f(x, y);
        const auto grad = f.gradient(x, y);
        double nx = 0, ny = 0;
        if (node.sides & SideXMinus) nx -= 1;
        if (node.sides & SideXPlus) nx += 1;
        if (node.sides & SideYMinus) ny -= 1;
        if (node.sides & SideYPlus) ny += 1;
        if (node.corner()) {
            nx *= diag;
            ny *= diag;
        }
        n[r] = grad[0] * nx + grad[1] * ny;
    }
    HarmonicTraces out{BoundaryTrace(SpaceTag::FullTime, g), BoundaryTrace(SpaceTag::FullTime, g)};
    for (int l = 0; l <= g.L; ++l) {
        out.dirichlet.values.segment(l * nb, nb) = d;
        out.neumann.values.segment(l * nb, nb) = n;
    }
    return out;
}

MatrixXd sample_on_grid(const HarmonicFn& f, const Grid& g) {
    const int n = g.I + 1;
    MatrixXd v(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) v(i, j) = f(g.x(i), g.x(j));
    return v;
}

MatrixXd trapezoid_weights(const Grid& g) {
    const int n = g.I + 1;
    VectorXd w = VectorXd::Ones(n);
    w[0] = w[n - 1] = 0.5;
    return (w * w.transpose()) * (g.dx * g.dx);
}

double weighted_inner(const MatrixXd& a, const MatrixXd& b, const MatrixXd& w) {
    return (a.array() * b.array() * w.array()).sum();
}

ProductBasis::ProductBasis(const std::vector<HarmonicFn>& family, const Grid& g)
    : grid_(g), weights_(trapezoid_weights(g)) {
    std::vector<MatrixXd> phi;
    phi.reserve(family.size());
    for (const auto& f : family) phi.push_back(sample_on_grid(f, g));
    const int m = static_cast<int>(family.size());
    for (int i = 0; i < m; ++i) {
        for (int j = i; j < m; ++j) {
            elements_.push_back(phi[i].cwiseProduct(phi[j]));
            pairs_.emplace_back(i, j);
        }
    }
    const int k = size();
    gram_.resize(k, k);
    for (int p = 0; p < k; ++p)
        for (int q = p; q < k; ++q)
            gram_(p, q) = gram_(q, p) = weighted_inner(elements_[p], elements_[q], weights_);
}

MatrixXd ProductBasis::project(const MatrixXd& field, double cutoff_rel) const {
    const int k = size();
    VectorXd m(k);
    for (int p = 0; p < k; ++p) m[p] = weighted_inner(field, elements_[p], weights_);

    Eigen::SelfAdjointEigenSolver<MatrixXd> eig(gram_);
    const VectorXd& ev = eig.eigenvalues();
    const double cutoff = cutoff_rel * ev.cwiseAbs().maxCoeff();
    VectorXd y = eig.eigenvectors().transpose() * m;
    int kept = 0;
    for (int p = 0; p < k; ++p) {
        if (ev[p] > cutoff) {
            y[p] /= ev[p];
            ++kept;
        } else {
            y[p] = 0.0;
        }
    }
    if (kept == 0) throw std::runtime_error("ProductBasis::project: degenerate basis");
    const VectorXd a = eig.eigenvectors() * y;

    MatrixXd out = MatrixXd::Zero(grid_.I + 1, grid_.I + 1);
    for (int p = 0; p < k; ++p) out += a[p] * elements_[p];
    return out;
}

}  // namespace bcw
