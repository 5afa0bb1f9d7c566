#include "bcw/reconstruction.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <stdexcept>

namespace bcw {

namespace {

double power_iteration_max_eig(const MatrixXd& G) {
    const Eigen::Index n = G.rows();
    VectorXd v = VectorXd::Constant(n, 1.0 / std::sqrt(static_cast<double>(n)));
    VectorXd w(n);
    double lambda = 0;
    for (int it = 0; it < 500; ++it) {
        w.noalias() = G * v;
        const double wn = w.norm();
        if (wn == 0) return 0;
        const double next = v.dot(w);
        v = w / wn;
        if (it > 2 && std::abs(next - lambda) <= 1e-13 * std::abs(next)) {
            lambda = next;
            break;
        }
        lambda = next;
    }
    return lambda;
}

}  // namespace

ControlSolver::ControlSolver(const OperatorMatrix& K, double alpha_rel)
    : K_(&K), grid_(K.grid) {
    if (!(alpha_rel > 0)) throw std::invalid_argument("ControlSolver: alpha_rel must be positive");
    if (K.row_space != SpaceTag::HalfTime || K.col_space != SpaceTag::HalfTime)
        throw std::invalid_argument("ControlSolver: K must be half x half");
    if (!K.m.allFinite()) throw std::invalid_argument("ControlSolver: K has non-finite entries");
    gram_.noalias() = K.m.transpose() * K.m;
    sigma_max_sq_ = power_iteration_max_eig(gram_);
    alpha_ = alpha_rel * sigma_max_sq_;
    if (!(alpha_ > 0))
        throw std::runtime_error("ControlSolver: zero operator, cannot regularize");
    gram_.diagonal().array() += alpha_;
    llt_.emplace(gram_);  // factorizes in place, no second copy
    if (llt_->info() != Eigen::Success)
        throw std::runtime_error("ControlSolver: factorization failed");
}

ControlSolution ControlSolver::solve(const BoundaryTrace& rhs, int harmonic_id) const {
    if (rhs.tag != SpaceTag::HalfTime || !(rhs.grid == grid_))
        throw std::invalid_argument("ControlSolver: rhs must be half-time on the same grid");
    VectorXd y(K_->m.cols());
    y.noalias() = K_->m.transpose() * rhs.values;
    ControlSolution sol;
    sol.f = BoundaryTrace(SpaceTag::HalfTime, grid_, llt_->solve(y));
    sol.alpha = alpha_;
    sol.harmonic_id = harmonic_id;
    if (!sol.f.values.allFinite())
        throw std::runtime_error("ControlSolver: non-finite control solution");
    const double ynorm = y.norm();
    if (ynorm > 0) {
        VectorXd resid = K_->m.transpose() * (K_->m * sol.f.values);
        resid.noalias() += alpha_ * sol.f.values - y;
        sol.residual_rel = resid.norm() / ynorm;
    }
    return sol;
}

ControlSolution solve_control(const OperatorMatrix& K, const BoundaryTrace& rhs,
                              double alpha_rel) {
    return ControlSolver(K, alpha_rel).solve(rhs);
}

double pair_value(const ControlSolution& f_alpha, const BoundaryTrace& b_phi) {
    return boundary_inner_product(f_alpha.f, b_phi);
}

CSystem assemble_c_system(const std::vector<MatrixXd>& products, const VectorXd& values,
                          const Grid& g) {
    if (products.empty()) throw std::invalid_argument("assemble_c_system: no pairs");
    if (static_cast<Eigen::Index>(products.size()) != values.size())
        throw std::invalid_argument("assemble_c_system: pair/value count mismatch");
    const int n = g.I + 1;
    const MatrixXd w = trapezoid_weights(g);

    CSystem sys;
    sys.grid = g;
    sys.b = values;
    sys.w.resize(n * n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) sys.w[i * n + j] = w(i, j);
    sys.A.resize(products.size(), n * n);
    for (size_t k = 0; k < products.size(); ++k) {
        const MatrixXd& p = products[k];
        if (p.rows() != n || p.cols() != n)
            throw std::invalid_argument("assemble_c_system: product grid mismatch");
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) sys.A(k, i * n + j) = w(i, j) * p(i, j);
    }
    return sys;
}

MatrixXd solve_c_system(const CSystem& sys, double beta, CSystemNorm norm,
                        double cutoff_rel) {
    if (beta < 0) throw std::invalid_argument("solve_c_system: beta must be nonnegative");
    const Eigen::Index k = sys.A.rows();
    const int n = sys.grid.I + 1;

    // Representers: rows of A in the chosen inner product's dual.
    MatrixXd rep;
    if (norm == CSystemNorm::Quadrature) {
        rep = sys.A.array().rowwise() / sys.w.transpose().array();
    } else {
        rep = sys.A;
    }
    MatrixXd dual(k, k);
    dual.noalias() = sys.A * rep.transpose();
    dual.diagonal().array() += beta;

    Eigen::SelfAdjointEigenSolver<MatrixXd> eig(dual);
    const VectorXd& ev = eig.eigenvalues();
    const double cutoff = cutoff_rel * ev.cwiseAbs().maxCoeff();
    VectorXd y = eig.eigenvectors().transpose() * sys.b;
    int kept = 0;
    for (Eigen::Index p = 0; p < k; ++p) {
        if (ev[p] > cutoff) {
            y[p] /= ev[p];
            ++kept;
        } else {
            y[p] = 0.0;
        }
    }
    if (kept == 0) throw std::runtime_error("solve_c_system: dual matrix is fully degenerate");
    const VectorXd lambda = eig.eigenvectors() * y;
    const VectorXd x = rep.transpose() * lambda;

    MatrixXd out(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) out(i, j) = x[i * n + j];
    return out;
}

SpeedRecovery recover_speed(const MatrixXd& c_inv_sq, double floor) {
    if (!(floor > 0)) throw std::invalid_argument("recover_speed: floor must be positive");
    SpeedRecovery r;
    r.c_inv_sq = c_inv_sq;
    r.floored = (c_inv_sq.array() < floor).any();
    r.c = c_inv_sq.cwiseMax(floor).array().rsqrt().matrix();
    return r;
}

double rel_l2_error_pct(const MatrixXd& a, const MatrixXd& ref, const Grid& g) {
    const MatrixXd w = trapezoid_weights(g);
    const double num = (w.array() * (a - ref).array().square()).sum();
    const double den = (w.array() * ref.array().square()).sum();
    if (den == 0) throw std::invalid_argument("rel_l2_error_pct: zero reference");
    return 100.0 * std::sqrt(num / den);
}

ReconResult reconstruct(const NdMatrix& nd, const std::vector<HarmonicFn>& family,
                        const ReconConfig& cfg) {
    const Grid& g = nd.grid();
    ReconResult res;
    res.zero_nd = nd.matrix.m.isZero(0.0);

    std::vector<ControlSolution> controls(family.size());
    std::vector<BoundaryTrace> b_traces;
    if (!res.zero_nd) {
        OperatorSet ops(nd.matrix.m, g);
        b_traces.reserve(family.size());
        for (const auto& h : family) {
            const auto tr = boundary_traces(h, g, cfg.corner);
            b_traces.push_back(apply_B(nd.matrix.m, g, tr.dirichlet, tr.neumann));
        }
        ControlSolver solver(ops.K, cfg.alpha_rel);
        res.sigma_max_sq = solver.sigma_max_sq();
        res.alpha = solver.alpha();
        for (size_t i = 0; i < family.size(); ++i) {
            controls[i] = solver.solve(b_traces[i], static_cast<int>(i));
            res.max_control_residual =
                std::max(res.max_control_residual, controls[i].residual_rel);
        }
    }

    std::vector<MatrixXd> phi;
    phi.reserve(family.size());
    for (const auto& h : family) phi.push_back(sample_on_grid(h, g));

    std::vector<MatrixXd> products;
    std::vector<double> values;
    for (size_t i = 0; i < family.size(); ++i) {
        for (size_t j = i; j < family.size(); ++j) {
            products.push_back(phi[i].cwiseProduct(phi[j]));
            values.push_back(res.zero_nd ? 0.0 : pair_value(controls[i], b_traces[j]));
        }
    }
    res.pair_values = Eigen::Map<VectorXd>(values.data(), values.size());

    CSystem sys = assemble_c_system(products, res.pair_values, g);
    res.c_inv_sq = solve_c_system(sys, cfg.beta, cfg.norm, cfg.cutoff_rel);
    SpeedRecovery rec = recover_speed(res.c_inv_sq, cfg.floor);
    res.c_rec = std::move(rec.c);
    res.floored = rec.floored;
    return res;
}

}  // namespace bcw
