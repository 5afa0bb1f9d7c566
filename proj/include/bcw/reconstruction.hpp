#pragma once

#include "bcw/grid.hpp"
#include "bcw/harmonics.hpp"
#include "bcw/nd_map.hpp"
#include "bcw/operators.hpp"

#include <optional>
#include <vector>

namespace bcw {

struct ControlSolution {
    BoundaryTrace f;           // half-time control
    double alpha = 0;          // absolute regularization weight
    double residual_rel = 0;   // relative residual of the normal equation
    int harmonic_id = -1;
};

/// Solves ([K]^t[K] + alpha) f = [K]^t rhs for several right-hand sides with
/// one factorization. alpha = alpha_rel * sigma_max(K)^2; sigma_max^2 is the
/// dominant eigenvalue of K^t K by power iteration.
class ControlSolver {
public:
    ControlSolver(const OperatorMatrix& K, double alpha_rel);

    ControlSolver(const ControlSolver&) = delete;
    ControlSolver& operator=(const ControlSolver&) = delete;

    double sigma_max_sq() const { return sigma_max_sq_; }
    double alpha() const { return alpha_; }
    ControlSolution solve(const BoundaryTrace& rhs, int harmonic_id = -1) const;

private:
    const OperatorMatrix* K_;
    Grid grid_;
    double sigma_max_sq_ = 0, alpha_ = 0;
    MatrixXd gram_;  // holds the in-place LLT factor of K^t K + alpha
    std::optional<Eigen::LLT<Eigen::Ref<MatrixXd>>> llt_;
};

ControlSolution solve_control(const OperatorMatrix& K, const BoundaryTrace& rhs,
                              double alpha_rel);

/// The computable stand-in for the interior pairing (psi, phi)_{c^-2}:
/// boundary quadrature of the control against B phi.
double pair_value(const ControlSolution& f_alpha, const BoundaryTrace& b_phi);

/// Linear system on the nodal unknowns c^-2: one row per harmonic pair, row
/// entries are the trapezoid-weighted product samples, rhs the pair values.
struct CSystem {
    MatrixXd A;   // n_pairs x (I+1)^2, weights included
    VectorXd b;
    VectorXd w;   // flattened quadrature weights (row-major over (i,j))
    Grid grid;
};

CSystem assemble_c_system(const std::vector<MatrixXd>& products, const VectorXd& values,
                          const Grid& g);

enum class CSystemNorm {
    Quadrature,  // minimum L2(Omega)-norm solution; lands in the product span
    Euclidean,   // plain minimum-norm least squares
};

/// Tikhonov/minimum-norm solve through the n_pairs x n_pairs dual system with
/// a spectral-cutoff pseudo-inverse.
MatrixXd solve_c_system(const CSystem& sys, double beta,
                        CSystemNorm norm = CSystemNorm::Quadrature,
                        double cutoff_rel = 1e-10);

struct SpeedRecovery {
    MatrixXd c_inv_sq;
    MatrixXd c;
    bool floored = false;  // some node hit the positivity floor
};

SpeedRecovery recover_speed(const MatrixXd& c_inv_sq, double floor);

/// 100 * ||a - ref|| / ||ref|| under the tensorized trapezoid weights.
double rel_l2_error_pct(const MatrixXd& a, const MatrixXd& ref, const Grid& g);

struct ReconConfig {
    double alpha_rel = 1e-6;
    double beta = 0.0;
    double cutoff_rel = 1e-10;
    double floor = 0.01;
    CornerNormal corner = CornerNormal::UnitDiagonal;
    CSystemNorm norm = CSystemNorm::Quadrature;
};

struct ReconResult {
    MatrixXd c_inv_sq;
    MatrixXd c_rec;
    double sigma_max_sq = 0, alpha = 0;
    double max_control_residual = 0;
    bool floored = false;
    bool zero_nd = false;
    VectorXd pair_values;
};

/// Full boundary-control reconstruction from an assembled ND matrix:
/// K, B traces, one regularized control per harmonic, the 21 pairings and
/// the c^-2 solve.
ReconResult reconstruct(const NdMatrix& nd, const std::vector<HarmonicFn>& family,
                        const ReconConfig& cfg);

}  // namespace bcw
