#pragma once

#include "bcw/grid.hpp"

#include <array>
#include <vector>

namespace bcw {

/// Closed-form harmonic function on a neighborhood of [-1,1]^2: either
/// log((x-a)^2+(y-b)^2) with the singularity strictly outside the closed
/// square, or a constant.
struct HarmonicFn {
    enum class Kind { LogSingularity, Constant };
    Kind kind = Kind::Constant;
    double a = 0, b = 0;  // singularity center (log kind)
    double c = 1;         // value (constant kind)

    static HarmonicFn log_center(double a, double b);
    static HarmonicFn constant(double v);

    double operator()(double x, double y) const;
    std::array<double, 2> gradient(double x, double y) const;
};

/// The six-function family used throughout the experiments: five log
/// singularities placed outside the domain plus the constant 1.
std::vector<HarmonicFn> default_family();

/// How the outward normal is taken at the four corner nodes.
enum class CornerNormal {
    UnitDiagonal,  // (+-1,+-1)/sqrt(2)
    SideAverage,   // mean of the two side normals, (+-1,+-1)/2
};

struct HarmonicTraces {
    BoundaryTrace dirichlet;  // full-time, values replicated over levels
    BoundaryTrace neumann;
};

/// Dirichlet and outward-normal traces of a harmonic function, replicated
/// over all time levels in lexicographic order.
HarmonicTraces boundary_traces(const HarmonicFn& f, const Grid& g,
                               CornerNormal corner = CornerNormal::UnitDiagonal);

MatrixXd sample_on_grid(const HarmonicFn& f, const Grid& g);

/// Tensorized trapezoid weights w_i w_j dx^2 on the (I+1)^2 lattice.
MatrixXd trapezoid_weights(const Grid& g);
double weighted_inner(const MatrixXd& a, const MatrixXd& b, const MatrixXd& w);

/// The pairwise products phi_i phi_j (i <= j) of a harmonic family evaluated
/// on the spatial lattice, with their Gram matrix under the plain trapezoid
/// L2(Omega, dx) inner product. 6 generators give 21 products.
class ProductBasis {
public:
    ProductBasis(const std::vector<HarmonicFn>& family, const Grid& g);

    int size() const { return static_cast<int>(elements_.size()); }
    const MatrixXd& element(int k) const { return elements_[k]; }
    std::pair<int, int> generators_of(int k) const { return pairs_[k]; }
    const MatrixXd& gram() const { return gram_; }
    const Grid& grid() const { return grid_; }

    /// L2-orthogonal projection onto the span, via a spectral-cutoff
    /// pseudo-inverse of the (nearly dependent) Gram matrix.
    MatrixXd project(const MatrixXd& field, double cutoff_rel = 1e-10) const;

private:
    Grid grid_;
    MatrixXd weights_;
    std::vector<MatrixXd> elements_;
    std::vector<std::pair<int, int>> pairs_;
    MatrixXd gram_;
};

}  // namespace bcw
