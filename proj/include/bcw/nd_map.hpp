#pragma once

#include "bcw/grid.hpp"
#include "bcw/wave.hpp"

#include <json.hpp>
#include <string>

namespace bcw {

struct NoiseSpec {
    enum class Kind { None, Gaussian, Constant };
    Kind kind = Kind::None;
    double level = 0.0;      // fraction p (gaussian) or absolute value (constant)
    std::uint64_t seed = 0;  // gaussian only

    nlohmann::json to_json() const;
    static NoiseSpec none() { return {}; }
    static NoiseSpec gaussian(double p, std::uint64_t seed);
    static NoiseSpec constant(double v);
};

struct MaskSpec {
    unsigned removed_sides = 0;  // SideBit combination

    bool empty() const { return removed_sides == 0; }
    /// A node is removed when every side it belongs to is removed, so corners
    /// survive unless both adjacent sides are gone.
    bool removes(const BoundaryNode& n) const {
        return n.sides != 0 && (n.sides & ~removed_sides) == 0;
    }
    nlohmann::json to_json() const;
};

/// Discrete Neumann-to-Dirichlet matrix on the inversion grid, assembled from
/// fine-grid simulations and pointwise restriction.
struct NdMatrix {
    OperatorMatrix matrix;  // full-time x full-time
    int I_fine = 0, L_fine = 0;
    std::string speed_desc;
    NoiseSpec noise;
    MaskSpec mask;

    const Grid& grid() const { return matrix.grid; }
    nlohmann::json meta() const;
};

/// Space-time bilinear interpolation of a coarse boundary datum onto the fine
/// boundary lattice (hat footprints along the perimeter walk and in time).
/// fine_levels rows are produced; coarse rows beyond the given data count as 0.
NeumannSource prolong_boundary_source(const MatrixXd& coarse_values, const Grid& coarse,
                                      const Grid& fine, int fine_levels = -1);

/// Column-by-column assembly: one fine solve per spatial boundary node with a
/// unit hat source centered at coarse time level 1, all other columns are
/// time shifts of that template (time invariance of the wave equation).
/// The fine run extends one coarse block past the horizon so the level-0
/// column (the back-shifted template) is complete.
NdMatrix assemble_nd_map(const SpeedField& speed_fine, const Grid& grid_fine,
                         const Grid& grid_coarse, const std::string& speed_desc = "",
                         int threads = 0);

NdMatrix apply_noise(const NdMatrix& nd, const NoiseSpec& spec);
void apply_noise_inplace(NdMatrix& nd, const NoiseSpec& spec);

NdMatrix apply_mask(const NdMatrix& nd, const MaskSpec& mask);
void apply_mask_inplace(NdMatrix& nd, const MaskSpec& mask);

/// Standard normal draw from a counter-based generator keyed by (seed, m, n);
/// independent of evaluation order by construction.
double counter_gaussian(std::uint64_t seed, std::uint64_t m, std::uint64_t n);

unsigned side_from_name(const std::string& name);    // "x=-1","x=+1","y=-1","y=+1"
std::string side_name(unsigned bit);

}  // namespace bcw
