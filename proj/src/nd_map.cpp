#include "bcw/nd_map.hpp"

#include <cmath>
#include <stdexcept>
#include <thread>
#include <vector>

namespace bcw {

NoiseSpec NoiseSpec::gaussian(double p, std::uint64_t seed) {
    if (p < 0) throw std::invalid_argument("NoiseSpec: negative level");
    NoiseSpec s;
    s.kind = Kind::Gaussian;
    s.level = p;
    s.seed = seed;
    return s;
}

NoiseSpec NoiseSpec::constant(double v) {
    if (v < 0) throw std::invalid_argument("NoiseSpec: negative level");
    NoiseSpec s;
    s.kind = Kind::Constant;
    s.level = v;
    return s;
}

nlohmann::json NoiseSpec::to_json() const {
    const char* names[] = {"none", "gaussian", "constant"};
    nlohmann::json j{{"kind", names[static_cast<int>(kind)]}, {"level", level}};
    if (kind == Kind::Gaussian) j["seed"] = seed;
    return j;
}

nlohmann::json MaskSpec::to_json() const {
    auto sides = nlohmann::json::array();
    for (unsigned bit : {SideYMinus, SideXPlus, SideYPlus, SideXMinus})
        if (removed_sides & bit) sides.push_back(side_name(bit));
    return {{"removed_sides", sides}};
}

nlohmann::json NdMatrix::meta() const {
    return {{"grid", nlohmann::json{{"I", grid().I}, {"L", grid().L}, {"T", grid().T}}},
            {"fine", nlohmann::json{{"I", I_fine}, {"L", L_fine}}},
            {"speed", speed_desc},
            {"noise", noise.to_json()},
            {"mask", mask.to_json()}};
}

NeumannSource prolong_boundary_source(const MatrixXd& coarse_values, const Grid& coarse,
                                      const Grid& fine, int fine_levels) {
    if (fine.I % coarse.I != 0)
        throw std::invalid_argument("prolong_boundary_source: incompatible grids");
    const int m = fine.I / coarse.I;
    if (coarse_values.cols() != coarse.boundary_nodes())
        throw std::invalid_argument("prolong_boundary_source: wrong node count");
    if (fine_levels < 0) fine_levels = fine.L + 1;

    const BoundaryIndexMap bc(coarse), bf(fine);
    const int nbc = coarse.boundary_nodes();
    const int nbf = fine.boundary_nodes();
    const int coarse_rows = static_cast<int>(coarse_values.rows());

    // Interpolate along the perimeter walk once per coarse level.
    auto interp_slice = [&](int cl, Eigen::RowVectorXd& out) {
        if (cl < 0 || cl >= coarse_rows) {
            out.setZero();
            return;
        }
        for (int wf = 0; wf < nbf; ++wf) {
            const int q = wf / m, rem = wf % m;
            const double frac = static_cast<double>(rem) / m;
            const int w0 = q % nbc, w1 = (q + 1) % nbc;
            const double v0 = coarse_values(cl, bc.walk_to_rank(w0));
            const double v1 = coarse_values(cl, bc.walk_to_rank(w1));
            out[bf.walk_to_rank(wf)] = (1.0 - frac) * v0 + frac * v1;
        }
    };

    NeumannSource src(fine, fine_levels);
    Eigen::RowVectorXd lo(nbf), hi(nbf);
    int cached = -2;
    for (int k = 0; k < fine_levels; ++k) {
        const int cl = k / m, rem = k % m;
        if (cl != cached) {
            interp_slice(cl, lo);
            interp_slice(cl + 1, hi);
            cached = cl;
        }
        const double frac = static_cast<double>(rem) / m;
        src.values.row(k) = (1.0 - frac) * lo + frac * hi;
    }
    return src;
}

NdMatrix assemble_nd_map(const SpeedField& speed_fine, const Grid& grid_fine,
                         const Grid& grid_coarse, const std::string& speed_desc,
                         int threads) {
    if (grid_fine.I % grid_coarse.I != 0 || grid_fine.L % grid_coarse.L != 0)
        throw std::invalid_argument("assemble_nd_map: fine grid is not a refinement");
    const int m = grid_fine.I / grid_coarse.I;
    if (grid_fine.L != m * grid_coarse.L)
        throw std::invalid_argument("assemble_nd_map: time refinement mismatch");
    if (speed_fine.I() != grid_fine.I)
        throw std::invalid_argument("assemble_nd_map: speed lives on the wrong grid");
    if (!cfl_satisfied(grid_fine, speed_fine))
        throw std::invalid_argument("assemble_nd_map: CFL violated on the fine grid");

    const Grid& gc = grid_coarse;
    const int nb = gc.boundary_nodes();
    const int L = gc.L;
    const int N = gc.full_size();
    const BoundaryIndexMap bc(gc), bf(grid_fine);

    // Rank map: coarse node (i,j) sits at fine node (m i, m j).
    std::vector<int> fine_rank(nb);
    for (int r = 0; r < nb; ++r) {
        const auto& node = bc.node(r);
        fine_rank[r] = bf.slice_rank(m * node.i, m * node.j);
    }

    // Simulate past the horizon so the template covers blocks 0..L+1; the
    // level-0 column is the template shifted one block back.
    const int fine_levels = m * (L + 1) + 1;

    NdMatrix nd;
    nd.matrix = OperatorMatrix(SpaceTag::FullTime, SpaceTag::FullTime, gc);
    nd.I_fine = grid_fine.I;
    nd.L_fine = grid_fine.L;
    nd.speed_desc = speed_desc;

    auto solve_group = [&](int b) {
        MatrixXd delta = MatrixXd::Zero(L + 2, nb);
        delta(1, b) = 1.0;
        NeumannSource src = prolong_boundary_source(delta, gc, grid_fine, fine_levels);
        SimOptions opt;
        SimResult sim = simulate(speed_fine, src, grid_fine, opt);

        MatrixXd tmpl(L + 2, nb);  // response at coarse nodes/levels, blocks 0..L+1
        for (int r = 0; r <= L + 1; ++r)
            for (int rho = 0; rho < nb; ++rho)
                tmpl(r, rho) = sim.boundary(m * r, fine_rank[rho]);

        for (int l = 0; l <= L; ++l) {
            const int col = l * nb + b;
            auto column = nd.matrix.m.col(col);
            for (int r = 0; r <= L; ++r) {
                const int shift = r - l + 1;
                if (shift < 0) continue;
                column.segment(r * nb, nb) = tmpl.row(shift).transpose();
            }
        }
    };

    if (threads <= 0) threads = static_cast<int>(std::thread::hardware_concurrency());
    threads = std::max(1, std::min(threads, nb));
    if (threads == 1) {
        for (int b = 0; b < nb; ++b) solve_group(b);
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < threads; ++t) {
            pool.emplace_back([&, t]() {
                for (int b = t; b < nb; b += threads) solve_group(b);
            });
        }
        for (auto& th : pool) th.join();
    }
    return nd;
}

namespace {

inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

inline double to_unit(std::uint64_t x) {
    // strictly inside (0,1) so the log below is finite
    return (static_cast<double>(x >> 11) + 0.5) * 0x1.0p-53;
}

}  // namespace

double counter_gaussian(std::uint64_t seed, std::uint64_t m, std::uint64_t n) {
    static const double two_pi = 2.0 * std::acos(-1.0);
    const std::uint64_t k = mix64(mix64(mix64(seed) ^ m) ^ n);
    const std::uint64_t u = mix64(k ^ 0xA5A5A5A5A5A5A5A5ull);
    const double u1 = to_unit(k);
    const double u2 = to_unit(u);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(two_pi * u2);
}

void apply_noise_inplace(NdMatrix& nd, const NoiseSpec& spec) {
    if (spec.level < 0) throw std::invalid_argument("apply_noise: negative level");
    nd.noise = spec;
    if (spec.kind == NoiseSpec::Kind::None || spec.level == 0.0) return;
    MatrixXd& a = nd.matrix.m;
    if (spec.kind == NoiseSpec::Kind::Constant) {
        a.array() += spec.level;
        return;
    }
    const double sigma_ref = std::sqrt(a.squaredNorm() / static_cast<double>(a.size()));
    const double amp = spec.level * sigma_ref;
    const Eigen::Index rows = a.rows(), cols = a.cols();
#pragma omp parallel for schedule(static)
    for (Eigen::Index n = 0; n < cols; ++n)
        for (Eigen::Index m = 0; m < rows; ++m)
            a(m, n) += amp * counter_gaussian(spec.seed, static_cast<std::uint64_t>(m),
                                              static_cast<std::uint64_t>(n));
}

NdMatrix apply_noise(const NdMatrix& nd, const NoiseSpec& spec) {
    NdMatrix out = nd;
    apply_noise_inplace(out, spec);
    return out;
}

void apply_mask_inplace(NdMatrix& nd, const MaskSpec& mask) {
    nd.mask.removed_sides |= mask.removed_sides;
    if (mask.empty()) return;
    const Grid& g = nd.grid();
    const BoundaryIndexMap bmap(g);
    const int nb = g.boundary_nodes();
    std::vector<int> removed;
    for (int r = 0; r < nb; ++r)
        if (mask.removes(bmap.node(r))) removed.push_back(r);
    for (int l = 0; l <= g.L; ++l) {
        for (int r : removed) {
            nd.matrix.m.row(l * nb + r).setZero();
            nd.matrix.m.col(l * nb + r).setZero();
        }
    }
}

NdMatrix apply_mask(const NdMatrix& nd, const MaskSpec& mask) {
    NdMatrix out = nd;
    apply_mask_inplace(out, mask);
    return out;
}

unsigned side_from_name(const std::string& name) {
    if (name == "x=-1") return SideXMinus;
    if (name == "x=+1" || name == "x=1") return SideXPlus;
    if (name == "y=-1") return SideYMinus;
    if (name == "y=+1" || name == "y=1") return SideYPlus;
    throw std::invalid_argument("unknown side name: " + name);
}

std::string side_name(unsigned bit) {
    switch (bit) {
        case SideXMinus: return "x=-1";
        case SideXPlus: return "x=+1";
        case SideYMinus: return "y=-1";
        case SideYPlus: return "y=+1";
    }
    throw std::invalid_argument("bad side bit");
}

}  // namespace bcw
