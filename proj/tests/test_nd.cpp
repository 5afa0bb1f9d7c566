#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "bcw/nd_map.hpp"
#include "bcw/operators.hpp"
#include "bcw/wave.hpp"

#include <cmath>

using namespace bcw;

namespace {

struct Setup {
    Grid coarse, fine;
    SpeedField speed_fine;
    Setup(int I, double T, double cmax = 1.0)
        : coarse(build_grid(I, T, cmax)),
          fine(refine_grid(coarse)),
          speed_fine(SpeedField::constant(2 * I, cmax)) {}
};

}  // namespace

TEST_CASE("ND map shape, causality and determinism") {
    Setup s(4, 1.0);
    NdMatrix nd = assemble_nd_map(s.speed_fine, s.fine, s.coarse);
    const Grid& g = s.coarse;
    const int nb = g.boundary_nodes();
    REQUIRE(nd.matrix.m.rows() == g.full_size());
    REQUIRE(nd.matrix.m.cols() == g.full_size());
    CHECK(nd.matrix.m.cwiseAbs().maxCoeff() > 0);

    // receiver block r, source block l: exactly zero below the source time
    for (int l = 0; l <= g.L; ++l)
        for (int r = 0; r < l; ++r)
            CHECK(nd.matrix.m.block(r * nb, l * nb, nb, nb).cwiseAbs().maxCoeff() == 0.0);

    // schedule independence: single-threaded assembly gives identical bits
    NdMatrix nd1 = assemble_nd_map(s.speed_fine, s.fine, s.coarse, "", 1);
    CHECK(nd1.matrix.m == nd.matrix.m);
}

TEST_CASE("shifted columns equal direct solves with delayed sources") {
    Setup s(3, 1.2);
    NdMatrix nd = assemble_nd_map(s.speed_fine, s.fine, s.coarse);
    const Grid& g = s.coarse;
    const int nb = g.boundary_nodes();
    const BoundaryIndexMap bc(g), bf(s.fine);

    for (int b : {0, 1, 5}) {
        for (int l : {1, 2, g.L / 2}) {
            MatrixXd delta = MatrixXd::Zero(g.L + 1, nb);
            delta(l, b) = 1.0;
            NeumannSource src = prolong_boundary_source(delta, g, s.fine);
            SimResult sim = simulate(s.speed_fine, src, s.fine, {});
            VectorXd expect(g.full_size());
            for (int r = 0; r <= g.L; ++r)
                for (int rho = 0; rho < nb; ++rho) {
                    const auto& node = bc.node(rho);
                    expect[r * nb + rho] =
                        sim.boundary(2 * r, bf.slice_rank(2 * node.i, 2 * node.j));
                }
            const VectorXd col = nd.matrix.m.col(l * nb + b);
            CHECK((col - expect).cwiseAbs().maxCoeff() <= 1e-10);
        }
    }
}

TEST_CASE("prolongation is the bilinear hat in space and time") {
    Grid coarse = build_grid(3, 1.0, 1.0);
    Grid fine = refine_grid(coarse);
    const BoundaryIndexMap bc(coarse), bf(fine);
    const int nb = coarse.boundary_nodes();

    MatrixXd delta = MatrixXd::Zero(coarse.L + 1, nb);
    const int b = bc.slice_rank(0, 1);
    delta(2, b) = 1.0;
    NeumannSource src = prolong_boundary_source(delta, coarse, fine);

    // temporal hat at fine levels 3,4,5 around the coarse level 2
    const int wf = 2 * bc.rank_to_walk(b);
    const int center = bf.walk_to_rank(wf);
    CHECK(src.values(4, center) == 1.0);
    CHECK(src.values(3, center) == 0.5);
    CHECK(src.values(5, center) == 0.5);
    CHECK(src.values(2, center) == 0.0);
    CHECK(src.values(6, center) == 0.0);

    // spatial hat at the two fine walk neighbors
    const int nbf = fine.boundary_nodes();
    const int left = bf.walk_to_rank((wf + nbf - 1) % nbf);
    const int right = bf.walk_to_rank((wf + 1) % nbf);
    CHECK(src.values(4, left) == 0.5);
    CHECK(src.values(4, right) == 0.5);
    // and nowhere else
    CHECK(src.values.row(4).sum() == 2.0);
    CHECK(src.values.row(4).cwiseAbs().maxCoeff() == 1.0);
}

TEST_CASE("time-reversal adjoint residual is small on a coarse sanity grid") {
    Setup s(6, 1.5);
    NdMatrix nd = assemble_nd_map(s.speed_fine, s.fine, s.coarse);
    const Grid& g = s.coarse;
    const int nb = g.boundary_nodes();
    // R over the full time range
    MatrixXd refl(g.full_size(), g.full_size());
    refl.setZero();
    for (int l = 0; l <= g.L; ++l)
        refl.block(l * nb, (g.L - l) * nb, nb, nb).setIdentity();
    const MatrixXd& lam = nd.matrix.m;
    const MatrixXd residual = lam - refl * lam.transpose() * refl;
    CHECK(residual.norm() / lam.norm() < 0.2);
}

TEST_CASE("noise: determinism and exact semantics") {
    Setup s(3, 0.8);
    NdMatrix nd = assemble_nd_map(s.speed_fine, s.fine, s.coarse);

    NdMatrix zero_lvl = apply_noise(nd, NoiseSpec::gaussian(0.0, 5));
    CHECK(zero_lvl.matrix.m == nd.matrix.m);

    NdMatrix c1 = apply_noise(nd, NoiseSpec::constant(0.01));
    CHECK(((c1.matrix.m - nd.matrix.m).array() == 0.01).all());

    NdMatrix g1 = apply_noise(nd, NoiseSpec::gaussian(0.05, 42));
    NdMatrix g2 = apply_noise(nd, NoiseSpec::gaussian(0.05, 42));
    CHECK(g1.matrix.m == g2.matrix.m);
    NdMatrix g3 = apply_noise(nd, NoiseSpec::gaussian(0.05, 43));
    CHECK(g1.matrix.m != g3.matrix.m);

    CHECK_THROWS_AS(NoiseSpec::gaussian(-0.1, 1), std::invalid_argument);

    // counter generator looks standard normal
    double sum = 0, sum2 = 0;
    const int N = 200000;
    for (int i = 0; i < N; ++i) {
        const double x = counter_gaussian(9, i % 500, i / 500);
        sum += x;
        sum2 += x * x;
    }
    CHECK(std::abs(sum / N) < 0.01);
    CHECK(std::abs(sum2 / N - 1.0) < 0.02);
}

TEST_CASE("mask zeroes rows and columns, corners only when both sides go") {
    Setup s(2, 0.8);
    NdMatrix nd = assemble_nd_map(s.speed_fine, s.fine, s.coarse);
    const Grid& g = s.coarse;
    const int nb = g.boundary_nodes();
    const BoundaryIndexMap bm(g);

    MaskSpec m{SideYMinus};
    NdMatrix masked = apply_mask(nd, m);

    // on I=2: y=-1 holds (0,0),(1,0),(2,0); the corners survive because x=-1
    // and x=+1 stay, so only (1,0) is zeroed
    const int removed = bm.slice_rank(1, 0);
    for (int l = 0; l <= g.L; ++l) {
        CHECK(masked.matrix.m.row(l * nb + removed).cwiseAbs().maxCoeff() == 0.0);
        CHECK(masked.matrix.m.col(l * nb + removed).cwiseAbs().maxCoeff() == 0.0);
    }
    for (int r : {bm.slice_rank(0, 0), bm.slice_rank(2, 0)})
        CHECK(masked.matrix.m.row(r).cwiseAbs().maxCoeff() > 0.0);

    // idempotence
    NdMatrix twice = apply_mask(masked, m);
    CHECK(twice.matrix.m == masked.matrix.m);

    // empty mask: untouched; all sides: zero matrix
    CHECK(apply_mask(nd, MaskSpec{}).matrix.m == nd.matrix.m);
    MaskSpec all{SideXMinus | SideXPlus | SideYMinus | SideYPlus};
    CHECK(apply_mask(nd, all).matrix.m.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("assembly validates its inputs") {
    Grid coarse = build_grid(4, 1.0, 1.0);
    Grid fine = refine_grid(coarse);
    SpeedField bad_speed = SpeedField::constant(2 * 4, 2.0);  // violates CFL
    CHECK_THROWS_AS(assemble_nd_map(bad_speed, fine, coarse), std::invalid_argument);
    SpeedField wrong_grid = SpeedField::constant(5, 1.0);
    CHECK_THROWS_AS(assemble_nd_map(wrong_grid, fine, coarse), std::invalid_argument);
    CHECK_THROWS_AS(assemble_nd_map(wrong_grid, coarse, coarse), std::invalid_argument);
}

TEST_CASE("side names round-trip") {
    for (unsigned bit : {SideXMinus, SideXPlus, SideYMinus, SideYPlus})
        CHECK(side_from_name(side_name(bit)) == bit);
    CHECK(side_from_name("x=1") == SideXPlus);
    CHECK(side_from_name("y=1") == SideYPlus);
    CHECK_THROWS_AS(side_from_name("z=0"), std::invalid_argument);
}
