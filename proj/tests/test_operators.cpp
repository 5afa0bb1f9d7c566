#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "bcw/grid.hpp"
#include "bcw/operators.hpp"

#include <random>
#include <vector>

using namespace bcw;

namespace {

Grid tiny_grid(int I, int L) {
    Grid g;
    g.I = I;
    g.L = L;
    g.dx = 2.0 / I;
    g.dt = 0.1;
    g.T = 0.5 * L * g.dt;
    g.Lh = (L + 2) / 2;
    return g;
}

// Block-coefficient matrix of an operator: entry (l,k) is the scalar its
// (l,k) identity block carries.
MatrixXd block_coefficients(const OperatorMatrix& op) {
    const int nb = op.grid.boundary_nodes();
    const int br = static_cast<int>(op.m.rows()) / nb;
    const int bc = static_cast<int>(op.m.cols()) / nb;
    MatrixXd c(br, bc);
    for (int l = 0; l < br; ++l)
        for (int k = 0; k < bc; ++k) c(l, k) = op.m(l * nb, k * nb);
    return c;
}

MatrixXd random_matrix(int r, int c, unsigned seed) {
    std::mt19937 rng(seed);
    std::normal_distribution<double> dist;
    MatrixXd m(r, c);
    for (int i = 0; i < r; ++i)
        for (int j = 0; j < c; ++j) m(i, j) = dist(rng);
    return m;
}

}  // namespace

TEST_CASE("J blocks follow the published odd/even templates") {
    // Displayed coefficient patterns (in units of dt/2); the operator itself
    // carries the extra 1/2 from its definition as half the time integral,
    // so 2*[J] must match these exactly.
    const std::vector<std::vector<std::vector<double>>> patterns = {
        {{1, 2, 2, 1}, {0, 1, 1, 0}},                                  // L = 3
        {{1, 2, 2, 2, 1}, {0, 1, 2, 1, 0}, {0, 0, 0, 0, 0}},           // L = 4
        {{1, 2, 2, 2, 2, 1}, {0, 1, 2, 2, 1, 0}, {0, 0, 1, 1, 0, 0}},  // L = 5
        {{1, 2, 2, 2, 2, 2, 1},
         {0, 1, 2, 2, 2, 1, 0},
         {0, 0, 1, 2, 1, 0, 0},
         {0, 0, 0, 0, 0, 0, 0}},  // L = 6
    };
    for (int L = 3; L <= 6; ++L) {
        Grid g = tiny_grid(3, L);
        OperatorMatrix J = assemble_J(g);
        REQUIRE(J.m.rows() == g.half_size());
        REQUIRE(J.m.cols() == g.full_size());
        const auto& pat = patterns[L - 3];
        MatrixXd expect(g.Lh, L + 1);
        for (int l = 0; l < g.Lh; ++l)
            for (int k = 0; k <= L; ++k) expect(l, k) = (g.dt / 2) * pat[l][k];
        CHECK((2.0 * block_coefficients(J) - expect).cwiseAbs().maxCoeff() == 0.0);

        // every block is a scalar multiple of the identity
        const int nb = g.boundary_nodes();
        for (int l = 0; l < g.Lh; ++l)
            for (int k = 0; k <= L; ++k) {
                auto blk = J.m.block(l * nb, k * nb, nb, nb);
                CHECK((blk - blk(0, 0) * MatrixXd::Identity(nb, nb)).cwiseAbs().maxCoeff() ==
                      0.0);
            }
    }
}

TEST_CASE("J applied to a constant gives T - t_l") {
    for (int L : {5, 42}) {
        Grid g = tiny_grid(2, L);
        BoundaryTrace ones(SpaceTag::FullTime, g);
        ones.values.setOnes();
        MatrixXd out = apply_J(g, ones.values);
        const int nb = g.boundary_nodes();
        for (int l = 0; l < g.Lh; ++l)
            for (int b = 0; b < nb; ++b)
                CHECK(out(l * nb + b, 0) ==
                      doctest::Approx(g.T - g.t(l)).epsilon(1e-13));
    }
}

TEST_CASE("even-L grids zero the last block row of J") {
    Grid g = tiny_grid(2, 42);
    OperatorMatrix J = assemble_J(g);
    CHECK(J.m.bottomRows(g.boundary_nodes()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("R is an involution and Pt an isometry onto the half space") {
    for (int L : {5, 6}) {
        Grid g = tiny_grid(3, L);
        OperatorMatrix R = assemble_R(g);
        CHECK((R.m * R.m - MatrixXd::Identity(g.half_size(), g.half_size()))
                  .cwiseAbs()
                  .maxCoeff() == 0.0);
        OperatorMatrix Pt = assemble_Pt(g);
        CHECK((Pt.m * Pt.m.transpose() -
               MatrixXd::Identity(g.half_size(), g.half_size()))
                  .cwiseAbs()
                  .maxCoeff() == 0.0);

        // Pt^t extends by zero beyond the half space
        VectorXd v = random_matrix(g.half_size(), 1, 99).col(0);
        VectorXd ext = Pt.m.transpose() * v;
        CHECK(ext.head(g.half_size()) == v);
        CHECK(ext.tail(g.full_size() - g.half_size()).cwiseAbs().maxCoeff() == 0.0);

        // R reverses the block order of a trace
        VectorXd w = random_matrix(g.half_size(), 1, 100).col(0);
        MatrixXd rw = apply_R(g, w);
        const int nb = g.boundary_nodes();
        for (int l = 0; l < g.Lh; ++l)
            CHECK(rw.col(0).segment(l * nb, nb) ==
                  w.segment((g.Lh - 1 - l) * nb, nb));
        CHECK((R.m * w - rw.col(0)).cwiseAbs().maxCoeff() == 0.0);
    }
}

TEST_CASE("structured J application agrees with the dense matrix") {
    Grid g = tiny_grid(3, 7);
    OperatorMatrix J = assemble_J(g);
    MatrixXd x = random_matrix(g.full_size(), 3, 41);
    MatrixXd direct = J.m * x;
    MatrixXd fast = apply_J(g, x);
    CHECK((direct - fast).cwiseAbs().maxCoeff() <= 1e-14 * direct.cwiseAbs().maxCoeff());
}

TEST_CASE("assemble_K matches the dense operator product") {
    for (int L : {6, 7}) {  // even and odd
        Grid g = tiny_grid(3, L);
        MatrixXd lambda = random_matrix(g.full_size(), g.full_size(), 17 + L);
        OperatorMatrix J = assemble_J(g), R = assemble_R(g), Pt = assemble_Pt(g);
        MatrixXd lambda_T = Pt.m * lambda * Pt.m.transpose();
        MatrixXd dense = J.m * lambda * Pt.m.transpose() -
                         R.m * lambda_T * R.m * J.m * Pt.m.transpose();
        OperatorMatrix K = assemble_K(lambda, g);
        CHECK((K.m - dense).cwiseAbs().maxCoeff() <=
              1e-12 * dense.cwiseAbs().maxCoeff());
    }
}

TEST_CASE("K is linear in the ND matrix") {
    Grid g = tiny_grid(2, 5);
    MatrixXd lambda = random_matrix(g.full_size(), g.full_size(), 3);
    MatrixXd k1 = assemble_K(lambda, g).m;
    MatrixXd k2 = assemble_K((2.5 * lambda).eval(), g).m;
    CHECK((k2 - 2.5 * k1).cwiseAbs().maxCoeff() <= 1e-12 * k1.cwiseAbs().maxCoeff());
}

TEST_CASE("apply_B matches the dense composition and the constant identity") {
    Grid g = tiny_grid(3, 6);
    MatrixXd lambda = random_matrix(g.full_size(), g.full_size(), 23);
    BoundaryTrace d(SpaceTag::FullTime, g), n(SpaceTag::FullTime, g);
    d.values = random_matrix(g.full_size(), 1, 5).col(0);
    n.values = random_matrix(g.full_size(), 1, 6).col(0);

    OperatorMatrix J = assemble_J(g), R = assemble_R(g), Pt = assemble_Pt(g);
    MatrixXd lambda_T = Pt.m * lambda * Pt.m.transpose();
    VectorXd dense = J.m * d.values - R.m * lambda_T * R.m * J.m * n.values;
    BoundaryTrace fast = apply_B(lambda, g, d, n);
    CHECK((dense - fast.values).cwiseAbs().maxCoeff() <=
          1e-12 * dense.cwiseAbs().maxCoeff());

    // harmonic constant: T_D = 1, T_N = 0 -> (B 1)(t_l) = T - t_l
    d.values.setOnes();
    n.values.setZero();
    BoundaryTrace b1 = apply_B(lambda, g, d, n);
    const int nb = g.boundary_nodes();
    for (int l = 0; l < g.Lh; ++l)
        for (int b = 0; b < nb; ++b)
            CHECK(b1.values[l * nb + b] == doctest::Approx(g.T - g.t(l)).epsilon(1e-13));

    // linearity
    BoundaryTrace d2(SpaceTag::FullTime, g), n2(SpaceTag::FullTime, g);
    d2.values = random_matrix(g.full_size(), 1, 7).col(0);
    n2.values = random_matrix(g.full_size(), 1, 8).col(0);
    BoundaryTrace sum_d(SpaceTag::FullTime, g), sum_n(SpaceTag::FullTime, g);
    sum_d.values = d.values + d2.values;
    sum_n.values = n.values + n2.values;
    VectorXd lhs = apply_B(lambda, g, sum_d, sum_n).values;
    VectorXd rhs = apply_B(lambda, g, d, n).values + apply_B(lambda, g, d2, n2).values;
    CHECK((lhs - rhs).cwiseAbs().maxCoeff() <= 1e-12 * rhs.cwiseAbs().maxCoeff());
}
