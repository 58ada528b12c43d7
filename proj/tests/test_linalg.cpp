#include <catch2/catch_amalgamated.hpp>

#include "hlme/linalg.hpp"
#include "hlme/sphere.hpp"

using namespace hlme;

TEST_CASE("SymMatrix storage round-trips the upper triangle") {
    SymMatrix M(3);
    M.set(0, 0, 1.0);
    M.set(0, 2, -2.5);
    M.set(1, 2, 4.0);
    CHECK(M(0, 0) == 1.0);
    CHECK(M(2, 0) == -2.5);
    CHECK(M(2, 1) == 4.0);
    CHECK(M(1, 1) == 0.0);

    const Eigen::MatrixXd D = M.toDense();
    CHECK(D(0, 2) == D(2, 0));
    CHECK(SymMatrix::fromDense(D).toDense().isApprox(D));
}

TEST_CASE("fromDense rejects asymmetric input unless symmetrize is requested") {
    Eigen::MatrixXd D(2, 2);
    D << 1, 2, 3, 1;
    CHECK_THROWS_AS(SymMatrix::fromDense(D), AsymmetricInput);
    const SymMatrix S = SymMatrix::fromDense(D, /*symmetrize=*/true);
    CHECK(S(0, 1) == Catch::Approx(2.5));
}

TEST_CASE("fromDense rejects non-finite entries") {
    Eigen::MatrixXd D = Eigen::MatrixXd::Zero(2, 2);
    D(0, 0) = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(SymMatrix::fromDense(D), NumericalFailure);
}

TEST_CASE("inner product matches trace(A*B) and quadForm matches x'Ax") {
    Rng rng(42);
    for (int trial = 0; trial < 10; ++trial) {
        const int n = 4;
        Eigen::MatrixXd A = Eigen::MatrixXd::NullaryExpr(n, n, [&](Eigen::Index, Eigen::Index) {
            return rng.normal();
        });
        Eigen::MatrixXd B = Eigen::MatrixXd::NullaryExpr(n, n, [&](Eigen::Index, Eigen::Index) {
            return rng.normal();
        });
        A = (A + A.transpose()).eval();
        B = (B + B.transpose()).eval();
        const SymMatrix SA = SymMatrix::fromDense(A);
        const SymMatrix SB = SymMatrix::fromDense(B);
        CHECK(SA.inner(SB) == Catch::Approx((A * B).trace()).margin(1e-12));
        const Eigen::VectorXd x = rng.unitVector(n);
        CHECK(SA.quadForm(x) == Catch::Approx(x.dot(A * x)).margin(1e-12));
        CHECK(SA.trace() == Catch::Approx(A.trace()));
        CHECK(SA.frobeniusNorm() == Catch::Approx(A.norm()));
    }
}

TEST_CASE("outer builds xx^T") {
    Eigen::VectorXd x(3);
    x << 1, -2, 0.5;
    const SymMatrix M = SymMatrix::outer(x);
    CHECK(M.toDense().isApprox(x * x.transpose()));
    CHECK(numeric_rank(M) == 1);
}

TEST_CASE("eigh reconstructs the matrix with sorted eigenvalues") {
    const SymMatrix M = SymMatrix::diag({3, -1, 2});
    const EigDecomp d = eigh(M);
    CHECK(d.values(0) <= d.values(1));
    CHECK(d.values(1) <= d.values(2));
    const Eigen::MatrixXd R = d.vectors * d.values.asDiagonal() * d.vectors.transpose();
    CHECK(R.isApprox(M.toDense(), 1e-12));
}

TEST_CASE("classify covers every definiteness class") {
    CHECK(classify(SymMatrix::diag({1, 2})) == DefinitenessClass::PositiveDefinite);
    CHECK(classify(SymMatrix::diag({1, 0})) == DefinitenessClass::PositiveSemidefinite);
    CHECK(classify(SymMatrix::diag({-1, -2})) == DefinitenessClass::NegativeDefinite);
    CHECK(classify(SymMatrix::diag({-1, 0})) == DefinitenessClass::NegativeSemidefinite);
    CHECK(classify(SymMatrix::diag({1, -1})) == DefinitenessClass::Indefinite);
    CHECK(classify(SymMatrix(3)) == DefinitenessClass::Zero);
}

TEST_CASE("classify is sign-covariant") {
    const SymMatrix M = SymMatrix::diag({2, 1, 0});
    CHECK(classify(M) == DefinitenessClass::PositiveSemidefinite);
    CHECK(classify(M.scaled(-1.0)) == DefinitenessClass::NegativeSemidefinite);
}

TEST_CASE("numeric_rank with explicit and default tolerances") {
    CHECK(numeric_rank(SymMatrix::diag({1, 1e-12, 0})) == 1);
    CHECK(numeric_rank(SymMatrix::diag({5, -3, 1e-3})) == 3);
    CHECK(numeric_rank(SymMatrix::diag({5, -3, 1e-3}), 1e-2) == 2);
    CHECK(numeric_rank(SymMatrix(4)) == 0);
}

TEST_CASE("psd_project is idempotent, PSD, and fixes PSD inputs") {
    const SymMatrix M = SymMatrix::diag({2, -3, 0.5});
    const SymMatrix P = psd_project(M);
    CHECK(minEigenvalue(P) >= -1e-12);
    CHECK(psd_project(P).toDense().isApprox(P.toDense(), 1e-12));
    CHECK(P.toDense().isApprox(SymMatrix::diag({2, 0, 0.5}).toDense(), 1e-12));

    const SymMatrix Q = SymMatrix::diag({1, 2, 3});
    CHECK(psd_project(Q).toDense().isApprox(Q.toDense(), 1e-12));
}

TEST_CASE("psd_project is the Frobenius-nearest PSD point on random input") {
    Rng rng(7);
    for (int trial = 0; trial < 5; ++trial) {
        Eigen::MatrixXd A = Eigen::MatrixXd::NullaryExpr(4, 4, [&](Eigen::Index, Eigen::Index) {
            return rng.normal();
        });
        A = (A + A.transpose()).eval();
        const SymMatrix M = SymMatrix::fromDense(A);
        const SymMatrix P = psd_project(M);
        const double dist = (P.toDense() - A).norm();
        // Any other PSD candidate must be at least as far.
        const SymMatrix alt = psd_project(SymMatrix::fromDense(
            A + 0.1 * Eigen::MatrixXd::Identity(4, 4)));
        CHECK((alt.toDense() - A).norm() >= dist - 1e-9);
    }
}

TEST_CASE("sphere grids produce unit vectors and the RNG is deterministic") {
    for (int n : {2, 3, 4, 5}) {
        const auto grid = sphereGrid(n, 200);
        REQUIRE(grid.size() == 200);
        for (const auto& x : grid) CHECK(x.norm() == Catch::Approx(1.0).margin(1e-12));
    }
    Rng a(123), b(123);
    for (int i = 0; i < 100; ++i) CHECK(a.normal() == b.normal());
}
