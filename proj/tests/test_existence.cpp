#include <catch2/catch_amalgamated.hpp>

#include "hlme/existence.hpp"
#include "hlme/sphere.hpp"

using namespace hlme;

namespace {

HlmeInstance make(int n, std::vector<SymMatrix> A) {
    HlmeInstance inst;
    inst.n = n;
    inst.A = std::move(A);
    return inst;
}

} // namespace

TEST_CASE("structure report classifies and counts indefinite matrices") {
    const StructureReport both_definite =
        check_structure_conditions(make(3, {SymMatrix::identity(3),
                                            SymMatrix::identity(3).scaled(-1.0)}));
    CHECK(both_definite.holds_i);
    CHECK(both_definite.indefinite_count == 0);

    const StructureReport one_indefinite =
        check_structure_conditions(make(3, {SymMatrix::diag({1, 1, -1}),
                                            SymMatrix::diag({1, 0, 0})}));
    CHECK(one_indefinite.holds_ii);
    CHECK(one_indefinite.indefinite_count == 1);
}

TEST_CASE("zero-set containment holds for proportional matrices") {
    const StructureReport rep = check_structure_conditions(builtin("remark35").instance);
    CHECK_FALSE(rep.holds_i);
    CHECK_FALSE(rep.holds_ii);
    CHECK(rep.holds_iii == ZeroSetContainment::Holds);
    CHECK(rep.pivot >= 0);
}

TEST_CASE("zero-set containment fails with a re-verified counterexample") {
    const HlmeInstance inst = builtin("remark36").instance;
    const StructureReport rep = check_structure_conditions(inst);
    CHECK_FALSE(rep.holds_i);
    CHECK_FALSE(rep.holds_ii);
    REQUIRE(rep.holds_iii == ZeroSetContainment::Fails);
    REQUIRE(rep.counterexample.has_value());
    const Eigen::VectorXd& x = *rep.counterexample;
    const double ez = epsZero(inst);
    bool on_some_zero_set_and_off_another = false;
    for (int k = 0; k < inst.m(); ++k) {
        if (std::abs(inst.A[k].quadForm(x)) > ez) continue;
        for (int l = 0; l < inst.m(); ++l)
            if (l != k && std::abs(inst.A[l].quadForm(x)) > 10.0 * ez)
                on_some_zero_set_and_off_another = true;
    }
    CHECK(on_some_zero_set_and_off_another);
}

TEST_CASE("extraction follows the analytic interval root") {
    const HlmeInstance inst = make(3, {SymMatrix::diag({1, 1, -1})});
    const auto trace = extract_rank_one(inst, SymMatrix::diag({1, 0, 1}));
    REQUIRE(trace.has_value());
    CHECK(trace->branch == ExtractionBranch::IvtRoot);
    CHECK(trace->gamma == Catch::Approx(0.5).margin(1e-12));
    CHECK(trace->alpha * trace->delta < 0.0);
    CHECK(trace->w.norm() == Catch::Approx(1.0).margin(1e-12));
    CHECK(trace->max_residual <= 1e-10);
    // w = (1,0,1)/sqrt(2) up to sign
    CHECK(std::abs(trace->w(0)) == Catch::Approx(1.0 / std::sqrt(2.0)).margin(1e-9));
    CHECK(std::abs(trace->w(1)) <= 1e-9);
}

TEST_CASE("extraction short-circuits on rank-one input") {
    Eigen::VectorXd x(3);
    x << 0, 1, 1;
    x /= std::sqrt(2.0);
    const HlmeInstance inst = builtin("remark36").instance;
    const auto trace = extract_rank_one(inst, SymMatrix::outer(x));
    REQUIRE(trace.has_value());
    CHECK(trace->branch == ExtractionBranch::DirectEigenvector);
    CHECK(trace->max_residual <= 1e-12);
}

TEST_CASE("extraction enforces its preconditions") {
    const HlmeInstance inst = make(3, {SymMatrix::diag({1, 1, -1})});
    CHECK_THROWS_AS(extract_rank_one(inst, SymMatrix::diag({1, 0, -1})), PreconditionViolated);
    CHECK_THROWS_AS(extract_rank_one(inst, SymMatrix::diag({1, 0, 0})), PreconditionViolated);
    CHECK_THROWS_AS(extract_rank_one(inst, SymMatrix(3)), PreconditionViolated);
    CHECK_THROWS_AS(extract_rank_one(inst, SymMatrix::identity(2)), PreconditionViolated);
}

TEST_CASE("extraction returns nothing when no rank-one point exists") {
    // X = I/2 is feasible for the 2x2 pencil but the system has no rank-one
    // solution, so every candidate must fail the residual check.
    const HlmeInstance inst = builtin("simple2x2").instance;
    SymMatrix X = SymMatrix::identity(2).scaled(0.5);
    CHECK_FALSE(extract_rank_one(inst, X).has_value());
}

TEST_CASE("semidefinite-only instances extract from any retained eigenvector") {
    // A = e3 e3' is PSD; X = diag(1,1,0) is feasible with rank 2.
    const HlmeInstance inst = make(3, {SymMatrix::diag({0, 0, 1})});
    const auto trace = extract_rank_one(inst, SymMatrix::diag({0.5, 0.5, 0}));
    REQUIRE(trace.has_value());
    CHECK(trace->branch == ExtractionBranch::DirectEigenvector);
    CHECK(trace->max_residual <= 1e-12);
}

TEST_CASE("sign condition holds for the derived sign-definite family") {
    // A_i = -(e_i e3' + e3 e_i'): x_i (x'A_i x) = -2 x_i^2 x_3 >= 0 when x_3 < 0.
    HlmeInstance inst = make(3, {SymMatrix(3), SymMatrix(3)});
    inst.A[0].set(0, 2, -1.0);
    inst.A[1].set(1, 2, -1.0);
    const SignConditionReport rep = check_sign_condition(inst, {100, 100, 5, 1});
    CHECK(rep.verdict == SignConditionVerdict::HoldsSampled);
    CHECK(rep.worst_value >= -epsZero(inst));
}

TEST_CASE("sign condition finds a counterexample for the indefinite 2x2 form") {
    const HlmeInstance inst = make(2, {SymMatrix::diag({1, -1})});
    const SignConditionReport rep = check_sign_condition(inst, {100, 100, 5, 1});
    REQUIRE(rep.verdict == SignConditionVerdict::CounterexampleFound);
    REQUIRE(rep.counterexample.has_value());
    const Eigen::VectorXd& x = *rep.counterexample;
    CHECK(x.norm() == Catch::Approx(1.0).margin(1e-9));
    CHECK(x(1) < 0.0);
    // Re-verify from the raw instance: the padded system is (A1) itself here.
    CHECK(x(0) * inst.A[0].quadForm(x) < -epsZero(inst));
}

TEST_CASE("sign condition is not applicable when there are too many matrices") {
    const HlmeInstance inst = builtin("simple2x2").instance;  // m+1 = 3 > n = 2
    CHECK(check_sign_condition(inst).verdict == SignConditionVerdict::NotApplicable);
}

TEST_CASE("all-zero instance yields an everywhere-empty active set and a bonus witness") {
    const HlmeInstance inst = make(2, {SymMatrix(2)});
    const SignConditionReport rep = check_sign_condition(inst, {50, 50, 2, 1});
    CHECK(rep.verdict == SignConditionVerdict::HoldsSampled);
    REQUIRE(rep.bonus_rank_one.has_value());
    for (const SymMatrix& Ai : inst.A)
        CHECK(std::abs(Ai.quadForm(*rep.bonus_rank_one)) <= 1e-12);
}

TEST_CASE("crossing root solves the endpoint quadratic") {
    Rng rng(5);
    for (int trial = 0; trial < 50; ++trial) {
        const double a = 0.1 + rng.uniform01();
        const double d = -(0.1 + rng.uniform01());
        const double b = 2.0 * rng.normal();
        const double g = detail::crossingRoot(a, b, d);
        CHECK(g > 0.0);
        CHECK(g < 1.0);
        const double val = g * g * a + 2.0 * g * (1.0 - g) * b + (1.0 - g) * (1.0 - g) * d;
        CHECK(std::abs(val) <= 1e-9 * std::max({1.0, std::abs(a), std::abs(d), std::abs(b)}));
    }
}
