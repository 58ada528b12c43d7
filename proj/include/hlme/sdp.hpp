#ifndef HLME_SDP_HPP
#define HLME_SDP_HPP

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "hlme/errors.hpp"
#include "hlme/instance.hpp"
#include "hlme/linalg.hpp"
#include "hlme/sym_matrix.hpp"

namespace hlme {

struct SolverOptions {
    double eps_sdp = 1e-7;   // feasibility tolerance on returned solutions
    double eps_gap = 1e-6;   // primal/dual agreement tolerance
    int max_iter = 50000;
    double rho = 1.0;        // initial ADMM penalty
};

enum class SdpStatus { Optimal, Infeasible, Unbounded, MaxIter };

inline const char* toString(SdpStatus s) {
    switch (s) {
        case SdpStatus::Optimal: return "Optimal";
        case SdpStatus::Infeasible: return "Infeasible";
        case SdpStatus::Unbounded: return "Unbounded";
        case SdpStatus::MaxIter: return "MaxIter";
    }
    return "?";
}

// ---------------------------------------------------------------------------
// Internal engine: minimize c'y  s.t.  G y = h,  F0_b + sum_j y_j F_{b,j} in
// the PSD cone for every block b. Alternating projection (ADMM) between the
// affine subproblem and the PSD cone, with over-relaxation and penalty
// rebalancing. Deterministic: fixed start, no randomness.
// ---------------------------------------------------------------------------

struct LmiBlock {
    Eigen::MatrixXd F0;
    std::vector<Eigen::MatrixXd> F;  // one coefficient matrix per variable
};

struct LmiProblem {
    Eigen::VectorXd c;
    Eigen::MatrixXd G;  // q x p (q may be 0)
    Eigen::VectorXd h;
    std::vector<LmiBlock> blocks;

    int numVars() const { return static_cast<int>(c.size()); }
};

struct LmiSolution {
    SdpStatus status = SdpStatus::MaxIter;
    Eigen::VectorXd y;
    Eigen::VectorXd eq_dual;                 // multipliers of G y = h
    std::vector<Eigen::MatrixXd> cone_dual;  // PSD multiplier per block
    double obj = 0.0;
    double dual_obj = 0.0;
    double primal_residual = 0.0;  // || F(y) - S ||
    double dual_residual = 0.0;
    int iterations = 0;
    std::string diagnostics;
};

namespace detail {

inline Eigen::MatrixXd projectPsd(const Eigen::MatrixXd& M, Eigen::MatrixXd* neg_part) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (M + M.transpose()));
    if (es.info() != Eigen::Success) throw NumericalFailure("sdp: projection eigensolver failed");
    const Eigen::VectorXd pos = es.eigenvalues().cwiseMax(0.0);
    Eigen::MatrixXd P = es.eigenvectors() * pos.asDiagonal() * es.eigenvectors().transpose();
    if (neg_part) *neg_part = M - P;  // PSD projection residual, NSD up to symmetrization
    return P;
}

} // namespace detail

inline LmiSolution solveLmi(const LmiProblem& prob, const SolverOptions& opts = {}) {
    const int p = prob.numVars();
    const int q = static_cast<int>(prob.h.size());
    const int nb = static_cast<int>(prob.blocks.size());
    for (const LmiBlock& b : prob.blocks)
        if (static_cast<int>(b.F.size()) != p)
            throw DimensionMismatch("solveLmi: block coefficient count != variable count");

    // Gram matrix of the cone map, M_{jk} = sum_b <F_{b,j}, F_{b,k}>.
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(p, p);
    for (const LmiBlock& b : prob.blocks)
        for (int j = 0; j < p; ++j)
            for (int k = j; k < p; ++k) {
                const double v = (b.F[j].array() * b.F[k].array()).sum();
                M(j, k) += v;
                if (k != j) M(k, j) += v;
            }

    double rho = opts.rho;
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> kkt;
    auto factorize = [&]() {
        Eigen::MatrixXd K = Eigen::MatrixXd::Zero(p + q, p + q);
        K.topLeftCorner(p, p) = rho * M;
        if (q > 0) {
            K.topRightCorner(p, q) = prob.G.transpose();
            K.bottomLeftCorner(q, p) = prob.G;
        }
        kkt.compute(K);
    };
    factorize();

    std::vector<Eigen::MatrixXd> S(nb), U(nb), Fy(nb);
    for (int b = 0; b < nb; ++b) {
        S[b] = detail::projectPsd(prob.blocks[b].F0, nullptr);
        U[b] = Eigen::MatrixXd::Zero(prob.blocks[b].F0.rows(), prob.blocks[b].F0.cols());
        Fy[b] = prob.blocks[b].F0;
    }

    const double alpha = 1.6;  // over-relaxation
    Eigen::VectorXd y = Eigen::VectorXd::Zero(p);
    Eigen::VectorXd nu = Eigen::VectorXd::Zero(q);

    auto adjointApply = [&](const std::vector<Eigen::MatrixXd>& W) {
        Eigen::VectorXd out = Eigen::VectorXd::Zero(p);
        for (int b = 0; b < nb; ++b)
            for (int j = 0; j < p; ++j)
                out(j) += (prob.blocks[b].F[j].array() * W[b].array()).sum();
        return out;
    };

    const double tol = std::min(opts.eps_sdp, opts.eps_gap) * 1e-2;
    double prim_res = 0.0, dual_res = 0.0;
    int it = 0;
    int stall_count = 0;
    double prev_prim_res = std::numeric_limits<double>::infinity();
    bool stalled_infeasible = false;

    for (; it < opts.max_iter; ++it) {
        // Affine step: argmin_{Gy=h} c'y + (rho/2)||F(y) - (S - U)||^2.
        Eigen::VectorXd rhs(p + q);
        {
            std::vector<Eigen::MatrixXd> Z(nb);
            for (int b = 0; b < nb; ++b) Z[b] = S[b] - U[b] - prob.blocks[b].F0;
            rhs.head(p) = rho * adjointApply(Z) - prob.c;
            if (q > 0) rhs.tail(q) = prob.h;
        }
        const Eigen::VectorXd sol = kkt.solve(rhs);
        y = sol.head(p);
        if (q > 0) nu = sol.tail(q);
        if (!y.allFinite()) throw NumericalFailure("sdp: NaN/Inf in iterates");

        // Cone step with over-relaxation, then multiplier update.
        double dr2 = 0.0, pr2 = 0.0;
        for (int b = 0; b < nb; ++b) {
            Fy[b] = prob.blocks[b].F0;
            for (int j = 0; j < p; ++j) Fy[b] += y(j) * prob.blocks[b].F[j];
            const Eigen::MatrixXd Vhat = alpha * Fy[b] + (1.0 - alpha) * S[b];
            Eigen::MatrixXd neg;
            const Eigen::MatrixXd S_new = detail::projectPsd(Vhat + U[b], &neg);
            dr2 += (S_new - S[b]).squaredNorm();
            U[b] = neg;  // U accumulates exactly the projection's negative part
            S[b] = S_new;
            pr2 += (Fy[b] - S[b]).squaredNorm();
        }
        prim_res = std::sqrt(pr2);
        dual_res = rho * std::sqrt(dr2);

        if (prim_res <= tol && dual_res <= tol) break;

        // Stall detection: persistent nonzero displacement means the affine
        // set and the cone do not meet.
        if (prim_res > 1e-4 && std::abs(prim_res - prev_prim_res) < 1e-10 * (1.0 + prim_res)) {
            if (++stall_count >= 1000) {
                stalled_infeasible = true;
                break;
            }
        } else {
            stall_count = 0;
        }
        prev_prim_res = prim_res;

        if ((it + 1) % 100 == 0) {
            double scale = 1.0;
            if (prim_res > 10.0 * dual_res)
                scale = 2.0;
            else if (dual_res > 10.0 * prim_res)
                scale = 0.5;
            if (scale != 1.0 && rho * scale >= 1e-6 && rho * scale <= 1e6) {
                rho *= scale;
                for (int b = 0; b < nb; ++b) U[b] /= scale;
                factorize();
            }
        }
    }

    LmiSolution sol;
    sol.iterations = it;
    sol.y = y;
    sol.eq_dual = -nu;
    sol.cone_dual.resize(nb);
    for (int b = 0; b < nb; ++b) sol.cone_dual[b] = -rho * U[b];
    sol.obj = prob.c.dot(y);
    sol.dual_obj = (q > 0 ? prob.h.dot(sol.eq_dual) : 0.0);
    for (int b = 0; b < nb; ++b)
        sol.dual_obj -= (sol.cone_dual[b].array() * prob.blocks[b].F0.array()).sum();
    sol.primal_residual = prim_res;
    sol.dual_residual = dual_res;
    if (stalled_infeasible) {
        sol.status = SdpStatus::Infeasible;
        sol.diagnostics = "displacement stalled at " + std::to_string(prim_res) + " after " +
                          std::to_string(it) + " iterations";
    } else if (prim_res <= tol && dual_res <= tol) {
        sol.status = SdpStatus::Optimal;
    } else {
        sol.status = SdpStatus::MaxIter;
        sol.diagnostics = "max iterations reached; primal residual " + std::to_string(prim_res);
    }
    return sol;
}

// ---------------------------------------------------------------------------
// Standard-form problem over a matrix variable X >= 0.
// ---------------------------------------------------------------------------

enum class Relation { Eq, Le };
enum class Sense { Max, Min };

struct SdpConstraint {
    SymMatrix A;
    double b = 0.0;
    Relation rel = Relation::Eq;
};

struct SdpProblem {
    SymMatrix C;
    std::vector<SdpConstraint> constraints;
    int n = 1;
    Sense sense = Sense::Max;
};

struct SdpSolution {
    SdpStatus status = SdpStatus::MaxIter;
    SymMatrix X;
    std::vector<double> dual;  // one multiplier per constraint
    double primal_value = 0.0;
    double dual_value = 0.0;
    double gap = 0.0;
    std::vector<double> residuals;  // <A_i,X> - b_i per constraint
    int iterations = 0;
    std::string diagnostics;
};

namespace detail {

/// Symmetric basis element for vech coordinate k (row-major upper triangle).
inline void vechIndices(int n, int k, int* i, int* j) {
    int row = 0, offset = k;
    while (offset >= n - row) {
        offset -= n - row;
        ++row;
    }
    *i = row;
    *j = row + offset;
}

} // namespace detail

/// Solves max/min <C,X> subject to the listed constraints and X >= 0.
/// Le-constraints are handled through explicit scalar slacks.
inline SdpSolution solve(const SdpProblem& p, const SolverOptions& opts = {}) {
    const int n = p.n;
    const int p0 = n * (n + 1) / 2;
    const int mcon = static_cast<int>(p.constraints.size());
    int nslack = 0;
    for (const SdpConstraint& con : p.constraints)
        if (con.rel == Relation::Le) ++nslack;
    const int nv = p0 + nslack;

    LmiProblem lmi;
    lmi.c = Eigen::VectorXd::Zero(nv);
    const double sgn = (p.sense == Sense::Max) ? -1.0 : 1.0;
    for (int k = 0; k < p0; ++k) {
        int i, j;
        detail::vechIndices(n, k, &i, &j);
        lmi.c(k) = sgn * (i == j ? p.C(i, i) : 2.0 * p.C(i, j));
    }

    // Block 0: X(y) >= 0.
    LmiBlock xblock;
    xblock.F0 = Eigen::MatrixXd::Zero(n, n);
    xblock.F.assign(static_cast<size_t>(nv), Eigen::MatrixXd::Zero(n, n));
    for (int k = 0; k < p0; ++k) {
        int i, j;
        detail::vechIndices(n, k, &i, &j);
        xblock.F[static_cast<size_t>(k)](i, j) = 1.0;
        xblock.F[static_cast<size_t>(k)](j, i) = 1.0;
        if (i == j) xblock.F[static_cast<size_t>(k)](i, i) = 1.0;
    }
    lmi.blocks.push_back(std::move(xblock));

    // One 1x1 block per slack.
    for (int s = 0; s < nslack; ++s) {
        LmiBlock sb;
        sb.F0 = Eigen::MatrixXd::Zero(1, 1);
        sb.F.assign(static_cast<size_t>(nv), Eigen::MatrixXd::Zero(1, 1));
        sb.F[static_cast<size_t>(p0 + s)](0, 0) = 1.0;
        lmi.blocks.push_back(std::move(sb));
    }

    lmi.G = Eigen::MatrixXd::Zero(mcon, nv);
    lmi.h = Eigen::VectorXd::Zero(mcon);
    int slack = 0;
    for (int r = 0; r < mcon; ++r) {
        const SdpConstraint& con = p.constraints[static_cast<size_t>(r)];
        if (con.A.dim() != n) throw DimensionMismatch("solve: constraint matrix dim mismatch");
        for (int k = 0; k < p0; ++k) {
            int i, j;
            detail::vechIndices(n, k, &i, &j);
            lmi.G(r, k) = (i == j ? con.A(i, i) : 2.0 * con.A(i, j));
        }
        if (con.rel == Relation::Le) lmi.G(r, p0 + slack++) = 1.0;
        lmi.h(r) = con.b;
    }

    const LmiSolution ls = solveLmi(lmi, opts);

    SdpSolution out;
    out.status = ls.status;
    out.iterations = ls.iterations;
    out.diagnostics = ls.diagnostics;
    SymMatrix X(n);
    for (int k = 0; k < p0; ++k) {
        int i, j;
        detail::vechIndices(n, k, &i, &j);
        X.set(i, j, ls.y(k));
    }
    out.X = X;
    out.primal_value = (p.sense == Sense::Max) ? -ls.obj : ls.obj;
    out.dual_value = (p.sense == Sense::Max) ? -ls.dual_obj : ls.dual_obj;
    out.gap = std::abs(out.primal_value - out.dual_value);
    for (int r = 0; r < mcon; ++r) {
        const SdpConstraint& con = p.constraints[static_cast<size_t>(r)];
        out.residuals.push_back(X.inner(con.A) - con.b);
        // Internal minimization flips the multiplier sign for sense=max.
        out.dual.push_back((p.sense == Sense::Max) ? -ls.eq_dual(r) : ls.eq_dual(r));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Trace-relaxation value: eta = max { sum_i t_i tr(A_i) } over combinations
// with 0 <= sum t_i A_i <= I. Lower bound ceil(eta) on the maximum rank of a
// PSD combination of the A_i.
// ---------------------------------------------------------------------------

struct EtaStarResult {
    SdpStatus status = SdpStatus::MaxIter;
    double eta = 0.0;
    std::vector<double> t;
    SymMatrix witness;  // sum t_i A_i
    int iterations = 0;
    std::string diagnostics;
};

inline EtaStarResult solve_eta_star(const HlmeInstance& inst, const SolverOptions& opts = {}) {
    inst.validate();
    const int m = inst.m();
    const int n = inst.n;

    LmiProblem lmi;
    lmi.c = Eigen::VectorXd::Zero(m);
    for (int i = 0; i < m; ++i) lmi.c(i) = -inst.A[static_cast<size_t>(i)].trace();
    lmi.G = Eigen::MatrixXd::Zero(0, m);
    lmi.h = Eigen::VectorXd::Zero(0);

    LmiBlock lower;  // sum t_i A_i >= 0
    lower.F0 = Eigen::MatrixXd::Zero(n, n);
    LmiBlock upper;  // I - sum t_i A_i >= 0
    upper.F0 = Eigen::MatrixXd::Identity(n, n);
    for (int i = 0; i < m; ++i) {
        const Eigen::MatrixXd Ai = inst.A[static_cast<size_t>(i)].toDense();
        lower.F.push_back(Ai);
        upper.F.push_back(-Ai);
    }
    lmi.blocks.push_back(std::move(lower));
    lmi.blocks.push_back(std::move(upper));

    const LmiSolution ls = solveLmi(lmi, opts);

    EtaStarResult out;
    out.status = ls.status;
    out.iterations = ls.iterations;
    out.diagnostics = ls.diagnostics;
    out.eta = -ls.obj;
    out.t.assign(ls.y.data(), ls.y.data() + m);
    Eigen::MatrixXd W = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < m; ++i) W += ls.y(i) * inst.A[static_cast<size_t>(i)].toDense();
    out.witness = SymMatrix::fromDense(W, /*symmetrize=*/true);
    if (out.status == SdpStatus::MaxIter)
        out.diagnostics += "; eta is a lower estimate (unconverged)";
    return out;
}

// ---------------------------------------------------------------------------
// Dual certificate problem: min alpha s.t. sum t_i A_i + alpha I >= I,
// alpha >= 0. Value 0 exactly when some combination dominates the identity.
// ---------------------------------------------------------------------------

struct DualCertResult {
    SdpStatus status = SdpStatus::MaxIter;
    double alpha = 0.0;
    std::vector<double> t;
    int iterations = 0;
    std::string diagnostics;
};

inline DualCertResult solve_dual_cert(const HlmeInstance& inst, const SolverOptions& opts = {}) {
    inst.validate();
    const int m = inst.m();
    const int n = inst.n;
    const int p = m + 1;  // variables (alpha, t_1..t_m)

    LmiProblem lmi;
    lmi.c = Eigen::VectorXd::Zero(p);
    lmi.c(0) = 1.0;
    lmi.G = Eigen::MatrixXd::Zero(0, p);
    lmi.h = Eigen::VectorXd::Zero(0);

    LmiBlock lmiBlock;  // sum t_i A_i + (alpha - 1) I >= 0
    lmiBlock.F0 = -Eigen::MatrixXd::Identity(n, n);
    lmiBlock.F.push_back(Eigen::MatrixXd::Identity(n, n));
    for (int i = 0; i < m; ++i) lmiBlock.F.push_back(inst.A[static_cast<size_t>(i)].toDense());
    lmi.blocks.push_back(std::move(lmiBlock));

    LmiBlock nonneg;  // alpha >= 0
    nonneg.F0 = Eigen::MatrixXd::Zero(1, 1);
    nonneg.F.assign(static_cast<size_t>(p), Eigen::MatrixXd::Zero(1, 1));
    nonneg.F[0](0, 0) = 1.0;
    lmi.blocks.push_back(std::move(nonneg));

    const LmiSolution ls = solveLmi(lmi, opts);

    DualCertResult out;
    out.status = ls.status;
    out.iterations = ls.iterations;
    out.diagnostics = ls.diagnostics;
    out.alpha = ls.y(0);
    out.t.assign(ls.y.data() + 1, ls.y.data() + p);
    return out;
}

/// The feasibility test problem: max <I,X> s.t. <A_i,X>=0, tr(X) <= 1, X >= 0.
/// Optimal value 1 when a nonzero PSD solution exists, 0 otherwise.
inline SdpProblem feasibilityProblem(const HlmeInstance& inst) {
    inst.validate();
    SdpProblem p;
    p.n = inst.n;
    p.C = SymMatrix::identity(inst.n);
    p.sense = Sense::Max;
    for (const SymMatrix& Ai : inst.A) p.constraints.push_back({Ai, 0.0, Relation::Eq});
    p.constraints.push_back({SymMatrix::identity(inst.n), 1.0, Relation::Le});
    return p;
}

} // namespace hlme

#endif
