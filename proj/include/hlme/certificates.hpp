#ifndef HLME_CERTIFICATES_HPP
#define HLME_CERTIFICATES_HPP

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "hlme/instance.hpp"
#include "hlme/linalg.hpp"
#include "hlme/sdp.hpp"

namespace hlme {

/// Outcome of the trivial-only test: either a dual certificate t with
/// sum t_i A_i >= I (so X=0 is the only PSD solution), or a verified nonzero
/// PSD solution of unit trace.
struct TrivialityCertificate {
    bool inconclusive = false;
    bool trivial_only = false;
    std::vector<double> t;                     // present iff trivial_only
    SymMatrix combo;                           // sum t_i A_i
    double min_eig_vs_identity = 0.0;          // min eig of (combo - I)
    std::optional<SymMatrix> nonzero_solution; // present iff !trivial_only
    double primal_value = 0.0;                 // feasibility SDP value
    double dual_alpha = 0.0;                   // dual certificate SDP value
    std::string note;
};

/// Independent soundness check for a dual certificate: min eig of
/// (sum t_i A_i - I) must clear -eps. Never trusts solver status.
inline double certificateMargin(const HlmeInstance& inst, const std::vector<double>& t) {
    if (t.size() != inst.A.size())
        throw DimensionMismatch("certificateMargin: multiplier count mismatch");
    Eigen::MatrixXd W = -Eigen::MatrixXd::Identity(inst.n, inst.n);
    for (size_t i = 0; i < t.size(); ++i) W += t[i] * inst.A[i].toDense();
    return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(W).eigenvalues()(0);
}

inline bool verifyFeasiblePsd(const HlmeInstance& inst, const SymMatrix& X, double eps) {
    if (minEigenvalue(X) < -eps) return false;
    for (const SymMatrix& Ai : inst.A)
        if (std::abs(X.inner(Ai)) > eps) return false;
    return true;
}

inline TrivialityCertificate test_trivial_only(const HlmeInstance& inst,
                                               const SolverOptions& opts = {}) {
    inst.validate();
    const SdpSolution primal = solve(feasibilityProblem(inst), opts);
    const DualCertResult dual = solve_dual_cert(inst, opts);

    TrivialityCertificate cert;
    cert.primal_value = primal.primal_value;
    cert.dual_alpha = dual.alpha;

    if (primal.status == SdpStatus::MaxIter && dual.status == SdpStatus::MaxIter) {
        cert.inconclusive = true;
        cert.note = "both solves hit the iteration cap";
        return cert;
    }

    const bool trivial = primal.primal_value <= opts.eps_gap && dual.alpha <= opts.eps_gap;
    if (trivial) {
        // Polish: sparsify (drop multipliers whose removal keeps the
        // combination positive definite, smallest contribution first), then
        // scale t so the combination dominates I exactly, and re-verify by an
        // eigenvalue check independent of the solver.
        std::vector<double> t = dual.t;
        const auto comboMinEig = [&](const std::vector<double>& s) {
            Eigen::MatrixXd W = Eigen::MatrixXd::Zero(inst.n, inst.n);
            for (size_t i = 0; i < s.size(); ++i) W += s[i] * inst.A[i].toDense();
            return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(W).eigenvalues()(0);
        };
        std::vector<size_t> order(t.size());
        for (size_t i = 0; i < t.size(); ++i) order[i] = i;
        std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
            return std::abs(t[a]) * inst.A[a].frobeniusNorm() <
                   std::abs(t[b]) * inst.A[b].frobeniusNorm();
        });
        for (size_t i : order) {
            if (t[i] == 0.0) continue;
            std::vector<double> trial = t;
            trial[i] = 0.0;
            if (comboMinEig(trial) > 1e-8) t = std::move(trial);
        }
        const double lmin = comboMinEig(t);
        if (lmin > 0.0)
            for (double& ti : t) ti /= lmin;
        const double margin = certificateMargin(inst, t);
        if (margin < -opts.eps_sdp) {
            cert.inconclusive = true;
            cert.note = "solver reported trivial-only but the dual certificate failed the "
                        "independent eigenvalue check";
            return cert;
        }
        cert.trivial_only = true;
        cert.t = t;
        Eigen::MatrixXd Wp = Eigen::MatrixXd::Zero(inst.n, inst.n);
        for (size_t i = 0; i < t.size(); ++i) Wp += t[i] * inst.A[i].toDense();
        cert.combo = SymMatrix::fromDense(Wp, true);
        cert.min_eig_vs_identity = margin;
        return cert;
    }

    // Not trivial: the primal X must itself verify as a nonzero PSD solution.
    const SymMatrix& X = primal.X;
    const double trace = X.trace();
    if (primal.primal_value >= 1.0 - opts.eps_gap &&
        std::abs(trace - 1.0) <= opts.eps_sdp + opts.eps_gap &&
        verifyFeasiblePsd(inst, X, opts.eps_sdp)) {
        cert.trivial_only = false;
        cert.nonzero_solution = X;
        return cert;
    }
    cert.inconclusive = true;
    cert.note = "solver reported a nonzero solution but it failed verification";
    return cert;
}

/// Barvinok-Pataki style bound floor((sqrt(8k+1)-1)/2) for a system of k
/// equations; applied here to the trace-one lift, so k = m+1.
inline int barvinokPatakiBound(int equations) {
    return static_cast<int>(std::floor((std::sqrt(8.0 * equations + 1.0) - 1.0) / 2.0));
}

struct RankBoundReport {
    bool vacuous = false;  // trivial-only instance: no nonzero solutions at all
    double eta = 0.0;
    int eta_ceil = 0;
    int r_star_lower = 0;
    int r_star_upper = 0;
    int all_solutions_bound = 0;     // n - r_star_lower
    int min_rank_bound_bp = 0;       // lifted Barvinok-Pataki bound
    int combined_min_rank_bound = 0;
    std::vector<double> t;
    SymMatrix eta_witness;
    std::string note;
};

inline RankBoundReport compute_bounds(const HlmeInstance& inst, const TrivialityCertificate& cert,
                                      const SolverOptions& opts = {}) {
    inst.validate();
    if (cert.inconclusive) throw PreconditionViolated("compute_bounds: inconclusive certificate");
    const int n = inst.n;
    const int m = inst.m();

    const EtaStarResult eta = solve_eta_star(inst, opts);

    RankBoundReport rep;
    rep.eta = eta.eta;
    rep.t = eta.t;
    rep.eta_witness = eta.witness;
    // Rounding guard keeps solver noise from pushing the ceiling up a level.
    rep.eta_ceil = std::max(0, static_cast<int>(std::ceil(eta.eta - 10.0 * opts.eps_gap)));
    rep.r_star_lower = std::max(rep.eta_ceil, numeric_rank(eta.witness));
    rep.min_rank_bound_bp = barvinokPatakiBound(m + 1);
    if (cert.trivial_only) {
        rep.vacuous = true;
        rep.r_star_upper = n;
        rep.all_solutions_bound = 0;
        rep.combined_min_rank_bound = 0;
        rep.note = "no nonzero solutions; rank bounds are vacuous";
    } else {
        rep.r_star_upper = n - 1;
        rep.all_solutions_bound = n - rep.r_star_lower;
        rep.combined_min_rank_bound = std::min(rep.all_solutions_bound, rep.min_rank_bound_bp);
    }
    if (eta.status == SdpStatus::MaxIter)
        rep.note += (rep.note.empty() ? "" : "; ") +
                    std::string("eta unconverged: reported value is a lower estimate");
    return rep;
}

enum class PencilDecision { ExistsRankOne, NoRankOne, NotApplicable, Inconclusive };

inline const char* toString(PencilDecision d) {
    switch (d) {
        case PencilDecision::ExistsRankOne: return "ExistsRankOne";
        case PencilDecision::NoRankOne: return "NoRankOne";
        case PencilDecision::NotApplicable: return "NotApplicable";
        case PencilDecision::Inconclusive: return "Inconclusive";
    }
    return "?";
}

/// Dines-Brickman decision for two-matrix systems with n >= 3: a rank-one
/// solution exists exactly when no combination t1 A1 + t2 A2 is positive
/// definite. Exact characterization, so the result is certificate grade.
inline PencilDecision dines_brickman(const HlmeInstance& inst, const SolverOptions& opts = {},
                                     TrivialityCertificate* cert_out = nullptr) {
    inst.validate();
    if (inst.m() != 2 || inst.n < 3) return PencilDecision::NotApplicable;
    const TrivialityCertificate cert = test_trivial_only(inst, opts);
    if (cert_out) *cert_out = cert;
    if (cert.inconclusive) return PencilDecision::Inconclusive;
    return cert.trivial_only ? PencilDecision::NoRankOne : PencilDecision::ExistsRankOne;
}

} // namespace hlme

#endif
