#ifndef HLME_EXISTENCE_HPP
#define HLME_EXISTENCE_HPP

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "hlme/instance.hpp"
#include "hlme/linalg.hpp"
#include "hlme/sphere.hpp"

namespace hlme {

inline constexpr double kEpsAcceptDefault = 1e-6;

/// Zero-decision tolerance for quadratic forms of the instance.
inline double epsZero(const HlmeInstance& inst) {
    double scale = 1.0;
    for (const SymMatrix& Ai : inst.A) scale = std::max(scale, Ai.frobeniusNorm());
    return 1e-8 * scale;
}

// ---------------------------------------------------------------------------
// Definiteness-structure conditions. A rank-one solution is guaranteed when a
// nonzero PSD solution exists and (i) every matrix is semidefinite, or (ii)
// exactly one is indefinite, or (iii) one indefinite matrix's zero set is
// contained in every other indefinite matrix's zero set (decided by sampling).
// ---------------------------------------------------------------------------

enum class ZeroSetContainment { Holds, Fails, Unknown, NotEvaluated };

inline const char* toString(ZeroSetContainment c) {
    switch (c) {
        case ZeroSetContainment::Holds: return "Holds";
        case ZeroSetContainment::Fails: return "Fails";
        case ZeroSetContainment::Unknown: return "Unknown";
        case ZeroSetContainment::NotEvaluated: return "NotEvaluated";
    }
    return "?";
}

struct StructureReport {
    std::vector<DefinitenessClass> classes;
    int indefinite_count = 0;
    bool holds_i = false;
    bool holds_ii = false;
    ZeroSetContainment holds_iii = ZeroSetContainment::NotEvaluated;
    int pivot = -1;                             // index of the containing matrix when Holds
    std::optional<Eigen::VectorXd> counterexample;  // x on some pivot's zero set violating containment
    int samples_used = 0;
};

struct StructureOptions {
    int samples = 500;
    uint64_t seed = 0;
};

namespace detail {

/// Root in (0,1) of g^2 a + 2 g(1-g) b + (1-g)^2 d = 0 given a*d < 0.
inline double crossingRoot(double a, double b, double d) {
    const double qa = a - 2.0 * b + d;
    const double qb = 2.0 * (b - d);
    const double qc = d;
    double g;
    if (std::abs(qa) < 1e-300) {
        g = -qc / qb;
    } else {
        const double disc = std::sqrt(std::max(0.0, qb * qb - 4.0 * qa * qc));
        const double r1 = (-qb + disc) / (2.0 * qa);
        const double r2 = (-qb - disc) / (2.0 * qa);
        g = (r1 > 0.0 && r1 < 1.0) ? r1 : r2;
    }
    return std::clamp(g, 1e-12, 1.0 - 1e-12);
}

/// Draws a point on {x : x'Ax = 0} by crossing between opposite-sign samples.
inline std::optional<Eigen::VectorXd> sampleZeroSet(const SymMatrix& A, Rng& rng,
                                                    int attempts = 200) {
    const int n = A.dim();
    for (int tries = 0; tries < attempts; ++tries) {
        const Eigen::VectorXd a = rng.unitVector(n);
        const Eigen::VectorXd b = rng.unitVector(n);
        const double qa = A.quadForm(a);
        const double qb = A.quadForm(b);
        if (qa * qb >= 0.0) continue;
        const double ab = a.dot(A.toDense() * b);
        const double g = (qa > 0.0) ? crossingRoot(qa, ab, qb) : crossingRoot(qb, ab, qa);
        Eigen::VectorXd x = (qa > 0.0) ? (g * a + (1.0 - g) * b).eval()
                                       : (g * b + (1.0 - g) * a).eval();
        const double nrm = x.norm();
        if (nrm < 1e-12) continue;
        return x / nrm;
    }
    return std::nullopt;
}

} // namespace detail

inline StructureReport check_structure_conditions(const HlmeInstance& inst,
                                                  const StructureOptions& opts = {}) {
    inst.validate();
    StructureReport rep;
    const double ez = epsZero(inst);
    std::vector<int> indef;
    for (int i = 0; i < inst.m(); ++i) {
        rep.classes.push_back(classify(inst.A[static_cast<size_t>(i)]));
        if (rep.classes.back() == DefinitenessClass::Indefinite) indef.push_back(i);
    }
    rep.indefinite_count = static_cast<int>(indef.size());
    rep.holds_i = rep.indefinite_count == 0;
    rep.holds_ii = rep.indefinite_count == 1;
    if (rep.indefinite_count < 2) return rep;

    bool any_unknown = false;
    for (int k : indef) {
        Rng rng(opts.seed * 0x9e3779b9ULL + static_cast<uint64_t>(k) + 1);
        bool pivot_ok = true;
        bool pivot_unknown = false;
        for (int s = 0; s < opts.samples && pivot_ok; ++s) {
            const auto x = detail::sampleZeroSet(inst.A[static_cast<size_t>(k)], rng);
            if (!x) {
                pivot_unknown = true;
                break;
            }
            ++rep.samples_used;
            for (int l : indef) {
                if (l == k) continue;
                const double q = inst.A[static_cast<size_t>(l)].quadForm(*x);
                if (std::abs(q) > 10.0 * ez) {
                    // Verified counterexample for this pivot.
                    if (std::abs(inst.A[static_cast<size_t>(k)].quadForm(*x)) <= ez &&
                        !rep.counterexample)
                        rep.counterexample = *x;
                    pivot_ok = false;
                    break;
                }
            }
        }
        if (pivot_unknown) {
            any_unknown = true;
            continue;
        }
        if (pivot_ok) {
            rep.holds_iii = ZeroSetContainment::Holds;
            rep.pivot = k;
            return rep;
        }
    }
    rep.holds_iii = any_unknown || !rep.counterexample ? ZeroSetContainment::Unknown
                                                       : ZeroSetContainment::Fails;
    return rep;
}

// ---------------------------------------------------------------------------
// Constructive rank-one extraction from a feasible PSD solution X*.
// ---------------------------------------------------------------------------

enum class ExtractionBranch { DirectEigenvector, IvtRoot };

inline const char* toString(ExtractionBranch b) {
    return b == ExtractionBranch::DirectEigenvector ? "DirectEigenvector" : "IvtRoot";
}

struct ExtractionTrace {
    ExtractionBranch branch = ExtractionBranch::DirectEigenvector;
    int eig_index = -1;                // DirectEigenvector: retained eigenvector index
    int p = -1, q = -1;                // IvtRoot: combined eigenvector indices
    double gamma = 0.0;                // IvtRoot: crossing parameter in (0,1)
    double alpha = 0.0, delta = 0.0;   // IvtRoot: endpoint quadratic-form values
    int pivot = -1;                    // indefinite matrix used for the crossing
    Eigen::VectorXd w;                 // unit result vector
    std::vector<double> residuals;     // w'A_i w per matrix
    double max_residual = 0.0;
};

struct ExtractionOptions {
    double eps_sdp = 1e-7;
    double eps_accept = kEpsAcceptDefault;
    uint64_t seed = 0;
};

namespace detail {

/// One damped Gauss-Newton step for the residuals w'A_i w on the unit sphere.
inline Eigen::VectorXd spherePolishStep(const HlmeInstance& inst, const Eigen::VectorXd& w) {
    const int n = inst.n;
    const int m = inst.m();
    Eigen::VectorXd r(m);
    Eigen::MatrixXd J(m, n);
    for (int i = 0; i < m; ++i) {
        r(i) = inst.A[static_cast<size_t>(i)].quadForm(w);
        J.row(i) = 2.0 * (inst.A[static_cast<size_t>(i)].toDense() * w).transpose();
    }
    const Eigen::MatrixXd P = Eigen::MatrixXd::Identity(n, n) - w * w.transpose();
    const Eigen::MatrixXd Jt = J * P;
    const Eigen::MatrixXd H =
        Jt.transpose() * Jt + 1e-12 * Eigen::MatrixXd::Identity(n, n);
    const Eigen::VectorXd d = -H.ldlt().solve(Jt.transpose() * r);
    Eigen::VectorXd w2 = w + P * d;
    const double nrm = w2.norm();
    return nrm > 1e-12 ? Eigen::VectorXd(w2 / nrm) : w;
}

inline ExtractionTrace finishTrace(const HlmeInstance& inst, ExtractionTrace tr) {
    tr.residuals.clear();
    tr.max_residual = 0.0;
    for (const SymMatrix& Ai : inst.A) {
        tr.residuals.push_back(Ai.quadForm(tr.w));
        tr.max_residual = std::max(tr.max_residual, std::abs(tr.residuals.back()));
    }
    return tr;
}

} // namespace detail

/// Rebuilds a rank-one solution from a feasible X* along its retained
/// eigenvectors: either one eigenvector already solves every equation, or a
/// crossing between two opposite-sign eigenvectors of the pivot matrix does.
/// Returns nothing when no candidate passes the residual check.
inline std::optional<ExtractionTrace> extract_rank_one(const HlmeInstance& inst,
                                                       const SymMatrix& X_star,
                                                       const ExtractionOptions& opts = {}) {
    inst.validate();
    if (X_star.dim() != inst.n)
        throw PreconditionViolated("extract_rank_one: X* dimension mismatch");
    if (minEigenvalue(X_star) < -opts.eps_sdp)
        throw PreconditionViolated("extract_rank_one: X* is not PSD within tolerance");
    for (const SymMatrix& Ai : inst.A)
        if (std::abs(X_star.inner(Ai)) > opts.eps_sdp * std::max(1.0, X_star.frobeniusNorm()))
            throw PreconditionViolated("extract_rank_one: X* does not satisfy the equations");

    const EigDecomp d = eigh(X_star);
    const double rank_tol = defaultRankTol(d.values);
    std::vector<int> kept;
    for (int j = 0; j < inst.n; ++j)
        if (d.values(j) > rank_tol) kept.push_back(j);
    if (kept.empty()) throw PreconditionViolated("extract_rank_one: X* is numerically zero");
    const double ez = epsZero(inst);

    auto tryCandidate = [&](ExtractionTrace tr) -> std::optional<ExtractionTrace> {
        // Polish to convergence: the analytic root zeros only the pivot's
        // quadratic form exactly, cross-residuals still need a few steps.
        for (int it = 0; it < 20; ++it) {
            double worst = 0.0;
            for (const SymMatrix& Ai : inst.A)
                worst = std::max(worst, std::abs(Ai.quadForm(tr.w)));
            if (worst <= 1e-13) break;
            const Eigen::VectorXd next = detail::spherePolishStep(inst, tr.w);
            double nworst = 0.0;
            for (const SymMatrix& Ai : inst.A)
                nworst = std::max(nworst, std::abs(Ai.quadForm(next)));
            if (nworst >= worst) break;
            tr.w = next;
        }
        tr = detail::finishTrace(inst, std::move(tr));
        if (tr.max_residual <= opts.eps_accept) return tr;
        return std::nullopt;
    };

    if (kept.size() == 1) {
        ExtractionTrace tr;
        tr.branch = ExtractionBranch::DirectEigenvector;
        tr.eig_index = kept[0];
        tr.w = d.vectors.col(kept[0]);
        return tryCandidate(std::move(tr));
    }

    // Pivot preference: the unique indefinite matrix, then a sampled
    // containment pivot, then every indefinite matrix in index order.
    const StructureReport st = check_structure_conditions(inst, {200, opts.seed});
    std::vector<int> pivots;
    if (st.indefinite_count == 1) {
        for (int i = 0; i < inst.m(); ++i)
            if (st.classes[static_cast<size_t>(i)] == DefinitenessClass::Indefinite)
                pivots.push_back(i);
    } else if (st.indefinite_count >= 2) {
        if (st.holds_iii == ZeroSetContainment::Holds) pivots.push_back(st.pivot);
        for (int i = 0; i < inst.m(); ++i)
            if (st.classes[static_cast<size_t>(i)] == DefinitenessClass::Indefinite &&
                i != st.pivot)
                pivots.push_back(i);
    }

    if (pivots.empty()) {
        // All matrices semidefinite: every retained eigenvector solves the system.
        for (int j : kept) {
            ExtractionTrace tr;
            tr.branch = ExtractionBranch::DirectEigenvector;
            tr.eig_index = j;
            tr.w = d.vectors.col(j);
            if (auto ok = tryCandidate(std::move(tr))) return ok;
        }
        return std::nullopt;
    }

    for (int k : pivots) {
        const SymMatrix& Ak = inst.A[static_cast<size_t>(k)];
        std::vector<double> q;
        for (int j : kept) q.push_back(Ak.quadForm(d.vectors.col(j)));

        for (size_t jj = 0; jj < kept.size(); ++jj) {
            if (std::abs(q[jj]) <= ez) {
                ExtractionTrace tr;
                tr.branch = ExtractionBranch::DirectEigenvector;
                tr.eig_index = kept[jj];
                tr.pivot = k;
                tr.w = d.vectors.col(kept[jj]);
                if (auto ok = tryCandidate(std::move(tr))) return ok;
            }
        }
        for (size_t pp = 0; pp < kept.size(); ++pp) {
            for (size_t qq = pp + 1; qq < kept.size(); ++qq) {
                if (q[pp] * q[qq] >= 0.0) continue;
                const Eigen::VectorXd up = d.vectors.col(kept[pp]);
                const Eigen::VectorXd uq = d.vectors.col(kept[qq]);
                const double a = q[pp], dd = q[qq];
                const double b = up.dot(Ak.toDense() * uq);
                const double g = (a > 0.0) ? detail::crossingRoot(a, b, dd)
                                           : 1.0 - detail::crossingRoot(dd, b, a);
                Eigen::VectorXd w = g * up + (1.0 - g) * uq;
                const double nrm = w.norm();
                if (nrm < 1e-12) continue;
                ExtractionTrace tr;
                tr.branch = ExtractionBranch::IvtRoot;
                tr.p = kept[pp];
                tr.q = kept[qq];
                tr.gamma = g;
                tr.alpha = a;
                tr.delta = dd;
                tr.pivot = k;
                tr.w = w / nrm;
                if (auto ok = tryCandidate(std::move(tr))) return ok;
            }
        }
    }
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// Coordinate sign condition on the half-sphere {||x||=1, x_n < 0}:
// max over active i of x_i (x'A_i x) >= 0 everywhere implies a rank-one
// solution exists. Decided by sampled multistart descent, never exactly.
// ---------------------------------------------------------------------------

enum class SignConditionVerdict { HoldsSampled, CounterexampleFound, NotApplicable };

inline const char* toString(SignConditionVerdict v) {
    switch (v) {
        case SignConditionVerdict::HoldsSampled: return "HoldsSampled";
        case SignConditionVerdict::CounterexampleFound: return "CounterexampleFound";
        case SignConditionVerdict::NotApplicable: return "NotApplicable";
    }
    return "?";
}

struct SignConditionReport {
    SignConditionVerdict verdict = SignConditionVerdict::NotApplicable;
    std::optional<Eigen::VectorXd> counterexample;
    std::optional<Eigen::VectorXd> bonus_rank_one;  // x with every x'A_i x = 0, when hit
    int samples_used = 0;
    double worst_value = std::numeric_limits<double>::infinity();
};

struct SignConditionOptions {
    int starts = 200;
    int max_iter = 150;
    uint64_t seed = 0;
    int threads = 1;
};

namespace detail {

/// Retraction onto {||x||=1, x_n <= -margin}.
inline Eigen::VectorXd projectHalfSphere(Eigen::VectorXd x, double margin) {
    const int n = static_cast<int>(x.size());
    double nrm = x.norm();
    if (nrm < 1e-12) {
        x.setZero();
        x(n - 1) = -1.0;
        return x;
    }
    x /= nrm;
    if (x(n - 1) > -margin) {
        x(n - 1) = -margin;
        const double rest = x.head(n - 1).norm();
        const double target = std::sqrt(std::max(0.0, 1.0 - margin * margin));
        if (rest > 1e-12)
            x.head(n - 1) *= target / rest;
        else if (n >= 2)
            x(0) = target;
    }
    return x;
}

} // namespace detail

/// Evaluates max over active i of x_i q_i(x); returns +inf for an empty
/// active set (the condition is vacuously satisfied there, and such an x is
/// itself a rank-one witness).
inline double signConditionValue(const HlmeInstance& padded, const Eigen::VectorXd& x,
                                 double ez, bool* empty_active = nullptr) {
    double best = -std::numeric_limits<double>::infinity();
    bool any = false;
    for (int i = 0; i < padded.m(); ++i) {
        const double q = padded.A[static_cast<size_t>(i)].quadForm(x);
        if (std::abs(q) <= ez) continue;
        any = true;
        best = std::max(best, x(i) * q);
    }
    if (empty_active) *empty_active = !any;
    return any ? best : std::numeric_limits<double>::infinity();
}

inline SignConditionReport check_sign_condition(const HlmeInstance& inst,
                                                const SignConditionOptions& opts = {}) {
    inst.validate();
    SignConditionReport rep;
    if (inst.m() + 1 > inst.n) return rep;  // NotApplicable

    // Pad with zero matrices up to m = n-1; they never enter the active set.
    HlmeInstance padded = inst;
    padded.labels.clear();
    while (padded.m() + 1 < padded.n) padded.A.push_back(SymMatrix::zero(padded.n));

    const double ez = epsZero(inst);
    const double margin = 1e-3;
    const int n = padded.n;

    struct StartResult {
        double value = std::numeric_limits<double>::infinity();
        Eigen::VectorXd x;
        bool empty_active = false;
    };
    std::vector<StartResult> results(static_cast<size_t>(opts.starts));

    parallelForStarts(opts.starts, opts.threads, [&](int s) {
        Rng rng(opts.seed + static_cast<uint64_t>(s) + 1);
        Eigen::VectorXd x = detail::projectHalfSphere(rng.unitVector(n), margin);
        double fx;
        bool empty;
        fx = signConditionValue(padded, x, ez, &empty);
        double step = 0.3;
        for (int it = 0; it < opts.max_iter && !empty; ++it) {
            // Subgradient of the currently maximal active term.
            int imax = -1;
            double best = -std::numeric_limits<double>::infinity();
            for (int i = 0; i < padded.m(); ++i) {
                const double q = padded.A[static_cast<size_t>(i)].quadForm(x);
                if (std::abs(q) <= ez) continue;
                if (x(i) * q > best) {
                    best = x(i) * q;
                    imax = i;
                }
            }
            if (imax < 0) break;
            const SymMatrix& Ai = padded.A[static_cast<size_t>(imax)];
            Eigen::VectorXd grad = 2.0 * x(imax) * (Ai.toDense() * x);
            grad(imax) += Ai.quadForm(x);
            const Eigen::VectorXd xt = detail::projectHalfSphere(x - step * grad, margin);
            bool e2;
            const double ft = signConditionValue(padded, xt, ez, &e2);
            if (e2 || ft < fx) {
                x = xt;
                fx = ft;
                empty = e2;
                step = std::min(step * 1.3, 1.0);
            } else {
                step *= 0.5;
                if (step < 1e-10) break;
            }
        }
        results[static_cast<size_t>(s)] = {fx, x, empty};
    });

    rep.samples_used = opts.starts;
    int best_idx = -1;
    for (int s = 0; s < opts.starts; ++s) {
        const StartResult& r = results[static_cast<size_t>(s)];
        if (r.empty_active && !rep.bonus_rank_one) rep.bonus_rank_one = r.x;
        if (r.value < rep.worst_value) {
            rep.worst_value = r.value;
            best_idx = s;
        }
    }

    if (best_idx >= 0 && rep.worst_value < -ez) {
        // Re-verify the counterexample from raw instance data.
        const Eigen::VectorXd& x = results[static_cast<size_t>(best_idx)].x;
        bool empty;
        const double v = signConditionValue(padded, x, ez, &empty);
        if (!empty && v < -ez && std::abs(x.norm() - 1.0) < 1e-9 && x(n - 1) < 0.0) {
            rep.verdict = SignConditionVerdict::CounterexampleFound;
            rep.counterexample = x;
            rep.worst_value = v;
            return rep;
        }
    }
    rep.verdict = SignConditionVerdict::HoldsSampled;
    return rep;
}

} // namespace hlme

#endif
