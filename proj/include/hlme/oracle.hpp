#ifndef HLME_ORACLE_HPP
#define HLME_ORACLE_HPP

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "hlme/existence.hpp"
#include "hlme/instance.hpp"
#include "hlme/sphere.hpp"

namespace hlme {

enum class WitnessKind { RankOneSolution, WitnessSystemPoint };

/// Unit vector with re-verified residuals. Construction recomputes the
/// residuals from the raw instance; an object with violated invariants
/// cannot be built.
struct Witness {
    Eigen::VectorXd x;
    std::vector<double> residuals;
    WitnessKind kind = WitnessKind::RankOneSolution;
    double max_residual = 0.0;
    double x_n = 0.0, x_n1 = 0.0;  // last and penultimate coordinates

    static std::optional<Witness> rankOne(const HlmeInstance& inst, const Eigen::VectorXd& x,
                                          double eps_accept) {
        if (std::abs(x.norm() - 1.0) > 1e-9) return std::nullopt;
        Witness w;
        w.x = x;
        w.kind = WitnessKind::RankOneSolution;
        for (const SymMatrix& Ai : inst.A) {
            w.residuals.push_back(Ai.quadForm(x));
            w.max_residual = std::max(w.max_residual, std::abs(w.residuals.back()));
        }
        if (w.max_residual > eps_accept) return std::nullopt;
        return w;
    }

    static std::optional<Witness> systemPoint(const HlmeInstance& inst, const Eigen::VectorXd& x,
                                              double eps_accept) {
        const int n = inst.n;
        if (std::abs(x.norm() - 1.0) > 1e-9) return std::nullopt;
        if (!(x(n - 1) > -1.0 && x(n - 1) < 0.0)) return std::nullopt;
        Witness w;
        w.x = x;
        w.kind = WitnessKind::WitnessSystemPoint;
        w.x_n = x(n - 1);
        w.x_n1 = n >= 2 ? x(n - 2) : 0.0;
        for (int i = 0; i < inst.m(); ++i) {
            const double r = inst.A[static_cast<size_t>(i)].quadForm(x) - x(i) / x(n - 1);
            w.residuals.push_back(r);
            w.max_residual = std::max(w.max_residual, std::abs(r));
        }
        if (w.max_residual > eps_accept) return std::nullopt;
        return w;
    }
};

struct SearchOptions {
    int starts = 200;
    int max_iter = 200;
    uint64_t seed = 0;
    double eps_accept = kEpsAcceptDefault;
    int threads = 1;
};

namespace detail {

/// Damped Gauss-Newton for residuals r_i(x) on the unit sphere (tangent-space
/// steps, retraction by normalization). Returns final point and objective.
template <typename ResidualFn, typename JacobianFn, typename RetractFn>
std::pair<Eigen::VectorXd, double> sphereGaussNewton(Eigen::VectorXd x, int max_iter,
                                                     ResidualFn residual, JacobianFn jacobian,
                                                     RetractFn retract) {
    double lambda = 1e-4;
    Eigen::VectorXd r = residual(x);
    double f = r.squaredNorm();
    const int n = static_cast<int>(x.size());
    for (int it = 0; it < max_iter; ++it) {
        if (f < 1e-30) break;
        const Eigen::MatrixXd J = jacobian(x);
        const Eigen::MatrixXd P = Eigen::MatrixXd::Identity(n, n) - x * x.transpose();
        const Eigen::MatrixXd Jt = J * P;
        const Eigen::MatrixXd H = Jt.transpose() * Jt;
        bool improved = false;
        for (int attempt = 0; attempt < 8; ++attempt) {
            Eigen::MatrixXd Hd = H;
            Hd.diagonal().array() += lambda * (1.0 + H.diagonal().maxCoeff());
            const Eigen::VectorXd d = -Hd.ldlt().solve(Jt.transpose() * r);
            const Eigen::VectorXd xt = retract(x + P * d);
            const Eigen::VectorXd rt = residual(xt);
            const double ft = rt.squaredNorm();
            if (ft < f) {
                x = xt;
                r = rt;
                f = ft;
                lambda = std::max(lambda * 0.3, 1e-14);
                improved = true;
                break;
            }
            lambda *= 10.0;
        }
        if (!improved) break;
    }
    return {x, f};
}

} // namespace detail

/// Multi-start search for a nonzero root of all quadratic forms, i.e. a
/// rank-one solution x x^T. Absence of a find is not proof of absence.
inline std::optional<Witness> find_rank_one(const HlmeInstance& inst,
                                            const SearchOptions& opts = {}) {
    inst.validate();
    const int n = inst.n;
    const int m = inst.m();

    auto residual = [&](const Eigen::VectorXd& x) {
        Eigen::VectorXd r(m);
        for (int i = 0; i < m; ++i) r(i) = inst.A[static_cast<size_t>(i)].quadForm(x);
        return r;
    };
    auto jacobian = [&](const Eigen::VectorXd& x) {
        Eigen::MatrixXd J(m, n);
        for (int i = 0; i < m; ++i)
            J.row(i) = 2.0 * (inst.A[static_cast<size_t>(i)].toDense() * x).transpose();
        return J;
    };
    auto retract = [](const Eigen::VectorXd& v) {
        const double nrm = v.norm();
        return nrm > 1e-12 ? Eigen::VectorXd(v / nrm) : Eigen::VectorXd::Unit(v.size(), 0);
    };

    struct StartResult {
        double f = std::numeric_limits<double>::infinity();
        Eigen::VectorXd x;
    };
    std::vector<StartResult> results(static_cast<size_t>(opts.starts));
    parallelForStarts(opts.starts, opts.threads, [&](int s) {
        Rng rng(opts.seed + static_cast<uint64_t>(s) + 1);
        auto [x, f] = detail::sphereGaussNewton(rng.unitVector(n), opts.max_iter, residual,
                                                jacobian, retract);
        results[static_cast<size_t>(s)] = {f, x};
    });

    // Deterministic merge: lowest objective wins, ties by start index.
    int best = 0;
    for (int s = 1; s < opts.starts; ++s)
        if (results[static_cast<size_t>(s)].f < results[static_cast<size_t>(best)].f) best = s;
    return Witness::rankOne(inst, results[static_cast<size_t>(best)].x, opts.eps_accept);
}

struct GapEstimate {
    double beta_hat = 0.0;  // upper bound on min over the sphere of sum |x'A_i x|
    Eigen::VectorXd argmin_x;
    int starts = 0;
    double converged_fraction = 0.0;
};

/// Evaluates sum_i |x'A_i x|.
inline double gapValue(const HlmeInstance& inst, const Eigen::VectorXd& x) {
    double g = 0.0;
    for (const SymMatrix& Ai : inst.A) g += std::abs(Ai.quadForm(x));
    return g;
}

/// Multi-start estimate of the gap beta = min over the unit sphere of
/// sum |x'A_i x|; positive exactly when no rank-one solution exists. Smooth
/// sum-of-squares descent seeds the points; the reported value is the
/// absolute-value objective recomputed at the best point, followed by direct
/// subgradient refinement. For n=3 a Fibonacci grid supplements the starts.
inline GapEstimate quadratic_gap(const HlmeInstance& inst, const SearchOptions& opts = {}) {
    inst.validate();
    const int n = inst.n;
    const int m = inst.m();

    auto residual = [&](const Eigen::VectorXd& x) {
        Eigen::VectorXd r(m);
        for (int i = 0; i < m; ++i) r(i) = inst.A[static_cast<size_t>(i)].quadForm(x);
        return r;
    };
    auto jacobian = [&](const Eigen::VectorXd& x) {
        Eigen::MatrixXd J(m, n);
        for (int i = 0; i < m; ++i)
            J.row(i) = 2.0 * (inst.A[static_cast<size_t>(i)].toDense() * x).transpose();
        return J;
    };
    auto retract = [](const Eigen::VectorXd& v) {
        const double nrm = v.norm();
        return nrm > 1e-12 ? Eigen::VectorXd(v / nrm) : Eigen::VectorXd::Unit(v.size(), 0);
    };

    struct StartResult {
        double g = std::numeric_limits<double>::infinity();
        Eigen::VectorXd x;
        bool converged = false;
    };
    std::vector<StartResult> results(static_cast<size_t>(opts.starts));
    parallelForStarts(opts.starts, opts.threads, [&](int s) {
        Rng rng(opts.seed + 0x6a09e667ULL + static_cast<uint64_t>(s));
        auto [x, f] = detail::sphereGaussNewton(rng.unitVector(n), opts.max_iter, residual,
                                                jacobian, retract);
        // Refine the absolute-value objective directly with projected
        // subgradient steps; the smooth and l1 minimizers can differ.
        double g = gapValue(inst, x);
        double step = 0.1;
        for (int it = 0; it < opts.max_iter; ++it) {
            Eigen::VectorXd grad = Eigen::VectorXd::Zero(n);
            for (int i = 0; i < m; ++i) {
                const double q = inst.A[static_cast<size_t>(i)].quadForm(x);
                const double sgn = q > 0 ? 1.0 : (q < 0 ? -1.0 : 0.0);
                grad += sgn * 2.0 * (inst.A[static_cast<size_t>(i)].toDense() * x);
            }
            const Eigen::VectorXd xt = retract(x - step * grad);
            const double gt = gapValue(inst, xt);
            if (gt < g) {
                x = xt;
                g = gt;
                step = std::min(step * 1.2, 0.5);
            } else {
                step *= 0.5;
                if (step < 1e-12) break;
            }
        }
        results[static_cast<size_t>(s)] = {g, x, f < 1e-18 || step >= 1e-12};
    });

    GapEstimate est;
    est.starts = opts.starts;
    int best = 0, conv = 0;
    for (int s = 0; s < opts.starts; ++s) {
        if (results[static_cast<size_t>(s)].converged) ++conv;
        if (results[static_cast<size_t>(s)].g < results[static_cast<size_t>(best)].g) best = s;
    }
    est.converged_fraction = static_cast<double>(conv) / std::max(1, opts.starts);
    Eigen::VectorXd x = results[static_cast<size_t>(best)].x;
    double g = results[static_cast<size_t>(best)].g;

    if (n == 3) {
        for (const Eigen::VectorXd& p : sphereGrid(3, 100000)) {
            const double gp = gapValue(inst, p);
            if (gp < g) {
                g = gp;
                x = p;
            }
        }
    }
    est.argmin_x = x;
    est.beta_hat = gapValue(inst, x);  // recomputed from the instance
    return est;
}

// ---------------------------------------------------------------------------
// Witness-system analysis. Nonexistence of a rank-one solution forces
// solutions of x'A_i x = x_i / x_n on the unit sphere with x_n in (-1,0);
// when every such point has a nonzero penultimate coordinate, nonexistence
// follows. Sampling can only inspect found witnesses, so the verdict stays
// heuristic.
// ---------------------------------------------------------------------------

enum class WitnessSystemVerdict {
    RankOneExists_via_en,
    NonexistenceIndicated,
    ExistenceIndicated,
    Inconclusive,
    NotApplicable,
};

inline const char* toString(WitnessSystemVerdict v) {
    switch (v) {
        case WitnessSystemVerdict::RankOneExists_via_en: return "RankOneExists_via_en";
        case WitnessSystemVerdict::NonexistenceIndicated: return "NonexistenceIndicated";
        case WitnessSystemVerdict::ExistenceIndicated: return "ExistenceIndicated";
        case WitnessSystemVerdict::Inconclusive: return "Inconclusive";
        case WitnessSystemVerdict::NotApplicable: return "NotApplicable";
    }
    return "?";
}

struct WitnessSystemReport {
    bool applicable = false;  // requires m <= n-2
    bool e_n_is_solution = false;
    std::vector<Witness> witnesses;
    bool all_have_nonzero_penultimate = false;
    WitnessSystemVerdict verdict = WitnessSystemVerdict::NotApplicable;
    std::string note;
};

inline WitnessSystemReport check_witness_system(const HlmeInstance& inst,
                                                const SearchOptions& opts = {}) {
    inst.validate();
    WitnessSystemReport rep;
    const int n = inst.n;
    const int m = inst.m();
    if (m > n - 2) return rep;
    rep.applicable = true;

    const double ez = epsZero(inst);
    bool en_solves = true;
    for (const SymMatrix& Ai : inst.A)
        if (std::abs(Ai(n - 1, n - 1)) > ez) en_solves = false;
    rep.e_n_is_solution = en_solves;
    if (en_solves) {
        rep.verdict = WitnessSystemVerdict::RankOneExists_via_en;
        rep.note = "the last coordinate vector already solves every equation";
        return rep;
    }

    // Multiplied-through residuals r_i = x_n (x'A_i x) - x_i avoid the
    // division near x_n = 0; identical zero set on the searched region.
    const double margin = 1e-3;
    auto residual = [&](const Eigen::VectorXd& x) {
        Eigen::VectorXd r(m);
        for (int i = 0; i < m; ++i)
            r(i) = x(n - 1) * inst.A[static_cast<size_t>(i)].quadForm(x) - x(i);
        return r;
    };
    auto jacobian = [&](const Eigen::VectorXd& x) {
        Eigen::MatrixXd J = Eigen::MatrixXd::Zero(m, n);
        for (int i = 0; i < m; ++i) {
            const double q = inst.A[static_cast<size_t>(i)].quadForm(x);
            J.row(i) = 2.0 * x(n - 1) * (inst.A[static_cast<size_t>(i)].toDense() * x).transpose();
            J(i, n - 1) += q;
            J(i, i) -= 1.0;
        }
        return J;
    };
    auto retract = [&](const Eigen::VectorXd& v) {
        Eigen::VectorXd x = v;
        double nrm = x.norm();
        if (nrm < 1e-12) {
            x.setZero();
            x(n - 1) = -0.5;
            x(0) = std::sqrt(0.75);
            return x;
        }
        x /= nrm;
        if (x(n - 1) > -margin || x(n - 1) < -1.0 + margin) {
            const double clamped = std::clamp(x(n - 1), -1.0 + margin, -margin);
            x(n - 1) = clamped;
            const double rest = x.head(n - 1).norm();
            const double target = std::sqrt(std::max(0.0, 1.0 - clamped * clamped));
            if (rest > 1e-12)
                x.head(n - 1) *= target / rest;
            else
                x(0) = target;
        }
        return x;
    };

    struct StartResult {
        double f = std::numeric_limits<double>::infinity();
        Eigen::VectorXd x;
    };
    std::vector<StartResult> results(static_cast<size_t>(opts.starts));
    parallelForStarts(opts.starts, opts.threads, [&](int s) {
        Rng rng(opts.seed + 0xbb67ae85ULL + static_cast<uint64_t>(s));
        Eigen::VectorXd x0 = retract(rng.unitVector(n));
        auto [x, f] = detail::sphereGaussNewton(x0, opts.max_iter, residual, jacobian, retract);
        results[static_cast<size_t>(s)] = {f, x};
    });

    // Collect verified witnesses, deduplicated at Euclidean distance 1e-4
    // (the witness system is not sign-symmetric, so no sign folding here).
    for (int s = 0; s < opts.starts; ++s) {
        const Eigen::VectorXd& x = results[static_cast<size_t>(s)].x;
        auto w = Witness::systemPoint(inst, x, opts.eps_accept);
        if (!w) continue;
        bool dup = false;
        for (const Witness& prev : rep.witnesses)
            if ((prev.x - x).norm() < 1e-4) dup = true;
        if (!dup) rep.witnesses.push_back(*w);
    }

    if (rep.witnesses.empty()) {
        rep.verdict = WitnessSystemVerdict::ExistenceIndicated;
        rep.note = "no witness-system point found over the full search budget; the necessary "
                   "condition for nonexistence looks violated (heuristic)";
        return rep;
    }
    rep.all_have_nonzero_penultimate = true;
    for (const Witness& w : rep.witnesses)
        if (std::abs(w.x_n1) <= 1e-3) rep.all_have_nonzero_penultimate = false;
    rep.verdict = rep.all_have_nonzero_penultimate ? WitnessSystemVerdict::NonexistenceIndicated
                                                   : WitnessSystemVerdict::Inconclusive;
    if (rep.verdict == WitnessSystemVerdict::Inconclusive)
        rep.note = "a witness with zero penultimate coordinate exists; the sufficient condition "
                   "fails and the system may still have a rank-one solution";
    return rep;
}

} // namespace hlme

#endif
