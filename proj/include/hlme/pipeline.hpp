#ifndef HLME_PIPELINE_HPP
#define HLME_PIPELINE_HPP

#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "hlme/certificates.hpp"
#include "hlme/existence.hpp"
#include "hlme/instance.hpp"
#include "hlme/oracle.hpp"
#include "hlme/sdp.hpp"

namespace hlme {

enum class Conclusion { NoNonzeroSolution, RankOneExists, RankOneLikely, RankOneUnlikely, Unknown };
enum class Grade { Certified, Constructed, Heuristic };

inline const char* toString(Conclusion c) {
    switch (c) {
        case Conclusion::NoNonzeroSolution: return "NoNonzeroSolution";
        case Conclusion::RankOneExists: return "RankOneExists";
        case Conclusion::RankOneLikely: return "RankOneLikely";
        case Conclusion::RankOneUnlikely: return "RankOneUnlikely";
        case Conclusion::Unknown: return "Unknown";
    }
    return "?";
}

inline const char* toString(Grade g) {
    switch (g) {
        case Grade::Certified: return "Certified";
        case Grade::Constructed: return "Constructed";
        case Grade::Heuristic: return "Heuristic";
    }
    return "?";
}

struct Evidence {
    std::optional<TrivialityCertificate> triviality;
    std::optional<PencilDecision> pencil;
    std::optional<RankBoundReport> bounds;
    std::optional<StructureReport> structure;
    std::optional<ExtractionTrace> extraction;
    std::optional<Witness> witness;
    std::optional<SignConditionReport> sign_condition;
    std::optional<GapEstimate> gap;
    std::optional<WitnessSystemReport> witness_system;
};

struct AnalyzeOptions {
    SolverOptions sdp;
    SearchOptions search;
    StructureOptions structure;
    double gap_threshold = 1e-3;
};

/// Final graded answer. Construction goes through make(), which re-derives
/// every certificate-grade claim from the raw instance: a dual certificate is
/// re-checked by an eigenvalue computation and a witness by residual
/// recomputation. Tampered evidence cannot produce a Certified or Constructed
/// verdict.
class Verdict {
  public:
    Conclusion conclusion = Conclusion::Unknown;
    Grade grade = Grade::Heuristic;
    Evidence evidence;
    std::vector<std::string> narrative;

    static Verdict make(const HlmeInstance& inst, Conclusion conclusion, Grade grade,
                        Evidence evidence, std::vector<std::string> narrative,
                        double eps_sdp = 1e-7, double eps_accept = kEpsAcceptDefault) {
        if (grade == Grade::Certified) {
            if (conclusion == Conclusion::NoNonzeroSolution) {
                const auto& tc = evidence.triviality;
                if (!tc || !tc->trivial_only || tc->t.empty() ||
                    certificateMargin(inst, tc->t) < -eps_sdp)
                    throw PreconditionViolated(
                        "Verdict: certified no-solution claim lacks a valid dual certificate");
            } else if (conclusion == Conclusion::RankOneExists) {
                const bool witness_ok =
                    evidence.witness && verifiedRankOne(inst, *evidence.witness, eps_accept);
                const bool pencil_ok =
                    evidence.pencil && *evidence.pencil == PencilDecision::ExistsRankOne &&
                    inst.m() == 2 && inst.n >= 3 && evidence.triviality &&
                    !evidence.triviality->trivial_only && evidence.triviality->nonzero_solution &&
                    verifyFeasiblePsd(inst, *evidence.triviality->nonzero_solution, eps_sdp) &&
                    evidence.triviality->nonzero_solution->trace() > 0.5;
                if (!witness_ok && !pencil_ok)
                    throw PreconditionViolated(
                        "Verdict: certified existence claim lacks verifiable evidence");
            } else {
                throw PreconditionViolated("Verdict: conclusion does not admit a certificate");
            }
        } else if (grade == Grade::Constructed) {
            if (conclusion != Conclusion::RankOneExists || !evidence.witness ||
                !verifiedRankOne(inst, *evidence.witness, eps_accept))
                throw PreconditionViolated(
                    "Verdict: constructed grade requires a verified rank-one witness");
        } else {
            if (conclusion == Conclusion::NoNonzeroSolution ||
                conclusion == Conclusion::RankOneExists)
                throw PreconditionViolated(
                    "Verdict: definitive conclusions require certificate or witness backing");
        }
        Verdict v;
        v.conclusion = conclusion;
        v.grade = grade;
        v.evidence = std::move(evidence);
        v.narrative = std::move(narrative);
        return v;
    }

  private:
    Verdict() = default;

    static bool verifiedRankOne(const HlmeInstance& inst, const Witness& w, double eps_accept) {
        if (w.kind != WitnessKind::RankOneSolution) return false;
        return Witness::rankOne(inst, w.x, eps_accept).has_value();
    }
};

namespace detail {

inline std::string fmt(double v) {
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
}

} // namespace detail

/// Runs the full decision flow:
///   1. dual-certificate test for triviality (stop on a certificate),
///   2. two-matrix pencil decision when m = 2 and n >= 3,
///   3. nuclear-norm rank bounds, with a fast path when the bound pins the
///      maximum combination rank at n-1,
///   4. structural sufficient conditions plus constructive extraction from the
///      feasibility solve's nonzero solution,
///   5. sampled sign condition over the half sphere,
///   6. direct multi-start search for a rank-one point,
///   7. quadratic gap estimate and witness-system analysis,
///   8. fallback Unknown.
/// A verified witness beats every heuristic signal; contradictory heuristics
/// cancel to Unknown.
inline Verdict analyze(const HlmeInstance& inst, const AnalyzeOptions& opts = {}) {
    inst.validate();
    Evidence ev;
    std::vector<std::string> log;
    const int n = inst.n;
    const int m = inst.m();

    // (1) triviality
    const TrivialityCertificate cert = test_trivial_only(inst, opts.sdp);
    ev.triviality = cert;
    if (cert.inconclusive) {
        log.push_back("triviality test inconclusive: " + cert.note);
    } else if (cert.trivial_only) {
        log.push_back("dual certificate found: a combination of the matrices dominates the "
                      "identity, so X = 0 is the only PSD solution (margin " +
                      detail::fmt(cert.min_eig_vs_identity) + ")");
        return Verdict::make(inst, Conclusion::NoNonzeroSolution, Grade::Certified, std::move(ev),
                             std::move(log), opts.sdp.eps_sdp, opts.search.eps_accept);
    } else {
        log.push_back("nonzero PSD solution verified (feasibility value " +
                      detail::fmt(cert.primal_value) + "); the system is not trivial-only");
    }

    // (2) two-matrix pencil decision
    bool certified_existence = false;
    if (m == 2 && n >= 3 && !cert.inconclusive) {
        // Equivalent to dines_brickman(inst): the triviality test already
        // settled whether a positive definite combination exists.
        ev.pencil = PencilDecision::ExistsRankOne;
        certified_existence = true;
        log.push_back("two-matrix system with n >= 3 and no positive definite combination: "
                      "a rank-one solution exists (exact characterization)");
    }

    const auto finishWithWitness = [&](Witness w, std::vector<std::string>&& l) {
        ev.witness = std::move(w);
        return Verdict::make(inst, Conclusion::RankOneExists,
                             certified_existence ? Grade::Certified : Grade::Constructed,
                             std::move(ev), std::move(l), opts.sdp.eps_sdp,
                             opts.search.eps_accept);
    };

    // (3) rank bounds and the max-rank fast path
    if (!cert.inconclusive) {
        const RankBoundReport bounds = compute_bounds(inst, cert, opts.sdp);
        ev.bounds = bounds;
        log.push_back("rank bounds: eta = " + detail::fmt(bounds.eta) +
                      ", max combination rank in [" + std::to_string(bounds.r_star_lower) + ", " +
                      std::to_string(bounds.r_star_upper) + "], min solution rank <= " +
                      std::to_string(bounds.combined_min_rank_bound));
        if (bounds.r_star_lower == n - 1 && cert.nonzero_solution) {
            ExtractionOptions xo;
            xo.eps_sdp = opts.sdp.eps_sdp;
            xo.eps_accept = opts.search.eps_accept;
            xo.seed = opts.search.seed;
            if (auto trace = extract_rank_one(inst, *cert.nonzero_solution, xo)) {
                ev.extraction = *trace;
                if (auto w = Witness::rankOne(inst, trace->w, opts.search.eps_accept)) {
                    certified_existence = true;
                    log.push_back("a PSD combination of maximal admissible rank n-1 exists, "
                                  "which forces a rank-one solution; one was extracted with "
                                  "max residual " + detail::fmt(trace->max_residual));
                    return finishWithWitness(*w, std::move(log));
                }
            }
        }
    }

    // (4) structural conditions and extraction from the feasible solution
    StructureOptions so = opts.structure;
    so.seed = opts.search.seed;
    const StructureReport structure = check_structure_conditions(inst, so);
    ev.structure = structure;
    log.push_back(std::string("structural conditions: all-semidefinite=") +
                  (structure.holds_i ? "yes" : "no") + ", single-indefinite=" +
                  (structure.holds_ii ? "yes" : "no") + ", zero-set containment=" +
                  toString(structure.holds_iii));
    if (cert.nonzero_solution) {
        ExtractionOptions xo;
        xo.eps_sdp = opts.sdp.eps_sdp;
        xo.eps_accept = opts.search.eps_accept;
        xo.seed = opts.search.seed;
        if (auto trace = extract_rank_one(inst, *cert.nonzero_solution, xo)) {
            ev.extraction = *trace;
            if (auto w = Witness::rankOne(inst, trace->w, opts.search.eps_accept)) {
                log.push_back(std::string("rank-one solution extracted from the feasible "
                                          "solution's eigenvectors (") +
                              toString(trace->branch) + ", max residual " +
                              detail::fmt(trace->max_residual) + ")");
                return finishWithWitness(*w, std::move(log));
            }
        } else {
            log.push_back("extraction from the feasible solution did not reach the residual "
                          "tolerance");
        }
    }

    // (5) sign condition over the half sphere
    SignConditionOptions sco;
    sco.starts = opts.search.starts;
    sco.seed = opts.search.seed;
    sco.threads = opts.search.threads;
    const SignConditionReport sign = check_sign_condition(inst, sco);
    ev.sign_condition = sign;
    bool likely_signal = false;
    if (sign.verdict == SignConditionVerdict::HoldsSampled) {
        likely_signal = true;
        log.push_back("sign condition held over all sampled half-sphere points (worst value " +
                      detail::fmt(sign.worst_value) + "); existence is indicated");
    } else if (sign.verdict == SignConditionVerdict::CounterexampleFound) {
        log.push_back("sign condition violated at a sampled point (value " +
                      detail::fmt(sign.worst_value) + "); that sufficient condition is out");
    }
    if (sign.bonus_rank_one) {
        if (auto w = Witness::rankOne(inst, *sign.bonus_rank_one, opts.search.eps_accept)) {
            log.push_back("the sign-condition search hit a point where every quadratic form "
                          "vanishes, which is itself a rank-one witness");
            return finishWithWitness(*w, std::move(log));
        }
    }

    // (6) direct search
    if (auto w = find_rank_one(inst, opts.search)) {
        log.push_back("multi-start search found a rank-one solution (max residual " +
                      detail::fmt(w->max_residual) + ")");
        return finishWithWitness(*w, std::move(log));
    }
    log.push_back("multi-start search over " + std::to_string(opts.search.starts) +
                  " starts found no rank-one solution");
    if (certified_existence) {
        // The exact two-matrix characterization stands even though no explicit
        // witness was located.
        return Verdict::make(inst, Conclusion::RankOneExists, Grade::Certified, std::move(ev),
                             std::move(log), opts.sdp.eps_sdp, opts.search.eps_accept);
    }

    // (7) gap estimate and witness-system analysis
    const GapEstimate gap = quadratic_gap(inst, opts.search);
    ev.gap = gap;
    log.push_back("smallest located value of sum |x'A_i x| on the sphere: " +
                  detail::fmt(gap.beta_hat));
    const WitnessSystemReport ws = check_witness_system(inst, opts.search);
    ev.witness_system = ws;
    log.push_back(std::string("witness-system analysis: ") + toString(ws.verdict) +
                  (ws.note.empty() ? "" : " (" + ws.note + ")"));
    if (ws.verdict == WitnessSystemVerdict::RankOneExists_via_en) {
        Eigen::VectorXd en = Eigen::VectorXd::Zero(n);
        en(n - 1) = 1.0;
        if (auto w = Witness::rankOne(inst, en, opts.search.eps_accept)) {
            log.push_back("the last coordinate vector is itself a rank-one solution");
            return finishWithWitness(*w, std::move(log));
        }
    }
    bool unlikely_signal = false;
    if (gap.beta_hat > opts.gap_threshold &&
        (ws.verdict == WitnessSystemVerdict::NonexistenceIndicated ||
         ws.verdict == WitnessSystemVerdict::NotApplicable)) {
        // The gap estimate alone carries the signal when the witness-system
        // test does not apply (it needs m <= n-2).
        unlikely_signal = true;
        log.push_back("the gap estimate is well above threshold " +
                      detail::fmt(opts.gap_threshold) +
                      " and nothing contradicts nonexistence");
    }
    if (ws.verdict == WitnessSystemVerdict::ExistenceIndicated) likely_signal = true;

    // (8) heuristic merge
    Conclusion conclusion = Conclusion::Unknown;
    if (likely_signal && unlikely_signal) {
        log.push_back("heuristic signals disagree; reporting Unknown with both attached");
    } else if (unlikely_signal) {
        conclusion = Conclusion::RankOneUnlikely;
    } else if (likely_signal) {
        conclusion = Conclusion::RankOneLikely;
    } else {
        log.push_back("no decisive signal either way");
    }
    return Verdict::make(inst, conclusion, Grade::Heuristic, std::move(ev), std::move(log),
                         opts.sdp.eps_sdp, opts.search.eps_accept);
}

} // namespace hlme

#endif
