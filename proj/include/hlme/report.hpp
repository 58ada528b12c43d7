#ifndef HLME_REPORT_HPP
#define HLME_REPORT_HPP

#include <nlohmann/json.hpp>

#include "hlme/certificates.hpp"
#include "hlme/existence.hpp"
#include "hlme/oracle.hpp"
#include "hlme/pipeline.hpp"

namespace hlme {

inline nlohmann::json vecToJson(const Eigen::VectorXd& v) {
    nlohmann::json a = nlohmann::json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
    return a;
}

inline nlohmann::json toJson(const TrivialityCertificate& c) {
    nlohmann::json j;
    j["inconclusive"] = c.inconclusive;
    j["trivial_only"] = c.trivial_only;
    j["primal_value"] = c.primal_value;
    j["dual_alpha"] = c.dual_alpha;
    if (c.trivial_only) {
        j["t"] = c.t;
        j["combo"] = matrixToJson(c.combo);
        j["min_eig_vs_identity"] = c.min_eig_vs_identity;
    }
    if (c.nonzero_solution) j["nonzero_solution"] = matrixToJson(*c.nonzero_solution);
    if (!c.note.empty()) j["note"] = c.note;
    return j;
}

inline nlohmann::json toJson(const RankBoundReport& r) {
    nlohmann::json j;
    j["vacuous"] = r.vacuous;
    j["eta"] = r.eta;
    j["eta_ceil"] = r.eta_ceil;
    j["r_star_lower"] = r.r_star_lower;
    j["r_star_upper"] = r.r_star_upper;
    j["all_solutions_bound"] = r.all_solutions_bound;
    j["min_rank_bound_bp"] = r.min_rank_bound_bp;
    j["combined_min_rank_bound"] = r.combined_min_rank_bound;
    j["t"] = r.t;
    if (!r.note.empty()) j["note"] = r.note;
    return j;
}

inline nlohmann::json toJson(const StructureReport& r) {
    nlohmann::json j;
    nlohmann::json cls = nlohmann::json::array();
    for (DefinitenessClass c : r.classes) cls.push_back(toString(c));
    j["classes"] = cls;
    j["indefinite_count"] = r.indefinite_count;
    j["holds_i"] = r.holds_i;
    j["holds_ii"] = r.holds_ii;
    j["holds_iii"] = toString(r.holds_iii);
    j["pivot"] = r.pivot;
    j["samples_used"] = r.samples_used;
    if (r.counterexample) j["counterexample"] = vecToJson(*r.counterexample);
    return j;
}

inline nlohmann::json toJson(const ExtractionTrace& t) {
    nlohmann::json j;
    j["branch"] = toString(t.branch);
    j["pivot"] = t.pivot;
    if (t.branch == ExtractionBranch::DirectEigenvector) {
        j["eig_index"] = t.eig_index;
    } else {
        j["p"] = t.p;
        j["q"] = t.q;
        j["gamma"] = t.gamma;
        j["alpha"] = t.alpha;
        j["delta"] = t.delta;
    }
    j["w"] = vecToJson(t.w);
    j["residuals"] = t.residuals;
    j["max_residual"] = t.max_residual;
    return j;
}

inline nlohmann::json toJson(const Witness& w) {
    nlohmann::json j;
    j["kind"] = w.kind == WitnessKind::RankOneSolution ? "RankOneSolution" : "WitnessSystemPoint";
    j["x"] = vecToJson(w.x);
    j["residuals"] = w.residuals;
    j["max_residual"] = w.max_residual;
    if (w.kind == WitnessKind::WitnessSystemPoint) {
        j["x_n"] = w.x_n;
        j["x_n1"] = w.x_n1;
    }
    return j;
}

inline nlohmann::json toJson(const SignConditionReport& r) {
    nlohmann::json j;
    j["verdict"] = toString(r.verdict);
    j["samples_used"] = r.samples_used;
    j["worst_value"] = r.worst_value;
    if (r.counterexample) j["counterexample"] = vecToJson(*r.counterexample);
    if (r.bonus_rank_one) j["bonus_rank_one"] = vecToJson(*r.bonus_rank_one);
    return j;
}

inline nlohmann::json toJson(const GapEstimate& g) {
    nlohmann::json j;
    j["beta_hat"] = g.beta_hat;
    j["argmin_x"] = vecToJson(g.argmin_x);
    j["starts"] = g.starts;
    j["converged_fraction"] = g.converged_fraction;
    return j;
}

inline nlohmann::json toJson(const WitnessSystemReport& r) {
    nlohmann::json j;
    j["applicable"] = r.applicable;
    j["e_n_is_solution"] = r.e_n_is_solution;
    j["all_have_nonzero_penultimate"] = r.all_have_nonzero_penultimate;
    j["verdict"] = toString(r.verdict);
    nlohmann::json ws = nlohmann::json::array();
    for (const Witness& w : r.witnesses) ws.push_back(toJson(w));
    j["witnesses"] = ws;
    if (!r.note.empty()) j["note"] = r.note;
    return j;
}

inline nlohmann::json toJson(const Verdict& v) {
    nlohmann::json j;
    j["conclusion"] = toString(v.conclusion);
    j["grade"] = toString(v.grade);
    j["narrative"] = v.narrative;
    nlohmann::json ev;
    if (v.evidence.triviality) ev["triviality"] = toJson(*v.evidence.triviality);
    if (v.evidence.pencil) ev["pencil_decision"] = toString(*v.evidence.pencil);
    if (v.evidence.bounds) ev["rank_bounds"] = toJson(*v.evidence.bounds);
    if (v.evidence.structure) ev["structure"] = toJson(*v.evidence.structure);
    if (v.evidence.extraction) ev["extraction"] = toJson(*v.evidence.extraction);
    if (v.evidence.witness) ev["witness"] = toJson(*v.evidence.witness);
    if (v.evidence.sign_condition) ev["sign_condition"] = toJson(*v.evidence.sign_condition);
    if (v.evidence.gap) ev["gap"] = toJson(*v.evidence.gap);
    if (v.evidence.witness_system) ev["witness_system"] = toJson(*v.evidence.witness_system);
    j["evidence"] = ev;
    return j;
}

} // namespace hlme

#endif
