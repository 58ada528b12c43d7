#include <chrono>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>

#include "CLI11.hpp"

#include "hlme/certificates.hpp"
#include "hlme/existence.hpp"
#include "hlme/instance.hpp"
#include "hlme/oracle.hpp"
#include "hlme/pipeline.hpp"
#include "hlme/report.hpp"

namespace {

struct RunConfig {
    std::string builtin_key;
    std::string input_path;
    std::string format = "auto";
    std::string json_out;
    std::string solution_path;
    uint64_t seed = 0;
    double sdp_tol = 1e-7;
    int sdp_max_iter = 50000;
    double eps_accept = hlme::kEpsAcceptDefault;
    double gap_threshold = 1e-3;
    int starts = 200;
    int threads = 0;
    bool symmetrize = false;
    bool drop_zero = false;
    bool no_timestamp = false;
};

void addCommonOptions(CLI::App* cmd, RunConfig& cfg, bool needs_instance = true) {
    if (needs_instance) {
        cmd->add_option("--builtin", cfg.builtin_key, "built-in example key (see `examples`)");
        cmd->add_option("--input", cfg.input_path, "instance file path");
        cmd->add_option("--format", cfg.format, "input format: json, triplet, auto")
            ->check(CLI::IsMember({"json", "triplet", "auto"}));
        cmd->add_flag("--symmetrize", cfg.symmetrize,
                      "average asymmetric input matrices instead of rejecting them");
        cmd->add_flag("--drop-zero", cfg.drop_zero, "drop all-zero matrices before analysis");
    }
    cmd->add_option("--seed", cfg.seed, "RNG seed (env HLME_SEED is the fallback)");
    cmd->add_option("--json-out", cfg.json_out, "write the full JSON report to this path");
    cmd->add_option("--sdp-tol", cfg.sdp_tol, "SDP solver tolerance")->check(CLI::PositiveNumber);
    cmd->add_option("--sdp-max-iter", cfg.sdp_max_iter, "SDP solver iteration cap")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--eps-accept", cfg.eps_accept, "witness acceptance residual tolerance")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--gap-threshold", cfg.gap_threshold,
                    "gap level treated as evidence of nonexistence")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--starts", cfg.starts, "multi-start search budget")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--threads", cfg.threads, "worker threads (0 = all available)");
    cmd->add_flag("--no-timestamp", cfg.no_timestamp, "omit the timestamp from JSON output");
}

hlme::HlmeInstance loadInstance(const RunConfig& cfg) {
    if (!cfg.builtin_key.empty() && !cfg.input_path.empty())
        throw hlme::ParseError("give either --builtin or --input, not both");
    hlme::HlmeInstance inst;
    if (!cfg.builtin_key.empty()) {
        inst = hlme::builtin(cfg.builtin_key).instance;
    } else if (!cfg.input_path.empty()) {
        std::ifstream in(cfg.input_path);
        if (!in) throw hlme::ParseError("cannot open input file: " + cfg.input_path);
        hlme::InstanceFormat fmt;
        if (cfg.format == "json") {
            fmt = hlme::InstanceFormat::Json;
        } else if (cfg.format == "triplet") {
            fmt = hlme::InstanceFormat::Triplet;
        } else {
            const int c = in.peek();
            fmt = (c == '{' || c == '[') ? hlme::InstanceFormat::Json
                                         : hlme::InstanceFormat::Triplet;
        }
        inst = hlme::load(in, fmt, cfg.symmetrize);
    } else {
        throw hlme::ParseError("no instance given: use --builtin or --input");
    }
    if (cfg.drop_zero) inst = hlme::dropZeroMatrices(inst);
    return inst;
}

hlme::AnalyzeOptions makeOptions(const RunConfig& cfg) {
    hlme::AnalyzeOptions opts;
    opts.sdp.eps_sdp = cfg.sdp_tol;
    opts.sdp.max_iter = cfg.sdp_max_iter;
    opts.search.starts = cfg.starts;
    opts.search.seed = cfg.seed;
    opts.search.eps_accept = cfg.eps_accept;
    opts.search.threads = cfg.threads > 0
                              ? cfg.threads
                              : static_cast<int>(
                                    std::max(1u, std::thread::hardware_concurrency()));
    opts.structure.seed = cfg.seed;
    opts.gap_threshold = cfg.gap_threshold;
    return opts;
}

std::string isoTimestamp() {
    const std::time_t now = std::time(nullptr);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    return buf;
}

void emitJson(const RunConfig& cfg, const std::string& command, const hlme::HlmeInstance& inst,
              nlohmann::json report) {
    if (cfg.json_out.empty()) return;
    nlohmann::json j;
    j["schema"] = 1;
    j["command"] = command;
    j["seed"] = cfg.seed;
    j["options"] = {{"sdp_tol", cfg.sdp_tol},
                    {"sdp_max_iter", cfg.sdp_max_iter},
                    {"eps_accept", cfg.eps_accept},
                    {"gap_threshold", cfg.gap_threshold},
                    {"starts", cfg.starts},
                    {"drop_zero", cfg.drop_zero}};
    j["instance"] = hlme::toJson(inst);
    if (!cfg.builtin_key.empty()) j["instance"]["builtin"] = cfg.builtin_key;
    j["report"] = std::move(report);
    if (!cfg.no_timestamp) j["timestamp"] = isoTimestamp();
    std::ofstream out(cfg.json_out);
    if (!out) throw hlme::ParseError("cannot write JSON output: " + cfg.json_out);
    out << j.dump(2) << '\n';
}

hlme::SymMatrix loadSolutionMatrix(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw hlme::ParseError("cannot open solution file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw hlme::ParseError(std::string("solution file is not valid JSON: ") + e.what());
    }
    const nlohmann::json& rows = j.is_array() ? j : j.at("matrix");
    const int n = static_cast<int>(rows.size());
    Eigen::MatrixXd M(n, n);
    for (int i = 0; i < n; ++i) {
        if (static_cast<int>(rows[i].size()) != n)
            throw hlme::ParseError("solution matrix is not square");
        for (int k = 0; k < n; ++k) M(i, k) = rows[i][k].get<double>();
    }
    return hlme::SymMatrix::fromDense(M);
}

int runAnalyze(const RunConfig& cfg) {
    const hlme::HlmeInstance inst = loadInstance(cfg);
    const hlme::Verdict v = hlme::analyze(inst, makeOptions(cfg));
    std::cout << "conclusion: " << hlme::toString(v.conclusion) << "\n";
    std::cout << "grade:      " << hlme::toString(v.grade) << "\n";
    for (const std::string& line : v.narrative) std::cout << "  - " << line << "\n";
    if (v.evidence.witness) {
        std::cout << "witness x = [";
        const Eigen::VectorXd& x = v.evidence.witness->x;
        for (Eigen::Index i = 0; i < x.size(); ++i)
            std::cout << (i ? ", " : "") << x(i);
        std::cout << "], max residual " << v.evidence.witness->max_residual << "\n";
    }
    emitJson(cfg, "analyze", inst, hlme::toJson(v));
    return 0;
}

int runTrivial(const RunConfig& cfg) {
    const hlme::HlmeInstance inst = loadInstance(cfg);
    const hlme::TrivialityCertificate cert =
        hlme::test_trivial_only(inst, makeOptions(cfg).sdp);
    if (cert.inconclusive) {
        std::cout << "inconclusive: " << cert.note << "\n";
    } else if (cert.trivial_only) {
        std::cout << "trivial-only: yes (X = 0 is the unique PSD solution)\n";
        std::cout << "certificate t = [";
        for (size_t i = 0; i < cert.t.size(); ++i) std::cout << (i ? ", " : "") << cert.t[i];
        std::cout << "], eigenvalue margin " << cert.min_eig_vs_identity << "\n";
    } else {
        std::cout << "trivial-only: no (verified nonzero PSD solution, feasibility value "
                  << cert.primal_value << ")\n";
    }
    emitJson(cfg, "trivial", inst, hlme::toJson(cert));
    return 0;
}

int runEta(const RunConfig& cfg) {
    const hlme::HlmeInstance inst = loadInstance(cfg);
    const hlme::AnalyzeOptions opts = makeOptions(cfg);
    const hlme::TrivialityCertificate cert = hlme::test_trivial_only(inst, opts.sdp);
    if (cert.inconclusive) {
        std::cout << "inconclusive: " << cert.note << "\n";
        emitJson(cfg, "eta", inst, hlme::toJson(cert));
        return 0;
    }
    const hlme::RankBoundReport rep = hlme::compute_bounds(inst, cert, opts.sdp);
    std::cout << "eta = " << rep.eta << " (ceil " << rep.eta_ceil << ")\n";
    std::cout << "max combination rank in [" << rep.r_star_lower << ", " << rep.r_star_upper
              << "]\n";
    if (rep.vacuous) {
        std::cout << "no nonzero solutions; rank bounds are vacuous\n";
    } else {
        std::cout << "every solution has rank <= " << rep.all_solutions_bound << "\n";
        std::cout << "some solution has rank <= " << rep.combined_min_rank_bound
                  << " (lifted bound " << rep.min_rank_bound_bp << ")\n";
    }
    nlohmann::json j = hlme::toJson(rep);
    j["triviality"] = hlme::toJson(cert);
    emitJson(cfg, "eta", inst, std::move(j));
    return 0;
}

int runDinesBrickman(const RunConfig& cfg) {
    const hlme::HlmeInstance inst = loadInstance(cfg);
    hlme::TrivialityCertificate cert;
    const hlme::PencilDecision d =
        hlme::dines_brickman(inst, makeOptions(cfg).sdp, &cert);
    std::cout << hlme::toString(d);
    if (d == hlme::PencilDecision::ExistsRankOne || d == hlme::PencilDecision::NoRankOne)
        std::cout << " (Certified)";
    std::cout << "\n";
    nlohmann::json j;
    j["decision"] = hlme::toString(d);
    j["triviality"] = hlme::toJson(cert);
    emitJson(cfg, "dines-brickman", inst, std::move(j));
    return 0;
}

int runExtract(const RunConfig& cfg) {
    const hlme::HlmeInstance inst = loadInstance(cfg);
    const hlme::SymMatrix X = loadSolutionMatrix(cfg.solution_path);
    hlme::ExtractionOptions xo;
    xo.eps_sdp = cfg.sdp_tol;
    xo.eps_accept = cfg.eps_accept;
    xo.seed = cfg.seed;
    const auto trace = hlme::extract_rank_one(inst, X, xo);
    nlohmann::json j;
    if (trace) {
        std::cout << "extracted rank-one solution (" << hlme::toString(trace->branch)
                  << "), max residual " << trace->max_residual << "\n";
        std::cout << "w = [";
        for (Eigen::Index i = 0; i < trace->w.size(); ++i)
            std::cout << (i ? ", " : "") << trace->w(i);
        std::cout << "]\n";
        j["extracted"] = true;
        j["trace"] = hlme::toJson(*trace);
    } else {
        std::cout << "no rank-one solution extracted within tolerance\n";
        j["extracted"] = false;
    }
    emitJson(cfg, "extract", inst, std::move(j));
    return 0;
}

int runOracle(const RunConfig& cfg) {
    const hlme::HlmeInstance inst = loadInstance(cfg);
    const hlme::SearchOptions so = makeOptions(cfg).search;
    const auto w = hlme::find_rank_one(inst, so);
    const hlme::GapEstimate gap = hlme::quadratic_gap(inst, so);
    nlohmann::json j;
    if (w) {
        std::cout << "rank-one solution found, max residual " << w->max_residual << "\n";
        j["witness"] = hlme::toJson(*w);
    } else {
        std::cout << "no rank-one solution found over " << so.starts << " starts\n";
    }
    std::cout << "gap estimate beta_hat = " << gap.beta_hat << " (converged fraction "
              << gap.converged_fraction << ")\n";
    j["found"] = w.has_value();
    j["gap"] = hlme::toJson(gap);
    emitJson(cfg, "oracle", inst, std::move(j));
    return 0;
}

int runNonexist(const RunConfig& cfg) {
    const hlme::HlmeInstance inst = loadInstance(cfg);
    const hlme::WitnessSystemReport rep =
        hlme::check_witness_system(inst, makeOptions(cfg).search);
    std::cout << "verdict: " << hlme::toString(rep.verdict) << "\n";
    if (!rep.applicable) {
        std::cout << "witness-system analysis needs m <= n-2\n";
    } else {
        std::cout << "witness-system points found: " << rep.witnesses.size() << "\n";
        std::cout << "all penultimate coordinates nonzero: "
                  << (rep.all_have_nonzero_penultimate ? "yes" : "no") << "\n";
    }
    if (!rep.note.empty()) std::cout << rep.note << "\n";
    emitJson(cfg, "nonexist", inst, hlme::toJson(rep));
    return 0;
}

int runExamples(const std::string& emit_key) {
    if (!emit_key.empty()) {
        std::cout << hlme::serialize(hlme::builtin(emit_key).instance) << "\n";
        return 0;
    }
    for (const std::string& key : hlme::builtinKeys()) {
        const hlme::NamedExample ex = hlme::builtin(key);
        std::cout << key << ": " << ex.description << "\n";
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"decides whether a homogeneous PSD matrix-equation system admits a rank-one "
                 "solution, with verifiable certificates where possible"};
    app.require_subcommand(1);

    RunConfig cfg;
    if (const char* env = std::getenv("HLME_SEED")) {
        try {
            cfg.seed = std::stoull(env);
        } catch (...) {
            std::cerr << "invalid HLME_SEED value: " << env << "\n";
            return 2;
        }
    }

    CLI::App* analyze = app.add_subcommand("analyze", "run the full decision pipeline");
    addCommonOptions(analyze, cfg);
    CLI::App* trivial =
        app.add_subcommand("trivial", "test whether X = 0 is the only PSD solution");
    addCommonOptions(trivial, cfg);
    CLI::App* eta = app.add_subcommand("eta", "nuclear-norm rank bounds");
    addCommonOptions(eta, cfg);
    CLI::App* db =
        app.add_subcommand("dines-brickman", "exact two-matrix decision (m = 2, n >= 3)");
    addCommonOptions(db, cfg);
    CLI::App* extract =
        app.add_subcommand("extract", "extract a rank-one solution from a feasible matrix");
    addCommonOptions(extract, cfg);
    extract->add_option("--solution", cfg.solution_path, "JSON file with the feasible matrix")
        ->required();
    CLI::App* oracle =
        app.add_subcommand("oracle", "direct multi-start search and gap estimate");
    addCommonOptions(oracle, cfg);
    CLI::App* nonexist = app.add_subcommand("nonexist", "witness-system nonexistence analysis");
    addCommonOptions(nonexist, cfg);
    CLI::App* examples = app.add_subcommand("examples", "list built-in examples");
    std::string emit_key;
    examples->add_option("--emit", emit_key, "print the given built-in instance as JSON");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (*analyze) return runAnalyze(cfg);
        if (*trivial) return runTrivial(cfg);
        if (*eta) return runEta(cfg);
        if (*db) return runDinesBrickman(cfg);
        if (*extract) return runExtract(cfg);
        if (*oracle) return runOracle(cfg);
        if (*nonexist) return runNonexist(cfg);
        if (*examples) return runExamples(emit_key);
    } catch (const hlme::NumericalFailure& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    } catch (const hlme::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::runtime_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
