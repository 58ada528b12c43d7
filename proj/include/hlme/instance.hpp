#ifndef HLME_INSTANCE_HPP
#define HLME_INSTANCE_HPP

#include <cmath>
#include <istream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hlme/errors.hpp"
#include "hlme/sym_matrix.hpp"

namespace hlme {

/// System <A_i, X> = 0 (i = 1..m), X >= 0, over symmetric n x n matrices.
struct HlmeInstance {
    int n = 1;
    std::vector<SymMatrix> A;
    std::vector<std::string> labels;  // optional, empty or one per matrix

    int m() const { return static_cast<int>(A.size()); }

    void validate() const {
        if (n < 1) throw DimensionMismatch("HlmeInstance: n must be >= 1");
        if (A.empty()) throw DimensionMismatch("HlmeInstance: m must be >= 1");
        for (const SymMatrix& Ai : A)
            if (Ai.dim() != n) throw DimensionMismatch("HlmeInstance: matrix dim mismatch");
        if (!labels.empty() && labels.size() != A.size())
            throw DimensionMismatch("HlmeInstance: label count mismatch");
    }
};

enum class InstanceFormat { Json, Triplet };

inline HlmeInstance loadJson(std::istream& in, bool symmetrize = false) {
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("JSON parse failure: ") + e.what());
    }
    if (!j.is_object() || !j.contains("n") || !j.contains("m") || !j.contains("matrices"))
        throw ParseError("JSON instance requires fields n, m, matrices");
    HlmeInstance inst;
    inst.n = j.at("n").get<int>();
    const int m = j.at("m").get<int>();
    if (inst.n < 1 || m < 1) throw DimensionMismatch("instance requires n >= 1 and m >= 1");
    const auto& mats = j.at("matrices");
    if (!mats.is_array() || static_cast<int>(mats.size()) != m)
        throw DimensionMismatch("matrices array length does not equal m");
    for (const auto& rows : mats) {
        if (!rows.is_array() || static_cast<int>(rows.size()) != inst.n)
            throw DimensionMismatch("matrix row count does not equal n");
        Eigen::MatrixXd M(inst.n, inst.n);
        for (int i = 0; i < inst.n; ++i) {
            if (!rows[i].is_array() || static_cast<int>(rows[i].size()) != inst.n)
                throw DimensionMismatch("matrix row length does not equal n");
            for (int k = 0; k < inst.n; ++k) M(i, k) = rows[i][k].get<double>();
        }
        inst.A.push_back(SymMatrix::fromDense(M, symmetrize));
    }
    if (j.contains("labels")) inst.labels = j.at("labels").get<std::vector<std::string>>();
    inst.validate();
    return inst;
}

/// Header line "n m", then lines "k i j v" with 1-based indices, i <= j;
/// both (i,j) and (j,i) are set. Unspecified entries are zero.
inline HlmeInstance loadTriplet(std::istream& in) {
    std::string line;
    int n = 0, m = 0;
    while (std::getline(in, line)) {
        std::istringstream ls(line);
        if (ls >> n >> m) break;
        std::string tok;
        std::istringstream probe(line);
        if (probe >> tok && tok[0] != '#') throw ParseError("triplet: malformed header line");
    }
    if (n < 1 || m < 1) throw DimensionMismatch("triplet: header requires n >= 1 and m >= 1");
    HlmeInstance inst;
    inst.n = n;
    inst.A.assign(static_cast<size_t>(m), SymMatrix(n));
    while (std::getline(in, line)) {
        std::istringstream ls(line);
        int k, i, j;
        double v;
        if (!(ls >> k)) continue;  // blank line
        if (!(ls >> i >> j >> v)) throw ParseError("triplet: malformed entry line: " + line);
        if (k < 1 || k > m) throw DimensionMismatch("triplet: matrix index out of range");
        if (i < 1 || j < 1 || i > n || j > n || i > j)
            throw DimensionMismatch("triplet: entry indices out of range (need 1 <= i <= j <= n)");
        inst.A[static_cast<size_t>(k - 1)].set(i - 1, j - 1, v);
    }
    inst.validate();
    return inst;
}

inline HlmeInstance load(std::istream& in, InstanceFormat format, bool symmetrize = false) {
    return format == InstanceFormat::Json ? loadJson(in, symmetrize) : loadTriplet(in);
}

inline nlohmann::json matrixToJson(const SymMatrix& M) {
    nlohmann::json rows = nlohmann::json::array();
    for (int i = 0; i < M.dim(); ++i) {
        nlohmann::json row = nlohmann::json::array();
        for (int j = 0; j < M.dim(); ++j) row.push_back(M(i, j));
        rows.push_back(row);
    }
    return rows;
}

inline nlohmann::json toJson(const HlmeInstance& inst) {
    nlohmann::json j;
    j["n"] = inst.n;
    j["m"] = inst.m();
    j["matrices"] = nlohmann::json::array();
    for (const SymMatrix& Ai : inst.A) j["matrices"].push_back(matrixToJson(Ai));
    if (!inst.labels.empty()) j["labels"] = inst.labels;
    return j;
}

inline std::string serialize(const HlmeInstance& inst) { return toJson(inst).dump(2); }

/// Scales every nonzero matrix to unit Frobenius norm. Homogeneity keeps the
/// solution set of the system unchanged.
inline HlmeInstance normalize(const HlmeInstance& inst) {
    HlmeInstance out = inst;
    for (SymMatrix& Ai : out.A) {
        const double f = Ai.frobeniusNorm();
        if (f > 0.0) Ai = Ai.scaled(1.0 / f);
    }
    return out;
}

/// Removes zero matrices (keeps at least one matrix so the system stays well formed).
inline HlmeInstance dropZeroMatrices(const HlmeInstance& inst, int* dropped = nullptr) {
    HlmeInstance out;
    out.n = inst.n;
    for (size_t i = 0; i < inst.A.size(); ++i) {
        if (!inst.A[i].isZero()) {
            out.A.push_back(inst.A[i]);
            if (!inst.labels.empty()) out.labels.push_back(inst.labels[i]);
        }
    }
    if (dropped) *dropped = inst.m() - out.m();
    if (out.A.empty()) {
        out.A.push_back(inst.A.front());
        if (!inst.labels.empty()) out.labels.push_back(inst.labels.front());
        if (dropped) *dropped = inst.m() - 1;
    }
    return out;
}

struct NamedExample {
    std::string key;
    HlmeInstance instance;
    std::string description;
    bool has_rank_one = false;
    bool known = false;                             // whether has_rank_one is a known fact
    std::optional<Eigen::VectorXd> known_solution;  // unit rank-one witness, when printed
};

inline std::vector<std::string> builtinKeys() {
    return {"eee", "simple2x2", "remark35", "remark36", "lastex"};
}

inline NamedExample builtin(const std::string& key) {
    NamedExample ex;
    ex.key = key;
    ex.known = true;
    if (key == "eee") {
        ex.instance.n = 4;
        ex.instance.A = {SymMatrix::diag({1, -1, 0, 0}), SymMatrix::diag({1, 0, -1, -1}),
                         SymMatrix(4)};
        ex.instance.A[2].set(0, 1, 1.0);
        ex.description = "n=4, m=3; nonzero PSD solutions exist (e.g. diag(1,1,1,0)) but no rank-one solution";
        ex.has_rank_one = false;
    } else if (key == "simple2x2") {
        ex.instance.n = 2;
        ex.instance.A = {SymMatrix::diag({1, -1}), SymMatrix(2)};
        ex.instance.A[1].set(0, 1, 1.0);
        ex.description = "n=2, m=2 pencil; every nontrivial solution has rank 2";
        ex.has_rank_one = false;
    } else if (key == "remark35") {
        ex.instance.n = 3;
        ex.instance.A = {SymMatrix::diag({1, 1, -1}), SymMatrix::diag({2, 2, -2}),
                         SymMatrix::diag({3, 3, -3})};
        ex.description = "n=3, m=3 with A2=2*A1, A3=3*A1; rank-one solution x=(0,1,1)/sqrt(2)";
        ex.has_rank_one = true;
        Eigen::VectorXd x(3);
        x << 0, 1, 1;
        ex.known_solution = x / std::sqrt(2.0);
    } else if (key == "remark36") {
        ex.instance.n = 3;
        ex.instance.A = {SymMatrix::diag({1, 1, -1}), SymMatrix::diag({1, -1, 1})};
        ex.description = "n=3, m=2, both matrices indefinite; rank-one solution x=(0,1,1)/sqrt(2)";
        ex.has_rank_one = true;
        Eigen::VectorXd x(3);
        x << 0, 1, 1;
        ex.known_solution = x / std::sqrt(2.0);
    } else if (key == "lastex") {
        ex.instance.n = 5;
        ex.instance.A = {SymMatrix::diag({1, 0, 0, -1, 0}), SymMatrix::diag({1, 0, -1, -1, -1}),
                         SymMatrix(5)};
        ex.instance.A[2].set(0, 1, 1.0);
        ex.description = "n=5, m=3; rank-one solution x=(0,1,0,0,0)";
        ex.has_rank_one = true;
        Eigen::VectorXd x(5);
        x << 0, 1, 0, 0, 0;
        ex.known_solution = x;
    } else {
        throw UnknownExample("unknown builtin instance: " + key);
    }
    ex.instance.validate();
    return ex;
}

} // namespace hlme

#endif
