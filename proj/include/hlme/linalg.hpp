#ifndef HLME_LINALG_HPP
#define HLME_LINALG_HPP

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "hlme/errors.hpp"
#include "hlme/sym_matrix.hpp"

namespace hlme {

inline constexpr double kEpsLinBase = 1e-10;   // decomposition residual scale
inline constexpr double kEpsRankRel = 1e-8;    // relative rank / classification tolerance

struct EigDecomp {
    Eigen::VectorXd values;   // nondecreasing
    Eigen::MatrixXd vectors;  // orthonormal columns, M = V diag(values) V^T
};

enum class DefinitenessClass {
    Zero,
    PositiveDefinite,
    PositiveSemidefinite,
    NegativeDefinite,
    NegativeSemidefinite,
    Indefinite,
};

inline const char* toString(DefinitenessClass c) {
    switch (c) {
        case DefinitenessClass::Zero: return "Zero";
        case DefinitenessClass::PositiveDefinite: return "PositiveDefinite";
        case DefinitenessClass::PositiveSemidefinite: return "PositiveSemidefinite";
        case DefinitenessClass::NegativeDefinite: return "NegativeDefinite";
        case DefinitenessClass::NegativeSemidefinite: return "NegativeSemidefinite";
        case DefinitenessClass::Indefinite: return "Indefinite";
    }
    return "?";
}

inline EigDecomp eigh(const SymMatrix& M) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M.toDense());
    if (es.info() != Eigen::Success)
        throw NumericalFailure("eigh: eigensolver did not converge");
    return {es.eigenvalues(), es.eigenvectors()};
}

inline double defaultRankTol(const Eigen::VectorXd& eigenvalues) {
    double maxabs = 0.0;
    for (Eigen::Index i = 0; i < eigenvalues.size(); ++i)
        maxabs = std::max(maxabs, std::abs(eigenvalues(i)));
    return kEpsRankRel * std::max(1.0, maxabs);
}

/// Count of eigenvalues with |lambda| > tol. tol < 0 selects the default
/// spectrum-relative tolerance.
inline int numeric_rank(const SymMatrix& M, double tol = -1.0) {
    const EigDecomp d = eigh(M);
    if (tol < 0.0) tol = defaultRankTol(d.values);
    int r = 0;
    for (Eigen::Index i = 0; i < d.values.size(); ++i)
        if (std::abs(d.values(i)) > tol) ++r;
    return r;
}

/// Classification from eigenvalue signs at tolerance tol. Ties at the boundary
/// resolve toward Indefinite.
inline DefinitenessClass classify(const SymMatrix& M, double tol = -1.0) {
    const EigDecomp d = eigh(M);
    if (tol < 0.0) tol = defaultRankTol(d.values);
    const double lmin = d.values(0);
    const double lmax = d.values(d.values.size() - 1);
    if (std::abs(lmin) <= tol && std::abs(lmax) <= tol) return DefinitenessClass::Zero;
    if (lmin > tol) return DefinitenessClass::PositiveDefinite;
    if (lmin >= -tol && lmax > tol) return DefinitenessClass::PositiveSemidefinite;
    if (lmax < -tol) return DefinitenessClass::NegativeDefinite;
    if (lmax <= tol && lmin < -tol) return DefinitenessClass::NegativeSemidefinite;
    return DefinitenessClass::Indefinite;
}

/// Frobenius-nearest PSD matrix: eigenvalues clipped at zero.
inline SymMatrix psd_project(const SymMatrix& M) {
    const EigDecomp d = eigh(M);
    Eigen::VectorXd clipped = d.values.cwiseMax(0.0);
    Eigen::MatrixXd P = d.vectors * clipped.asDiagonal() * d.vectors.transpose();
    return SymMatrix::fromDense(P, /*symmetrize=*/true);
}

inline double minEigenvalue(const SymMatrix& M) { return eigh(M).values(0); }

} // namespace hlme

#endif
