#ifndef HLME_SYM_MATRIX_HPP
#define HLME_SYM_MATRIX_HPP

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "hlme/errors.hpp"

namespace hlme {

/// Real symmetric n x n matrix, stored as the upper triangle (row-major).
/// The materialized dense matrix is exactly symmetric by construction.
class SymMatrix {
public:
    SymMatrix() : n_(1), tri_(1, 0.0) {}

    explicit SymMatrix(int n) : n_(n), tri_(static_cast<size_t>(n) * (n + 1) / 2, 0.0) {
        if (n < 1) throw DimensionMismatch("SymMatrix: dim must be >= 1");
    }

    SymMatrix(int n, std::vector<double> upper_tri) : n_(n), tri_(std::move(upper_tri)) {
        if (n < 1) throw DimensionMismatch("SymMatrix: dim must be >= 1");
        if (tri_.size() != static_cast<size_t>(n) * (n + 1) / 2)
            throw DimensionMismatch("SymMatrix: triangle size does not match dim");
        for (double v : tri_)
            if (!std::isfinite(v)) throw NumericalFailure("SymMatrix: non-finite entry");
    }

    /// Builds from a dense matrix. Rejects input whose asymmetry exceeds
    /// asym_tol * ||M||_F unless symmetrize is set, in which case (M+M^T)/2 is taken.
    static SymMatrix fromDense(const Eigen::MatrixXd& M, bool symmetrize = false,
                               double asym_tol = 1e-12) {
        if (M.rows() != M.cols() || M.rows() < 1)
            throw DimensionMismatch("SymMatrix::fromDense: matrix must be square");
        const double asym = (M - M.transpose()).norm();
        if (!symmetrize && asym > asym_tol * std::max(1.0, M.norm()))
            throw AsymmetricInput("SymMatrix::fromDense: input is not symmetric");
        const int n = static_cast<int>(M.rows());
        SymMatrix S(n);
        for (int i = 0; i < n; ++i)
            for (int j = i; j < n; ++j)
                S.tri_[S.index(i, j)] = symmetrize ? 0.5 * (M(i, j) + M(j, i)) : M(i, j);
        for (double v : S.tri_)
            if (!std::isfinite(v)) throw NumericalFailure("SymMatrix: non-finite entry");
        return S;
    }

    static SymMatrix identity(int n) {
        SymMatrix S(n);
        for (int i = 0; i < n; ++i) S.set(i, i, 1.0);
        return S;
    }

    static SymMatrix zero(int n) { return SymMatrix(n); }

    static SymMatrix diag(const std::vector<double>& d) {
        SymMatrix S(static_cast<int>(d.size()));
        for (int i = 0; i < S.n_; ++i) S.set(i, i, d[static_cast<size_t>(i)]);
        return S;
    }

    /// Rank-one matrix x x^T.
    static SymMatrix outer(const Eigen::VectorXd& x) {
        SymMatrix S(static_cast<int>(x.size()));
        for (int i = 0; i < S.n_; ++i)
            for (int j = i; j < S.n_; ++j) S.set(i, j, x(i) * x(j));
        return S;
    }

    int dim() const { return n_; }

    double operator()(int i, int j) const {
        return i <= j ? tri_[index(i, j)] : tri_[index(j, i)];
    }

    void set(int i, int j, double v) {
        if (i <= j)
            tri_[index(i, j)] = v;
        else
            tri_[index(j, i)] = v;
    }

    const std::vector<double>& upperTriangle() const { return tri_; }

    Eigen::MatrixXd toDense() const {
        Eigen::MatrixXd M(n_, n_);
        for (int i = 0; i < n_; ++i)
            for (int j = i; j < n_; ++j) M(i, j) = M(j, i) = tri_[index(i, j)];
        return M;
    }

    double trace() const {
        double t = 0.0;
        for (int i = 0; i < n_; ++i) t += (*this)(i, i);
        return t;
    }

    double frobeniusNorm() const {
        double s = 0.0;
        for (int i = 0; i < n_; ++i) {
            s += (*this)(i, i) * (*this)(i, i);
            for (int j = i + 1; j < n_; ++j) s += 2.0 * (*this)(i, j) * (*this)(i, j);
        }
        return std::sqrt(s);
    }

    /// <A, B> = tr(A^T B).
    double inner(const SymMatrix& other) const {
        if (other.n_ != n_) throw DimensionMismatch("SymMatrix::inner: dim mismatch");
        double s = 0.0;
        for (int i = 0; i < n_; ++i) {
            s += (*this)(i, i) * other(i, i);
            for (int j = i + 1; j < n_; ++j) s += 2.0 * (*this)(i, j) * other(i, j);
        }
        return s;
    }

    double quadForm(const Eigen::VectorXd& x) const {
        double s = 0.0;
        for (int i = 0; i < n_; ++i) {
            s += (*this)(i, i) * x(i) * x(i);
            for (int j = i + 1; j < n_; ++j) s += 2.0 * (*this)(i, j) * x(i) * x(j);
        }
        return s;
    }

    SymMatrix scaled(double c) const {
        SymMatrix S(*this);
        for (double& v : S.tri_) v *= c;
        return S;
    }

    bool isZero() const {
        for (double v : tri_)
            if (v != 0.0) return false;
        return true;
    }

private:
    size_t index(int i, int j) const {
        // row-major upper triangle: row i starts after i rows of lengths n, n-1, ...
        return static_cast<size_t>(i) * n_ - static_cast<size_t>(i) * (i - 1) / 2 + (j - i);
    }

    int n_;
    std::vector<double> tri_;
};

} // namespace hlme

#endif
