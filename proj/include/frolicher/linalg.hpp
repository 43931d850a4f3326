#pragma once

#include "frolicher/scalar.hpp"

#include <json.hpp>

#include <cstddef>
#include <optional>
#include <vector>

namespace frol {

using Vec = std::vector<GR>;

bool is_zero(const Vec& v);
Vec operator+(const Vec& a, const Vec& b);
Vec operator-(const Vec& a, const Vec& b);
Vec operator*(const GR& c, const Vec& v);
Vec conj(const Vec& v);

// Dense row-major matrix over Q(i).
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols) {}
    static Matrix identity(std::size_t n);
    static Matrix from_rows(const std::vector<Vec>& rows, std::size_t cols);
    static Matrix from_cols(const std::vector<Vec>& cols, std::size_t rows);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    GR& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    const GR& operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }
    Vec row(std::size_t i) const;
    Vec col(std::size_t j) const;

    Matrix operator*(const Matrix& o) const;
    Vec operator*(const Vec& v) const;
    Matrix operator+(const Matrix& o) const;
    Matrix operator-(const Matrix& o) const;
    Matrix scaled(const GR& c) const;
    Matrix transpose() const;
    Matrix adjoint() const;  // conjugate transpose
    bool is_zero() const;
    friend bool operator==(const Matrix& a, const Matrix& b)
    {
        return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.data_ == b.data_;
    }

    // Throws MathError when singular.
    Matrix inverse() const;
    std::size_t rank() const;
    GR determinant() const;

    nlohmann::json to_json() const;

private:
    std::size_t rows_ = 0, cols_ = 0;
    std::vector<GR> data_;
};

struct Rref {
    Matrix reduced;           // nonzero rows only
    std::vector<std::size_t> pivots;
};

// Deterministic Gauss-Jordan: leftmost nonzero column, first nonzero row.
// Only columns < pivot_limit are used as pivots (default: all).
Rref rref(const Matrix& m, std::size_t pivot_limit = static_cast<std::size_t>(-1));

// Subspace of K^ambient stored as its canonical RREF basis (rows).
class Subspace {
public:
    explicit Subspace(std::size_t ambient = 0) : basis_(0, ambient) {}
    static Subspace span(std::size_t ambient, const std::vector<Vec>& vectors);
    static Subspace from_rows(const Matrix& rows);
    static Subspace full(std::size_t ambient);

    std::size_t ambient() const { return basis_.cols(); }
    std::size_t dim() const { return basis_.rows(); }
    const Matrix& basis() const { return basis_; }
    const std::vector<std::size_t>& pivots() const { return pivots_; }
    std::vector<Vec> vectors() const;

    // Canonical representative modulo the subspace.
    Vec reduce(const Vec& v) const;
    bool contains(const Vec& v) const;
    bool contains(const Subspace& other) const;
    // Rows W spanning {w : sum_c w_c u_c = 0 for all u in U}.
    Matrix annihilator() const;
    // Coordinates of v in the RREF basis (v must lie in the subspace).
    Vec coordinates(const Vec& v) const;

    friend bool operator==(const Subspace& a, const Subspace& b) { return a.basis_ == b.basis_; }
    friend bool operator!=(const Subspace& a, const Subspace& b) { return !(a == b); }

    nlohmann::json to_json() const;

private:
    Matrix basis_;
    std::vector<std::size_t> pivots_;
};

Subspace kernel(const Matrix& f);
Subspace image(const Matrix& f);
Subspace image(const Matrix& f, const Subspace& domain);
Subspace preimage(const Matrix& f, const Subspace& target);
Subspace sum(const Subspace& u, const Subspace& v);
Subspace intersect(const Subspace& u, const Subspace& v);
// dim U - dim V; throws MathError unless V is contained in U.
std::size_t quotient_dim(const Subspace& u, const Subspace& v);

struct SolveResult {
    bool consistent = false;
    Vec particular;          // some x with f x = y
    Subspace homogeneous;    // ker f
    Vec certificate;         // w with w f = 0 and w y = 1 when inconsistent
};
SolveResult solve(const Matrix& f, const Vec& y);

// Hermitian inner product <x, y> = y^H G x.
GR inner(const Vec& x, const Vec& y, const Matrix& gram);
Subspace orthogonal_complement(const Subspace& u, const Matrix& gram);
// P = B (B^H G B)^{-1} B^H G with B the basis as columns.
Matrix orthogonal_projector(const Subspace& u, const Matrix& gram);
// Representatives of U/V: the orthogonal complement of U∩V inside U when a
// gram matrix is given, otherwise the RREF-pivot complement.
std::vector<Vec> quotient_representatives(const Subspace& u, const Subspace& v, const Matrix* gram);

// Exact rank check helper for tests and reports.
bool is_hermitian(const Matrix& m);

}  // namespace frol
