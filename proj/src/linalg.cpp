#include "frolicher/linalg.hpp"

#include "frolicher/errors.hpp"

#include <utility>

namespace frol {

bool is_zero(const Vec& v)
{
    for (const auto& x : v)
        if (!x.is_zero())
            return false;
    return true;
}

Vec operator+(const Vec& a, const Vec& b)
{
    if (a.size() != b.size())
        throw InternalError("vector size mismatch");
    Vec r = a;
    for (std::size_t k = 0; k < r.size(); ++k)
        r[k] += b[k];
    return r;
}

Vec operator-(const Vec& a, const Vec& b)
{
    if (a.size() != b.size())
        throw InternalError("vector size mismatch");
    Vec r = a;
    for (std::size_t k = 0; k < r.size(); ++k)
        r[k] -= b[k];
    return r;
}

Vec operator*(const GR& c, const Vec& v)
{
    Vec r = v;
    for (auto& x : r)
        x *= c;
    return r;
}

Vec conj(const Vec& v)
{
    Vec r = v;
    for (auto& x : r)
        x = x.conj();
    return r;
}

Matrix Matrix::identity(std::size_t n)
{
    Matrix m(n, n);
    for (std::size_t k = 0; k < n; ++k)
        m(k, k) = GR(1);
    return m;
}

Matrix Matrix::from_rows(const std::vector<Vec>& rows, std::size_t cols)
{
    Matrix m(rows.size(), cols);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].size() != cols)
            throw InternalError("row length mismatch");
        for (std::size_t j = 0; j < cols; ++j)
            m(i, j) = rows[i][j];
    }
    return m;
}

Matrix Matrix::from_cols(const std::vector<Vec>& cols, std::size_t rows)
{
    Matrix m(rows, cols.size());
    for (std::size_t j = 0; j < cols.size(); ++j) {
        if (cols[j].size() != rows)
            throw InternalError("column length mismatch");
        for (std::size_t i = 0; i < rows; ++i)
            m(i, j) = cols[j][i];
    }
    return m;
}

Vec Matrix::row(std::size_t i) const { return Vec(data_.begin() + static_cast<long>(i * cols_), data_.begin() + static_cast<long>((i + 1) * cols_)); }

Vec Matrix::col(std::size_t j) const
{
    Vec v(rows_);
    for (std::size_t i = 0; i < rows_; ++i)
        v[i] = (*this)(i, j);
    return v;
}

Matrix Matrix::operator*(const Matrix& o) const
{
    if (cols_ != o.rows_)
        throw InternalError("matrix product shape mismatch");
    Matrix r(rows_, o.cols_);
    for (std::size_t i = 0; i < rows_; ++i)
        for (std::size_t k = 0; k < cols_; ++k) {
            const GR& a = (*this)(i, k);
            if (a.is_zero())
                continue;
            for (std::size_t j = 0; j < o.cols_; ++j) {
                const GR& b = o(k, j);
                if (!b.is_zero())
                    r(i, j) += a * b;
            }
        }
    return r;
}

Vec Matrix::operator*(const Vec& v) const
{
    if (cols_ != v.size())
        throw InternalError("matrix-vector shape mismatch");
    Vec r(rows_);
    for (std::size_t k = 0; k < cols_; ++k) {
        if (v[k].is_zero())
            continue;
        for (std::size_t i = 0; i < rows_; ++i) {
            const GR& a = (*this)(i, k);
            if (!a.is_zero())
                r[i] += a * v[k];
        }
    }
    return r;
}

Matrix Matrix::operator+(const Matrix& o) const
{
    if (rows_ != o.rows_ || cols_ != o.cols_)
        throw InternalError("matrix sum shape mismatch");
    Matrix r = *this;
    for (std::size_t k = 0; k < data_.size(); ++k)
        r.data_[k] += o.data_[k];
    return r;
}

Matrix Matrix::operator-(const Matrix& o) const
{
    if (rows_ != o.rows_ || cols_ != o.cols_)
        throw InternalError("matrix difference shape mismatch");
    Matrix r = *this;
    for (std::size_t k = 0; k < data_.size(); ++k)
        r.data_[k] -= o.data_[k];
    return r;
}

Matrix Matrix::scaled(const GR& c) const
{
    Matrix r = *this;
    for (auto& x : r.data_)
        x *= c;
    return r;
}

Matrix Matrix::transpose() const
{
    Matrix r(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
        for (std::size_t j = 0; j < cols_; ++j)
            r(j, i) = (*this)(i, j);
    return r;
}

Matrix Matrix::adjoint() const
{
    Matrix r(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
        for (std::size_t j = 0; j < cols_; ++j)
            r(j, i) = (*this)(i, j).conj();
    return r;
}

bool Matrix::is_zero() const
{
    for (const auto& x : data_)
        if (!x.is_zero())
            return false;
    return true;
}

Rref rref(const Matrix& m, std::size_t pivot_limit)
{
    Matrix a = m;
    const std::size_t rows = a.rows(), cols = a.cols();
    const std::size_t limit = std::min(cols, pivot_limit);
    std::vector<std::size_t> pivots;
    std::size_t r = 0;
    for (std::size_t c = 0; c < limit && r < rows; ++c) {
        std::size_t found = rows;
        for (std::size_t i = r; i < rows; ++i)
            if (!a(i, c).is_zero()) {
                found = i;
                break;
            }
        if (found == rows)
            continue;
        if (found != r)
            for (std::size_t j = 0; j < cols; ++j)
                std::swap(a(found, j), a(r, j));
        GR inv = a(r, c).inverse();
        for (std::size_t j = c; j < cols; ++j)
            if (!a(r, j).is_zero())
                a(r, j) *= inv;
        for (std::size_t i = 0; i < rows; ++i) {
            if (i == r || a(i, c).is_zero())
                continue;
            GR f = a(i, c);
            for (std::size_t j = c; j < cols; ++j)
                if (!a(r, j).is_zero())
                    a(i, j) -= f * a(r, j);
        }
        pivots.push_back(c);
        ++r;
    }
    Matrix reduced(r, cols);
    for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < cols; ++j)
            reduced(i, j) = a(i, j);
    return {std::move(reduced), std::move(pivots)};
}

Matrix Matrix::inverse() const
{
    if (rows_ != cols_)
        throw InternalError("inverse of a non-square matrix");
    const std::size_t n = rows_;
    Matrix aug(n, 2 * n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j)
            aug(i, j) = (*this)(i, j);
        aug(i, n + i) = GR(1);
    }
    Rref red = rref(aug, n);
    if (red.pivots.size() != n)
        throw MathError("singular matrix");
    Matrix inv(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            inv(i, j) = red.reduced(i, n + j);
    return inv;
}

GR Matrix::determinant() const
{
    if (rows_ != cols_)
        throw InternalError("determinant of a non-square matrix");
    Matrix a = *this;
    const std::size_t n = rows_;
    GR det(1);
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t r = c;
        while (r < n && a(r, c).is_zero())
            ++r;
        if (r == n)
            return GR();
        if (r != c) {
            for (std::size_t j = 0; j < n; ++j)
                std::swap(a(r, j), a(c, j));
            det = -det;
        }
        det *= a(c, c);
        GR inv = a(c, c).inverse();
        for (std::size_t i = c + 1; i < n; ++i) {
            if (a(i, c).is_zero())
                continue;
            GR f = a(i, c) * inv;
            for (std::size_t j = c; j < n; ++j)
                a(i, j) -= f * a(c, j);
        }
    }
    return det;
}

std::size_t Matrix::rank() const { return rref(*this).pivots.size(); }

nlohmann::json Matrix::to_json() const
{
    nlohmann::json rows = nlohmann::json::array();
    for (std::size_t i = 0; i < rows_; ++i) {
        nlohmann::json row = nlohmann::json::array();
        for (std::size_t j = 0; j < cols_; ++j)
            row.push_back((*this)(i, j).str());
        rows.push_back(row);
    }
    return rows;
}

Subspace Subspace::from_rows(const Matrix& rows)
{
    Subspace s(rows.cols());
    Rref red = rref(rows);
    s.basis_ = std::move(red.reduced);
    s.pivots_ = std::move(red.pivots);
    return s;
}

Subspace Subspace::span(std::size_t ambient, const std::vector<Vec>& vectors)
{
    return from_rows(Matrix::from_rows(vectors, ambient));
}

Subspace Subspace::full(std::size_t ambient) { return from_rows(Matrix::identity(ambient)); }

std::vector<Vec> Subspace::vectors() const
{
    std::vector<Vec> out;
    for (std::size_t i = 0; i < dim(); ++i)
        out.push_back(basis_.row(i));
    return out;
}

Vec Subspace::reduce(const Vec& v) const
{
    if (v.size() != ambient())
        throw InternalError("vector does not match subspace ambient");
    Vec r = v;
    for (std::size_t i = 0; i < dim(); ++i) {
        std::size_t p = pivots_[i];
        if (r[p].is_zero())
            continue;
        GR f = r[p];
        for (std::size_t j = p; j < ambient(); ++j)
            if (!basis_(i, j).is_zero())
                r[j] -= f * basis_(i, j);
    }
    return r;
}

bool Subspace::contains(const Vec& v) const { return is_zero(reduce(v)); }

bool Subspace::contains(const Subspace& other) const
{
    if (other.ambient() != ambient())
        throw InternalError("subspaces live in different ambients");
    for (std::size_t i = 0; i < other.dim(); ++i)
        if (!contains(other.basis_.row(i)))
            return false;
    return true;
}

Matrix Subspace::annihilator() const { return kernel(basis_).basis(); }

Vec Subspace::coordinates(const Vec& v) const
{
    if (!contains(v))
        throw InternalError("coordinates requested for a vector outside the subspace");
    Vec c(dim());
    for (std::size_t i = 0; i < dim(); ++i)
        c[i] = v[pivots_[i]];
    return c;
}

nlohmann::json Subspace::to_json() const { return {{"ambient", ambient()}, {"dim", dim()}, {"basis", basis_.to_json()}}; }

Subspace kernel(const Matrix& f)
{
    const std::size_t n = f.cols();
    Rref red = rref(f);
    std::vector<bool> is_pivot(n, false);
    for (auto p : red.pivots)
        is_pivot[p] = true;
    std::vector<Vec> vecs;
    for (std::size_t free = 0; free < n; ++free) {
        if (is_pivot[free])
            continue;
        Vec x(n);
        x[free] = GR(1);
        for (std::size_t i = 0; i < red.pivots.size(); ++i)
            x[red.pivots[i]] = -red.reduced(i, free);
        vecs.push_back(std::move(x));
    }
    return Subspace::span(n, vecs);
}

Subspace image(const Matrix& f) { return Subspace::from_rows(f.transpose()); }

Subspace image(const Matrix& f, const Subspace& domain)
{
    if (domain.ambient() != f.cols())
        throw InternalError("image: domain mismatch");
    std::vector<Vec> vecs;
    for (std::size_t i = 0; i < domain.dim(); ++i)
        vecs.push_back(f * domain.basis().row(i));
    return Subspace::span(f.rows(), vecs);
}

Subspace preimage(const Matrix& f, const Subspace& target)
{
    if (target.ambient() != f.rows())
        throw InternalError("preimage: codomain mismatch");
    Matrix ann = target.annihilator();
    if (ann.rows() == 0)
        return Subspace::full(f.cols());
    return kernel(ann * f);
}

Subspace sum(const Subspace& u, const Subspace& v)
{
    if (u.ambient() != v.ambient())
        throw InternalError("sum: ambient mismatch");
    std::vector<Vec> vecs = u.vectors();
    for (auto& x : v.vectors())
        vecs.push_back(std::move(x));
    return Subspace::span(u.ambient(), vecs);
}

Subspace intersect(const Subspace& u, const Subspace& v)
{
    if (u.ambient() != v.ambient())
        throw InternalError("intersect: ambient mismatch");
    Matrix a = u.annihilator(), b = v.annihilator();
    if (a.rows() + b.rows() == 0)
        return Subspace::full(u.ambient());
    std::vector<Vec> rows;
    for (std::size_t i = 0; i < a.rows(); ++i)
        rows.push_back(a.row(i));
    for (std::size_t i = 0; i < b.rows(); ++i)
        rows.push_back(b.row(i));
    return kernel(Matrix::from_rows(rows, u.ambient()));
}

std::size_t quotient_dim(const Subspace& u, const Subspace& v)
{
    if (!u.contains(v))
        throw MathError("quotient_dim: V is not contained in U");
    return u.dim() - v.dim();
}

SolveResult solve(const Matrix& f, const Vec& y)
{
    if (y.size() != f.rows())
        throw InternalError("solve: right-hand side size mismatch");
    const std::size_t m = f.rows(), n = f.cols();
    Matrix aug(m, n + 1 + m);
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < n; ++j)
            aug(i, j) = f(i, j);
        aug(i, n) = y[i];
        aug(i, n + 1 + i) = GR(1);
    }
    Rref red = rref(aug, n + 1);
    SolveResult res;
    res.homogeneous = kernel(f);
    for (std::size_t i = 0; i < red.pivots.size(); ++i)
        if (red.pivots[i] == n) {
            res.consistent = false;
            res.certificate = Vec(m);
            for (std::size_t k = 0; k < m; ++k)
                res.certificate[k] = red.reduced(i, n + 1 + k);
            return res;
        }
    res.consistent = true;
    res.particular = Vec(n);
    for (std::size_t i = 0; i < red.pivots.size(); ++i)
        res.particular[red.pivots[i]] = red.reduced(i, n);
    return res;
}

GR inner(const Vec& x, const Vec& y, const Matrix& gram)
{
    Vec gx = gram * x;
    GR s;
    for (std::size_t k = 0; k < y.size(); ++k)
        if (!y[k].is_zero() && !gx[k].is_zero())
            s += y[k].conj() * gx[k];
    return s;
}

Subspace orthogonal_complement(const Subspace& u, const Matrix& gram)
{
    const std::size_t n = u.ambient();
    if (gram.rows() != n || gram.cols() != n)
        throw InternalError("gram matrix does not match ambient");
    if (u.dim() == 0)
        return Subspace::full(n);
    Matrix rows = u.basis();
    for (std::size_t i = 0; i < rows.rows(); ++i)
        for (std::size_t j = 0; j < n; ++j)
            rows(i, j) = rows(i, j).conj();
    return kernel(rows * gram);
}

Matrix orthogonal_projector(const Subspace& u, const Matrix& gram)
{
    const std::size_t n = u.ambient();
    if (u.dim() == 0)
        return Matrix(n, n);
    Matrix b = u.basis().transpose();
    Matrix bh_g = b.adjoint() * gram;
    Matrix normal = bh_g * b;
    return b * normal.inverse() * bh_g;
}

std::vector<Vec> quotient_representatives(const Subspace& u, const Subspace& v, const Matrix* gram)
{
    Subspace common = intersect(u, v);
    if (gram) {
        Subspace w = intersect(u, orthogonal_complement(common, *gram));
        if (w.dim() + common.dim() != u.dim())
            throw InternalError("orthogonal complement inside U has the wrong dimension");
        return w.vectors();
    }
    std::vector<Vec> reps;
    Subspace cur = common;
    for (const auto& x : u.vectors())
        if (!cur.contains(x)) {
            reps.push_back(x);
            cur = sum(cur, Subspace::span(u.ambient(), {x}));
        }
    return reps;
}

bool is_hermitian(const Matrix& m) { return m.rows() == m.cols() && m == m.adjoint(); }

}  // namespace frol
