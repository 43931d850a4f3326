#pragma once

#include "frolicher/linalg.hpp"
#include "frolicher/poly.hpp"

#include <json.hpp>

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace frol {

// Monomial ω^I ∧ ω̄^J encoded as the bitmask I | (J << n). Bit positions
// double as frame indices: 0..n-1 are e_1..e_n, n..2n-1 are ē_1..ē_n, and
// the canonical monomial ordering is ascending bit order.
using Key = std::uint32_t;

constexpr int kMaxDimension = 6;

// Sign of the product of two monomials (0 when they share a factor).
int wedge_sign(Key a, Key b);

class Exterior {
public:
    explicit Exterior(int n);

    int n() const { return n_; }
    std::size_t size() const { return std::size_t{1} << (2 * n_); }
    Key make(unsigned hol, unsigned anti) const { return hol | (anti << n_); }
    unsigned hol(Key k) const { return k & ((1u << n_) - 1); }
    unsigned anti(Key k) const { return k >> n_; }
    int p(Key k) const;
    int q(Key k) const;
    int degree(Key k) const { return p(k) + q(k); }
    Key hol_generator(int i) const { return Key{1} << (i - 1); }    // ω^i, i = 1..n
    Key anti_generator(int i) const { return Key{1} << (n_ + i - 1); }  // ω̄^i

    // Basis of A^{p,q}, ordered lexicographically on I then on J.
    const std::vector<Key>& piece(int p, int q) const;
    // Position of a key inside its own piece.
    std::size_t index_in_piece(Key k) const { return index_[k]; }
    // F^pA^k = ⊕_{λ≥p} A^{λ,k-λ}, pieces in ascending λ.
    std::vector<Key> window(int p, int k) const;
    std::vector<Key> degree_keys(int k) const { return window(0, k); }

    // conj(ω^Iω̄^J) = (-1)^{|I||J|} ω^Jω̄^I.
    Key conj_key(Key k, int& sign) const;

    // "w[1,2,-3]" for ω^{12}∧ω̄^3; "1" for the unit.
    std::string render(Key k) const;
    // Accepts "w[...]" (any index order) or "1" and returns the canonical key
    // with the reordering sign; a repeated index gives sign 0. Throws SchemaError.
    std::pair<Key, int> parse_monomial(const std::string& text) const;
    // Compact label used for class symbols: I digits followed by J digits.
    std::string digits(Key k) const;

private:
    int n_;
    std::vector<std::vector<std::vector<Key>>> pieces_;
    std::vector<std::size_t> index_;
};

// Invariant form with polynomial coefficients on the monomial basis.
class Form {
public:
    using Map = std::map<Key, Poly>;

    Form() = default;
    static Form monomial(Key k, const Poly& c = Poly(1));

    const Map& terms() const { return terms_; }
    bool is_zero() const { return terms_.empty(); }
    Poly coefficient(Key k) const;
    void add(Key k, const Poly& c);

    Form& operator+=(const Form& o);
    Form& operator-=(const Form& o);
    Form& operator*=(const Poly& c);
    friend Form operator+(Form a, const Form& b) { return a += b; }
    friend Form operator-(Form a, const Form& b) { return a -= b; }
    friend Form operator*(Form a, const Poly& c) { return a *= c; }
    friend Form operator*(const Poly& c, Form a) { return a *= c; }
    Form operator-() const;
    friend bool operator==(const Form& a, const Form& b) { return a.terms_ == b.terms_; }
    friend bool operator!=(const Form& a, const Form& b) { return !(a == b); }

    Form component(const Exterior& ext, int p, int q) const;
    Form filtration(const Exterior& ext, int p) const;  // λ ≥ p
    Form degree_part(const Exterior& ext, int k) const;
    // Every term has the given bidegree.
    bool is_pure(const Exterior& ext, int p, int q) const;

    Form specialize(const std::map<std::string, GR>& point) const;
    Form homogeneous_part(int k, const std::set<int>& family) const;
    bool is_constant() const;
    std::set<int> variables() const;

    // Coefficient vectors on `basis`, one per parameter monomial.
    // Throws InternalError if a term lies outside the basis.
    std::map<Exponents, Vec> expand(const std::vector<Key>& basis) const;
    static Form assemble(const std::map<Exponents, Vec>& parts, const std::vector<Key>& basis);
    // Constant forms only.
    Vec to_vec(const std::vector<Key>& basis) const;
    static Form from_vec(const Vec& v, const std::vector<Key>& basis);

    std::string str(const Exterior& ext) const;
    nlohmann::json to_json(const Exterior& ext) const;
    static Form from_json(const Exterior& ext, const nlohmann::json& j);

private:
    Map terms_;
};

Form wedge(const Form& a, const Form& b);

// Linear operator on the full exterior algebra with constant coefficients,
// stored column-wise (image of each basis monomial).
class SparseOp {
public:
    using Column = std::vector<std::pair<Key, GR>>;

    SparseOp() = default;
    explicit SparseOp(std::size_t dim) : cols_(dim) {}

    std::size_t dim() const { return cols_.size(); }
    const Column& image(Key src) const { return cols_[src]; }
    void add(Key src, Key dst, const GR& c);
    void set_image(Key src, Column col);

    Form apply(const Form& f) const;
    Vec apply_vec(const Vec& v, const std::vector<Key>& domain, const std::vector<Key>& codomain) const;
    // Matrix with rows indexed by `rows` and columns by `cols`; entries that
    // land outside `rows` are dropped.
    Matrix block(const std::vector<Key>& rows, const std::vector<Key>& cols) const;
    // True when no column of `cols` has a component outside `rows`.
    bool maps_into(const std::vector<Key>& cols, const std::vector<Key>& rows) const;

    SparseOp operator+(const SparseOp& o) const;
    SparseOp operator-(const SparseOp& o) const;
    SparseOp operator*(const SparseOp& o) const;  // composition: (*this) after o
    SparseOp scaled(const GR& c) const;
    bool is_zero() const;

private:
    std::vector<Column> cols_;
};

// Applies a constant matrix acting from `domain` to `codomain` Poly-linearly.
Form apply_matrix(const Matrix& m, const std::vector<Key>& domain, const std::vector<Key>& codomain, const Form& f);

}  // namespace frol
