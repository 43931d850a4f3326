#pragma once

#include "frolicher/complex.hpp"
#include "frolicher/exterior.hpp"
#include "frolicher/linalg.hpp"

#include <map>
#include <utility>
#include <vector>

namespace frol {

// Finite-dimensional Hodge theory of a three-term complex
// prev --d_in--> basis --d_out--> next.
struct LaplacePackage {
    std::vector<Key> prev, basis, next;
    Matrix gram;
    Matrix d_in, d_in_star;    // prev → basis, basis → prev
    Matrix d_out, d_out_star;  // basis → next, next → basis
    Matrix laplacian;          // d_in d_in* + d_out* d_out
    Matrix harmonic;           // orthogonal projector onto ker laplacian
    Matrix green;              // (laplacian + harmonic)^{-1}(1 − harmonic)
    Subspace harmonic_space;
};

// Exact Laplacian machinery over a double complex. Operators are constant
// matrices and act on parameter-dependent forms one t-monomial at a time.
class HodgePackage {
public:
    explicit HodgePackage(const DoubleComplex& cx);

    const DoubleComplex& complex() const { return cx_; }

    // ∂̄-theory on A^{p,q}: d_in = ∂̄ from A^{p,q-1}, d_out = ∂̄ to A^{p,q+1}.
    const LaplacePackage& dolbeault(int p, int q) const;
    // Filtered theory on F^pA^k with d and d*_p = Π^{≥p}d*.
    const LaplacePackage& filtered(int p, int k) const;

    // Bidegree-wise ∂̄*, G_∂̄ and ℋ on arbitrary forms.
    Form dbar_star(const Form& y) const;
    Form green(const Form& y) const;
    Form harmonic(const Form& y) const;
    // ∂̄*G_∂̄ y, the minimal-norm solution of ∂̄x = y when y ∈ im ∂̄.
    Form dbar_star_green(const Form& y) const;

    // x = d*_pG_p y for y ∈ d(F^pA^{k-1}); throws MathError otherwise.
    Form canonical_d_solve(const Form& y, int p) const;
    // Raw d*_p G_p y without the exactness check.
    Form d_star_green_filtered(const Form& y, int p) const;

    struct FilteredDecomposition {
        Form harmonic, exact, coexact;
    };
    // x ∈ F^pA^k splits as ℋ_p x + d d*_p G_p x + d*_p d G_p x.
    FilteredDecomposition decompose_filtered(const Form& x, int p) const;

    // Canonical RREF basis of ℋ^{p,q} as forms.
    std::vector<Form> harmonic_basis(int p, int q) const;

    // ⟨x, y⟩ for constant forms.
    GR inner(const Form& x, const Form& y) const;

private:
    LaplacePackage build(std::vector<Key> prev, std::vector<Key> basis, std::vector<Key> next,
                         const SparseOp& op) const;
    // Applies a per-piece matrix to every bidegree component of a form.
    template <class Pick>
    Form per_piece(const Form& y, Pick pick) const;

    DoubleComplex cx_;
    mutable std::map<std::pair<int, int>, LaplacePackage> dolbeault_, filtered_;
};

}  // namespace frol
