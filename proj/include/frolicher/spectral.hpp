#pragma once

#include "frolicher/beltrami.hpp"
#include "frolicher/complex.hpp"
#include "frolicher/linalg.hpp"

#include <json.hpp>

#include <array>
#include <map>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

namespace frol {

// One cell E_r^{p,q} in the pure-type description: Z̃_r, B̃_r ⊆ A^{p,q}.
struct CfugCell {
    int p = 0, q = 0, r = 0;
    std::vector<Key> basis;            // A^{p,q}
    Subspace z, b;                     // Z̃_r, B̃_r in basis coordinates
    std::size_t dim = 0;
    std::vector<Vec> reps;             // representatives of Z̃_r/B̃_r
    std::vector<Form> extensions;      // α^{p,q} + … + α^{p+r-1,q-r+1} per representative
    int target_p = 0, target_q = 0;    // (p+r, q-r+1)
    Matrix dr;                         // columns: reps; rows: target reps
    std::size_t dr_rank = 0;
};

// The same cell computed literally from Z_r = F^p ∩ d^{-1}F^{p+r}.
struct GenericCell {
    int p = 0, q = 0, r = 0;
    std::size_t dim = 0;
    std::size_t dr_rank = 0;
};

class SpectralSequence {
public:
    explicit SpectralSequence(DoubleComplex cx);

    const DoubleComplex& complex() const { return cx_; }
    int n() const { return cx_.ext.n(); }
    bool valid(int p, int q) const { return p >= 0 && q >= 0 && p <= n() && q <= n(); }
    // Page from which the cell is stable: max(n, p+q) + 1.
    int stable_page(int p, int q) const;
    // A page at which every cell has stabilized.
    int final_page() const { return 2 * n() + 1; }

    const Subspace& z_tilde(int p, int q, int r) const;
    const Subspace& b_tilde(int p, int q, int r) const;
    const Subspace& z_tilde_infinity(int p, int q) const { return z_tilde(p, q, final_page()); }
    const Subspace& b_tilde_infinity(int p, int q) const { return b_tilde(p, q, final_page()); }

    const CfugCell& cfug(int p, int q, int r) const;
    GenericCell generic(int p, int q, int r) const;
    std::size_t einf(int p, int q) const { return cfug(p, q, stable_page(p, q)).dim; }

    // Some extension α^{p,q} + … + α^{p+r-1,q-r+1} of α^{p,q} ∈ Z̃_r (MathError if none).
    Form extend(const Form& alpha, int p, int q, int r) const;
    // Solutions of the truncated system in ⊕_{i<r}A^{p+i,q-i} (ker d_{Π_r}).
    struct System {
        std::vector<Key> cols, rows;
        Matrix m;
        Subspace kernel;
    };
    const System& extension_system(int p, int q, int r) const;

    // Gram matrix on A^{p,q}.
    const Matrix& gram(int p, int q) const;

private:
    // Subspaces of A^k in degree_keys(k) coordinates.
    Subspace filtration(int p, int k) const;
    Subspace generic_z(int p, int k, int r) const;
    Subspace generic_b(int p, int k, int r) const;
    Subspace generic_denominator(int p, int k, int r) const;
    const Matrix& d_block(int k) const;  // d: A^k → A^{k+1}

    DoubleComplex cx_;
    mutable std::map<std::tuple<int, int, int>, Subspace> z_, b_;
    mutable std::map<std::tuple<int, int, int>, System> systems_;
    mutable std::map<std::tuple<int, int, int>, CfugCell> cells_;
    mutable std::map<std::pair<int, int>, Matrix> grams_;
    mutable std::map<int, Matrix> d_blocks_;
};

std::vector<int> betti_numbers(const DoubleComplex& cx);

struct DegenerationReport {
    int n = 0;
    int r_max = 0;
    std::string label;
    std::vector<std::string> notes;
    std::map<std::pair<int, int>, std::vector<std::size_t>> dims;  // E_1..E_{r_max}
    std::map<std::pair<int, int>, std::size_t> einf;
    std::map<std::pair<int, int>, int> stable_from;  // least r with Z̃_r = Z̃_∞
    std::vector<std::array<int, 3>> d_nonzero;       // (r, p, q), all r
    int degenerates_at = 1;                          // least r with E_r = E_∞ everywhere
    std::vector<int> betti;
    std::vector<std::size_t> einf_totals;
    bool einf_matches_betti = false;

    bool dr_vanishes(int r, int p, int q) const;
    nlohmann::json to_json() const;
};

// Runs both routes (hard failure on disagreement) to r_max and to the
// stabilization bound, and compares E_∞ with de Rham cohomology.
DegenerationReport degeneration_report(const SpectralSequence& ss, int r_max);

struct ConditionVerdict {
    std::string condition;
    bool holds = false;
    std::vector<std::string> certificates;
    nlohmann::json to_json() const;
};

// d_r^{p,q} = 0 for every listed (r, p, q).
ConditionVerdict check_drs_vanish(const SpectralSequence& ss, const std::vector<std::array<int, 3>>& cells);
// d_r^{p-i,q+i} = 0 for all i ≥ 0, r ≥ 1, decided by Z̃_1 = Z̃_∞ on each (p-i,q+i).
ConditionVerdict check_thm35_hypothesis(const SpectralSequence& ss, int p, int q);
// F^{p+1}A^{p+q+1} ∩ dA^{p+q} = dF^{p+1}A^{p+q}.
ConditionVerdict check_strictness(const SpectralSequence& ss, int p, int q);
// Π_{∞,r}^{p,ker} surjective, decided directly and via Z̃_{r-i} = Z̃_∞ on (p+i,q-i).
ConditionVerdict check_pi_surjectivity(const SpectralSequence& ss, int p, int q, int r);

// (A^{•,•}, ∂, ∂̄_{φ(t0)}) for the summed Beltrami differential at t0.
// Throws MathError for non-integrable t0, divergent tails or d_φ² ≠ 0.
DoubleComplex deformed_complex(const Nilmanifold& m, const BeltramiSeries& series,
                               const std::map<std::string, GR>& t0);

// Paper-style listing "reps; B̃ basis" of Z̃_r^{p,q}.
std::string render_cell(const SpectralSequence& ss, int p, int q, int r);

}  // namespace frol
