#pragma once

#include "frolicher/exterior.hpp"
#include "frolicher/linalg.hpp"

#include <json.hpp>

#include <optional>
#include <string>
#include <vector>

namespace frol {

// Structure equations dω^k of an invariant complex structure on a nilmanifold.
// Loading only checks syntax; mathematical validity is the job of validate().
struct Presentation {
    std::string name;
    int n = 0;
    std::vector<Form> structure;  // structure[k-1] = dω^k, constant 2-forms
    std::optional<Matrix> metric;  // Hermitian matrix of ⟨ω^i, ω^j⟩; identity when absent

    static Presentation from_json(const nlohmann::json& j);
    // Lines "d w3 = -w[1,2] + 3*w[1,-2] + w[2,-1]"; '#' starts a comment;
    // an optional "n = 3" line fixes the dimension (else the largest index).
    static Presentation from_text(const std::string& text);
    // Dispatches on content: JSON objects or the text syntax.
    static Presentation from_file(const std::string& path);
    nlohmann::json to_json() const;
};

struct ValidationReport {
    struct Issue {
        std::string kind;  // "jacobi", "integrability", "metric"
        std::string message;
    };
    bool ok = true;
    std::vector<Issue> issues;
    std::vector<std::string> brackets;  // nonzero [x,y], "[e[1],e[2]] = e[3]" style
    bool default_metric = true;

    nlohmann::json to_json() const;
};

ValidationReport validate(const Presentation& pres);

// A double complex (A^{•,•}, ∂, ∂̄) on the monomial basis of an exterior
// algebra, with the Hermitian metric used for adjoints.
struct DoubleComplex {
    Exterior ext{1};
    SparseOp del, dbar, d;
    Matrix metric;  // n×n
    std::string label;
    std::vector<std::string> notes;
    bool deformed = false;

    // ⟨ω^Iω̄^J, ω^Kω̄^L⟩ = det H[I,K] · det H̄[J,L].
    Matrix gram(const std::vector<Key>& basis) const;
    // Exhaustive check of d² = ∂² = ∂̄² = ∂∂̄+∂̄∂ = 0; returns failing identity names.
    std::vector<std::string> structural_failures() const;
};

// The central fiber: a validated presentation with its frame and operators.
class Nilmanifold {
public:
    // Throws MathError if validate() fails.
    explicit Nilmanifold(Presentation pres);

    const Presentation& presentation() const { return pres_; }
    const Exterior& ext() const { return complex_.ext; }
    int n() const { return pres_.n; }
    const DoubleComplex& complex() const { return complex_; }

    // dθ^b for frame covectors b = 0..2n-1 (ω^1..ω^n, ω̄^1..ω̄^n).
    const Form& frame_differential(int b) const { return frame_d_[b]; }
    // [x_a, x_b] = Σ_c c(a,b,c) x_c on the frame e_1..e_n, ē_1..ē_n.
    GR structure_constant(int a, int b, int c) const;
    // Frame vector as a coefficient vector of length 2n.
    Vec bracket(const Vec& x, const Vec& y) const;

    std::vector<int> betti_numbers() const;

private:
    Presentation pres_;
    DoubleComplex complex_;
    std::vector<Form> frame_d_;
    std::vector<GR> c_;  // (a*2n + b)*2n + c
};

// Exterior derivative of every monomial from the differentials of the frame
// covectors (any constant 2-forms). Used for central and test complexes.
SparseOp derivation_from_generators(const Exterior& ext, const std::vector<Form>& frame_d);

// dω̄^k as the conjugate of dω^k (constant forms only).
Form conjugate(const Exterior& ext, const Form& f);

// Renders frame vectors e_1..e_n, ē_1..ē_n as e[1].., e[-1]...
std::string frame_name(int n, int b);

}  // namespace frol
