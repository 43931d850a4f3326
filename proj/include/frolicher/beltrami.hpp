#pragma once

#include "frolicher/complex.hpp"
#include "frolicher/exterior.hpp"

#include <json.hpp>

#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace frol {

// Σ c_{J,i} ω̄^J ⊗ e_i with J an antiholomorphic monomial key.
class VectorForm {
public:
    using Index = std::pair<Key, int>;  // (J, target generator 1..n)
    using Map = std::map<Index, Poly>;

    static VectorForm term(Key jbar, int target, const Poly& c = Poly(1));

    const Map& terms() const { return terms_; }
    bool is_zero() const { return terms_.empty(); }
    void add(Key jbar, int target, const Poly& c);
    Poly coefficient(Key jbar, int target) const;

    VectorForm& operator+=(const VectorForm& o);
    VectorForm& operator-=(const VectorForm& o);
    VectorForm& operator*=(const Poly& c);
    friend VectorForm operator+(VectorForm a, const VectorForm& b) { return a += b; }
    friend VectorForm operator-(VectorForm a, const VectorForm& b) { return a -= b; }
    friend VectorForm operator*(VectorForm a, const Poly& c) { return a *= c; }
    friend VectorForm operator*(const Poly& c, VectorForm a) { return a *= c; }
    friend bool operator==(const VectorForm& a, const VectorForm& b) { return a.terms_ == b.terms_; }
    friend bool operator!=(const VectorForm& a, const VectorForm& b) { return !(a == b); }

    // Antiholomorphic degree shared by all terms; -1 when mixed, 0 for zero.
    int q(const Exterior& ext) const;
    VectorForm specialize(const std::map<std::string, GR>& point) const;
    VectorForm homogeneous_part(int k, const std::set<int>& family) const;

    std::string str(const Exterior& ext) const;
    nlohmann::json to_json(const Exterior& ext) const;
    static VectorForm from_json(const Exterior& ext, const nlohmann::json& terms);

private:
    Map terms_;
};

// φ(t) = Σ_j φ_j, φ_j homogeneous of degree j in the declared parameters,
// optionally continued by φ_j = ratio^{j-m} φ_m for j ≥ m.
struct BeltramiSeries {
    struct Tail {
        Poly ratio;
        int from_order = 2;
    };

    std::string name;
    std::vector<std::string> parameters;
    std::vector<VectorForm> orders;  // orders[j-1] = φ_j
    std::optional<Tail> tail;

    static BeltramiSeries from_json(const Exterior& ext, const nlohmann::json& j);
    static BeltramiSeries from_file(const Exterior& ext, const std::string& path);
    static BeltramiSeries zero() { return {}; }
    nlohmann::json to_json(const Exterior& ext) const;

    VectorForm phi(int j) const;
    // Last order that can be nonzero (-1 for an infinite tail).
    int last_order() const;
    std::set<int> parameter_ids() const;
    // Messages for orders whose coefficients are not homogeneous of their order.
    std::vector<std::string> homogeneity_issues() const;
    // Σ_j φ_j(t0) with the tail summed in closed form; parameters missing
    // from the point are 0. Throws MathError when
    // the geometric ratio at t0 has modulus ≥ 1.
    VectorForm sum_at(const std::map<std::string, GR>& point) const;
    // Ratio of the tail at t0 (0 without a tail).
    GR ratio_at(const std::map<std::string, GR>& point) const;
};

// i_φ for φ with q = 1: an even derivation, i_φ(ω^k) = Σ_J φ_{J,k} ω̄^J.
Form contract(const Exterior& ext, const VectorForm& phi, const Form& alpha);
// L^{1,0}_φ = i_φ∂ − ∂i_φ.
Form lie10(const DoubleComplex& cx, const VectorForm& phi, const Form& alpha);
// e^{±i_φ}α = Σ_m (±i_φ)^m α / m!.
Form exp_contract(const Exterior& ext, const VectorForm& phi, const Form& alpha, int sign);
// d_φ = ∂ + ∂̄ − L^{1,0}_φ and ∂̄_φ = ∂̄ − L^{1,0}_φ.
Form d_phi(const DoubleComplex& cx, const VectorForm& phi, const Form& alpha);
Form dbar_phi(const DoubleComplex& cx, const VectorForm& phi, const Form& alpha);

// Order-N part of (e^{±i_φ} − 1)α for φ = Σ_j φ_j and α = Σ_k α_k, where
// parts[k] is the t-homogeneous order-k piece of α.
Form exp_series_order(const Exterior& ext, const BeltramiSeries& series, const std::vector<Form>& parts, int order,
                      int sign);
// Order-N part of L^{1,0}_φ α in the same graded sense.
Form lie_series_order(const DoubleComplex& cx, const BeltramiSeries& series, const std::vector<Form>& parts,
                      int order);

// ∂̄ on g^{1,0}-valued forms: ∂̄e_i = Σ_j ω̄^j ⊗ [ē_j, e_i]^{1,0}.
VectorForm dbar_vector(const Nilmanifold& m, const VectorForm& phi);
// Symmetric bracket on g^{1,0}-valued (0,1)-forms, extended bilinearly from
// [α⊗X, β⊗Y] = α∧β⊗[X,Y]^{1,0} + α∧(L_Xβ)^{0,1}⊗Y − (L_Yα)^{0,1}∧β⊗X.
VectorForm bracket(const Nilmanifold& m, const VectorForm& phi, const VectorForm& psi);

struct MaurerCartanReport {
    bool ok = true;
    int verified_order = 0;
    int first_failure = 0;  // 0 when none
    std::vector<std::string> residuals;  // nonzero ∂̄φ_k − ½Σ[φ_j,φ_{k−j}]
    nlohmann::json to_json() const;
};
MaurerCartanReport check_maurer_cartan(const Nilmanifold& m, const BeltramiSeries& series, int max_order);

struct IntegrabilityReport {
    bool ok = true;
    std::string failing_pair;  // "(a,b)" of frame vectors ē_a − φ(ē_a)
    std::string residual;
    nlohmann::json to_json() const;
};
// Involutivity of span{ē_b − Σ_k φ^k_b e_k} under the bracket of g_C.
IntegrabilityReport check_integrability(const Nilmanifold& m, const VectorForm& phi_at_t0);
IntegrabilityReport check_integrability_at(const Nilmanifold& m, const BeltramiSeries& series,
                                           const std::map<std::string, GR>& point);

// Constant sparse operator of L^{1,0}_φ for a specialized φ.
SparseOp lie10_operator(const DoubleComplex& cx, const VectorForm& phi);

}  // namespace frol
