#pragma once

#include "frolicher/scalar.hpp"

#include <json.hpp>

#include <map>
#include <set>
#include <string>
#include <vector>

namespace frol {

// Parameters are interned process-wide; the interning order is the declared
// parameter order used by the graded-lex term order.
int declare_parameter(const std::string& name);
int find_parameter(const std::string& name);  // -1 if unknown
const std::string& parameter_name(int id);

using Exponents = std::vector<int>;  // indexed by parameter id, no trailing zeros

int total_degree(const Exponents& e);
int degree_in(const Exponents& e, const std::set<int>& family);

// Leading (greatest) term first: higher total degree, then lexicographically
// larger exponent on the earliest declared parameter.
struct GrlexDescending {
    bool operator()(const Exponents& a, const Exponents& b) const;
};

class Poly {
public:
    using TermMap = std::map<Exponents, GR, GrlexDescending>;

    Poly() = default;
    Poly(const GR& c);
    Poly(long c) : Poly(GR(c)) {}
    static Poly variable(const std::string& name, int power = 1);
    static Poly monomial(const Exponents& e, const GR& c);

    const TermMap& terms() const { return terms_; }
    bool is_zero() const { return terms_.empty(); }
    bool is_constant() const;
    GR constant_term() const;
    std::set<int> variables() const;
    int total_degree() const;  // -1 for zero

    Poly& operator+=(const Poly& o);
    Poly& operator-=(const Poly& o);
    Poly& operator*=(const Poly& o);
    Poly& operator*=(const GR& c);
    friend Poly operator+(Poly a, const Poly& b) { return a += b; }
    friend Poly operator-(Poly a, const Poly& b) { return a -= b; }
    friend Poly operator*(const Poly& a, const Poly& b);
    friend Poly operator*(Poly a, const GR& c) { return a *= c; }
    friend Poly operator*(const GR& c, Poly a) { return a *= c; }
    Poly operator-() const;
    Poly pow(int k) const;
    friend bool operator==(const Poly& a, const Poly& b) { return a.terms_ == b.terms_; }
    friend bool operator!=(const Poly& a, const Poly& b) { return !(a == b); }

    // Substitutes the given parameters; the rest stay symbolic.
    Poly specialize(const std::map<std::string, GR>& point) const;
    Poly specialize_ids(const std::map<int, GR>& point) const;
    // Terms of total degree k in the parameters of `family`.
    Poly homogeneous_part(int k, const std::set<int>& family) const;
    Poly homogeneous_part(int k, const std::vector<std::string>& family) const;
    // Coefficient extraction: the part of the polynomial that is linear in
    // `var` divided by var (used for class symbols).
    Poly coefficient_of(int var) const;
    // Scaled so that the leading coefficient is 1.
    Poly monic() const;

    std::string str() const;
    static Poly parse(const std::string& text);

    nlohmann::json to_json() const;
    static Poly from_json(const nlohmann::json& j);

private:
    void add_term(const Exponents& e, const GR& c);
    TermMap terms_;
};

nlohmann::json gr_to_json(const GR& z);
GR gr_from_json(const nlohmann::json& j);

std::ostream& operator<<(std::ostream& os, const Poly& p);

}  // namespace frol
