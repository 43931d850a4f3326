#include "support.hpp"

#include <doctest.h>

using namespace frol;
using namespace frol::testing;

namespace {

Form w(const Exterior& ext, const std::string& mono, const std::string& coeff = "1")
{
    auto [k, s] = ext.parse_monomial(mono);
    return Form::monomial(k, Poly::parse(coeff) * GR(s));
}

VectorForm vf(const Exterior& ext, int jbar, int e, const std::string& coeff = "1")
{
    return VectorForm::term(ext.anti_generator(jbar), e, Poly::parse(coeff));
}

VectorForm vf2(const Exterior& ext, int a, int b, int e, const std::string& coeff = "1")
{
    int s = wedge_sign(ext.anti_generator(a), ext.anti_generator(b));
    return VectorForm::term(ext.anti_generator(a) | ext.anti_generator(b), e, Poly::parse(coeff) * GR(s));
}

}  // namespace

TEST_CASE("contraction on generators and products")
{
    Exterior ext(3);
    VectorForm phi = vf(ext, 1, 2);
    CHECK(contract(ext, phi, w(ext, "w[2]")) == w(ext, "w[-1]"));
    CHECK(contract(ext, phi, w(ext, "w[2,-3]")) == w(ext, "w[-1,-3]"));
    CHECK(contract(ext, phi, w(ext, "w[-1,-2]")).is_zero());
}

TEST_CASE("contraction is an even derivation")
{
    Exterior ext(3);
    std::mt19937 rng(11);
    for (int trial = 0; trial < 200; ++trial) {
        VectorForm phi = random_beltrami(rng, ext);
        Form a = random_form(rng, ext, 3), b = random_form(rng, ext, 3);
        CHECK(contract(ext, phi, wedge(a, b)) == wedge(contract(ext, phi, a), b) + wedge(a, contract(ext, phi, b)));
    }
}

TEST_CASE("contraction is nilpotent past the holomorphic degree")
{
    Exterior ext(3);
    std::mt19937 rng(12);
    for (int trial = 0; trial < 50; ++trial) {
        VectorForm phi = random_beltrami(rng, ext, 6);
        Form a = random_form(rng, ext, 8);
        for (int m = 0; m <= ext.n(); ++m)
            a = contract(ext, phi, a);
        CHECK(a.is_zero());
    }
}

TEST_CASE("exponentials of contraction are mutually inverse")
{
    Exterior ext(3);
    std::mt19937 rng(13);
    VectorForm zero;
    for (int trial = 0; trial < 50; ++trial) {
        VectorForm phi = random_beltrami(rng, ext);
        Form a = random_form(rng, ext);
        CHECK(exp_contract(ext, phi, exp_contract(ext, phi, a, -1), +1) == a);
        CHECK(exp_contract(ext, zero, a, +1) == a);
    }
}

TEST_CASE("h15 Lie derivative table")
{
    Nilmanifold m = load("h15.json");
    const Exterior& ext = m.ext();
    const DoubleComplex& cx = m.complex();
    BeltramiSeries s = load_family(m, "h15-family.json");
    VectorForm phi1 = s.phi(1), phi2 = s.phi(2);
    std::string A = "(3*t2^2 + 9*t2*t3 + 3*t3^2)";

    CHECK(lie10(cx, phi1, w(ext, "w[1]")).is_zero());
    CHECK(lie10(cx, phi1, w(ext, "w[-1]")).is_zero());
    CHECK(lie10(cx, phi1, w(ext, "w[-2]")).is_zero());
    CHECK(lie10(cx, phi1, w(ext, "w[2]")) == w(ext, "w[1,-1]", "t2"));
    CHECK(lie10(cx, phi1, w(ext, "w[-3]")) == w(ext, "w[-1,-2]", "3*t2+t3"));
    CHECK(lie10(cx, phi1, w(ext, "w[3]")) ==
          w(ext, "w[1,-1]", "t1") + w(ext, "w[1,-2]", "3*t3+2*t2") + w(ext, "w[2,-1]", "10*t3+3*t2"));
    CHECK(lie10(cx, phi1, w(ext, "w[1,2]")).is_zero());
    CHECK(lie10(cx, phi1, w(ext, "w[1,-2]")).is_zero());
    CHECK(lie10(cx, phi1, w(ext, "w[1,-3]")) == w(ext, "w[1,-1,-2]", "-3*t2-t3"));
    CHECK(lie10(cx, phi1, w(ext, "w[2,-2]")) == w(ext, "w[1,-1,-2]", "t2"));
    CHECK(lie10(cx, phi1, w(ext, "w[3,-1]")) == w(ext, "w[1,-1,-2]", "-3*t3-2*t2"));
    CHECK(lie10(cx, phi1, w(ext, "w[1,2,-2]")).is_zero());
    CHECK(lie10(cx, phi1, w(ext, "w[1,3,-1]")).is_zero());
    CHECK(lie10(cx, phi1, w(ext, "w[1,2,-3]")) == w(ext, "w[1,2,-1,-2]", "3*t2+t3"));
    CHECK(lie10(cx, phi1, w(ext, "w[2,3,-1]")) == w(ext, "w[1,2,-1,-2]", "-3*t3-2*t2"));
    CHECK(lie10(cx, phi1, w(ext, "w[1,3,-2]")) == w(ext, "w[1,2,-1,-2]", "-10*t3-3*t2"));
    CHECK(lie10(cx, phi1, w(ext, "w[1,-2,-3]")).is_zero());
    CHECK(lie10(cx, phi1, w(ext, "w[2,-1,-3]")).is_zero());
    CHECK(lie10(cx, phi1, w(ext, "w[3,-1,-3]")) == w(ext, "w[1,-1,-2,-3]", "-3*t3-2*t2"));
    CHECK(lie10(cx, phi1, w(ext, "w[2,-2,-3]")) == w(ext, "w[1,-1,-2,-3]", "t2"));

    CHECK(lie10(cx, phi2, w(ext, "w[1]")).is_zero());
    CHECK(lie10(cx, phi2, w(ext, "w[2]")).is_zero());
    CHECK(lie10(cx, phi2, w(ext, "w[3]")) == w(ext, "w[2,-1]", "3*" + A) + w(ext, "w[1,-2]", A));
    for (const char* mono : {"w[-1]", "w[-2]", "w[-3]", "w[1,-2]", "w[1,-3]", "w[2,-2]"})
        CHECK(lie10(cx, phi2, w(ext, mono)).is_zero());
    CHECK(lie10(cx, phi2, w(ext, "w[3,-1]")) == w(ext, "w[1,-1,-2]", "-" + A));
}

TEST_CASE("h15 bracket table")
{
    Nilmanifold m = load("h15.json");
    const Exterior& ext = m.ext();
    VectorForm x12 = vf(ext, 1, 2), x11 = vf(ext, 1, 1), x22 = vf(ext, 2, 2), x33 = vf(ext, 3, 3);
    VectorForm X = x33 + x22, Y = vf(ext, 3, 3, "3") - x11;
    VectorForm target = vf2(ext, 1, 2, 3);

    CHECK(bracket(m, x12, x12).is_zero());
    CHECK(bracket(m, x33, x33).is_zero());
    CHECK(bracket(m, x12, X).is_zero());
    CHECK(bracket(m, x22, x11) == target * Poly(-1));
    CHECK(bracket(m, x12, Y).is_zero());
    CHECK(bracket(m, x22, x22).is_zero());
    CHECK(bracket(m, X, X) == target * Poly(6));
    CHECK(bracket(m, x33, x11) == target * Poly(-1));
    CHECK(bracket(m, Y, Y) == target * Poly(6));
    // The printed value for [X, Y] is 9, which bilinearity together with the
    // other entries rules out: [X,X] = 6 forces [x22,x33] = 3, hence 11.
    CHECK(bracket(m, X, Y) == target * Poly(11));
}

TEST_CASE("bracket is symmetric")
{
    Nilmanifold m = load("h15.json");
    std::mt19937 rng(21);
    for (int trial = 0; trial < 100; ++trial) {
        VectorForm a = random_beltrami(rng, m.ext()), b = random_beltrami(rng, m.ext());
        CHECK(bracket(m, a, b) == bracket(m, b, a));
    }
}

TEST_CASE("head of the printed h15 family")
{
    Nilmanifold m = load("h15.json");
    BeltramiSeries s = load_family(m, "h15-family.json");
    VectorForm phi1 = s.phi(1);
    VectorForm expected = VectorForm::term(m.ext().anti_generator(1) | m.ext().anti_generator(2), 3,
                                           Poly::parse("6*t2^2 + 22*t2*t3 + 6*t3^2"));
    // Printed: 18 t2t3, i.e. twice the inconsistent table value 9.
    CHECK(bracket(m, phi1, phi1) == expected);
    CHECK(s.homogeneity_issues().empty());
    CHECK(s.last_order() == -1);
    // ∂̄φ_1 ≠ 0 for this φ_1: the printed family is not Maurer-Cartan.
    auto rep = check_maurer_cartan(m, s, 5);
    CHECK_FALSE(rep.ok);
    CHECK(rep.first_failure == 1);
}

TEST_CASE("bundled families satisfy Maurer-Cartan to order 10")
{
    for (auto [man, fam] : {std::pair{"h15.json", "h15-family-corrected.json"},
                            std::pair{"iwasawa.json", "iwasawa-kuranishi.json"}}) {
        Nilmanifold m = load(man);
        BeltramiSeries s = load_family(m, fam);
        auto rep = check_maurer_cartan(m, s, 10);
        INFO(fam);
        CHECK(rep.ok);
        CHECK(rep.verified_order == 10);
    }
}

TEST_CASE("Maurer-Cartan agrees with involutivity for constant Beltrami differentials")
{
    std::mt19937 rng(31);
    for (const char* man : {"h15.json", "iwasawa.json"}) {
        Nilmanifold m = load(man);
        int agree = 0, integrable = 0;
        for (int trial = 0; trial < 60; ++trial) {
            VectorForm phi = random_beltrami(rng, m.ext(), 1 + trial % 3);
            BeltramiSeries s;
            s.orders.push_back(phi);
            // A constant φ is its own first order; MC reads ∂̄φ = ½[φ,φ].
            bool mc = dbar_vector(m, phi) == bracket(m, phi, phi) * Poly(GR(mpq_class(1, 2)));
            bool inv = check_integrability(m, phi).ok;
            agree += mc == inv;
            integrable += inv;
        }
        INFO(man);
        CHECK(agree == 60);
        CHECK(integrable > 0);
    }
}

TEST_CASE("integrability at sampled points")
{
    Nilmanifold iw = load("iwasawa.json");
    BeltramiSeries k = load_family(iw, "iwasawa-kuranishi.json");
    std::map<std::string, GR> t0{{"t11", GR(mpq_class(1, 7))}};
    CHECK(check_integrability_at(iw, k, t0).ok);
    std::map<std::string, GR> t1{{"t11", GR(mpq_class(1, 7))}, {"t22", GR(mpq_class(2, 5))}, {"t12", GR(1)}};
    CHECK(check_integrability_at(iw, k, t1).ok);

    Nilmanifold h = load("h15.json");
    BeltramiSeries c = load_family(h, "h15-family-corrected.json");
    std::map<std::string, GR> s0{{"t1", GR(0)}, {"t2", GR(mpq_class(1, 7))}, {"t3", GR(0)}};
    CHECK(check_integrability_at(h, c, s0).ok);
    BeltramiSeries p = load_family(h, "h15-family.json");
    CHECK_FALSE(check_integrability_at(h, p, s0).ok);

    std::map<std::string, GR> far{{"t1", GR(0)}, {"t2", GR(1)}, {"t3", GR(0)}};
    CHECK_THROWS_AS(c.sum_at(far), MathError);
}

TEST_CASE("deformed differential agrees with conjugated d order by order")
{
    for (auto [man, fam] : {std::pair{"h15.json", "h15-family-corrected.json"},
                            std::pair{"iwasawa.json", "iwasawa-kuranishi.json"}}) {
        Nilmanifold m = load(man);
        const DoubleComplex& cx = m.complex();
        BeltramiSeries s = load_family(m, fam);
        const int N = 4;
        for (Key k = 0; k < cx.ext.size(); ++k) {
            // Order-N part of e^{-iφ} d e^{iφ} ω^K against −(L_φ ω^K)_N.
            std::vector<Form> a(N + 1);
            a[0] = Form::monomial(k);
            for (int j = 1; j <= N; ++j)
                a[j] = exp_series_order(cx.ext, s, {a[0]}, j, +1);
            std::vector<Form> da(N + 1);
            for (int j = 0; j <= N; ++j)
                da[j] = cx.d.apply(a[j]);
            for (int order = 1; order <= N; ++order) {
                Form lhs = da[order] + exp_series_order(cx.ext, s, da, order, -1);
                Form rhs = -lie_series_order(cx, s, {a[0]}, order);
                if (lhs != rhs) {
                    INFO(fam, " key ", k, " order ", order);
                    CHECK(lhs == rhs);
                }
            }
        }
    }
}

TEST_CASE("vector form JSON round trip")
{
    Nilmanifold m = load("h15.json");
    BeltramiSeries s = load_family(m, "h15-family.json");
    BeltramiSeries r = BeltramiSeries::from_json(m.ext(), s.to_json(m.ext()));
    CHECK(r.phi(1) == s.phi(1));
    CHECK(r.phi(4) == s.phi(4));
    CHECK_THROWS_AS(BeltramiSeries::from_json(m.ext(), nlohmann::json::parse(R"({"orders": 3})")), SchemaError);
}
