#include "frolicher/complex.hpp"
#include "support.hpp"

#include <doctest.h>

#include <algorithm>
#include <fstream>
#include <sstream>

using namespace frol;
using namespace frol::testing;

namespace {

const char* kPresentations[] = {"iwasawa.json", "h15.json", "h15.txt", "torus1.json", "torus2.json", "torus3.json"};

Form mono(const Exterior& ext, const std::string& text)
{
    auto [k, s] = ext.parse_monomial(text);
    return Form::monomial(k, Poly(GR(s)));
}

// b_k = dim ker d_k − rank d_{k−1}, from the matrices on the degree-k basis.
std::vector<int> betti_oracle(const DoubleComplex& cx)
{
    int top = 2 * cx.ext.n();
    std::vector<std::size_t> rank(static_cast<std::size_t>(top) + 2, 0);
    for (int k = 0; k < top; ++k)
        rank[k] = cx.d.block(cx.ext.degree_keys(k + 1), cx.ext.degree_keys(k)).rank();
    std::vector<int> b;
    for (int k = 0; k <= top; ++k) {
        std::size_t dim = cx.ext.degree_keys(k).size();
        b.push_back(static_cast<int>(dim - rank[k] - (k > 0 ? rank[k - 1] : 0)));
    }
    return b;
}

}  // namespace

TEST_CASE("structural identities hold exhaustively")
{
    for (const char* name : kPresentations) {
        CAPTURE(name);
        Nilmanifold m = load(name);
        CHECK(m.complex().structural_failures().empty());
        const Exterior& ext = m.ext();
        const DoubleComplex& cx = m.complex();
        for (int p = 0; p <= m.n(); ++p)
            for (int q = 0; q <= m.n(); ++q) {
                const auto& src = ext.piece(p, q);
                if (p < m.n())
                    CHECK(cx.del.maps_into(src, ext.piece(p + 1, q)));
                if (q < m.n())
                    CHECK(cx.dbar.maps_into(src, ext.piece(p, q + 1)));
            }
        CHECK(cx.d.apply(Form::monomial(0)).is_zero());
    }
}

TEST_CASE("wedge products")
{
    Exterior ext(3);
    CHECK(wedge(mono(ext, "w[1]"), mono(ext, "w[2]")) == mono(ext, "w[1,2]"));
    CHECK(wedge(mono(ext, "w[-2]"), mono(ext, "w[-1]")) == -mono(ext, "w[-1,-2]"));
    CHECK(wedge(mono(ext, "w[1,2]"), mono(ext, "w[1,2]")).is_zero());
    CHECK(mono(ext, "w[2,1]") == -mono(ext, "w[1,2]"));
    CHECK(ext.parse_monomial("w[1,1]").second == 0);
    CHECK_THROWS_AS(ext.parse_monomial("w[4]"), SchemaError);

    std::mt19937 rng(31);
    for (int t = 0; t < 200; ++t) {
        int p1 = static_cast<int>(rng() % 4), q1 = static_cast<int>(rng() % 4);
        int p2 = static_cast<int>(rng() % 4), q2 = static_cast<int>(rng() % 4);
        Form a = random_piece_form(rng, ext, p1, q1), b = random_piece_form(rng, ext, p2, q2);
        Form c = random_form(rng, ext);
        Form ab = wedge(a, b), ba = wedge(b, a);
        CHECK(((p1 + q1) * (p2 + q2) % 2 == 0 ? ab == ba : ab == -ba));
        CHECK(wedge(wedge(a, b), c) == wedge(a, wedge(b, c)));
        if (p1 + p2 <= 3 && q1 + q2 <= 3)
            CHECK(ab.is_pure(ext, p1 + p2, q1 + q2));
    }
}

TEST_CASE("differentials on the examples")
{
    Nilmanifold iw = load("iwasawa.json");
    const Exterior& e3 = iw.ext();
    CHECK(iw.complex().dbar.apply(mono(e3, "w[-3]")) == -mono(e3, "w[-1,-2]"));
    CHECK(iw.complex().del.apply(mono(e3, "w[3]")) == -mono(e3, "w[1,2]"));
    CHECK(iw.complex().d.apply(mono(e3, "w[1]")).is_zero());

    Nilmanifold h = load("h15.json");
    const Exterior& ext = h.ext();
    CHECK(h.complex().dbar.apply(mono(ext, "w[2,-3]")) == mono(ext, "w[1,-1,-3]") - mono(ext, "w[2,-1,-2]"));
    CHECK(h.complex().d.apply(mono(ext, "w[3]")) ==
          mono(ext, "w[1,2]") + Poly(3) * mono(ext, "w[1,-2]") + mono(ext, "w[2,-1]"));
    // d ω̄^k is the conjugate of d ω^k.
    for (int k = 1; k <= 3; ++k) {
        Form dk = h.complex().d.apply(Form::monomial(ext.hol_generator(k)));
        CHECK(h.complex().d.apply(Form::monomial(ext.anti_generator(k))) == conjugate(ext, dk));
    }
}

TEST_CASE("Leibniz rule and bidegree splitting on random forms")
{
    for (const char* name : {"iwasawa.json", "h15.json"}) {
        CAPTURE(name);
        Nilmanifold m = load(name);
        const Exterior& ext = m.ext();
        const DoubleComplex& cx = m.complex();
        std::mt19937 rng(37);
        for (int t = 0; t < 100; ++t) {
            int p = static_cast<int>(rng() % 4), q = static_cast<int>(rng() % 4);
            Form a = random_piece_form(rng, ext, p, q), b = random_form(rng, ext);
            Form sign = (p + q) % 2 ? -wedge(a, cx.d.apply(b)) : wedge(a, cx.d.apply(b));
            CHECK(cx.d.apply(wedge(a, b)) == wedge(cx.d.apply(a), b) + sign);
            Form da = cx.d.apply(a);
            if (p < 3)
                CHECK(da.component(ext, p + 1, q) == cx.del.apply(a));
            if (q < 3)
                CHECK(da.component(ext, p, q + 1) == cx.dbar.apply(a));
            CHECK(da == cx.del.apply(a) + cx.dbar.apply(a));
        }
    }
}

TEST_CASE("Betti numbers")
{
    CHECK(load("torus1.json").betti_numbers() == std::vector<int>{1, 2, 1});
    CHECK(load("torus2.json").betti_numbers() == std::vector<int>{1, 4, 6, 4, 1});
    CHECK(load("torus3.json").betti_numbers() == std::vector<int>{1, 6, 15, 20, 15, 6, 1});
    // Frozen from the rank oracle below.
    CHECK(load("iwasawa.json").betti_numbers() == std::vector<int>{1, 4, 8, 10, 8, 4, 1});
    CHECK(load("h15.json").betti_numbers() == std::vector<int>{1, 3, 5, 6, 5, 3, 1});
    for (const char* name : kPresentations) {
        CAPTURE(name);
        Nilmanifold m = load(name);
        auto b = m.betti_numbers();
        CHECK(b == betti_oracle(m.complex()));
        CHECK(std::equal(b.begin(), b.end(), b.rbegin()));
        int euler = 0;
        for (std::size_t k = 0; k < b.size(); ++k)
            euler += k % 2 ? -b[k] : b[k];
        CHECK(euler == 0);
    }
}

TEST_CASE("validation")
{
    ValidationReport iw = validate(load("iwasawa.json").presentation());
    CHECK(iw.ok);
    CHECK(iw.default_metric);
    CHECK(std::find(iw.brackets.begin(), iw.brackets.end(), "[e[1],e[2]] = e[3]") != iw.brackets.end());

    // The four brackets listed for h15; the only other nonzero one is the
    // conjugate of [e1,e2].
    ValidationReport h = validate(load("h15.json").presentation());
    CHECK(h.ok);
    std::vector<std::string> listed{"[e[1],e[-1]] = -e[2] + e[-2]", "[e[1],e[2]] = -e[3]",
                                    "[e[1],e[-2]] = -3*e[3] + e[-3]", "[e[2],e[-1]] = -e[3] + 3*e[-3]"};
    for (const auto& b : listed)
        CHECK(std::find(h.brackets.begin(), h.brackets.end(), b) != h.brackets.end());
    CHECK(h.brackets.size() == 5);
    CHECK(std::find(h.brackets.begin(), h.brackets.end(), "[e[-1],e[-2]] = -e[-3]") != h.brackets.end());

    ValidationReport bad = validate(Presentation::from_text("d w2 = w[-1,-2]\nd w3 = w[1,2]"));
    CHECK_FALSE(bad.ok);
    CHECK(std::any_of(bad.issues.begin(), bad.issues.end(), [](const auto& i) { return i.kind == "integrability"; }));
    CHECK_THROWS_AS(Nilmanifold(Presentation::from_text("d w2 = w[-1,-2]\nd w3 = w[1,2]")), MathError);

    ValidationReport jac = validate(Presentation::from_text("d w2 = w[1,-1]\nd w3 = w[2,-2]"));
    CHECK_FALSE(jac.ok);
    CHECK_FALSE(jac.issues.empty());
    CHECK(std::all_of(jac.issues.begin(), jac.issues.end(), [](const auto& i) { return i.kind == "jacobi"; }));

    Presentation skew = load("h15.json").presentation();
    Matrix g = Matrix::identity(3);
    g(0, 1) = GR(1);
    skew.metric = g;
    ValidationReport met = validate(skew);
    CHECK_FALSE(met.ok);
    CHECK(met.issues.at(0).kind == "metric");
    CHECK_FALSE(met.default_metric);
    g(1, 0) = GR(1);
    g(1, 1) = GR(1);  // Hermitian with a vanishing minor
    skew.metric = g;
    CHECK_FALSE(validate(skew).ok);
    g(1, 1) = GR(2);
    skew.metric = g;
    CHECK(validate(skew).ok);
}

TEST_CASE("presentation parsing")
{
    Presentation txt = Presentation::from_file(data_path("h15.txt"));
    Presentation js = Presentation::from_file(data_path("h15.json"));
    CHECK(txt.n == js.n);
    CHECK(txt.structure == js.structure);
    CHECK(Presentation::from_json(js.to_json()).structure == js.structure);
    CHECK(Presentation::from_text("d w2 = w[1,-1]\nd w3 = w[1,2] + 3*w[1,-2] + w[2,-1]").structure == js.structure);

    CHECK_THROWS_AS(Presentation::from_text("d w2 = w[1,1,2"), SchemaError);
    CHECK_THROWS_AS(Presentation::from_text("d w2 = w[1]"), SchemaError);
    CHECK_THROWS_AS(Presentation::from_json(nlohmann::json{{"n", 3}, {"structure", 5}}), SchemaError);
    CHECK_THROWS_AS(Presentation::from_file(data_path("missing.json")), SchemaError);

    // A (0,2) term is accepted syntactically and rejected by validation.
    nlohmann::json j = nlohmann::json::parse(std::ifstream(data_path("iwasawa.json")));
    j["structure"][0]["terms"].push_back({{"coeff", "1"}, {"kind", "02"}, {"i", 1}, {"j", 2}});
    Presentation p = Presentation::from_json(j);
    CHECK(validate(p).issues.at(0).kind == "integrability");
}

TEST_CASE("structure constants and the Jacobi identity")
{
    for (const char* name : {"iwasawa.json", "h15.json"}) {
        Nilmanifold m = load(name);
        int dim = 2 * m.n();
        std::mt19937 rng(41);
        auto vec = [&] {
            Vec v(static_cast<std::size_t>(dim));
            for (auto& x : v)
                x = random_scalar(rng);
            return v;
        };
        for (int t = 0; t < 30; ++t) {
            Vec x = vec(), y = vec(), z = vec();
            CHECK(m.bracket(x, y) == GR(-1) * m.bracket(y, x));
            Vec jac = m.bracket(x, m.bracket(y, z)) + m.bracket(y, m.bracket(z, x)) + m.bracket(z, m.bracket(x, y));
            CHECK(is_zero(jac));
        }
    }
}
