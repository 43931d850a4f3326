#include "frolicher/hodge.hpp"
#include "frolicher/linalg.hpp"
#include "support.hpp"

#include <doctest.h>

#include <algorithm>

using namespace frol;
using namespace frol::testing;

namespace {

Matrix random_matrix(std::mt19937& rng, std::size_t rows, std::size_t cols, int rank_cap)
{
    // Product of thin factors caps the rank.
    Matrix a(rows, static_cast<std::size_t>(rank_cap)), b(static_cast<std::size_t>(rank_cap), cols);
    for (std::size_t i = 0; i < rows; ++i)
        for (int j = 0; j < rank_cap; ++j)
            a(i, j) = random_scalar(rng);
    for (int i = 0; i < rank_cap; ++i)
        for (std::size_t j = 0; j < cols; ++j)
            b(i, j) = random_scalar(rng);
    return a * b;
}

std::vector<Vec> random_vectors(std::mt19937& rng, std::size_t n, std::size_t count)
{
    std::vector<Vec> out(count, Vec(n));
    for (auto& v : out)
        for (auto& x : v)
            x = random_scalar(rng);
    return out;
}

}  // namespace

TEST_CASE("kernel of dbar on A^{0,1} of the Iwasawa manifold")
{
    Nilmanifold m = load("iwasawa.json");
    const Exterior& ext = m.ext();
    Subspace k = kernel(m.complex().dbar.block(ext.piece(0, 2), ext.piece(0, 1)));
    CHECK(k.dim() == 2);
    std::vector<Vec> want{Form::monomial(ext.anti_generator(1)).to_vec(ext.piece(0, 1)),
                          Form::monomial(ext.anti_generator(2)).to_vec(ext.piece(0, 1))};
    CHECK(k == Subspace::span(3, want));
}

TEST_CASE("filtered preimage realizes Z_r")
{
    // Z_r = F^pA^k ∩ d^{-1}F^{p+r}A^{k+1}, checked against a coordinate cut.
    Nilmanifold m = load("iwasawa.json");
    const Exterior& ext = m.ext();
    const DoubleComplex& cx = m.complex();
    for (int k = 0; k <= 5; ++k) {
        auto src = ext.degree_keys(k), dst = ext.degree_keys(k + 1);
        Matrix d = cx.d.block(dst, src);
        for (int p = 0; p <= 3; ++p)
            for (int r = 1; r <= 3; ++r) {
                auto window = [&](int lo, const std::vector<Key>& keys) {
                    std::vector<Vec> vs;
                    for (std::size_t i = 0; i < keys.size(); ++i)
                        if (ext.p(keys[i]) >= lo) {
                            Vec e(keys.size());
                            e[i] = GR(1);
                            vs.push_back(e);
                        }
                    return Subspace::span(keys.size(), vs);
                };
                Subspace z = intersect(window(p, src), preimage(d, window(p + r, dst)));
                // Brute force: x ∈ F^p with every component of dx below p+r zero.
                Subspace fp = window(p, src);
                std::vector<std::size_t> low;
                for (std::size_t i = 0; i < dst.size(); ++i)
                    if (ext.p(dst[i]) < p + r)
                        low.push_back(i);
                Matrix cut(low.size(), src.size());
                for (std::size_t i = 0; i < low.size(); ++i)
                    for (std::size_t j = 0; j < src.size(); ++j)
                        cut(i, j) = d(low[i], j);
                CHECK(z == intersect(fp, kernel(cut)));
            }
    }
}

TEST_CASE("subspace calculus on random data")
{
    std::mt19937 rng(17);
    for (int t = 0; t < 40; ++t) {
        std::size_t n = 3 + t % 5;
        Matrix f = random_matrix(rng, n, n + 1, 1 + t % 3);
        Subspace k = kernel(f), im = image(f);
        CHECK(k.dim() + im.dim() == f.cols());
        CHECK(im.dim() == f.rank());
        for (const auto& v : k.vectors())
            CHECK(is_zero(f * v));

        Subspace u = Subspace::span(n, random_vectors(rng, n, 1 + t % 3));
        Subspace v = Subspace::span(n, random_vectors(rng, n, 1 + (t / 2) % 3));
        CHECK(intersect(u, u) == u);
        CHECK(quotient_dim(u, u) == 0);
        CHECK(sum(u, v).dim() + intersect(u, v).dim() == u.dim() + v.dim());
        CHECK(sum(u, v).contains(u));
        CHECK(u.contains(intersect(u, v)));
        CHECK_THROWS_AS(quotient_dim(Subspace(n), Subspace::full(n)), MathError);

        // preimage(f, W) = {x : f x ∈ W}.
        Subspace w = Subspace::span(n, random_vectors(rng, n, 1));
        Subspace pre = preimage(f, w);
        for (const auto& x : pre.vectors())
            CHECK(w.contains(f * x));
        CHECK(pre.contains(k));
        CHECK(pre.dim() == k.dim() + intersect(im, w).dim());

        // RREF is canonical: shuffled and rescaled spanning sets agree.
        auto vs = u.vectors();
        std::reverse(vs.begin(), vs.end());
        for (auto& x : vs)
            x = GR(mpq_class(-3, 2), 1) * x;
        if (vs.size() > 1)
            vs.push_back(vs[0] + vs[1]);
        CHECK(Subspace::span(n, vs) == u);
        for (std::size_t i = 0; i < u.dim(); ++i)
            CHECK(u.coordinates(u.vectors()[i]) == Matrix::identity(u.dim()).row(i));
    }
}

TEST_CASE("solve returns particular solutions or a certificate")
{
    std::mt19937 rng(23);
    for (int t = 0; t < 30; ++t) {
        Matrix f = random_matrix(rng, 5, 4, 2);
        Vec x = random_vectors(rng, 4, 1)[0];
        SolveResult ok = solve(f, f * x);
        CHECK(ok.consistent);
        CHECK(f * ok.particular == f * x);
        CHECK(ok.homogeneous == kernel(f));
        Vec y = random_vectors(rng, 5, 1)[0];
        SolveResult s = solve(f, y);
        if (!s.consistent) {
            Vec wf(4);
            for (std::size_t j = 0; j < 4; ++j)
                for (std::size_t i = 0; i < 5; ++i)
                    wf[j] += s.certificate[i] * f(i, j);
            CHECK(is_zero(wf));
            GR wy;
            for (std::size_t i = 0; i < 5; ++i)
                wy += s.certificate[i] * y[i];
            CHECK(wy == GR(1));
        }
    }
}

TEST_CASE("orthogonal complements")
{
    Nilmanifold m = load("h15.json");
    const Exterior& ext = m.ext();
    const DoubleComplex& cx = m.complex();
    const auto& piece = ext.piece(1, 2);
    Matrix g = cx.gram(piece);
    Subspace ker = kernel(cx.dbar.block(ext.piece(1, 3), piece));
    Subspace perp = orthogonal_complement(ker, g);
    auto v = [&](const char* a) {
        auto [k, s] = ext.parse_monomial(a);
        return Form::monomial(k, Poly(GR(s)));
    };
    Form b = v("w[2,-2,-3]") - Poly(3) * v("w[3,-1,-3]");
    CHECK(perp == Subspace::span(piece.size(), {v("w[3,-2,-3]").to_vec(piece), b.to_vec(piece)}));

    CHECK(orthogonal_complement(Subspace(4), Matrix::identity(4)) == Subspace::full(4));
    std::mt19937 rng(29);
    for (int t = 0; t < 30; ++t) {
        std::size_t n = 2 + t % 6;
        // A random positive-definite Hermitian gram: B^H B + 1.
        Matrix bm = random_matrix(rng, n, n, static_cast<int>(n));
        Matrix gram = bm.adjoint() * bm + Matrix::identity(n);
        CHECK(is_hermitian(gram));
        Subspace u = Subspace::span(n, random_vectors(rng, n, 1 + t % 3));
        Subspace w = orthogonal_complement(u, gram);
        CHECK(u.dim() + w.dim() == n);
        CHECK(sum(u, w) == Subspace::full(n));
        for (const auto& a : u.vectors())
            for (const auto& c : w.vectors())
                CHECK(inner(a, c, gram).is_zero());
        Matrix p = orthogonal_projector(u, gram);
        CHECK(p * p == p);
        for (const auto& a : u.vectors())
            CHECK(p * a == a);
        for (const auto& c : w.vectors())
            CHECK(is_zero(p * c));
    }
}

TEST_CASE("matrix basics")
{
    Matrix a = Matrix::from_rows({{GR(1), GR(2)}, {GR(3), GR(4)}}, 2);
    CHECK(a.determinant() == GR(-2));
    CHECK(a * a.inverse() == Matrix::identity(2));
    CHECK(a.transpose()(0, 1) == GR(3));
    Matrix s = Matrix::from_rows({{GR(1), GR(2)}, {GR(2), GR(4)}}, 2);
    CHECK(s.rank() == 1);
    CHECK_THROWS_AS(s.inverse(), MathError);
    Matrix c(1, 1);
    c(0, 0) = GR::i();
    CHECK(c.adjoint()(0, 0) == GR(0) - GR::i());
    CHECK(Matrix::from_cols({{GR(1), GR(0)}}, 2) == Matrix::from_rows({{GR(1)}, {GR(0)}}, 1));
}
