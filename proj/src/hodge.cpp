#include "frolicher/hodge.hpp"

#include "frolicher/errors.hpp"

namespace frol {

HodgePackage::HodgePackage(const DoubleComplex& cx) : cx_(cx) {}

LaplacePackage HodgePackage::build(std::vector<Key> prev, std::vector<Key> basis, std::vector<Key> next,
                                   const SparseOp& op) const
{
    LaplacePackage L;
    L.prev = std::move(prev);
    L.basis = std::move(basis);
    L.next = std::move(next);
    L.gram = cx_.gram(L.basis);
    Matrix g_prev = cx_.gram(L.prev), g_next = cx_.gram(L.next);
    const std::size_t n = L.basis.size();

    if (!op.maps_into(L.prev, L.basis) || !op.maps_into(L.basis, L.next))
        throw InternalError("operator leaves its graded piece");
    L.d_in = op.block(L.basis, L.prev);
    L.d_out = op.block(L.next, L.basis);
    Matrix ginv = n ? L.gram.inverse() : Matrix();
    L.d_in_star = L.prev.empty() ? Matrix(0, n) : g_prev.inverse() * L.d_in.adjoint() * L.gram;
    L.d_out_star = L.next.empty() || n == 0 ? Matrix(n, L.next.size()) : ginv * L.d_out.adjoint() * g_next;

    L.laplacian = Matrix(n, n);
    if (!L.prev.empty())
        L.laplacian = L.laplacian + L.d_in * L.d_in_star;
    if (!L.next.empty())
        L.laplacian = L.laplacian + L.d_out_star * L.d_out;
    L.harmonic_space = kernel(L.laplacian);
    L.harmonic = orthogonal_projector(L.harmonic_space, L.gram);
    if (n) {
        Matrix one = Matrix::identity(n);
        L.green = (L.laplacian + L.harmonic).inverse() * (one - L.harmonic);
    } else {
        L.green = Matrix(0, 0);
    }
    return L;
}

const LaplacePackage& HodgePackage::dolbeault(int p, int q) const
{
    auto it = dolbeault_.find({p, q});
    if (it != dolbeault_.end())
        return it->second;
    const Exterior& ext = cx_.ext;
    const int n = ext.n();
    if (p < 0 || q < 0 || p > n || q > n)
        throw InternalError("bidegree out of range");
    std::vector<Key> prev = q > 0 ? ext.piece(p, q - 1) : std::vector<Key>{};
    std::vector<Key> next = q < n ? ext.piece(p, q + 1) : std::vector<Key>{};
    return dolbeault_.emplace(std::pair{p, q}, build(prev, ext.piece(p, q), next, cx_.dbar)).first->second;
}

const LaplacePackage& HodgePackage::filtered(int p, int k) const
{
    auto it = filtered_.find({p, k});
    if (it != filtered_.end())
        return it->second;
    const Exterior& ext = cx_.ext;
    std::vector<Key> prev = k > 0 ? ext.window(p, k - 1) : std::vector<Key>{};
    std::vector<Key> next = k < 2 * ext.n() ? ext.window(p, k + 1) : std::vector<Key>{};
    return filtered_.emplace(std::pair{p, k}, build(prev, ext.window(p, k), next, cx_.d)).first->second;
}

template <class Pick>
Form HodgePackage::per_piece(const Form& y, Pick pick) const
{
    const Exterior& ext = cx_.ext;
    Form out;
    for (int p = 0; p <= ext.n(); ++p)
        for (int q = 0; q <= ext.n(); ++q) {
            Form part = y.component(ext, p, q);
            if (part.is_zero())
                continue;
            auto [m, dom, cod] = pick(p, q);
            if (m && !cod->empty())
                out += apply_matrix(*m, *dom, *cod, part);
        }
    return out;
}

namespace {

struct Choice {
    const Matrix* m;
    const std::vector<Key>* dom;
    const std::vector<Key>* cod;
};

}  // namespace

Form HodgePackage::dbar_star(const Form& y) const
{
    return per_piece(y, [&](int p, int q) {
        if (q == 0)
            return Choice{nullptr, nullptr, nullptr};
        const auto& L = dolbeault(p, q);
        return Choice{&L.d_in_star, &L.basis, &L.prev};
    });
}

Form HodgePackage::green(const Form& y) const
{
    return per_piece(y, [&](int p, int q) {
        const auto& L = dolbeault(p, q);
        return Choice{&L.green, &L.basis, &L.basis};
    });
}

Form HodgePackage::harmonic(const Form& y) const
{
    return per_piece(y, [&](int p, int q) {
        const auto& L = dolbeault(p, q);
        return Choice{&L.harmonic, &L.basis, &L.basis};
    });
}

Form HodgePackage::dbar_star_green(const Form& y) const { return dbar_star(green(y)); }

Form HodgePackage::d_star_green_filtered(const Form& y, int p) const
{
    const Exterior& ext = cx_.ext;
    if (y.filtration(ext, p) != y)
        throw MathError("form does not lie in F^" + std::to_string(p));
    Form out;
    for (int k = 1; k <= 2 * ext.n(); ++k) {
        Form part = y.degree_part(ext, k);
        if (part.is_zero())
            continue;
        const auto& L = filtered(p, k);
        out += apply_matrix(L.d_in_star * L.green, L.basis, L.prev, part);
    }
    return out;
}

Form HodgePackage::canonical_d_solve(const Form& y, int p) const
{
    const Exterior& ext = cx_.ext;
    if (!y.degree_part(ext, 0).is_zero())
        throw MathError("a function is never d-exact unless zero");
    Form x = d_star_green_filtered(y, p);
    if (cx_.d.apply(x) != y) {
        Form cert;
        for (int k = 1; k <= 2 * ext.n(); ++k) {
            Form part = y.degree_part(ext, k);
            if (!part.is_zero()) {
                const auto& L = filtered(p, k);
                cert += apply_matrix(L.harmonic, L.basis, L.basis, part);
            }
        }
        std::string why = cert.is_zero() ? "not d-closed" : "harmonic component " + cert.str(ext);
        throw MathError("form is not d-exact within F^" + std::to_string(p) + ": " + why);
    }
    return x;
}

HodgePackage::FilteredDecomposition HodgePackage::decompose_filtered(const Form& x, int p) const
{
    const Exterior& ext = cx_.ext;
    if (x.filtration(ext, p) != x)
        throw MathError("form does not lie in F^" + std::to_string(p));
    FilteredDecomposition out;
    for (int k = 0; k <= 2 * ext.n(); ++k) {
        Form part = x.degree_part(ext, k);
        if (part.is_zero())
            continue;
        const auto& L = filtered(p, k);
        out.harmonic += apply_matrix(L.harmonic, L.basis, L.basis, part);
        Form g = apply_matrix(L.green, L.basis, L.basis, part);
        if (!L.prev.empty()) {
            Form s = apply_matrix(L.d_in_star, L.basis, L.prev, g);
            out.exact += apply_matrix(L.d_in, L.prev, L.basis, s);
        }
        if (!L.next.empty()) {
            Form s = apply_matrix(L.d_out, L.basis, L.next, g);
            out.coexact += apply_matrix(L.d_out_star, L.next, L.basis, s);
        }
    }
    return out;
}

std::vector<Form> HodgePackage::harmonic_basis(int p, int q) const
{
    const auto& L = dolbeault(p, q);
    std::vector<Form> out;
    for (const auto& v : L.harmonic_space.vectors())
        out.push_back(Form::from_vec(v, L.basis));
    return out;
}

GR HodgePackage::inner(const Form& x, const Form& y) const
{
    std::vector<Key> basis;
    for (Key k = 0; k < cx_.ext.size(); ++k)
        basis.push_back(k);
    if (!x.is_constant() || !y.is_constant())
        throw InternalError("inner product of parameter-dependent forms");
    return frol::inner(x.to_vec(basis), y.to_vec(basis), cx_.gram(basis));
}

}  // namespace frol
