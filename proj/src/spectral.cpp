#include "frolicher/spectral.hpp"

#include "frolicher/errors.hpp"

#include <algorithm>

namespace frol {

namespace {

std::vector<Key> concat(const Exterior& ext, const std::vector<std::pair<int, int>>& bidegrees)
{
    std::vector<Key> out;
    for (auto [p, q] : bidegrees)
        if (p >= 0 && q >= 0 && p <= ext.n() && q <= ext.n()) {
            const auto& piece = ext.piece(p, q);
            out.insert(out.end(), piece.begin(), piece.end());
        }
    return out;
}

// Restricts vectors on `from` coordinates to the `to` coordinates (which must be a subset).
Vec restrict(const Vec& v, const std::vector<Key>& from, const std::vector<Key>& to)
{
    std::map<Key, std::size_t> pos;
    for (std::size_t i = 0; i < from.size(); ++i)
        pos[from[i]] = i;
    Vec out(to.size());
    for (std::size_t i = 0; i < to.size(); ++i)
        out[i] = v[pos.at(to[i])];
    return out;
}

std::string point_str(const std::map<std::string, GR>& t0)
{
    std::string s;
    for (const auto& [k, v] : t0)
        s += (s.empty() ? "" : ",") + k + "=" + v.str();
    return s;
}

}  // namespace

SpectralSequence::SpectralSequence(DoubleComplex cx) : cx_(std::move(cx)) {}

int SpectralSequence::stable_page(int p, int q) const { return std::max(n(), p + q) + 1; }

const Matrix& SpectralSequence::gram(int p, int q) const
{
    auto it = grams_.find({p, q});
    if (it == grams_.end())
        it = grams_.emplace(std::pair{p, q}, cx_.gram(cx_.ext.piece(p, q))).first;
    return it->second;
}

const SpectralSequence::System& SpectralSequence::extension_system(int p, int q, int r) const
{
    auto key = std::tuple{p, q, r};
    auto it = systems_.find(key);
    if (it != systems_.end())
        return it->second;
    std::vector<std::pair<int, int>> cols, rows;
    for (int i = 0; i < r; ++i) {
        cols.emplace_back(p + i, q - i);
        rows.emplace_back(p + i, q + 1 - i);
    }
    System s;
    s.cols = concat(cx_.ext, cols);
    s.rows = concat(cx_.ext, rows);
    s.m = cx_.d.block(s.rows, s.cols);
    s.kernel = s.rows.empty() ? Subspace::full(s.cols.size()) : kernel(s.m);
    return systems_.emplace(key, std::move(s)).first->second;
}

const Subspace& SpectralSequence::z_tilde(int p, int q, int r) const
{
    auto key = std::tuple{p, q, r};
    auto it = z_.find(key);
    if (it != z_.end())
        return it->second;
    if (r < 1 || !valid(p, q))
        throw InternalError("Z̃ index out of range");
    const System& s = extension_system(p, q, r);
    const auto& piece = cx_.ext.piece(p, q);
    std::vector<Vec> first;
    for (const auto& v : s.kernel.vectors())
        first.emplace_back(v.begin(), v.begin() + static_cast<long>(piece.size()));
    return z_.emplace(key, Subspace::span(piece.size(), first)).first->second;
}

const Subspace& SpectralSequence::b_tilde(int p, int q, int r) const
{
    auto key = std::tuple{p, q, r};
    auto it = b_.find(key);
    if (it != b_.end())
        return it->second;
    if (r < 1 || !valid(p, q))
        throw InternalError("B̃ index out of range");
    std::vector<std::pair<int, int>> cols, rows;
    for (int i = 0; i < r; ++i)
        cols.emplace_back(p - i, q - 1 + i);
    for (int i = 1; i < r; ++i)
        rows.emplace_back(p - i, q + i);
    const Exterior& ext = cx_.ext;
    std::vector<Key> c = concat(ext, cols), rs = concat(ext, rows);
    const auto& piece = ext.piece(p, q);
    Subspace out(piece.size());
    if (!c.empty()) {
        Subspace k = rs.empty() ? Subspace::full(c.size()) : kernel(cx_.d.block(rs, c));
        out = image(cx_.d.block(piece, c), k);
    }
    return b_.emplace(key, std::move(out)).first->second;
}

Form SpectralSequence::extend(const Form& alpha, int p, int q, int r) const
{
    const System& s = extension_system(p, q, r);
    const auto& piece = cx_.ext.piece(p, q);
    Vec a = alpha.to_vec(piece);
    std::vector<Key> rest(s.cols.begin() + static_cast<long>(piece.size()), s.cols.end());
    if (s.rows.empty())
        return alpha;
    Vec rhs = cx_.d.block(s.rows, piece) * a;
    for (auto& x : rhs)
        x = -x;
    if (rest.empty()) {
        if (!is_zero(rhs))
            throw MathError("form does not lie in Z̃_" + std::to_string(r));
        return alpha;
    }
    SolveResult sol = solve(cx_.d.block(s.rows, rest), rhs);
    if (!sol.consistent)
        throw MathError("form does not lie in Z̃_" + std::to_string(r));
    return alpha + Form::from_vec(sol.particular, rest);
}

const CfugCell& SpectralSequence::cfug(int p, int q, int r) const
{
    auto key = std::tuple{p, q, r};
    auto it = cells_.find(key);
    if (it != cells_.end())
        return it->second;
    const Exterior& ext = cx_.ext;
    CfugCell c;
    c.p = p;
    c.q = q;
    c.r = r;
    c.basis = ext.piece(p, q);
    c.z = z_tilde(p, q, r);
    c.b = b_tilde(p, q, r);
    if (!c.z.contains(c.b))
        throw InternalError("B̃_r ⊄ Z̃_r at (" + std::to_string(p) + "," + std::to_string(q) + ")");
    c.dim = c.z.dim() - c.b.dim();
    c.reps = quotient_representatives(c.z, c.b, &gram(p, q));
    for (const auto& v : c.reps)
        c.extensions.push_back(extend(Form::from_vec(v, c.basis), p, q, r));
    c.target_p = p + r;
    c.target_q = q - r + 1;
    if (!valid(c.target_p, c.target_q) || c.reps.empty()) {
        c.dr = Matrix(0, c.reps.size());
        return cells_.emplace(key, std::move(c)).first->second;
    }
    const CfugCell& t = cfug(c.target_p, c.target_q, r);
    const auto& tb = t.basis;
    std::vector<Vec> cols = t.reps;
    for (const auto& v : t.b.vectors())
        cols.push_back(v);
    Matrix coords = Matrix::from_cols(cols, tb.size());
    c.dr = Matrix(t.reps.size(), c.reps.size());
    for (std::size_t j = 0; j < c.reps.size(); ++j) {
        Vec y = cx_.d.apply(c.extensions[j]).component(ext, c.target_p, c.target_q).to_vec(tb);
        if (!t.z.contains(y))
            throw InternalError("d_r image is not E_r-closed");
        SolveResult sol = solve(coords, y);
        if (!sol.consistent)
            throw InternalError("d_r image outside Z̃_r");
        for (std::size_t i = 0; i < t.reps.size(); ++i)
            c.dr(i, j) = sol.particular[i];
    }
    // Ambiguity: extensions of zero must map into B̃_r of the target.
    const System& s = extension_system(p, q, r);
    std::vector<Key> rest(s.cols.begin() + static_cast<long>(c.basis.size()), s.cols.end());
    if (!rest.empty()) {
        Subspace amb = s.rows.empty() ? Subspace::full(rest.size()) : kernel(cx_.d.block(s.rows, rest));
        Matrix to_target = cx_.d.block(tb, rest);
        for (const auto& v : amb.vectors())
            if (!t.b.contains(to_target * v))
                throw InternalError("d_r is not well defined on E_r");
    }
    c.dr_rank = c.dr.rank();
    return cells_.emplace(key, std::move(c)).first->second;
}

const Matrix& SpectralSequence::d_block(int k) const
{
    auto it = d_blocks_.find(k);
    if (it == d_blocks_.end()) {
        const Exterior& ext = cx_.ext;
        std::vector<Key> next = k < 2 * n() ? ext.degree_keys(k + 1) : std::vector<Key>{};
        it = d_blocks_.emplace(k, cx_.d.block(next, ext.degree_keys(k))).first;
    }
    return it->second;
}

Subspace SpectralSequence::filtration(int p, int k) const
{
    const auto keys = cx_.ext.degree_keys(k);
    std::vector<Vec> units;
    for (std::size_t i = 0; i < keys.size(); ++i)
        if (cx_.ext.p(keys[i]) >= p) {
            Vec e(keys.size());
            e[i] = GR(1);
            units.push_back(std::move(e));
        }
    return Subspace::span(keys.size(), units);
}

Subspace SpectralSequence::generic_z(int p, int k, int r) const
{
    Subspace fp = filtration(p, k);
    if (k >= 2 * n())
        return fp;
    return intersect(fp, preimage(d_block(k), filtration(p + r, k + 1)));
}

Subspace SpectralSequence::generic_b(int p, int k, int r) const
{
    if (k == 0)
        return Subspace(1);
    Subspace src = filtration(std::max(p - r, 0), k - 1);
    return intersect(filtration(p, k), image(d_block(k - 1), src));
}

Subspace SpectralSequence::generic_denominator(int p, int k, int r) const
{
    return sum(generic_z(p + 1, k, r - 1), generic_b(p, k, r - 1));
}

GenericCell SpectralSequence::generic(int p, int q, int r) const
{
    GenericCell g;
    g.p = p;
    g.q = q;
    g.r = r;
    const int k = p + q;
    Subspace z = generic_z(p, k, r), den = generic_denominator(p, k, r);
    if (!z.contains(den))
        throw InternalError("generic page denominator not inside Z_r");
    g.dim = z.dim() - den.dim();
    if (k < 2 * n()) {
        Subspace im = image(d_block(k), z);
        Subspace den_t = generic_denominator(p + r, k + 1, r);
        g.dr_rank = sum(im, den_t).dim() - den_t.dim();
    }
    return g;
}

std::vector<int> betti_numbers(const DoubleComplex& cx)
{
    const int n = cx.ext.n();
    std::vector<std::size_t> ranks(2 * n + 1, 0);
    for (int k = 0; k < 2 * n; ++k)
        ranks[k] = cx.d.block(cx.ext.degree_keys(k + 1), cx.ext.degree_keys(k)).rank();
    std::vector<int> b;
    for (int k = 0; k <= 2 * n; ++k) {
        long dim = static_cast<long>(cx.ext.degree_keys(k).size());
        b.push_back(static_cast<int>(dim - static_cast<long>(ranks[k]) - (k ? static_cast<long>(ranks[k - 1]) : 0)));
    }
    return b;
}

bool DegenerationReport::dr_vanishes(int r, int p, int q) const
{
    return std::find(d_nonzero.begin(), d_nonzero.end(), std::array<int, 3>{r, p, q}) == d_nonzero.end();
}

nlohmann::json DegenerationReport::to_json() const
{
    nlohmann::json pages = nlohmann::json::array();
    for (const auto& [pq, ds] : dims)
        for (std::size_t r = 0; r < ds.size(); ++r)
            pages.push_back({{"p", pq.first}, {"q", pq.second}, {"r", r + 1}, {"dim", ds[r]}});
    nlohmann::json inf = nlohmann::json::array();
    for (const auto& [pq, d] : einf)
        inf.push_back({{"p", pq.first}, {"q", pq.second}, {"dim", d}, {"stable_from", stable_from.at(pq)}});
    nlohmann::json dn = nlohmann::json::array();
    for (const auto& c : d_nonzero)
        dn.push_back({c[0], c[1], c[2]});
    return {{"label", label},
            {"n", n},
            {"r_max", r_max},
            {"notes", notes},
            {"pages", pages},
            {"einf", inf},
            {"d_nonzero", dn},
            {"degenerates_at", degenerates_at},
            {"einf_vs_betti", {{"betti", betti}, {"einf_totals", einf_totals}, {"match", einf_matches_betti}}}};
}

DegenerationReport degeneration_report(const SpectralSequence& ss, int r_max)
{
    if (r_max < 1)
        throw SchemaError("r_max must be at least 1");
    DegenerationReport rep;
    const int n = ss.n();
    rep.n = n;
    rep.r_max = r_max;
    rep.label = ss.complex().label;
    rep.notes = ss.complex().notes;
    const int last = std::max(r_max, ss.final_page());
    int max_nonzero = 0;
    for (int p = 0; p <= n; ++p)
        for (int q = 0; q <= n; ++q) {
            auto& dims = rep.dims[{p, q}];
            for (int r = 1; r <= last; ++r) {
                const CfugCell& c = ss.cfug(p, q, r);
                GenericCell g = ss.generic(p, q, r);
                if (c.dim != g.dim || c.dr_rank != g.dr_rank)
                    throw InternalError("page routes disagree at (r,p,q) = (" + std::to_string(r) + "," +
                                        std::to_string(p) + "," + std::to_string(q) + ")");
                if (r <= r_max)
                    dims.push_back(c.dim);
                if (c.dr_rank > 0) {
                    rep.d_nonzero.push_back({r, p, q});
                    max_nonzero = std::max(max_nonzero, r);
                }
            }
            rep.einf[{p, q}] = ss.einf(p, q);
            int from = ss.final_page();
            for (int r = ss.final_page(); r >= 1; --r) {
                if (ss.z_tilde(p, q, r) != ss.z_tilde_infinity(p, q) || ss.b_tilde(p, q, r) != ss.b_tilde_infinity(p, q))
                    break;
                from = r;
            }
            rep.stable_from[{p, q}] = from;
        }
    std::sort(rep.d_nonzero.begin(), rep.d_nonzero.end());
    rep.degenerates_at = max_nonzero + 1;
    rep.betti = betti_numbers(ss.complex());
    rep.einf_totals.assign(2 * n + 1, 0);
    for (const auto& [pq, d] : rep.einf)
        rep.einf_totals[pq.first + pq.second] += d;
    rep.einf_matches_betti = true;
    for (int k = 0; k <= 2 * n; ++k)
        rep.einf_matches_betti = rep.einf_matches_betti && static_cast<int>(rep.einf_totals[k]) == rep.betti[k];
    return rep;
}

nlohmann::json ConditionVerdict::to_json() const
{
    return {{"condition", condition}, {"holds", holds}, {"certificates", certificates}};
}

namespace {

std::string pq_str(int p, int q) { return "(" + std::to_string(p) + "," + std::to_string(q) + ")"; }

std::string witness(const SpectralSequence& ss, const Subspace& big, const Subspace& small, int p, int q)
{
    for (const auto& v : big.vectors())
        if (!small.contains(v))
            return Form::from_vec(v, ss.complex().ext.piece(p, q)).str(ss.complex().ext);
    return "";
}

}  // namespace

ConditionVerdict check_drs_vanish(const SpectralSequence& ss, const std::vector<std::array<int, 3>>& cells)
{
    ConditionVerdict v;
    v.condition = "drs_vanish";
    v.holds = true;
    for (auto [r, p, q] : cells) {
        if (!ss.valid(p, q))
            continue;
        std::size_t rank = ss.cfug(p, q, r).dr_rank;
        if (rank) {
            v.holds = false;
            v.certificates.push_back("d_" + std::to_string(r) + "^" + pq_str(p, q) + " has rank " +
                                     std::to_string(rank));
        }
    }
    if (v.holds)
        v.certificates.push_back("all " + std::to_string(cells.size()) + " listed differentials vanish");
    return v;
}

ConditionVerdict check_thm35_hypothesis(const SpectralSequence& ss, int p, int q)
{
    ConditionVerdict v;
    v.condition = "thm35_hypothesis" + pq_str(p, q);
    v.holds = true;
    for (int i = 0; ss.valid(p - i, q + i); ++i) {
        int a = p - i, b = q + i;
        const Subspace &z1 = ss.z_tilde(a, b, 1), &zinf = ss.z_tilde_infinity(a, b);
        bool eq = z1 == zinf;
        bool direct = true;
        for (int r = 1; r <= ss.final_page(); ++r)
            direct = direct && ss.cfug(a, b, r).dr_rank == 0;
        if (eq != direct)
            throw InternalError("lifting criterion and d_r ranks disagree at " + pq_str(a, b));
        if (eq) {
            v.certificates.push_back("Z1=Zinf at " + pq_str(a, b) + " (dim " + std::to_string(z1.dim()) + ")");
        } else {
            v.holds = false;
            v.certificates.push_back("Z1 != Zinf at " + pq_str(a, b) + ": " + std::to_string(z1.dim()) + " vs " +
                                     std::to_string(zinf.dim()) + "; witness " + witness(ss, z1, zinf, a, b));
        }
    }
    return v;
}

ConditionVerdict check_strictness(const SpectralSequence& ss, int p, int q)
{
    ConditionVerdict v;
    v.condition = "strictness" + pq_str(p, q);
    const DoubleComplex& cx = ss.complex();
    const Exterior& ext = cx.ext;
    const int k = p + q;
    if (k >= 2 * ss.n()) {
        v.holds = true;
        v.certificates.push_back("top degree");
        return v;
    }
    const auto src = ext.degree_keys(k), dst = ext.degree_keys(k + 1);
    Matrix d = cx.d.block(dst, src);
    auto filt = [&](const std::vector<Key>& keys, int f) {
        std::vector<Vec> units;
        for (std::size_t i = 0; i < keys.size(); ++i)
            if (ext.p(keys[i]) >= f) {
                Vec e(keys.size());
                e[i] = GR(1);
                units.push_back(e);
            }
        return Subspace::span(keys.size(), units);
    };
    Subspace lhs = intersect(filt(dst, p + 1), image(d));
    Subspace rhs = image(d, filt(src, p + 1));
    v.holds = lhs == rhs;
    v.certificates.push_back("dim F^{p+1} ∩ dA = " + std::to_string(lhs.dim()) + ", dim dF^{p+1} = " +
                             std::to_string(rhs.dim()));
    // Pure-type form F^{p+1} ∩ dA^{p,q} ⊆ dF^{p+1}, which is exactly the lifting criterion.
    const auto& piece = ext.piece(p, q);
    Subspace pure = intersect(filt(dst, p + 1), image(cx.d.block(dst, piece)));
    bool pure_holds = rhs.contains(pure);
    bool lift = ss.z_tilde(p, q, 1) == ss.z_tilde_infinity(p, q);
    if (lift != pure_holds)
        throw InternalError("pure-type strictness and lifting disagree at " + pq_str(p, q));
    v.certificates.push_back(std::string("F^{p+1} ∩ dA^{p,q} ⊆ dF^{p+1}: ") + (pure_holds ? "yes" : "no"));
    if (!v.holds)
        for (const auto& x : lhs.vectors())
            if (!rhs.contains(x)) {
                v.certificates.push_back("witness " + Form::from_vec(x, dst).str(ext));
                break;
            }
    return v;
}

ConditionVerdict check_pi_surjectivity(const SpectralSequence& ss, int p, int q, int r)
{
    ConditionVerdict v;
    v.condition = "pi_surjectivity" + pq_str(p, q) + ",r=" + std::to_string(r);
    const DoubleComplex& cx = ss.complex();
    const Exterior& ext = cx.ext;
    const int k = p + q;
    const auto keys = ext.degree_keys(k);
    const auto& sys = ss.extension_system(p, q, r);
    Subspace closed = k < 2 * ss.n() ? kernel(cx.d.block(ext.degree_keys(k + 1), keys)) : Subspace::full(keys.size());
    std::vector<Vec> units;
    for (std::size_t i = 0; i < keys.size(); ++i)
        if (ext.p(keys[i]) >= p) {
            Vec e(keys.size());
            e[i] = GR(1);
            units.push_back(e);
        }
    std::vector<Vec> projected;
    for (const auto& x : intersect(closed, Subspace::span(keys.size(), units)).vectors())
        projected.push_back(restrict(x, keys, sys.cols));
    Subspace image_proj = Subspace::span(sys.cols.size(), projected);
    bool direct = image_proj == sys.kernel;
    bool via_z = true;
    for (int i = 0; i < r; ++i) {
        if (!ss.valid(p + i, q - i))
            continue;
        bool eq = ss.z_tilde(p + i, q - i, r - i) == ss.z_tilde_infinity(p + i, q - i);
        via_z = via_z && eq;
        v.certificates.push_back(std::string("Z") + std::to_string(r - i) + (eq ? "=" : "!=") + "Zinf at " +
                                 pq_str(p + i, q - i));
    }
    if (direct != via_z)
        throw InternalError("projection surjectivity criteria disagree at " + pq_str(p, q));
    v.holds = direct;
    v.certificates.push_back("dim image " + std::to_string(image_proj.dim()) + " of kernel " +
                             std::to_string(sys.kernel.dim()));
    return v;
}

DoubleComplex deformed_complex(const Nilmanifold& m, const BeltramiSeries& series,
                               const std::map<std::string, GR>& t0)
{
    VectorForm phi = series.sum_at(t0);
    IntegrabilityReport integ = check_integrability(m, phi);
    if (!integ.ok)
        throw MathError("Beltrami differential is not integrable at " + point_str(t0) + ": frame pair " +
                        integ.failing_pair + " gives " + integ.residual);
    const DoubleComplex& c0 = m.complex();
    DoubleComplex cx = c0;
    SparseOp lie = lie10_operator(c0, phi);
    cx.dbar = c0.dbar - lie;
    cx.d = c0.del + cx.dbar;
    cx.deformed = true;
    cx.label = c0.label + " deformed at " + (t0.empty() ? std::string("t=0") : point_str(t0));
    cx.notes.push_back("deformed fiber computed with invariant forms only (assumes left-invariant forms compute "
                       "the deformed cohomology for this nilpotent structure)");
    auto fails = cx.structural_failures();
    if (!fails.empty())
        throw MathError("deformed complex violates " + fails.front() + " = 0 at " + point_str(t0));
    return cx;
}

std::string render_cell(const SpectralSequence& ss, int p, int q, int r)
{
    const CfugCell& c = ss.cfug(p, q, r);
    const Exterior& ext = ss.complex().ext;
    std::string out;
    for (std::size_t i = 0; i < c.reps.size(); ++i)
        out += (i ? ", " : "") + Form::from_vec(c.reps[i], c.basis).str(ext);
    out += ";";
    auto bv = c.b.vectors();
    for (std::size_t i = 0; i < bv.size(); ++i)
        out += (i ? ", " : " ") + Form::from_vec(bv[i], c.basis).str(ext);
    return out;
}

}  // namespace frol
