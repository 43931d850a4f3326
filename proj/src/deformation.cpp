#include "frolicher/deformation.hpp"

#include "frolicher/errors.hpp"

#include <algorithm>
#include <functional>
#include <set>

namespace frol {

namespace {

std::string pq(int p, int q) { return "(" + std::to_string(p) + "," + std::to_string(q) + ")"; }

bool valid(const Exterior& ext, int p, int q) { return p >= 0 && q >= 0 && p <= ext.n() && q <= ext.n(); }

// Poly coordinates of f (supported on `basis`) in the subspace s.
std::vector<Poly> coordinates(const Form& f, const std::vector<Key>& basis, const Subspace& s)
{
    std::vector<Poly> out(s.dim());
    for (const auto& [e, v] : f.expand(basis)) {
        Vec c = s.coordinates(v);
        for (std::size_t m = 0; m < c.size(); ++m)
            if (!c[m].is_zero())
                out[m] += Poly::monomial(e, c[m]);
    }
    return out;
}

std::vector<Key> strand_keys(const Exterior& ext, int p, int q, int from, int to)
{
    std::vector<Key> keys;
    for (int i = from; i < to; ++i)
        if (valid(ext, p + i, q - i))
            for (Key k : ext.piece(p + i, q - i))
                keys.push_back(k);
    return keys;
}

Form restrict_to(const Form& f, const std::vector<Key>& keys)
{
    std::set<Key> allowed(keys.begin(), keys.end());
    Form out;
    for (const auto& [k, c] : f.terms())
        if (allowed.count(k))
            out.add(k, c);
    return out;
}

// Minimal-norm least squares for a constant block cols → rows of d:
// x = (M*M + H)^{-1} M* b with H the projector onto ker M.
struct LeastSquares {
    std::vector<Key> cols, rows;
    Matrix m, pinv;
    Subspace coker;  // (im M)^⊥ in row coordinates

    LeastSquares(const DoubleComplex& cx, std::vector<Key> c, std::vector<Key> r) : cols(std::move(c)), rows(std::move(r))
    {
        m = cx.d.block(rows, cols);
        Matrix gc = cx.gram(cols), gr = cx.gram(rows);
        if (cols.empty() || rows.empty()) {
            pinv = Matrix(cols.size(), rows.size());
        } else {
            Matrix mstar = gc.inverse() * m.adjoint() * gr;
            Matrix h = orthogonal_projector(kernel(m), gc);
            pinv = (mstar * m + h).inverse() * mstar;
        }
        Subspace im = cols.empty() ? Subspace(rows.size()) : image(m);
        coker = orthogonal_complement(im, gr);
    }

    Form solve(const Form& b) const { return apply_matrix(pinv, rows, cols, b); }
    Form apply(const Form& x) const { return apply_matrix(m, cols, rows, x); }
};


Point complete_point(const BeltramiSeries& series, const Point& t0)
{
    Point out = t0;
    for (const auto& name : series.parameters)
        out.emplace(name, GR(0));
    return out;
}

// Order-window length after which a run of zero orders certifies a zero tail.
int zero_window(const BeltramiSeries& s)
{
    int last = s.last_order();
    int effective = last >= 0 ? last : s.tail->from_order - 1;
    return std::max(2, effective);
}

struct StepOut {
    Form sigma;
    std::vector<ObstructionReport::Entry> obstructions;
};

using StepSolver = std::function<StepOut(const Form& source, int order)>;

DeformationRun run_recursion(const DeformationContext& ctx, const Form& sigma0, int p, int q, int r, SeriesKind kind,
                             int order, const StepSolver& solve)
{
    DeformationRun run;
    DeformationSeries& s = run.series;
    s.p = p;
    s.q = q;
    s.r = r;
    s.kind = kind;
    s.orders.push_back(sigma0);
    const BeltramiSeries& series = ctx.series();
    const int window = zero_window(series);
    const bool tail = series.last_order() < 0;

    for (int k = 1; k <= order; ++k) {
        Form source = lie_series_order(ctx.complex(), series, s.orders, k);
        StepOut out = solve(source, k);
        s.orders.push_back(out.sigma);
        s.verified_order = k;
        if (!out.obstructions.empty()) {
            run.obstructions.entries = std::move(out.obstructions);
            run.obstructions.first_obstructed = k;
            s.notes.push_back("obstructed at order " + std::to_string(k) + "; higher orders are not attempted");
            break;
        }
        if (k < window)
            continue;
        bool zeros = true;
        for (int j = k - window + 1; j <= k; ++j)
            zeros = zeros && s.orders[j].is_zero();
        if (!zeros)
            continue;
        if (tail) {
            // The geometric tail must be killed by every earlier order.
            VectorForm base = series.phi(series.tail->from_order);
            bool killed = true;
            for (int j = 0; j <= k - window && killed; ++j) {
                StepOut t = solve(lie10(ctx.complex(), base, s.orders[j]), k);
                killed = t.sigma.is_zero() && t.obstructions.empty();
            }
            if (!killed)
                continue;
        }
        while (s.orders.size() > 1 && s.orders.back().is_zero())
            s.orders.pop_back();
        s.terminated = true;
        s.verified_order = order;
        s.notes.push_back("source terms vanish from order " + std::to_string(k - window + 1) +
                          " on; the tail is identically zero");
        break;
    }
    return run;
}

// ∂̄σ = b − o with o = ℋb; the identity needs ∂̄b = 0, which integrability
// guarantees while all lower orders are unobstructed.
Form dolbeault_step(const DeformationContext& ctx, const Form& b, int p, int q, int k, Form& obstruction)
{
    const Exterior& ext = ctx.ext();
    if (!b.is_pure(ext, p, q + 1) && !b.is_zero())
        throw InternalError("Dolbeault source leaves A^" + pq(p, q + 1));
    if (b.is_zero() || q + 1 > ext.n()) {
        obstruction = Form();
        return Form();
    }
    const HodgePackage& h = ctx.hodge();
    Form sigma = h.dbar_star_green(b);
    obstruction = h.harmonic(b);
    if (ctx.complex().dbar.apply(sigma) - b + obstruction != Form()) {
        const MaurerCartanReport& mc = ctx.maurer_cartan(k);
        if (!mc.ok)
            throw MathError("Beltrami series fails Maurer-Cartan at order " + std::to_string(mc.first_failure) +
                            "; the extension equation is inconsistent at order " + std::to_string(k));
        throw InternalError("extension residual nonzero at order " + std::to_string(k) + " in " + pq(p, q));
    }
    return sigma;
}

}  // namespace

std::string point_label(const Point& t0)
{
    if (t0.empty())
        return "t=0";
    std::string s;
    for (const auto& [k, v] : t0)
        s += (s.empty() ? "" : ",") + k + "=" + v.str();
    return s;
}

DeformationContext::DeformationContext(Nilmanifold m, BeltramiSeries series)
    : m_(std::move(m)), series_(std::move(series)), hodge_(m_.complex()), central_(m_.complex())
{
}

const SpectralSequence& DeformationContext::fiber(const Point& t0) const
{
    Point full = complete_point(series_, t0);
    std::string key = point_label(full);
    auto it = fibers_.find(key);
    if (it != fibers_.end())
        return *it->second;
    auto ss = std::make_unique<SpectralSequence>(deformed_complex(m_, series_, full));
    return *fibers_.emplace(key, std::move(ss)).first->second;
}

const MaurerCartanReport& DeformationContext::maurer_cartan(int order) const
{
    auto it = mc_.find(order);
    if (it != mc_.end())
        return it->second;
    return mc_.emplace(order, check_maurer_cartan(m_, series_, order)).first->second;
}

Form ClassFamily::generic() const
{
    Form f;
    for (std::size_t m = 0; m < basis.size(); ++m)
        f += basis[m] * Poly::variable(symbols[m]);
    return f;
}

namespace {

ClassFamily family_from(const Exterior& ext, int p, int q, int r, const std::vector<Vec>& vs,
                        const std::vector<Key>& keys)
{
    ClassFamily fam;
    fam.p = p;
    fam.q = q;
    fam.r = r;
    std::set<std::string> used;
    for (const auto& v : vs) {
        std::size_t pivot = 0;
        while (v[pivot].is_zero())
            ++pivot;
        Key lead = keys[pivot];
        std::string name = "a" + (lead ? ext.digits(lead) : std::string("0"));
        if (used.count(name))
            name += "_" + std::to_string(ext.p(lead) - p);
        used.insert(name);
        fam.basis.push_back(Form::from_vec(v, keys));
        fam.symbols.push_back(name);
    }
    return fam;
}

}  // namespace

ClassFamily harmonic_family(const HodgePackage& h, int p, int q)
{
    const auto& L = h.dolbeault(p, q);
    return family_from(h.complex().ext, p, q, 1, L.harmonic_space.vectors(), L.basis);
}

ClassFamily filtered_family(const SpectralSequence& ss, const HodgePackage& h, int p, int q, int r)
{
    const auto& sys = ss.extension_system(p, q, r);
    const auto& L = h.dolbeault(p, q);
    const std::size_t n0 = L.basis.size();
    // Kernel vectors whose first block is harmonic.
    Matrix cut(n0, sys.cols.size());
    Matrix off = Matrix::identity(n0) - L.harmonic;
    for (std::size_t i = 0; i < n0; ++i)
        for (std::size_t j = 0; j < n0; ++j)
            cut(i, j) = off(i, j);
    Subspace keep = intersect(sys.kernel, kernel(cut));
    return family_from(h.complex().ext, p, q, r, keep.vectors(), sys.cols);
}

std::string kind_name(SeriesKind k)
{
    switch (k) {
    case SeriesKind::dolbeault: return "dolbeault";
    case SeriesKind::r_filtered: return "r-filtered";
    case SeriesKind::lemma33: return "lemma33-filtered";
    case SeriesKind::lemma41: return "lemma41";
    case SeriesKind::canonical_filtered: return "canonical-filtered";
    }
    return "?";
}

Form DeformationSeries::sum_at(const Point& t0) const
{
    Form s;
    for (const auto& f : orders)
        s += f.specialize(t0);
    return s;
}

nlohmann::json DeformationSeries::to_json(const Exterior& ext) const
{
    nlohmann::json o = nlohmann::json::array();
    for (std::size_t k = 0; k < orders.size(); ++k)
        o.push_back({{"order", k}, {"form", orders[k].str(ext)}});
    return {{"bidegree", {p, q}}, {"r", r},          {"kind", kind_name(kind)}, {"orders", o},
            {"verified_order", verified_order}, {"terminated", terminated}, {"notes", notes}};
}

std::vector<Poly> ObstructionReport::polynomials() const
{
    std::vector<Poly> out;
    for (const auto& e : entries)
        for (const auto& c : e.coefficients) {
            if (c.is_zero())
                continue;
            Poly m = c.monic();
            if (std::find(out.begin(), out.end(), m) == out.end())
                out.push_back(m);
        }
    return out;
}

nlohmann::json ObstructionReport::to_json(const Exterior& ext) const
{
    nlohmann::json e = nlohmann::json::array();
    for (const auto& x : entries) {
        nlohmann::json cs = nlohmann::json::array();
        for (const auto& c : x.coefficients)
            cs.push_back(c.str());
        e.push_back({{"order", x.order}, {"strand", x.strand}, {"component", x.component.str(ext)}, {"coefficients", cs}});
    }
    nlohmann::json polys = nlohmann::json::array();
    for (const auto& p : polynomials())
        polys.push_back(p.str());
    return {{"unobstructed", unobstructed()}, {"first_obstructed", first_obstructed}, {"entries", e},
            {"polynomials", polys}};
}

nlohmann::json DeformationRun::to_json(const Exterior& ext) const
{
    return {{"series", series.to_json(ext)}, {"obstructions", obstructions.to_json(ext)}};
}

DeformationRun canonical_dolbeault(const DeformationContext& ctx, const Form& sigma0, int p, int q, int order)
{
    return canonical_r_filtered(ctx, sigma0, p, q, 1, order);
}

DeformationRun canonical_r_filtered(const DeformationContext& ctx, const Form& sigma0, int p, int q, int r, int order)
{
    const Exterior& ext = ctx.ext();
    const DoubleComplex& cx = ctx.complex();
    if (r < 1 || !valid(ext, p, q))
        throw SchemaError("r-filtered window needs r >= 1 and a valid bidegree, got r=" + std::to_string(r) + " at " +
                          pq(p, q));
    std::vector<Key> window = strand_keys(ext, p, q, 0, r);
    if (restrict_to(sigma0, window) != sigma0)
        throw MathError("initial form leaves the " + std::to_string(r) + "-filtered window at " + pq(p, q));
    // Closedness, strand by strand.
    for (int i = 0; i < r; ++i) {
        if (!valid(ext, p + i, q + 1 - i))
            continue;
        Form lhs = cx.dbar.apply(sigma0.component(ext, p + i, q - i));
        if (i > 0)
            lhs += cx.del.apply(sigma0.component(ext, p + i - 1, q - i + 1));
        if (!lhs.component(ext, p + i, q + 1 - i).is_zero())
            throw MathError("initial form is not closed: strand " + std::to_string(i) + " of " + pq(p, q) +
                            " leaves " + lhs.component(ext, p + i, q + 1 - i).str(ext));
    }

    std::shared_ptr<LeastSquares> ls;
    if (r >= 2) {
        std::vector<Key> rows;
        for (int i = 1; i < r; ++i)
            if (valid(ext, p + i, q + 1 - i))
                for (Key k : ext.piece(p + i, q + 1 - i))
                    rows.push_back(k);
        ls = std::make_shared<LeastSquares>(cx, strand_keys(ext, p, q, 1, r), rows);
    }
    const HodgePackage& h = ctx.hodge();
    StepSolver solve = [&, ls](const Form& source, int k) {
        StepOut out;
        Form b0 = source.component(ext, p, q + 1);
        Form o0;
        Form s0 = dolbeault_step(ctx, b0, p, q, k, o0);
        if (!o0.is_zero()) {
            const auto& L = h.dolbeault(p, q + 1);
            out.obstructions.push_back({k, 0, o0, coordinates(o0, L.basis, L.harmonic_space)});
        }
        out.sigma = s0;
        if (ls) {
            Form bh = restrict_to(source - cx.del.apply(s0), ls->rows);
            Form x = ls->solve(bh);
            Form res = bh - ls->apply(x);
            if (!res.is_zero()) {
                int strand = 1;
                while (res.component(ext, p + strand, q + 1 - strand).is_zero())
                    ++strand;
                out.obstructions.push_back({k, strand, res, coordinates(res, ls->rows, ls->coker)});
            }
            out.sigma += x;
        }
        return out;
    };
    return run_recursion(ctx, sigma0, p, q, r, r == 1 ? SeriesKind::dolbeault : SeriesKind::r_filtered, order, solve);
}

LiftResult lift_to_d_closed(const DeformationContext& ctx, const Form& alpha, int p, int q)
{
    const Exterior& ext = ctx.ext();
    const DoubleComplex& cx = ctx.complex();
    if (!valid(ext, p, q) || (!alpha.is_pure(ext, p, q) && !alpha.is_zero()))
        throw MathError("lift_to_d_closed expects a pure " + pq(p, q) + "-form");
    if (!cx.dbar.apply(alpha).is_zero())
        throw MathError("lift_to_d_closed expects a dbar-closed form; dbar gives " + cx.dbar.apply(alpha).str(ext));
    LiftResult res;
    if (cx.d.apply(alpha).is_zero()) {
        res.ok = true;
        res.method = "identity";
        res.lift = alpha;
        return res;
    }
    // ∂α ≠ 0 forces p < n, so F^{p+1} is available.
    Form c = alpha - ctx.hodge().d_star_green_filtered(cx.del.apply(alpha), p + 1);
    if (cx.d.apply(c).is_zero()) {
        res.ok = true;
        res.method = "canonical";
        res.lift = c;
        return res;
    }
    const SpectralSequence& ss = ctx.central();
    const auto& piece = ext.piece(p, q);
    auto parts = alpha.expand(piece);
    bool staircase = true;
    Form stair;
    try {
        for (const auto& [e, v] : parts) {
            Form x = ss.extend(Form::from_vec(v, piece), p, q, ss.final_page());
            for (const auto& [k, cf] : x.terms())
                stair.add(k, cf * Poly::monomial(e, GR(1)));
        }
    } catch (const MathError&) {
        staircase = false;
    }
    if (staircase && cx.d.apply(stair).is_zero())
        throw InternalError("staircase lift exists but the canonical filtered solve missed it at " + pq(p, q));
    int r = 0;
    for (int s = 1; s <= ss.final_page(); ++s) {
        const Subspace& z = ss.z_tilde(p, q, s);
        bool in = true;
        for (const auto& [e, v] : parts)
            in = in && z.contains(v);
        if (!in)
            break;
        r = s;
    }
    res.ok = false;
    res.witness_r = r;
    res.message = "no d-closed lift: the class lies in Z̃_" + std::to_string(r) + " but not Z̃_" +
                  std::to_string(r + 1) + ", so d_" + std::to_string(r) + "^" + pq(p, q) + " is nonzero on it";
    return res;
}

bool FilteredSolution::all_verified() const
{
    for (const auto& s : steps)
        if (!(s.d_system && s.in_filtration && s.strands && s.exp_identity))
            return false;
    return true;
}

nlohmann::json FilteredSolution::to_json(const Exterior& ext) const
{
    nlohmann::json a = nlohmann::json::array();
    for (std::size_t k = 0; k < alpha.size(); ++k)
        a.push_back({{"order", k}, {"form", alpha[k].str(ext)}});
    nlohmann::json st = nlohmann::json::array();
    for (const auto& s : steps)
        st.push_back({{"order", s.order},
                      {"d_system", s.d_system},
                      {"in_filtration", s.in_filtration},
                      {"strands", s.strands},
                      {"exp_identity", s.exp_identity}});
    return {{"bidegree", {p, q}}, {"r", r}, {"kind", kind_name(kind)}, {"alpha", a}, {"steps", st},
            {"verified", all_verified()}, {"notes", notes}};
}

namespace {

std::string failing_certificate(const ConditionVerdict& v)
{
    for (const auto& c : v.certificates)
        if (c.find("has rank") != std::string::npos || c.find("!=") != std::string::npos)
            return c;
    return v.certificates.empty() ? v.condition : v.certificates.front();
}

void require_integrable(const DeformationContext& ctx, int order)
{
    const MaurerCartanReport& mc = ctx.maurer_cartan(order);
    if (!mc.ok)
        throw MathError("Beltrami series fails Maurer-Cartan at order " + std::to_string(mc.first_failure) +
                        "; the filtered d-system is inconsistent");
}

// The exponential identity at order k, then the staircase of d-closed lifts of
// E = ((e^{i_φ}−1)α)_k from the bottom piece up to (p−1,q+1); returns
// α̃ = Σβ − E ∈ F^p with dα̃ = (L_φα)_k.
Form staircase(const DeformationContext& ctx, const std::vector<Form>& parts, int p, int q, int k, const Form& lk,
               SolverStep& step)
{
    const Exterior& ext = ctx.ext();
    const DoubleComplex& cx = ctx.complex();
    Form e = exp_series_order(ext, ctx.series(), parts, k, +1);
    step.exp_identity = (cx.d.apply(e) + lk).is_zero();
    if (!step.exp_identity)
        throw InternalError("exponential identity d((e^{i_phi}-1)alpha)_k = -(L_phi alpha)_k fails at order " + std::to_string(k));
    Form sum;
    for (int lambda = std::max(0, p - k); lambda < p; ++lambda) {
        int b = p + q - lambda;
        if (!valid(ext, lambda, b))
            continue;
        Form c = (e - sum).component(ext, lambda, b);
        if (c.is_zero())
            continue;
        LiftResult lift = lift_to_d_closed(ctx, c, lambda, b);
        if (!lift.ok)
            throw InternalError("staircase lift failed at " + pq(lambda, b) + " order " + std::to_string(k) + ": " +
                                lift.message);
        sum += lift.lift;
    }
    Form tilde = sum - e;
    if (tilde.filtration(ext, p) != tilde)
        throw InternalError("staircase left F^" + std::to_string(p) + " at order " + std::to_string(k));
    return tilde;
}

void finish_step(const DeformationContext& ctx, const Form& ak, const Form& lk, int p, SolverStep& step)
{
    step.d_system = ctx.complex().d.apply(ak) == lk;
    step.in_filtration = ak.filtration(ctx.ext(), p) == ak;
}

}  // namespace

FilteredSolution solve_lemma33(const DeformationContext& ctx, const Form& alpha0, int p, int q, int order)
{
    const Exterior& ext = ctx.ext();
    const DoubleComplex& cx = ctx.complex();
    ConditionVerdict hyp = check_thm35_hypothesis(ctx.central(), p, q);
    if (!hyp.holds) {
        std::string why;
        for (const auto& c : hyp.certificates)
            if (c.rfind("Z1 != Zinf", 0) == 0)
                why += (why.empty() ? "" : "; ") + c;
        throw MathError("hypothesis d_r^{p-i,q+i} = 0 fails at " + pq(p, q) + ": " + why);
    }
    if (alpha0.filtration(ext, p) != alpha0 || alpha0.degree_part(ext, p + q) != alpha0)
        throw MathError("alpha_0 must lie in F^" + std::to_string(p) + "A^" + std::to_string(p + q));
    if (!cx.d.apply(alpha0).is_zero())
        throw MathError("alpha_0 is not d-closed");
    require_integrable(ctx, order);

    FilteredSolution sol;
    sol.p = p;
    sol.q = q;
    sol.kind = SeriesKind::lemma33;
    sol.alpha.push_back(alpha0);
    const HodgePackage& h = ctx.hodge();
    for (int k = 1; k <= order; ++k) {
        SolverStep step;
        step.order = k;
        Form lk = lie_series_order(cx, ctx.series(), sol.alpha, k);
        Form tilde = staircase(ctx, sol.alpha, p, q, k, lk, step);
        Form src = lk.component(ext, p, q + 1);
        Form canon = h.dbar_star_green(src);
        if (cx.dbar.apply(canon) != src)
            throw InternalError("the (p,q) strand is obstructed at order " + std::to_string(k) +
                                " although the hypothesis holds");
        Form g = tilde.component(ext, p, q) - canon;
        Form gamma;
        if (!g.is_zero()) {
            LiftResult lift = lift_to_d_closed(ctx, g, p, q);
            if (!lift.ok)
                throw InternalError("gamma-correction has no lift at order " + std::to_string(k));
            gamma = lift.lift;
        }
        Form ak = tilde - gamma;
        finish_step(ctx, ak, lk, p, step);
        step.strands = ak.component(ext, p, q) == canon;
        sol.alpha.push_back(ak);
        sol.steps.push_back(step);
    }
    return sol;
}

namespace {

Form strand_part(const Exterior& ext, const Form& f, int p, int q, int r)
{
    Form s;
    for (int i = 0; i < r; ++i)
        if (valid(ext, p + i, q - i))
            s += f.component(ext, p + i, q - i);
    return s;
}

// y ∈ F^{p_low} with dy = target, by the canonical filtered solve.
Form filtered_solve(const DeformationContext& ctx, const Form& target, int p_low)
{
    if (target.is_zero())
        return Form();
    if (p_low > ctx.ext().n())
        throw MathError("nonzero right-hand side but F^" + std::to_string(p_low) + " is zero");
    return ctx.hodge().canonical_d_solve(target, p_low);
}

void check_strand_data(const DeformationSeries& s, int order)
{
    if (s.kind != SeriesKind::dolbeault && s.kind != SeriesKind::r_filtered)
        throw SchemaError("strand data must come from a canonical Dolbeault or r-filtered run");
    if (!s.terminated && s.verified_order < order)
        throw MathError("canonical strand data only reaches order " + std::to_string(s.verified_order));
}

Form strand_order(const DeformationSeries& s, int k)
{
    return k < static_cast<int>(s.orders.size()) ? s.orders[k] : Form();
}

}  // namespace

FilteredSolution solve_lemma41(const DeformationContext& ctx, const DeformationSeries& strands, int order)
{
    const Exterior& ext = ctx.ext();
    const DoubleComplex& cx = ctx.complex();
    const SpectralSequence& ss = ctx.central();
    const int p = strands.p, q = strands.q, r = strands.r;
    check_strand_data(strands, order);

    std::vector<std::array<int, 3>> left, right;
    for (int i = 0; i < r; ++i)
        for (int l = std::max(1, r - i); l <= ss.final_page(); ++l)
            left.push_back({l, p + i, q - i});
    for (int i = 1; ss.valid(p - i, q + i); ++i)
        for (int l = r + 1; l <= ss.final_page(); ++l)
            right.push_back({l, p - i, q + i});
    ConditionVerdict lv = check_drs_vanish(ss, left), rv = check_drs_vanish(ss, right);
    if (!lv.holds)
        throw MathError("hypothesis d_lambda^{p+i,q-i} = 0 (lambda >= r-i) fails: " + failing_certificate(lv));
    if (!rv.holds)
        throw MathError("hypothesis d_lambda^{p-i,q+i} = 0 (lambda >= r+1) fails: " + failing_certificate(rv));
    if (!check_pi_surjectivity(ss, p, q, r).holds)
        throw InternalError("d_lambda vanishing holds but the projection onto closed r-filtered forms is not onto");
    require_integrable(ctx, order);

    FilteredSolution sol;
    sol.p = p;
    sol.q = q;
    sol.r = r;
    sol.kind = SeriesKind::lemma41;
    Form u = strand_part(ext, strand_order(strands, 0), p, q, r);
    Form a0 = u - filtered_solve(ctx, cx.d.apply(u), p + r);
    sol.alpha.push_back(a0);
    for (int k = 1; k <= order; ++k) {
        SolverStep step;
        step.order = k;
        Form lk = lie_series_order(cx, ctx.series(), sol.alpha, k);
        Form tilde = staircase(ctx, sol.alpha, p, q, k, lk, step);
        Form target = strand_part(ext, strand_order(strands, k), p, q, r);
        Form delta = target - strand_part(ext, tilde, p, q, r);
        Form gamma;
        try {
            gamma = delta - filtered_solve(ctx, cx.d.apply(delta), p + r);
        } catch (const MathError& e) {
            throw InternalError(std::string("gamma-correction failed at order ") + std::to_string(k) + ": " + e.what());
        }
        Form ak = tilde + gamma;
        finish_step(ctx, ak, lk, p, step);
        step.strands = strand_part(ext, ak, p, q, r) == target;
        sol.alpha.push_back(ak);
        sol.steps.push_back(step);
    }
    return sol;
}

FilteredSolution canonical_filtered_solution(const DeformationContext& ctx, const DeformationSeries& strands,
                                             int order)
{
    const Exterior& ext = ctx.ext();
    const DoubleComplex& cx = ctx.complex();
    const int p = strands.p, q = strands.q, r = strands.r;
    check_strand_data(strands, order);
    require_integrable(ctx, order);

    FilteredSolution sol;
    sol.p = p;
    sol.q = q;
    sol.r = r;
    sol.kind = SeriesKind::canonical_filtered;
    std::vector<Form> hat;
    for (int k = 0; k <= order; ++k)
        hat.push_back(strand_part(ext, strand_order(strands, k), p, q, r));
    auto top = [&](int k) { return hat[k].component(ext, p + r - 1, q - r + 1); };

    auto solve = [&](const Form& y, int k) -> std::optional<Form> {
        try {
            return filtered_solve(ctx, y, p + r);
        } catch (const MathError& e) {
            sol.notes.push_back("order " + std::to_string(k) + ": " + e.what());
            return std::nullopt;
        }
    };
    auto a0 = solve(cx.del.apply(top(0)), 0);
    if (!a0)
        return sol;
    sol.alpha.push_back(hat[0] - *a0);
    std::vector<Form> diff{sol.alpha[0] - hat[0]};
    for (int k = 1; k <= order; ++k) {
        SolverStep step;
        step.order = k;
        Form y = lie_series_order(cx, ctx.series(), diff, k) - cx.del.apply(top(k));
        auto x = solve(y, k);
        if (!x)
            break;
        Form ak = hat[k] + *x;
        Form lk = lie_series_order(cx, ctx.series(), sol.alpha, k);
        finish_step(ctx, ak, lk, p, step);
        step.strands = strand_part(ext, ak, p, q, r) == hat[k];
        // The formula bypasses the staircase; the exponential identity is still checked on the partial sum.
        Form e = exp_series_order(ext, ctx.series(), sol.alpha, k, +1);
        step.exp_identity = (cx.d.apply(e) + lk).is_zero();
        sol.alpha.push_back(ak);
        diff.push_back(ak - hat[k]);
        sol.steps.push_back(step);
    }
    return sol;
}

}  // namespace frol
