#include "frolicher/deformation.hpp"

#include "frolicher/errors.hpp"

#include <random>

namespace frol {

namespace {

std::string pq(int p, int q) { return "(" + std::to_string(p) + "," + std::to_string(q) + ")"; }

Point complete(const BeltramiSeries& s, const Point& t0)
{
    Point out = t0;
    for (const auto& name : s.parameters)
        out.emplace(name, GR(0));
    return out;
}

// Coefficient of the class symbol `var` in a form linear in the symbols.
Form coefficient_form(const Form& f, int var)
{
    Form out;
    for (const auto& [k, c] : f.terms())
        out.add(k, c.coefficient_of(var));
    return out;
}

}  // namespace

nlohmann::json VReport::to_json() const
{
    return {{"bidegree", {p, q}},   {"point", point},        {"harmonic_dim", harmonic_dim},
            {"dims", dims},         {"dr_ranks", dr_ranks},  {"exact", exact},
            {"caveat", caveat},     {"prop26_consistent", prop26_consistent}, {"notes", notes}};
}

VReport v_dimensions(const DeformationContext& ctx, int p, int q, const Point& t0, int r_max, int order)
{
    const Exterior& ext = ctx.ext();
    const DoubleComplex& cx = ctx.complex();
    if (p < 0 || q < 0 || p > ext.n() || q > ext.n() || r_max < 1)
        throw SchemaError("v_dimensions needs a valid bidegree and r_max >= 1");
    const Point full = complete(ctx.series(), t0);
    const SpectralSequence& fib = ctx.fiber(full);

    VReport rep;
    rep.p = p;
    rep.q = q;
    rep.point = point_label(full);
    const auto& piece = ext.piece(p, q);
    ClassFamily fam = harmonic_family(ctx.hodge(), p, q);
    rep.harmonic_dim = fam.basis.size();

    // Σ_k σ_k(t0) = (1 − T)^{-1}h with T = ∂̄*G L_{φ(t0)} on A^{p,q}.
    Matrix t(piece.size(), piece.size());
    if (q < ext.n()) {
        const auto& up = ctx.hodge().dolbeault(p, q + 1);
        Matrix l = lie10_operator(cx, ctx.series().sum_at(full)).block(up.basis, piece);
        t = up.d_in_star * up.green * l;
    }
    Matrix resolvent;
    try {
        resolvent = (Matrix::identity(piece.size()) - t).inverse();
    } catch (const MathError&) {
        throw MathError("canonical deformations of " + pq(p, q) + " do not converge at " + rep.point +
                        ": 1 - dbar*G L_phi is singular");
    }
    std::vector<Vec> sums;
    for (const auto& h : fam.basis)
        sums.push_back(resolvent * h.to_vec(piece));

    DeformationRun run = canonical_dolbeault(ctx, fam.generic(), p, q, order);
    if (!run.obstructions.unobstructed()) {
        rep.caveat = true;
        rep.notes.push_back("canonical deformations are obstructed at order " +
                            std::to_string(run.obstructions.first_obstructed) +
                            "; V is computed from the formal resolvent");
    } else if (run.series.terminated) {
        Form total = run.series.sum_at(full);
        for (std::size_t m = 0; m < sums.size(); ++m) {
            Vec v = coefficient_form(total, find_parameter(fam.symbols[m])).to_vec(piece);
            if (v != sums[m])
                throw InternalError("terminated series and resolvent disagree for " + fam.symbols[m]);
        }
        rep.exact = true;
    } else {
        rep.caveat = true;
        rep.notes.push_back("series not terminated by order " + std::to_string(order) +
                            "; V uses the resolvent sum");
    }

    Matrix s = Matrix::from_cols(sums, piece.size());
    for (int r = 1; r <= r_max + 1; ++r)
        rep.dims.push_back(sums.empty() ? 0 : preimage(s, fib.z_tilde(p, q, r)).dim());
    for (int r = 1; r <= r_max; ++r) {
        std::size_t rank = fib.cfug(p, q, r).dr_rank;
        rep.dr_ranks.push_back(rank);
        bool equal = rep.dims[r - 1] == rep.dims[r];
        if (equal != (rank == 0)) {
            rep.prop26_consistent = false;
            rep.notes.push_back("r=" + std::to_string(r) + ": dim V_r " + (equal ? "=" : "!=") + " dim V_{r+1} but d_r has rank " +
                                std::to_string(rank));
        }
    }
    return rep;
}

std::vector<Point> default_samples(const DeformationContext& ctx, int count, unsigned seed)
{
    const auto& params = ctx.series().parameters;
    if (params.empty() || count <= 0)
        return {Point{}};
    std::mt19937 rng(seed);
    std::uniform_int_distribution<int> num(-2, 2), den(7, 10);
    auto usable = [&](const Point& pt) {
        try {
            ctx.fiber(pt);
            return true;
        } catch (const MathError&) {
            return false;
        }
    };
    auto random_point = [&]() {
        for (int attempt = 0; attempt < 50; ++attempt) {
            Point pt;
            for (const auto& name : params)
                pt[name] = GR(mpq_class(num(rng), den(rng)));
            if (usable(pt))
                return pt;
        }
        throw MathError("no usable random sample point after 50 draws");
    };
    std::vector<Point> out;
    for (int i = 0; i + 1 < count; ++i) {
        Point pt{{params[i % params.size()], GR(mpq_class(1, 7) * (1 + static_cast<long>(i / params.size())))}};
        out.push_back(usable(pt) ? pt : random_point());
    }
    out.push_back(random_point());
    return out;
}

nlohmann::json TheoremVerdict::to_json() const
{
    nlohmann::json h = nlohmann::json::array();
    for (const auto& c : hypothesis_checks)
        h.push_back(c.to_json());
    nlohmann::json s = nlohmann::json::array();
    for (const auto& x : samples)
        s.push_back({{"point", x.point}, {"ok", x.ok}, {"certificates", x.certificates}});
    return {{"theorem", theorem},
            {"bidegree", {p, q}},
            {"r", r},
            {"hypothesis", hypothesis},
            {"hypothesis_checks", h},
            {"solver", solver},
            {"solver_certificates", solver_certificates},
            {"samples", s},
            {"conclusion", conclusion},
            {"holds", holds()},
            {"summary", summary},
            {"scope", scope}};
}

const std::vector<std::string> kTheoremIds = {"thm3.5", "coro3.6", "coro3.7", "coro4.3(1)", "coro4.3(2)", "coro4.7"};

namespace {

using Cells = std::vector<std::array<int, 3>>;

// (λ, p, q) for λ in [from, final page].
void add_cells(Cells& cells, const SpectralSequence& ss, int p, int q, int from)
{
    if (!ss.valid(p, q))
        return;
    for (int l = std::max(1, from); l <= ss.final_page(); ++l)
        cells.push_back({l, p, q});
}

// (p−i, q+i) for i ≥ first while valid.
std::vector<std::pair<int, int>> diagonal(const SpectralSequence& ss, int p, int q, int first)
{
    std::vector<std::pair<int, int>> out;
    for (int i = first; ss.valid(p - i, q + i); ++i)
        out.emplace_back(p - i, q + i);
    return out;
}

ConditionVerdict labeled(ConditionVerdict c, const std::string& what)
{
    c.condition = "vanishing of " + what;
    return c;
}

struct Pipeline {
    const DeformationContext& ctx;
    TheoremVerdict& v;
    int order;

    void hypothesis(ConditionVerdict c)
    {
        v.hypothesis = v.hypothesis && c.holds;
        v.hypothesis_checks.push_back(std::move(c));
    }

    // Unobstructedness of a canonical run, recorded as a certificate.
    bool unobstructed(const DeformationRun& run, const std::string& what)
    {
        bool ok = run.obstructions.unobstructed() && (run.series.terminated || run.series.verified_order >= order);
        std::string cert = what + ": ";
        if (!run.obstructions.unobstructed())
            cert += "obstructed at order " + std::to_string(run.obstructions.first_obstructed);
        else if (run.series.terminated)
            cert += "unobstructed, terminated";
        else
            cert += "unobstructed to order " + std::to_string(run.series.verified_order);
        v.solver_certificates.push_back(cert);
        return ok;
    }

    bool dolbeault(int p, int q)
    {
        if (!ctx.central().valid(p, q)) {
            v.solver_certificates.push_back("dolbeault " + pq(p, q) + ": empty bidegree");
            return true;
        }
        ClassFamily fam = harmonic_family(ctx.hodge(), p, q);
        return unobstructed(canonical_dolbeault(ctx, fam.generic(), p, q, order), "dolbeault " + pq(p, q));
    }

    bool filtered(int p, int q, int r)
    {
        if (!ctx.central().valid(p, q)) {
            v.solver_certificates.push_back(std::to_string(r) + "-filtered " + pq(p, q) + ": empty bidegree");
            return true;
        }
        ClassFamily fam = filtered_family(ctx.central(), ctx.hodge(), p, q, r);
        return unobstructed(canonical_r_filtered(ctx, fam.generic(), p, q, r, order),
                            std::to_string(r) + "-filtered " + pq(p, q));
    }

    bool solution(const FilteredSolution& s, const std::string& what)
    {
        bool ok = s.all_verified() && static_cast<int>(s.alpha.size()) == order + 1;
        v.solver_certificates.push_back(what + ": " + (ok ? "d-system solved and verified to order " + std::to_string(order)
                                                          : "construction incomplete"));
        for (const auto& n : s.notes)
            v.solver_certificates.push_back(what + ": " + n);
        return ok;
    }

    // Each sample's conclusion; fibers that cannot be built fail the sample.
    template <class Check>
    void samples(const std::vector<Point>& points, Check check)
    {
        v.conclusion = true;
        for (const auto& pt : points) {
            TheoremVerdict::Sample s;
            s.point = point_label(complete(ctx.series(), pt));
            try {
                s.ok = check(pt, s.certificates);
            } catch (const MathError& e) {
                s.ok = false;
                s.certificates.push_back(e.what());
            }
            v.conclusion = v.conclusion && s.ok;
            v.samples.push_back(std::move(s));
        }
        if (points.empty())
            v.conclusion = false;
    }

    bool vanish(const SpectralSequence& fib, const Cells& cells, std::vector<std::string>& certs)
    {
        ConditionVerdict c = check_drs_vanish(fib, cells);
        for (const auto& x : c.certificates)
            certs.push_back(x);
        return c.holds;
    }
};

}  // namespace

TheoremVerdict verify_theorem(const DeformationContext& ctx, const std::string& theorem, int p, int q,
                              const std::vector<Point>& samples, int order, int r)
{
    if (std::find(kTheoremIds.begin(), kTheoremIds.end(), theorem) == kTheoremIds.end())
        throw SchemaError("unknown theorem id '" + theorem + "'");
    const SpectralSequence& ss = ctx.central();
    if (!ss.valid(p, q))
        throw SchemaError("bidegree " + pq(p, q) + " out of range");
    TheoremVerdict v;
    v.theorem = theorem;
    v.p = p;
    v.q = q;
    v.r = theorem == "coro4.7" ? r : (theorem == "coro4.3(2)" ? 2 : 1);
    v.hypothesis = true;
    Pipeline pl{ctx, v, order};
    std::string conclusion_text;

    if (theorem == "thm3.5") {
        pl.hypothesis(check_thm35_hypothesis(ss, p, q));
        conclusion_text = "d_r^{p-i,q+i}(X_t) = 0 for all i >= 0, r >= 1";
        if (v.hypothesis) {
            bool ok = true;
            for (auto [a, b] : diagonal(ss, p, q, 0))
                ok = pl.dolbeault(a, b) && ok;
            ClassFamily fam = harmonic_family(ctx.hodge(), p, q);
            LiftResult lift = lift_to_d_closed(ctx, fam.generic(), p, q);
            ok = lift.ok && ok;
            if (lift.ok)
                ok = pl.solution(solve_lemma33(ctx, lift.lift, p, q, order), "filtered d-system " + pq(p, q)) && ok;
            v.solver = ok;
            pl.samples(samples, [&](const Point& pt, std::vector<std::string>& certs) {
                const SpectralSequence& fib = ctx.fiber(pt);
                Cells cells;
                for (auto [a, b] : diagonal(ss, p, q, 0))
                    add_cells(cells, fib, a, b, 1);
                return pl.vanish(fib, cells, certs);
            });
        }
    } else if (theorem == "coro3.6") {
        if (p != 0)
            throw SchemaError("coro3.6 concerns (0,q)-forms");
        Cells cells;
        add_cells(cells, ss, 0, q, 1);
        pl.hypothesis(labeled(check_drs_vanish(ss, cells), "d_r on " + pq(0, q) + ", r >= 1"));
        conclusion_text = q == 1 ? "dim V_{1,t}^{0,1} = h^{0,1} and h^{0,1}(X_t) = h^{0,1}(X)"
                                 : "dim V_{1,t}^{0,q} = h^{0,q}";
        if (v.hypothesis) {
            v.solver = pl.dolbeault(0, q);
            pl.samples(samples, [&](const Point& pt, std::vector<std::string>& certs) {
                VReport rep = v_dimensions(ctx, 0, q, pt, 1, order);
                bool ok = rep.dim(1) == rep.harmonic_dim;
                certs.push_back("dim V_1 = " + std::to_string(rep.dim(1)) + ", h = " + std::to_string(rep.harmonic_dim) +
                                (rep.caveat ? " (resolvent)" : ""));
                if (q == 1) {
                    std::size_t h = ctx.fiber(pt).cfug(0, 1, 1).dim, h0 = ss.cfug(0, 1, 1).dim;
                    certs.push_back("h^{0,1}(X_t) = " + std::to_string(h) + ", h^{0,1}(X) = " + std::to_string(h0));
                    ok = ok && h == h0;
                }
                return ok;
            });
        }
    } else if (theorem == "coro3.7") {
        pl.hypothesis(check_thm35_hypothesis(ss, p, q));
        if (q >= 1)
            pl.hypothesis(check_thm35_hypothesis(ss, p, q - 1));
        conclusion_text = "h^{p-i,q+i}(X_t) = h^{p-i,q+i}(X) for all i >= 0";
        if (v.hypothesis) {
            bool ok = true;
            for (auto [a, b] : diagonal(ss, p, q, 0))
                ok = pl.dolbeault(a, b) && ok;
            if (q >= 1)
                for (auto [a, b] : diagonal(ss, p, q - 1, 0))
                    ok = pl.dolbeault(a, b) && ok;
            v.solver = ok;
            pl.samples(samples, [&](const Point& pt, std::vector<std::string>& certs) {
                const SpectralSequence& fib = ctx.fiber(pt);
                bool ok = true;
                for (auto [a, b] : diagonal(ss, p, q, 0)) {
                    std::size_t h = fib.cfug(a, b, 1).dim, h0 = ss.cfug(a, b, 1).dim;
                    certs.push_back("h^" + pq(a, b) + ": " + std::to_string(h) + " vs " + std::to_string(h0));
                    ok = ok && h == h0;
                }
                return ok;
            });
        }
    } else if (theorem == "coro4.3(1)") {
        Cells here, below;
        add_cells(here, ss, p, q, 1);
        for (auto [a, b] : diagonal(ss, p, q, 1))
            add_cells(below, ss, a, b, 2);
        pl.hypothesis(labeled(check_drs_vanish(ss, here), "d_r on " + pq(p, q) + ", r >= 1"));
        pl.hypothesis(labeled(check_drs_vanish(ss, below), "d_r on (p-i,q+i), i >= 1, r >= 2"));
        ClassFamily fam = harmonic_family(ctx.hodge(), p, q);
        DeformationRun run = canonical_dolbeault(ctx, fam.generic(), p, q, order);
        bool unob = pl.unobstructed(run, "dolbeault " + pq(p, q));
        pl.hypothesis({"canonical deformations of " + pq(p, q) + " unobstructed", unob, {v.solver_certificates.back()}});
        conclusion_text = "d_lambda^{p,q}(X_t) = 0 for all lambda >= 1";
        if (v.hypothesis) {
            bool ok = pl.solution(canonical_filtered_solution(ctx, run.series, order), "canonical filtered solution");
            ok = pl.solution(solve_lemma41(ctx, run.series, order), "strand-matching d-system") && ok;
            v.solver = ok;
            pl.samples(samples, [&](const Point& pt, std::vector<std::string>& certs) {
                const SpectralSequence& fib = ctx.fiber(pt);
                Cells cells;
                add_cells(cells, fib, p, q, 1);
                bool ok = pl.vanish(fib, cells, certs);
                VReport rep = v_dimensions(ctx, p, q, pt, 1, order);
                certs.push_back("dim V_1 = " + std::to_string(rep.dim(1)) + " of h = " +
                                std::to_string(rep.harmonic_dim) + "; consistent with upper semi-continuity");
                return ok;
            });
        }
    } else if (theorem == "coro4.3(2)") {
        Cells here, next, below;
        add_cells(here, ss, p, q, 2);
        add_cells(next, ss, p + 1, q - 1, 1);
        for (auto [a, b] : diagonal(ss, p, q, 1))
            add_cells(below, ss, a, b, 3);
        pl.hypothesis(labeled(check_drs_vanish(ss, here), "d_r on " + pq(p, q) + ", r >= 2"));
        pl.hypothesis(labeled(check_drs_vanish(ss, next), "d_r on " + pq(p + 1, q - 1) + ", r >= 1"));
        pl.hypothesis(labeled(check_drs_vanish(ss, below), "d_r on (p-i,q+i), i >= 1, r >= 3"));
        bool up = pl.dolbeault(p + 1, q);
        pl.hypothesis({"canonical deformations of " + pq(p + 1, q) + " unobstructed", up, {v.solver_certificates.back()}});
        DeformationRun run;
        bool two = true;
        if (ss.valid(p + 1, q - 1)) {
            ClassFamily fam = filtered_family(ss, ctx.hodge(), p, q, 2);
            run = canonical_r_filtered(ctx, fam.generic(), p, q, 2, order);
            two = pl.unobstructed(run, "2-filtered " + pq(p, q));
        } else {
            ClassFamily fam = harmonic_family(ctx.hodge(), p, q);
            run = canonical_dolbeault(ctx, fam.generic(), p, q, order);
            two = pl.unobstructed(run, "2-filtered " + pq(p, q) + " (single strand)");
        }
        pl.hypothesis({"canonical deformations of 2-filtered " + pq(p, q) + " unobstructed", two,
                       {v.solver_certificates.back()}});
        conclusion_text = "d_lambda^{p,q}(X_t) = 0 for all lambda >= 2";
        if (v.hypothesis) {
            if (run.series.r == 2) {
                bool ok = pl.solution(canonical_filtered_solution(ctx, run.series, order), "canonical filtered solution");
                ok = pl.solution(solve_lemma41(ctx, run.series, order), "strand-matching d-system") && ok;
                v.solver = ok;
            } else {
                v.solver = pl.solution(canonical_filtered_solution(ctx, run.series, order), "canonical filtered solution");
            }
            pl.samples(samples, [&](const Point& pt, std::vector<std::string>& certs) {
                const SpectralSequence& fib = ctx.fiber(pt);
                Cells cells;
                add_cells(cells, fib, p, q, 2);
                bool ok = pl.vanish(fib, cells, certs);
                VReport rep = v_dimensions(ctx, p, q, pt, 2, order);
                certs.push_back("dim V_2 = " + std::to_string(rep.dim(2)) + "; consistent with upper semi-continuity");
                return ok;
            });
        }
    } else {  // coro4.7
        if (r < 1)
            throw SchemaError("coro4.7 needs r >= 1");
        Cells cells;
        for (auto [a, b] : diagonal(ss, p + r - 1, q - r + 1, 0))
            add_cells(cells, ss, a, b, 1);
        pl.hypothesis(labeled(check_drs_vanish(ss, cells),
                              "d_r on (p+" + std::to_string(r - 1) + "-i,q-" + std::to_string(r - 1) + "+i), i >= 0, r >= 1"));
        conclusion_text = std::to_string(r) + "-filtered (p-i,q+i)-forms are canonically unobstructed for all i >= 0";
        if (v.hypothesis) {
            bool ok = true;
            for (auto [a, b] : diagonal(ss, p, q, 0))
                ok = pl.filtered(a, b, r) && ok;
            v.solver = ok;
            v.conclusion = ok;
        }
    }

    if (!v.hypothesis) {
        v.solver = false;
        v.conclusion = false;
        v.summary = "hypothesis not satisfied; no conclusion claimed";
        v.scope = "no conclusion is drawn when the hypothesis fails";
        return v;
    }
    if (theorem == "coro4.7") {
        v.summary = v.conclusion ? "conclusion holds: " + conclusion_text + " (to order " + std::to_string(order) + ")"
                                 : "a run is obstructed; conclusion fails";
        v.scope = "unobstructedness is certified order by order up to N or by termination; no fiber is sampled";
        return v;
    }
    v.summary = !v.solver       ? "hypothesis holds but the constructive solver failed"
                : v.conclusion ? "conclusion holds at every sampled point: " + conclusion_text
                               : "conclusion fails at a sampled point: " + conclusion_text;
    v.scope = "checked at " + std::to_string(samples.size()) +
              " sampled parameter values; the statement for all small t is sampled, not proven";
    return v;
}

}  // namespace frol
