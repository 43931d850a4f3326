#include "frolicher/cli.hpp"

#include "frolicher/errors.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

namespace frol::cli {

namespace {

std::string trim(const std::string& s)
{
    auto b = s.find_first_not_of(" \t");
    auto e = s.find_last_not_of(" \t");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
}

int to_int(const std::string& s, const std::string& what)
{
    try {
        std::size_t used = 0;
        int v = std::stoi(trim(s), &used);
        if (used == trim(s).size())
            return v;
    } catch (const std::exception&) {
    }
    throw SchemaError("bad " + what + " '" + s + "'");
}

std::string pq_str(int p, int q) { return "(" + std::to_string(p) + "," + std::to_string(q) + ")"; }

template <class T>
std::string join(const std::vector<T>& xs, const std::string& sep = " ")
{
    std::ostringstream os;
    for (std::size_t i = 0; i < xs.size(); ++i)
        os << (i ? sep : "") << xs[i];
    return os.str();
}

Presentation load_presentation(const std::string& path)
{
    if (path.empty())
        throw SchemaError("--manifold is required");
    return Presentation::from_file(path);
}

BeltramiSeries load_series(const SessionConfig& cfg, const Exterior& ext)
{
    if (!cfg.beltrami)
        throw SchemaError(cfg.command + " needs --beltrami");
    return BeltramiSeries::from_file(ext, *cfg.beltrami);
}

void require_bidegrees(const SessionConfig& cfg, int n)
{
    if (cfg.bidegrees.empty())
        throw SchemaError(cfg.command + " needs --bidegree");
    for (auto [p, q] : cfg.bidegrees)
        if (p < 0 || q < 0 || p > n || q > n)
            throw SchemaError("bidegree " + pq_str(p, q) + " is outside 0.." + std::to_string(n));
}

int single_r(const SessionConfig& cfg)
{
    if (!cfg.r)
        return 1;
    if (cfg.r->first != cfg.r->second)
        throw SchemaError(cfg.command + " takes a single --r value");
    return cfg.r->first;
}

std::string grid(const std::map<std::pair<int, int>, std::size_t>& dims, int n, const std::string& indent)
{
    std::ostringstream os;
    for (int p = 0; p <= n; ++p) {
        os << indent << "p=" << p << ":";
        for (int q = 0; q <= n; ++q)
            os << " " << dims.at({p, q});
        os << "\n";
    }
    return os.str();
}

}  // namespace

std::pair<int, int> parse_range(const std::string& text)
{
    auto dots = text.find("..");
    std::pair<int, int> r;
    if (dots == std::string::npos)
        r = {to_int(text, "page"), to_int(text, "page")};
    else
        r = {to_int(text.substr(0, dots), "page range"), to_int(text.substr(dots + 2), "page range")};
    if (r.first < 1 || r.second < r.first)
        throw SchemaError("bad page range '" + text + "'");
    return r;
}

std::vector<std::pair<int, int>> parse_bidegrees(const std::string& text)
{
    std::vector<std::pair<int, int>> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ';')) {
        if (trim(item).empty())
            continue;
        auto comma = item.find(',');
        if (comma == std::string::npos)
            throw SchemaError("bad bidegree '" + item + "' (expected p,q)");
        out.emplace_back(to_int(item.substr(0, comma), "bidegree"), to_int(item.substr(comma + 1), "bidegree"));
    }
    if (out.empty())
        throw SchemaError("empty --bidegree");
    return out;
}

Point parse_point(const std::string& text)
{
    Point pt;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        auto eq = item.find('=');
        if (eq == std::string::npos)
            throw SchemaError("bad sample point entry '" + item + "' (expected name=value)");
        std::string name = trim(item.substr(0, eq));
        if (name.empty() || pt.count(name))
            throw SchemaError("bad or repeated parameter in '" + text + "'");
        pt[name] = GR::parse(trim(item.substr(eq + 1)));
    }
    return pt;
}

Outcome cmd_validate(const SessionConfig& cfg)
{
    Outcome o;
    Presentation pres = load_presentation(cfg.manifold);
    ValidationReport v = validate(pres);
    o.report = {{"command", "validate"}, {"manifold", pres.name}, {"validation", v.to_json()}};
    std::ostringstream t;
    t << "manifold " << pres.name << " (n = " << pres.n << "): " << (v.ok ? "OK" : "INVALID") << "\n";
    for (const auto& i : v.issues)
        t << "  " << i.kind << ": " << i.message << "\n";
    if (!v.ok) {
        o.exit_code = 1;
        o.table = t.str();
        return o;
    }
    t << "  metric: " << (v.default_metric ? "identity (default)" : "given") << "\n";
    t << "  nonzero brackets:\n";
    for (const auto& b : v.brackets)
        t << "    " << b << "\n";
    Nilmanifold m(pres);
    auto betti = m.betti_numbers();
    o.report["betti"] = betti;
    t << "  betti numbers: " << join(betti) << "\n";

    if (cfg.beltrami) {
        BeltramiSeries s = load_series(cfg, m.ext());
        auto homog = s.homogeneity_issues();
        MaurerCartanReport mc = check_maurer_cartan(m, s, cfg.order);
        nlohmann::json fam = {{"name", s.name}, {"homogeneity_issues", homog}, {"maurer_cartan", mc.to_json()}};
        t << "family " << s.name << ":\n";
        for (const auto& h : homog)
            t << "  not homogeneous: " << h << "\n";
        if (mc.ok) {
            t << "  Maurer-Cartan holds to order " << mc.verified_order << "\n";
        } else {
            t << "  Maurer-Cartan fails at order " << mc.first_failure << "\n";
            for (const auto& r : mc.residuals)
                t << "    " << r << "\n";
        }
        bool ok = mc.ok && homog.empty();
        if (cfg.at) {
            IntegrabilityReport ir = check_integrability_at(m, s, *cfg.at);
            fam["integrability"] = ir.to_json();
            fam["point"] = point_label(*cfg.at);
            t << "  involutive at " << point_label(*cfg.at) << ": " << (ir.ok ? "yes" : "no");
            if (!ir.ok)
                t << " (pair " << ir.failing_pair << ", residual " << ir.residual << ")";
            t << "\n";
            ok = ok && ir.ok;
        }
        o.report["family"] = fam;
        if (!ok)
            o.exit_code = 1;
    }
    o.table = t.str();
    return o;
}

Outcome cmd_pages(const SessionConfig& cfg)
{
    Outcome o;
    Nilmanifold m(load_presentation(cfg.manifold));
    const int n = m.n();
    DoubleComplex cx = m.complex();
    if (cfg.at)
        cx = deformed_complex(m, load_series(cfg, m.ext()), *cfg.at);
    SpectralSequence ss(cx);
    auto [lo, hi] = cfg.r.value_or(std::pair<int, int>{1, n + 1});
    DegenerationReport rep = degeneration_report(ss, hi);
    o.report = {{"command", "pages"}, {"r_range", {lo, hi}}, {"degeneration", rep.to_json()}};

    std::ostringstream t;
    t << "pages " << rep.label << ", r = " << lo << ".." << hi << "\n";
    for (const auto& note : rep.notes)
        t << "  note: " << note << "\n";
    const int last_grid = std::max(lo, std::min(hi, rep.degenerates_at));
    for (int r = lo; r <= last_grid; ++r) {
        std::map<std::pair<int, int>, std::size_t> dims;
        for (const auto& [pq, ds] : rep.dims)
            dims[pq] = ds.at(r - 1);
        t << "E_" << r << " dimensions (row p, column q):\n" << grid(dims, n, "  ");
    }
    if (last_grid < hi)
        t << "E_r = E_" << last_grid << " for r >= " << last_grid << "\n";

    std::vector<std::string> nz;
    for (const auto& c : rep.d_nonzero)
        if (c[0] >= lo && c[0] <= hi)
            nz.push_back("r=" + std::to_string(c[0]) + " at " + pq_str(c[1], c[2]));
    if (nz.empty())
        t << "d_r = 0 for r = " << lo << ".." << hi << "\n";
    else
        t << "d_r != 0: " << join(nz, ", ") << "\n";
    t << "degenerates at E_" << rep.degenerates_at << "\n";
    t << "E_inf total dimensions: " << join(rep.einf_totals) << "\n";
    t << "betti numbers:          " << join(rep.betti) << (rep.einf_matches_betti ? "  (match)" : "  (MISMATCH)")
      << "\n";

    if (!cfg.bidegrees.empty()) {
        require_bidegrees(cfg, n);
        const Exterior& ext = cx.ext;
        nlohmann::json cells = nlohmann::json::array();
        for (auto [p, q] : cfg.bidegrees)
            for (int r = lo; r <= hi; ++r) {
                const CfugCell& c = ss.cfug(p, q, r);
                std::vector<std::string> basis, reps, bs;
                for (Key k : c.basis)
                    basis.push_back(ext.render(k));
                for (const auto& v : c.reps)
                    reps.push_back(Form::from_vec(v, c.basis).str(ext));
                for (const auto& v : c.b.vectors())
                    bs.push_back(Form::from_vec(v, c.basis).str(ext));
                cells.push_back({{"p", p},
                                 {"q", q},
                                 {"r", r},
                                 {"dim", c.dim},
                                 {"basis", basis},
                                 {"z_tilde", c.z.to_json()},
                                 {"b_tilde", c.b.to_json()},
                                 {"representatives", reps},
                                 {"target", {c.target_p, c.target_q}},
                                 {"dr_rank", c.dr_rank}});
                t << "E_" << r << "^" << pq_str(p, q) << ": dim " << c.dim << "\n";
                t << "  Z~ basis (mod B~): " << (reps.empty() ? "-" : join(reps, ", ")) << "\n";
                t << "  B~ basis: " << (bs.empty() ? "-" : join(bs, ", ")) << "\n";
                t << "  d_" << r << " to " << pq_str(c.target_p, c.target_q) << ": rank " << c.dr_rank << "\n";
            }
        o.report["cells"] = cells;
    }
    o.table = t.str();
    if (!rep.einf_matches_betti && !cx.deformed)
        o.exit_code = 1;
    return o;
}

Outcome cmd_deform(const SessionConfig& cfg)
{
    Outcome o;
    Nilmanifold m(load_presentation(cfg.manifold));
    require_bidegrees(cfg, m.n());
    const int r = single_r(cfg);
    BeltramiSeries s = load_series(cfg, m.ext());
    DeformationContext ctx(std::move(m), std::move(s));
    const Exterior& ext = ctx.ext();
    o.report = {{"command", "deform"}, {"family", ctx.series().name}, {"order", cfg.order}, {"r", r}};
    nlohmann::json runs = nlohmann::json::array();
    std::ostringstream t;
    t << "deform " << ctx.manifold().presentation().name << " along " << ctx.series().name << ", order "
      << cfg.order << (r == 1 ? ", canonical Dolbeault" : ", canonical " + std::to_string(r) + "-filtered") << "\n";
    for (auto [p, q] : cfg.bidegrees) {
        ClassFamily fam = r == 1 ? harmonic_family(ctx.hodge(), p, q)
                                 : filtered_family(ctx.central(), ctx.hodge(), p, q, r);
        nlohmann::json entry = {{"bidegree", {p, q}}, {"classes", fam.symbols}};
        t << pq_str(p, q) << ": ";
        if (fam.basis.empty()) {
            entry["run"] = nullptr;
            t << "no classes to deform\n";
            runs.push_back(entry);
            continue;
        }
        t << "classes " << join(fam.symbols, ", ") << "\n";
        DeformationRun run = r == 1 ? canonical_dolbeault(ctx, fam.generic(), p, q, cfg.order)
                                    : canonical_r_filtered(ctx, fam.generic(), p, q, r, cfg.order);
        entry["run"] = run.to_json(ext);
        const auto& series = run.series;
        if (!run.obstructions.unobstructed()) {
            t << "  obstructed at order " << run.obstructions.first_obstructed << ":\n";
            for (const auto& poly : run.obstructions.polynomials())
                t << "    " << poly << "\n";
        } else if (series.terminated) {
            t << "  unobstructed; series terminated at order " << series.orders.size() - 1 << "\n";
        } else {
            t << "  unobstructed through order " << series.verified_order << " (series not terminated)\n";
        }
        runs.push_back(entry);
    }
    o.report["runs"] = runs;
    o.table = t.str();
    return o;
}

Outcome cmd_check(const SessionConfig& cfg)
{
    Outcome o;
    Nilmanifold m(load_presentation(cfg.manifold));
    require_bidegrees(cfg, m.n());
    const int r = single_r(cfg);
    BeltramiSeries s = load_series(cfg, m.ext());
    DeformationContext ctx(std::move(m), std::move(s));
    std::vector<Point> samples = cfg.at ? std::vector<Point>{*cfg.at} : default_samples(ctx, cfg.samples, cfg.seed);
    std::vector<std::string> labels;
    for (const auto& pt : samples)
        labels.push_back(point_label(pt));
    o.report = {{"command", "check"}, {"theorem", cfg.theorem}, {"seed", cfg.seed}, {"samples", labels},
                {"order", cfg.order}};
    nlohmann::json verdicts = nlohmann::json::array();
    std::ostringstream t;
    for (auto [p, q] : cfg.bidegrees) {
        TheoremVerdict v = verify_theorem(ctx, cfg.theorem, p, q, samples, cfg.order, r);
        verdicts.push_back(v.to_json());
        t << v.theorem << " at " << pq_str(p, q) << ": " << (v.holds() ? "holds" : "NOT CERTIFIED") << "\n";
        t << "  hypothesis: " << (v.hypothesis ? "OK" : "fails") << "\n";
        for (const auto& c : v.hypothesis_checks) {
            t << "    " << c.condition << ": " << (c.holds ? "yes" : "no") << "\n";
            if (!c.holds)
                for (const auto& cert : c.certificates)
                    t << "      " << cert << "\n";
        }
        if (v.hypothesis) {
            t << "  solver: " << (v.solver ? "OK" : "fails") << "\n";
            for (const auto& cert : v.solver_certificates)
                t << "    " << cert << "\n";
            for (const auto& smp : v.samples) {
                t << "  sample " << smp.point << ": " << (smp.ok ? "OK" : "fails") << "\n";
                for (const auto& cert : smp.certificates)
                    t << "    " << cert << "\n";
            }
            t << "  conclusion: " << (v.conclusion ? "OK" : "fails") << "\n";
        }
        t << "  " << v.summary << "\n";
        if (!v.scope.empty())
            t << "  scope: " << v.scope << "\n";
        if (!v.holds())
            o.exit_code = 1;
    }
    o.report["verdicts"] = verdicts;
    o.table = t.str();
    return o;
}

int execute(const SessionConfig& cfg, std::ostream& out, std::ostream& err)
{
    Outcome o;
    try {
        if (cfg.format != "table" && cfg.format != "json")
            throw SchemaError("--format must be json or table");
        if (cfg.order < 0 || cfg.samples < 0)
            throw SchemaError("--order and --samples must be non-negative");
        if (cfg.command == "validate")
            o = cmd_validate(cfg);
        else if (cfg.command == "pages")
            o = cmd_pages(cfg);
        else if (cfg.command == "deform")
            o = cmd_deform(cfg);
        else if (cfg.command == "check")
            o = cmd_check(cfg);
        else
            throw SchemaError("unknown command '" + cfg.command + "'");
    } catch (const SchemaError& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    } catch (const MathError& e) {
        err << "mathematical check failed: " << e.what() << "\n";
        return 1;
    } catch (const InternalError& e) {
        err << "internal error: " << e.what() << "\n";
        return 1;
    }
    std::string text = cfg.format == "json" ? o.report.dump(2) + "\n" : o.table;
    if (cfg.out.empty()) {
        out << text;
    } else {
        std::ofstream f(cfg.out);
        if (!(f << text)) {
            err << "error: cannot write '" << cfg.out << "'\n";
            return 2;
        }
    }
    return o.exit_code;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Frolicher spectral sequences and deformations of nilmanifolds"};
    app.require_subcommand(1);
    SessionConfig cfg;
    std::string r_text, bideg_text, at_text, beltrami;

    auto common = [&](CLI::App* sc) {
        sc->add_option("--manifold", cfg.manifold, "structure equations (JSON or text)")->required();
        sc->add_option("--beltrami", beltrami, "Beltrami family (JSON)");
        sc->add_option("--r", r_text, "page or page range, e.g. 2 or 1..4");
        sc->add_option("--bidegree", bideg_text, "p,q[;p,q...]");
        sc->add_option("--order", cfg.order, "truncation order")->capture_default_str();
        sc->add_option("--at", at_text, "sample point name=rational[,...]");
        sc->add_option("--samples", cfg.samples, "number of sample points")->capture_default_str();
        sc->add_option("--format", cfg.format, "json or table")
            ->check(CLI::IsMember({"json", "table"}))
            ->capture_default_str();
        sc->add_option("--seed", cfg.seed, "seed for random sample points")->capture_default_str();
        sc->add_option("--out", cfg.out, "write the report here instead of stdout");
    };
    common(app.add_subcommand("validate", "check a presentation and optionally a Beltrami family"));
    common(app.add_subcommand("pages", "Frolicher spectral sequence pages"));
    common(app.add_subcommand("deform", "canonical deformations of classes and their obstructions"));
    CLI::App* check = app.add_subcommand("check", "verify a theorem pipeline");
    check->add_option("theorem", cfg.theorem, "one of " + join(kTheoremIds, ", "))
        ->required()
        ->check(CLI::IsMember(kTheoremIds));
    common(check);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e, out, err);
        return code == 0 ? 0 : 2;
    }
    cfg.command = app.get_subcommands().front()->get_name();
    try {
        if (!beltrami.empty())
            cfg.beltrami = beltrami;
        if (!r_text.empty())
            cfg.r = parse_range(r_text);
        if (!bideg_text.empty())
            cfg.bidegrees = parse_bidegrees(bideg_text);
        if (!at_text.empty())
            cfg.at = parse_point(at_text);
    } catch (const SchemaError& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    }
    return execute(cfg, out, err);
}

}  // namespace frol::cli
