#include "frolicher/beltrami.hpp"

#include "frolicher/errors.hpp"

#include <bit>
#include <fstream>
#include <sstream>

namespace frol {

VectorForm VectorForm::term(Key jbar, int target, const Poly& c)
{
    VectorForm v;
    v.add(jbar, target, c);
    return v;
}

void VectorForm::add(Key jbar, int target, const Poly& c)
{
    if (c.is_zero())
        return;
    auto [it, inserted] = terms_.emplace(Index{jbar, target}, c);
    if (!inserted) {
        it->second += c;
        if (it->second.is_zero())
            terms_.erase(it);
    }
}

Poly VectorForm::coefficient(Key jbar, int target) const
{
    auto it = terms_.find({jbar, target});
    return it == terms_.end() ? Poly() : it->second;
}

VectorForm& VectorForm::operator+=(const VectorForm& o)
{
    for (const auto& [ix, c] : o.terms_)
        add(ix.first, ix.second, c);
    return *this;
}

VectorForm& VectorForm::operator-=(const VectorForm& o)
{
    for (const auto& [ix, c] : o.terms_)
        add(ix.first, ix.second, -c);
    return *this;
}

VectorForm& VectorForm::operator*=(const Poly& c)
{
    Map out;
    for (const auto& [ix, v] : terms_) {
        Poly p = v * c;
        if (!p.is_zero())
            out.emplace(ix, std::move(p));
    }
    terms_ = std::move(out);
    return *this;
}

int VectorForm::q(const Exterior& ext) const
{
    int q = 0;
    bool first = true;
    for (const auto& [ix, c] : terms_) {
        int d = ext.q(ix.first);
        if (first)
            q = d;
        else if (q != d)
            return -1;
        first = false;
    }
    return q;
}

VectorForm VectorForm::specialize(const std::map<std::string, GR>& point) const
{
    VectorForm r;
    for (const auto& [ix, c] : terms_)
        r.add(ix.first, ix.second, c.specialize(point));
    return r;
}

VectorForm VectorForm::homogeneous_part(int k, const std::set<int>& family) const
{
    VectorForm r;
    for (const auto& [ix, c] : terms_)
        r.add(ix.first, ix.second, c.homogeneous_part(k, family));
    return r;
}

std::string VectorForm::str(const Exterior& ext) const
{
    if (terms_.empty())
        return "0";
    std::string out;
    bool first = true;
    for (const auto& [ix, c] : terms_) {
        std::string basis = ext.render(ix.first) + "*e[" + std::to_string(ix.second) + "]";
        std::string cs = c.str();
        bool negative = false;
        std::string body;
        if (c.terms().size() == 1) {
            if (cs[0] == '-') {
                negative = true;
                cs = cs.substr(1);
            }
            body = cs == "1" ? basis : cs + "*" + basis;
        } else {
            body = "(" + cs + ")*" + basis;
        }
        out += first ? (negative ? "-" + body : body) : (negative ? " - " : " + ") + body;
        first = false;
    }
    return out;
}

nlohmann::json VectorForm::to_json(const Exterior& ext) const
{
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& [ix, c] : terms_) {
        nlohmann::json jbar = nlohmann::json::array();
        for (int b = 0; b < ext.n(); ++b)
            if (ext.anti(ix.first) & (1u << b))
                jbar.push_back(b + 1);
        nlohmann::json jb = jbar.size() == 1 ? jbar[0] : jbar;
        arr.push_back({{"jbar", jb}, {"e", ix.second}, {"poly", c.str()}});
    }
    return arr;
}

VectorForm VectorForm::from_json(const Exterior& ext, const nlohmann::json& terms)
{
    if (!terms.is_array())
        throw SchemaError("vector form terms must be a list");
    VectorForm v;
    for (const auto& t : terms) {
        if (!t.is_object() || !t.contains("jbar") || !t.contains("e"))
            throw SchemaError("vector form term needs 'jbar' and 'e': " + t.dump());
        std::vector<int> idx;
        if (t.at("jbar").is_array())
            idx = t.at("jbar").get<std::vector<int>>();
        else
            idx.push_back(t.at("jbar").get<int>());
        Key key = 0;
        int sign = 1;
        for (int b : idx) {
            if (b < 1 || b > ext.n())
                throw SchemaError("jbar index out of range: " + t.dump());
            int s = wedge_sign(key, ext.anti_generator(b));
            if (s == 0)
                throw SchemaError("repeated jbar index: " + t.dump());
            sign *= s;
            key |= ext.anti_generator(b);
        }
        int e = t.at("e").get<int>();
        if (e < 1 || e > ext.n())
            throw SchemaError("target index out of range: " + t.dump());
        Poly c = t.contains("poly") ? Poly::from_json(t.at("poly")) : Poly(1);
        v.add(key, e, c * GR(sign));
    }
    return v;
}

BeltramiSeries BeltramiSeries::from_json(const Exterior& ext, const nlohmann::json& j)
{
    if (!j.is_object())
        throw SchemaError("Beltrami file must be a JSON object");
    BeltramiSeries s;
    try {
        s.name = j.value("name", std::string());
        s.parameters = j.value("parameters", std::vector<std::string>());
        for (const auto& p : s.parameters)
            declare_parameter(p);
        if (!j.contains("orders") || !j.at("orders").is_array())
            throw SchemaError("Beltrami file needs an 'orders' list");
        for (const auto& o : j.at("orders")) {
            int order = o.at("order").get<int>();
            if (order < 1)
                throw SchemaError("orders start at 1");
            if (static_cast<int>(s.orders.size()) < order)
                s.orders.resize(order);
            s.orders[order - 1] += VectorForm::from_json(ext, o.at("terms"));
        }
        if (j.contains("tail") && !j.at("tail").is_null()) {
            Tail t;
            t.ratio = Poly::from_json(j.at("tail").at("ratio"));
            t.from_order = j.at("tail").value("from_order", 2);
            if (t.from_order < 1 || t.from_order > static_cast<int>(s.orders.size()))
                throw SchemaError("tail.from_order must refer to a stored order");
            s.tail = t;
        }
    } catch (const nlohmann::json::exception& e) {
        throw SchemaError(std::string("Beltrami schema: ") + e.what());
    }
    for (const auto& vf : s.orders)
        if (!vf.is_zero() && vf.q(ext) != 1)
            throw SchemaError("Beltrami orders must be (0,1)-forms valued in T^{1,0}");
    // Undeclared variables in coefficients are taken as parameters as well.
    std::set<int> declared;
    for (const auto& p : s.parameters)
        declared.insert(find_parameter(p));
    for (const auto& vf : s.orders)
        for (const auto& [ix, c] : vf.terms())
            for (int v : c.variables())
                if (!declared.count(v)) {
                    declared.insert(v);
                    s.parameters.push_back(parameter_name(v));
                }
    return s;
}

BeltramiSeries BeltramiSeries::from_file(const Exterior& ext, const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw SchemaError("cannot open '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(buf.str());
    } catch (const nlohmann::json::exception& e) {
        throw SchemaError("'" + path + "': " + e.what());
    }
    return from_json(ext, j);
}

nlohmann::json BeltramiSeries::to_json(const Exterior& ext) const
{
    nlohmann::json orders_json = nlohmann::json::array();
    for (std::size_t k = 0; k < orders.size(); ++k)
        orders_json.push_back({{"order", k + 1}, {"terms", orders[k].to_json(ext)}});
    nlohmann::json j = {{"name", name}, {"parameters", parameters}, {"orders", orders_json}};
    if (tail)
        j["tail"] = {{"ratio", tail->ratio.str()}, {"from_order", tail->from_order}};
    return j;
}

VectorForm BeltramiSeries::phi(int j) const
{
    if (j < 1)
        return {};
    if (tail && j >= tail->from_order)
        return orders[tail->from_order - 1] * tail->ratio.pow(j - tail->from_order);
    if (j > static_cast<int>(orders.size()))
        return {};
    return orders[j - 1];
}

int BeltramiSeries::last_order() const
{
    if (tail && !tail->ratio.is_zero() && !orders[tail->from_order - 1].is_zero())
        return -1;
    int last = 0;
    for (std::size_t k = 0; k < orders.size(); ++k)
        if (!orders[k].is_zero())
            last = static_cast<int>(k) + 1;
    if (tail && last > tail->from_order)
        last = tail->from_order;
    return last;
}

std::set<int> BeltramiSeries::parameter_ids() const
{
    std::set<int> ids;
    for (const auto& p : parameters)
        ids.insert(declare_parameter(p));
    return ids;
}

std::vector<std::string> BeltramiSeries::homogeneity_issues() const
{
    std::vector<std::string> out;
    auto fam = parameter_ids();
    for (std::size_t k = 0; k < orders.size(); ++k)
        for (const auto& [ix, c] : orders[k].terms())
            if (c.homogeneous_part(static_cast<int>(k) + 1, fam) != c) {
                out.push_back("order " + std::to_string(k + 1) + " has a coefficient " + c.str() +
                              " that is not homogeneous of that degree");
                break;
            }
    if (tail && !tail->ratio.is_zero() && tail->ratio.homogeneous_part(1, fam) != tail->ratio)
        out.push_back("tail ratio " + tail->ratio.str() + " is not homogeneous of degree 1");
    return out;
}

namespace {

// Declared parameters missing from the point are taken to be 0.
std::map<std::string, GR> complete(const BeltramiSeries& s, std::map<std::string, GR> point)
{
    for (const auto& p : s.parameters)
        point.emplace(p, GR());
    return point;
}

}  // namespace

GR BeltramiSeries::ratio_at(const std::map<std::string, GR>& given) const
{
    if (!tail)
        return GR();
    Poly r = tail->ratio.specialize(complete(*this, given));
    if (!r.is_constant())
        throw MathError("sample point leaves tail ratio symbolic: " + r.str());
    return r.constant_term();
}

VectorForm BeltramiSeries::sum_at(const std::map<std::string, GR>& given) const
{
    auto point = complete(*this, given);
    VectorForm total;
    int stop = tail ? tail->from_order - 1 : static_cast<int>(orders.size());
    for (int j = 1; j <= stop; ++j)
        total += orders[j - 1].specialize(point);
    if (tail) {
        GR rho = ratio_at(point);
        if (rho.norm2() >= 1)
            throw MathError("geometric tail diverges at the sample point: ratio = " + rho.str());
        GR factor = (GR(1) - rho).inverse();
        total += orders[tail->from_order - 1].specialize(point) * Poly(factor);
    }
    for (const auto& [ix, c] : total.terms())
        if (!c.is_constant())
            throw MathError("sample point leaves a Beltrami coefficient symbolic: " + c.str());
    return total;
}

Form contract(const Exterior& ext, const VectorForm& phi, const Form& alpha)
{
    Form out;
    for (const auto& [ix, c] : phi.terms()) {
        Key jbar = ix.first;
        if (std::popcount(jbar) != 1 || ext.hol(jbar) != 0)
            throw MathError("contraction needs a Beltrami differential of type (0,1)");
        Key hbit = ext.hol_generator(ix.second);
        for (const auto& [k, a] : alpha.terms()) {
            if (!(k & hbit))
                continue;
            Key rest = k & ~hbit;
            int s1 = (std::popcount(k & (hbit - 1)) & 1) ? -1 : 1;
            int s2 = wedge_sign(jbar, rest);
            if (s2 == 0)
                continue;
            out.add(jbar | rest, c * a * GR(s1 * s2));
        }
    }
    return out;
}

Form lie10(const DoubleComplex& cx, const VectorForm& phi, const Form& alpha)
{
    return contract(cx.ext, phi, cx.del.apply(alpha)) - cx.del.apply(contract(cx.ext, phi, alpha));
}

Form exp_contract(const Exterior& ext, const VectorForm& phi, const Form& alpha, int sign)
{
    Form total = alpha, power = alpha;
    for (int m = 1; m <= ext.n() && !power.is_zero(); ++m) {
        power = contract(ext, phi, power) * Poly(GR(mpq_class(sign, m)));
        total += power;
    }
    return total;
}

Form d_phi(const DoubleComplex& cx, const VectorForm& phi, const Form& alpha)
{
    return cx.d.apply(alpha) - lie10(cx, phi, alpha);
}

Form dbar_phi(const DoubleComplex& cx, const VectorForm& phi, const Form& alpha)
{
    return cx.dbar.apply(alpha) - lie10(cx, phi, alpha);
}

Form exp_series_order(const Exterior& ext, const BeltramiSeries& series, const std::vector<Form>& parts, int order,
                      int sign)
{
    // E_m[k] = Σ_j i_{φ_j} E_{m-1}[k-j], E_0 = parts.
    std::vector<VectorForm> phis(order + 1);
    for (int j = 1; j <= order; ++j)
        phis[j] = series.phi(j);
    std::vector<Form> prev(order + 1);
    for (int k = 0; k <= order && k < static_cast<int>(parts.size()); ++k)
        prev[k] = parts[k];
    Form result;
    mpq_class factorial = 1;
    for (int m = 1; m <= ext.n(); ++m) {
        std::vector<Form> cur(order + 1);
        bool any = false;
        for (int k = 1; k <= order; ++k)
            for (int j = 1; j <= k; ++j) {
                if (phis[j].is_zero() || prev[k - j].is_zero())
                    continue;
                cur[k] += contract(ext, phis[j], prev[k - j]);
            }
        for (const auto& f : cur)
            any = any || !f.is_zero();
        if (!any)
            break;
        factorial *= m;
        mpq_class coef = ((m & 1) && sign < 0 ? mpq_class(-1) : mpq_class(1)) / factorial;
        result += cur[order] * Poly(GR(coef));
        prev = std::move(cur);
    }
    return result;
}

Form lie_series_order(const DoubleComplex& cx, const BeltramiSeries& series, const std::vector<Form>& parts, int order)
{
    Form out;
    for (int j = 1; j <= order; ++j) {
        int k = order - j;
        if (k >= static_cast<int>(parts.size()) || parts[k].is_zero())
            continue;
        VectorForm p = series.phi(j);
        if (!p.is_zero())
            out += lie10(cx, p, parts[k]);
    }
    return out;
}

VectorForm dbar_vector(const Nilmanifold& m, const VectorForm& phi)
{
    const int n = m.n();
    const DoubleComplex& cx = m.complex();
    VectorForm out;
    for (const auto& [ix, c] : phi.terms()) {
        auto [jbar, i] = ix;
        Form dj = cx.dbar.apply(Form::monomial(jbar));
        for (const auto& [k, a] : dj.terms())
            out.add(k, i, c * a);
        int sign = (std::popcount(jbar) & 1) ? -1 : 1;
        for (int j = 1; j <= n; ++j)
            for (int t = 1; t <= n; ++t) {
                GR s = m.structure_constant(n + j - 1, i - 1, t - 1);
                if (s.is_zero())
                    continue;
                int w = wedge_sign(jbar, cx.ext.anti_generator(j));
                if (w == 0)
                    continue;
                out.add(jbar | cx.ext.anti_generator(j), t, c * Poly(s * GR(sign * w)));
            }
    }
    return out;
}

VectorForm bracket(const Nilmanifold& m, const VectorForm& phi, const VectorForm& psi)
{
    const int n = m.n();
    const Exterior& ext = m.ext();
    auto anti_index = [&](Key k) {
        if (std::popcount(k) != 1 || ext.hol(k) != 0)
            throw MathError("bracket needs g^{1,0}-valued (0,1)-forms");
        return std::countr_zero(k) - n + 1;
    };
    // Coefficient of ω̄^c in L_{e_x} ω̄^b: −(ē_b-component of [e_x, ē_c]).
    auto lie_coeff = [&](int x, int b, int c) { return -m.structure_constant(x - 1, n + c - 1, n + b - 1); };
    VectorForm out;
    for (const auto& [ia, ca] : phi.terms()) {
        int a = anti_index(ia.first), i = ia.second;
        for (const auto& [ib, cb] : psi.terms()) {
            int b = anti_index(ib.first), k = ib.second;
            Poly coef = ca * cb;
            Key ka = ext.anti_generator(a), kb = ext.anti_generator(b);
            int s = wedge_sign(ka, kb);
            if (s != 0)
                for (int t = 1; t <= n; ++t) {
                    GR c = m.structure_constant(i - 1, k - 1, t - 1);
                    if (!c.is_zero())
                        out.add(ka | kb, t, coef * Poly(c * GR(s)));
                }
            for (int c = 1; c <= n; ++c) {
                Key kc = ext.anti_generator(c);
                GR l2 = lie_coeff(i, b, c);
                int s2 = wedge_sign(ka, kc);
                if (!l2.is_zero() && s2 != 0)
                    out.add(ka | kc, k, coef * Poly(l2 * GR(s2)));
                GR l3 = lie_coeff(k, a, c);
                int s3 = wedge_sign(kc, kb);
                if (!l3.is_zero() && s3 != 0)
                    out.add(kc | kb, i, coef * Poly(l3 * GR(-s3)));
            }
        }
    }
    return out;
}

nlohmann::json MaurerCartanReport::to_json() const
{
    return {{"ok", ok}, {"verified_order", verified_order}, {"first_failure", first_failure}, {"residuals", residuals}};
}

MaurerCartanReport check_maurer_cartan(const Nilmanifold& m, const BeltramiSeries& series, int max_order)
{
    MaurerCartanReport rep;
    std::vector<VectorForm> phis(max_order + 1);
    for (int j = 1; j <= max_order; ++j)
        phis[j] = series.phi(j);
    for (int k = 1; k <= max_order; ++k) {
        VectorForm rhs;
        for (int j = 1; j < k; ++j)
            rhs += bracket(m, phis[j], phis[k - j]);
        VectorForm residual = dbar_vector(m, phis[k]) - rhs * Poly(GR(mpq_class(1, 2)));
        if (!residual.is_zero()) {
            if (rep.ok) {
                rep.ok = false;
                rep.first_failure = k;
            }
            rep.residuals.push_back("order " + std::to_string(k) + ": " + residual.str(m.ext()));
        } else if (rep.ok) {
            rep.verified_order = k;
        }
    }
    return rep;
}

nlohmann::json IntegrabilityReport::to_json() const
{
    return {{"ok", ok}, {"failing_pair", failing_pair}, {"residual", residual}};
}

IntegrabilityReport check_integrability(const Nilmanifold& m, const VectorForm& phi)
{
    const int n = m.n();
    std::vector<Vec> frame(n, Vec(2 * n));
    for (int b = 1; b <= n; ++b) {
        frame[b - 1][n + b - 1] = GR(1);
        for (int k = 1; k <= n; ++k) {
            Poly c = phi.coefficient(m.ext().anti_generator(b), k);
            if (!c.is_constant())
                throw MathError("integrability check needs a specialized Beltrami differential");
            frame[b - 1][k - 1] = -c.constant_term();
        }
    }
    IntegrabilityReport rep;
    for (int a = 0; a < n; ++a)
        for (int b = a + 1; b < n; ++b) {
            Vec br = m.bracket(frame[a], frame[b]);
            Vec res = br;
            for (int c = 0; c < n; ++c)
                if (!br[n + c].is_zero())
                    res = res - br[n + c] * frame[c];
            if (!is_zero(res)) {
                rep.ok = false;
                rep.failing_pair = "(" + std::to_string(a + 1) + "," + std::to_string(b + 1) + ")";
                std::string s;
                for (int c = 0; c < 2 * n; ++c)
                    if (!res[c].is_zero())
                        s += (s.empty() ? "" : " + ") + std::string("(") + res[c].str() + ")*" + frame_name(n, c);
                rep.residual = s;
                return rep;
            }
        }
    return rep;
}

IntegrabilityReport check_integrability_at(const Nilmanifold& m, const BeltramiSeries& series,
                                           const std::map<std::string, GR>& point)
{
    return check_integrability(m, series.sum_at(point));
}

SparseOp lie10_operator(const DoubleComplex& cx, const VectorForm& phi)
{
    SparseOp op(cx.ext.size());
    for (Key k = 0; k < cx.ext.size(); ++k) {
        Form img = lie10(cx, phi, Form::monomial(k));
        for (const auto& [dst, c] : img.terms()) {
            if (!c.is_constant())
                throw InternalError("lie10_operator needs a specialized Beltrami differential");
            op.add(k, dst, c.constant_term());
        }
    }
    return op;
}

}  // namespace frol
