#include "frolicher/complex.hpp"

#include "frolicher/errors.hpp"

#include <bit>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace frol {

namespace {

std::string trim(const std::string& s)
{
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a])))
        ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1])))
        --b;
    return s.substr(a, b - a);
}

// Splits "-w[1,2] + 3*w[1,-2]" at top-level signs, keeping the sign with
// each piece.
std::vector<std::string> split_terms(const std::string& rhs)
{
    std::vector<std::string> out;
    std::string cur;
    int depth = 0;
    for (char c : rhs) {
        if (c == '(' || c == '[')
            ++depth;
        if (c == ')' || c == ']')
            --depth;
        if ((c == '+' || c == '-') && depth == 0 && !trim(cur).empty() && trim(cur).back() != '*') {
            out.push_back(trim(cur));
            cur.clear();
        }
        cur += c;
    }
    if (!trim(cur).empty())
        out.push_back(trim(cur));
    return out;
}

// The largest generator index mentioned in a right-hand side.
int max_index(const std::string& rhs)
{
    int best = 0;
    for (std::size_t pos = rhs.find("w["); pos != std::string::npos; pos = rhs.find("w[", pos + 1)) {
        std::size_t end = rhs.find(']', pos);
        if (end == std::string::npos)
            throw SchemaError("unterminated monomial in '" + rhs + "'");
        std::stringstream ss(rhs.substr(pos + 2, end - pos - 2));
        std::string item;
        while (std::getline(ss, item, ','))
            try {
                best = std::max(best, std::abs(std::stoi(item)));
            } catch (const std::exception&) {
                throw SchemaError("bad index '" + item + "'");
            }
    }
    return best;
}

Form parse_rhs(const Exterior& ext, const std::string& rhs)
{
    Form f;
    for (std::string term : split_terms(rhs)) {
        std::string sign_free = term;
        GR sign(1);
        while (!sign_free.empty() && (sign_free[0] == '+' || sign_free[0] == '-')) {
            if (sign_free[0] == '-')
                sign = -sign;
            sign_free = trim(sign_free.substr(1));
        }
        if (sign_free == "0")
            continue;
        std::size_t w = sign_free.find("w[");
        if (w == std::string::npos)
            throw SchemaError("term '" + term + "' has no monomial");
        std::size_t end = sign_free.find(']', w);
        if (end == std::string::npos || trim(sign_free.substr(end + 1)) != "")
            throw SchemaError("malformed term '" + term + "'");
        std::string prefix = trim(sign_free.substr(0, w));
        GR coeff(1);
        if (!prefix.empty()) {
            if (prefix.back() != '*')
                throw SchemaError("expected '*' between coefficient and monomial in '" + term + "'");
            coeff = GR::parse(trim(prefix.substr(0, prefix.size() - 1)));
        }
        auto [key, s] = ext.parse_monomial(sign_free.substr(w, end - w + 1));
        if (s == 0)
            throw SchemaError("repeated index in '" + term + "'");
        f.add(key, Poly(coeff * sign * GR(s)));
    }
    return f;
}

void require_two_forms(const Exterior& ext, const Form& f, int k)
{
    for (const auto& [key, c] : f.terms())
        if (ext.degree(key) != 2)
            throw SchemaError("d w" + std::to_string(k) + " must be a 2-form, found " + ext.render(key));
}

std::string vector_str(int n, const Vec& v)
{
    Form f;
    std::string out;
    bool first = true;
    for (int b = 0; b < 2 * n; ++b) {
        if (v[b].is_zero())
            continue;
        std::string c = Poly(v[b]).str();
        bool neg = c[0] == '-';
        if (neg)
            c = c.substr(1);
        std::string body = (c == "1" ? "" : c + "*") + frame_name(n, b);
        out += first ? (neg ? "-" + body : body) : (neg ? " - " : " + ") + body;
        first = false;
    }
    return first ? "0" : out;
}

}  // namespace

std::string frame_name(int n, int b)
{
    return b < n ? "e[" + std::to_string(b + 1) + "]" : "e[-" + std::to_string(b - n + 1) + "]";
}

Presentation Presentation::from_text(const std::string& text)
{
    struct Line {
        int k;
        std::string rhs;
    };
    std::vector<Line> lines;
    Presentation pres;
    int declared_n = 0, inferred_n = 0;
    std::stringstream ss(text);
    std::string raw;
    int lineno = 0;
    while (std::getline(ss, raw)) {
        ++lineno;
        std::string line = trim(raw.substr(0, raw.find('#')));
        if (line.empty())
            continue;
        std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw SchemaError("line " + std::to_string(lineno) + ": expected '='");
        std::string lhs = trim(line.substr(0, eq)), rhs = trim(line.substr(eq + 1));
        if (lhs == "n") {
            try {
                declared_n = std::stoi(rhs);
            } catch (const std::exception&) {
                throw SchemaError("line " + std::to_string(lineno) + ": bad dimension");
            }
            continue;
        }
        if (lhs == "name") {
            pres.name = rhs;
            continue;
        }
        std::string compact;
        for (char c : lhs)
            if (!std::isspace(static_cast<unsigned char>(c)))
                compact += c;
        if (compact.size() < 3 || compact.substr(0, 2) != "dw")
            throw SchemaError("line " + std::to_string(lineno) + ": expected 'd wK = ...'");
        int k;
        try {
            k = std::stoi(compact.substr(2));
        } catch (const std::exception&) {
            throw SchemaError("line " + std::to_string(lineno) + ": bad generator index");
        }
        if (k < 1)
            throw SchemaError("line " + std::to_string(lineno) + ": bad generator index");
        inferred_n = std::max({inferred_n, k, max_index(rhs)});
        lines.push_back({k, rhs});
    }
    pres.n = declared_n ? declared_n : inferred_n;
    if (pres.n < 1)
        throw SchemaError("presentation defines no generators");
    if (pres.n < inferred_n)
        throw SchemaError("an index exceeds the declared dimension");
    Exterior ext(pres.n);
    pres.structure.assign(pres.n, Form());
    for (const auto& l : lines) {
        pres.structure[l.k - 1] += parse_rhs(ext, l.rhs);
        require_two_forms(ext, pres.structure[l.k - 1], l.k);
    }
    return pres;
}

Presentation Presentation::from_json(const nlohmann::json& j)
{
    if (!j.is_object())
        throw SchemaError("manifold file must be a JSON object");
    if (j.contains("text")) {
        Presentation p = from_text(j.at("text").get<std::string>());
        if (j.contains("name"))
            p.name = j.at("name").get<std::string>();
        return p;
    }
    Presentation pres;
    try {
        pres.name = j.value("name", std::string());
        if (!j.contains("n") || !j.at("n").is_number_integer())
            throw SchemaError("manifold needs an integer 'n'");
        pres.n = j.at("n").get<int>();
        Exterior ext(pres.n);
        pres.structure.assign(pres.n, Form());
        if (j.contains("structure")) {
            for (const auto& gen : j.at("structure")) {
                int k = gen.at("k").get<int>();
                if (k < 1 || k > pres.n)
                    throw SchemaError("generator index " + std::to_string(k) + " out of range");
                Form f;
                if (gen.contains("text"))
                    f = parse_rhs(ext, gen.at("text").get<std::string>());
                for (const auto& t : gen.value("terms", nlohmann::json::array())) {
                    GR c = gr_from_json(t.at("coeff"));
                    std::string kind = t.at("kind").get<std::string>();
                    int i = t.at("i").get<int>(), jj = t.at("j").get<int>();
                    if (i < 1 || jj < 1 || i > pres.n || jj > pres.n)
                        throw SchemaError("index out of range in dw" + std::to_string(k));
                    Key a, b;
                    if (kind == "20") {
                        a = ext.hol_generator(i);
                        b = ext.hol_generator(jj);
                    } else if (kind == "11") {
                        a = ext.hol_generator(i);
                        b = ext.anti_generator(jj);
                    } else if (kind == "02") {
                        a = ext.anti_generator(i);
                        b = ext.anti_generator(jj);
                    } else {
                        throw SchemaError("unknown term kind '" + kind + "'");
                    }
                    int s = wedge_sign(a, b);
                    if (s == 0)
                        throw SchemaError("repeated index in dw" + std::to_string(k));
                    f.add(a | b, Poly(c * GR(s)));
                }
                require_two_forms(ext, f, k);
                pres.structure[k - 1] += f;
            }
        }
        if (j.contains("metric") && !j.at("metric").is_null()) {
            const auto& m = j.at("metric");
            if (!m.is_array() || m.size() != static_cast<std::size_t>(pres.n))
                throw SchemaError("metric must be an n×n matrix");
            Matrix h(pres.n, pres.n);
            for (int r = 0; r < pres.n; ++r) {
                if (!m[r].is_array() || m[r].size() != static_cast<std::size_t>(pres.n))
                    throw SchemaError("metric must be an n×n matrix");
                for (int c = 0; c < pres.n; ++c)
                    h(r, c) = gr_from_json(m[r][c]);
            }
            pres.metric = h;
        }
    } catch (const nlohmann::json::exception& e) {
        throw SchemaError(std::string("manifold schema: ") + e.what());
    }
    return pres;
}

Presentation Presentation::from_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw SchemaError("cannot open '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    std::string s = buf.str();
    std::string t = trim(s);
    if (!t.empty() && t[0] == '{') {
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(s);
        } catch (const nlohmann::json::exception& e) {
            throw SchemaError("'" + path + "': " + e.what());
        }
        Presentation pres = from_json(j);
        if (pres.name.empty())
            pres.name = std::filesystem::path(path).stem().string();
        return pres;
    }
    Presentation pres = from_text(s);
    if (pres.name.empty())
        pres.name = std::filesystem::path(path).stem().string();
    return pres;
}

nlohmann::json Presentation::to_json() const
{
    Exterior ext(n);
    nlohmann::json structure_json = nlohmann::json::array();
    for (int k = 1; k <= n; ++k) {
        nlohmann::json terms = nlohmann::json::array();
        for (const auto& [key, c] : structure[k - 1].terms()) {
            unsigned h = ext.hol(key), a = ext.anti(key);
            int first = std::countr_zero(key), second = std::countr_zero(key & (key - 1));
            std::string kind = std::popcount(h) == 2 ? "20" : (std::popcount(a) == 2 ? "02" : "11");
            auto idx = [&](int bit) { return bit < n ? bit + 1 : bit - n + 1; };
            terms.push_back({{"coeff", gr_to_json(c.constant_term())}, {"kind", kind}, {"i", idx(first)}, {"j", idx(second)}});
        }
        if (!terms.empty())
            structure_json.push_back({{"k", k}, {"terms", terms}});
    }
    nlohmann::json j = {{"name", name}, {"n", n}, {"structure", structure_json}};
    if (metric) {
        nlohmann::json m = nlohmann::json::array();
        for (int r = 0; r < n; ++r) {
            nlohmann::json row = nlohmann::json::array();
            for (int c = 0; c < n; ++c)
                row.push_back(gr_to_json((*metric)(r, c)));
            m.push_back(row);
        }
        j["metric"] = m;
    }
    return j;
}

Form conjugate(const Exterior& ext, const Form& f)
{
    Form r;
    for (const auto& [k, c] : f.terms()) {
        if (!c.is_constant())
            throw InternalError("conjugation of a parameter-dependent form");
        int s;
        Key ck = ext.conj_key(k, s);
        r.add(ck, Poly(c.constant_term().conj() * GR(s)));
    }
    return r;
}

SparseOp derivation_from_generators(const Exterior& ext, const std::vector<Form>& frame_d)
{
    const int m = 2 * ext.n();
    SparseOp d(ext.size());
    for (Key key = 0; key < ext.size(); ++key) {
        int position = 0;
        for (int b = 0; b < m; ++b) {
            Key bit = Key{1} << b;
            if (!(key & bit))
                continue;
            Key prefix = key & (bit - 1), suffix = key & ~((bit << 1) - 1);
            GR sign((position & 1) ? -1 : 1);
            for (const auto& [u, c] : frame_d[b].terms()) {
                int s1 = wedge_sign(prefix, u);
                if (s1 == 0)
                    continue;
                int s2 = wedge_sign(prefix | u, suffix);
                if (s2 == 0)
                    continue;
                d.add(key, prefix | u | suffix, c.constant_term() * sign * GR(s1 * s2));
            }
            ++position;
        }
    }
    return d;
}

namespace {

std::vector<Form> frame_differentials(const Exterior& ext, const Presentation& pres)
{
    std::vector<Form> fd(2 * pres.n);
    for (int k = 0; k < pres.n; ++k) {
        fd[k] = pres.structure[k];
        fd[pres.n + k] = conjugate(ext, pres.structure[k]);
    }
    return fd;
}

Matrix metric_or_identity(const Presentation& pres) { return pres.metric ? *pres.metric : Matrix::identity(pres.n); }

}  // namespace

nlohmann::json ValidationReport::to_json() const
{
    nlohmann::json is = nlohmann::json::array();
    for (const auto& i : issues)
        is.push_back({{"kind", i.kind}, {"message", i.message}});
    return {{"ok", ok}, {"issues", is}, {"brackets", brackets}, {"metric", default_metric ? "identity (default)" : "given"}};
}

ValidationReport validate(const Presentation& pres)
{
    ValidationReport rep;
    Exterior ext(pres.n);
    if (static_cast<int>(pres.structure.size()) != pres.n)
        throw SchemaError("structure list does not match n");
    for (int k = 1; k <= pres.n; ++k)
        for (const auto& [key, c] : pres.structure[k - 1].terms())
            if (ext.q(key) == 2)
                rep.issues.push_back({"integrability", "d w" + std::to_string(k) + " has a (0,2) component " + ext.render(key)});

    auto fd = frame_differentials(ext, pres);
    SparseOp d = derivation_from_generators(ext, fd);
    for (int k = 1; k <= pres.n; ++k) {
        Form dd = d.apply(pres.structure[k - 1]);
        if (!dd.is_zero())
            rep.issues.push_back({"jacobi", "d(d w" + std::to_string(k) + ") = " + dd.str(ext) + " is not zero (Jacobi identity fails for generator w" + std::to_string(k) + ")"});
    }

    if (pres.metric) {
        rep.default_metric = false;
        const Matrix& h = *pres.metric;
        if (h.rows() != static_cast<std::size_t>(pres.n) || h.cols() != static_cast<std::size_t>(pres.n))
            rep.issues.push_back({"metric", "metric is not n×n"});
        else if (!is_hermitian(h))
            rep.issues.push_back({"metric", "metric is not Hermitian"});
        else
            for (int m = 1; m <= pres.n; ++m) {
                Matrix minor(m, m);
                for (int r = 0; r < m; ++r)
                    for (int c = 0; c < m; ++c)
                        minor(r, c) = h(r, c);
                GR det = minor.determinant();
                if (!det.is_real() || sgn(det.re()) <= 0) {
                    rep.issues.push_back({"metric", "leading principal minor of order " + std::to_string(m) + " is not positive"});
                    break;
                }
            }
    }

    const int m = 2 * pres.n;
    for (int a = 0; a < m; ++a)
        for (int b = a + 1; b < m; ++b) {
            Vec v(m);
            Key pair = (Key{1} << a) | (Key{1} << b);
            for (int c = 0; c < m; ++c) {
                Poly coef = fd[c].coefficient(pair);
                if (!coef.is_zero())
                    v[c] = -coef.constant_term();
            }
            if (!is_zero(v))
                rep.brackets.push_back("[" + frame_name(pres.n, a) + "," + frame_name(pres.n, b) + "] = " + vector_str(pres.n, v));
        }
    rep.ok = rep.issues.empty();
    return rep;
}

Matrix DoubleComplex::gram(const std::vector<Key>& basis) const
{
    const std::size_t sz = basis.size();
    Matrix g(sz, sz);
    const int n = ext.n();
    bool identity = metric == Matrix::identity(n);
    for (std::size_t a = 0; a < sz; ++a)
        for (std::size_t b = 0; b < sz; ++b) {
            Key ka = basis[a], kb = basis[b];
            if (identity) {
                if (ka == kb)
                    g(a, b) = GR(1);
                continue;
            }
            if (ext.p(ka) != ext.p(kb) || ext.q(ka) != ext.q(kb))
                continue;
            auto minor = [&](unsigned rows, unsigned cols, bool conj) {
                std::vector<int> ri, ci;
                for (int i = 0; i < n; ++i) {
                    if (rows & (1u << i))
                        ri.push_back(i);
                    if (cols & (1u << i))
                        ci.push_back(i);
                }
                Matrix sub(ri.size(), ci.size());
                for (std::size_t r = 0; r < ri.size(); ++r)
                    for (std::size_t c = 0; c < ci.size(); ++c)
                        sub(r, c) = conj ? metric(ri[r], ci[c]).conj() : metric(ri[r], ci[c]);
                return ri.empty() ? GR(1) : sub.determinant();
            };
            GR h = minor(ext.hol(ka), ext.hol(kb), false) * minor(ext.anti(ka), ext.anti(kb), true);
            // G(a,b) = ⟨basis_b, basis_a⟩ so that ⟨x,y⟩ = y^H G x.
            g(a, b) = h.conj();
        }
    return g;
}

std::vector<std::string> DoubleComplex::structural_failures() const
{
    std::vector<std::string> out;
    if (!(d * d).is_zero())
        out.push_back("d^2");
    if (!(del * del).is_zero())
        out.push_back("del^2");
    if (!(dbar * dbar).is_zero())
        out.push_back("dbar^2");
    if (!(del * dbar + dbar * del).is_zero())
        out.push_back("del*dbar+dbar*del");
    return out;
}

Nilmanifold::Nilmanifold(Presentation pres) : pres_(std::move(pres))
{
    ValidationReport rep = validate(pres_);
    if (!rep.ok) {
        std::string msg = "invalid presentation";
        for (const auto& i : rep.issues)
            msg += "; " + i.kind + ": " + i.message;
        throw MathError(msg);
    }
    Exterior ext(pres_.n);
    frame_d_ = frame_differentials(ext, pres_);
    complex_.ext = ext;
    complex_.d = derivation_from_generators(ext, frame_d_);
    complex_.del = SparseOp(ext.size());
    complex_.dbar = SparseOp(ext.size());
    for (Key k = 0; k < ext.size(); ++k)
        for (const auto& [dst, c] : complex_.d.image(k)) {
            if (ext.p(dst) == ext.p(k) + 1)
                complex_.del.add(k, dst, c);
            else if (ext.q(dst) == ext.q(k) + 1)
                complex_.dbar.add(k, dst, c);
            else
                throw InternalError("d leaves the bidegrees (p+1,q), (p,q+1)");
        }
    complex_.metric = metric_or_identity(pres_);
    complex_.label = pres_.name.empty() ? "central fiber" : pres_.name;
    if (!pres_.metric)
        complex_.notes.push_back("metric: identity on the coframe (default)");

    const int m = 2 * pres_.n;
    c_.assign(static_cast<std::size_t>(m) * m * m, GR());
    for (int a = 0; a < m; ++a)
        for (int b = 0; b < m; ++b) {
            if (a == b)
                continue;
            int lo = std::min(a, b), hi = std::max(a, b);
            Key pair = (Key{1} << lo) | (Key{1} << hi);
            for (int c = 0; c < m; ++c) {
                Poly coef = frame_d_[c].coefficient(pair);
                if (coef.is_zero())
                    continue;
                GR v = -coef.constant_term();
                c_[(static_cast<std::size_t>(a) * m + b) * m + c] = a < b ? v : -v;
            }
        }
}

GR Nilmanifold::structure_constant(int a, int b, int c) const
{
    const int m = 2 * pres_.n;
    return c_[(static_cast<std::size_t>(a) * m + b) * m + c];
}

Vec Nilmanifold::bracket(const Vec& x, const Vec& y) const
{
    const int m = 2 * pres_.n;
    Vec out(m);
    for (int a = 0; a < m; ++a) {
        if (x[a].is_zero())
            continue;
        for (int b = 0; b < m; ++b) {
            if (y[b].is_zero())
                continue;
            GR xy = x[a] * y[b];
            for (int c = 0; c < m; ++c) {
                const GR& s = structure_constant(a, b, c);
                if (!s.is_zero())
                    out[c] += xy * s;
            }
        }
    }
    return out;
}

std::vector<int> Nilmanifold::betti_numbers() const
{
    const Exterior& ext = complex_.ext;
    const int top = 2 * pres_.n;
    std::vector<std::size_t> rank(top + 2, 0);
    for (int k = 0; k < top; ++k)
        rank[k] = complex_.d.block(ext.degree_keys(k + 1), ext.degree_keys(k)).rank();
    std::vector<int> b(top + 1);
    for (int k = 0; k <= top; ++k) {
        std::size_t dim = ext.degree_keys(k).size();
        std::size_t prev = k > 0 ? rank[k - 1] : 0;
        b[k] = static_cast<int>(dim - rank[k] - prev);
    }
    return b;
}

}  // namespace frol
