#include "frolicher/exterior.hpp"

#include "frolicher/errors.hpp"

#include <algorithm>
#include <bit>
#include <cctype>

namespace frol {

int wedge_sign(Key a, Key b)
{
    if (a & b)
        return 0;
    // Count pairs (x in a, y in b) with x above y.
    int swaps = 0;
    for (Key rest = b; rest; rest &= rest - 1) {
        Key low = rest & (~rest + 1);
        swaps += std::popcount(a & ~((low << 1) - 1));
    }
    return (swaps & 1) ? -1 : 1;
}

namespace {

std::vector<unsigned> subsets_lex(int n, int k)
{
    // Ascending index lists in lexicographic order, encoded as masks.
    std::vector<unsigned> out;
    std::vector<int> idx(k);
    for (int i = 0; i < k; ++i)
        idx[i] = i;
    while (true) {
        unsigned m = 0;
        for (int i : idx)
            m |= 1u << i;
        out.push_back(m);
        int pos = k - 1;
        while (pos >= 0 && idx[pos] == n - k + pos)
            --pos;
        if (pos < 0)
            break;
        ++idx[pos];
        for (int i = pos + 1; i < k; ++i)
            idx[i] = idx[i - 1] + 1;
    }
    return out;
}

}  // namespace

Exterior::Exterior(int n) : n_(n)
{
    if (n < 1 || n > kMaxDimension)
        throw SchemaError("complex dimension must be between 1 and " + std::to_string(kMaxDimension));
    pieces_.assign(n + 1, std::vector<std::vector<Key>>(n + 1));
    index_.assign(size(), 0);
    for (int p = 0; p <= n; ++p) {
        auto hs = subsets_lex(n, p);
        for (int q = 0; q <= n; ++q) {
            auto as = subsets_lex(n, q);
            auto& piece = pieces_[p][q];
            for (unsigned h : hs)
                for (unsigned a : as) {
                    index_[make(h, a)] = piece.size();
                    piece.push_back(make(h, a));
                }
        }
    }
}

int Exterior::p(Key k) const { return std::popcount(hol(k)); }
int Exterior::q(Key k) const { return std::popcount(anti(k)); }

const std::vector<Key>& Exterior::piece(int p, int q) const
{
    static const std::vector<Key> empty;
    if (p < 0 || q < 0 || p > n_ || q > n_)
        return empty;
    return pieces_[p][q];
}

std::vector<Key> Exterior::window(int p, int k) const
{
    std::vector<Key> out;
    for (int lam = std::max(p, 0); lam <= k; ++lam) {
        const auto& pc = piece(lam, k - lam);
        out.insert(out.end(), pc.begin(), pc.end());
    }
    return out;
}

Key Exterior::conj_key(Key k, int& sign) const
{
    int a = p(k), b = q(k);
    sign = ((a * b) & 1) ? -1 : 1;
    return make(anti(k), hol(k));
}

std::string Exterior::render(Key k) const
{
    if (k == 0)
        return "1";
    std::string s = "w[";
    bool first = true;
    for (int b = 0; b < 2 * n_; ++b)
        if (k & (Key{1} << b)) {
            if (!first)
                s += ",";
            first = false;
            s += b < n_ ? std::to_string(b + 1) : "-" + std::to_string(b - n_ + 1);
        }
    return s + "]";
}

std::string Exterior::digits(Key k) const
{
    std::string s;
    for (int b = 0; b < 2 * n_; ++b)
        if (k & (Key{1} << b))
            s += std::to_string(b < n_ ? b + 1 : b - n_ + 1);
    return s;
}

std::pair<Key, int> Exterior::parse_monomial(const std::string& text) const
{
    std::string t;
    for (char c : text)
        if (!std::isspace(static_cast<unsigned char>(c)))
            t += c;
    if (t == "1")
        return {0, 1};
    if (t.size() < 3 || t[0] != 'w' || t[1] != '[' || t.back() != ']')
        throw SchemaError("malformed monomial '" + text + "'");
    std::string body = t.substr(2, t.size() - 3);
    Key key = 0;
    int sign = 1;
    std::size_t pos = 0;
    while (pos <= body.size()) {
        std::size_t comma = body.find(',', pos);
        std::string item = body.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
        if (item.empty())
            throw SchemaError("empty index in monomial '" + text + "'");
        int v;
        try {
            std::size_t used = 0;
            v = std::stoi(item, &used);
            if (used != item.size())
                throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw SchemaError("bad index '" + item + "' in monomial '" + text + "'");
        }
        int a = std::abs(v);
        if (v == 0 || a > n_)
            throw SchemaError("index out of range in monomial '" + text + "'");
        Key bit = v > 0 ? hol_generator(a) : anti_generator(a);
        int s = wedge_sign(key, bit);
        if (s == 0)
            return {0, 0};
        sign *= s;
        key |= bit;
        if (comma == std::string::npos)
            break;
        pos = comma + 1;
    }
    return {key, sign};
}

Form Form::monomial(Key k, const Poly& c)
{
    Form f;
    f.add(k, c);
    return f;
}

Poly Form::coefficient(Key k) const
{
    auto it = terms_.find(k);
    return it == terms_.end() ? Poly() : it->second;
}

void Form::add(Key k, const Poly& c)
{
    if (c.is_zero())
        return;
    auto [it, inserted] = terms_.emplace(k, c);
    if (!inserted) {
        it->second += c;
        if (it->second.is_zero())
            terms_.erase(it);
    }
}

Form& Form::operator+=(const Form& o)
{
    for (const auto& [k, c] : o.terms_)
        add(k, c);
    return *this;
}

Form& Form::operator-=(const Form& o)
{
    for (const auto& [k, c] : o.terms_)
        add(k, -c);
    return *this;
}

Form& Form::operator*=(const Poly& c)
{
    if (c.is_zero()) {
        terms_.clear();
        return *this;
    }
    for (auto it = terms_.begin(); it != terms_.end();) {
        it->second *= c;
        if (it->second.is_zero())
            it = terms_.erase(it);
        else
            ++it;
    }
    return *this;
}

Form Form::operator-() const
{
    Form r = *this;
    for (auto& [k, c] : r.terms_)
        c = -c;
    return r;
}

Form Form::component(const Exterior& ext, int p, int q) const
{
    Form r;
    for (const auto& [k, c] : terms_)
        if (ext.p(k) == p && ext.q(k) == q)
            r.terms_.emplace(k, c);
    return r;
}

Form Form::filtration(const Exterior& ext, int p) const
{
    Form r;
    for (const auto& [k, c] : terms_)
        if (ext.p(k) >= p)
            r.terms_.emplace(k, c);
    return r;
}

Form Form::degree_part(const Exterior& ext, int k) const
{
    Form r;
    for (const auto& [key, c] : terms_)
        if (ext.degree(key) == k)
            r.terms_.emplace(key, c);
    return r;
}

bool Form::is_pure(const Exterior& ext, int p, int q) const
{
    for (const auto& [k, c] : terms_)
        if (ext.p(k) != p || ext.q(k) != q)
            return false;
    return true;
}

Form Form::specialize(const std::map<std::string, GR>& point) const
{
    Form r;
    for (const auto& [k, c] : terms_)
        r.add(k, c.specialize(point));
    return r;
}

Form Form::homogeneous_part(int k, const std::set<int>& family) const
{
    Form r;
    for (const auto& [key, c] : terms_)
        r.add(key, c.homogeneous_part(k, family));
    return r;
}

bool Form::is_constant() const
{
    for (const auto& [k, c] : terms_)
        if (!c.is_constant())
            return false;
    return true;
}

std::set<int> Form::variables() const
{
    std::set<int> vs;
    for (const auto& [k, c] : terms_) {
        auto v = c.variables();
        vs.insert(v.begin(), v.end());
    }
    return vs;
}

namespace {

std::vector<long> positions(const std::vector<Key>& basis)
{
    Key top = 0;
    for (Key k : basis)
        top = std::max(top, k);
    std::vector<long> pos(basis.empty() ? 0 : top + 1, -1);
    for (std::size_t i = 0; i < basis.size(); ++i)
        pos[basis[i]] = static_cast<long>(i);
    return pos;
}

long lookup(const std::vector<long>& pos, Key k) { return k < pos.size() ? pos[k] : -1; }

}  // namespace

std::map<Exponents, Vec> Form::expand(const std::vector<Key>& basis) const
{
    auto pos = positions(basis);
    std::map<Exponents, Vec> out;
    for (const auto& [k, c] : terms_) {
        long i = lookup(pos, k);
        if (i < 0)
            throw InternalError("form has a component outside the requested basis");
        for (const auto& [e, z] : c.terms()) {
            auto it = out.find(e);
            if (it == out.end())
                it = out.emplace(e, Vec(basis.size())).first;
            it->second[i] += z;
        }
    }
    return out;
}

Form Form::assemble(const std::map<Exponents, Vec>& parts, const std::vector<Key>& basis)
{
    Form r;
    for (const auto& [e, v] : parts)
        for (std::size_t i = 0; i < v.size(); ++i)
            if (!v[i].is_zero())
                r.add(basis[i], Poly::monomial(e, v[i]));
    return r;
}

Vec Form::to_vec(const std::vector<Key>& basis) const
{
    auto pos = positions(basis);
    Vec v(basis.size());
    for (const auto& [k, c] : terms_) {
        if (!c.is_constant())
            throw InternalError("to_vec on a parameter-dependent form");
        long i = lookup(pos, k);
        if (i < 0)
            throw InternalError("form has a component outside the requested basis");
        v[i] = c.constant_term();
    }
    return v;
}

Form Form::from_vec(const Vec& v, const std::vector<Key>& basis)
{
    Form r;
    for (std::size_t i = 0; i < v.size(); ++i)
        if (!v[i].is_zero())
            r.terms_.emplace(basis[i], Poly(v[i]));
    return r;
}

std::string Form::str(const Exterior& ext) const
{
    if (terms_.empty())
        return "0";
    std::string out;
    bool first = true;
    for (const auto& [k, c] : terms_) {
        std::string mono = ext.render(k);
        std::string cs = c.str();
        bool negative = false;
        std::string body;
        if (c.terms().size() == 1) {
            if (cs[0] == '-') {
                negative = true;
                cs = cs.substr(1);
            }
            body = (cs == "1") ? mono : (k == 0 ? cs : cs + "*" + mono);
        } else {
            body = "(" + cs + ")" + (k == 0 ? "" : "*" + mono);
        }
        if (first)
            out = negative ? "-" + body : body;
        else
            out += (negative ? " - " : " + ") + body;
        first = false;
    }
    return out;
}

nlohmann::json Form::to_json(const Exterior& ext) const
{
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& [k, c] : terms_)
        arr.push_back({{"monomial", ext.render(k)}, {"coeff", c.str()}});
    return arr;
}

Form Form::from_json(const Exterior& ext, const nlohmann::json& j)
{
    if (!j.is_array())
        throw SchemaError("form must be a list of {monomial, coeff}");
    Form f;
    for (const auto& t : j) {
        if (!t.is_object() || !t.contains("monomial"))
            throw SchemaError("form term needs a 'monomial'");
        auto [k, s] = ext.parse_monomial(t.at("monomial").get<std::string>());
        Poly c = t.contains("coeff") ? Poly::from_json(t.at("coeff")) : Poly(1);
        f.add(k, c * GR(s));
    }
    return f;
}

Form wedge(const Form& a, const Form& b)
{
    Form r;
    for (const auto& [ka, ca] : a.terms())
        for (const auto& [kb, cb] : b.terms()) {
            int s = wedge_sign(ka, kb);
            if (s != 0)
                r.add(ka | kb, ca * cb * GR(s));
        }
    return r;
}

void SparseOp::add(Key src, Key dst, const GR& c)
{
    if (c.is_zero())
        return;
    auto& col = cols_.at(src);
    for (auto it = col.begin(); it != col.end(); ++it)
        if (it->first == dst) {
            it->second += c;
            if (it->second.is_zero())
                col.erase(it);
            return;
        }
    col.emplace_back(dst, c);
}

void SparseOp::set_image(Key src, Column col) { cols_.at(src) = std::move(col); }

Form SparseOp::apply(const Form& f) const
{
    Form r;
    for (const auto& [k, c] : f.terms())
        for (const auto& [dst, z] : cols_.at(k))
            r.add(dst, c * z);
    return r;
}

Vec SparseOp::apply_vec(const Vec& v, const std::vector<Key>& domain, const std::vector<Key>& codomain) const
{
    auto pos = positions(codomain);
    Vec out(codomain.size());
    for (std::size_t j = 0; j < domain.size(); ++j) {
        if (v[j].is_zero())
            continue;
        for (const auto& [dst, z] : cols_.at(domain[j])) {
            long i = lookup(pos, dst);
            if (i < 0)
                throw InternalError("operator leaves the requested codomain");
            out[i] += v[j] * z;
        }
    }
    return out;
}

Matrix SparseOp::block(const std::vector<Key>& rows, const std::vector<Key>& cols) const
{
    auto pos = positions(rows);
    Matrix m(rows.size(), cols.size());
    for (std::size_t j = 0; j < cols.size(); ++j)
        for (const auto& [dst, z] : cols_.at(cols[j])) {
            long i = lookup(pos, dst);
            if (i >= 0)
                m(i, j) += z;
        }
    return m;
}

bool SparseOp::maps_into(const std::vector<Key>& cols, const std::vector<Key>& rows) const
{
    auto pos = positions(rows);
    for (Key c : cols)
        for (const auto& [dst, z] : cols_.at(c))
            if (lookup(pos, dst) < 0)
                return false;
    return true;
}

SparseOp SparseOp::operator+(const SparseOp& o) const
{
    SparseOp r = *this;
    for (std::size_t k = 0; k < o.cols_.size(); ++k)
        for (const auto& [dst, z] : o.cols_[k])
            r.add(static_cast<Key>(k), dst, z);
    return r;
}

SparseOp SparseOp::operator-(const SparseOp& o) const { return *this + o.scaled(GR(-1)); }

SparseOp SparseOp::operator*(const SparseOp& o) const
{
    SparseOp r(o.dim());
    for (std::size_t k = 0; k < o.cols_.size(); ++k)
        for (const auto& [mid, z] : o.cols_[k])
            for (const auto& [dst, w] : cols_.at(mid))
                r.add(static_cast<Key>(k), dst, z * w);
    return r;
}

SparseOp SparseOp::scaled(const GR& c) const
{
    SparseOp r(dim());
    if (c.is_zero())
        return r;
    for (std::size_t k = 0; k < cols_.size(); ++k)
        for (const auto& [dst, z] : cols_[k])
            r.cols_[k].emplace_back(dst, z * c);
    return r;
}

bool SparseOp::is_zero() const
{
    for (const auto& col : cols_)
        if (!col.empty())
            return false;
    return true;
}

Form apply_matrix(const Matrix& m, const std::vector<Key>& domain, const std::vector<Key>& codomain, const Form& f)
{
    if (m.rows() != codomain.size() || m.cols() != domain.size())
        throw InternalError("apply_matrix: shape mismatch");
    auto parts = f.expand(domain);
    std::map<Exponents, Vec> out;
    for (const auto& [e, v] : parts) {
        Vec w = m * v;
        if (!is_zero(w))
            out.emplace(e, std::move(w));
    }
    return Form::assemble(out, codomain);
}

}  // namespace frol
