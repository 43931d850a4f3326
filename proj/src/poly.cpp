#include "frolicher/poly.hpp"

#include "frolicher/errors.hpp"

#include <cctype>
#include <mutex>
#include <ostream>
#include <unordered_map>

namespace frol {

namespace {

struct Registry {
    std::mutex mu;
    std::vector<std::string> names;
    std::unordered_map<std::string, int> ids;
};

Registry& registry()
{
    static Registry r;
    return r;
}

bool valid_name(const std::string& s)
{
    if (s.empty() || s == "i" || !(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_'))
        return false;
    for (char c : s)
        if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_'))
            return false;
    return true;
}

void trim(Exponents& e)
{
    while (!e.empty() && e.back() == 0)
        e.pop_back();
}

}  // namespace

int declare_parameter(const std::string& name)
{
    if (!valid_name(name))
        throw SchemaError("invalid parameter name '" + name + "'");
    auto& r = registry();
    std::lock_guard lock(r.mu);
    auto it = r.ids.find(name);
    if (it != r.ids.end())
        return it->second;
    int id = static_cast<int>(r.names.size());
    r.names.push_back(name);
    r.ids.emplace(name, id);
    return id;
}

int find_parameter(const std::string& name)
{
    auto& r = registry();
    std::lock_guard lock(r.mu);
    auto it = r.ids.find(name);
    return it == r.ids.end() ? -1 : it->second;
}

const std::string& parameter_name(int id)
{
    auto& r = registry();
    std::lock_guard lock(r.mu);
    return r.names.at(static_cast<std::size_t>(id));
}

int total_degree(const Exponents& e)
{
    int s = 0;
    for (int x : e)
        s += x;
    return s;
}

int degree_in(const Exponents& e, const std::set<int>& family)
{
    int s = 0;
    for (std::size_t v = 0; v < e.size(); ++v)
        if (e[v] != 0 && family.count(static_cast<int>(v)))
            s += e[v];
    return s;
}

bool GrlexDescending::operator()(const Exponents& a, const Exponents& b) const
{
    int da = total_degree(a), db = total_degree(b);
    if (da != db)
        return da > db;
    std::size_t n = std::max(a.size(), b.size());
    for (std::size_t v = 0; v < n; ++v) {
        int x = v < a.size() ? a[v] : 0;
        int y = v < b.size() ? b[v] : 0;
        if (x != y)
            return x > y;
    }
    return false;
}

Poly::Poly(const GR& c)
{
    if (!c.is_zero())
        terms_.emplace(Exponents{}, c);
}

Poly Poly::variable(const std::string& name, int power)
{
    int id = declare_parameter(name);
    Exponents e(static_cast<std::size_t>(id) + 1, 0);
    e[static_cast<std::size_t>(id)] = power;
    trim(e);
    return monomial(e, GR(1));
}

Poly Poly::monomial(const Exponents& e, const GR& c)
{
    Poly p;
    Exponents t = e;
    trim(t);
    if (!c.is_zero())
        p.terms_.emplace(std::move(t), c);
    return p;
}

bool Poly::is_constant() const { return terms_.empty() || (terms_.size() == 1 && terms_.begin()->first.empty()); }

GR Poly::constant_term() const
{
    auto it = terms_.find(Exponents{});
    return it == terms_.end() ? GR(0) : it->second;
}

std::set<int> Poly::variables() const
{
    std::set<int> vars;
    for (const auto& [e, c] : terms_)
        for (std::size_t v = 0; v < e.size(); ++v)
            if (e[v] != 0)
                vars.insert(static_cast<int>(v));
    return vars;
}

int Poly::total_degree() const { return terms_.empty() ? -1 : frol::total_degree(terms_.begin()->first); }

void Poly::add_term(const Exponents& e, const GR& c)
{
    if (c.is_zero())
        return;
    auto [it, inserted] = terms_.try_emplace(e, c);
    if (!inserted) {
        it->second += c;
        if (it->second.is_zero())
            terms_.erase(it);
    }
}

Poly& Poly::operator+=(const Poly& o)
{
    for (const auto& [e, c] : o.terms_)
        add_term(e, c);
    return *this;
}

Poly& Poly::operator-=(const Poly& o)
{
    for (const auto& [e, c] : o.terms_)
        add_term(e, -c);
    return *this;
}

Poly operator*(const Poly& a, const Poly& b)
{
    Poly out;
    if (a.is_zero() || b.is_zero())
        return out;
    for (const auto& [ea, ca] : a.terms_)
        for (const auto& [eb, cb] : b.terms_) {
            Exponents e(std::max(ea.size(), eb.size()), 0);
            for (std::size_t v = 0; v < ea.size(); ++v)
                e[v] += ea[v];
            for (std::size_t v = 0; v < eb.size(); ++v)
                e[v] += eb[v];
            out.add_term(e, ca * cb);
        }
    return out;
}

Poly& Poly::operator*=(const Poly& o) { return *this = *this * o; }

Poly& Poly::operator*=(const GR& c)
{
    if (c.is_zero()) {
        terms_.clear();
        return *this;
    }
    if (c.is_one())
        return *this;
    for (auto& [e, x] : terms_)
        x *= c;
    return *this;
}

Poly Poly::operator-() const
{
    Poly p = *this;
    for (auto& [e, x] : p.terms_)
        x = -x;
    return p;
}

Poly Poly::pow(int k) const
{
    if (k < 0)
        throw MathError("negative power of a polynomial");
    Poly result(GR(1)), base = *this;
    while (k > 0) {
        if (k & 1)
            result *= base;
        k >>= 1;
        if (k)
            base = base * base;
    }
    return result;
}

Poly Poly::specialize_ids(const std::map<int, GR>& point) const
{
    if (point.empty())
        return *this;
    Poly out;
    for (const auto& [e, c] : terms_) {
        GR coeff = c;
        Exponents rest = e;
        for (std::size_t v = 0; v < e.size(); ++v) {
            if (e[v] == 0)
                continue;
            auto it = point.find(static_cast<int>(v));
            if (it == point.end())
                continue;
            for (int k = 0; k < e[v]; ++k)
                coeff *= it->second;
            rest[v] = 0;
        }
        trim(rest);
        out.add_term(rest, coeff);
    }
    return out;
}

Poly Poly::specialize(const std::map<std::string, GR>& point) const
{
    std::map<int, GR> ids;
    for (const auto& [name, value] : point) {
        int id = find_parameter(name);
        if (id >= 0)
            ids.emplace(id, value);
    }
    return specialize_ids(ids);
}

Poly Poly::homogeneous_part(int k, const std::set<int>& family) const
{
    Poly out;
    for (const auto& [e, c] : terms_)
        if (degree_in(e, family) == k)
            out.terms_.emplace(e, c);
    return out;
}

Poly Poly::homogeneous_part(int k, const std::vector<std::string>& family) const
{
    std::set<int> ids;
    for (const auto& name : family) {
        int id = find_parameter(name);
        if (id >= 0)
            ids.insert(id);
    }
    return homogeneous_part(k, ids);
}

Poly Poly::coefficient_of(int var) const
{
    Poly out;
    auto v = static_cast<std::size_t>(var);
    for (const auto& [e, c] : terms_)
        if (v < e.size() && e[v] == 1) {
            Exponents rest = e;
            rest[v] = 0;
            trim(rest);
            out.add_term(rest, c);
        }
    return out;
}

Poly Poly::monic() const
{
    if (terms_.empty())
        return *this;
    Poly p = *this;
    return p *= terms_.begin()->second.inverse();
}

namespace {

std::string monomial_str(const Exponents& e)
{
    std::string s;
    for (std::size_t v = 0; v < e.size(); ++v) {
        if (e[v] == 0)
            continue;
        if (!s.empty())
            s += "*";
        s += parameter_name(static_cast<int>(v));
        if (e[v] > 1)
            s += "^" + std::to_string(e[v]);
    }
    return s;
}

}  // namespace

std::string Poly::str() const
{
    if (terms_.empty())
        return "0";
    std::string out;
    bool first = true;
    for (const auto& [e, c] : terms_) {
        std::string mono = monomial_str(e);
        std::string coeff;
        bool negative = false;
        if (c.is_real()) {
            mpq_class r = c.re();
            if (sgn(r) < 0) {
                negative = true;
                r = -r;
            }
            coeff = rational_str(r);
            if (!mono.empty() && r == 1)
                coeff.clear();
        } else if (sgn(c.re()) == 0) {
            mpq_class m = c.im();
            if (sgn(m) < 0) {
                negative = true;
                m = -m;
            }
            coeff = (m == 1 ? std::string("i") : rational_str(m) + "*i");
        } else {
            coeff = "(" + c.str() + ")";
        }
        std::string term = coeff;
        if (!mono.empty())
            term = coeff.empty() ? mono : coeff + "*" + mono;
        if (first)
            out = negative ? "-" + term : term;
        else
            out += (negative ? " - " : " + ") + term;
        first = false;
    }
    return out;
}

namespace {

class PolyParser {
public:
    explicit PolyParser(const std::string& s) : s_(s) {}

    Poly parse()
    {
        Poly p = expr();
        skip();
        if (pos_ != s_.size())
            fail("unexpected character");
        return p;
    }

private:
    [[noreturn]] void fail(const std::string& what) const
    {
        throw SchemaError("polynomial parse error (" + what + ") at offset " + std::to_string(pos_) + " in '" + s_ + "'");
    }
    void skip()
    {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_])))
            ++pos_;
    }
    bool eat(char c)
    {
        skip();
        if (pos_ < s_.size() && s_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }
    Poly expr()
    {
        Poly acc;
        bool negative = false;
        if (eat('-'))
            negative = true;
        else
            eat('+');
        Poly t = term();
        acc = negative ? -t : t;
        while (true) {
            if (eat('+'))
                acc += term();
            else if (eat('-'))
                acc -= term();
            else
                break;
        }
        return acc;
    }
    Poly term()
    {
        Poly acc = power();
        while (true) {
            if (eat('*'))
                acc *= power();
            else if (eat('/')) {
                Poly d = power();
                if (!d.is_constant() || d.is_zero())
                    fail("division by a non-constant or zero");
                acc *= d.constant_term().inverse();
            } else
                break;
        }
        return acc;
    }
    Poly power()
    {
        Poly base = atom();
        if (eat('^')) {
            skip();
            std::size_t start = pos_;
            while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_])))
                ++pos_;
            if (start == pos_)
                fail("expected exponent");
            base = base.pow(std::stoi(s_.substr(start, pos_ - start)));
        }
        return base;
    }
    Poly atom()
    {
        skip();
        if (pos_ >= s_.size())
            fail("unexpected end");
        char c = s_[pos_];
        if (c == '(') {
            ++pos_;
            Poly p = expr();
            if (!eat(')'))
                fail("expected ')'");
            return p;
        }
        if (c == '-') {
            ++pos_;
            return -atom();
        }
        if (std::isdigit(static_cast<unsigned char>(c))) {
            std::size_t start = pos_;
            while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_])))
                ++pos_;
            return Poly(GR(mpq_class(mpz_class(s_.substr(start, pos_ - start), 10))));
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t start = pos_;
            while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_'))
                ++pos_;
            std::string name = s_.substr(start, pos_ - start);
            if (name == "i")
                return Poly(GR::i());
            return Poly::variable(name);
        }
        fail("unexpected character");
    }

    const std::string& s_;
    std::size_t pos_ = 0;
};

}  // namespace

Poly Poly::parse(const std::string& text) { return PolyParser(text).parse(); }

nlohmann::json gr_to_json(const GR& z) { return {{"re", rational_str(z.re())}, {"im", rational_str(z.im())}}; }

GR gr_from_json(const nlohmann::json& j)
{
    if (j.is_string())
        return GR::parse(j.get<std::string>());
    if (j.is_number_integer())
        return GR(j.get<long>());
    if (!j.is_object())
        throw SchemaError("expected a Gaussian rational, got " + j.dump());
    auto part = [&](const char* key) -> mpq_class {
        if (!j.contains(key))
            return 0;
        const auto& v = j.at(key);
        if (v.is_string())
            return parse_rational(v.get<std::string>());
        if (v.is_number_integer())
            return mpq_class(v.get<long>());
        throw SchemaError(std::string("bad '") + key + "' in " + j.dump());
    };
    return {part("re"), part("im")};
}

nlohmann::json Poly::to_json() const
{
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& [e, c] : terms_) {
        nlohmann::json ex = nlohmann::json::object();
        for (std::size_t v = 0; v < e.size(); ++v)
            if (e[v] != 0)
                ex[parameter_name(static_cast<int>(v))] = e[v];
        arr.push_back({{"coeff", gr_to_json(c)}, {"exponents", ex}});
    }
    return arr;
}

Poly Poly::from_json(const nlohmann::json& j)
{
    if (j.is_string())
        return parse(j.get<std::string>());
    if (j.is_number_integer())
        return Poly(GR(j.get<long>()));
    if (!j.is_array())
        throw SchemaError("expected a polynomial (string or term list), got " + j.dump());
    Poly p;
    for (const auto& term : j) {
        if (!term.is_object() || !term.contains("coeff"))
            throw SchemaError("bad polynomial term " + term.dump());
        Poly m(gr_from_json(term.at("coeff")));
        if (term.contains("exponents"))
            for (const auto& [name, k] : term.at("exponents").items()) {
                if (!k.is_number_integer() || k.get<int>() < 0)
                    throw SchemaError("bad exponent in " + term.dump());
                m *= Poly::variable(name, k.get<int>());
            }
        p += m;
    }
    return p;
}

std::ostream& operator<<(std::ostream& os, const Poly& p) { return os << p.str(); }

}  // namespace frol
