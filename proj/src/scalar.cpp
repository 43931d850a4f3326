#include "frolicher/scalar.hpp"

#include "frolicher/errors.hpp"

#include <cctype>
#include <ostream>

namespace frol {

mpq_class parse_rational(const std::string& text)
{
    std::string s;
    for (char c : text)
        if (!std::isspace(static_cast<unsigned char>(c)))
            s.push_back(c);
    if (s.empty())
        throw SchemaError("empty rational literal");
    if (s.front() == '+')
        s.erase(s.begin());
    std::size_t slash = s.find('/');
    auto check_int = [&](const std::string& part) {
        std::size_t start = (!part.empty() && part[0] == '-') ? 1 : 0;
        if (part.size() == start)
            throw SchemaError("bad rational literal '" + text + "'");
        for (std::size_t k = start; k < part.size(); ++k)
            if (!std::isdigit(static_cast<unsigned char>(part[k])))
                throw SchemaError("bad rational literal '" + text + "'");
    };
    mpq_class q;
    if (slash == std::string::npos) {
        check_int(s);
        q = mpq_class(mpz_class(s, 10));
    } else {
        std::string num = s.substr(0, slash), den = s.substr(slash + 1);
        check_int(num);
        if (!den.empty() && den[0] == '-')
            throw SchemaError("bad rational literal '" + text + "'");
        check_int(den);
        mpz_class d(den, 10);
        if (d == 0)
            throw SchemaError("zero denominator in '" + text + "'");
        q = mpq_class(mpz_class(num, 10), d);
        q.canonicalize();
    }
    return q;
}

std::string rational_str(const mpq_class& x) { return x.get_str(10); }

GaussianRational::GaussianRational(mpq_class re, mpq_class im) : re_(std::move(re)), im_(std::move(im))
{
    re_.canonicalize();
    im_.canonicalize();
}

GaussianRational GaussianRational::inverse() const
{
    if (is_zero())
        throw MathError("division by zero in Q(i)");
    mpq_class n = norm2();
    return {re_ / n, -im_ / n};
}

GaussianRational& GaussianRational::operator+=(const GaussianRational& o)
{
    re_ += o.re_;
    im_ += o.im_;
    return *this;
}

GaussianRational& GaussianRational::operator-=(const GaussianRational& o)
{
    re_ -= o.re_;
    im_ -= o.im_;
    return *this;
}

GaussianRational& GaussianRational::operator*=(const GaussianRational& o)
{
    if (sgn(im_) == 0 && sgn(o.im_) == 0) {
        re_ *= o.re_;
        return *this;
    }
    mpq_class r = re_ * o.re_ - im_ * o.im_;
    mpq_class m = re_ * o.im_ + im_ * o.re_;
    re_ = std::move(r);
    im_ = std::move(m);
    return *this;
}

GaussianRational& GaussianRational::operator/=(const GaussianRational& o)
{
    if (sgn(o.im_) == 0) {
        if (sgn(o.re_) == 0)
            throw MathError("division by zero in Q(i)");
        re_ /= o.re_;
        im_ /= o.re_;
        return *this;
    }
    return *this *= o.inverse();
}

std::string GaussianRational::str() const
{
    if (sgn(im_) == 0)
        return rational_str(re_);
    std::string imag;
    if (im_ == 1)
        imag = "i";
    else if (im_ == -1)
        imag = "-i";
    else
        imag = rational_str(im_) + "i";
    if (sgn(re_) == 0)
        return imag;
    if (imag[0] != '-')
        imag = "+" + imag;
    return rational_str(re_) + imag;
}

GaussianRational GaussianRational::parse(const std::string& text)
{
    std::string s;
    for (char c : text)
        if (!std::isspace(static_cast<unsigned char>(c)))
            s.push_back(c);
    if (s.size() >= 2 && s.front() == '(' && s.back() == ')')
        s = s.substr(1, s.size() - 2);
    if (s.empty())
        throw SchemaError("empty scalar literal");
    if (s.back() != 'i')
        return {parse_rational(s), 0};
    s.pop_back();
    std::size_t split = std::string::npos;
    for (std::size_t k = s.size(); k-- > 1;)
        if (s[k] == '+' || s[k] == '-') {
            split = k;
            break;
        }
    std::string re_part, im_part;
    if (split == std::string::npos) {
        im_part = s;
    } else {
        re_part = s.substr(0, split);
        im_part = s.substr(split);
    }
    mpq_class im;
    if (im_part.empty() || im_part == "+")
        im = 1;
    else if (im_part == "-")
        im = -1;
    else
        im = parse_rational(im_part);
    mpq_class re = re_part.empty() ? mpq_class(0) : parse_rational(re_part);
    return {re, im};
}

std::ostream& operator<<(std::ostream& os, const GaussianRational& z) { return os << z.str(); }

}  // namespace frol
