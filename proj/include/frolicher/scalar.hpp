#pragma once

#include <gmpxx.h>

#include <iosfwd>
#include <string>

namespace frol {

// Parses "p", "-p/q" or "p/q" into a canonical rational; throws SchemaError.
mpq_class parse_rational(const std::string& text);
std::string rational_str(const mpq_class& x);

// Exact element re + im*i of Q(i).
class GaussianRational {
public:
    GaussianRational() = default;
    GaussianRational(long v) : re_(v), im_(0) {}
    GaussianRational(mpq_class re, mpq_class im = 0);

    static GaussianRational i() { return GaussianRational(0, 1); }

    const mpq_class& re() const { return re_; }
    const mpq_class& im() const { return im_; }

    bool is_zero() const { return sgn(re_) == 0 && sgn(im_) == 0; }
    bool is_one() const { return re_ == 1 && sgn(im_) == 0; }
    bool is_real() const { return sgn(im_) == 0; }

    GaussianRational conj() const { return {re_, -im_}; }
    // |z|^2, always rational.
    mpq_class norm2() const { return re_ * re_ + im_ * im_; }
    GaussianRational inverse() const;

    GaussianRational& operator+=(const GaussianRational& o);
    GaussianRational& operator-=(const GaussianRational& o);
    GaussianRational& operator*=(const GaussianRational& o);
    GaussianRational& operator/=(const GaussianRational& o);

    friend GaussianRational operator+(GaussianRational a, const GaussianRational& b) { return a += b; }
    friend GaussianRational operator-(GaussianRational a, const GaussianRational& b) { return a -= b; }
    friend GaussianRational operator*(GaussianRational a, const GaussianRational& b) { return a *= b; }
    friend GaussianRational operator/(GaussianRational a, const GaussianRational& b) { return a /= b; }
    GaussianRational operator-() const { return {-re_, -im_}; }

    friend bool operator==(const GaussianRational& a, const GaussianRational& b)
    {
        return a.re_ == b.re_ && a.im_ == b.im_;
    }
    friend bool operator!=(const GaussianRational& a, const GaussianRational& b) { return !(a == b); }

    // "3/2", "-i", "1/2+3i", "(1-2/3i)" style without parentheses.
    std::string str() const;
    // Parses the output of str() as well as "a/b" and "i".
    static GaussianRational parse(const std::string& text);

private:
    mpq_class re_ = 0;
    mpq_class im_ = 0;
};

using GR = GaussianRational;

std::ostream& operator<<(std::ostream& os, const GaussianRational& z);

}  // namespace frol
