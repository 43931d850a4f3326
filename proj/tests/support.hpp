#pragma once

#include "frolicher/beltrami.hpp"
#include "frolicher/complex.hpp"
#include "frolicher/errors.hpp"

#include <random>
#include <string>

namespace frol::testing {

inline std::string data_path(const std::string& name) { return std::string(FROLICHER_DATA_DIR) + "/" + name; }

inline Nilmanifold load(const std::string& name) { return Nilmanifold(Presentation::from_file(data_path(name))); }

inline BeltramiSeries load_family(const Nilmanifold& m, const std::string& name)
{
    return BeltramiSeries::from_file(m.ext(), data_path(name));
}

// Small Gaussian rationals with numerators in [-3,3] and denominators in [1,3].
inline GR random_scalar(std::mt19937& rng, bool complex = true)
{
    std::uniform_int_distribution<int> num(-3, 3), den(1, 3);
    mpq_class re(num(rng), den(rng));
    re.canonicalize();
    mpq_class im = 0;
    if (complex) {
        im = mpq_class(num(rng), den(rng));
        im.canonicalize();
    }
    return GR(re, im);
}

inline Form random_form(std::mt19937& rng, const Exterior& ext, int density = 6)
{
    std::uniform_int_distribution<Key> key(0, static_cast<Key>(ext.size() - 1));
    Form f;
    for (int i = 0; i < density; ++i)
        f.add(key(rng), Poly(random_scalar(rng)));
    return f;
}

inline Form random_piece_form(std::mt19937& rng, const Exterior& ext, int p, int q)
{
    Form f;
    for (Key k : ext.piece(p, q))
        if (rng() % 2)
            f.add(k, Poly(random_scalar(rng)));
    return f;
}

inline VectorForm random_beltrami(std::mt19937& rng, const Exterior& ext, int density = 4)
{
    std::uniform_int_distribution<int> idx(1, ext.n());
    VectorForm v;
    for (int i = 0; i < density; ++i)
        v.add(ext.anti_generator(idx(rng)), idx(rng), Poly(random_scalar(rng)));
    return v;
}

}  // namespace frol::testing
