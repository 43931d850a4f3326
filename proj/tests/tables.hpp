#pragma once

// Printed page tables of the two examples and parsers for their notation.

#include "frolicher/spectral.hpp"

#include <regex>
#include <string>
#include <vector>

namespace frol::testing {

// "3*w[1,-3] - w[3,-1]" → form.
inline Form lc(const Exterior& ext, const std::string& text)
{
    static const std::regex term(R"(([+-]?)\s*(?:(\d+)\s*\*\s*)?(w\[[^\]]*\]))");
    Form f;
    for (auto it = std::sregex_iterator(text.begin(), text.end(), term); it != std::sregex_iterator(); ++it) {
        const auto& m = *it;
        GR c(m[2].matched ? std::stoi(m[2].str()) : 1);
        if (m[1].str() == "-")
            c = GR(0) - c;
        auto [k, s] = ext.parse_monomial(m[3].str());
        f.add(k, Poly(c * GR(s)));
    }
    return f;
}

// Splits on commas outside brackets.
inline std::vector<std::string> items(const std::string& s)
{
    std::vector<std::string> out;
    std::string cur;
    int depth = 0;
    for (char ch : s) {
        if (ch == '[')
            ++depth;
        if (ch == ']')
            --depth;
        if (ch == ',' && depth == 0) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += ch;
        }
    }
    if (cur.find('w') != std::string::npos)
        out.push_back(cur);
    return out;
}

inline Subspace span_of(const Exterior& ext, const std::vector<std::string>& forms, int p, int q)
{
    std::vector<Vec> vs;
    for (const auto& s : forms)
        vs.push_back(lc(ext, s).to_vec(ext.piece(p, q)));
    return Subspace::span(ext.piece(p, q).size(), vs);
}

struct TableRow {
    int p, q;
    std::string reps, exact;  // "a, b, …" before and after the semicolon
};

// Cells where Z̃_r ≠ span(reps ∪ exact), or where B̃_r differs from span(exact)
// (exact_is_btilde) or fails to contain it. Entries read "(p,q)".
inline std::vector<std::string> table_mismatches(const SpectralSequence& ss, int r, const std::vector<TableRow>& rows,
                                                 bool exact_is_btilde)
{
    const Exterior& ext = ss.complex().ext;
    std::vector<std::string> bad;
    for (const auto& row : rows) {
        auto reps = items(row.reps), ex = items(row.exact);
        std::vector<std::string> all = reps;
        all.insert(all.end(), ex.begin(), ex.end());
        Subspace z = span_of(ext, all, row.p, row.q), b = span_of(ext, ex, row.p, row.q);
        bool ok = ss.z_tilde(row.p, row.q, r) == z &&
                  (exact_is_btilde ? ss.b_tilde(row.p, row.q, r) == b : ss.b_tilde(row.p, row.q, r).contains(b));
        if (!ok)
            bad.push_back("(" + std::to_string(row.p) + "," + std::to_string(row.q) + ")");
    }
    return bad;
}

inline const std::vector<TableRow> kIwasawaZ1 = {
    {1, 0, "w[1], w[2], w[3]", ""},
    {0, 1, "w[-1], w[-2]", ""},
    {2, 0, "w[1,2], w[2,3], w[1,3]", ""},
    {1, 1, "w[1,-1], w[2,-1], w[3,-1], w[1,-2], w[2,-2], w[3,-2]", ""},
    {0, 2, "w[-1,-3], w[-2,-3]", "w[-1,-2]"},
    {3, 0, "w[1,2,3]", ""},
    {2, 1, "w[1,2,-1], w[2,3,-1], w[1,3,-1], w[1,2,-2], w[2,3,-2], w[1,3,-2]", ""},
    {0, 3, "w[-1,-2,-3]", ""},
    {1, 2, "w[1,-2,-3], w[2,-2,-3], w[3,-2,-3], w[1,-1,-3], w[2,-1,-3], w[3,-1,-3]",
     "w[1,-1,-2], w[2,-1,-2], w[3,-1,-2]"},
    {3, 1, "w[1,2,3,-1], w[1,2,3,-2]", ""},
    {2, 2, "w[1,2,-2,-3], w[2,3,-2,-3], w[1,3,-2,-3], w[1,2,-1,-3], w[2,3,-1,-3], w[1,3,-1,-3]",
     "w[1,2,-1,-2], w[2,3,-1,-2], w[1,3,-1,-2]"},
    {1, 3, "w[1,-1,-2,-3], w[2,-1,-2,-3], w[3,-1,-2,-3]", ""},
    {3, 2, "w[1,2,3,-2,-3], w[1,2,3,-1,-3]", "w[1,2,3,-1,-2]"},
    {2, 3, "w[1,2,-1,-2,-3], w[2,3,-1,-2,-3], w[1,3,-1,-2,-3]", ""},
    {3, 3, "w[1,2,3,-1,-2,-3]", ""},
};

inline const std::vector<TableRow> kIwasawaZ2 = {
    {1, 0, "w[1], w[2]", ""},
    {0, 1, "w[-1], w[-2]", ""},
    {2, 0, "w[2,3], w[1,3]", "w[1,2]"},
    {1, 1, "w[1,-1], w[2,-1], w[1,-2], w[2,-2]", ""},
    {0, 2, "w[-1,-3], w[-2,-3]", "w[-1,-2]"},
    {3, 0, "w[1,2,3]", ""},
    {2, 1, "w[2,3,-1], w[1,3,-1], w[2,3,-2], w[1,3,-2]", "w[1,2,-1], w[1,2,-2]"},
    {0, 3, "w[-1,-2,-3]", ""},
    {1, 2, "w[1,-2,-3], w[2,-2,-3], w[1,-1,-3], w[2,-1,-3]", "w[1,-1,-2], w[2,-1,-2], w[3,-1,-2]"},
    {3, 1, "w[1,2,3,-1], w[1,2,3,-2]", ""},
    {2, 2, "w[2,3,-2,-3], w[1,3,-2,-3], w[2,3,-1,-3], w[1,3,-1,-3]",
     "w[1,2,-2,-3], w[1,2,-1,-3], w[1,2,-1,-2], w[2,3,-1,-2], w[1,3,-1,-2]"},
    {1, 3, "w[1,-1,-2,-3], w[2,-1,-2,-3]", ""},
    {3, 2, "w[1,2,3,-2,-3], w[1,2,3,-1,-3]", "w[1,2,3,-1,-2]"},
    {2, 3, "w[2,3,-1,-2,-3], w[1,3,-1,-2,-3]", "w[1,2,-1,-2,-3]"},
    {3, 3, "w[1,2,3,-1,-2,-3]", ""},
};

inline const std::vector<TableRow> kH15Z1 = {
    {1, 0, "w[1]", ""},
    {0, 1, "w[-1], w[-2]", ""},
    {2, 0, "w[1,2]", ""},
    {1, 1, "w[1,-2], 3*w[1,-3] - w[3,-1], 3*w[2,-2] + w[3,-1]", "w[1,-1], 3*w[1,-2] + w[2,-1]"},
    {0, 2, "w[-1,-3], w[-2,-3]", "w[-1,-2]"},
    {3, 0, "w[1,2,3]", ""},
    {2, 1, "w[1,2,-2], 3*w[1,2,-3] + w[2,3,-1], w[1,3,-2] + w[1,2,-3]", "3*w[1,2,-2] - w[1,3,-1], -w[1,2,-1]"},
    {0, 3, "w[-1,-2,-3]", ""},
    {1, 2, "w[1,-2,-3], w[2,-1,-3], 3*w[2,-2,-3] + w[3,-1,-3]",
     "w[1,-1,-3], w[1,-1,-2], w[2,-1,-2], 3*w[1,-2,-3] + w[2,-1,-3] - w[3,-1,-2]"},
    {3, 1, "w[1,2,3,-1], w[1,2,3,-2]", ""},
    {2, 2, "w[1,2,-2,-3], w[1,3,-1,-3], 3*w[1,3,-2,-3] - w[2,3,-1,-3]",
     "w[1,2,-1,-2], w[1,3,-1,-2], w[1,2,-1,-3], w[2,3,-1,-2] - w[1,3,-1,-3] + 3*w[1,2,-2,-3]"},
    {1, 3, "w[3,-1,-2,-3]", "w[2,-1,-2,-3], w[1,-1,-2,-3]"},
    {3, 2, "w[1,2,3,-2,-3], w[1,2,3,-1,-3]", "w[1,2,3,-1,-2]"},
    {2, 3, "w[2,3,-1,-2,-3]", "w[1,2,-1,-2,-3], w[1,3,-1,-2,-3]"},
    {3, 3, "w[1,2,3,-1,-2,-3]", ""},
};

}  // namespace frol::testing
