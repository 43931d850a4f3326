#pragma once

#include "frolicher/beltrami.hpp"
#include "frolicher/complex.hpp"
#include "frolicher/hodge.hpp"
#include "frolicher/spectral.hpp"

#include <json.hpp>

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace frol {

using Point = std::map<std::string, GR>;

std::string point_label(const Point& t0);

// Central fiber, Beltrami series and the caches every solver shares.
class DeformationContext {
public:
    DeformationContext(Nilmanifold m, BeltramiSeries series);

    const Nilmanifold& manifold() const { return m_; }
    const DoubleComplex& complex() const { return m_.complex(); }
    const Exterior& ext() const { return m_.ext(); }
    const BeltramiSeries& series() const { return series_; }
    const HodgePackage& hodge() const { return hodge_; }
    const SpectralSequence& central() const { return central_; }

    // Pages of (A, ∂, ∂̄_{φ(t0)}); MathError for non-integrable or divergent t0.
    const SpectralSequence& fiber(const Point& t0) const;
    // Maurer–Cartan to the given order (memoized).
    const MaurerCartanReport& maurer_cartan(int order) const;

private:
    Nilmanifold m_;
    BeltramiSeries series_;
    HodgePackage hodge_;
    SpectralSequence central_;
    mutable std::map<std::string, std::unique_ptr<SpectralSequence>> fibers_;
    mutable std::map<int, MaurerCartanReport> mc_;
};

// A basis of initial data with one class symbol per element.
struct ClassFamily {
    int p = 0, q = 0, r = 1;
    std::vector<Form> basis;
    std::vector<std::string> symbols;

    // Σ a_m basis_m.
    Form generic() const;
};

// ℋ^{p,q} with symbols a<digits of the pivot monomial>.
ClassFamily harmonic_family(const HodgePackage& h, int p, int q);
// Closed r-filtered (p,q)-forms whose (p,q)-component is harmonic.
ClassFamily filtered_family(const SpectralSequence& ss, const HodgePackage& h, int p, int q, int r);

enum class SeriesKind { dolbeault, r_filtered, lemma33, lemma41, canonical_filtered };
std::string kind_name(SeriesKind k);

struct DeformationSeries {
    int p = 0, q = 0, r = 1;
    SeriesKind kind = SeriesKind::dolbeault;
    std::vector<Form> orders;  // σ_0..σ_K, trailing zero orders dropped once terminated
    int verified_order = 0;
    bool terminated = false;
    std::vector<std::string> notes;

    // Σ_k σ_k(t0) over the stored orders.
    Form sum_at(const Point& t0) const;
    nlohmann::json to_json(const Exterior& ext) const;
};

struct ObstructionReport {
    struct Entry {
        int order = 0;
        int strand = 0;    // i for the (p+i, q-i) strand; 0 for Dolbeault
        Form component;    // part of the source not in the image of the solve
        std::vector<Poly> coefficients;  // in a basis of the cokernel
    };
    std::vector<Entry> entries;  // nonzero only
    int first_obstructed = 0;    // 0 when unobstructed to the verified order

    bool unobstructed() const { return entries.empty(); }
    // Distinct nonzero coefficient polynomials, each made monic.
    std::vector<Poly> polynomials() const;
    nlohmann::json to_json(const Exterior& ext) const;
};

struct DeformationRun {
    DeformationSeries series;
    ObstructionReport obstructions;
    nlohmann::json to_json(const Exterior& ext) const;
};

// σ_k = Σ_j ∂̄*G L_{φ_j} σ_{k−j}, stopping at the first obstructed order.
DeformationRun canonical_dolbeault(const DeformationContext& ctx, const Form& sigma0, int p, int q, int order);
// The (p,q) strand canonically, higher strands jointly by the minimal-norm solve.
DeformationRun canonical_r_filtered(const DeformationContext& ctx, const Form& sigma0, int p, int q, int r,
                                    int order);

struct LiftResult {
    bool ok = false;
    std::string method;  // identity | canonical | staircase
    Form lift;
    int witness_r = 0;   // on failure: α ∈ Z̃_r \ Z̃_{r+1}
    std::string message;
};
// A d-closed form in F^p with (p,q)-component α for ∂̄α = 0.
LiftResult lift_to_d_closed(const DeformationContext& ctx, const Form& alpha, int p, int q);

struct SolverStep {
    int order = 0;
    bool d_system = false;       // dα_k = Σ_j L_{φ_j} α_{k−j}
    bool in_filtration = false;  // α_k ∈ F^p
    bool strands = false;        // prescribed components reproduced
    bool exp_identity = false;        // d((e^{i_φ}−1)α)_k + (L_φ α)_k = 0
};

struct FilteredSolution {
    int p = 0, q = 0, r = 1;
    SeriesKind kind = SeriesKind::lemma33;
    std::vector<Form> alpha;  // α_0..α_N
    std::vector<SolverStep> steps;
    std::vector<std::string> notes;

    bool all_verified() const;
    nlohmann::json to_json(const Exterior& ext) const;
};

// Filtered d-system from a d-closed α0: staircase of d-closed lifts plus the γ-correction.
FilteredSolution solve_lemma33(const DeformationContext& ctx, const Form& alpha0, int p, int q, int order);
// Filtered d-system matching the first r strands of a canonical r-filtered run.
FilteredSolution solve_lemma41(const DeformationContext& ctx, const DeformationSeries& strands, int order);
// α_k = Σ_{i<r} σ̂_k + d*_{p+r}G_{p+r}(Σ_j L_{φ_j}(α_{k−j} − Σσ̂_{k−j}) − ∂σ̂_k^{p+r−1,q−r+1}).
FilteredSolution canonical_filtered_solution(const DeformationContext& ctx, const DeformationSeries& strands,
                                             int order);

struct VReport {
    int p = 0, q = 0;
    std::string point;
    std::size_t harmonic_dim = 0;
    std::vector<std::size_t> dims;         // dim V_{r,t0}, r = 1..r_max+1
    std::vector<std::size_t> dr_ranks;     // rank d_r^{p,q}(X_{t0}), r = 1..r_max
    bool exact = false;                    // canonical series terminated
    bool caveat = false;                   // resolvent used without a terminated series
    bool prop26_consistent = true;
    std::vector<std::string> notes;

    std::size_t dim(int r) const { return dims.at(r - 1); }
    nlohmann::json to_json() const;
};
// V_{r,t0}^{p,q} for r = 1..r_max+1 cross-checked against the fiber.
VReport v_dimensions(const DeformationContext& ctx, int p, int q, const Point& t0, int r_max, int order);

// Coordinate points at 1/7 followed by seeded random points of height ≤ 10,
// each integrable with a convergent tail.
std::vector<Point> default_samples(const DeformationContext& ctx, int count, unsigned seed);

struct TheoremVerdict {
    std::string theorem;
    int p = 0, q = 0, r = 1;
    bool hypothesis = false;
    std::vector<ConditionVerdict> hypothesis_checks;
    bool solver = false;
    std::vector<std::string> solver_certificates;
    struct Sample {
        std::string point;
        bool ok = false;
        std::vector<std::string> certificates;
    };
    std::vector<Sample> samples;
    bool conclusion = false;
    std::string summary;
    std::string scope;

    bool holds() const { return hypothesis && solver && conclusion; }
    nlohmann::json to_json() const;
};

extern const std::vector<std::string> kTheoremIds;

// Hypothesis → constructive solver → conclusion on each sampled fiber.
// `r` is only read by coro4.7. Unknown ids throw SchemaError.
TheoremVerdict verify_theorem(const DeformationContext& ctx, const std::string& theorem, int p, int q,
                              const std::vector<Point>& samples, int order, int r = 1);

}  // namespace frol
