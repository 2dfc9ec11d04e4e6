#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

#include "iiss/comparison_functions.hpp"
#include "iiss/input_signal.hpp"

namespace iiss {

struct ConstructionOptions {
    CertificateTolerance tolerance;
    /// Doubling rounds before a construction is declared failed.
    int max_rounds = 32;
};

struct FactorResult {
    ComparisonFunction sigma;
    InequalityCertificate certificate;
    int doublings = 0;
};

struct KLFactorResult {
    ComparisonFunction outer;
    ComparisonFunction inner;
    InequalityCertificate certificate;
};

struct PosdefFactorResult {
    ComparisonFunction increasing;  // class K-infinity
    ComparisonFunction decreasing;  // class L
    InequalityCertificate certificate;
};

struct BoundFamilyResult {
    ComparisonFunction sigma;
    /// gamma_M <= max_{i<=M} gamma_i, max <= two-argument extension,
    /// extension <= sigma(M) sigma(r), each over M = 1..size and the grid.
    std::vector<InequalityCertificate> links;
    /// The end-to-end bound gamma_M(r) <= sigma(M) sigma(r).
    InequalityCertificate certificate;
};

/// max_{i=1..M} gamma_i as a table over the grid and the members' nodes.
/// Throws DomainError for an empty family and IndexError for M outside 1..size.
ComparisonFunction family_max(const FunctionFamily& family, std::size_t index, const Grid& grid = default_grid());

/// Two-argument map interpolating the running-max family in its index:
/// exact at integer s, linear between neighbours, and s * max_1 on [0, 1].
/// Evaluating beyond s = size throws IndexError.
TwoArgFunction two_arg_extend(const FunctionFamily& family, const Grid& grid = default_grid());

/// A single sigma with g(s, r) <= sigma(s) sigma(r) on first x second.
/// Throws ConstructionError when the doubling budget runs out.
FactorResult factor_kk(const TwoArgFunction& g, const Grid& first, const Grid& second,
                       const ConstructionOptions& options = {});
FactorResult factor_kk(const TwoArgFunction& g, const Grid& grid, const ConstructionOptions& options = {});

/// sigma with gamma(r s) <= sigma(r) sigma(s) on grid x grid.
FactorResult factor_product(const ComparisonFunction& gamma, const Grid& grid, const ConstructionOptions& options = {});

/// beta(r, t) <= outer(inner(r) e^{-t}) on r_grid x t_grid.
KLFactorResult factor_kl(const KLFunction& beta, const Grid& r_grid, const Grid& t_grid,
                         const ConstructionOptions& options = {});

/// rho >= increasing * decreasing on the grid.
/// Throws DomainError when rho vanishes at a positive grid point.
PosdefFactorResult factor_posdef(const ComparisonFunction& rho, const Grid& grid,
                                 const ConstructionOptions& options = {});

/// sigma with gamma_M(r) <= sigma(M) sigma(r) for M = 1..size and grid r.
BoundFamilyResult bound_family(const FunctionFamily& family, const Grid& grid = default_grid(),
                               const ConstructionOptions& options = {});

/// Piecewise-linear upper bound of a nondecreasing f: each node carries the
/// value at the next node.
ComparisonFunction upper_tabulate(const std::function<double(double)>& f, const Grid& nodes, FunctionClass cls);

// ---------------------------------------------------------------------------
// Uniform bounds over indexed families
// ---------------------------------------------------------------------------

using Map = std::function<double(double)>;

struct UniformFamilies {
    KLFamily decay;              // beta~_M
    FunctionFamily integrand;    // sigma~_M
    FunctionFamily gain;         // gamma~_M
    Map first_weight;            // alpha_1
    Map second_weight;           // alpha_2

    [[nodiscard]] std::size_t max_index() const noexcept;
    /// max(1, ceil(alpha_1(R) + alpha_2(S))).
    [[nodiscard]] std::size_t index(double R, double S) const;
    /// beta~_K(R, T) + gamma~_K(int_0^T sigma~_K(phi)), K = index(R, S).
    [[nodiscard]] double lhs(double R, double S, double T, const InputSignal& phi) const;
};

struct UniformSample {
    double R = 0.0;
    double S = 0.0;
    double T = 0.0;
    InputSignal phi;
};

struct UniformizeOptions {
    ConstructionOptions construction;
    std::size_t samples = 200;
    double R_max = 1.0;
    double S_max = 1.0;
    double T_max = 10.0;
    double phi_max = 1.0;
    std::size_t phi_segments = 4;
    std::uint64_t seed = 0;
};

struct Uniformized {
    KLFunction beta;
    ComparisonFunction gamma1;
    ComparisonFunction gamma2;
    ComparisonFunction delta1;
    ComparisonFunction delta2;
    /// Index gains of the two intermediate factorizations.
    ComparisonFunction decay_index_gain;
    ComparisonFunction gain_index_gain;
    Map first_weight;
    Map second_weight;
    /// Intermediate certificates, in construction order.
    std::vector<InequalityCertificate> stages;
    InequalityCertificate certificate;
    int doublings = 0;

    /// beta(R, T) + gamma1(alpha_1(R)) + gamma2(alpha_2(S)) + delta1(int_0^T delta2(phi)).
    [[nodiscard]] double rhs(double R, double S, double T, const InputSignal& phi) const;
};

/// Seeded (R, S, T, phi) tuples within the option ranges.
std::vector<UniformSample> uniform_samples(const UniformizeOptions& options);

InequalityCertificate certify_uniform(const UniformFamilies& families, const Uniformized& bound,
                                      const std::vector<UniformSample>& samples, CertificateTolerance tol = {});

/// Builds beta, gamma1, gamma2, delta1, delta2 dominating the index-dependent
/// estimate and certifies it on seeded samples. Throws IndexError when a
/// sample requires an index beyond the families, ConstructionError when
/// the budget runs out.
Uniformized uniformize(const UniformFamilies& families, const UniformizeOptions& options = {});
Uniformized uniformize(const UniformFamilies& families, const std::vector<UniformSample>& samples,
                       const UniformizeOptions& options = {});

}  // namespace iiss
