#include "iiss/constructions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <random>

#include "iiss/errors.hpp"

namespace iiss {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

/// Running max with a vanishing strict-increase correction; 0 at the origin.
void envelope(const Grid& nodes, std::vector<double>& values) {
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        if (nodes[i] == 0.0) {
            values[i] = 0.0;
        }
        if (i > 0) {
            const double floor =
                std::max(values[i - 1] + 1e-12 * (nodes[i] - nodes[i - 1]), std::nextafter(values[i - 1], kInf));
            values[i] = std::max(values[i], floor);
        }
    }
}

double tail_of(const Grid& nodes, const std::vector<double>& values) {
    const std::size_t n = nodes.size();
    if (n < 2 || !(values[n - 1] > 0.0) || !(values[n - 2] > 0.0) || !(nodes[n - 2] > 0.0)) {
        return 0.0;
    }
    const double t = std::log(values[n - 1] / values[n - 2]) / std::log(nodes[n - 1] / nodes[n - 2]);
    return std::isfinite(t) ? t : 0.0;
}

ComparisonFunction increasing_table(const Grid& nodes, std::vector<double> values, std::optional<double> tail = {}) {
    envelope(nodes, values);
    double p = tail.value_or(tail_of(nodes, values));
    if (!(p > 0.0)) {
        p = 1.0;
    }
    return ComparisonFunction::table(nodes, std::move(values), p, FunctionClass::KInfinity);
}

Grid with_origin(Grid g) {
    if (g.empty() || g.front() != 0.0) {
        g.insert(g.begin(), 0.0);
    }
    return g;
}

Grid positive_part(const Grid& g) {
    Grid out;
    std::copy_if(g.begin(), g.end(), std::back_inserter(out), [](double x) { return x > 0.0; });
    return out;
}

InequalityCertificate certify_kk(const TwoArgFunction& g, const ComparisonFunction& sigma, const Grid& first,
                                 const Grid& second, CertificateTolerance tol) {
    CertificateBuilder b("g(s, r) <= sigma(s) * sigma(r)", tol);
    std::vector<double> sr(second.size());
    for (std::size_t j = 0; j < second.size(); ++j) {
        sr[j] = sigma(second[j]);
    }
    for (double s : first) {
        const double ss = sigma(s);
        for (std::size_t j = 0; j < second.size(); ++j) {
            b.add(g(s, second[j]), ss * sr[j], {s, second[j]});
        }
    }
    return b.finish();
}

InequalityCertificate certify_kl(const KLFunction& beta, const ComparisonFunction& outer,
                                 const ComparisonFunction& inner, const Grid& r_grid, const Grid& t_grid,
                                 CertificateTolerance tol) {
    CertificateBuilder b("beta(r, t) <= outer(inner(r) * exp(-t))", tol);
    for (double r : r_grid) {
        const double ir = inner(r);
        for (double t : t_grid) {
            b.add(beta(r, t), outer(ir * std::exp(-t)), {r, t});
        }
    }
    return b.finish();
}

/// Unbounded version of g that agrees with it on the grid.
ComparisonFunction unbounded(const ComparisonFunction& g, const Grid& grid) {
    if (g.declared_class() == FunctionClass::KInfinity && g.unbounded_by_construction().value_or(false)) {
        return g;
    }
    const Grid nodes = with_origin(grid);
    std::vector<double> v(nodes.size());
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        v[i] = g(nodes[i]);
    }
    return increasing_table(nodes, std::move(v), 1.0);
}

}  // namespace

ComparisonFunction upper_tabulate(const std::function<double(double)>& f, const Grid& nodes, FunctionClass cls) {
    if (nodes.empty()) {
        throw DomainError("upper_tabulate needs nodes");
    }
    const std::size_t n = nodes.size();
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i) {
        v[i] = f(nodes[std::min(i + 1, n - 1)]);
    }
    envelope(nodes, v);
    double p = 1.0;
    if (n >= 2 && nodes[n - 1] > 0.0) {
        const double x = nodes[n - 1];
        const double a = f(x);
        const double b = f(2.0 * x);
        if (a > 0.0 && b > 0.0) {
            p = std::log(b / a) / std::log(2.0);
        }
        if (!std::isfinite(p) || !(p > 0.0)) {
            p = 1.0;
        }
    }
    return ComparisonFunction::table(nodes, std::move(v), p, cls);
}

ComparisonFunction family_max(const FunctionFamily& family, std::size_t index, const Grid& grid) {
    if (family.empty()) {
        throw DomainError("family_max of an empty family");
    }
    (void)family.at(index);
    Grid nodes = with_origin(grid);
    for (std::size_t i = 1; i <= index; ++i) {
        const auto& f = family.at(i);
        if (f.kind() == ComparisonFunction::Kind::Table) {
            nodes = merge_grids({&nodes, &f.table_x()});
        }
    }
    auto value = [&](double r) {
        double m = 0.0;
        for (std::size_t i = 1; i <= index; ++i) {
            m = std::max(m, family.at(i)(r));
        }
        return m;
    };
    std::vector<double> v(nodes.size());
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        v[i] = value(nodes[i]);
    }
    double p = 1.0;
    const double x = nodes.back();
    if (x > 0.0 && value(x) > 0.0) {
        p = std::log(value(2.0 * x) / value(x)) / std::log(2.0);
    }
    return increasing_table(nodes, std::move(v), std::isfinite(p) && p > 0.0 ? std::optional<double>(p) : std::nullopt);
}

TwoArgFunction two_arg_extend(const FunctionFamily& family, const Grid& grid) {
    if (family.empty()) {
        throw DomainError("two_arg_extend of an empty family");
    }
    auto maxes = std::make_shared<std::vector<ComparisonFunction>>();
    for (std::size_t M = 1; M <= family.size(); ++M) {
        maxes->push_back(family_max(family, M, grid));
    }
    auto map = [maxes](double s, double r) {
        if (!(s >= 0.0)) {
            throw DomainError("two-argument extension needs s >= 0");
        }
        const auto& m = *maxes;
        if (s <= 1.0) {
            return s == 1.0 ? m[0](r) : m[0](r) * s;
        }
        const double lo = std::floor(s);
        const auto i = static_cast<std::size_t>(lo);
        if (lo == s) {
            return m[i - 1](r);
        }
        const double hi = lo + 1.0;
        return m[i - 1](r) * (hi - s) + m[i](r) * (s - lo);
    };
    return TwoArgFunction(map, static_cast<double>(family.size()));
}

FactorResult factor_kk(const TwoArgFunction& g, const Grid& first, const Grid& second,
                       const ConstructionOptions& options) {
    if (first.empty() || second.empty()) {
        throw DomainError("factor_kk needs nonempty grids");
    }
    const double s_max = first.back();
    const double r_max = second.back();
    const Grid nodes = merge_grids({&first, &second});
    std::vector<double> diag(nodes.size());
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        diag[i] = g(std::min(nodes[i], s_max), std::min(nodes[i], r_max));
    }
    std::vector<double> root(diag.size());
    std::transform(diag.begin(), diag.end(), root.begin(), [](double v) { return std::sqrt(std::max(v, 0.0)); });
    ComparisonFunction sigma = increasing_table(nodes, root);
    InequalityCertificate cert = certify_kk(g, sigma, first, second, options.tolerance);
    if (cert.pass) {
        return {sigma, cert, 0};
    }
    std::vector<double> start(diag.size());
    for (std::size_t i = 0; i < diag.size(); ++i) {
        start[i] = std::max(root[i], diag[i]);
    }
    sigma = increasing_table(nodes, std::move(start));
    for (int round = 0;; ++round) {
        cert = certify_kk(g, sigma, first, second, options.tolerance);
        if (cert.pass) {
            return {sigma, cert, round};
        }
        if (round == options.max_rounds) {
            throw ConstructionError("factor_kk: no passing sigma after " + std::to_string(round) + " doublings",
                                    cert.worst_slack);
        }
        sigma = sigma.scaled(2.0);
    }
}

FactorResult factor_kk(const TwoArgFunction& g, const Grid& grid, const ConstructionOptions& options) {
    return factor_kk(g, grid, grid, options);
}

FactorResult factor_product(const ComparisonFunction& gamma, const Grid& grid, const ConstructionOptions& options) {
    const TwoArgFunction g([gamma](double s, double r) { return gamma(s * r); });
    if (gamma.kind() == ComparisonFunction::Kind::Linear || gamma.kind() == ComparisonFunction::Kind::Power) {
        const double b = gamma.kind() == ComparisonFunction::Kind::Linear ? 1.0 : gamma.b();
        const auto sigma = ComparisonFunction::power(std::sqrt(gamma.a()), b);
        const auto cert = certify_kk(g, sigma, grid, grid, options.tolerance);
        if (cert.pass) {
            return {b == 1.0 ? ComparisonFunction::linear(std::sqrt(gamma.a())) : sigma, cert, 0};
        }
    }
    return factor_kk(g, grid, grid, options);
}

KLFactorResult factor_kl(const KLFunction& beta, const Grid& r_grid, const Grid& t_grid,
                         const ConstructionOptions& options) {
    const auto& tol = options.tolerance;
    if (beta.form() == KLFunction::Form::Composed) {
        return {beta.first(), beta.second(), certify_kl(beta, beta.first(), beta.second(), r_grid, t_grid, tol)};
    }
    const auto& g = beta.first();
    const double h0 = beta.second()(0.0);
    {
        const auto outer = ComparisonFunction::identity();
        const auto inner = unbounded(h0 == 1.0 ? g : g.scaled(h0), r_grid);
        auto cert = certify_kl(beta, outer, inner, r_grid, t_grid, tol);
        if (cert.pass) {
            return {outer, inner, std::move(cert)};
        }
    }
    const auto inner = unbounded(g, r_grid);
    std::vector<std::pair<double, double>> pairs;
    for (double r : r_grid) {
        const double ir = inner(r);
        for (double t : t_grid) {
            pairs.emplace_back(ir * std::exp(-t), beta(r, t));
        }
    }
    std::sort(pairs.begin(), pairs.end());
    Grid nodes{0.0};
    std::vector<double> values{0.0};
    for (const auto& [y, v] : pairs) {
        if (y == nodes.back()) {
            values.back() = std::max(values.back(), v);
        } else {
            nodes.push_back(y);
            values.push_back(v);
        }
    }
    for (std::size_t i = 1; i < values.size(); ++i) {
        values[i] = std::max(values[i], values[i - 1]);
    }
    ComparisonFunction outer = increasing_table(nodes, std::move(values));
    for (int round = 0;; ++round) {
        auto cert = certify_kl(beta, outer, inner, r_grid, t_grid, tol);
        if (cert.pass) {
            return {outer, inner, std::move(cert)};
        }
        if (round == options.max_rounds) {
            throw ConstructionError("factor_kl: no passing outer function after " + std::to_string(round) +
                                        " doublings",
                                    cert.worst_slack);
        }
        outer = outer.scaled(2.0);
    }
}

PosdefFactorResult factor_posdef(const ComparisonFunction& rho, const Grid& grid, const ConstructionOptions& options) {
    const Grid pos = positive_part(grid);
    if (pos.empty()) {
        throw DomainError("factor_posdef needs a grid with positive points");
    }
    std::vector<double> q(pos.size());
    for (std::size_t i = 0; i < pos.size(); ++i) {
        const double v = rho(pos[i]);
        if (!(v > 0.0)) {
            throw DomainError("function is not positive definite: value " + std::to_string(v) + " at r = " +
                              std::to_string(pos[i]));
        }
        q[i] = v / pos[i];
    }
    auto attempt = [&](const ComparisonFunction& up, const ComparisonFunction& down) -> std::optional<PosdefFactorResult> {
        if (!verify_class(up, FunctionClass::KInfinity, grid).pass ||
            !verify_class(down, FunctionClass::L, grid).pass) {
            return std::nullopt;
        }
        CertificateBuilder b("increasing(r) * decreasing(r) <= rho(r)", options.tolerance);
        for (double r : grid) {
            b.add(up(r) * down(r), rho(r), {r});
        }
        auto cert = b.finish();
        if (!cert.pass) {
            return std::nullopt;
        }
        return PosdefFactorResult{up, down, std::move(cert)};
    };

    std::vector<double> left_min(q);
    for (std::size_t i = 1; i < left_min.size(); ++i) {
        left_min[i] = std::min(left_min[i], left_min[i - 1]);
    }
    if (auto r = attempt(ComparisonFunction::identity(),
                         ComparisonFunction::table(pos, left_min, tail_of(pos, left_min), FunctionClass::L))) {
        return *r;
    }

    std::vector<double> right_min(q);
    for (std::size_t i = right_min.size() - 1; i-- > 0;) {
        right_min[i] = std::min(right_min[i], right_min[i + 1]);
    }
    std::vector<double> up(pos.size());
    for (std::size_t i = 0; i < pos.size(); ++i) {
        up[i] = pos[i] * right_min[i];
    }
    const Grid up_nodes = with_origin(pos);
    std::vector<double> up_values(up_nodes.size() - pos.size(), 0.0);
    up_values.insert(up_values.end(), up.begin(), up.end());
    const auto increasing = increasing_table(up_nodes, std::move(up_values));
    std::vector<double> down(pos.size());
    double running = kInf;
    for (std::size_t i = 0; i < pos.size(); ++i) {
        running = std::min(running, rho(pos[i]) / increasing(pos[i]));
        down[i] = running / (1.0 + pos[i]);
    }
    if (auto r = attempt(increasing, ComparisonFunction::table(pos, down, tail_of(pos, down), FunctionClass::L))) {
        return *r;
    }
    throw ConstructionError("factor_posdef: no certified factorization on the grid", -kInf);
}

BoundFamilyResult bound_family(const FunctionFamily& family, const Grid& grid, const ConstructionOptions& options) {
    if (family.empty()) {
        throw DomainError("bound_family of an empty family");
    }
    const std::size_t count = family.size();
    const Grid ints = integer_grid(1, static_cast<int>(count));
    const Grid nodes = merge_grids({&grid, &ints});
    const auto extension = two_arg_extend(family, nodes);
    Grid first = ints;
    for (double x : grid) {
        if (x <= static_cast<double>(count)) {
            first.push_back(x);
        }
    }
    first = merge_grids({&first});
    const auto factor = factor_kk(extension, first, grid, options);
    const auto& sigma = factor.sigma;

    std::vector<ComparisonFunction> maxes;
    for (std::size_t M = 1; M <= count; ++M) {
        maxes.push_back(family_max(family, M, nodes));
    }
    CertificateBuilder l1("gamma_M(r) <= max_{i<=M} gamma_i(r)", options.tolerance);
    CertificateBuilder l2("max_{i<=M} gamma_i(r) <= extension(M, r)", options.tolerance);
    CertificateBuilder l3("extension(M, r) <= sigma(M) * sigma(r)", options.tolerance);
    CertificateBuilder chain("gamma_M(r) <= sigma(M) * sigma(r)", options.tolerance);
    for (std::size_t M = 1; M <= count; ++M) {
        const double m = static_cast<double>(M);
        const double sm = sigma(m);
        for (double r : grid) {
            const double direct = family.at(M)(r);
            const double mx = maxes[M - 1](r);
            const double ext = extension(m, r);
            const double rhs = sm * sigma(r);
            l1.add(direct, mx, {m, r});
            l2.add(mx, ext, {m, r});
            l3.add(ext, rhs, {m, r});
            chain.add(direct, rhs, {m, r});
        }
    }
    return {sigma, {l1.finish(), l2.finish(), l3.finish()}, chain.finish()};
}

// ---------------------------------------------------------------------------
// Uniform bounds

namespace {

double weight(const Map& f, double x) {
    if (!f) {
        return 0.0;
    }
    const double v = f(x);
    if (!(v >= 0.0)) {
        throw DomainError("weight function must be nonnegative");
    }
    return v;
}

}  // namespace

std::size_t UniformFamilies::max_index() const noexcept {
    return std::min({decay.size(), integrand.size(), gain.size()});
}

std::size_t UniformFamilies::index(double R, double S) const {
    const double k = std::ceil(weight(first_weight, R) + weight(second_weight, S));
    return k < 1.0 ? 1 : static_cast<std::size_t>(k);
}

double UniformFamilies::lhs(double R, double S, double T, const InputSignal& phi) const {
    const std::size_t K = index(R, S);
    if (K > max_index()) {
        throw IndexError("uniform bound needs index " + std::to_string(K) + " but the families stop at " +
                         std::to_string(max_index()));
    }
    return decay.at(K)(R, T) + gain.at(K)(phi.integral(integrand.at(K), T));
}

double Uniformized::rhs(double R, double S, double T, const InputSignal& phi) const {
    return beta(R, T) + gamma1(weight(first_weight, R)) + gamma2(weight(second_weight, S)) +
           delta1(phi.integral(delta2, T));
}

std::vector<UniformSample> uniform_samples(const UniformizeOptions& options) {
    std::mt19937_64 rng(options.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<UniformSample> out;
    for (std::size_t i = 0; i < options.samples; ++i) {
        UniformSample s;
        s.R = options.R_max * (1.0 - unit(rng));
        s.S = options.S_max * (1.0 - unit(rng));
        s.T = options.T_max * unit(rng);
        std::vector<std::vector<double>> values;
        for (std::size_t k = 0; k < std::max<std::size_t>(options.phi_segments, 1); ++k) {
            values.push_back({options.phi_max * unit(rng)});
        }
        s.phi = InputSignal::uniform_segments(s.T > 0.0 ? s.T : 1.0, std::move(values));
        out.push_back(std::move(s));
    }
    return out;
}

InequalityCertificate certify_uniform(const UniformFamilies& families, const Uniformized& bound,
                                      const std::vector<UniformSample>& samples, CertificateTolerance tol) {
    CertificateBuilder b("index-dependent estimate <= uniform estimate", tol);
    for (const auto& s : samples) {
        b.add(families.lhs(s.R, s.S, s.T, s.phi), bound.rhs(s.R, s.S, s.T, s.phi), {s.R, s.S, s.T});
    }
    return b.finish();
}

Uniformized uniformize(const UniformFamilies& families, const UniformizeOptions& options) {
    return uniformize(families, uniform_samples(options), options);
}

Uniformized uniformize(const UniformFamilies& families, const std::vector<UniformSample>& samples,
                       const UniformizeOptions& options) {
    const std::size_t count = families.max_index();
    if (count == 0) {
        throw DomainError("uniformize needs nonempty families");
    }
    double R_top = 1.0, T_top = 1.0, phi_top = 1.0, w_top = 1.0;
    for (const auto& s : samples) {
        const std::size_t K = families.index(s.R, s.S);
        if (K > count) {
            throw IndexError("sample (R=" + std::to_string(s.R) + ", S=" + std::to_string(s.S) + ") needs index " +
                             std::to_string(K) + " but the families stop at " + std::to_string(count));
        }
        R_top = std::max(R_top, s.R);
        T_top = std::max(T_top, s.T);
        phi_top = std::max(phi_top, s.phi.sup_norm());
        w_top = std::max({w_top, weight(families.first_weight, s.R), weight(families.second_weight, s.S)});
    }
    const Grid ints = integer_grid(1, static_cast<int>(count));
    auto cert_grid = [&](double top) {
        top = std::max(top, 1.0);
        const Grid lg = log_grid(top * 1e-6, top, 64);
        const Grid zero{0.0};
        return merge_grids({&zero, &lg, &ints});
    };
    auto fine_grid = [](double top) {
        top = std::max(top, 1.0);
        const Grid lg = log_grid(top * 1e-9, top, 256);
        const Grid zero{0.0};
        return merge_grids({&zero, &lg});
    };
    const auto& opt = options.construction;
    Uniformized out{KLFunction::exponential(),
                    ComparisonFunction::identity(),
                    ComparisonFunction::identity(),
                    ComparisonFunction::identity(),
                    ComparisonFunction::identity(),
                    ComparisonFunction::identity(),
                    ComparisonFunction::identity(),
                    families.first_weight,
                    families.second_weight,
                    {},
                    {},
                    0};

    // Decay family: beta~_M <= theta1_M(theta2_M(r) e^{-t}).
    const Grid r_grid = cert_grid(R_top);
    const Grid t_lin = linear_grid(0.0, T_top, 41);
    const Grid t_log = log_grid(1e-4, T_top, 32);
    const Grid t_grid = merge_grids({&t_lin, &t_log});
    std::vector<ComparisonFunction> outers, inners;
    double inner_top = 1.0;
    for (std::size_t M = 1; M <= count; ++M) {
        auto kl = factor_kl(families.decay.at(M), r_grid, t_grid, opt);
        inner_top = std::max(inner_top, kl.inner(R_top));
        out.stages.push_back(std::move(kl.certificate));
        outers.push_back(std::move(kl.outer));
        inners.push_back(std::move(kl.inner));
    }
    const FunctionFamily outer_family(std::move(outers));
    const FunctionFamily inner_family(std::move(inners));
    const auto inner_bound = bound_family(inner_family, cert_grid(std::max(R_top, double(count))), opt);
    const auto outer_bound = bound_family(outer_family, cert_grid(inner_top), opt);
    out.stages.push_back(inner_bound.certificate);
    out.stages.push_back(outer_bound.certificate);
    const auto& s_in = inner_bound.sigma;
    const auto& s_out = outer_bound.sigma;
    const auto theta =
        factor_product(s_out, cert_grid(std::max(s_in(double(count)), s_in(R_top))), opt);
    out.stages.push_back(theta.certificate);
    const auto decay_gain = [&](double M) { return s_out(M) * theta.sigma(s_in(M)); };
    const KLFunction beta_hat = KLFunction::composed(theta.sigma, s_in);
    {
        CertificateBuilder b("beta~_M(r, t) <= gain(M) * beta^(r, t)", opt.tolerance);
        for (std::size_t M = 1; M <= count; ++M) {
            const double m = static_cast<double>(M);
            const double gm = decay_gain(m);
            for (double r : r_grid) {
                for (double t : t_grid) {
                    b.add(families.decay.at(M)(r, t), gm * beta_hat(r, t), {m, r, t});
                }
            }
        }
        out.stages.push_back(b.finish());
    }

    // Gain and integrand families.
    double integral_top = 1.0;
    for (std::size_t M = 1; M <= count; ++M) {
        integral_top = std::max(integral_top, T_top * families.integrand.at(M)(phi_top));
    }
    const auto integrand_bound = bound_family(families.integrand, cert_grid(std::max(phi_top, double(count))), opt);
    const auto gain_bound = bound_family(families.gain, cert_grid(std::max(integral_top, double(count))), opt);
    out.stages.push_back(integrand_bound.certificate);
    out.stages.push_back(gain_bound.certificate);
    const auto& s2 = integrand_bound.sigma;
    const auto& s1 = gain_bound.sigma;
    const double delta_arg_top = T_top * s2(phi_top);
    const auto theta2 = factor_product(s1, cert_grid(std::max(s2(double(count)), delta_arg_top)), opt);
    out.stages.push_back(theta2.certificate);
    const auto gain_gain = [&](double M) { return s1(M) * theta2.sigma(s2(M)); };

    // Combination.
    const double k_top = 3.0 * w_top;
    out.decay_index_gain = upper_tabulate(decay_gain, fine_grid(k_top), FunctionClass::KInfinity);
    out.gain_index_gain = upper_tabulate(gain_gain, fine_grid(k_top), FunctionClass::KInfinity);
    const auto& g1 = out.decay_index_gain;
    const auto& g2 = out.gain_index_gain;
    const double c1 = g1(3.0);
    const double c2 = g2(3.0);
    const auto& th = theta.sigma;
    const auto& th2 = theta2.sigma;
    const auto beta_outer = upper_tabulate(
        [&](double y) {
            const double v = th(y);
            return c1 * v + 2.0 * v * v;
        },
        fine_grid(s_in(R_top)), FunctionClass::KInfinity);
    out.beta = KLFunction::composed(beta_outer, s_in);
    out.gamma1 = upper_tabulate(
        [&](double r) {
            const double a = g1(3.0 * r);
            const double b = g2(3.0 * r);
            return a * a + b * b;
        },
        fine_grid(w_top), FunctionClass::KInfinity);
    out.gamma2 = out.gamma1;
    out.delta1 = upper_tabulate(
        [&](double y) {
            const double v = th2(y);
            return c2 * v + 2.0 * v * v;
        },
        fine_grid(delta_arg_top), FunctionClass::KInfinity);
    out.delta2 = s2;

    for (int round = 0;; ++round) {
        out.certificate = certify_uniform(families, out, samples, opt.tolerance);
        out.doublings = round;
        if (out.certificate.pass) {
            return out;
        }
        if (round == opt.max_rounds) {
            throw ConstructionError("uniformize: uniform estimate not certified after " + std::to_string(round) +
                                        " doublings",
                                    out.certificate.worst_slack);
        }
        out.beta = out.beta.scaled(2.0);
        out.gamma1 = out.gamma1.scaled(2.0);
        out.gamma2 = out.gamma2.scaled(2.0);
        out.delta1 = out.delta1.scaled(2.0);
    }
}

}  // namespace iiss
