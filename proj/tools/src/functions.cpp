#include <algorithm>
#include <array>
#include <cmath>
#include <iostream>
#include <regex>

#include <json.hpp>

#include <iiss/constructions.hpp>
#include <iiss/errors.hpp>
#include <iiss/expression.hpp>
#include <iiss/serialization.hpp>

#include "commands.hpp"
#include "output.hpp"

namespace iiss::cli {

namespace {

using Json = nlohmann::ordered_json;

Grid read_grid(const Json& j) {
    if (j.is_array()) {
        Grid g = j.get<std::vector<double>>();
        std::sort(g.begin(), g.end());
        g.erase(std::unique(g.begin(), g.end()), g.end());
        return g;
    }
    if (j.contains("linear")) {
        const auto p = j.at("linear");
        return linear_grid(p.at(0).get<double>(), p.at(1).get<double>(), p.at(2).get<std::size_t>());
    }
    if (j.contains("log")) {
        const auto p = j.at("log");
        Grid g = log_grid(p.at(0).get<double>(), p.at(1).get<double>(), p.at(2).get<std::size_t>());
        if (j.value("with_zero", false)) {
            g.insert(g.begin(), 0.0);
        }
        return g;
    }
    throw SpecError("grid must be an array or {\"linear\": [lo, hi, n]} or {\"log\": [lo, hi, n]}");
}

Grid grid_or_default(const Json& j, const char* key) {
    return j.contains(key) ? read_grid(j.at(key)) : default_grid();
}

std::string substitute_index(const std::string& text, std::size_t index) {
    static const std::regex kIndex(R"(\bM\b)");
    return std::regex_replace(text, kIndex, "(" + std::to_string(index) + ")");
}

/// A function that may mention the family index M.
Json instantiate(const Json& j, std::size_t index) {
    if (j.is_string()) {
        return substitute_index(j.get<std::string>(), index);
    }
    Json copy = j;
    if (copy.is_object() && copy.contains("expr")) {
        copy["expr"] = substitute_index(copy["expr"].get<std::string>(), index);
    }
    if (copy.is_object() && copy.contains("first")) {
        copy["first"] = instantiate(copy["first"], index);
        copy["second"] = instantiate(copy["second"], index);
    }
    return copy;
}

/// Either an explicit list of functions or {"template": f(r, M), "size": n}.
FunctionFamily read_family(const Json& j) {
    std::vector<ComparisonFunction> members;
    if (j.is_array()) {
        for (const auto& f : j) {
            members.push_back(io::parse_function(f.dump()));
        }
    } else {
        const std::size_t size = j.at("size").get<std::size_t>();
        for (std::size_t M = 1; M <= size; ++M) {
            members.push_back(io::parse_function(instantiate(j.at("template"), M).dump()));
        }
    }
    return FunctionFamily(std::move(members));
}

KLFamily read_kl_family(const Json& j) {
    std::vector<KLFunction> members;
    if (j.is_array()) {
        for (const auto& f : j) {
            members.push_back(io::parse_kl(f.dump()));
        }
    } else {
        const std::size_t size = j.at("size").get<std::size_t>();
        for (std::size_t M = 1; M <= size; ++M) {
            members.push_back(io::parse_kl(instantiate(j.at("template"), M).dump()));
        }
    }
    return KLFamily(std::move(members));
}

Map read_map(const Json& j) {
    const auto f = io::parse_function(j.dump());
    return [f](double r) { return f(r); };
}

Json parsed(const std::string& text) { return Json::parse(text); }

Json function_entry(const ComparisonFunction& f) { return parsed(io::to_json(f)); }

Json certificate_entry(const InequalityCertificate& c) { return parsed(io::to_json(c)); }

struct Outcome {
    Json result;
    bool pass = true;
};

Outcome run_construction(const std::string& name, const Json& in, const ConstructionOptions& options) {
    Outcome o;
    if (name == "family-max") {
        const auto family = read_family(in.at("family"));
        const Grid grid = grid_or_default(in, "grid");
        const auto f = family_max(family, in.value("index", family.size()), grid);
        o.result["function"] = function_entry(f);
    } else if (name == "extend") {
        const auto family = read_family(in.at("family"));
        const Grid grid = grid_or_default(in, "grid");
        const auto g = two_arg_extend(family, grid);
        const Grid s_grid = in.contains("s_grid") ? read_grid(in.at("s_grid"))
                                                  : linear_grid(0.0, static_cast<double>(family.size()),
                                                                4 * family.size() + 1);
        const Grid r_grid = in.contains("r_grid") ? read_grid(in.at("r_grid")) : grid;
        Json values = Json::array();
        for (double s : s_grid) {
            Json row = Json::array();
            for (double r : r_grid) {
                row.push_back(g(s, r));
            }
            values.push_back(std::move(row));
        }
        o.result["s"] = s_grid;
        o.result["r"] = r_grid;
        o.result["values"] = std::move(values);
    } else if (name == "factor-kk") {
        const auto expr = Expression::parse(in.at("map").get<std::string>(), {"s", "r"});
        const TwoArgFunction g([expr](double s, double r) {
            const std::array<double, 2> v{s, r};
            return expr.evaluate(v);
        });
        const Grid first = in.contains("first_grid") ? read_grid(in.at("first_grid")) : grid_or_default(in, "grid");
        const Grid second = in.contains("second_grid") ? read_grid(in.at("second_grid")) : first;
        const auto r = factor_kk(g, first, second, options);
        o.result["sigma"] = function_entry(r.sigma);
        o.result["doublings"] = r.doublings;
        o.result["certificate"] = certificate_entry(r.certificate);
        o.pass = r.certificate.pass;
    } else if (name == "factor-product") {
        const auto gamma = io::parse_function(in.at("gamma").dump());
        const auto r = factor_product(gamma, grid_or_default(in, "grid"), options);
        o.result["sigma"] = function_entry(r.sigma);
        o.result["doublings"] = r.doublings;
        o.result["certificate"] = certificate_entry(r.certificate);
        o.pass = r.certificate.pass;
    } else if (name == "factor-kl") {
        const auto beta = io::parse_kl(in.at("beta").dump());
        const Grid r_grid = grid_or_default(in, "r_grid");
        const Grid t_grid = in.contains("t_grid") ? read_grid(in.at("t_grid")) : linear_grid(0.0, 20.0, 41);
        const auto r = factor_kl(beta, r_grid, t_grid, options);
        o.result["outer"] = function_entry(r.outer);
        o.result["inner"] = function_entry(r.inner);
        o.result["certificate"] = certificate_entry(r.certificate);
        o.pass = r.certificate.pass;
    } else if (name == "factor-posdef") {
        const auto rho = io::parse_function(in.at("rho").dump(), FunctionClass::PositiveDefinite);
        const auto r = factor_posdef(rho, grid_or_default(in, "grid"), options);
        o.result["increasing"] = function_entry(r.increasing);
        o.result["decreasing"] = function_entry(r.decreasing);
        o.result["certificate"] = certificate_entry(r.certificate);
        o.pass = r.certificate.pass;
    } else if (name == "bound-family") {
        const auto family = read_family(in.at("family"));
        const auto r = bound_family(family, grid_or_default(in, "grid"), options);
        o.result["sigma"] = function_entry(r.sigma);
        Json links = Json::array();
        for (const auto& c : r.links) {
            links.push_back(certificate_entry(c));
            o.pass = o.pass && c.pass;
        }
        o.result["links"] = std::move(links);
        o.result["certificate"] = certificate_entry(r.certificate);
        o.pass = o.pass && r.certificate.pass;
    } else if (name == "uniformize") {
        UniformFamilies families;
        families.decay = read_kl_family(in.at("decay"));
        families.integrand = read_family(in.at("integrand"));
        families.gain = read_family(in.at("gain"));
        families.first_weight = read_map(in.value("first_weight", Json("r")));
        families.second_weight = read_map(in.value("second_weight", Json("r")));
        UniformizeOptions u;
        u.construction = options;
        u.samples = in.value("samples", u.samples);
        u.R_max = in.value("R_max", u.R_max);
        u.S_max = in.value("S_max", u.S_max);
        u.T_max = in.value("T_max", u.T_max);
        u.phi_max = in.value("phi_max", u.phi_max);
        u.phi_segments = in.value("phi_segments", u.phi_segments);
        u.seed = in.value("seed", u.seed);
        const auto r = uniformize(families, u);
        o.result["beta"] = parsed(io::to_json(r.beta));
        o.result["gamma1"] = function_entry(r.gamma1);
        o.result["gamma2"] = function_entry(r.gamma2);
        o.result["delta1"] = function_entry(r.delta1);
        o.result["delta2"] = function_entry(r.delta2);
        o.result["doublings"] = r.doublings;
        Json stages = Json::array();
        for (const auto& c : r.stages) {
            stages.push_back(certificate_entry(c));
        }
        o.result["stages"] = std::move(stages);
        o.result["certificate"] = certificate_entry(r.certificate);
        o.pass = r.certificate.pass;
    } else {
        throw Error("unknown construction '" + name +
                    "' (family-max, extend, factor-kk, factor-product, factor-kl, factor-posdef, bound-family, "
                    "uniformize)");
    }
    return o;
}

}  // namespace

int cmd_functions(const RunConfig& cfg, const std::string& construction) {
    if (cfg.input.empty()) {
        throw Error("--input is required");
    }
    const std::string text = read_file(cfg.input);
    Json in;
    try {
        in = Json::parse(text, nullptr, true, true);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("malformed JSON: ") + e.what(), 1, e.byte);
    }
    ConstructionOptions options;
    options.tolerance = {cfg.cert_abs, cfg.cert_rel};
    Outcome o;
    try {
        o = run_construction(construction, in, options);
    } catch (const nlohmann::json::exception& e) {
        throw SpecError(std::string("construction input: ") + e.what());
    }
    const io::Header header = make_header(cfg.seed, options.tolerance, {cfg.tol_abs, cfg.tol_rel});
    OutputDir out(cfg.out);
    out.write("result.json", io::document(header, {{"construction", Json(construction).dump()},
                                                   {"result", o.result.dump()}}));
    out.commit();
    std::cout << construction << " certificate " << (o.pass ? "pass" : "fail") << "\n";
    return o.pass ? kOk : kViolated;
}

}  // namespace iiss::cli
