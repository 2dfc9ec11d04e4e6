#include "iiss/serialization.hpp"

#include <cmath>
#include <limits>

#include <json.hpp>

#include "iiss/errors.hpp"

namespace iiss::io {

namespace {

using Json = nlohmann::ordered_json;

Json number(double v) {
    if (std::isnan(v)) {
        return "nan";
    }
    if (std::isinf(v)) {
        return v > 0 ? "inf" : "-inf";
    }
    return v;
}

Json numbers(const std::vector<double>& v) {
    Json out = Json::array();
    for (double x : v) {
        out.push_back(number(x));
    }
    return out;
}

double read_number(const Json& j, std::string_view what) {
    if (j.is_number()) {
        return j.get<double>();
    }
    if (j.is_string()) {
        const auto s = j.get<std::string>();
        if (s == "inf") return std::numeric_limits<double>::infinity();
        if (s == "-inf") return -std::numeric_limits<double>::infinity();
        if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    }
    throw SpecError("field '" + std::string(what) + "' must be a number");
}

std::vector<double> read_numbers(const Json& j, std::string_view what) {
    if (!j.is_array()) {
        throw SpecError("field '" + std::string(what) + "' must be an array");
    }
    std::vector<double> out;
    for (const auto& x : j) {
        out.push_back(read_number(x, what));
    }
    return out;
}

const Json& member(const Json& j, const char* key) {
    if (!j.is_object() || !j.contains(key)) {
        throw SpecError(std::string("missing field '") + key + "'");
    }
    return j.at(key);
}

double number_or(const Json& j, const char* key, double fallback) {
    return j.contains(key) ? read_number(j.at(key), key) : fallback;
}

Json parse_text(std::string_view text) {
    try {
        return Json::parse(text.begin(), text.end(), nullptr, true, true);
    } catch (const nlohmann::json::parse_error& e) {
        std::size_t line = 1;
        std::size_t column = 1;
        for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
            if (text[i] == '\n') {
                ++line;
                column = 1;
            } else {
                ++column;
            }
        }
        throw ParseError("malformed JSON", line, column);
    }
}

std::string_view kind_name(ComparisonFunction::Kind k) {
    switch (k) {
    case ComparisonFunction::Kind::Linear:
        return "linear";
    case ComparisonFunction::Kind::Power:
        return "power";
    case ComparisonFunction::Kind::ExpMinusOne:
        return "exp_minus_one";
    case ComparisonFunction::Kind::Saturating:
        return "saturating";
    case ComparisonFunction::Kind::Table:
        return "table";
    case ComparisonFunction::Kind::Expr:
        return "expression";
    }
    return "linear";
}

Json encode(const ComparisonFunction& f) {
    Json j;
    j["kind"] = kind_name(f.kind());
    j["class"] = to_string(f.declared_class());
    switch (f.kind()) {
    case ComparisonFunction::Kind::Linear:
    case ComparisonFunction::Kind::Saturating:
        j["a"] = number(f.a());
        break;
    case ComparisonFunction::Kind::Power:
    case ComparisonFunction::Kind::ExpMinusOne:
        j["a"] = number(f.a());
        j["b"] = number(f.b());
        break;
    case ComparisonFunction::Kind::Table:
        j["x"] = numbers(f.table_x());
        j["y"] = numbers(f.table_y());
        j["tail_exponent"] = number(f.tail_exponent());
        break;
    case ComparisonFunction::Kind::Expr:
        j["expr"] = f.expression_text();
        break;
    }
    return j;
}

ComparisonFunction decode_function(const Json& j, FunctionClass default_class) {
    if (j.is_string()) {
        return ComparisonFunction::expression(j.get<std::string>(), default_class);
    }
    if (j.is_number()) {
        throw SpecError("a comparison function cannot be a bare number");
    }
    const std::string kind = member(j, "kind").get<std::string>();
    const FunctionClass cls =
        j.contains("class") ? function_class_from_string(j.at("class").get<std::string>()) : default_class;
    if (kind == "linear") return ComparisonFunction::linear(number_or(j, "a", 1.0), cls);
    if (kind == "saturating") return ComparisonFunction::saturating(number_or(j, "a", 1.0), cls);
    if (kind == "power") return ComparisonFunction::power(number_or(j, "a", 1.0), read_number(member(j, "b"), "b"), cls);
    if (kind == "exp_minus_one") {
        return ComparisonFunction::exp_minus_one(number_or(j, "a", 1.0), number_or(j, "b", 1.0), cls);
    }
    if (kind == "table") {
        return ComparisonFunction::table(read_numbers(member(j, "x"), "x"), read_numbers(member(j, "y"), "y"),
                                         number_or(j, "tail_exponent", 1.0), cls);
    }
    if (kind == "expression") {
        return ComparisonFunction::expression(member(j, "expr").get<std::string>(), cls);
    }
    throw SpecError("unknown function kind '" + kind + "'");
}

Json encode(const KLFunction& beta) {
    Json j;
    j["form"] = beta.form() == KLFunction::Form::Composed ? "composed" : "product";
    j["first"] = encode(beta.first());
    j["second"] = encode(beta.second());
    return j;
}

KLFunction decode_kl(const Json& j) {
    const std::string form = member(j, "form").get<std::string>();
    if (form == "composed") {
        return KLFunction::composed(decode_function(member(j, "first"), FunctionClass::KInfinity),
                                    decode_function(member(j, "second"), FunctionClass::KInfinity));
    }
    if (form == "product") {
        return KLFunction::product(decode_function(member(j, "first"), FunctionClass::KInfinity),
                                   decode_function(member(j, "second"), FunctionClass::L));
    }
    throw SpecError("unknown KL form '" + form + "'");
}

Json encode(const InequalityCertificate& c) {
    Json j;
    j["description"] = c.description;
    j["pass"] = c.pass;
    j["points"] = c.points;
    j["grid_min"] = number(c.grid_min);
    j["grid_max"] = number(c.grid_max);
    j["worst_slack"] = number(c.worst_slack);
    j["tolerance"] = number(c.tolerance);
    j["worst_point"] = numbers(c.worst_point);
    return j;
}

Json encode(const InputSignal& u) {
    Json j;
    j["breakpoints"] = numbers(u.breakpoints());
    Json values = Json::array();
    for (std::size_t i = 0; i < u.segments(); ++i) {
        const auto v = u.segment_value(i);
        values.push_back(numbers(std::vector<double>(v.begin(), v.end())));
    }
    j["values"] = std::move(values);
    return j;
}

InputSignal decode_input(const Json& j) {
    auto breaks = read_numbers(member(j, "breakpoints"), "breakpoints");
    std::vector<std::vector<double>> values;
    for (const auto& row : member(j, "values")) {
        values.push_back(read_numbers(row, "values"));
    }
    if (breaks.empty() && values.empty()) {
        return InputSignal();
    }
    return InputSignal(std::move(breaks), std::move(values));
}

Json encode(const Witness& w) {
    Json j;
    j["xi"] = numbers(w.xi);
    j["input"] = encode(w.input);
    j["time"] = number(w.time);
    j["horizon"] = number(w.horizon);
    return j;
}

Json encode(const Header& h) {
    Json j;
    j["tool"] = h.tool;
    j["version"] = h.version;
    j["seed"] = h.seed;
    j["certificate_tolerance"] = {{"absolute", number(h.certificate.absolute)},
                                  {"relative", number(h.certificate.relative)}};
    j["integrator_tolerance"] = {{"absolute", number(h.integrator.absolute)},
                                 {"relative", number(h.integrator.relative)}};
    return j;
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

}  // namespace

std::string to_json(const ComparisonFunction& f) { return dump(encode(f)); }

ComparisonFunction parse_function(std::string_view text, FunctionClass default_class) {
    return decode_function(parse_text(text), default_class);
}

std::string to_json(const KLFunction& beta) { return dump(encode(beta)); }

KLFunction parse_kl(std::string_view text) { return decode_kl(parse_text(text)); }

std::string to_json(const EstimateSpec& spec) {
    Json j;
    j["form"] = to_string(spec.form);
    Json slots = Json::object();
    if (spec.beta) {
        slots["beta"] = encode(*spec.beta);
    }
    for (const auto& [name, f] : spec.functions) {
        slots[name] = encode(f);
    }
    j["slots"] = std::move(slots);
    j["p"] = number(spec.p);
    j["q"] = number(spec.q);
    j["c"] = number(spec.c);
    j["M"] = number(spec.M);
    return dump(j);
}

EstimateSpec parse_spec(std::string_view text) {
    const Json j = parse_text(text);
    EstimateSpec spec;
    spec.form = estimate_form_from_string(member(j, "form").get<std::string>());
    if (j.contains("slots")) {
        for (const auto& [name, value] : j.at("slots").items()) {
            if (name == "beta") {
                spec.beta = decode_kl(value);
            } else {
                const FunctionClass cls = name == "gamma" ? FunctionClass::K : FunctionClass::KInfinity;
                spec.functions.emplace(name, decode_function(value, cls));
            }
        }
    }
    spec.p = number_or(j, "p", 2.0);
    spec.q = number_or(j, "q", 2.0);
    spec.c = number_or(j, "c", 0.0);
    spec.M = number_or(j, "M", 0.0);
    return spec;
}

std::string to_json(const InequalityCertificate& cert) { return dump(encode(cert)); }

std::string to_json(const Witness& w) { return dump(encode(w)); }

Witness parse_witness(std::string_view text) {
    const Json j = parse_text(text);
    Witness w;
    w.xi = read_numbers(member(j, "xi"), "xi");
    w.input = decode_input(member(j, "input"));
    w.time = read_number(member(j, "time"), "time");
    w.horizon = read_number(member(j, "horizon"), "horizon");
    return w;
}

std::string to_json(const CheckReport& report, const std::optional<Header>& header,
                    const std::optional<std::string>& witness_file) {
    Json j;
    if (header) {
        j["header"] = encode(*header);
    }
    j["form"] = report.form;
    j["verdict"] = to_string(report.verdict);
    j["margin"] = number(report.margin);
    j["tolerance"] = number(report.tolerance);
    j["seed"] = report.seed;
    j["evaluations"] = report.evaluations;
    j["integrator_tolerance"] = {{"absolute", number(report.integrator.absolute)},
                                 {"relative", number(report.integrator.relative)}};
    Json components = Json::object();
    for (const auto& [name, value] : report.components) {
        components[name] = number(value);
    }
    j["components"] = std::move(components);
    j["notes"] = report.notes;
    if (witness_file) {
        j["witness_file"] = *witness_file;
    } else if (report.witness) {
        j["witness"] = encode(*report.witness);
    }
    return dump(j);
}

std::string document(const Header& header, const std::vector<std::pair<std::string, std::string>>& members) {
    Json j;
    j["header"] = encode(header);
    for (const auto& [name, text] : members) {
        j[name] = parse_text(text);
    }
    return dump(j);
}

}  // namespace iiss::io
