#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "iiss/comparison_functions.hpp"
#include "iiss/estimate_checker.hpp"

/// JSON text formats for functions, estimate specs, certificates, reports
/// and witnesses. Numbers are written in shortest round-trip form; the
/// non-finite values are written as the strings "inf", "-inf" and "nan".
namespace iiss::io {

/// Provenance block written at the top of every output document.
struct Header {
    std::string tool = "iiss";
    std::string version;
    std::uint64_t seed = 0;
    CertificateTolerance certificate;
    ode::Tolerance integrator;
};

/// {"kind": ..., "class": ..., parameters}. A bare string parses as an
/// expression in r with `default_class`.
std::string to_json(const ComparisonFunction& f);
ComparisonFunction parse_function(std::string_view text, FunctionClass default_class = FunctionClass::KInfinity);

/// {"form": "composed" | "product", "first": ..., "second": ...}
std::string to_json(const KLFunction& beta);
KLFunction parse_kl(std::string_view text);

/// {"form": "ISS", "slots": {...}, "p": 2, "q": 2, "c": 0, "M": 0}
std::string to_json(const EstimateSpec& spec);
EstimateSpec parse_spec(std::string_view text);

std::string to_json(const InequalityCertificate& cert);

/// {"xi": [...], "input": {"breakpoints": [...], "values": [[...]]}, "time": t, "horizon": T}
std::string to_json(const Witness& w);
Witness parse_witness(std::string_view text);

/// Report with an optional header and a reference to a separate witness file.
std::string to_json(const CheckReport& report, const std::optional<Header>& header = std::nullopt,
                    const std::optional<std::string>& witness_file = std::nullopt);

/// Generic document: header followed by named JSON members (already encoded).
std::string document(const Header& header, const std::vector<std::pair<std::string, std::string>>& members);

}  // namespace iiss::io
