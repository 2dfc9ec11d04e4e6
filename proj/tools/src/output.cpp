#include "output.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <system_error>

#include <iiss/errors.hpp>
#include <iiss/expression.hpp>

namespace iiss::cli {

namespace fs = std::filesystem;

namespace {

std::string fmt(double v) {
    char buf[32];
    return std::string(buf, std::to_chars(buf, buf + sizeof buf, v).ptr);
}

}  // namespace

OutputDir::OutputDir(fs::path target) : target_(std::move(target)) {
    if (target_.empty()) {
        throw Error("output directory not given");
    }
    const fs::path parent = fs::absolute(target_).parent_path();
    fs::create_directories(parent);
    const std::string base = target_.filename().string();
    for (int attempt = 0;; ++attempt) {
        staging_ = parent / ("." + base + ".staging-" + std::to_string(attempt));
        std::error_code ec;
        if (fs::create_directory(staging_, ec)) {
            break;
        }
        if (attempt > 1000) {
            throw Error("cannot create staging directory next to " + target_.string());
        }
    }
}

OutputDir::~OutputDir() {
    if (!committed_) {
        std::error_code ec;
        fs::remove_all(staging_, ec);
    }
}

void OutputDir::write(const std::string& name, const std::string& contents) {
    std::ofstream out(staging_ / name, std::ios::binary);
    out << contents;
    if (!out) {
        throw Error("cannot write " + (target_ / name).string());
    }
}

void OutputDir::commit() {
    std::error_code ec;
    fs::path previous;
    if (fs::exists(target_)) {
        previous = staging_;
        previous += ".previous";
        fs::rename(target_, previous);
    }
    fs::rename(staging_, target_, ec);
    if (ec) {
        if (!previous.empty()) {
            fs::rename(previous, target_);
        }
        throw Error("cannot move output into " + target_.string() + ": " + ec.message());
    }
    if (!previous.empty()) {
        fs::remove_all(previous, ec);
    }
    committed_ = true;
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error("cannot read " + path.string());
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<double> parse_vector(const std::string& text) {
    std::vector<double> out;
    std::size_t start = 0;
    while (start <= text.size()) {
        const std::size_t comma = text.find(',', start);
        const std::string item = text.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
        if (item.find_first_not_of(" \t") == std::string::npos) {
            throw ParseError("empty vector entry", 1, start + 1);
        }
        const double v = Expression::parse(item, {}, {1, start + 1}).evaluate({});
        if (!std::isfinite(v)) {
            throw ParseError("vector entry is not finite", 1, start + 1);
        }
        out.push_back(v);
        if (comma == std::string::npos) {
            break;
        }
        start = comma + 1;
    }
    return out;
}

io::Header make_header(std::uint64_t seed, const CertificateTolerance& cert, const ode::Tolerance& integrator) {
    io::Header h;
    h.version = IISS_VERSION;
    h.seed = seed;
    h.certificate = cert;
    h.integrator = integrator;
    return h;
}

std::vector<std::string> header_comments(const io::Header& h) {
    return {h.tool + " " + h.version, "seed " + std::to_string(h.seed),
            "certificate_tolerance " + fmt(h.certificate.absolute) + " " + fmt(h.certificate.relative),
            "integrator_tolerance " + fmt(h.integrator.absolute) + " " + fmt(h.integrator.relative)};
}

}  // namespace iiss::cli
