#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <iiss/serialization.hpp>

namespace iiss::cli {

/// Files are written to a sibling staging directory and moved into place
/// in one rename on commit().
class OutputDir {
public:
    explicit OutputDir(std::filesystem::path target);
    ~OutputDir();
    OutputDir(const OutputDir&) = delete;
    OutputDir& operator=(const OutputDir&) = delete;

    void write(const std::string& name, const std::string& contents);
    void commit();

    [[nodiscard]] const std::filesystem::path& target() const noexcept { return target_; }

private:
    std::filesystem::path target_;
    std::filesystem::path staging_;
    bool committed_ = false;
};

std::string read_file(const std::filesystem::path& path);

/// Comma-separated list; each entry may be an expression such as `pi/2+1`.
std::vector<double> parse_vector(const std::string& text);

/// "# key value" lines for CSV outputs.
std::vector<std::string> header_comments(const io::Header& header);

io::Header make_header(std::uint64_t seed, const CertificateTolerance& cert, const ode::Tolerance& integrator);

}  // namespace iiss::cli
