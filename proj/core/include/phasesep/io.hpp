#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace phasesep {

/// Round-trip decimal form of a double (17 significant digits).
std::string format_double(double v);

/// Lowercase hex SHA-256 of a file's bytes.
std::string sha256_file(const std::filesystem::path& path);
/// Lowercase hex SHA-256 of a byte string.
std::string sha256_hex(const std::string& bytes);

struct ManifestEntry {
    std::string path;
    std::uintmax_t bytes = 0;
    std::string sha256;
};

/// Output directory that records every file it writes.
class OutputDir {
public:
    explicit OutputDir(std::filesystem::path root);

    const std::filesystem::path& root() const { return root_; }

    /// CSV with a header row; every value at 17 significant digits.
    void write_csv(const std::string& name, const std::vector<std::string>& header,
                   const std::vector<std::vector<double>>& rows);
    void write_text(const std::string& name, const std::string& text);

    /// Entries in write order; a rewritten file keeps its first position.
    const std::vector<ManifestEntry>& manifest() const { return manifest_; }

private:
    void record(const std::string& name);

    std::filesystem::path root_;
    std::vector<ManifestEntry> manifest_;
};

}  // namespace phasesep
