#include "phasesep/io.hpp"

#include "phasesep/error.hpp"

#include <openssl/evp.h>

#include <array>
#include <cstdio>
#include <fstream>
#include <memory>

namespace phasesep {

std::string format_double(double v) {
    std::array<char, 40> buf{};
    std::snprintf(buf.data(), buf.size(), "%.17g", v);
    return buf.data();
}

namespace {

class Sha256 {
public:
    Sha256() : ctx_(EVP_MD_CTX_new(), EVP_MD_CTX_free) {
        require(ctx_ && EVP_DigestInit_ex(ctx_.get(), EVP_sha256(), nullptr) == 1, ErrorKind::InvalidInput,
                "SHA-256 initialisation failed");
    }
    void update(const char* data, size_t n) { EVP_DigestUpdate(ctx_.get(), data, n); }
    std::string hex() {
        std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
        unsigned int len = 0;
        EVP_DigestFinal_ex(ctx_.get(), md.data(), &len);
        static const char* digits = "0123456789abcdef";
        std::string out;
        for (unsigned int i = 0; i < len; ++i) {
            out += digits[md[i] >> 4];
            out += digits[md[i] & 0xf];
        }
        return out;
    }

private:
    std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx_;
};

}  // namespace

std::string sha256_hex(const std::string& bytes) {
    Sha256 h;
    h.update(bytes.data(), bytes.size());
    return h.hex();
}

std::string sha256_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    require(in.good(), ErrorKind::InvalidInput, "cannot read " + path.string());
    Sha256 h;
    std::array<char, 1 << 16> buf{};
    while (in) {
        in.read(buf.data(), buf.size());
        h.update(buf.data(), static_cast<size_t>(in.gcount()));
    }
    return h.hex();
}

OutputDir::OutputDir(std::filesystem::path root) : root_(std::move(root)) {
    std::error_code ec;
    std::filesystem::create_directories(root_, ec);
    require(!ec, ErrorKind::InvalidInput, "cannot create output directory " + root_.string() + ": " + ec.message());
}

void OutputDir::write_csv(const std::string& name, const std::vector<std::string>& header,
                          const std::vector<std::vector<double>>& rows) {
    std::string text;
    for (size_t i = 0; i < header.size(); ++i) text += (i ? "," : "") + header[i];
    text += '\n';
    for (const auto& row : rows) {
        require(row.size() == header.size(), ErrorKind::InvalidInput, "CSV row width differs from header in " + name);
        for (size_t i = 0; i < row.size(); ++i) text += (i ? "," : "") + format_double(row[i]);
        text += '\n';
    }
    write_text(name, text);
}

void OutputDir::write_text(const std::string& name, const std::string& text) {
    const auto path = root_ / name;
    {
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        require(out.good(), ErrorKind::InvalidInput, "cannot write " + path.string());
        out << text;
        require(out.good(), ErrorKind::InvalidInput, "write failed for " + path.string());
    }
    record(name);
}

void OutputDir::record(const std::string& name) {
    const auto path = root_ / name;
    ManifestEntry e{name, std::filesystem::file_size(path), sha256_file(path)};
    for (auto& old : manifest_) {
        if (old.path == name) {
            old = e;
            return;
        }
    }
    manifest_.push_back(std::move(e));
}

}  // namespace phasesep
