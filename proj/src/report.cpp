#include "faceattr/report.hpp"

#include <openssl/evp.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>

#include "faceattr/error.hpp"

namespace faceattr {

namespace {

struct Digest {
    std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx{EVP_MD_CTX_new(), &EVP_MD_CTX_free};

    Digest() {
        if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) throw Error("sha256: init failed");
    }
    void update(const void* data, std::size_t n) {
        if (EVP_DigestUpdate(ctx.get(), data, n) != 1) throw Error("sha256: update failed");
    }
    std::string hex() {
        unsigned char md[EVP_MAX_MD_SIZE];
        unsigned int len = 0;
        if (EVP_DigestFinal_ex(ctx.get(), md, &len) != 1) throw Error("sha256: final failed");
        std::string out;
        char buf[3];
        for (unsigned int i = 0; i < len; ++i) {
            std::snprintf(buf, sizeof buf, "%02x", md[i]);
            out += buf;
        }
        return out;
    }
};

} // namespace

std::string sha256_hex(std::span<const std::uint8_t> bytes) {
    Digest d;
    d.update(bytes.data(), bytes.size());
    return d.hex();
}

std::string sha256_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError(path, "cannot open file");
    Digest d;
    char buf[1 << 16];
    while (in) {
        in.read(buf, sizeof buf);
        d.update(buf, static_cast<std::size_t>(in.gcount()));
    }
    if (in.bad()) throw IoError(path, "read failed");
    return d.hex();
}

std::string sha256_files(const std::string& root, std::span<const std::string> ids) {
    Digest d;
    for (const auto& id : ids) {
        const std::string line = id + ' ' + sha256_file((std::filesystem::path(root) / id).string()) + '\n';
        d.update(line.data(), line.size());
    }
    return d.hex();
}

std::string ReportHeader::render() const {
    std::string out = "# faceattr " FACEATTR_VERSION "\n";
    out += "# command: " + command + "\n";
    for (const auto& [k, v] : config) out += "# config: " + k + " = " + v + "\n";
    out += "# seed: " + std::to_string(seed) + "\n";
    for (const auto& in : inputs) out += "# input: " + in.role + " " + in.path + " sha256=" + in.sha256 + "\n";
    return out;
}

OutputWriter::OutputWriter(std::string directory) : directory_(std::move(directory)) {}

void OutputWriter::add_text(const std::string& name, std::string content) {
    add_file(name, [content = std::move(content)](const std::string& path) {
        std::ofstream out(path, std::ios::binary);
        if (!out) throw IoError(path, "cannot open for writing");
        out << content;
        out.flush();
        if (!out) throw IoError(path, "write failed");
    });
}

void OutputWriter::add_file(const std::string& name, std::function<void(const std::string&)> write) {
    pending_.emplace_back(name, std::move(write));
}

std::vector<std::string> OutputWriter::commit() {
    std::vector<std::string> written;
    try {
        std::error_code ec;
        std::filesystem::create_directories(directory_, ec);
        if (ec) throw IoError(directory_, "cannot create output directory: " + ec.message());
        for (auto& [name, write] : pending_) {
            const std::string path = (std::filesystem::path(directory_) / name).string();
            written.push_back(path);
            write(path);
        }
    } catch (...) {
        for (const auto& p : written) {
            std::error_code ignored;
            std::filesystem::remove(p, ignored);
        }
        pending_.clear();
        throw;
    }
    pending_.clear();
    return written;
}

} // namespace faceattr
