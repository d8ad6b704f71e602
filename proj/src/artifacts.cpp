#include "newsalpha/artifacts.hpp"

#include <array>
#include <fstream>
#include <memory>

#include <json.hpp>
#include <openssl/evp.h>

#include "newsalpha/errors.hpp"

namespace newsalpha {

namespace {

class Sha256 {
public:
    Sha256() : ctx_(EVP_MD_CTX_new(), EVP_MD_CTX_free) {
        if (!ctx_ || EVP_DigestInit_ex(ctx_.get(), EVP_sha256(), nullptr) != 1) {
            throw std::runtime_error("SHA-256 unavailable");
        }
    }
    void update(const void* data, std::size_t n) { EVP_DigestUpdate(ctx_.get(), data, n); }
    std::string hex() {
        std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
        unsigned int len = 0;
        EVP_DigestFinal_ex(ctx_.get(), md.data(), &len);
        static constexpr char digits[] = "0123456789abcdef";
        std::string out;
        for (unsigned int i = 0; i < len; ++i) {
            out += digits[md[i] >> 4];
            out += digits[md[i] & 15];
        }
        return out;
    }

private:
    std::unique_ptr<EVP_MD_CTX, void (*)(EVP_MD_CTX*)> ctx_;
};

}  // namespace

std::string sha256_hex(std::string_view bytes) {
    Sha256 h;
    h.update(bytes.data(), bytes.size());
    return h.hex();
}

std::string sha256_file(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IngestError("cannot read " + path.string());
    Sha256 h;
    std::array<char, 1 << 16> buf;
    while (f) {
        f.read(buf.data(), buf.size());
        h.update(buf.data(), static_cast<std::size_t>(f.gcount()));
    }
    return h.hex();
}

std::filesystem::path manifest_path(const std::filesystem::path& artifact) {
    return artifact.string() + ".manifest.json";
}

void write_manifest(const std::filesystem::path& artifact, Manifest m,
                    const std::vector<std::filesystem::path>& outputs) {
    for (const auto& p : outputs) m.outputs[p.filename().string()] = sha256_file(p);
    nlohmann::ordered_json j;
    j["kind"] = m.kind;
    j["schema_version"] = m.schema_version;
    j["tool_version"] = m.tool_version;
    j["config"] = m.config;
    j["inputs"] = m.inputs;
    j["outputs"] = m.outputs;
    j["notes"] = m.notes;
    std::ofstream f(manifest_path(artifact), std::ios::binary);
    if (!f) throw ConfigError("cannot write " + manifest_path(artifact).string());
    f << j.dump(2) << '\n';
}

Manifest read_manifest(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IngestError("cannot read " + path.string());
    try {
        auto j = nlohmann::json::parse(f);
        Manifest m;
        m.kind = j.at("kind").get<std::string>();
        m.schema_version = j.at("schema_version").get<int>();
        m.tool_version = j.at("tool_version").get<std::string>();
        m.config = j.at("config").get<std::map<std::string, std::string>>();
        m.inputs = j.at("inputs").get<std::map<std::string, std::string>>();
        m.outputs = j.at("outputs").get<std::map<std::string, std::string>>();
        m.notes = j.at("notes").get<std::vector<std::string>>();
        return m;
    } catch (const nlohmann::json::exception& e) {
        throw IncompatibleArtifacts(path.string() + ": unreadable manifest (" + e.what() + ")");
    }
}

std::optional<Manifest> check_artifact(const std::filesystem::path& artifact, std::string_view expected_kind) {
    auto mp = manifest_path(artifact);
    if (!std::filesystem::exists(mp)) return std::nullopt;
    Manifest m = read_manifest(mp);
    if (m.schema_version != kSchemaVersion) {
        throw IncompatibleArtifacts(artifact.string() + ": schema version " + std::to_string(m.schema_version) +
                                    ", expected " + std::to_string(kSchemaVersion));
    }
    if (m.kind != expected_kind) {
        throw IncompatibleArtifacts(artifact.string() + " is a " + m.kind + " artifact, expected " +
                                    std::string(expected_kind));
    }
    auto it = m.outputs.find(artifact.filename().string());
    if (it != m.outputs.end() && it->second != sha256_file(artifact)) {
        throw IncompatibleArtifacts(artifact.string() + " changed since its manifest was written");
    }
    return m;
}

}  // namespace newsalpha
