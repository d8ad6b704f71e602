#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace newsalpha {

inline constexpr int kSchemaVersion = 1;

/// Lowercase hex SHA-256.
std::string sha256_hex(std::string_view bytes);
std::string sha256_file(const std::filesystem::path& path);

/// Sidecar written next to every command output as `<output>.manifest.json`.
struct Manifest {
    std::string kind;  // labels, model, scores, eval, backtest, ablation, synthetic
    int schema_version = kSchemaVersion;
    std::string tool_version = NEWSALPHA_VERSION;
    std::map<std::string, std::string> config;
    std::map<std::string, std::string> inputs;   // role -> digest
    std::map<std::string, std::string> outputs;  // file name -> digest
    std::vector<std::string> notes;
};

std::filesystem::path manifest_path(const std::filesystem::path& artifact);

/// Fills in output digests for `outputs` (paths) and writes the manifest of `artifact`.
void write_manifest(const std::filesystem::path& artifact, Manifest manifest,
                    const std::vector<std::filesystem::path>& outputs);
Manifest read_manifest(const std::filesystem::path& path);

/// Reads the manifest of an upstream artifact, if any, and checks that it is
/// of kind `expected_kind`, carries this schema version and still describes
/// the file on disk. Throws IncompatibleArtifacts otherwise.
std::optional<Manifest> check_artifact(const std::filesystem::path& artifact, std::string_view expected_kind);

}  // namespace newsalpha
