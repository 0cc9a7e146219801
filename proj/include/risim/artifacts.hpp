#pragma once

#include <cstdint>
#include <string>

#include "risim/inference.hpp"
#include "risim/optimizer.hpp"

namespace risim {

std::string read_text_file(const std::string& path);
// Writes via a sibling temp file and renames, so readers never observe a
// partial artifact.
void write_text_file(const std::string& path, const std::string& text);
std::uint64_t file_hash(const std::string& path);

// Common envelope stamped on every saved artifact. Loading verifies the kind
// tag; consistency between artifacts (scenario hash, seed) is checked by the
// commands that combine them.
struct ArtifactMeta {
    std::string tool_version;
    std::uint64_t master_seed = 0;
    std::uint64_t scenario_hash = 0;
};

std::string codebook_to_json_text(const CodeBook& book, const ArtifactMeta& meta);
CodeBook codebook_from_json_text(const std::string& text, ArtifactMeta* meta = nullptr);
void save_codebook(const CodeBook& book, const ArtifactMeta& meta, const std::string& path);
CodeBook load_codebook(const std::string& path, ArtifactMeta* meta = nullptr);

void save_bank(const InferenceBank& bank, const std::string& tool_version,
               const std::string& path);
InferenceBank load_bank(const std::string& path, std::string* tool_version = nullptr);

// Entry point of a calibration output directory: records what was calibrated
// and where the sibling artifacts live (paths relative to the manifest).
struct CalibrationManifest {
    std::string tool_version;
    std::uint64_t master_seed = 0;
    std::uint64_t scenario_hash = 0;
    double resolution = 0.0;
    double p_ref = 0.0;
    ConfigPair ignorant_pair;  // context-ignorant baseline for the benchmark
    std::string scenario_file = "scenario.json";
    std::string codebook_file = "codebook.json";
    std::string bank_file = "bank.json";
    std::string report_file = "calibration_report.json";
};

void save_manifest(const CalibrationManifest& manifest, const std::string& path);
CalibrationManifest load_manifest(const std::string& path);

}  // namespace risim
