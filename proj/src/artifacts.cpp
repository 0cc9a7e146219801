#include "risim/artifacts.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "risim/errors.hpp"
#include "risim/hash.hpp"

namespace risim {

namespace {

using nlohmann::json;

json parse_or_throw(const std::string& text, const std::string& what) {
    try {
        return json::parse(text);
    } catch (const json::exception& e) {
        throw ValidationError(what + ": parse error: " + e.what());
    }
}

json envelope(const std::string& kind, const ArtifactMeta& meta, json payload) {
    json j;
    j["kind"] = kind;
    j["tool_version"] = meta.tool_version;
    j["master_seed"] = meta.master_seed;
    j["scenario_hash"] = meta.scenario_hash;
    j["payload"] = std::move(payload);
    return j;
}

json open_envelope(const json& j, const std::string& kind, ArtifactMeta* meta) {
    if (!j.is_object() || !j.contains("kind"))
        throw ValidationError(kind + ": not an artifact file");
    std::string found = j.at("kind").get<std::string>();
    if (found != kind)
        throw ValidationError("expected a " + kind + " artifact, found '" + found + "'");
    if (meta != nullptr) {
        meta->tool_version = j.at("tool_version").get<std::string>();
        meta->master_seed = j.at("master_seed").get<std::uint64_t>();
        meta->scenario_hash = j.at("scenario_hash").get<std::uint64_t>();
    }
    return j.at("payload");
}

}  // namespace

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot read file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    if (!in && !in.eof()) throw ValidationError("read failed for file: " + path);
    return buf.str();
}

void write_text_file(const std::string& path, const std::string& text) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw ValidationError("cannot write file: " + tmp);
        out << text;
        out.flush();
        if (!out) {
            std::error_code ec;
            std::filesystem::remove(tmp, ec);
            throw ValidationError("write failed for file: " + tmp);
        }
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp, ec);
        throw ValidationError("cannot move " + tmp + " into place: " + ec.message());
    }
}

std::uint64_t file_hash(const std::string& path) { return fnv1a64(read_text_file(path)); }

std::string codebook_to_json_text(const CodeBook& book, const ArtifactMeta& meta) {
    json payload;
    payload["resolution"] = book.resolution;
    payload["trajectory_length"] = book.trajectory_length;
    payload["bins"] = book.bins;
    json entries = json::array();
    for (const CodeBookEntry& e : book.entries) {
        entries.push_back({{"bin", e.bin},
                           {"shape", shape_name(e.shape)},
                           {"p_center", e.p_center},
                           {"c0", e.pair.c0.bits},
                           {"c1", e.pair.c1.bits},
                           {"r0", e.pair.r0},
                           {"r1", e.pair.r1},
                           {"tau", e.pair.tau}});
    }
    payload["entries"] = std::move(entries);
    return envelope("codebook", meta, std::move(payload)).dump(2);
}

CodeBook codebook_from_json_text(const std::string& text, ArtifactMeta* meta) {
    json j = parse_or_throw(text, "codebook");
    try {
        json payload = open_envelope(j, "codebook", meta);
        CodeBook book;
        book.resolution = payload.at("resolution").get<double>();
        book.trajectory_length = payload.at("trajectory_length").get<double>();
        book.bins = payload.at("bins").get<int>();
        for (const json& entry : payload.at("entries")) {
            CodeBookEntry e;
            e.bin = entry.at("bin").get<int>();
            e.shape = shape_from_name(entry.at("shape").get<std::string>());
            e.p_center = entry.at("p_center").get<double>();
            e.pair.c0.bits = entry.at("c0").get<std::uint32_t>() & RISConfig::kMask;
            e.pair.c1.bits = entry.at("c1").get<std::uint32_t>() & RISConfig::kMask;
            e.pair.r0 = entry.at("r0").get<double>();
            e.pair.r1 = entry.at("r1").get<double>();
            e.pair.tau = entry.at("tau").get<double>();
            book.entries.push_back(e);
        }
        if (static_cast<int>(book.entries.size()) != book.bins * kNumShapes)
            throw ValidationError("codebook: entry count does not match bins");
        return book;
    } catch (const json::exception& e) {
        throw ValidationError(std::string("codebook: ") + e.what());
    }
}

void save_codebook(const CodeBook& book, const ArtifactMeta& meta, const std::string& path) {
    write_text_file(path, codebook_to_json_text(book, meta));
}

CodeBook load_codebook(const std::string& path, ArtifactMeta* meta) {
    return codebook_from_json_text(read_text_file(path), meta);
}

void save_bank(const InferenceBank& bank, const std::string& tool_version,
               const std::string& path) {
    ArtifactMeta meta{tool_version, bank.master_seed, bank.scenario_hash};
    json payload = parse_or_throw(bank_to_json_text(bank), "bank");
    write_text_file(path, envelope("bank", meta, std::move(payload)).dump());
}

InferenceBank load_bank(const std::string& path, std::string* tool_version) {
    json j = parse_or_throw(read_text_file(path), "bank");
    ArtifactMeta meta;
    json payload = open_envelope(j, "bank", &meta);
    if (tool_version != nullptr) *tool_version = meta.tool_version;
    InferenceBank bank = bank_from_json_text(payload.dump());
    if (bank.master_seed != meta.master_seed || bank.scenario_hash != meta.scenario_hash)
        throw ValidationError("bank: envelope does not match payload provenance");
    return bank;
}

void save_manifest(const CalibrationManifest& manifest, const std::string& path) {
    json j;
    j["kind"] = "manifest";
    j["tool_version"] = manifest.tool_version;
    j["master_seed"] = manifest.master_seed;
    j["scenario_hash"] = manifest.scenario_hash;
    j["resolution"] = manifest.resolution;
    j["p_ref"] = manifest.p_ref;
    j["ignorant_pair"] = {{"c0", manifest.ignorant_pair.c0.bits},
                          {"c1", manifest.ignorant_pair.c1.bits},
                          {"r0", manifest.ignorant_pair.r0},
                          {"r1", manifest.ignorant_pair.r1},
                          {"tau", manifest.ignorant_pair.tau}};
    j["files"] = {{"scenario", manifest.scenario_file},
                  {"codebook", manifest.codebook_file},
                  {"bank", manifest.bank_file},
                  {"report", manifest.report_file}};
    write_text_file(path, j.dump(2));
}

CalibrationManifest load_manifest(const std::string& path) {
    json j = parse_or_throw(read_text_file(path), "manifest");
    try {
        if (j.at("kind").get<std::string>() != "manifest")
            throw ValidationError("manifest: wrong artifact kind");
        CalibrationManifest m;
        m.tool_version = j.at("tool_version").get<std::string>();
        m.master_seed = j.at("master_seed").get<std::uint64_t>();
        m.scenario_hash = j.at("scenario_hash").get<std::uint64_t>();
        m.resolution = j.at("resolution").get<double>();
        m.p_ref = j.at("p_ref").get<double>();
        const json& ig = j.at("ignorant_pair");
        m.ignorant_pair.c0.bits = ig.at("c0").get<std::uint32_t>() & RISConfig::kMask;
        m.ignorant_pair.c1.bits = ig.at("c1").get<std::uint32_t>() & RISConfig::kMask;
        m.ignorant_pair.r0 = ig.at("r0").get<double>();
        m.ignorant_pair.r1 = ig.at("r1").get<double>();
        m.ignorant_pair.tau = ig.at("tau").get<double>();
        const json& files = j.at("files");
        m.scenario_file = files.at("scenario").get<std::string>();
        m.codebook_file = files.at("codebook").get<std::string>();
        m.bank_file = files.at("bank").get<std::string>();
        m.report_file = files.at("report").get<std::string>();
        return m;
    } catch (const json::exception& e) {
        throw ValidationError(std::string("manifest: ") + e.what());
    }
}

}  // namespace risim
