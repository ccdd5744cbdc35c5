#include "signmotion/dataset/manifest_io.hpp"

#include <json.hpp>

#include "signmotion/common/error.hpp"
#include "signmotion/common/io.hpp"

namespace signmotion {

using nlohmann::json;

namespace {

json parse_json_file(const std::filesystem::path& path) {
    try {
        return json::parse(read_file(path));
    } catch (const json::exception& e) {
        fail(ErrorCode::format, "'" + path.string() + "': invalid JSON: " + e.what());
    }
}

QcAnnotation qc_from_json(const json& j, const std::string& where) {
    try {
        QcAnnotation qc;
        qc.keep_start = j.at("keep_start").get<int>();
        qc.keep_end = j.at("keep_end").get<int>();
        qc.reason = qc_reason_from_string(j.value("reason", std::string("none")));
        return qc;
    } catch (const json::exception& e) {
        fail(ErrorCode::invalid_annotation, where + ": " + e.what());
    }
}

json qc_to_json(const QcAnnotation& qc) {
    return {{"keep_start", qc.keep_start}, {"keep_end", qc.keep_end}, {"reason", to_string(qc.reason)}};
}

}  // namespace

DatasetManifest read_manifest(const std::filesystem::path& path) {
    const json doc = parse_json_file(path);
    const json* records = &doc;
    DatasetManifest m;
    if (doc.is_object()) {
        require(doc.contains("records"), ErrorCode::format, "manifest '" + path.string() + "' has no records");
        records = &doc["records"];
        m.seed = doc.value("seed", std::uint64_t{0});
        m.ratio = doc.value("ratio", 0.0);
    }
    require(records->is_array(), ErrorCode::format, "manifest records must be an array");
    const std::filesystem::path base = path.parent_path();
    for (const auto& j : *records) {
        ClipRecord r;
        try {
            r.clip_id = j.at("clip_id").get<std::string>();
            r.gloss = j.at("gloss").get<std::string>();
            r.source_path = j.at("source_path").get<std::string>();
            r.frame_count = j.at("frame_count").get<int>();
            if (j.contains("qc") && !j["qc"].is_null()) r.qc = qc_from_json(j["qc"], "clip '" + r.clip_id + "'");
            r.split = split_from_string(j.value("split", std::string("unassigned")));
        } catch (const json::exception& e) {
            fail(ErrorCode::format, "manifest record: " + std::string(e.what()));
        }
        require(r.frame_count >= 1, ErrorCode::format, "clip '" + r.clip_id + "': frame_count must be positive");
        if (r.source_path.is_relative()) r.source_path = base / r.source_path;
        m.records.push_back(std::move(r));
    }
    return m;
}

void write_manifest(const DatasetManifest& manifest, const std::filesystem::path& path) {
    json records = json::array();
    for (const auto& r : manifest.records) {
        records.push_back({{"clip_id", r.clip_id},
                           {"gloss", r.gloss},
                           {"source_path", r.source_path.generic_string()},
                           {"frame_count", r.frame_count},
                           {"qc", r.qc ? qc_to_json(*r.qc) : json(nullptr)},
                           {"split", to_string(r.split)}});
    }
    json words = json::object();
    for (const auto& [w, n] : manifest.word_counts()) words[w] = n;
    const json doc = {{"seed", manifest.seed}, {"ratio", manifest.ratio}, {"words", words}, {"records", records}};
    write_file_atomic(path, doc.dump(2) + "\n");
}

std::map<std::string, QcAnnotation> read_qc_sidecar(const std::filesystem::path& path) {
    const json doc = parse_json_file(path);
    require(doc.is_object(), ErrorCode::format, "QC sidecar must be a JSON object keyed by clip_id");
    std::map<std::string, QcAnnotation> out;
    for (const auto& [clip_id, j] : doc.items()) out.emplace(clip_id, qc_from_json(j, "QC for clip '" + clip_id + "'"));
    return out;
}

}  // namespace signmotion
