#pragma once

#include <filesystem>
#include <map>
#include <string>

#include "signmotion/dataset/dataset.hpp"

namespace signmotion {

// Accepts a bare array of record objects or {"records": [...], ...}.
// Relative source paths resolve against the manifest's directory.
DatasetManifest read_manifest(const std::filesystem::path& path);
void write_manifest(const DatasetManifest& manifest, const std::filesystem::path& path);

// JSON map clip_id -> {keep_start, keep_end, reason}.
std::map<std::string, QcAnnotation> read_qc_sidecar(const std::filesystem::path& path);

}  // namespace signmotion
