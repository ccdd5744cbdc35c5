#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "signmotion/motion/motion.hpp"

namespace signmotion {

enum class QcReason { trailing_noise, leading_silence, both, none };
enum class Split { unassigned, train, test };

const char* to_string(QcReason r);
QcReason qc_reason_from_string(const std::string& s);
const char* to_string(Split s);
Split split_from_string(const std::string& s);

// Frames [keep_start, keep_end) survive quality control.
struct QcAnnotation {
    int keep_start = 0;
    int keep_end = 0;
    QcReason reason = QcReason::none;
};

struct ClipRecord {
    std::string clip_id;
    std::string gloss;
    std::filesystem::path source_path;
    int frame_count = 0;
    std::optional<QcAnnotation> qc;
    Split split = Split::unassigned;
};

struct DatasetManifest {
    std::vector<ClipRecord> records;
    std::uint64_t seed = 0;
    double ratio = 0.0;

    std::map<std::string, int> word_counts() const;
    std::vector<const ClipRecord*> with_split(Split s) const;
};

void validate_annotation(const ClipRecord& record, const QcAnnotation& qc);

// Slice of the motion kept by the annotation.
Motion trim_motion(const Motion& motion, const QcAnnotation& qc);

// Writes the trimmed clip to output_path and returns the updated record; the
// source container is left untouched.
ClipRecord trim_clip(const ClipRecord& record, const QcAnnotation& qc, const std::filesystem::path& output_path);

// Words with count >= threshold, in lexicographic order.
std::vector<std::string> filter_by_min_samples(const std::map<std::string, int>& words, int threshold);

// Train-side count for a word with n records: floor(ratio * n), at least 1.
int train_count(int n, double ratio);

// Per-word seeded shuffle, then the first train_count(n_w) records of each
// word go to train and the rest to test.  Single-record words go to train and
// produce a warning.
DatasetManifest make_split(const DatasetManifest& manifest, double ratio, std::uint64_t seed,
                           std::vector<std::string>* warnings = nullptr);

// The k words with the most records; ties broken lexicographically.
DatasetManifest select_top_k_subset(const DatasetManifest& manifest, int k);

// Keeps only records whose gloss is in `words`.
DatasetManifest restrict_to_words(const DatasetManifest& manifest, const std::set<std::string>& words);

struct PrepareOptions {
    int min_samples = 18;
    double ratio = 0.8;
    std::uint64_t seed = 0;
};

struct PrepareSummary {
    DatasetManifest manifest;
    int words = 0;
    int train = 0;
    int test = 0;
    int trimmed = 0;
    std::vector<std::string> warnings;
};

// Quality control, filtering, splitting: writes <out>/train/<clip>.motion,
// <out>/test/<clip>.motion and <out>/manifest.json.  The file stores paths
// relative to <out>; the returned manifest has them joined with <out>.
PrepareSummary prepare_dataset(const DatasetManifest& manifest, const std::map<std::string, QcAnnotation>& qc,
                               const PrepareOptions& options, const std::filesystem::path& out_dir);

}  // namespace signmotion
