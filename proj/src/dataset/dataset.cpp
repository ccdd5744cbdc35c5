#include "signmotion/dataset/dataset.hpp"

#include <algorithm>
#include <cmath>

#include "signmotion/common/error.hpp"
#include "signmotion/common/rng.hpp"
#include "signmotion/dataset/manifest_io.hpp"
#include "signmotion/motion/container.hpp"

namespace signmotion {

const char* to_string(QcReason r) {
    switch (r) {
        case QcReason::trailing_noise: return "trailing_noise";
        case QcReason::leading_silence: return "leading_silence";
        case QcReason::both: return "both";
        case QcReason::none: return "none";
    }
    return "none";
}

QcReason qc_reason_from_string(const std::string& s) {
    if (s == "trailing_noise") return QcReason::trailing_noise;
    if (s == "leading_silence") return QcReason::leading_silence;
    if (s == "both") return QcReason::both;
    if (s == "none") return QcReason::none;
    fail(ErrorCode::invalid_annotation, "unknown QC reason '" + s + "'");
}

const char* to_string(Split s) {
    switch (s) {
        case Split::unassigned: return "unassigned";
        case Split::train: return "train";
        case Split::test: return "test";
    }
    return "unassigned";
}

Split split_from_string(const std::string& s) {
    if (s == "unassigned") return Split::unassigned;
    if (s == "train") return Split::train;
    if (s == "test") return Split::test;
    fail(ErrorCode::format, "unknown split '" + s + "'");
}

std::map<std::string, int> DatasetManifest::word_counts() const {
    std::map<std::string, int> counts;
    for (const auto& r : records) ++counts[r.gloss];
    return counts;
}

std::vector<const ClipRecord*> DatasetManifest::with_split(Split s) const {
    std::vector<const ClipRecord*> out;
    for (const auto& r : records)
        if (r.split == s) out.push_back(&r);
    return out;
}

void validate_annotation(const ClipRecord& record, const QcAnnotation& qc) {
    require(qc.keep_start >= 0 && qc.keep_start < qc.keep_end && qc.keep_end <= record.frame_count,
            ErrorCode::invalid_annotation,
            "clip '" + record.clip_id + "': keep range [" + std::to_string(qc.keep_start) + ", " +
                std::to_string(qc.keep_end) + ") is invalid for " + std::to_string(record.frame_count) + " frames");
}

Motion trim_motion(const Motion& motion, const QcAnnotation& qc) {
    require(qc.keep_start >= 0 && qc.keep_start < qc.keep_end && qc.keep_end <= motion.frame_count(),
            ErrorCode::invalid_annotation,
            "keep range [" + std::to_string(qc.keep_start) + ", " + std::to_string(qc.keep_end) +
                ") is invalid for " + std::to_string(motion.frame_count()) + " frames");
    return motion.slice(qc.keep_start, qc.keep_end);
}

ClipRecord trim_clip(const ClipRecord& record, const QcAnnotation& qc, const std::filesystem::path& output_path) {
    validate_annotation(record, qc);
    const Motion source = read_container(record.source_path);
    require(source.frame_count() == record.frame_count, ErrorCode::format,
            "clip '" + record.clip_id + "': manifest frame_count " + std::to_string(record.frame_count) +
                " differs from container T " + std::to_string(source.frame_count()));
    require(std::filesystem::weakly_canonical(output_path) != std::filesystem::weakly_canonical(record.source_path),
            ErrorCode::invalid_argument, "clip '" + record.clip_id + "': trim would overwrite its source");
    write_container(trim_motion(source, qc), output_path);
    ClipRecord out = record;
    out.source_path = output_path;
    out.frame_count = qc.keep_end - qc.keep_start;
    out.qc = qc;
    return out;
}

std::vector<std::string> filter_by_min_samples(const std::map<std::string, int>& words, int threshold) {
    std::vector<std::string> out;
    for (const auto& [word, count] : words)
        if (count >= threshold) out.push_back(word);
    return out;
}

int train_count(int n, double ratio) {
    if (n <= 1) return n;
    // The epsilon keeps exact products such as 0.29 * 100 from flooring low.
    const int t = static_cast<int>(std::floor(ratio * n + 1e-9));
    return std::clamp(t, 1, n);
}

DatasetManifest make_split(const DatasetManifest& manifest, double ratio, std::uint64_t seed,
                           std::vector<std::string>* warnings) {
    require(ratio > 0.0 && ratio < 1.0, ErrorCode::invalid_argument, "split ratio must lie in (0, 1)");
    std::map<std::string, std::vector<std::size_t>> by_word;
    for (std::size_t i = 0; i < manifest.records.size(); ++i) {
        require(!manifest.records[i].gloss.empty(), ErrorCode::invalid_argument,
                "clip '" + manifest.records[i].clip_id + "' has no gloss");
        by_word[manifest.records[i].gloss].push_back(i);
    }
    DatasetManifest out = manifest;
    out.seed = seed;
    out.ratio = ratio;
    for (auto& [word, idx] : by_word) {
        std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
            return manifest.records[a].clip_id < manifest.records[b].clip_id;
        });
        std::uint64_t word_hash = 1469598103934665603ULL;  // FNV-1a
        for (unsigned char c : word) word_hash = (word_hash ^ c) * 1099511628211ULL;
        Rng rng(mix_seed(seed, word_hash));
        for (std::size_t i = idx.size(); i > 1; --i) std::swap(idx[i - 1], idx[rng.uniform_index(i)]);
        const int n = static_cast<int>(idx.size());
        const int n_train = train_count(n, ratio);
        if (n == 1 && warnings)
            warnings->push_back("word '" + word + "' has a single record; it goes to train only");
        for (int k = 0; k < n; ++k) out.records[idx[k]].split = k < n_train ? Split::train : Split::test;
    }
    return out;
}

DatasetManifest select_top_k_subset(const DatasetManifest& manifest, int k) {
    const auto counts = manifest.word_counts();
    require(k >= 0 && k <= static_cast<int>(counts.size()), ErrorCode::invalid_argument,
            "select_top_k_subset: k=" + std::to_string(k) + " exceeds the " + std::to_string(counts.size()) +
                " available words");
    std::vector<std::pair<std::string, int>> ranked(counts.begin(), counts.end());
    std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
    std::set<std::string> keep;
    for (int i = 0; i < k; ++i) keep.insert(ranked[i].first);
    return restrict_to_words(manifest, keep);
}

DatasetManifest restrict_to_words(const DatasetManifest& manifest, const std::set<std::string>& words) {
    DatasetManifest out;
    out.seed = manifest.seed;
    out.ratio = manifest.ratio;
    for (const auto& r : manifest.records)
        if (words.count(r.gloss)) out.records.push_back(r);
    return out;
}

PrepareSummary prepare_dataset(const DatasetManifest& manifest, const std::map<std::string, QcAnnotation>& qc,
                               const PrepareOptions& options, const std::filesystem::path& out_dir) {
    std::map<std::string, const ClipRecord*> by_id;
    for (const auto& r : manifest.records) {
        require(r.frame_count >= 1, ErrorCode::invalid_argument, "clip '" + r.clip_id + "' has no frames");
        require(by_id.emplace(r.clip_id, &r).second, ErrorCode::invalid_argument,
                "duplicate clip_id '" + r.clip_id + "'");
    }
    for (const auto& [clip_id, annotation] : qc) {
        auto it = by_id.find(clip_id);
        require(it != by_id.end(), ErrorCode::invalid_annotation,
                "QC annotation for unknown clip '" + clip_id + "'");
        validate_annotation(*it->second, annotation);
    }

    const auto kept_words = filter_by_min_samples(manifest.word_counts(), options.min_samples);
    const std::set<std::string> kept(kept_words.begin(), kept_words.end());
    PrepareSummary summary;
    DatasetManifest split = make_split(restrict_to_words(manifest, kept), options.ratio, options.seed, &summary.warnings);

    std::filesystem::create_directories(out_dir);
    for (auto& r : split.records) {
        const std::filesystem::path rel = std::filesystem::path(to_string(r.split)) / (r.clip_id + ".motion");
        const std::filesystem::path dst = out_dir / rel;
        if (auto it = qc.find(r.clip_id); it != qc.end()) {
            r = trim_clip(r, it->second, dst);
            ++summary.trimmed;
        } else {
            const Motion m = read_container(r.source_path);
            require(m.frame_count() == r.frame_count, ErrorCode::format,
                    "clip '" + r.clip_id + "': manifest frame_count differs from container T");
            write_container(m, dst);
            r.source_path = dst;
        }
        // Containers carry the manifest label so split directories are self-describing.
        Motion m = read_container(r.source_path);
        if (m.gloss() != r.gloss) {
            m.set_gloss(r.gloss);
            write_container(m, dst);
        }
        r.source_path = rel;
        if (r.split == Split::train) ++summary.train;
        else ++summary.test;
    }
    summary.words = static_cast<int>(kept.size());
    write_manifest(split, out_dir / "manifest.json");
    for (auto& r : split.records) r.source_path = out_dir / r.source_path;
    summary.manifest = std::move(split);
    return summary;
}

}  // namespace signmotion
