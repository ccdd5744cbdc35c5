#include "signmotion/cli/cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <cstdio>
#include <iostream>
#include <optional>

#include "signmotion/common/error.hpp"
#include "signmotion/common/io.hpp"
#include "signmotion/dataset/manifest_io.hpp"
#include "signmotion/model/checkpoint.hpp"
#include "signmotion/motion/container.hpp"
#include "signmotion/pipeline/run_config.hpp"

namespace signmotion {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Common {
    std::optional<std::uint64_t> seed;
    std::string config;
    std::string out;
    std::string preset = "default";
    bool verbose = false;
};

void add_common(CLI::App* cmd, Common& c, bool out_required = true) {
    cmd->add_option("--seed", c.seed, "Random seed");
    cmd->add_option("--config", c.config, "JSON config file")->check(CLI::ExistingFile);
    auto* out = cmd->add_option("--out", c.out, "Output path");
    if (out_required) out->required();
    cmd->add_option("--preset", c.preset, "Built-in defaults: default or desk")
        ->check(CLI::IsMember({"default", "desk"}));
    cmd->add_flag("-v,--verbose", c.verbose, "Print progress");
}

RunConfig resolve_config(const Common& c) {
    RunConfig cfg;
    if (c.preset == "desk") {
        cfg.model = desk_model_config();
        cfg.train = desk_train_config();
    }
    if (!c.config.empty()) cfg = load_run_config(c.config, cfg);
    if (c.seed) {
        cfg.train.seed = *c.seed;
        cfg.classifier.seed = *c.seed;
        cfg.eval.seed = *c.seed;
    }
    return cfg;
}

fs::path manifest_path(const fs::path& data) { return fs::is_directory(data) ? data / "manifest.json" : data; }

// Either a prepared dataset (manifest.json) or <dir>/train and <dir>/test
// folders of containers whose headers carry the gloss.
LabeledMotions load_group(const fs::path& dir, const std::string& split) {
    LabeledMotions out;
    const fs::path manifest = dir / "manifest.json";
    if (fs::exists(manifest)) {
        const DatasetManifest m = read_manifest(manifest);
        out.motions = load_split(m, split_from_string(split), &out.labels);
        return out;
    }
    const fs::path sub = dir / split;
    require(fs::is_directory(sub), ErrorCode::input, "missing directory " + sub.string());
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(sub))
        if (e.is_regular_file() && e.path().extension() == ".motion") files.push_back(e.path());
    std::sort(files.begin(), files.end());
    for (const auto& f : files) {
        Motion m = read_container(f);
        require(m.gloss().has_value(), ErrorCode::input, f.string() + " has no gloss in its header");
        out.labels.push_back(*m.gloss());
        out.motions.push_back(std::move(m));
    }
    return out;
}

struct LoadedModel {
    LoadedCheckpoint ckpt;
    std::unique_ptr<SemanticEncoder> encoder;
    std::vector<std::string> vocabulary;
};

LoadedModel load_model(const std::string& path, const Common& c) {
    LoadedModel lm;
    lm.ckpt = load_checkpoint(path);
    const json& meta = lm.ckpt.state.metadata;
    ProviderConfig pc = provider_config_from_json(meta.value("embedding", json::object()));
    if (!c.config.empty()) {
        const json j = json::parse(read_file(c.config));
        if (j.contains("embedding")) pc = provider_config_from_json(j["embedding"], pc);
    }
    lm.encoder = std::make_unique<SemanticEncoder>(pc);
    lm.vocabulary = meta.value("vocabulary", std::vector<std::string>{});
    return lm;
}

json config_for_stamp(const LoadedModel& lm, const std::string& checkpoint) {
    return {{"checkpoint_config", lm.ckpt.state.metadata.value("stamp", json::object()).value("config_sha256", "")},
            {"checkpoint", fs::path(checkpoint).filename().string()},
            {"model", to_json(lm.ckpt.model.config())}};
}

int cmd_prepare(const std::string& manifest, const std::string& qc, const PrepareOptions& opts, int top_k,
                const Common& c, std::ostream& out, std::ostream& err) {
    DatasetManifest m = read_manifest(manifest);
    const auto annotations = qc.empty() ? std::map<std::string, QcAnnotation>{} : read_qc_sidecar(qc);
    if (top_k > 0) m = select_top_k_subset(m, top_k);
    PrepareOptions o = opts;
    if (c.seed) o.seed = *c.seed;
    const PrepareSummary s = prepare_dataset(m, annotations, o, c.out);
    for (const auto& w : s.warnings) err << "warning: " << w << "\n";
    out << s.words << " words, " << s.train << " train, " << s.test << " test, " << s.trimmed << " trimmed\n";
    json stamp = make_stamp("prepare-data",
                            {{"min_samples", o.min_samples}, {"ratio", o.ratio}, {"top_k", top_k}}, o.seed);
    write_file_atomic(fs::path(c.out) / "stamp.json", stamp.dump(2) + "\n");
    return 0;
}

int cmd_train(const std::string& data, std::optional<int> epochs, bool no_curriculum, const Common& c,
              std::ostream& out) {
    RunConfig cfg = resolve_config(c);
    if (epochs) cfg.train.epochs = *epochs;
    if (no_curriculum) cfg.train.curriculum_enabled = false;
    const DatasetManifest manifest = read_manifest(manifest_path(data));
    CvaeModel model(cfg.model, cfg.train.seed);
    const auto r = train_from_manifest(model, manifest, cfg, c.out);
    if (c.verbose)
        for (const auto& row : r.train.log) out << format_log_row(row) << "\n";
    const LogRow& last = r.train.log.back();
    out << "trained " << r.train.epochs_run << " epochs on " << r.vocabulary.size() << " words; final total loss "
        << last.total_loss << "\n";
    out << "checkpoint: " << (fs::path(c.out) / "checkpoint.ckpt").string() << "\n";
    return 0;
}

SemanticEmbedding condition_for(LoadedModel& lm, const Motion& m, const std::string& text, const std::string& where) {
    const std::string word = !text.empty() ? text : m.gloss().value_or("");
    require(!word.empty(), ErrorCode::input, where + " has no gloss; pass --text");
    return lm.encoder->embed_text(word);
}

int cmd_reconstruct(const std::string& checkpoint, const std::string& input, const std::string& data,
                    const std::string& text, const Common& c, std::ostream& out) {
    require(input.empty() != data.empty(), ErrorCode::invalid_argument, "pass exactly one of --input or --data");
    LoadedModel lm = load_model(checkpoint, c);
    const std::uint64_t seed = c.seed.value_or(0);
    const json stamp = make_stamp("reconstruct", config_for_stamp(lm, checkpoint), seed);
    if (!input.empty()) {
        const Motion m = read_container(input);
        Motion r = lm.ckpt.model.reconstruct(m, condition_for(lm, m, text, input), seed);
        r.set_gloss(!text.empty() ? std::optional<std::string>(text) : m.gloss());
        write_container(r, c.out);
        write_stamp_sidecar(c.out, stamp);
        out << "wrote " << c.out << " (" << r.frame_count() << " frames)\n";
        return 0;
    }
    const DatasetManifest manifest = read_manifest(manifest_path(data));
    int written = 0;
    for (Split split : {Split::train, Split::test}) {
        std::vector<std::string> labels, ids;
        const auto motions = load_split(manifest, split, &labels, &ids);
        for (std::size_t i = 0; i < motions.size(); ++i) {
            Motion r = lm.ckpt.model.reconstruct(motions[i], lm.encoder->embed_text(labels[i]),
                                                 mix_seed(seed, static_cast<std::uint64_t>(split), i));
            r.set_gloss(labels[i]);
            write_container(r, fs::path(c.out) / to_string(split) / (ids[i] + ".motion"));
            ++written;
        }
    }
    write_file_atomic(fs::path(c.out) / "stamp.json", stamp.dump(2) + "\n");
    out << "wrote " << written << " reconstructions to " << c.out << "\n";
    return 0;
}

int cmd_generate(const std::string& checkpoint, const std::string& text, const std::string& image, bool snap,
                 int frames, const std::string& data, const Common& c, std::ostream& out) {
    LoadedModel lm = load_model(checkpoint, c);
    const std::uint64_t seed = c.seed.value_or(0);
    const json stamp = make_stamp("generate", config_for_stamp(lm, checkpoint), seed);
    if (!data.empty()) {
        require(text.empty() && image.empty(), ErrorCode::invalid_argument, "--data excludes --text and --image");
        const DatasetManifest manifest = read_manifest(manifest_path(data));
        int written = 0;
        for (Split split : {Split::train, Split::test}) {
            const auto records = manifest.with_split(split);
            for (std::size_t i = 0; i < records.size(); ++i) {
                const ClipRecord& r = *records[i];
                Motion g = lm.ckpt.model.generate(lm.encoder->embed_text(r.gloss), r.frame_count,
                                                  mix_seed(seed, static_cast<std::uint64_t>(split), i));
                g.set_gloss(r.gloss);
                write_container(g, fs::path(c.out) / to_string(split) / (r.clip_id + ".motion"));
                ++written;
            }
        }
        write_file_atomic(fs::path(c.out) / "stamp.json", stamp.dump(2) + "\n");
        out << "wrote " << written << " generations to " << c.out << "\n";
        return 0;
    }
    require(text.empty() != image.empty(), ErrorCode::invalid_argument, "pass exactly one of --text or --image");
    SemanticEmbedding cond;
    std::optional<std::string> gloss;
    if (!text.empty()) {
        cond = lm.encoder->embed_text(text);
        gloss = text;
    } else {
        cond = lm.encoder->embed_image(image);
        if (snap) {
            require(!lm.vocabulary.empty(), ErrorCode::state, "checkpoint carries no vocabulary to snap to");
            gloss = nearest_gloss(cond, lm.vocabulary, *lm.encoder);
            cond = lm.encoder->embed_text(*gloss);
        }
    }
    Motion g = lm.ckpt.model.generate(cond, frames, seed);
    g.set_gloss(gloss);
    write_container(g, c.out);
    write_stamp_sidecar(c.out, stamp);
    out << "wrote " << c.out << " (" << (gloss ? *gloss : std::string("image condition")) << ", " << frames
        << " frames)\n";
    return 0;
}

int cmd_evaluate(const std::string& raw, const std::string& rec, const std::string& gen,
                 const std::string& classifier_in, const std::string& classifier_out, const Common& c,
                 std::ostream& out) {
    const RunConfig cfg = resolve_config(c);
    EvalGroups groups;
    const std::pair<const char*, std::string> dirs[] = {{"Raw", raw}, {"Rec", rec}, {"Gen", gen}};
    for (const auto& [group, dir] : dirs)
        for (const char* split : kEvalSplits) groups[std::string(group) + "_" + split] = load_group(dir, split);
    const auto& train_raw = groups.at("Raw_train");
    const MotionClassifier clf = !classifier_in.empty()
                                     ? MotionClassifier::load(classifier_in)
                                     : MotionClassifier::train(train_raw.motions, train_raw.labels, cfg.classifier);
    if (!classifier_out.empty()) clf.save(classifier_out);
    const EvalReport report = full_report(clf, groups, cfg.eval);
    const json cfg_json = {{"classifier", to_json(cfg.classifier)}, {"eval", to_json(cfg.eval)},
                           {"classifier_file", classifier_in.empty() ? "" : fs::path(classifier_in).filename().string()}};
    json doc = to_json(report);
    doc["stamp"] = make_stamp("evaluate", cfg_json, cfg.eval.seed);
    write_file_atomic(c.out, doc.dump(2) + "\n");
    out << format_report_table(report);
    return 0;
}

int cmd_embed(const std::string& text, const std::string& image, const Common& c, std::ostream& out) {
    require(text.empty() != image.empty(), ErrorCode::invalid_argument, "pass exactly one of --text or --image");
    const RunConfig cfg = resolve_config(c);
    SemanticEncoder encoder(cfg.embedding);
    const SemanticEmbedding e = text.empty() ? encoder.embed_image(image) : encoder.embed_text(text);
    const json doc = {{"modality", e.modality == Modality::text ? "text" : "image"},
                      {"key", e.key},
                      {"provider", encoder.provider().id()},
                      {"d_emb", e.vector.size()},
                      {"vector", e.vector},
                      {"stamp", make_stamp("embed", to_json(cfg.embedding), cfg.embedding.stub_seed)}};
    if (c.out.empty())
        out << doc.dump() << "\n";
    else
        write_file_atomic(c.out, doc.dump(2) + "\n");
    return 0;
}

int cmd_export(const std::string& input, const std::string& channels, const Common& c, std::ostream& out) {
    const Channels target = channels_from_string(channels);
    auto export_one = [&](const fs::path& from, const fs::path& to) {
        const Motion m = read_container(from);
        const Motion full = m.layout().name() == smplx_full_layout().name()
                                ? convert_channels(m, Channels::axis_angle)
                                : complete_full_body(m);
        write_container(convert_channels(full, target), to);
    };
    const json stamp = make_stamp("export", {{"channels", channels}, {"layout", smplx_full_layout().name()}},
                                  c.seed.value_or(0));
    if (fs::is_directory(input)) {
        int n = 0;
        for (const auto& e : fs::recursive_directory_iterator(input)) {
            if (!e.is_regular_file() || e.path().extension() != ".motion") continue;
            export_one(e.path(), fs::path(c.out) / fs::relative(e.path(), input));
            ++n;
        }
        write_file_atomic(fs::path(c.out) / "stamp.json", stamp.dump(2) + "\n");
        out << "exported " << n << " motions to " << c.out << "\n";
    } else {
        export_one(input, c.out);
        write_stamp_sidecar(c.out, stamp);
        out << "exported " << c.out << "\n";
    }
    return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Sign-word motion reconstruction and generation toolkit", "signmotion"};
    app.require_subcommand(1, 1);
    app.set_version_flag("--version", kToolVersion);

    Common common;

    auto* prep = app.add_subcommand("prepare-data", "Quality control, filtering and train/test split");
    std::string manifest, qc;
    PrepareOptions popts;
    int top_k = 0;
    prep->add_option("--manifest", manifest, "Clip manifest JSON")->required()->check(CLI::ExistingFile);
    prep->add_option("--qc", qc, "QC sidecar JSON keyed by clip_id")->check(CLI::ExistingFile);
    prep->add_option("--min-samples", popts.min_samples, "Minimum records per word");
    prep->add_option("--ratio", popts.ratio, "Train fraction per word")->check(CLI::Range(0.0, 1.0));
    prep->add_option("--top-k", top_k, "Keep only the k most frequent words");
    add_common(prep, common);

    auto* tr = app.add_subcommand("train", "Train the conditional VAE");
    std::string data;
    std::optional<int> epochs;
    bool no_curriculum = false;
    tr->add_option("--data", data, "Prepared dataset directory")->required()->check(CLI::ExistingPath);
    tr->add_option("--epochs", epochs, "Override the epoch count");
    tr->add_flag("--no-curriculum", no_curriculum, "Train without frame masking");
    add_common(tr, common);

    auto* rc = app.add_subcommand("reconstruct", "Reconstruct motions through the posterior");
    std::string checkpoint, input, text, image;
    rc->add_option("--checkpoint", checkpoint, "Trained checkpoint")->required();
    rc->add_option("--input", input, "Motion container")->check(CLI::ExistingFile);
    rc->add_option("--data", data, "Prepared dataset; writes <out>/train and <out>/test")->check(CLI::ExistingPath);
    rc->add_option("--text", text, "Condition word (defaults to the header gloss)");
    add_common(rc, common);

    auto* gen = app.add_subcommand("generate", "Generate motions from a word or image");
    bool snap = false;
    int frames = 60;
    gen->add_option("--checkpoint", checkpoint, "Trained checkpoint")->required();
    gen->add_option("--text", text, "Condition word");
    gen->add_option("--image", image, "Condition image");
    gen->add_flag("--snap-to-vocab", snap, "Route an image to the nearest vocabulary word");
    gen->add_option("--frames", frames, "Sequence length")->check(CLI::PositiveNumber);
    gen->add_option("--data", data, "Prepared dataset; one generation per record")->check(CLI::ExistingPath);
    add_common(gen, common);

    auto* ev = app.add_subcommand("evaluate", "Accuracy, FID, diversity and multimodality report");
    std::string raw, rec, gdir, clf_in, clf_out;
    ev->add_option("--raw", raw, "Raw motions")->required()->check(CLI::ExistingDirectory);
    ev->add_option("--rec", rec, "Reconstructed motions")->required()->check(CLI::ExistingDirectory);
    ev->add_option("--gen", gdir, "Generated motions")->required()->check(CLI::ExistingDirectory);
    ev->add_option("--classifier", clf_in, "Use a saved classifier instead of training one")->check(CLI::ExistingFile);
    ev->add_option("--save-classifier", clf_out, "Save the trained classifier");
    add_common(ev, common);

    auto* em = app.add_subcommand("embed", "Print a semantic embedding");
    em->add_option("--text", text, "Word");
    em->add_option("--image", image, "Image path");
    add_common(em, common, false);

    auto* ex = app.add_subcommand("export", "Write full-body containers for external renderers");
    std::string channels = "axis-angle";
    ex->add_option("--input", input, "Container or directory of containers")->required()->check(CLI::ExistingPath);
    ex->add_option("--channels", channels, "axis-angle, matrix or sixd")
        ->check(CLI::IsMember({"axis-angle", "matrix", "sixd"}));
    add_common(ex, common);

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 2;
    }

    try {
        if (prep->parsed()) return cmd_prepare(manifest, qc, popts, top_k, common, out, err);
        if (tr->parsed()) return cmd_train(data, epochs, no_curriculum, common, out);
        if (rc->parsed()) return cmd_reconstruct(checkpoint, input, data, text, common, out);
        if (gen->parsed()) return cmd_generate(checkpoint, text, image, snap, frames, data, common, out);
        if (ev->parsed()) return cmd_evaluate(raw, rec, gdir, clf_in, clf_out, common, out);
        if (em->parsed()) return cmd_embed(text, image, common, out);
        if (ex->parsed()) return cmd_export(input, channels, common, out);
    } catch (const Error& e) {
        err << "error (" << to_string(e.code()) << "): " << e.what() << "\n";
        return exit_code_for(e.code());
    } catch (const nlohmann::json::exception& e) {
        err << "error (config): " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 3;
    }
    return 2;
}

}  // namespace signmotion
