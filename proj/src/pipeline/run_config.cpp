#include "signmotion/pipeline/run_config.hpp"

#include <fstream>

#include "signmotion/common/error.hpp"
#include "signmotion/common/hash.hpp"
#include "signmotion/common/io.hpp"
#include "signmotion/model/checkpoint.hpp"
#include "signmotion/motion/container.hpp"

namespace signmotion {

using nlohmann::json;

ModelConfig desk_model_config() {
    ModelConfig c;
    c.d_latent = 32;
    c.d_model = 64;
    c.n_heads = 4;
    c.n_enc_layers = 2;
    c.n_dec_layers = 2;
    c.d_ff = 128;
    return c;
}

TrainConfig desk_train_config() {
    TrainConfig c;
    c.epochs = 300;
    c.batch_size = 4;
    c.learning_rate = 1e-3;
    c.w_kl = 1e-4;
    c.checkpoint_every = 100;
    c.schedule.step = 40;
    return c;
}

json to_json(const ProviderConfig& c) {
    return {{"provider", c.provider == ProviderKind::stub ? "stub" : "real"},
            {"d_emb", c.d_emb},
            {"endpoint", c.endpoint_or_model_ref},
            {"cache_path", c.cache_path},
            {"stub_seed", c.stub_seed}};
}

ProviderConfig provider_config_from_json(const json& j, ProviderConfig c) {
    try {
        if (j.contains("provider")) {
            const std::string p = j["provider"];
            require(p == "stub" || p == "real", ErrorCode::config, "embedding provider must be 'stub' or 'real'");
            c.provider = p == "stub" ? ProviderKind::stub : ProviderKind::real;
        }
        c.d_emb = j.value("d_emb", c.d_emb);
        c.endpoint_or_model_ref = j.value("endpoint", c.endpoint_or_model_ref);
        c.cache_path = j.value("cache_path", c.cache_path);
        c.stub_seed = j.value("stub_seed", c.stub_seed);
    } catch (const json::exception& e) {
        fail(ErrorCode::config, std::string("embedding config: ") + e.what());
    }
    return c;
}

json to_json(const ClassifierConfig& c) {
    return {{"frames", c.frames},           {"hidden1", c.hidden1},       {"hidden2", c.hidden2},
            {"feature_dim", c.feature_dim}, {"epochs", c.epochs},         {"batch_size", c.batch_size},
            {"learning_rate", c.learning_rate}, {"seed", c.seed}};
}

ClassifierConfig classifier_config_from_json(const json& j, ClassifierConfig c) {
    try {
        c.frames = j.value("frames", c.frames);
        c.hidden1 = j.value("hidden1", c.hidden1);
        c.hidden2 = j.value("hidden2", c.hidden2);
        c.feature_dim = j.value("feature_dim", c.feature_dim);
        c.epochs = j.value("epochs", c.epochs);
        c.batch_size = j.value("batch_size", c.batch_size);
        c.learning_rate = j.value("learning_rate", c.learning_rate);
        c.seed = j.value("seed", c.seed);
    } catch (const json::exception& e) {
        fail(ErrorCode::config, std::string("classifier config: ") + e.what());
    }
    return c;
}

json to_json(const RunConfig& c) {
    return {{"model", to_json(c.model)},
            {"train", to_json(c.train)},
            {"embedding", to_json(c.embedding)},
            {"classifier", to_json(c.classifier)},
            {"eval", to_json(c.eval)}};
}

RunConfig run_config_from_json(const json& j, RunConfig c) {
    require(j.is_object(), ErrorCode::config, "config file must hold a JSON object");
    for (const auto& [key, value] : j.items()) {
        require(key == "model" || key == "train" || key == "embedding" || key == "classifier" || key == "eval",
                ErrorCode::config, "unknown config section '" + key + "'");
        require(value.is_object(), ErrorCode::config, "config section '" + key + "' must be an object");
    }
    if (j.contains("model")) c.model = model_config_from_json(j["model"], c.model);
    if (j.contains("train")) c.train = train_config_from_json(j["train"], c.train);
    if (j.contains("embedding")) c.embedding = provider_config_from_json(j["embedding"], c.embedding);
    if (j.contains("classifier")) c.classifier = classifier_config_from_json(j["classifier"], c.classifier);
    if (j.contains("eval")) c.eval = eval_config_from_json(j["eval"], c.eval);
    return c;
}

RunConfig load_run_config(const std::filesystem::path& path, RunConfig base) {
    json j;
    try {
        j = json::parse(read_file(path));
    } catch (const json::parse_error& e) {
        fail(ErrorCode::config, "config " + path.string() + ": " + e.what());
    }
    return run_config_from_json(j, base);
}

json make_stamp(const std::string& command, const json& config, std::uint64_t seed) {
    return {{"command", command},
            {"config_sha256", to_hex(sha256(config.dump()))},
            {"seed", seed},
            {"versions",
             {{"tool", kToolVersion},
              {"container_format", kContainerFormatVersion},
              {"checkpoint", kCheckpointVersion}}}};
}

void write_stamp_sidecar(const std::filesystem::path& artifact, const json& stamp) {
    write_file_atomic(artifact.string() + ".stamp.json", stamp.dump(2) + "\n");
}

std::vector<Motion> load_split(const DatasetManifest& manifest, Split split, std::vector<std::string>* labels,
                               std::vector<std::string>* clip_ids) {
    std::vector<Motion> out;
    for (const ClipRecord* r : manifest.with_split(split)) {
        Motion m = read_container(r->source_path);
        m.set_gloss(r->gloss);
        if (labels) labels->push_back(r->gloss);
        if (clip_ids) clip_ids->push_back(r->clip_id);
        out.push_back(std::move(m));
    }
    return out;
}

DatasetTrainResult train_from_manifest(CvaeModel& model, const DatasetManifest& manifest, const RunConfig& config,
                                       const std::filesystem::path& out_dir) {
    config.train.validate();
    std::vector<std::string> labels;
    const std::vector<Motion> motions = load_split(manifest, Split::train, &labels);
    require(!motions.empty(), ErrorCode::config, "dataset has no train records");

    DatasetTrainResult result;
    for (const auto& [word, n] : manifest.word_counts()) result.vocabulary.push_back(word);
    SemanticEncoder encoder(config.embedding);
    std::map<std::string, SemanticEmbedding> conds;
    for (const auto& word : result.vocabulary) {
        try {
            conds.emplace(word, encoder.embed_text(word));
        } catch (const Error& e) {
            fail(ErrorCode::config, "no embedding for gloss '" + word + "': " + e.what());
        }
        require(static_cast<int>(conds.at(word).vector.size()) == config.model.d_emb, ErrorCode::config,
                "embedding for '" + word + "' has dimension " + std::to_string(conds.at(word).vector.size()) +
                    ", model expects " + std::to_string(config.model.d_emb));
    }

    std::vector<TrainingSample> samples;
    for (std::size_t i = 0; i < motions.size(); ++i) samples.push_back({motions[i], conds.at(labels[i])});

    const json cfg = to_json(config);
    TrainOutputs outputs;
    outputs.dir = out_dir;
    outputs.metadata = {{"vocabulary", result.vocabulary},
                        {"embedding", to_json(config.embedding)},
                        {"embedding_provider", encoder.provider().id()},
                        {"stamp", make_stamp("train", cfg, config.train.seed)}};
    result.train = train(model, samples, config.train, outputs);
    if (!out_dir.empty()) write_file_atomic(out_dir / "run_stamp.json", outputs.metadata["stamp"].dump(2) + "\n");
    return result;
}

}  // namespace signmotion
