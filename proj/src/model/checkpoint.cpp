#include "signmotion/model/checkpoint.hpp"

#include "signmotion/common/error.hpp"
#include "signmotion/nn/archive.hpp"

namespace signmotion {

void save_checkpoint(const std::filesystem::path& path, const CvaeModel& model, const CheckpointState& state) {
    require(model.ready(), ErrorCode::state, "cannot checkpoint a model without weights");
    nn::Archive a;
    a.header = {{"format", "signmotion-checkpoint"},
                {"version", kCheckpointVersion},
                {"model_config", to_json(model.config())},
                {"train_config", state.train_config},
                {"metadata", state.metadata},
                {"epoch", state.epoch},
                {"rng_state", state.rng_state},
                {"has_optimizer", state.optimizer.has_value()}};
    nn::append_parameters(a, "param/", model.parameters());
    if (state.optimizer) {
        const nn::AdamConfig& c = state.optimizer->config();
        a.header["optimizer"] = {{"steps", state.optimizer->steps()},
                                 {"learning_rate", c.learning_rate},
                                 {"beta1", c.beta1},
                                 {"beta2", c.beta2},
                                 {"epsilon", c.epsilon}};
        nn::append_matrices(a, "adam_m/", model.parameters(), state.optimizer->first_moment());
        nn::append_matrices(a, "adam_v/", model.parameters(), state.optimizer->second_moment());
    }
    nn::write_archive(path, a);
}

LoadedCheckpoint load_checkpoint(const std::filesystem::path& path) {
    require(std::filesystem::exists(path), ErrorCode::state, "checkpoint '" + path.string() + "' does not exist");
    const nn::Archive a = nn::read_archive(path);
    require(a.header.value("format", std::string()) == "signmotion-checkpoint", ErrorCode::format,
            "'" + path.string() + "' is not a checkpoint");
    require(a.header.value("version", -1) == kCheckpointVersion, ErrorCode::format,
            "checkpoint '" + path.string() + "': unsupported version " + a.header.value("version", nlohmann::json()).dump());

    LoadedCheckpoint out;
    out.model = CvaeModel(model_config_from_json(a.header.at("model_config")), 0);
    nn::load_parameters(a, "param/", out.model.parameters());
    out.state.epoch = a.header.value("epoch", 0);
    out.state.rng_state = a.header.value("rng_state", std::string());
    out.state.train_config = a.header.value("train_config", nlohmann::json::object());
    out.state.metadata = a.header.value("metadata", nlohmann::json::object());
    if (a.header.value("has_optimizer", false)) {
        const auto& o = a.header.at("optimizer");
        nn::AdamConfig c;
        c.learning_rate = o.at("learning_rate").get<double>();
        c.beta1 = o.at("beta1").get<double>();
        c.beta2 = o.at("beta2").get<double>();
        c.epsilon = o.at("epsilon").get<double>();
        nn::Adam adam(out.model.parameters(), c);
        adam.restore(o.at("steps").get<long long>(), nn::load_matrices(a, "adam_m/", out.model.parameters()),
                     nn::load_matrices(a, "adam_v/", out.model.parameters()));
        out.state.optimizer = std::move(adam);
    }
    return out;
}

}  // namespace signmotion
