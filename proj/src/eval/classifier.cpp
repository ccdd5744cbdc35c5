#include "signmotion/eval/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "signmotion/common/error.hpp"
#include "signmotion/nn/adam.hpp"
#include "signmotion/nn/archive.hpp"

namespace signmotion {

using nn::Graph;
using nn::Matrix;
using nn::Var;

SkeletonGraph SkeletonGraph::from_layout(const JointLayout& layout) {
    SkeletonGraph g;
    g.layout = layout.name();
    g.nodes = layout.size();
    for (int j = 0; j < layout.size(); ++j)
        if (layout.parent_index()[j] >= 0) g.edges.emplace_back(j, layout.parent_index()[j]);
    return g;
}

nn::JointMixer SkeletonGraph::normalized_adjacency() const {
    std::vector<double> degree(nodes, 1.0);
    for (const auto& [c, p] : edges) {
        degree[c] += 1.0;
        degree[p] += 1.0;
    }
    nn::JointMixer mixer;
    mixer.neighbors.resize(nodes);
    for (int j = 0; j < nodes; ++j) mixer.neighbors[j].emplace_back(j, 1.0 / degree[j]);
    for (const auto& [c, p] : edges) {
        const double w = 1.0 / std::sqrt(degree[c] * degree[p]);
        mixer.neighbors[c].emplace_back(p, w);
        mixer.neighbors[p].emplace_back(c, w);
    }
    return mixer;
}

void ClassifierConfig::validate() const {
    require(frames >= 4, ErrorCode::config, "classifier frames must be at least 4");
    require(hidden1 > 0 && hidden2 > 0 && feature_dim > 0, ErrorCode::config, "classifier widths must be positive");
    require(epochs >= 1 && batch_size >= 1, ErrorCode::config, "classifier epochs and batch size must be positive");
    require(learning_rate > 0.0, ErrorCode::config, "classifier learning rate must be positive");
}

namespace {

nlohmann::json config_json(const ClassifierConfig& c) {
    return {{"frames", c.frames},   {"hidden1", c.hidden1},       {"hidden2", c.hidden2},
            {"feature_dim", c.feature_dim}, {"epochs", c.epochs}, {"batch_size", c.batch_size},
            {"learning_rate", c.learning_rate}, {"seed", c.seed}};
}

ClassifierConfig config_from(const nlohmann::json& j) {
    ClassifierConfig c;
    c.frames = j.at("frames");
    c.hidden1 = j.at("hidden1");
    c.hidden2 = j.at("hidden2");
    c.feature_dim = j.at("feature_dim");
    c.epochs = j.at("epochs");
    c.batch_size = j.at("batch_size");
    c.learning_rate = j.at("learning_rate");
    c.seed = j.at("seed");
    return c;
}

}  // namespace

void MotionClassifier::build(Rng& rng) {
    mixer_ = graph_.normalized_adjacency();
    params_ = nn::ParameterSet{};
    auto block = [&](const std::string& name, int in, int out) {
        Block b;
        b.spatial = nn::Linear::create(params_, name + ".centre", in, out, rng);
        b.t_prev = params_.add(name + ".prev", nn::xavier_uniform(in, out, rng));
        b.t_next = params_.add(name + ".next", nn::xavier_uniform(in, out, rng));
        return b;
    };
    block1_ = block("block1", graph_.channel_width, config_.hidden1);
    block2_ = block("block2", config_.hidden1, config_.hidden2);
    feature_ = nn::Linear::create(params_, "feature", config_.hidden2, config_.feature_dim, rng);
    head_ = nn::Linear::create(params_, "head", config_.feature_dim, static_cast<int>(classes_.size()), rng);
}

Matrix MotionClassifier::prepare(const Motion& motion) const {
    require(motion.layout().name() == graph_.layout && motion.layout().size() == graph_.nodes, ErrorCode::shape,
            "classifier expects layout '" + graph_.layout + "', got '" + motion.layout().name() + "'");
    const Motion m = convert_channels(resample(motion, config_.frames), Channels::sixd);
    const int joints = graph_.nodes;
    Matrix x(static_cast<Eigen::Index>(config_.frames) * joints, 6);
    for (int t = 0; t < config_.frames; ++t)
        for (int j = 0; j < joints; ++j)
            for (int c = 0; c < 6; ++c) x(t * joints + j, c) = m.frames()(t, 6 * j + c);
    return x;
}

MotionClassifier::Outputs MotionClassifier::forward(Graph& g, const Matrix& input) const {
    const int joints = graph_.nodes;
    auto block = [&](Var x, const Block& b) {
        const Var h = g.mix_joints(x, mixer_);
        Var y = b.spatial.forward(g, h);
        y = g.add(y, g.matmul(g.time_shift(h, -1, joints), g.param(b.t_prev)));
        y = g.add(y, g.matmul(g.time_shift(h, 1, joints), g.param(b.t_next)));
        return g.time_pool2(g.gelu(y), joints);
    };
    Var x = block(g.constant(input), block1_);
    x = block(x, block2_);
    const Var feat = g.gelu(feature_.forward(g, g.mean_rows(x)));
    return {feat, head_.forward(g, feat)};
}

MotionClassifier MotionClassifier::train(const std::vector<Motion>& motions, const std::vector<std::string>& labels,
                                         const ClassifierConfig& config) {
    config.validate();
    require(motions.size() == labels.size(), ErrorCode::invalid_argument, "classifier: motions and labels differ in count");
    require(!motions.empty(), ErrorCode::config, "classifier: no training motions");
    std::map<std::string, int> counts;
    for (const auto& l : labels) ++counts[l];
    require(counts.size() >= 2, ErrorCode::config, "classifier needs at least two words");
    for (const auto& [word, n] : counts)
        require(n >= 2, ErrorCode::config, "classifier needs at least two samples of '" + word + "'");

    MotionClassifier clf;
    clf.config_ = config;
    clf.graph_ = SkeletonGraph::from_layout(motions.front().layout());
    for (const auto& [word, n] : counts) clf.classes_.push_back(word);
    Rng init(config.seed);
    clf.build(init);

    std::vector<Matrix> inputs;
    std::vector<int> targets;
    for (std::size_t i = 0; i < motions.size(); ++i) {
        inputs.push_back(clf.prepare(motions[i]));
        targets.push_back(static_cast<int>(std::distance(counts.begin(), counts.find(labels[i]))));
    }

    nn::Adam adam(clf.params_, nn::AdamConfig{config.learning_rate});
    Rng order_rng(mix_seed(config.seed, 0x636c6173));
    const int n = static_cast<int>(inputs.size());
    std::vector<int> order(n);
    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        std::iota(order.begin(), order.end(), 0);
        for (int i = n; i > 1; --i) std::swap(order[i - 1], order[order_rng.uniform_index(static_cast<std::uint64_t>(i))]);
        for (int start = 0; start < n; start += config.batch_size) {
            const int end = std::min(n, start + config.batch_size);
            nn::Gradients batch = clf.params_.zeros_like();
            for (int k = start; k < end; ++k) {
                Graph g(clf.params_);
                const Var loss = g.softmax_cross_entropy(clf.forward(g, inputs[order[k]]).logits, targets[order[k]]);
                require(std::isfinite(g.value(loss)(0, 0)), ErrorCode::numerical,
                        "classifier loss is not finite at epoch " + std::to_string(epoch));
                nn::Gradients grads = clf.params_.zeros_like();
                g.backward(loss, grads);
                nn::accumulate(batch, grads, 1.0 / (end - start));
            }
            adam.step(clf.params_, batch);
        }
    }
    return clf;
}

Eigen::VectorXd MotionClassifier::logits(const Motion& motion) const {
    require(ready(), ErrorCode::state, "classifier is not trained");
    Graph g(params_);
    return g.value(forward(g, prepare(motion)).logits).row(0).transpose();
}

Eigen::VectorXd MotionClassifier::features(const Motion& motion) const {
    require(ready(), ErrorCode::state, "classifier is not trained");
    Graph g(params_);
    return g.value(forward(g, prepare(motion)).features).row(0).transpose();
}

int MotionClassifier::predict(const Motion& motion) const { return argmax_lowest(logits(motion)); }

const std::string& MotionClassifier::predict_label(const Motion& motion) const { return classes_[predict(motion)]; }

void MotionClassifier::save(const std::filesystem::path& path) const {
    require(ready(), ErrorCode::state, "classifier is not trained");
    nn::Archive a;
    a.header = {{"format", "signmotion-classifier"},
                {"version", 1},
                {"layout", graph_.layout},
                {"classes", classes_},
                {"config", config_json(config_)}};
    nn::append_parameters(a, "param/", params_);
    nn::write_archive(path, a);
}

MotionClassifier MotionClassifier::load(const std::filesystem::path& path) {
    if (!std::filesystem::exists(path)) fail(ErrorCode::state, "classifier not found: " + path.string());
    const nn::Archive a = nn::read_archive(path);
    require(a.header.value("format", "") == "signmotion-classifier", ErrorCode::format,
            "not a classifier archive: " + path.string());
    require(a.header.value("version", 0) == 1, ErrorCode::format, "unsupported classifier version");
    MotionClassifier clf;
    try {
        clf.config_ = config_from(a.header.at("config"));
        clf.classes_ = a.header.at("classes").get<std::vector<std::string>>();
        clf.graph_ = SkeletonGraph::from_layout(layout_by_name(a.header.at("layout").get<std::string>()));
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorCode::format, std::string("classifier header: ") + e.what());
    }
    Rng init(0);
    clf.build(init);
    nn::load_parameters(a, "param/", clf.params_);
    return clf;
}

int argmax_lowest(const Eigen::VectorXd& scores) {
    require(scores.size() > 0, ErrorCode::invalid_argument, "argmax of an empty vector");
    int best = 0;
    for (int i = 1; i < scores.size(); ++i)
        if (scores[i] > scores[best]) best = i;
    return best;
}

double accuracy(const std::vector<int>& predicted, const std::vector<int>& labels) {
    require(predicted.size() == labels.size(), ErrorCode::invalid_argument, "accuracy: length mismatch");
    require(!labels.empty(), ErrorCode::insufficient_data, "accuracy of an empty set");
    std::size_t hits = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) hits += predicted[i] == labels[i];
    return static_cast<double>(hits) / static_cast<double>(labels.size());
}

double accuracy(const MotionClassifier& classifier, const std::vector<Motion>& motions,
                const std::vector<std::string>& labels) {
    require(motions.size() == labels.size(), ErrorCode::invalid_argument, "accuracy: length mismatch");
    std::vector<int> predicted, truth;
    const auto& classes = classifier.classes();
    for (std::size_t i = 0; i < motions.size(); ++i) {
        predicted.push_back(classifier.predict(motions[i]));
        const auto it = std::lower_bound(classes.begin(), classes.end(), labels[i]);
        truth.push_back(it != classes.end() && *it == labels[i] ? static_cast<int>(it - classes.begin()) : -1);
    }
    return accuracy(predicted, truth);
}

}  // namespace signmotion
