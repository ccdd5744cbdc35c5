#include <CLI11.hpp>
#include <iostream>

#include "signmotion/common/error.hpp"
#include "signmotion/toy/toy_data.hpp"

int main(int argc, char** argv) {
    signmotion::ToyDataConfig config;
    std::string out;
    CLI::App app{"Write a procedural toy sign-word dataset", "make_toy_data"};
    app.add_option("--out", out, "Output directory")->required();
    app.add_option("--words", config.words, "Word list");
    app.add_option("--samples", config.samples_per_word, "Sequences per word");
    app.add_option("--frames", config.frames, "Frames per sequence");
    app.add_option("--noise", config.noise, "Per-value noise (radians)");
    app.add_option("--seed", config.seed, "Random seed");
    CLI11_PARSE(app, argc, argv);
    try {
        const auto manifest = signmotion::write_toy_dataset(config, out);
        std::cout << "wrote " << manifest.records.size() << " clips to " << out << "\n";
    } catch (const signmotion::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return signmotion::exit_code_for(e.code());
    }
    return 0;
}
