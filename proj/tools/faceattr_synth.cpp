// Writes synthetic fixtures for trying the faceattr commands without CelebA.
#include <CLI11.hpp>

#include <cstdint>
#include <iostream>
#include <string>

#include "faceattr/synthetic.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Synthetic fixture generator", "faceattr-synth"};
    app.require_subcommand(1);

    std::string out = "fixture";
    std::size_t count = 1000, size = 32, dim = 128;
    std::uint64_t seed = 42;
    double separation = 6.0, flip_rate = 0.0;

    auto* squares = app.add_subcommand("squares", "noisy images, attribute Square marks a bright patch");
    auto* gaussian = app.add_subcommand("gaussian", "two-Gaussian embeddings, attribute Target");
    for (auto* sub : {squares, gaussian}) {
        sub->add_option("--out", out, "output directory")->capture_default_str();
        sub->add_option("--count", count, "records")->capture_default_str();
        sub->add_option("--seed", seed, "generator seed")->capture_default_str();
    }
    squares->add_option("--size", size, "image side in pixels")->capture_default_str();
    gaussian->add_option("--dim", dim, "embedding dimension")->capture_default_str();
    gaussian->add_option("--separation", separation, "distance between class means")->capture_default_str();
    gaussian->add_option("--flip-rate", flip_rate, "fraction of labels flipped")->capture_default_str();

    CLI11_PARSE(app, argc, argv);
    try {
        if (squares->parsed()) {
            faceattr::synthetic::write_square_fixture(out, count, size, seed);
            std::cout << "wrote " << count << " images and attributes.txt to " << out << '\n';
        } else {
            faceattr::synthetic::write_gaussian_fixture(out, count, dim, separation, seed, flip_rate);
            std::cout << "wrote embeddings.txt and attributes.txt to " << out << '\n';
        }
    } catch (const std::exception& e) {
        std::cerr << "faceattr-synth: error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
