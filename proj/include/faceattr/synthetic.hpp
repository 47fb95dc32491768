#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "faceattr/attributes.hpp"
#include "faceattr/cnn.hpp"
#include "faceattr/embeddings.hpp"

namespace faceattr::synthetic {

// Constructed datasets with known separability, used by the test suites and
// the fixture generator tool.

/// Dark noisy images; class-1 images also hold a bright square of side
/// size/4 at a random position. Classes alternate 0,1,0,1,...
LabeledImages bright_square_images(std::size_t count, std::size_t size, std::size_t channels, std::uint64_t seed);

/// Same images with classes drawn independently of the pixels (balanced in
/// expectation), i.e. an unlearnable target.
LabeledImages random_label_images(std::size_t count, std::size_t size, std::size_t channels, std::uint64_t seed);

struct GaussianEmbeddings {
    EmbeddingTable table;
    /// attribute table with one attribute "Target" (and "Flipped" marking
    /// injected label noise), ids matching `table`.
    AttributeTable labels;
    std::vector<std::string> flipped_ids;
};

/// Two isotropic unit-variance Gaussians whose means are `separation`
/// standard deviations apart, classes alternating. A fraction `flip_rate` of
/// labels is inverted after sampling.
GaussianEmbeddings gaussian_embeddings(std::size_t count, std::size_t dim, double separation, std::uint64_t seed,
                                       double flip_rate = 0.0);

/// Writes `dir/images/<id>.ppm` and `dir/attributes.txt` for a bright-square
/// dataset with attributes "Square" (the signal) and "Coin" (independent).
void write_square_fixture(const std::string& dir, std::size_t count, std::size_t size, std::uint64_t seed);

/// Writes `dir/embeddings.txt` and `dir/attributes.txt` for gaussian_embeddings.
void write_gaussian_fixture(const std::string& dir, std::size_t count, std::size_t dim, double separation,
                            std::uint64_t seed, double flip_rate = 0.0);

} // namespace faceattr::synthetic
