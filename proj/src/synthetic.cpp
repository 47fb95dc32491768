#include "faceattr/synthetic.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>

#include "faceattr/error.hpp"
#include "faceattr/image.hpp"
#include "faceattr/rng.hpp"

namespace faceattr::synthetic {

namespace {

Tensor noise_image(std::size_t size, std::size_t channels, Rng& rng) {
    Tensor img({channels, size, size});
    for (auto& v : img.values()) v = static_cast<float>(rng.uniform(0.0, 0.4));
    return img;
}

void paint_square(Tensor& img, Rng& rng) {
    const std::size_t size = img.dim(1);
    const std::size_t side = std::max<std::size_t>(2, size / 4);
    const std::size_t y0 = rng.below(size - side + 1), x0 = rng.below(size - side + 1);
    for (std::size_t c = 0; c < img.dim(0); ++c)
        for (std::size_t y = y0; y < y0 + side; ++y)
            for (std::size_t x = x0; x < x0 + side; ++x) img.at(c, y, x) = static_cast<float>(rng.uniform(0.9, 1.0));
}

std::string image_id(std::size_t i) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%06zu.ppm", i + 1);
    return buf;
}

} // namespace

LabeledImages bright_square_images(std::size_t count, std::size_t size, std::size_t channels, std::uint64_t seed) {
    Rng rng = Rng::substream(seed, "synthetic-squares");
    LabeledImages data;
    for (std::size_t i = 0; i < count; ++i) {
        Tensor img = noise_image(size, channels, rng);
        const int cls = static_cast<int>(i % 2);
        if (cls == 1) paint_square(img, rng);
        data.ids.push_back(image_id(i));
        data.images.push_back(std::move(img));
        data.classes.push_back(cls);
    }
    return data;
}

LabeledImages random_label_images(std::size_t count, std::size_t size, std::size_t channels, std::uint64_t seed) {
    LabeledImages data = bright_square_images(count, size, channels, seed);
    Rng rng = Rng::substream(seed, "synthetic-random-labels");
    for (auto& c : data.classes) c = static_cast<int>(rng.below(2));
    return data;
}

GaussianEmbeddings gaussian_embeddings(std::size_t count, std::size_t dim, double separation, std::uint64_t seed,
                                       double flip_rate) {
    if (dim == 0) throw ArgumentError("gaussian_embeddings: dim must be positive");
    Rng rng = Rng::substream(seed, "synthetic-gaussian");
    // Means at +-(separation/2) along a random unit direction.
    std::vector<double> direction(dim);
    double norm = 0;
    for (auto& d : direction) {
        d = rng.normal();
        norm += d * d;
    }
    norm = std::sqrt(norm);
    for (auto& d : direction) d /= norm;

    GaussianEmbeddings out{EmbeddingTable(dim), AttributeTable({"Target", "Flipped"}), {}};
    for (std::size_t i = 0; i < count; ++i) {
        const int cls = static_cast<int>(i % 2);
        const double offset = (cls == 1 ? 0.5 : -0.5) * separation;
        std::vector<float> v(dim);
        for (std::size_t k = 0; k < dim; ++k) v[k] = static_cast<float>(offset * direction[k] + rng.normal());
        const bool flip = rng.uniform() < flip_rate;
        const int label_cls = flip ? 1 - cls : cls;
        std::string id = image_id(i);
        out.table.add(id, std::move(v));
        out.labels.add({id, {static_cast<Label>(label_cls == 1 ? 1 : -1), static_cast<Label>(flip ? 1 : -1)}});
        if (flip) out.flipped_ids.push_back(id);
    }
    return out;
}

void write_square_fixture(const std::string& dir, std::size_t count, std::size_t size, std::uint64_t seed) {
    namespace fs = std::filesystem;
    const fs::path root(dir);
    fs::create_directories(root / "images");
    LabeledImages data = bright_square_images(count, size, 3, seed);
    Rng coin = Rng::substream(seed, "synthetic-coin");
    AttributeTable table({"Square", "Coin"});
    for (std::size_t i = 0; i < data.size(); ++i) {
        write_pnm((root / "images" / data.ids[i]).string(), data.images[i]);
        table.add({data.ids[i], {static_cast<Label>(data.classes[i] == 1 ? 1 : -1),
                                 static_cast<Label>(coin.below(2) ? 1 : -1)}});
    }
    std::ofstream out(root / "attributes.txt");
    if (!out) throw IoError((root / "attributes.txt").string(), "cannot create attribute file");
    write_attribute_file(out, table);
}

void write_gaussian_fixture(const std::string& dir, std::size_t count, std::size_t dim, double separation,
                            std::uint64_t seed, double flip_rate) {
    namespace fs = std::filesystem;
    const fs::path root(dir);
    fs::create_directories(root);
    const GaussianEmbeddings data = gaussian_embeddings(count, dim, separation, seed, flip_rate);
    std::ofstream emb(root / "embeddings.txt");
    if (!emb) throw IoError((root / "embeddings.txt").string(), "cannot create embedding file");
    write_embeddings(emb, data.table);
    std::ofstream attr(root / "attributes.txt");
    if (!attr) throw IoError((root / "attributes.txt").string(), "cannot create attribute file");
    write_attribute_file(attr, data.labels);
}

} // namespace faceattr::synthetic
