#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "faceattr/attributes.hpp"
#include "faceattr/cli.hpp"
#include "faceattr/embeddings.hpp"
#include "faceattr/run_config.hpp"
#include "faceattr/error.hpp"
#include "faceattr/synthetic.hpp"

namespace fs = std::filesystem;
using namespace faceattr;

namespace {

struct Run {
    int code;
    std::string out, err;
};

Run run(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = run_cli(args, out, err);
    return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("faceattr_cli_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
}

void spit(const fs::path& p, const std::string& text) { std::ofstream(p, std::ios::binary) << text; }

} // namespace

TEST_CASE("config files parse comments, normalize keys and reject unknown keys") {
    RunConfig cfg;
    std::istringstream in("# comment\nattr = Smiling  # trailing\ntrain_n=10\n\n  seed =7\n");
    cfg.merge_text(in, "test.cfg");
    CHECK(cfg.get("attr") == "Smiling");
    CHECK(cfg.get_size("train-n") == 10);
    CHECK(cfg.get_u64("seed") == 7);
    CHECK(cfg.get("metric") == "jaccard");
    CHECK_FALSE(cfg.has("epochs"));
    cfg.set_default("epochs", "15");
    CHECK(cfg.get_size("epochs") == 15);
    cfg.set_default("epochs", "30");
    CHECK(cfg.get_size("epochs") == 15);

    std::istringstream bad("attr = A\nbogus = 1\n");
    CHECK_THROWS_WITH_AS(cfg.merge_text(bad, "x.cfg"), "x.cfg: line 2: unknown key 'bogus'", ConfigError);
    std::istringstream no_eq("attr A\n");
    CHECK_THROWS_AS(cfg.merge_text(no_eq, "x.cfg"), ConfigError);
    cfg.set("seed", "-1");
    CHECK_THROWS_AS(cfg.get_u64("seed"), ConfigError);
    cfg.set("lr", "fast");
    CHECK_THROWS_AS(cfg.get_real("lr"), ConfigError);
    cfg.set("restrict", "maybe");
    CHECK_THROWS_AS(cfg.get_bool("restrict"), ConfigError);
    CHECK_THROWS_AS(cfg.merge_file("/nonexistent/run.cfg"), IoError);
}

TEST_CASE("usage errors exit with status 2") {
    CHECK(run({}).code == 2);
    CHECK(run({"audit", "bogus"}).code == 2);
    CHECK(run({"audit"}).code == 2);
    CHECK(run({"frobnicate"}).code == 2);
    const Run help = run({"--help"});
    CHECK(help.code == 0);
    CHECK(help.out.find("train-cnn") != std::string::npos);
}

TEST_CASE("missing attribute file names the path") {
    const fs::path dir = scratch("missing");
    const std::string path = (dir / "no_such_attributes.txt").string();
    for (const char* cmd : {"train-cnn", "train-probe", "inspect"}) {
        const Run r = run({cmd, "--attributes", path, "--images", dir.string(), "--out", (dir / "o").string()});
        CHECK(r.code == 1);
        CHECK(r.err.find(path) != std::string::npos);
    }
    const Run r = run({"audit", "cooccur", "--attributes", path});
    CHECK(r.code == 1);
    CHECK(r.err.find(path) != std::string::npos);
    CHECK_FALSE(fs::exists(dir / "o"));
}

TEST_CASE("probe: id mismatch names the first missing id; dry run writes nothing") {
    const fs::path dir = scratch("probe");
    synthetic::write_gaussian_fixture(dir.string(), 200, 8, 6.0, 3);
    auto table = load_attribute_file((dir / "attributes.txt").string());
    table.add({"ghost.ppm", {1, -1}});
    {
        std::ofstream out(dir / "attributes_extra.txt");
        write_attribute_file(out, table);
    }
    const std::string emb = (dir / "embeddings.txt").string();
    const std::string out = (dir / "out").string();

    const Run mismatch = run({"train-probe", "--attributes", (dir / "attributes_extra.txt").string(), "--embeddings",
                              emb, "--attr", "Target", "--train-n", "151", "--test-n", "50", "--balance", "none",
                              "--out", out});
    CHECK(mismatch.code == 1);
    CHECK(mismatch.err.find("'ghost.ppm'") != std::string::npos);
    CHECK_FALSE(fs::exists(out));

    const Run restricted = run({"train-probe", "--attributes", (dir / "attributes_extra.txt").string(),
                                "--embeddings", emb, "--attr", "Target", "--train-n", "150", "--test-n", "50",
                                "--balance", "none", "--restrict", "true", "--dry-run", "--out", out});
    CHECK(restricted.code == 0);

    const Run dry = run({"train-probe", "--attributes", (dir / "attributes.txt").string(), "--embeddings", emb,
                         "--attr", "Target", "--train-n", "100", "--test-n", "100", "--dry-run", "--out", out});
    CHECK(dry.code == 0);
    CHECK(dry.out.find("dry run") != std::string::npos);
    CHECK_FALSE(fs::exists(out));

    const Run bad_attr = run({"train-probe", "--attributes", (dir / "attributes.txt").string(), "--embeddings", emb,
                              "--attr", "Attractive", "--dry-run"});
    CHECK(bad_attr.code == 1);
    CHECK(bad_attr.err.find("Attractive") != std::string::npos);

    const Run trained = run({"train-probe", "--attributes", (dir / "attributes.txt").string(), "--embeddings", emb,
                             "--attr", "Target", "--train-n", "100", "--test-n", "100", "--out", out});
    CHECK(trained.code == 0);
    for (const char* f : {"history.csv", "eval.csv", "confusion.csv"}) CHECK(fs::exists(fs::path(out) / f));
    CHECK(trained.out.find("test accuracy: 1.0000 (100/100)") != std::string::npos);
}

TEST_CASE("config file values are overridden by flags") {
    const fs::path dir = scratch("override");
    synthetic::write_gaussian_fixture(dir.string(), 200, 8, 6.0, 4);
    spit(dir / "run.cfg", "attributes = " + (dir / "attributes.txt").string() + "\nembeddings = " +
                              (dir / "embeddings.txt").string() +
                              "\nattr = Target\ntrain-n = 100\ntest-n = 50\nepochs = 4\nout = " +
                              (dir / "from_config").string() + "\n");
    REQUIRE(run({"train-probe", "--config", (dir / "run.cfg").string()}).code == 0);
    REQUIRE(run({"train-probe", "--config", (dir / "run.cfg").string(), "--epochs", "2", "--out",
                 (dir / "from_flag").string()})
                .code == 0);
    const std::string a = slurp(dir / "from_config" / "history.csv");
    const std::string b = slurp(dir / "from_flag" / "history.csv");
    CHECK(a.find("# config: epochs = 4\n") != std::string::npos);
    CHECK(b.find("# config: epochs = 2\n") != std::string::npos);
    CHECK(a.find("\n4,") != std::string::npos);
    CHECK(b.find("\n3,") == std::string::npos);

    spit(dir / "bad.cfg", "epochs = 2\nlearning-rate = 3\n");
    const Run bad = run({"train-probe", "--config", (dir / "bad.cfg").string()});
    CHECK(bad.code == 1);
    CHECK(bad.err.find("line 2") != std::string::npos);
}

TEST_CASE("failed writes remove partial outputs") {
    const fs::path dir = scratch("partial");
    synthetic::write_gaussian_fixture(dir.string(), 200, 8, 6.0, 5);
    const fs::path out = dir / "out";
    fs::create_directories(out / "eval.csv");  // blocks the second file
    const Run r = run({"train-probe", "--attributes", (dir / "attributes.txt").string(), "--embeddings",
                       (dir / "embeddings.txt").string(), "--attr", "Target", "--train-n", "100", "--test-n", "50",
                       "--out", out.string()});
    CHECK(r.code == 1);
    CHECK_FALSE(fs::exists(out / "history.csv"));
    CHECK_FALSE(fs::exists(out / "confusion.csv"));
}

TEST_CASE("train-cnn runs are byte-identical and report headers echo the inputs") {
    const fs::path dir = scratch("cnn");
    synthetic::write_square_fixture(dir.string(), 40, 8, 9);
    std::vector<std::string> base{"train-cnn", "--attributes", (dir / "attributes.txt").string(), "--images",
                                  (dir / "images").string(), "--attr", "Square", "--train-n", "20", "--test-n", "10",
                                  "--img-size", "8", "--epochs", "2"};
    auto a = base, b = base;
    a.insert(a.end(), {"--out", (dir / "a").string()});
    b.insert(b.end(), {"--out", (dir / "b").string()});
    const Run ra = run(a), rb = run(b);
    REQUIRE(ra.code == 0);
    REQUIRE(rb.code == 0);
    for (const char* f : {"history.csv", "eval.csv", "confusion.csv", "model.ckpt"}) {
        CHECK(fs::exists(dir / "a" / f));
        CHECK(slurp(dir / "a" / f) == slurp(dir / "b" / f));
    }
    const std::string hist = slurp(dir / "a" / "history.csv");
    CHECK(hist.rfind("# faceattr ", 0) == 0);
    CHECK(hist.find("# seed: 42\n") != std::string::npos);
    CHECK(hist.find("# input: attributes ") != std::string::npos);
    CHECK(hist.find("# input: images ") != std::string::npos);
    CHECK(hist.find("epoch,loss,train_accuracy,test_accuracy\n1,") != std::string::npos);

    const Run dry = run({"train-cnn", "--attributes", (dir / "attributes.txt").string(), "--images",
                         (dir / "images").string(), "--attr", "Square", "--train-n", "20", "--test-n", "10",
                         "--dry-run", "--out", (dir / "dry").string()});
    CHECK(dry.code == 0);
    CHECK_FALSE(fs::exists(dir / "dry"));

    fs::remove(dir / "images" / "000003.ppm");
    const Run missing = run({"train-cnn", "--attributes", (dir / "attributes.txt").string(), "--images",
                             (dir / "images").string(), "--attr", "Square", "--train-n", "20", "--test-n", "20",
                             "--dry-run"});
    CHECK(missing.code == 1);
    CHECK(missing.err.find("000003.ppm") != std::string::npos);
}

TEST_CASE("audit subcommands") {
    const fs::path dir = scratch("audit");
    spit(dir / "attr.txt", "4\nA B\nr0 1 1\nr1 1 -1\nr2 -1 1\nr3 -1 -1\n");
    const std::string out = (dir / "out").string();

    REQUIRE(run({"audit", "cooccur", "--attributes", (dir / "attr.txt").string(), "--out", out}).code == 0);
    const std::string csv = slurp(dir / "out" / "cooccur.csv");
    CHECK(csv.find("attribute,A,B\nA,1.000000,0.333333\nB,0.333333,1.000000\n") != std::string::npos);
    CHECK(csv.find("# metric: jaccard") != std::string::npos);
    CHECK(slurp(dir / "out" / "cooccur.pgm").rfind("P5\n# faceattr", 0) == 0);

    REQUIRE(run({"audit", "tree", "--attributes", (dir / "attr.txt").string(), "--attr", "B", "--out", out}).code == 0);
    const std::string tree = slurp(dir / "out" / "tree.txt");
    CHECK(tree.find("# depth: 0\n") != std::string::npos);
    CHECK(tree.find("predict B=-1") != std::string::npos);

    const Run wl = run({"audit", "workload", "--images-per-hour", "70", "--n-features", "40", "--out", out});
    REQUIRE(wl.code == 0);
    CHECK(wl.out.find("46.67") != std::string::npos);
    CHECK(slurp(dir / "out" / "workload.txt").find("decisions_per_worker_minute: 46.67") != std::string::npos);
    const Run sched = run({"audit", "workload", "--out", out});
    CHECK(sched.out.find("decisions_per_worker_minute: 3.75") != std::string::npos);
    CHECK(run({"audit", "workload", "--n-workers", "0", "--out", out}).code == 1);

    spit(dir / "eval.csv", "# comment\nimage_id,true,predicted,prob_positive\na,1,1,0.9\nb,0,1,0.8\nc,1,0,0.1\n");
    REQUIRE(run({"audit", "confusion", "--eval", (dir / "eval.csv").string(), "--out", out}).code == 0);
    CHECK(slurp(dir / "out" / "confusion.csv").find("false_positive,b,0.800000000") != std::string::npos);
    REQUIRE(run({"audit", "noise", "--eval", (dir / "eval.csv").string(), "--top-k", "1", "--out", out}).code == 0);
    CHECK(slurp(dir / "out" / "noise.csv").find("1,c,0.900000000,-1,+1\n") != std::string::npos);
    CHECK(run({"audit", "noise", "--eval", (dir / "eval.csv").string(), "--top-k", "0", "--out", out}).code == 1);

    const Run stats = run({"inspect", "--attributes", (dir / "attr.txt").string()});
    CHECK(stats.code == 0);
    CHECK(stats.out.find("records: 4") != std::string::npos);
}
