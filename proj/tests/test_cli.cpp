#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include "srnkit/image.hpp"
#include "srnkit/wider_io.hpp"

namespace fs = std::filesystem;

namespace {

struct RunResult {
    int exit_code = -1;
    std::string out;
    std::string err;
};

fs::path work_dir() {
    static const fs::path dir = [] {
        fs::path p = fs::temp_directory_path() / "srnkit_cli_test";
        fs::remove_all(p);
        fs::create_directories(p);
        return p;
    }();
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

RunResult run(const std::string& args) {
    const fs::path out = work_dir() / "stdout.txt";
    const fs::path err = work_dir() / "stderr.txt";
    const std::string cmd = std::string(SRNKIT_CLI_PATH) + " " + args + " > " + out.string() +
                            " 2> " + err.string();
    const int status = std::system(cmd.c_str());
    RunResult r;
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = slurp(out);
    r.err = slurp(err);
    return r;
}

bool contains(const std::string& hay, const std::string& needle) {
    return hay.find(needle) != std::string::npos;
}

}  // namespace

TEST_CASE("anchors table") {
    const RunResult r = run("anchors");
    REQUIRE(r.exit_code == 0);
    CHECK(contains(r.out, "level\tstride"));
    CHECK(contains(r.out, "131072"));
    CHECK(contains(r.out, "174720"));
    CHECK(contains(r.out, "362.03867196751236"));
}

TEST_CASE("anchors respects --input") {
    const RunResult r = run("--input 512 anchors");
    REQUIRE(r.exit_code == 0);
    CHECK(contains(r.out, "32768"));       // level 0 at stride 4: 128^2 * 2
    CHECK_FALSE(contains(r.out, "174720"));
}

TEST_CASE("shapes variants") {
    const RunResult r = run("shapes --variant new_resnet");
    REQUIRE(r.exit_code == 0);
    CHECK(contains(r.out, "21296"));
    const RunResult r2 = run("shapes --variant resnet_original");
    CHECK(contains(r2.out, "9408"));
    const RunResult bad = run("shapes --variant vgg");
    CHECK(bad.exit_code == 2);
    CHECK(contains(bad.err, "error"));
}

TEST_CASE("usage errors exit 1") {
    CHECK(run("frobnicate").exit_code == 1);
    CHECK(run("anchors --no-such-flag").exit_code == 1);
    CHECK(run("").exit_code == 1);  // bare invocation prints help
}

TEST_CASE("missing files exit 2") {
    const RunResult r = run("eval --gt /nonexistent/gt.txt --dets /nonexistent/dets");
    CHECK(r.exit_code == 2);
    CHECK(contains(r.err, "error"));
}

TEST_CASE("print-config round trips through --config") {
    const RunResult printed = run("--print-config");
    REQUIRE(printed.exit_code == 0);
    const fs::path cfg = work_dir() / "run.cfg";
    std::ofstream(cfg) << printed.out;
    const RunResult reprinted = run("--config " + cfg.string() + " --print-config");
    REQUIRE(reprinted.exit_code == 0);
    CHECK(reprinted.out == printed.out);

    // A flag overrides the file.
    const RunResult seeded = run("--config " + cfg.string() + " --seed 9 --print-config");
    CHECK(contains(seeded.out, "seed = 9"));
}

TEST_CASE("synth, simulate, eval pipeline reaches perfect ap") {
    const fs::path gt = work_dir() / "scene_gt.txt";
    const fs::path dets = work_dir() / "dets";
    const RunResult synth = run("--seed 5 synth --faces 6 --min-scale 60 --name s/img.jpg --out-gt " +
                                gt.string());
    REQUIRE(synth.exit_code == 0);
    CHECK(contains(synth.out, "faces\t6"));

    const RunResult sim =
        run("--seed 5 simulate --oracle --gt " + gt.string() + " --out " + dets.string());
    REQUIRE(sim.exit_code == 0);

    const RunResult eval = run("eval --gt " + gt.string() + " --dets " + dets.string());
    REQUIRE(eval.exit_code == 0);
    CHECK(contains(eval.out, "AP easy=1.0000 medium=1.0000 hard=1.0000"));
}

TEST_CASE("simulate output is invariant under --jobs") {
    const fs::path gt = work_dir() / "jobs_gt.txt";
    REQUIRE(run("--seed 3 synth --faces 4 --min-scale 40 --name a.jpg --out-gt " + gt.string())
                .exit_code == 0);
    // Append a second image block so there is real work to parallelize.
    {
        const fs::path gt2 = work_dir() / "jobs_gt2.txt";
        REQUIRE(run("--seed 4 synth --faces 3 --min-scale 40 --name b.jpg --out-gt " + gt2.string())
                    .exit_code == 0);
        std::ofstream(gt, std::ios::app) << slurp(gt2);
    }
    const fs::path d1 = work_dir() / "dets_j1";
    const fs::path d4 = work_dir() / "dets_j4";
    REQUIRE(run("--seed 11 --jobs 1 simulate --gt " + gt.string() + " --out " + d1.string())
                .exit_code == 0);
    REQUIRE(run("--seed 11 --jobs 4 simulate --gt " + gt.string() + " --out " + d4.string())
                .exit_code == 0);
    CHECK(slurp(d1 / "a.txt") == slurp(d4 / "a.txt"));
    CHECK(slurp(d1 / "b.txt") == slurp(d4 / "b.txt"));
    CHECK(!slurp(d1 / "a.txt").empty());
}

TEST_CASE("match-stats reports totals") {
    const fs::path gt = work_dir() / "match_gt.txt";
    REQUIRE(run("--seed 6 synth --faces 5 --min-scale 50 --name m.jpg --out-gt " + gt.string())
                .exit_code == 0);
    const RunResult r = run("match-stats --gt " + gt.string() + " --step 2");
    REQUIRE(r.exit_code == 0);
    CHECK(contains(r.out, "image\t"));
    CHECK(contains(r.out, "total"));
    const RunResult bad = run("match-stats --gt " + gt.string() + " --step 3");
    CHECK(bad.exit_code != 0);
}

TEST_CASE("nms subcommand filters a detection file") {
    const fs::path in_file = work_dir() / "nms_in.txt";
    {
        std::ofstream out(in_file);
        std::vector<srnkit::Detection> dets = {
            srnkit::Detection{srnkit::Box{0, 0, 10, 10}, 0.9},
            srnkit::Detection{srnkit::Box{1, 1, 11, 11}, 0.8},
            srnkit::Detection{srnkit::Box{40, 40, 50, 50}, 0.7},
        };
        srnkit::write_detections(out, "n.jpg", dets);
    }
    const RunResult r = run("nms --in " + in_file.string());
    REQUIRE(r.exit_code == 0);
    CHECK(contains(r.out, "n.jpg"));
    CHECK(contains(r.out, "2"));
    CHECK_FALSE(contains(r.out, "0.800000"));
}

TEST_CASE("augment subcommand produces a resized ppm and boxes") {
    const fs::path img_path = work_dir() / "in.ppm";
    {
        srnkit::ImageBuffer img(64, 48);
        for (std::size_t i = 0; i < img.data.size(); ++i)
            img.data[i] = static_cast<std::uint8_t>(i % 251);
        srnkit::write_ppm(img, img_path.string());
    }
    const fs::path gt = work_dir() / "aug_gt.txt";
    std::ofstream(gt) << "aug.jpg\n1\n10 10 20 25 0 0 0 0 0 0\n";
    const fs::path out_img = work_dir() / "out.ppm";
    const fs::path out_gt = work_dir() / "aug_out_gt.txt";
    const RunResult r = run("--seed 2 augment --image " + img_path.string() + " --gt " +
                            gt.string() + " --key aug.jpg --out " + out_img.string() +
                            " --out-gt " + out_gt.string() + " --out-size 96");
    REQUIRE(r.exit_code == 0);
    CHECK(contains(r.out, "boxes\t"));
    const srnkit::ImageBuffer out = srnkit::read_ppm(out_img.string());
    CHECK(out.width == 96);
    CHECK(out.height == 96);
    const auto entries = srnkit::parse_gt_file(out_gt);
    REQUIRE(entries.size() == 1);
}

TEST_CASE("score files feed simulate") {
    const fs::path gt = work_dir() / "scores_gt.txt";
    const fs::path scores_dir = work_dir() / "scores";
    const fs::path dets = work_dir() / "dets_from_scores";
    fs::create_directories(scores_dir);
    REQUIRE(run("--seed 8 synth --oracle --faces 3 --min-scale 80 --name sc.jpg --out-gt " +
                gt.string() + " --out-scores " + (scores_dir / "sc.score").string())
                .exit_code == 0);
    CHECK(fs::exists(scores_dir / "sc.score"));
    REQUIRE(run("simulate --gt " + gt.string() + " --scores-dir " + scores_dir.string() +
                " --out " + dets.string())
                .exit_code == 0);
    const RunResult eval = run("eval --gt " + gt.string() + " --dets " + dets.string());
    REQUIRE(eval.exit_code == 0);
    CHECK(contains(eval.out, "AP easy=1.0000"));
}
