// End-to-end checks of the installed CLI surface: exit codes, file outputs,
// determinism. The binary path comes from the build system.
#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <string>

#include "smallobj/coco.hpp"

#include "test_util.hpp"

using testutil::TempDir;

namespace {

struct RunResult {
    int exit_code;
    std::string output;  // stdout + stderr
};

RunResult run_cli(const std::string& args, const TempDir& tmp) {
    const auto log = tmp / ("cli_log_" + std::to_string(std::rand()) + ".txt");
    const std::string cmd =
        std::string(SMALLOBJ_CLI_PATH) + " " + args + " > " + log.string() + " 2>&1";
    const int status = std::system(cmd.c_str());
    RunResult r;
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.output = testutil::read_file(log);
    return r;
}

std::string corpus(const TempDir& tmp, const std::string& name) {
    const auto dir = tmp / name;
    const RunResult r = run_cli("--seed 9 --out " + dir.string() +
                                    " synth --images 6 --small 2 --large 1",
                                tmp);
    REQUIRE(r.exit_code == 0);
    return (dir / "annotations.json").string();
}

}  // namespace

TEST_CASE("synth then validate round-trips cleanly") {
    TempDir tmp;
    const std::string ann = corpus(tmp, "c1");
    const RunResult v = run_cli("validate " + ann + " --recompute-area", tmp);
    CHECK(v.exit_code == 0);
    CHECK(v.output.find("ok:") != std::string::npos);
}

TEST_CASE("analyze prints the statistics table and writes JSON") {
    TempDir tmp;
    const std::string ann = corpus(tmp, "c2");
    const auto report = tmp / "stats.json";
    const RunResult r =
        run_cli("--out " + report.string() + " analyze " + ann + " --size-basis mask",
                tmp);
    CHECK(r.exit_code == 0);
    CHECK(r.output.find("small") != std::string::npos);
    CHECK(r.output.find("Avg max IoU") != std::string::npos);
    const std::string json = testutil::read_file(report);
    CHECK(json.find("\"schema_version\"") != std::string::npos);

    const RunResult loose = run_cli("analyze " + ann + " --iou-threshold 0.5", tmp);
    CHECK(loose.exit_code == 0);
}

TEST_CASE("analyze on a missing file exits 1 and names the path") {
    TempDir tmp;
    const RunResult r = run_cli("analyze /no/such/file.json", tmp);
    CHECK(r.exit_code == 1);
    CHECK(r.output.find("/no/such/file.json") != std::string::npos);
}

TEST_CASE("validate lists dangling references and exits 1") {
    TempDir tmp;
    testutil::write_file(tmp / "bad.json", R"({
      "images": [{"id": 1, "width": 64, "height": 64, "file_name": "a.png"}],
      "annotations": [{"id": 17, "image_id": 9, "category_id": 1,
                       "bbox": [1, 1, 4, 4], "area": 16,
                       "segmentation": [[1,1,5,1,5,5,1,5]], "iscrowd": 0}],
      "categories": [{"id": 1, "name": "thing"}]
    })");
    const RunResult r = run_cli("validate " + (tmp / "bad.json").string(), tmp);
    CHECK(r.exit_code == 1);
    CHECK(r.output.find("17") != std::string::npos);
}

TEST_CASE("validate --recompute-area reports corrupted areas") {
    TempDir tmp;
    testutil::write_file(tmp / "area.json", R"({
      "images": [{"id": 1, "width": 64, "height": 64, "file_name": "a.png"}],
      "annotations": [{"id": 3, "image_id": 1, "category_id": 1,
                       "bbox": [0, 0, 8, 8], "area": 90,
                       "segmentation": [[0,0,8,0,8,8,0,8]], "iscrowd": 0}],
      "categories": [{"id": 1, "name": "thing"}]
    })");
    const RunResult r =
        run_cli("validate " + (tmp / "area.json").string() + " --recompute-area", tmp);
    CHECK(r.exit_code == 0);  // warnings only
    CHECK(r.output.find("warning") != std::string::npos);
    CHECK(r.output.find("area") != std::string::npos);
}

TEST_CASE("augment builds the output layout") {
    TempDir tmp;
    const std::string ann = corpus(tmp, "c3");
    const auto out = tmp / "aug_out";
    const RunResult r = run_cli("--seed 42 --out " + out.string() + " augment " + ann +
                                    " --mode original+aug --strategy all --copies 1",
                                tmp);
    REQUIRE(r.exit_code == 0);
    CHECK(std::filesystem::exists(out / "annotations.json"));
    CHECK(std::filesystem::exists(out / "provenance.json"));
    CHECK(std::filesystem::exists(out / "report.json"));
    CHECK(std::filesystem::exists(out / "idmap.json"));
    CHECK(std::filesystem::is_directory(out / "images"));
    // reloadable by the library itself
    const smallobj::Dataset d = smallobj::load_dataset(out / "annotations.json");
    CHECK(smallobj::validate_dataset(d).clean());
}

TEST_CASE("augment with a fixed seed is byte-identical across runs and jobs") {
    TempDir tmp;
    const std::string ann = corpus(tmp, "c4");
    auto run_once = [&](const std::string& name, int jobs) {
        const auto out = tmp / name;
        const RunResult r = run_cli("--seed 1234 --jobs " + std::to_string(jobs) +
                                        " --out " + out.string() + " augment " + ann +
                                        " --mode replace --strategy single --copies 3" +
                                        " --blend gaussian:5",
                                    tmp);
        REQUIRE(r.exit_code == 0);
        std::string blob = testutil::read_file(out / "annotations.json") + "|" +
                           testutil::read_file(out / "provenance.json");
        for (const auto& e :
             std::filesystem::recursive_directory_iterator(out / "images"))
            if (e.is_regular_file()) blob += testutil::read_file(e.path());
        return blob;
    };
    const std::string a = run_once("r1", 1);
    const std::string b = run_once("r2", 1);
    const std::string c = run_once("r3", 8);
    CHECK(a == b);
    CHECK(a == c);
}

TEST_CASE("oversample multiplies image counts") {
    TempDir tmp;
    const std::string ann = corpus(tmp, "c5");
    const auto out = tmp / "ov_out";
    const RunResult r = run_cli(
        "--seed 5 --out " + out.string() + " oversample " + ann + " --ratio 3", tmp);
    REQUIRE(r.exit_code == 0);
    const smallobj::Dataset d = smallobj::load_dataset(out / "annotations.json");
    CHECK(d.images.size() == 18);  // every synth image has small objects
}

TEST_CASE("usage errors exit 2") {
    TempDir tmp;
    const std::string ann = corpus(tmp, "c6");
    CHECK(run_cli("oversample " + ann + " --ratio 0 --out " + (tmp / "x").string(), tmp)
              .exit_code == 2);
    CHECK(run_cli("augment " + ann + " --copies 9 --out " + (tmp / "y").string(), tmp)
              .exit_code == 2);
    CHECK(run_cli("nosuchcommand", tmp).exit_code == 2);
    CHECK(run_cli("augment " + ann, tmp).exit_code == 2);  // --out missing
}

TEST_CASE("config files feed options and unknown keys are fatal") {
    TempDir tmp;
    const std::string ann = corpus(tmp, "c7");
    testutil::write_file(tmp / "good.ini", "seed=77\njobs=2\n");
    const auto out = tmp / "cfg_out";
    const RunResult ok = run_cli("--config " + (tmp / "good.ini").string() + " --out " +
                                     out.string() + " oversample " + ann + " --ratio 2",
                                 tmp);
    CHECK(ok.exit_code == 0);

    testutil::write_file(tmp / "bad.ini", "seed=77\nnot_a_real_option=1\n");
    const RunResult bad = run_cli("--config " + (tmp / "bad.ini").string() + " --out " +
                                      (tmp / "cfg2").string() + " oversample " + ann +
                                      " --ratio 2",
                                  tmp);
    CHECK(bad.exit_code == 2);
}

TEST_CASE("synth rejects infeasible specs with exit 1") {
    TempDir tmp;
    const RunResult r = run_cli(
        "--seed 1 --out " + (tmp / "bad").string() + " synth --width 100 --height 100",
        tmp);
    CHECK(r.exit_code == 1);
}
