#include <doctest.h>

#include <cstdlib>
#include <filesystem>

#include "statbench/usc_probe.hpp"
#include "test_helpers.hpp"

// End-to-end runs of the command-line binary with mock backends.

namespace {

namespace fs = std::filesystem;

struct Workspace {
    fs::path dir;
    Workspace() : dir(fs::temp_directory_path() / "statbench_cli_tests") {
        fs::remove_all(dir);
        fs::create_directories(dir);
    }
    ~Workspace() { fs::remove_all(dir); }
    std::string path(const std::string& name) const { return (dir / name).string(); }
};

int run_cli(const std::string& args) {
    const std::string command = std::string(STATBENCH_CLI_PATH) + " " + args + " > /dev/null 2>&1";
    const int status = std::system(command.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("gen then eval-synthetic with the oracle backend is perfect end to end") {
    Workspace ws;
    REQUIRE(run_cli("gen --width 2 --depth 2 --terms nonce --count 10 --seed 7 --out " +
                    ws.path("items.jsonl")) == 0);
    REQUIRE(run_cli("eval-synthetic --items " + ws.path("items.jsonl") +
                    " --backend oracle --out " + ws.path("ev")) == 0);
    const auto summary = statbench::read_text_file(ws.path("ev") + "/summary.csv");
    CHECK(summary.find("\"aggregate\",10,10,") != std::string::npos);
    CHECK(fs::exists(ws.path("ev") + "/records.jsonl"));
    CHECK(fs::exists(ws.path("ev") + "/manifest.json"));
}

TEST_CASE("two-shot evaluation is rejected for id-term items") {
    Workspace ws;
    REQUIRE(run_cli("gen --terms ids --count 4 --seed 1 --out " + ws.path("ids.jsonl")) == 0);
    CHECK(run_cli("eval-synthetic --items " + ws.path("ids.jsonl") + " --shots 2 --backend oracle "
                  "--out " + ws.path("ev")) == 2);
}

TEST_CASE("report output is byte-stable across reruns") {
    Workspace ws;
    REQUIRE(run_cli("gen --count 6 --seed 3 --out " + ws.path("items.jsonl")) == 0);
    REQUIRE(run_cli("eval-synthetic --items " + ws.path("items.jsonl") +
                    " --backend fixed:Yes --out " + ws.path("ev")) == 0);
    for (const std::string format : {"table", "csv", "json"}) {
        REQUIRE(run_cli("report --records " + ws.path("ev") + "/records.jsonl --format " + format +
                        " --out " + ws.path("r1." + format)) == 0);
        REQUIRE(run_cli("report --records " + ws.path("ev") + "/records.jsonl --format " + format +
                        " --out " + ws.path("r2." + format)) == 0);
        CHECK(statbench::read_text_file(ws.path("r1." + format)) ==
              statbench::read_text_file(ws.path("r2." + format)));
    }
}

TEST_CASE("eval-sara runs the fixture with a fixed backend") {
    Workspace ws;
    const std::string data = (test_helpers::fixture_dir() / "sara_v1_fixture").string();
    REQUIRE(run_cli("eval-sara --data " + data + " --mode zero --statute include "
                    "--backend fixed:Entailment --out " + ws.path("sara")) == 0);
    const auto csv = statbench::read_text_file(ws.path("sara") + "/summary.csv");
    CHECK(csv.find("\"aggregate\",2,4,") != std::string::npos);
    CHECK(csv.find("\"numbers\",") != std::string::npos);
    CHECK(csv.find("\"no numbers\",") != std::string::npos);
}

TEST_CASE("probe usc recite computes rank metrics over the corpus") {
    Workspace ws;
    statbench::write_usc_corpus(ws.path("corpus.jsonl"), test_helpers::fixture_corpus(5));
    REQUIRE(run_cli("probe usc recite --corpus " + ws.path("corpus.jsonl") +
                    " --per-title 2 --seed 9 --backend fixed:unrelated --out " + ws.path("probe")) ==
            0);
    const auto records = statbench::read_text_file(ws.path("probe") + "/records.jsonl");
    CHECK(std::count(records.begin(), records.end(), '\n') == 6);  // 3 titles x 2
    CHECK(records.find("\"normalized_rank\"") != std::string::npos);
    CHECK(fs::exists(ws.path("probe") + "/summary.txt"));
}

TEST_CASE("probe usc identify writes a class tally") {
    Workspace ws;
    statbench::write_usc_corpus(ws.path("corpus.jsonl"), test_helpers::fixture_corpus(6));
    // A fixed "Yes 5 101" response parses as Yes at stage 2, then 5, then 101;
    // only title-5 section 101 ends up fully correct.
    REQUIRE(run_cli("probe usc identify --corpus " + ws.path("corpus.jsonl") +
                    " --per-title 3 --seed 2 --backend \"fixed: Yes, 5 101\" --out " +
                    ws.path("probe")) == 0);
    const auto table = statbench::read_text_file(ws.path("probe") + "/summary.txt");
    CHECK(table.find("Not from U.S. Code") != std::string::npos);
    CHECK(table.find("Right title, wrong section") != std::string::npos);

    REQUIRE(run_cli("report --records " + ws.path("probe") + "/records.jsonl --format json --out " +
                    ws.path("tally.json")) == 0);
    const auto tally = statbench::read_text_file(ws.path("tally.json"));
    CHECK(tally.find("\"right_title_wrong_section\"") != std::string::npos);
}

TEST_CASE("missing inputs exit with the data error code") {
    Workspace ws;
    CHECK(run_cli("eval-synthetic --items " + ws.path("absent.jsonl") + " --backend oracle --out " +
                  ws.path("ev")) == 3);
    CHECK(run_cli("eval-sara --data " + ws.path("absent_dir") + " --backend oracle --out " +
                  ws.path("sara")) == 3);
    CHECK(run_cli("report --records " + ws.path("absent.jsonl")) == 3);
}

TEST_CASE("unknown flags and backends exit with the config error code") {
    Workspace ws;
    CHECK(run_cli("gen --bogus-flag 1") == 2);
    REQUIRE(run_cli("gen --count 2 --out " + ws.path("items.jsonl")) == 0);
    CHECK(run_cli("eval-synthetic --items " + ws.path("items.jsonl") +
                  " --backend martian --out " + ws.path("ev")) == 2);
}

TEST_CASE("a finished run replays through the scripted backend with identical results") {
    Workspace ws;
    REQUIRE(run_cli("gen --count 8 --seed 21 --out " + ws.path("items.jsonl")) == 0);
    REQUIRE(run_cli("eval-synthetic --items " + ws.path("items.jsonl") +
                    " --backend oracle --out " + ws.path("live")) == 0);
    REQUIRE(run_cli("eval-synthetic --items " + ws.path("items.jsonl") + " --backend scripted:" +
                    ws.path("live") + "/records.jsonl --out " + ws.path("replay")) == 0);
    CHECK(statbench::read_text_file(ws.path("live") + "/summary.csv") ==
          statbench::read_text_file(ws.path("replay") + "/summary.csv"));
}

TEST_CASE("the response cache makes the second run serve cached completions") {
    Workspace ws;
    REQUIRE(run_cli("gen --count 4 --seed 11 --out " + ws.path("items.jsonl")) == 0);
    const std::string eval_cmd = "eval-synthetic --items " + ws.path("items.jsonl") +
                                 " --backend oracle --cache " + ws.path("cache") + " --out ";
    REQUIRE(run_cli(eval_cmd + ws.path("ev1")) == 0);
    REQUIRE(run_cli(eval_cmd + ws.path("ev2")) == 0);
    const auto first = statbench::read_text_file(ws.path("ev1") + "/records.jsonl");
    const auto second = statbench::read_text_file(ws.path("ev2") + "/records.jsonl");
    CHECK(first.find("\"cached\":false") != std::string::npos);
    CHECK(second.find("\"cached\":true") != std::string::npos);
    CHECK(second.find("\"cached\":false") == std::string::npos);
}
