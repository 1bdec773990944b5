#include <cstdlib>
#include <string>
#include <vector>

#include <sys/wait.h>

#include "doctest.h"
#include "json.hpp"

#include "helpers.hpp"
#include "vcmr/io.hpp"

using testutil::TempDir;
using testutil::slurp;
using testutil::spit;

namespace {

struct CliResult {
    int exit_code = -1;
    std::string out;
    std::string err;
};

std::string quoted(const std::string& s) { return "'" + s + "'"; }

CliResult run_cli(const std::vector<std::string>& args) {
    TempDir capture;
    std::string cmd = quoted(VCMR_CLI_PATH);
    for (const auto& a : args) cmd += " " + quoted(a);
    cmd += " > " + quoted(capture.file("out").string());
    cmd += " 2> " + quoted(capture.file("err").string());

    const int status = std::system(cmd.c_str());
    CliResult result;
    if (status != -1 && WIFEXITED(status)) result.exit_code = WEXITSTATUS(status);
    result.out = slurp(capture.file("out"));
    result.err = slurp(capture.file("err"));
    return result;
}

// a corpus small enough that every CLI step is instant
void write_spec(const std::filesystem::path& path) {
    spit(path,
         "{\"n_videos\":15,\"duration_min\":30,\"duration_max\":30,"
         "\"annotations_per_video\":1,\"dim\":16,\"noise_sigma\":0,"
         "\"segments\":{\"lengths\":[5,10],\"strides\":[2,5]}}\n");
}

} // namespace

TEST_CASE("help text lists the pipeline subcommands") {
    const CliResult r = run_cli({"--help"});
    CHECK(r.exit_code == 0);
    for (const char* name : {"segment", "index", "search", "fuse", "ensemble",
                             "grid-search", "eval", "gen-synthetic", "coverage"})
        CHECK(r.out.find(name) != std::string::npos);
}

TEST_CASE("bad invocations fail with a nonzero exit") {
    SUBCASE("unknown subcommand") {
        CHECK(run_cli({"frobnicate"}).exit_code != 0);
    }
    SUBCASE("missing required options") {
        CHECK(run_cli({"segment"}).exit_code != 0);
    }
    SUBCASE("missing input file") {
        const CliResult r = run_cli({"eval", "--run", "/nonexistent/run.jsonl",
                                     "--annotations", "/nonexistent/ann.jsonl"});
        CHECK(r.exit_code == 1);
        CHECK(r.err.find("error:") != std::string::npos);
    }
    SUBCASE("index rejects both --segments and --videos") {
        const CliResult r =
            run_cli({"index", "--segments", "a", "--videos", "b", "--store", "c",
                     "--out", "d"});
        CHECK(r.exit_code != 0);
    }
    SUBCASE("index requires one of --segments and --videos") {
        TempDir dir;
        const auto store = dir.file("s.emb");
        vcmr::EmbeddingStore empty(4);
        vcmr::save_store(empty, store, vcmr::StoreFormat::binary);
        const CliResult r = run_cli({"index", "--store", store.string(), "--out",
                                     dir.file("i.idx").string()});
        CHECK(r.exit_code == 1);
        CHECK(r.err.find("error:") != std::string::npos);
    }
}

TEST_CASE("the whole pipeline runs end to end on a planted corpus") {
    TempDir dir;
    write_spec(dir.file("spec.json"));
    const std::string corpus = dir.file("corpus").string();

    REQUIRE(run_cli({"gen-synthetic", "--spec", dir.file("spec.json").string(),
                     "--seed", "7", "--out-dir", corpus})
                .exit_code == 0);
    for (const char* name : {"durations.jsonl", "segments.jsonl",
                             "annotations.jsonl", "segments.emb", "queries.emb",
                             "videos.emb"})
        CHECK(std::filesystem::exists(dir.file("corpus") / name));

    // segmenting the published durations reproduces the corpus manifest
    spit(dir.file("grid.json"), "{\"lengths\":[5,10],\"strides\":[2,5]}\n");
    REQUIRE(run_cli({"segment", "--durations", corpus + "/durations.jsonl",
                     "--config", dir.file("grid.json").string(), "--out",
                     dir.file("segments.jsonl").string()})
                .exit_code == 0);
    CHECK(slurp(dir.file("segments.jsonl")) ==
          slurp(dir.file("corpus") / "segments.jsonl"));

    // the planted annotations are perfectly coverable by construction
    const CliResult cover =
        run_cli({"coverage", "--segments", corpus + "/segments.jsonl",
                 "--annotations", corpus + "/annotations.jsonl"});
    CHECK(cover.exit_code == 0);
    CHECK(cover.out.substr(0, 1) == "1");

    REQUIRE(run_cli({"index", "--segments", corpus + "/segments.jsonl", "--store",
                     corpus + "/segments.emb", "--out",
                     dir.file("pool.idx").string()})
                .exit_code == 0);

    REQUIRE(run_cli({"search", "--queries", corpus + "/queries.emb", "--index",
                     dir.file("pool.idx").string(), "-k", "10", "--out",
                     dir.file("run.jsonl").string()})
                .exit_code == 0);

    // noiseless queries must put their planted segment at rank 1
    const CliResult ev =
        run_cli({"eval", "--run", dir.file("run.jsonl").string(), "--annotations",
                 corpus + "/annotations.jsonl", "--task", "vcmr"});
    REQUIRE(ev.exit_code == 0);
    const auto report = nlohmann::json::parse(ev.out);
    CHECK(report.at("average_recall").get<double>() == 1.0);
    CHECK(report.at("query_count").get<std::size_t>() == 15);
    CHECK(report.at("missing_queries").get<std::size_t>() == 0);
    CHECK(report.at("recalls").at("recall@1").get<double>() == 1.0);

    // custom cutoffs show up as keys
    const CliResult ev2 =
        run_cli({"eval", "--run", dir.file("run.jsonl").string(), "--annotations",
                 corpus + "/annotations.jsonl", "--ks", "1,3"});
    REQUIRE(ev2.exit_code == 0);
    const auto report2 = nlohmann::json::parse(ev2.out);
    CHECK(report2.at("recalls").contains("recall@3"));
    CHECK_FALSE(report2.at("recalls").contains("recall@5"));

    // whole-video route: index the per-video vectors and evaluate as VR
    REQUIRE(run_cli({"index", "--videos", corpus + "/durations.jsonl", "--store",
                     corpus + "/videos.emb", "--out",
                     dir.file("videos.idx").string()})
                .exit_code == 0);
    REQUIRE(run_cli({"search", "--queries", corpus + "/queries.emb", "--index",
                     dir.file("videos.idx").string(), "--out",
                     dir.file("vr.jsonl").string()})
                .exit_code == 0);
    const CliResult vr =
        run_cli({"eval", "--run", dir.file("vr.jsonl").string(), "--annotations",
                 corpus + "/annotations.jsonl", "--task", "vr"});
    REQUIRE(vr.exit_code == 0);
    CHECK(nlohmann::json::parse(vr.out).at("query_count").get<std::size_t>() == 15);
}

TEST_CASE("generation and search are reproducible byte for byte") {
    TempDir dir;
    write_spec(dir.file("spec.json"));
    for (const char* out : {"one", "two"})
        REQUIRE(run_cli({"gen-synthetic", "--spec", dir.file("spec.json").string(),
                         "--seed", "123", "--out-dir", dir.file(out).string()})
                    .exit_code == 0);
    for (const char* name : {"durations.jsonl", "segments.jsonl",
                             "annotations.jsonl", "segments.emb", "queries.emb",
                             "videos.emb"})
        CHECK(slurp(dir.file("one") / name) == slurp(dir.file("two") / name));

    REQUIRE(run_cli({"index", "--segments", dir.file("one").string() + "/segments.jsonl",
                     "--store", dir.file("one").string() + "/segments.emb", "--out",
                     dir.file("pool.idx").string()})
                .exit_code == 0);
    for (const char* out : {"run1.jsonl", "run2.jsonl"})
        REQUIRE(run_cli({"search", "--queries",
                         dir.file("one").string() + "/queries.emb", "--index",
                         dir.file("pool.idx").string(), "--out",
                         dir.file(out).string()})
                    .exit_code == 0);
    CHECK(slurp(dir.file("run1.jsonl")) == slurp(dir.file("run2.jsonl")));
}

TEST_CASE("fuse rewrites spans the reader is confident about") {
    TempDir dir;
    vcmr::Run run;
    run["q1"] = {{"vA", {0.0, 10.0}, 0.9, vcmr::Provenance::retriever},
                 {"vB", {10.0, 20.0}, 0.8, vcmr::Provenance::retriever}};
    vcmr::io::write_run(dir.file("run.jsonl"), run);

    std::vector<vcmr::ReaderOutput> logits(1);
    logits[0].query_id = "q1";
    logits[0].video_id = "vA";
    logits[0].span = {0.0, 10.0};
    logits[0].start_logits = {0.0, 10.0, 0.0, 0.0}; // best start: token 1
    logits[0].end_logits = {0.0, 0.0, 0.0, 10.0};   // best end: token 3
    vcmr::io::write_reader_outputs(dir.file("logits.jsonl"), logits);

    SUBCASE("default thresholds accept the span") {
        REQUIRE(run_cli({"fuse", "--run", dir.file("run.jsonl").string(),
                         "--logits", dir.file("logits.jsonl").string(), "--out",
                         dir.file("fused.jsonl").string()})
                    .exit_code == 0);
        const vcmr::Run fused = vcmr::io::read_run(dir.file("fused.jsonl"));
        REQUIRE(fused.at("q1").size() == 2);
        // tokens 1..3 of four over [0, 10] -> [2.5, 10]
        CHECK(fused.at("q1")[0].video_id == "vA");
        CHECK(fused.at("q1")[0].span == vcmr::TimeSpan{2.5, 10.0});
        CHECK(fused.at("q1")[1].video_id == "vB");
        CHECK(fused.at("q1")[1].span == vcmr::TimeSpan{10.0, 20.0});
    }
    SUBCASE("an infinite threshold keeps every segment boundary") {
        spit(dir.file("fusion.json"), "{\"start_threshold\":\"inf\"}\n");
        REQUIRE(run_cli({"fuse", "--run", dir.file("run.jsonl").string(),
                         "--logits", dir.file("logits.jsonl").string(), "--config",
                         dir.file("fusion.json").string(), "--out",
                         dir.file("fused.jsonl").string()})
                    .exit_code == 0);
        const vcmr::Run fused = vcmr::io::read_run(dir.file("fused.jsonl"));
        CHECK(fused.at("q1")[0].span == vcmr::TimeSpan{0.0, 10.0});
    }
}

TEST_CASE("ensemble and grid-search mix two runs from the command line") {
    TempDir dir;
    vcmr::Run a, b;
    a["q"] = {{"x", {0.0, 5.0}, 0.9, vcmr::Provenance::retriever},
              {"y", {10.0, 15.0}, 0.1, vcmr::Provenance::retriever}};
    b["q"] = {{"y", {10.0, 15.0}, 0.9, vcmr::Provenance::retriever},
              {"x", {0.0, 5.0}, 0.1, vcmr::Provenance::retriever}};
    vcmr::io::write_run(dir.file("a.jsonl"), a);
    vcmr::io::write_run(dir.file("b.jsonl"), b);

    REQUIRE(run_cli({"ensemble", "--run-a", dir.file("a.jsonl").string(),
                     "--run-b", dir.file("b.jsonl").string(), "--alpha", "0.25",
                     "--beta", "0.75", "--normalize", "none", "--out",
                     dir.file("merged.jsonl").string()})
                .exit_code == 0);
    const vcmr::Run merged = vcmr::io::read_run(dir.file("merged.jsonl"));
    REQUIRE(merged.at("q").size() == 2);
    CHECK(merged.at("q")[0].video_id == "y");
    CHECK(merged.at("q")[0].score == doctest::Approx(0.7));

    std::vector<vcmr::Annotation> anns = {{"q", "y", vcmr::TimeSpan{10.0, 15.0}}};
    vcmr::io::write_annotations(dir.file("val.jsonl"), anns);
    const CliResult gs =
        run_cli({"grid-search", "--run-a", dir.file("a.jsonl").string(), "--run-b",
                 dir.file("b.jsonl").string(), "--annotations",
                 dir.file("val.jsonl").string(), "--ks", "1"});
    REQUIRE(gs.exit_code == 0);
    const auto report = nlohmann::json::parse(gs.out);
    // run B alone already ranks the truth first; the tie resolves to alpha 0
    CHECK(report.at("alpha").get<double>() == 0.0);
    CHECK(report.at("average_recall").get<double>() == 1.0);

    // an explicit grid file narrows the candidates
    spit(dir.file("weights.json"), "[[0.6,0.4],[0.4,0.6]]\n");
    const CliResult gs2 =
        run_cli({"grid-search", "--run-a", dir.file("a.jsonl").string(), "--run-b",
                 dir.file("b.jsonl").string(), "--annotations",
                 dir.file("val.jsonl").string(), "--ks", "1", "--grid",
                 dir.file("weights.json").string(), "--out",
                 dir.file("gs.json").string()});
    REQUIRE(gs2.exit_code == 0);
    const auto report2 = nlohmann::json::parse(slurp(dir.file("gs.json")));
    CHECK(report2.at("alpha").get<double>() == 0.4);
    CHECK(report2.at("beta").get<double>() == 0.6);
}
