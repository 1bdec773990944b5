#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "doctest.h"

#include "helpers.hpp"
#include "vcmr/retriever.hpp"

using testutil::TempDir;
using vcmr::EmbeddingStore;
using vcmr::ScoredMoment;
using vcmr::SegmentIndex;
using vcmr::TimeSpan;

namespace {

std::vector<float> random_vector(std::mt19937_64& rng, std::size_t dim) {
    std::normal_distribution<float> unit(0.0f, 1.0f);
    std::vector<float> v(dim);
    for (auto& x : v) x = unit(rng);
    return v;
}

SegmentIndex random_index(std::mt19937_64& rng, std::size_t n, std::size_t dim,
                          bool with_duplicates = false) {
    SegmentIndex index(dim);
    std::uniform_int_distribution<int> start(0, 50);
    std::vector<float> dup = random_vector(rng, dim);
    for (std::size_t i = 0; i < n; ++i) {
        const double s = start(rng);
        // Bitwise-duplicated vectors force exact score ties.
        std::vector<float> v = (with_duplicates && i % 3 == 0)
                                   ? dup
                                   : random_vector(rng, dim);
        index.add("v" + std::to_string(i % 23), {s, s + 5.0}, std::move(v));
    }
    return index;
}

// Independent oracle: score everything, full stable sort under the same
// deterministic order, then truncate.
std::vector<ScoredMoment> naive_topk(std::span<const float> query,
                                     const SegmentIndex& index, std::size_t k) {
    struct Row {
        double score;
        const vcmr::IndexEntry* e;
    };
    std::vector<Row> rows;
    for (const auto& e : index.entries())
        rows.push_back({vcmr::cosine_similarity(query, e.vector), &e});
    std::stable_sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
        if (a.score != b.score) return a.score > b.score;
        if (a.e->video_id != b.e->video_id) return a.e->video_id < b.e->video_id;
        if (a.e->span.start != b.e->span.start)
            return a.e->span.start < b.e->span.start;
        return a.e->span.end < b.e->span.end;
    });
    std::vector<ScoredMoment> out;
    for (std::size_t i = 0; i < std::min(k, rows.size()); ++i)
        out.push_back({rows[i].e->video_id, rows[i].e->span, rows[i].score,
                       vcmr::Provenance::retriever});
    return out;
}

bool same_results(const std::vector<ScoredMoment>& a,
                  const std::vector<ScoredMoment>& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i].video_id != b[i].video_id || a[i].span != b[i].span ||
            a[i].score != b[i].score)
            return false;
    }
    return true;
}

} // namespace

TEST_CASE("cosine similarity basics") {
    CHECK(vcmr::cosine_similarity(std::vector<float>{1, 0},
                                  std::vector<float>{0, 1}) == 0.0);
    CHECK(vcmr::cosine_similarity(std::vector<float>{1, 2},
                                  std::vector<float>{2, 4}) ==
          doctest::Approx(1.0));
    CHECK(vcmr::cosine_similarity(std::vector<float>{1, 1},
                                  std::vector<float>{-1, -1}) ==
          doctest::Approx(-1.0));
    // zero vectors score zero instead of dividing by zero
    CHECK(vcmr::cosine_similarity(std::vector<float>{0, 0},
                                  std::vector<float>{3, 4}) == 0.0);
    CHECK_THROWS_AS(vcmr::cosine_similarity(std::vector<float>{1},
                                            std::vector<float>{1, 2}),
                    vcmr::dimension_error);
}

TEST_CASE("index entries are validated as they are added") {
    SegmentIndex index(2);
    CHECK_THROWS_AS(SegmentIndex(0), vcmr::invalid_input_error);
    CHECK_THROWS_AS(index.add("v", {5.0, 2.0}, {1.0f, 2.0f}),
                    vcmr::invalid_span_error);
    CHECK_THROWS_AS(index.add("v", {0.0, 2.0}, {1.0f}), vcmr::dimension_error);
    CHECK_THROWS_AS(
        index.add("v", {0.0, 2.0}, {1.0f, std::numeric_limits<float>::infinity()}),
        vcmr::non_finite_error);
    index.add("v", {0.0, 2.0}, {3.0f, 4.0f});
    CHECK(index.entries()[0].norm == doctest::Approx(5.0));
}

TEST_CASE("top-k search equals the naive full-sort oracle, ties included") {
    std::mt19937_64 rng(2024);
    std::uniform_int_distribution<std::size_t> n_dist(1, 200);
    std::uniform_int_distribution<std::size_t> dim_dist(1, 32);
    std::uniform_int_distribution<std::size_t> k_dist(1, 50);
    for (int it = 0; it < 60; ++it) {
        const std::size_t dim = dim_dist(rng);
        const SegmentIndex index = random_index(rng, n_dist(rng), dim, it % 2 == 0);
        const std::vector<float> query = random_vector(rng, dim);
        const std::size_t k = k_dist(rng);
        CHECK(same_results(vcmr::search_topk(query, index, k),
                           naive_topk(query, index, k)));
    }
}

TEST_CASE("exact ties are broken by video id, then start, then end") {
    SegmentIndex index(2);
    const std::vector<float> v{1.0f, 1.0f};
    index.add("b", {0.0, 5.0}, v);
    index.add("a", {3.0, 8.0}, v);
    index.add("a", {0.0, 7.0}, v);
    index.add("a", {0.0, 5.0}, v);
    const auto got = vcmr::search_topk(std::vector<float>{2.0f, 2.0f}, index, 4);
    REQUIRE(got.size() == 4);
    CHECK(got[0].video_id == "a");
    CHECK(got[0].span == TimeSpan{0.0, 5.0});
    CHECK(got[1].span == TimeSpan{0.0, 7.0});
    CHECK(got[2].span == TimeSpan{3.0, 8.0});
    CHECK(got[3].video_id == "b");
}

TEST_CASE("positively scaling the query never changes the ranking") {
    std::mt19937_64 rng(77);
    for (int it = 0; it < 20; ++it) {
        const SegmentIndex index = random_index(rng, 100, 16, true);
        std::vector<float> query = random_vector(rng, 16);
        const auto base = vcmr::search_topk(query, index, 20);
        for (const float scale : {0.25f, 4.0f, 1024.0f}) {
            std::vector<float> scaled = query;
            for (auto& x : scaled) x *= scale; // power of two: ties survive
            const auto got = vcmr::search_topk(scaled, index, 20);
            REQUIRE(got.size() == base.size());
            for (std::size_t i = 0; i < got.size(); ++i) {
                CHECK(got[i].video_id == base[i].video_id);
                CHECK(got[i].span == base[i].span);
            }
        }
    }
}

TEST_CASE("k clamps to the index size and zero k is rejected") {
    std::mt19937_64 rng(5);
    const SegmentIndex index = random_index(rng, 7, 4);
    const auto query = random_vector(rng, 4);
    CHECK(vcmr::search_topk(query, index, 100).size() == 7);
    CHECK_THROWS_AS(vcmr::search_topk(query, index, 0), vcmr::invalid_input_error);
    const SegmentIndex empty(4);
    CHECK(vcmr::search_topk(query, empty, 10).empty());
}

TEST_CASE("query dimension must match the index") {
    std::mt19937_64 rng(6);
    const SegmentIndex index = random_index(rng, 3, 4);
    CHECK_THROWS_AS(vcmr::search_topk(std::vector<float>{1.0f}, index, 2),
                    vcmr::dimension_error);
}

TEST_CASE("segment embedding ids are compact and exact") {
    CHECK(vcmr::segment_embedding_id("v", {0.0, 5.0}) == "v#0-5");
    CHECK(vcmr::segment_embedding_id("v", {2.5, 7.5}) == "v#2.5-7.5");
    CHECK(vcmr::segment_embedding_id("clip_01", {55.0, 60.0}) == "clip_01#55-60");
    // distinct doubles always map to distinct ids
    CHECK(vcmr::segment_embedding_id("v", {0.1, 5.0}) !=
          vcmr::segment_embedding_id("v", {0.1000000001, 5.0}));
}

TEST_CASE("building an index from a pool pulls vectors by convention id") {
    EmbeddingStore store(2);
    store.add({"v#0-5", {1.0f, 0.0f}});
    store.add({"v#2-7", {0.0f, 1.0f}});
    const std::vector<vcmr::VideoSegment> pool = {{"v", {0.0, 5.0}, 5.0},
                                                  {"v", {2.0, 7.0}, 5.0}};
    const SegmentIndex index = vcmr::build_segment_index(pool, store);
    REQUIRE(index.size() == 2);
    const auto got = vcmr::retrieve_vcmr(std::vector<float>{1.0f, 0.1f}, index, 1);
    REQUIRE(got.size() == 1);
    CHECK(got[0].span == TimeSpan{0.0, 5.0});

    const std::vector<vcmr::VideoSegment> missing = {{"v", {4.0, 9.0}, 5.0}};
    CHECK_THROWS_WITH_AS(vcmr::build_segment_index(missing, store),
                         doctest::Contains("v#4-9"), vcmr::invalid_input_error);
}

TEST_CASE("whole-video indexes span the full duration") {
    EmbeddingStore store(2);
    store.add({"a", {1.0f, 0.0f}});
    store.add({"b", {0.0f, 1.0f}});
    const std::vector<vcmr::VideoInfo> videos = {{"a", 12.0}, {"b", 30.0}};
    const SegmentIndex index = vcmr::build_video_index(videos, store);
    REQUIRE(index.size() == 2);
    CHECK(index.entries()[0].span == TimeSpan{0.0, 12.0});
    CHECK(index.entries()[1].span == TimeSpan{0.0, 30.0});
    const auto got = vcmr::retrieve_vr(std::vector<float>{0.2f, 0.9f}, index, 2);
    CHECK(got[0].video_id == "b");

    CHECK_THROWS_AS(vcmr::build_video_index({{"c", 10.0}}, store),
                    vcmr::invalid_input_error);
    CHECK_THROWS_AS(vcmr::build_video_index({{"a", 0.0}}, store),
                    vcmr::invalid_input_error);
}

TEST_CASE("index files round-trip exactly") {
    TempDir tmp;
    std::mt19937_64 rng(11);
    const SegmentIndex index = random_index(rng, 40, 8);
    const auto first = tmp.file("pool.idx");
    vcmr::save_index(index, first);
    const SegmentIndex loaded = vcmr::load_index(first);
    REQUIRE(loaded.size() == index.size());
    CHECK(loaded.dimension() == index.dimension());
    for (std::size_t i = 0; i < index.size(); ++i) {
        CHECK(loaded.entries()[i].video_id == index.entries()[i].video_id);
        CHECK(loaded.entries()[i].span == index.entries()[i].span);
        CHECK(loaded.entries()[i].vector == index.entries()[i].vector);
        CHECK(loaded.entries()[i].norm == index.entries()[i].norm);
    }
    const auto second = tmp.file("pool2.idx");
    vcmr::save_index(loaded, second);
    CHECK(testutil::slurp(first) == testutil::slurp(second));

    const auto mangled = tmp.file("bad.idx");
    std::string bytes = testutil::slurp(first);
    bytes[1] = 'Z';
    testutil::spit(mangled, bytes);
    CHECK_THROWS_AS(vcmr::load_index(mangled), vcmr::format_error);
    const auto truncated = tmp.file("cut.idx");
    testutil::spit(truncated, testutil::slurp(first).substr(0, 20));
    CHECK_THROWS_AS(vcmr::load_index(truncated), vcmr::format_error);
}

TEST_CASE("batch search matches per-query search for any thread count") {
    std::mt19937_64 rng(13);
    const SegmentIndex index = random_index(rng, 300, 12, true);
    EmbeddingStore queries(12);
    for (int i = 0; i < 25; ++i)
        queries.add({"q" + std::to_string(i), random_vector(rng, 12)});

    const vcmr::Run solo = vcmr::batch_search(queries, index, 7, 1);
    REQUIRE(solo.size() == queries.size());
    for (const auto& rec : queries.records()) {
        CHECK(same_results(solo.at(rec.id),
                           vcmr::search_topk(rec.vector, index, 7)));
    }
    for (unsigned threads : {2u, 3u, 8u}) {
        const vcmr::Run multi = vcmr::batch_search(queries, index, 7, threads);
        REQUIRE(multi.size() == solo.size());
        for (const auto& [qid, moments] : solo)
            CHECK(same_results(multi.at(qid), moments));
    }
}
