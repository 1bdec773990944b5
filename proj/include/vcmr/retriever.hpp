#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "vcmr/embedding_store.hpp"
#include "vcmr/run.hpp"
#include "vcmr/segmenter.hpp"

namespace vcmr {

// One searchable entry: a segment (or whole video) with its vector and the
// vector's cached L2 norm.
struct IndexEntry {
    std::string video_id;
    TimeSpan span;
    std::vector<float> vector;
    double norm = 0.0;
};

// A flat exact-search index. The pools here stay small enough (hundreds of
// thousands of entries) that an exhaustive scan beats the bookkeeping of an
// approximate structure and keeps ranking reproducible.
class SegmentIndex {
public:
    SegmentIndex() = default;
    explicit SegmentIndex(std::size_t dimension);

    std::size_t dimension() const { return dimension_; }
    std::size_t size() const { return entries_.size(); }
    const std::vector<IndexEntry>& entries() const { return entries_; }

    // Computes and caches the vector's norm. Validates dimension and
    // finiteness; the span must be valid.
    void add(std::string video_id, TimeSpan span, std::vector<float> vector);

private:
    std::size_t dimension_ = 0;
    std::vector<IndexEntry> entries_;
};

// dot(a, b) / (|a| * |b|), accumulated in double. A zero-norm side scores 0
// so degenerate vectors rank last instead of poisoning the sort with NaNs.
double cosine_similarity(std::span<const float> a, std::span<const float> b);

// The k highest-cosine entries in descending score order. Exact ties fall
// back to moment_key_less, making the output a prefix of one total order of
// the whole index. An empty index yields an empty result.
std::vector<ScoredMoment> search_topk(std::span<const float> query,
                                      const SegmentIndex& index, std::size_t k);

// Whole-video retrieval: rank videos for a query. Entries carry [0, duration]
// spans so the result shape matches moment retrieval.
inline std::vector<ScoredMoment> retrieve_vr(std::span<const float> query,
                                             const SegmentIndex& video_index,
                                             std::size_t k) {
    return search_topk(query, video_index, k);
}

// Moment retrieval over the segment pool: each hit carries its segment's
// span as the predicted moment.
inline std::vector<ScoredMoment> retrieve_vcmr(std::span<const float> query,
                                               const SegmentIndex& segment_index,
                                               std::size_t k) {
    return search_topk(query, segment_index, k);
}

// Id under which a segment's embedding is stored: "<video_id>#<start>-<end>"
// with shortest round-trip number formatting.
std::string segment_embedding_id(const std::string& video_id, const TimeSpan& span);

// Builds an index over a segment pool, looking each segment's vector up by
// its segment_embedding_id. Missing vectors are an error naming the id.
SegmentIndex build_segment_index(const std::vector<VideoSegment>& segments,
                                 const EmbeddingStore& store);

// Builds a whole-video index with spans [0, duration]; vectors are keyed by
// video id.
SegmentIndex build_video_index(const std::vector<VideoInfo>& videos,
                               const EmbeddingStore& store);

// IDX1 binary index file: magic "IDX1"; u32 LE dimension; u64 LE entry
// count; per entry u16 LE id length, video id bytes, f64 LE start, f64 LE
// end, dimension consecutive f32 LE components.
void save_index(const SegmentIndex& index, const std::filesystem::path& path);
SegmentIndex load_index(const std::filesystem::path& path);

// Searches every query in the store and assembles a run. Queries are
// independent, so they may be scanned on several threads; results are
// identical for any thread count. threads == 0 picks the hardware count.
Run batch_search(const EmbeddingStore& queries, const SegmentIndex& index,
                 std::size_t k, unsigned threads = 0);

} // namespace vcmr
