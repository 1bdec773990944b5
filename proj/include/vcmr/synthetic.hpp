#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "vcmr/embedding_store.hpp"
#include "vcmr/eval.hpp"
#include "vcmr/segmenter.hpp"

namespace vcmr {

// Recipe for a pseudo-random corpus with planted ground truth: every query
// embedding is its ground-truth segment's embedding plus Gaussian noise of
// scale noise_sigma, so at sigma 0 an exact cosine search must put the
// planted segment at rank 1.
struct SyntheticSpec {
    std::size_t n_videos = 100;
    double duration_min = 60.0;
    double duration_max = 60.0;
    std::size_t annotations_per_video = 1;
    std::size_t dim = 64;
    double noise_sigma = 0.0;
    SegmentConfig segments;

    void validate() const;
};

struct SyntheticCorpus {
    std::vector<VideoInfo> videos;
    std::vector<VideoSegment> pool;      // segment manifest for the corpus
    std::vector<Annotation> annotations; // one ground truth per query
    // Stores are re-dimensioned by generate_synthetic; the {1} is only there
    // because a store always has a fixed positive dimension.
    EmbeddingStore segment_store{1};     // ids follow segment_embedding_id
    EmbeddingStore query_store{1, StoreKind::query}; // ids = annotation query_ids
    EmbeddingStore video_store{1};       // one whole-video vector per video
};

// Deterministic: all randomness flows from the single 64-bit seed, so the
// same (spec, seed) pair always produces an identical corpus. Draw order is
// fixed (durations, then segment vectors, then annotations with their query
// noise); the whole-video vectors are derived, not drawn — each is the
// L2-normalized mean of its video's segment vectors.
SyntheticCorpus generate_synthetic(const SyntheticSpec& spec, std::uint64_t seed);

// Writes durations.jsonl, segments.jsonl, annotations.jsonl, segments.emb,
// queries.emb, videos.emb into dir (created if absent).
void write_corpus(const SyntheticCorpus& corpus,
                  const std::filesystem::path& dir);

} // namespace vcmr
