#include "vcmr/synthetic.hpp"

#include <cmath>
#include <cstdio>
#include <map>
#include <random>

#include "vcmr/errors.hpp"
#include "vcmr/io.hpp"
#include "vcmr/retriever.hpp"

namespace vcmr {

void SyntheticSpec::validate() const {
    if (n_videos == 0)
        throw invalid_input_error("synthetic corpus needs at least one video");
    if (!(duration_min > 0.0) || !std::isfinite(duration_min) ||
        !std::isfinite(duration_max))
        throw invalid_input_error("synthetic durations must be positive and finite");
    if (duration_max < duration_min)
        throw invalid_input_error("duration_max must be >= duration_min");
    if (annotations_per_video == 0)
        throw invalid_input_error("need at least one annotation per video");
    if (dim == 0)
        throw invalid_input_error("embedding dimension must be positive");
    if (!(noise_sigma >= 0.0) || !std::isfinite(noise_sigma))
        throw invalid_input_error("noise sigma must be finite and >= 0");
    segments.validate();
}

namespace {

std::string padded_id(const char* prefix, std::size_t n) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%s%06zu", prefix, n);
    return buf;
}

std::vector<float> draw_vector(std::mt19937_64& rng, std::size_t dim,
                               std::normal_distribution<double>& unit) {
    std::vector<float> v(dim);
    for (std::size_t d = 0; d < dim; ++d)
        v[d] = static_cast<float>(unit(rng));
    return v;
}

} // namespace

SyntheticCorpus generate_synthetic(const SyntheticSpec& spec,
                                   std::uint64_t seed) {
    spec.validate();
    std::mt19937_64 rng(seed);
    // One distribution object reused throughout so the draw sequence is a
    // pure function of the seed (normal_distribution carries cached state).
    std::normal_distribution<double> unit(0.0, 1.0);

    SyntheticCorpus corpus;
    corpus.segment_store = EmbeddingStore(spec.dim, StoreKind::fused);
    corpus.query_store = EmbeddingStore(spec.dim, StoreKind::query);
    corpus.video_store = EmbeddingStore(spec.dim, StoreKind::fused);

    corpus.videos.reserve(spec.n_videos);
    for (std::size_t i = 0; i < spec.n_videos; ++i) {
        double duration = spec.duration_min;
        if (spec.duration_max > spec.duration_min) {
            std::uniform_real_distribution<double> dur(spec.duration_min,
                                                       spec.duration_max);
            duration = dur(rng);
        }
        corpus.videos.push_back({padded_id("video_", i), duration});
    }

    corpus.pool = segment_videos(corpus.videos, spec.segments);

    // Per-video bookkeeping for ground-truth sampling and the whole-video
    // (mean) vectors.
    std::map<std::string, std::vector<std::size_t>> pool_by_video;
    for (std::size_t i = 0; i < corpus.pool.size(); ++i)
        pool_by_video[corpus.pool[i].video_id].push_back(i);

    std::vector<std::vector<float>> segment_vectors;
    segment_vectors.reserve(corpus.pool.size());
    for (const VideoSegment& seg : corpus.pool) {
        std::vector<float> v = draw_vector(rng, spec.dim, unit);
        corpus.segment_store.add({segment_embedding_id(seg.video_id, seg.span), v});
        segment_vectors.push_back(std::move(v));
    }

    std::size_t query_counter = 0;
    for (const VideoInfo& video : corpus.videos) {
        const std::vector<std::size_t>& candidates = pool_by_video.at(video.video_id);
        for (std::size_t a = 0; a < spec.annotations_per_video; ++a) {
            std::uniform_int_distribution<std::size_t> pick(0, candidates.size() - 1);
            const VideoSegment& gt = corpus.pool[candidates[pick(rng)]];
            const std::vector<float>& base =
                corpus.segment_store.at(segment_embedding_id(gt.video_id, gt.span));

            std::vector<float> q(spec.dim);
            for (std::size_t d = 0; d < spec.dim; ++d) {
                double value = static_cast<double>(base[d]);
                if (spec.noise_sigma > 0.0)
                    value += spec.noise_sigma * unit(rng);
                q[d] = static_cast<float>(value);
            }

            const std::string query_id = padded_id("query_", query_counter++);
            corpus.query_store.add({query_id, std::move(q)});
            corpus.annotations.push_back({query_id, gt.video_id, gt.span});
        }
    }

    // Whole-video vectors: normalized mean of the video's segment vectors.
    // Accumulated in double; an all-zero mean is stored as-is.
    for (const VideoInfo& video : corpus.videos) {
        const std::vector<std::size_t>& members = pool_by_video.at(video.video_id);
        std::vector<double> mean(spec.dim, 0.0);
        for (std::size_t idx : members)
            for (std::size_t d = 0; d < spec.dim; ++d)
                mean[d] += static_cast<double>(segment_vectors[idx][d]);
        double norm_sq = 0.0;
        for (std::size_t d = 0; d < spec.dim; ++d) {
            mean[d] /= static_cast<double>(members.size());
            norm_sq += mean[d] * mean[d];
        }
        const double norm = std::sqrt(norm_sq);
        std::vector<float> v(spec.dim);
        for (std::size_t d = 0; d < spec.dim; ++d)
            v[d] = static_cast<float>(norm > 0.0 ? mean[d] / norm : mean[d]);
        corpus.video_store.add({video.video_id, std::move(v)});
    }

    return corpus;
}

void write_corpus(const SyntheticCorpus& corpus,
                  const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    io::write_durations(dir / "durations.jsonl", corpus.videos);
    io::write_segments(dir / "segments.jsonl", corpus.pool);
    io::write_annotations(dir / "annotations.jsonl", corpus.annotations);
    save_store(corpus.segment_store, dir / "segments.emb", StoreFormat::binary);
    save_store(corpus.query_store, dir / "queries.emb", StoreFormat::binary);
    save_store(corpus.video_store, dir / "videos.emb", StoreFormat::binary);
}

} // namespace vcmr
