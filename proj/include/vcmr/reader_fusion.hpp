#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "vcmr/run.hpp"
#include "vcmr/time_span.hpp"

namespace vcmr {

// Start/end logit arrays a span scorer produced for one (query, candidate
// clip) pair. Token index t covers the [t/n, (t+1)/n] slice of the clip.
struct ReaderOutput {
    std::string query_id;
    std::string video_id;
    TimeSpan span; // the candidate clip the logits describe
    std::vector<double> start_logits;
    std::vector<double> end_logits;

    // Throws unless both arrays share a positive length and all values are
    // finite.
    void validate() const;
};

// Score-normalization mode applied within one query's candidate list before
// weighting. Cosine scores live in [-1, 1] while logits are unbounded, so
// min-max rescaling is the default; a constant list maps to 0.5.
enum class Normalize { none, minmax_per_query };

struct FusionConfig {
    double retriever_weight = 0.5;
    double reader_weight = 0.5;
    // A selected logit must exceed its threshold for the reader span to be
    // trusted; otherwise the candidate keeps its segment boundaries.
    // +infinity forces the segment fallback unconditionally, which is the
    // right setting when a reader's output is too unstable to threshold.
    double start_threshold = 6.0;
    double end_threshold = 6.0;
    Normalize normalize = Normalize::minmax_per_query;

    void validate() const; // weights >= 0 with a positive sum
};

struct BestSpan {
    std::size_t start_index = 0;
    std::size_t end_index = 0;
    double score = 0.0; // start_logits[start_index] + end_logits[end_index]
};

// The (i, j) pair maximizing start_logits[i] + end_logits[j] subject to
// i < j (strict), ties broken by smallest i then smallest j. Runs in O(n)
// using a suffix argmax of the end logits. Throws when fewer than two
// tokens exist, since no strict pair is available.
BestSpan best_span(std::span<const double> start_logits,
                   std::span<const double> end_logits);

// Maps token indices back to seconds: token t occupies [t/n, (t+1)/n] of
// the clip, so the returned span covers tokens i..j inclusive and always
// satisfies clip.start <= start < end <= clip.end.
TimeSpan token_to_time(std::size_t i, std::size_t j, std::size_t n,
                       const TimeSpan& clip);

// Min-max rescales scores to [0, 1]; a constant list maps to all 0.5.
std::vector<double> minmax_normalize(std::vector<double> scores);

// retriever_weight * r + reader_weight * d. Normalization is a list-level
// concern handled by refine_run; pass already-normalized scores when using
// Normalize::minmax_per_query semantics.
double fuse_scores(double retriever_score, double reader_score,
                   const FusionConfig& cfg);

// Refines one candidate with its reader output: when both selected logits
// clear their thresholds the span is re-drawn from the logits (provenance
// reader), otherwise the segment span is kept (provenance retriever). The
// weighted score is attached either way, computed on the raw scores.
ScoredMoment predict_moment(const ScoredMoment& candidate,
                            const ReaderOutput& reader, const FusionConfig& cfg);

// Applies predict_moment across a whole run. Reader outputs are matched to
// candidates by exact (query_id, video_id, start, end); candidates without
// logits keep their span and contribute the list-minimum reader score (0
// under min-max). Each query's list is re-ranked by fused score, stably, so
// exact ties keep retriever order.
Run refine_run(const Run& run, const std::vector<ReaderOutput>& readers,
               const FusionConfig& cfg);

} // namespace vcmr
