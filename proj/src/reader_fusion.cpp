#include "vcmr/reader_fusion.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <tuple>

namespace vcmr {

void ReaderOutput::validate() const {
    if (start_logits.empty() || start_logits.size() != end_logits.size()) {
        throw invalid_input_error("reader output for query '" + query_id +
                                  "' needs equal-length, nonempty logit arrays");
    }
    for (const auto* arr : {&start_logits, &end_logits}) {
        for (double v : *arr) {
            if (!std::isfinite(v)) {
                throw non_finite_error("reader output for query '" + query_id +
                                       "' contains a non-finite logit");
            }
        }
    }
    require_valid(span);
}

void FusionConfig::validate() const {
    if (!(retriever_weight >= 0.0) || !(reader_weight >= 0.0) ||
        !(retriever_weight + reader_weight > 0.0)) {
        throw invalid_input_error("fusion weights must be non-negative with a positive sum");
    }
}

BestSpan best_span(std::span<const double> start_logits,
                   std::span<const double> end_logits) {
    const std::size_t n = start_logits.size();
    if (n != end_logits.size()) {
        throw invalid_input_error("start and end logit arrays differ in length");
    }
    if (n < 2) {
        throw invalid_input_error("no valid span: need at least 2 tokens for a start < end pair");
    }

    // suffix_argmax[j] = smallest index k >= j maximizing end_logits[k].
    std::vector<std::size_t> suffix_argmax(n);
    suffix_argmax[n - 1] = n - 1;
    for (std::size_t j = n - 1; j-- > 0;) {
        suffix_argmax[j] =
            end_logits[j] >= end_logits[suffix_argmax[j + 1]] ? j : suffix_argmax[j + 1];
    }

    BestSpan best{0, suffix_argmax[1], start_logits[0] + end_logits[suffix_argmax[1]]};
    for (std::size_t i = 1; i + 1 < n; ++i) {
        const std::size_t j = suffix_argmax[i + 1];
        const double score = start_logits[i] + end_logits[j];
        if (score > best.score) best = {i, j, score};
    }
    return best;
}

TimeSpan token_to_time(std::size_t i, std::size_t j, std::size_t n,
                       const TimeSpan& clip) {
    require_valid(clip);
    if (n == 0 || j >= n || i >= j) {
        throw invalid_input_error("token indices (" + std::to_string(i) + ", " +
                                  std::to_string(j) + ") out of range for length " +
                                  std::to_string(n));
    }
    const double length = clip.duration();
    const double nd = static_cast<double>(n);
    double start = clip.start + (static_cast<double>(i) / nd) * length;
    double end = clip.start + (static_cast<double>(j + 1) / nd) * length;
    // Rounding may land a hair outside the clip; pin the result inside.
    start = std::max(start, clip.start);
    end = std::min(end, clip.end);
    return {start, end};
}

std::vector<double> minmax_normalize(std::vector<double> scores) {
    if (scores.empty()) return scores;
    const auto [lo_it, hi_it] = std::minmax_element(scores.begin(), scores.end());
    const double lo = *lo_it, hi = *hi_it;
    if (lo == hi) {
        std::fill(scores.begin(), scores.end(), 0.5);
        return scores;
    }
    for (double& s : scores) s = (s - lo) / (hi - lo);
    return scores;
}

double fuse_scores(double retriever_score, double reader_score,
                   const FusionConfig& cfg) {
    cfg.validate();
    return cfg.retriever_weight * retriever_score + cfg.reader_weight * reader_score;
}

namespace {

bool reader_trusted(const ReaderOutput& reader, const BestSpan& bs,
                    const FusionConfig& cfg) {
    return reader.start_logits[bs.start_index] > cfg.start_threshold &&
           reader.end_logits[bs.end_index] > cfg.end_threshold;
}

} // namespace

ScoredMoment predict_moment(const ScoredMoment& candidate,
                            const ReaderOutput& reader, const FusionConfig& cfg) {
    cfg.validate();
    reader.validate();
    const BestSpan bs = best_span(reader.start_logits, reader.end_logits);

    ScoredMoment out = candidate;
    if (reader_trusted(reader, bs, cfg)) {
        out.span = token_to_time(bs.start_index, bs.end_index,
                                 reader.start_logits.size(), candidate.span);
        out.provenance = Provenance::reader;
    } else {
        out.provenance = Provenance::retriever;
    }
    out.score = fuse_scores(candidate.score, bs.score, cfg);
    return out;
}

Run refine_run(const Run& run, const std::vector<ReaderOutput>& readers,
               const FusionConfig& cfg) {
    cfg.validate();

    using Key = std::tuple<std::string, std::string, double, double>;
    std::map<Key, const ReaderOutput*> by_candidate;
    for (const auto& r : readers) {
        r.validate();
        by_candidate[{r.query_id, r.video_id, r.span.start, r.span.end}] = &r;
    }

    Run refined;
    for (const auto& [query_id, candidates] : run) {
        const std::size_t m = candidates.size();
        std::vector<const ReaderOutput*> matched(m, nullptr);
        std::vector<BestSpan> spans(m);
        std::vector<double> retriever_scores(m);
        std::vector<double> reader_raw;

        for (std::size_t i = 0; i < m; ++i) {
            retriever_scores[i] = candidates[i].score;
            auto it = by_candidate.find({query_id, candidates[i].video_id,
                                         candidates[i].span.start,
                                         candidates[i].span.end});
            if (it != by_candidate.end()) {
                matched[i] = it->second;
                spans[i] = best_span(it->second->start_logits, it->second->end_logits);
                reader_raw.push_back(spans[i].score);
            }
        }

        // Normalize each model's scores within this query. A candidate the
        // reader never scored contributes the list minimum (0 under min-max).
        std::vector<double> reader_norm;
        double reader_missing = 0.0;
        if (cfg.normalize == Normalize::minmax_per_query) {
            retriever_scores = minmax_normalize(std::move(retriever_scores));
            reader_norm = minmax_normalize(reader_raw);
        } else {
            reader_norm = reader_raw;
            if (!reader_raw.empty()) {
                reader_missing = *std::min_element(reader_raw.begin(), reader_raw.end());
            }
        }

        std::vector<ScoredMoment> out(m);
        std::size_t next_matched = 0;
        for (std::size_t i = 0; i < m; ++i) {
            out[i] = candidates[i];
            double reader_score = reader_missing;
            if (matched[i]) {
                reader_score = reader_norm[next_matched++];
                if (reader_trusted(*matched[i], spans[i], cfg)) {
                    out[i].span = token_to_time(spans[i].start_index, spans[i].end_index,
                                                matched[i]->start_logits.size(),
                                                candidates[i].span);
                    out[i].provenance = Provenance::reader;
                } else {
                    out[i].provenance = Provenance::retriever;
                }
            } else {
                out[i].provenance = Provenance::retriever;
            }
            out[i].score = fuse_scores(retriever_scores[i], reader_score, cfg);
        }

        std::stable_sort(out.begin(), out.end(),
                         [](const ScoredMoment& a, const ScoredMoment& b) {
                             return a.score > b.score;
                         });
        refined[query_id] = std::move(out);
    }
    return refined;
}

} // namespace vcmr
