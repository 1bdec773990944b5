#pragma once

#include <map>
#include <string>
#include <vector>

#include "vcmr/time_span.hpp"

namespace vcmr {

// Which scorer produced (or last re-ranked) a prediction.
enum class Provenance { retriever, reader, ensemble };

// One ranked prediction: a video, the predicted moment within it, and the
// score that ranked it.
struct ScoredMoment {
    std::string video_id;
    TimeSpan span;
    double score = 0.0;
    Provenance provenance = Provenance::retriever;
};

// A run maps each query id to its ranked candidate list; a candidate's rank
// is its position + 1. Runs are the unit exchanged between search, fusion,
// ensembling, and evaluation.
using Run = std::map<std::string, std::vector<ScoredMoment>>;

// Deterministic total order used to break exact score ties everywhere a
// ranked list is produced: (video_id asc, start asc, end asc).
inline bool moment_key_less(const ScoredMoment& a, const ScoredMoment& b) {
    if (a.video_id != b.video_id) return a.video_id < b.video_id;
    if (a.span.start != b.span.start) return a.span.start < b.span.start;
    return a.span.end < b.span.end;
}

} // namespace vcmr
