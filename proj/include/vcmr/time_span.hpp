#pragma once

#include <string>

#include "vcmr/errors.hpp"

namespace vcmr {

// Closed real interval [start, end] in seconds within one video.
// All public operations require end > start.
struct TimeSpan {
    double start = 0.0;
    double end = 0.0;

    double duration() const { return end - start; }

    friend bool operator==(const TimeSpan&, const TimeSpan&) = default;
};

// A (video, span) pair; used for ground-truth moments and predictions alike.
struct MomentPrediction {
    std::string video_id;
    TimeSpan span;
};

// Throws invalid_span_error unless span.end > span.start.
void require_valid(const TimeSpan& span);

// Temporal intersection-over-union of two spans.
//
// Returns |a n b| / |a u b| in [0, 1], where the union length is
// duration(a) + duration(b) - overlap. Disjoint spans score 0, identical
// spans score exactly 1.0. Symmetric in its arguments.
double tiou(const TimeSpan& a, const TimeSpan& b);

// True iff pred names the same video as gt and tiou(pred, gt) exceeds
// `threshold` strictly. Equality at the threshold is a miss.
bool vcmr_hit(const MomentPrediction& pred, const MomentPrediction& gt,
              double threshold);

} // namespace vcmr
