#include "vcmr/time_span.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace vcmr {

void require_valid(const TimeSpan& span) {
    if (!(span.end > span.start)) {
        throw invalid_span_error("invalid span [" + std::to_string(span.start) +
                                 ", " + std::to_string(span.end) +
                                 "]: end must be greater than start");
    }
}

double tiou(const TimeSpan& a, const TimeSpan& b) {
    require_valid(a);
    require_valid(b);
    const double overlap =
        std::max(0.0, std::min(a.end, b.end) - std::max(a.start, b.start));
    const double covered = a.duration() + b.duration() - overlap;
    return overlap / covered;
}

bool vcmr_hit(const MomentPrediction& pred, const MomentPrediction& gt,
              double threshold) {
    if (!(threshold >= 0.0 && threshold <= 1.0)) {
        throw invalid_input_error("tIoU threshold must lie in [0, 1]");
    }
    if (pred.video_id != gt.video_id) {
        // Spans are still validated so malformed data cannot hide behind a
        // video-id mismatch.
        require_valid(pred.span);
        require_valid(gt.span);
        return false;
    }
    return tiou(pred.span, gt.span) > threshold;
}

} // namespace vcmr
