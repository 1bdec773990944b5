#pragma once

#include <string>
#include <vector>

#include "vcmr/time_span.hpp"

namespace vcmr {

// One manifest row: a video and its total duration in seconds.
struct VideoInfo {
    std::string video_id;
    double duration = 0.0;
};

// One (clip length, stride) pair of a segmentation grid, in seconds.
struct LengthStride {
    double length = 0.0;
    double stride = 0.0;
};

// The fixed-length/stride grid used to cut videos into retrieval units.
// Lengths must be strictly increasing and each stride at most its length.
struct SegmentConfig {
    std::vector<LengthStride> pairs;

    // Throws invalid_input_error when the grid is malformed.
    void validate() const;
};

// A clip produced by the segmenter; the unit the retriever ranks.
// source_length is the nominal grid length that produced the clip (the
// actual span can be shorter only for videos shorter than that length).
struct VideoSegment {
    std::string video_id;
    TimeSpan span;
    double source_length = 0.0;
};

// Cuts one video into the segment pool defined by `config`.
//
// For each (length, stride) pair, spans [s, s+length] are emitted for
// s = 0, stride, 2*stride, ... while s + length <= duration. If the last
// emitted span ends before the video does, a tail span
// [duration - length, duration] is appended so the video end stays
// coverable. Videos shorter than a length yield the whole video once.
// Duplicate (start, end) spans across pairs are dropped; output is ordered
// by (source_length asc, start asc).
std::vector<VideoSegment> segment_video(const std::string& video_id,
                                        double duration,
                                        const SegmentConfig& config);

// Convenience: segment every video in a duration manifest.
std::vector<VideoSegment> segment_videos(const std::vector<VideoInfo>& videos,
                                         const SegmentConfig& config);

// Fraction of annotations for which some same-video segment scores
// tiou > threshold. Measures how much of a ground-truth set the pool can
// express at all. Throws invalid_input_error on an empty annotation list.
double coverage(const std::vector<VideoSegment>& segments,
                const std::vector<MomentPrediction>& annotations,
                double threshold);

} // namespace vcmr
