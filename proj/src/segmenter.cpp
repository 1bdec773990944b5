#include "vcmr/segmenter.hpp"

#include <set>
#include <string>
#include <unordered_map>
#include <utility>

namespace vcmr {

void SegmentConfig::validate() const {
    if (pairs.empty()) {
        throw invalid_input_error("segment config needs at least one (length, stride) pair");
    }
    double prev_length = 0.0;
    for (const auto& p : pairs) {
        if (!(p.length > 0.0) || !(p.stride > 0.0)) {
            throw invalid_input_error("segment lengths and strides must be positive");
        }
        if (p.stride > p.length) {
            throw invalid_input_error("stride " + std::to_string(p.stride) +
                                      " exceeds its length " + std::to_string(p.length));
        }
        if (!(p.length > prev_length)) {
            throw invalid_input_error("segment lengths must be strictly increasing");
        }
        prev_length = p.length;
    }
}

std::vector<VideoSegment> segment_video(const std::string& video_id,
                                        double duration,
                                        const SegmentConfig& config) {
    if (!(duration > 0.0)) {
        throw invalid_input_error("video '" + video_id + "' has non-positive duration");
    }
    config.validate();

    std::vector<VideoSegment> out;
    std::set<std::pair<double, double>> seen;
    auto emit = [&](double start, double end, double source_length) {
        if (seen.emplace(start, end).second) {
            out.push_back({video_id, {start, end}, source_length});
        }
    };

    // Pairs come sorted by length, and within a pair starts ascend, so the
    // required (source_length asc, start asc) order falls out of emission
    // order.
    for (const auto& [length, stride] : config.pairs) {
        if (duration < length) {
            emit(0.0, duration, length);
            continue;
        }
        double last_end = 0.0;
        for (std::size_t k = 0;; ++k) {
            const double start = static_cast<double>(k) * stride;
            if (start + length > duration) break;
            emit(start, start + length, length);
            last_end = start + length;
        }
        if (last_end < duration) {
            emit(duration - length, duration, length);
        }
    }
    return out;
}

std::vector<VideoSegment> segment_videos(const std::vector<VideoInfo>& videos,
                                         const SegmentConfig& config) {
    std::vector<VideoSegment> out;
    for (const auto& v : videos) {
        auto segs = segment_video(v.video_id, v.duration, config);
        out.insert(out.end(), std::make_move_iterator(segs.begin()),
                   std::make_move_iterator(segs.end()));
    }
    return out;
}

double coverage(const std::vector<VideoSegment>& segments,
                const std::vector<MomentPrediction>& annotations,
                double threshold) {
    if (annotations.empty()) {
        throw invalid_input_error("coverage needs at least one annotation");
    }
    if (!(threshold >= 0.0 && threshold <= 1.0)) {
        throw invalid_input_error("tIoU threshold must lie in [0, 1]");
    }

    std::unordered_map<std::string, std::vector<const VideoSegment*>> by_video;
    for (const auto& seg : segments) {
        by_video[seg.video_id].push_back(&seg);
    }

    std::size_t covered = 0;
    for (const auto& ann : annotations) {
        require_valid(ann.span);
        auto it = by_video.find(ann.video_id);
        if (it == by_video.end()) continue;
        for (const VideoSegment* seg : it->second) {
            if (tiou(seg->span, ann.span) > threshold) {
                ++covered;
                break;
            }
        }
    }
    return static_cast<double>(covered) / static_cast<double>(annotations.size());
}

} // namespace vcmr
