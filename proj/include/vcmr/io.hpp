#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "vcmr/ensemble.hpp"
#include "vcmr/eval.hpp"
#include "vcmr/reader_fusion.hpp"
#include "vcmr/run.hpp"
#include "vcmr/segmenter.hpp"
#include "vcmr/synthetic.hpp"

// Readers validate as they parse and throw format_error naming the file and
// line; writers emit one compact JSON object per line with a fixed key
// order, so identical in-memory values always serialize byte-identically.
namespace vcmr::io {

// Duration manifest: {"video_id", "duration"} per line.
std::vector<VideoInfo> read_durations(const std::filesystem::path& path);
void write_durations(const std::filesystem::path& path,
                     const std::vector<VideoInfo>& videos);

// Segment manifest: {"video_id", "start", "end", "source_length"} per line.
std::vector<VideoSegment> read_segments(const std::filesystem::path& path);
void write_segments(const std::filesystem::path& path,
                    const std::vector<VideoSegment>& segments);

// Annotations: {"query_id", "video_id", "start"?, "end"?}; start and end
// travel together (video-retrieval ground truth omits both). A query id
// appearing twice is rejected here, at parse time.
std::vector<Annotation> read_annotations(const std::filesystem::path& path);
void write_annotations(const std::filesystem::path& path,
                       const std::vector<Annotation>& annotations);

// Run files: {"query_id", "rank", "video_id", "start", "end", "score"} per
// line, written sorted by (query_id, rank). Readers accept lines in any
// order but require each query's ranks to be exactly 1..m.
Run read_run(const std::filesystem::path& path);
void write_run(const std::filesystem::path& path, const Run& run);

// Reader logits: {"query_id", "video_id", "start", "end",
// "start_logits": [...], "end_logits": [...]} per line.
std::vector<ReaderOutput> read_reader_outputs(const std::filesystem::path& path);
void write_reader_outputs(const std::filesystem::path& path,
                          const std::vector<ReaderOutput>& outputs);

// Single-object JSON config files. Unknown keys are rejected so typos
// surface instead of silently falling back to defaults.
SegmentConfig read_segment_config(const std::filesystem::path& path); // {"lengths", "strides"}
FusionConfig read_fusion_config(const std::filesystem::path& path);   // thresholds accept "inf"/"-inf"
SyntheticSpec read_synthetic_spec(const std::filesystem::path& path);

// Weight grid for the ensemble search: a JSON array of [alpha, beta] pairs.
std::vector<EnsembleWeights> read_weight_grid(const std::filesystem::path& path);

// Pretty-printed report JSON (trailing newline included).
std::string eval_report_json(const EvalReport& report);
std::string grid_search_report_json(const GridSearchResult& result);

} // namespace vcmr::io
