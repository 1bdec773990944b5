#include "vcmr/io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "json.hpp"

#include "vcmr/errors.hpp"

namespace vcmr::io {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;
namespace fs = std::filesystem;

[[noreturn]] void fail_at(const fs::path& path, std::size_t line,
                          const std::string& what) {
    throw format_error(path.string() + ":" + std::to_string(line) + ": " + what);
}

[[noreturn]] void fail_file(const fs::path& path, const std::string& what) {
    throw format_error(path.string() + ": " + what);
}

// Calls fn(line_number, object) for every non-blank line. Blank lines and a
// trailing carriage return are tolerated; anything else must be one JSON
// object per line.
template <typename Fn>
void for_each_jsonl(const fs::path& path, Fn&& fn) {
    std::ifstream in(path, std::ios::binary);
    if (!in.is_open())
        throw io_error("cannot open '" + path.string() + "' for reading");
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos)
            continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& e) {
            // parse errors proper, but also overflows like 1e999, which the
            // parser reports as out_of_range rather than parse_error
            fail_at(path, line_no, std::string("invalid JSON: ") + e.what());
        }
        if (!j.is_object())
            fail_at(path, line_no, "expected a JSON object");
        fn(line_no, j);
    }
}

json load_json_document(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in.is_open())
        throw io_error("cannot open '" + path.string() + "' for reading");
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        fail_file(path, std::string("invalid JSON: ") + e.what());
    }
}

const json& require_field(const json& j, const char* key, const fs::path& path,
                          std::size_t line) {
    auto it = j.find(key);
    if (it == j.end())
        fail_at(path, line, std::string("missing field '") + key + "'");
    return *it;
}

std::string get_string(const json& j, const char* key, const fs::path& path,
                       std::size_t line) {
    const json& v = require_field(j, key, path, line);
    if (!v.is_string() || v.get<std::string>().empty())
        fail_at(path, line, std::string("field '") + key +
                                "' must be a non-empty string");
    return v.get<std::string>();
}

double get_finite(const json& j, const char* key, const fs::path& path,
                  std::size_t line) {
    const json& v = require_field(j, key, path, line);
    if (!v.is_number())
        fail_at(path, line, std::string("field '") + key + "' must be a number");
    const double x = v.get<double>();
    if (!std::isfinite(x))
        fail_at(path, line, std::string("field '") + key + "' must be finite");
    return x;
}

std::size_t get_positive_integer(const json& j, const char* key,
                                 const fs::path& path, std::size_t line) {
    const json& v = require_field(j, key, path, line);
    if (!v.is_number_integer() && !v.is_number_unsigned())
        fail_at(path, line, std::string("field '") + key + "' must be an integer");
    const std::int64_t x = v.get<std::int64_t>();
    if (x < 1)
        fail_at(path, line, std::string("field '") + key + "' must be >= 1");
    return static_cast<std::size_t>(x);
}

std::vector<double> get_number_array(const json& j, const char* key,
                                     const fs::path& path, std::size_t line) {
    const json& v = require_field(j, key, path, line);
    if (!v.is_array())
        fail_at(path, line, std::string("field '") + key + "' must be an array");
    std::vector<double> out;
    out.reserve(v.size());
    for (const json& e : v) {
        if (!e.is_number())
            fail_at(path, line,
                    std::string("field '") + key + "' must contain only numbers");
        const double x = e.get<double>();
        if (!std::isfinite(x))
            fail_at(path, line,
                    std::string("field '") + key + "' must contain finite numbers");
        out.push_back(x);
    }
    return out;
}

void reject_unknown_keys(const json& j, std::initializer_list<const char*> allowed,
                         const fs::path& path) {
    for (const auto& item : j.items()) {
        const bool known = std::any_of(allowed.begin(), allowed.end(),
                                       [&](const char* k) { return item.key() == k; });
        if (!known)
            fail_file(path, "unknown field '" + item.key() + "'");
    }
}

template <typename Fn>
void write_text(const fs::path& path, Fn&& fn) {
    std::ofstream out(path, std::ios::binary);
    if (!out.is_open())
        throw io_error("cannot open '" + path.string() + "' for writing");
    fn(out);
    out.flush();
    if (!out)
        throw io_error("failed while writing '" + path.string() + "'");
}

TimeSpan read_span_fields(const json& j, const fs::path& path, std::size_t line) {
    TimeSpan span{get_finite(j, "start", path, line),
                  get_finite(j, "end", path, line)};
    if (!(span.end > span.start))
        fail_at(path, line, "'end' must be strictly greater than 'start'");
    return span;
}

} // namespace

std::vector<VideoInfo> read_durations(const fs::path& path) {
    std::vector<VideoInfo> videos;
    std::set<std::string> seen;
    for_each_jsonl(path, [&](std::size_t line, const json& j) {
        VideoInfo v{get_string(j, "video_id", path, line),
                    get_finite(j, "duration", path, line)};
        if (!(v.duration > 0.0))
            fail_at(path, line, "'duration' must be positive");
        if (!seen.insert(v.video_id).second)
            fail_at(path, line, "duplicate video_id '" + v.video_id + "'");
        videos.push_back(std::move(v));
    });
    return videos;
}

void write_durations(const fs::path& path, const std::vector<VideoInfo>& videos) {
    write_text(path, [&](std::ostream& out) {
        for (const VideoInfo& v : videos) {
            ordered_json j;
            j["video_id"] = v.video_id;
            j["duration"] = v.duration;
            out << j.dump() << '\n';
        }
    });
}

std::vector<VideoSegment> read_segments(const fs::path& path) {
    std::vector<VideoSegment> segments;
    for_each_jsonl(path, [&](std::size_t line, const json& j) {
        VideoSegment s;
        s.video_id = get_string(j, "video_id", path, line);
        s.span = read_span_fields(j, path, line);
        s.source_length = get_finite(j, "source_length", path, line);
        if (!(s.source_length > 0.0))
            fail_at(path, line, "'source_length' must be positive");
        segments.push_back(std::move(s));
    });
    return segments;
}

void write_segments(const fs::path& path,
                    const std::vector<VideoSegment>& segments) {
    write_text(path, [&](std::ostream& out) {
        for (const VideoSegment& s : segments) {
            ordered_json j;
            j["video_id"] = s.video_id;
            j["start"] = s.span.start;
            j["end"] = s.span.end;
            j["source_length"] = s.source_length;
            out << j.dump() << '\n';
        }
    });
}

std::vector<Annotation> read_annotations(const fs::path& path) {
    std::vector<Annotation> annotations;
    std::set<std::string> seen;
    for_each_jsonl(path, [&](std::size_t line, const json& j) {
        Annotation a;
        a.query_id = get_string(j, "query_id", path, line);
        a.video_id = get_string(j, "video_id", path, line);
        const bool has_start = j.contains("start");
        const bool has_end = j.contains("end");
        if (has_start != has_end)
            fail_at(path, line, "'start' and 'end' must be given together");
        if (has_start)
            a.span = read_span_fields(j, path, line);
        if (!seen.insert(a.query_id).second)
            fail_at(path, line,
                    "query '" + a.query_id + "' has more than one annotation");
        annotations.push_back(std::move(a));
    });
    return annotations;
}

void write_annotations(const fs::path& path,
                       const std::vector<Annotation>& annotations) {
    write_text(path, [&](std::ostream& out) {
        for (const Annotation& a : annotations) {
            ordered_json j;
            j["query_id"] = a.query_id;
            j["video_id"] = a.video_id;
            if (a.span) {
                j["start"] = a.span->start;
                j["end"] = a.span->end;
            }
            out << j.dump() << '\n';
        }
    });
}

Run read_run(const fs::path& path) {
    struct Line {
        std::size_t rank;
        ScoredMoment moment;
    };
    std::map<std::string, std::vector<Line>> per_query;
    for_each_jsonl(path, [&](std::size_t line, const json& j) {
        const std::string query_id = get_string(j, "query_id", path, line);
        const std::size_t rank = get_positive_integer(j, "rank", path, line);
        ScoredMoment m;
        m.video_id = get_string(j, "video_id", path, line);
        m.span = read_span_fields(j, path, line);
        m.score = get_finite(j, "score", path, line);
        per_query[query_id].push_back({rank, std::move(m)});
    });

    Run run;
    for (auto& [query_id, lines] : per_query) {
        std::sort(lines.begin(), lines.end(),
                  [](const Line& a, const Line& b) { return a.rank < b.rank; });
        std::vector<ScoredMoment> moments;
        moments.reserve(lines.size());
        for (std::size_t i = 0; i < lines.size(); ++i) {
            if (lines[i].rank != i + 1)
                fail_file(path, "query '" + query_id +
                                    "' does not have contiguous ranks 1.." +
                                    std::to_string(lines.size()));
            moments.push_back(std::move(lines[i].moment));
        }
        run[query_id] = std::move(moments);
    }
    return run;
}

void write_run(const fs::path& path, const Run& run) {
    write_text(path, [&](std::ostream& out) {
        for (const auto& [query_id, moments] : run) {
            for (std::size_t i = 0; i < moments.size(); ++i) {
                const ScoredMoment& m = moments[i];
                ordered_json j;
                j["query_id"] = query_id;
                j["rank"] = i + 1;
                j["video_id"] = m.video_id;
                j["start"] = m.span.start;
                j["end"] = m.span.end;
                j["score"] = m.score;
                out << j.dump() << '\n';
            }
        }
    });
}

std::vector<ReaderOutput> read_reader_outputs(const fs::path& path) {
    std::vector<ReaderOutput> outputs;
    for_each_jsonl(path, [&](std::size_t line, const json& j) {
        ReaderOutput r;
        r.query_id = get_string(j, "query_id", path, line);
        r.video_id = get_string(j, "video_id", path, line);
        r.span = read_span_fields(j, path, line);
        r.start_logits = get_number_array(j, "start_logits", path, line);
        r.end_logits = get_number_array(j, "end_logits", path, line);
        try {
            r.validate();
        } catch (const error& e) {
            fail_at(path, line, e.what());
        }
        outputs.push_back(std::move(r));
    });
    return outputs;
}

void write_reader_outputs(const fs::path& path,
                          const std::vector<ReaderOutput>& outputs) {
    write_text(path, [&](std::ostream& out) {
        for (const ReaderOutput& r : outputs) {
            ordered_json j;
            j["query_id"] = r.query_id;
            j["video_id"] = r.video_id;
            j["start"] = r.span.start;
            j["end"] = r.span.end;
            j["start_logits"] = r.start_logits;
            j["end_logits"] = r.end_logits;
            out << j.dump() << '\n';
        }
    });
}

namespace {

SegmentConfig segment_config_from(const json& j, const fs::path& path) {
    if (!j.is_object())
        fail_file(path, "segment grid must be a JSON object");
    reject_unknown_keys(j, {"lengths", "strides"}, path);
    std::vector<double> lengths = get_number_array(j, "lengths", path, 0);
    std::vector<double> strides = get_number_array(j, "strides", path, 0);
    if (lengths.size() != strides.size())
        fail_file(path, "'lengths' and 'strides' must have the same size");
    SegmentConfig cfg;
    cfg.pairs.reserve(lengths.size());
    for (std::size_t i = 0; i < lengths.size(); ++i)
        cfg.pairs.push_back({lengths[i], strides[i]});
    try {
        cfg.validate();
    } catch (const error& e) {
        fail_file(path, e.what());
    }
    return cfg;
}

double threshold_from(const json& v, const char* key, const fs::path& path) {
    if (v.is_number())
        return v.get<double>();
    if (v.is_string()) {
        const std::string s = v.get<std::string>();
        if (s == "inf" || s == "+inf")
            return std::numeric_limits<double>::infinity();
        if (s == "-inf")
            return -std::numeric_limits<double>::infinity();
    }
    fail_file(path, std::string("field '") + key +
                        "' must be a number or \"inf\"/\"-inf\"");
}

} // namespace

SegmentConfig read_segment_config(const fs::path& path) {
    return segment_config_from(load_json_document(path), path);
}

FusionConfig read_fusion_config(const fs::path& path) {
    const json j = load_json_document(path);
    if (!j.is_object())
        fail_file(path, "fusion config must be a JSON object");
    reject_unknown_keys(j,
                        {"retriever_weight", "reader_weight", "start_threshold",
                         "end_threshold", "normalize"},
                        path);
    FusionConfig cfg;
    if (j.contains("retriever_weight"))
        cfg.retriever_weight = get_finite(j, "retriever_weight", path, 0);
    if (j.contains("reader_weight"))
        cfg.reader_weight = get_finite(j, "reader_weight", path, 0);
    if (j.contains("start_threshold"))
        cfg.start_threshold = threshold_from(j.at("start_threshold"),
                                             "start_threshold", path);
    if (j.contains("end_threshold"))
        cfg.end_threshold = threshold_from(j.at("end_threshold"),
                                           "end_threshold", path);
    if (j.contains("normalize")) {
        const json& v = j.at("normalize");
        if (v.is_string() && v.get<std::string>() == "none")
            cfg.normalize = Normalize::none;
        else if (v.is_string() && v.get<std::string>() == "minmax_per_query")
            cfg.normalize = Normalize::minmax_per_query;
        else
            fail_file(path, "'normalize' must be \"none\" or \"minmax_per_query\"");
    }
    try {
        cfg.validate();
    } catch (const error& e) {
        fail_file(path, e.what());
    }
    return cfg;
}

SyntheticSpec read_synthetic_spec(const fs::path& path) {
    const json j = load_json_document(path);
    if (!j.is_object())
        fail_file(path, "synthetic spec must be a JSON object");
    reject_unknown_keys(j,
                        {"n_videos", "duration_min", "duration_max",
                         "annotations_per_video", "dim", "noise_sigma", "segments"},
                        path);
    SyntheticSpec spec;
    if (j.contains("n_videos"))
        spec.n_videos = get_positive_integer(j, "n_videos", path, 0);
    if (j.contains("duration_min"))
        spec.duration_min = get_finite(j, "duration_min", path, 0);
    if (j.contains("duration_max"))
        spec.duration_max = get_finite(j, "duration_max", path, 0);
    if (j.contains("annotations_per_video"))
        spec.annotations_per_video =
            get_positive_integer(j, "annotations_per_video", path, 0);
    if (j.contains("dim"))
        spec.dim = get_positive_integer(j, "dim", path, 0);
    if (j.contains("noise_sigma"))
        spec.noise_sigma = get_finite(j, "noise_sigma", path, 0);
    if (!j.contains("segments"))
        fail_file(path, "missing field 'segments'");
    spec.segments = segment_config_from(j.at("segments"), path);
    try {
        spec.validate();
    } catch (const error& e) {
        fail_file(path, e.what());
    }
    return spec;
}

std::vector<EnsembleWeights> read_weight_grid(const fs::path& path) {
    const json j = load_json_document(path);
    if (!j.is_array() || j.empty())
        fail_file(path, "weight grid must be a non-empty array of [alpha, beta] pairs");
    std::vector<EnsembleWeights> grid;
    grid.reserve(j.size());
    for (const json& e : j) {
        if (!e.is_array() || e.size() != 2 || !e[0].is_number() || !e[1].is_number())
            fail_file(path, "each grid entry must be an [alpha, beta] number pair");
        EnsembleWeights w{e[0].get<double>(), e[1].get<double>()};
        try {
            w.validate();
        } catch (const error& err) {
            fail_file(path, err.what());
        }
        grid.push_back(w);
    }
    return grid;
}

namespace {

ordered_json eval_report_to_json(const EvalReport& report) {
    ordered_json j;
    j["query_count"] = report.query_count;
    j["missing_queries"] = report.missing_queries;
    ordered_json recalls = ordered_json::object();
    for (std::size_t i = 0; i < report.ks.size(); ++i)
        recalls["recall@" + std::to_string(report.ks[i])] = report.recalls[i];
    j["recalls"] = recalls;
    j["average_recall"] = report.average_recall;
    return j;
}

} // namespace

std::string eval_report_json(const EvalReport& report) {
    return eval_report_to_json(report).dump(2) + "\n";
}

std::string grid_search_report_json(const GridSearchResult& result) {
    ordered_json j;
    j["alpha"] = result.weights.alpha;
    j["beta"] = result.weights.beta;
    j["average_recall"] = result.metric;
    j["evaluation"] = eval_report_to_json(result.report);
    return j.dump(2) + "\n";
}

} // namespace vcmr::io
