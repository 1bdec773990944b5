#include "vcmr/retriever.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <thread>

#include "binary_io.hpp"

namespace vcmr {

namespace {

constexpr char kMagic[4] = {'I', 'D', 'X', '1'};

double l2_norm(std::span<const float> v) {
    double sum = 0.0;
    for (float x : v) sum += static_cast<double>(x) * static_cast<double>(x);
    return std::sqrt(sum);
}

std::string format_number(double v) {
    char buf[32];
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, end);
}

} // namespace

SegmentIndex::SegmentIndex(std::size_t dimension) : dimension_(dimension) {
    if (dimension_ == 0) {
        throw invalid_input_error("index dimension must be at least 1");
    }
}

void SegmentIndex::add(std::string video_id, TimeSpan span, std::vector<float> vector) {
    require_valid(span);
    if (dimension_ == 0) dimension_ = vector.size();
    if (vector.size() != dimension_) {
        throw dimension_error("index entry '" + video_id + "' has dimension " +
                              std::to_string(vector.size()) + ", index expects " +
                              std::to_string(dimension_));
    }
    for (float x : vector) {
        if (!std::isfinite(x)) {
            throw non_finite_error("index entry '" + video_id +
                                   "' contains a non-finite component");
        }
    }
    const double norm = l2_norm(vector);
    entries_.push_back({std::move(video_id), span, std::move(vector), norm});
}

double cosine_similarity(std::span<const float> a, std::span<const float> b) {
    if (a.size() != b.size()) {
        throw dimension_error("cosine of vectors with dimensions " +
                              std::to_string(a.size()) + " and " +
                              std::to_string(b.size()));
    }
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double x = a[i], y = b[i];
        dot += x * y;
        na += x * x;
        nb += y * y;
    }
    if (na == 0.0 || nb == 0.0) return 0.0;
    return dot / (std::sqrt(na) * std::sqrt(nb));
}

std::vector<ScoredMoment> search_topk(std::span<const float> query,
                                      const SegmentIndex& index, std::size_t k) {
    if (k < 1) throw invalid_input_error("k must be at least 1");
    if (index.size() == 0) return {};
    if (query.size() != index.dimension()) {
        throw dimension_error("query dimension " + std::to_string(query.size()) +
                              " does not match index dimension " +
                              std::to_string(index.dimension()));
    }

    const double query_norm = l2_norm(query);
    const auto& entries = index.entries();

    std::vector<double> scores(entries.size());
    for (std::size_t i = 0; i < entries.size(); ++i) {
        const auto& e = entries[i];
        if (query_norm == 0.0 || e.norm == 0.0) {
            scores[i] = 0.0;
            continue;
        }
        double dot = 0.0;
        const float* v = e.vector.data();
        for (std::size_t d = 0; d < query.size(); ++d) {
            dot += static_cast<double>(query[d]) * static_cast<double>(v[d]);
        }
        scores[i] = dot / (query_norm * e.norm);
    }

    std::vector<std::size_t> order(entries.size());
    std::iota(order.begin(), order.end(), 0);
    const auto better = [&](std::size_t x, std::size_t y) {
        if (scores[x] != scores[y]) return scores[x] > scores[y];
        const auto& ex = entries[x];
        const auto& ey = entries[y];
        if (ex.video_id != ey.video_id) return ex.video_id < ey.video_id;
        if (ex.span.start != ey.span.start) return ex.span.start < ey.span.start;
        return ex.span.end < ey.span.end;
    };
    const std::size_t take = std::min(k, order.size());
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(take),
                      order.end(), better);

    std::vector<ScoredMoment> out;
    out.reserve(take);
    for (std::size_t i = 0; i < take; ++i) {
        const auto& e = entries[order[i]];
        out.push_back({e.video_id, e.span, scores[order[i]], Provenance::retriever});
    }
    return out;
}

std::string segment_embedding_id(const std::string& video_id, const TimeSpan& span) {
    return video_id + "#" + format_number(span.start) + "-" + format_number(span.end);
}

SegmentIndex build_segment_index(const std::vector<VideoSegment>& segments,
                                 const EmbeddingStore& store) {
    SegmentIndex index(store.dimension());
    for (const auto& seg : segments) {
        const std::string id = segment_embedding_id(seg.video_id, seg.span);
        const auto* vec = store.find(id);
        if (!vec) {
            throw invalid_input_error("embedding store has no vector for segment '" +
                                      id + "'");
        }
        index.add(seg.video_id, seg.span, *vec);
    }
    return index;
}

SegmentIndex build_video_index(const std::vector<VideoInfo>& videos,
                               const EmbeddingStore& store) {
    SegmentIndex index(store.dimension());
    for (const auto& v : videos) {
        if (!(v.duration > 0.0)) {
            throw invalid_input_error("video '" + v.video_id +
                                      "' has non-positive duration");
        }
        const auto* vec = store.find(v.video_id);
        if (!vec) {
            throw invalid_input_error("embedding store has no vector for video '" +
                                      v.video_id + "'");
        }
        index.add(v.video_id, {0.0, v.duration}, *vec);
    }
    return index;
}

void save_index(const SegmentIndex& index, const std::filesystem::path& path) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw io_error("cannot open '" + path.string() + "' for writing");
    os.write(kMagic, 4);
    detail::put_u32(os, static_cast<std::uint32_t>(index.dimension()));
    detail::put_u64(os, static_cast<std::uint64_t>(index.size()));
    for (const auto& e : index.entries()) {
        detail::put_u16(os, static_cast<std::uint16_t>(e.video_id.size()));
        os.write(e.video_id.data(), static_cast<std::streamsize>(e.video_id.size()));
        detail::put_f64(os, e.span.start);
        detail::put_f64(os, e.span.end);
        for (float v : e.vector) detail::put_f32(os, v);
    }
    if (!os) throw io_error("failed writing '" + path.string() + "'");
}

SegmentIndex load_index(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw io_error("cannot open '" + path.string() + "' for reading");
    char magic[4];
    detail::read_exact(is, magic, 4, "IDX1 magic");
    if (std::memcmp(magic, kMagic, 4) != 0) {
        throw format_error("'" + path.string() + "' is not an IDX1 file (bad magic)");
    }
    const std::uint32_t dim = detail::get_u32(is, "IDX1 dimension");
    if (dim == 0) throw format_error("'" + path.string() + "' declares dimension 0");
    const std::uint64_t count = detail::get_u64(is, "IDX1 entry count");

    SegmentIndex index(dim);
    for (std::uint64_t i = 0; i < count; ++i) {
        const std::uint16_t id_len = detail::get_u16(is, "entry id length");
        std::string video_id(id_len, '\0');
        detail::read_exact(is, video_id.data(), id_len, "entry video id");
        TimeSpan span;
        span.start = detail::get_f64(is, "entry span start");
        span.end = detail::get_f64(is, "entry span end");
        std::vector<float> vec(dim);
        for (std::uint32_t d = 0; d < dim; ++d) {
            vec[d] = detail::get_f32(is, "entry vector");
        }
        index.add(std::move(video_id), span, std::move(vec));
    }
    if (is.peek() != std::char_traits<char>::eof()) {
        throw format_error("'" + path.string() + "' has trailing bytes after " +
                           std::to_string(count) + " entries");
    }
    return index;
}

Run batch_search(const EmbeddingStore& queries, const SegmentIndex& index,
                 std::size_t k, unsigned threads) {
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    const auto& records = queries.records();
    std::vector<std::vector<ScoredMoment>> results(records.size());

    auto worker = [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            results[i] = search_topk(records[i].vector, index, k);
        }
    };

    if (threads <= 1 || records.size() <= 1) {
        worker(0, records.size());
    } else {
        const std::size_t n_threads = std::min<std::size_t>(threads, records.size());
        std::vector<std::thread> pool;
        pool.reserve(n_threads);
        const std::size_t chunk = (records.size() + n_threads - 1) / n_threads;
        for (std::size_t t = 0; t < n_threads; ++t) {
            const std::size_t begin = t * chunk;
            const std::size_t end = std::min(records.size(), begin + chunk);
            if (begin >= end) break;
            pool.emplace_back(worker, begin, end);
        }
        for (auto& th : pool) th.join();
    }

    Run run;
    for (std::size_t i = 0; i < records.size(); ++i) {
        run[records[i].id] = std::move(results[i]);
    }
    return run;
}

} // namespace vcmr
