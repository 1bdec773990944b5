#include "vcmr/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <thread>
#include <tuple>

#include "vcmr/errors.hpp"

namespace vcmr {

void EnsembleWeights::validate() const {
    if (!std::isfinite(alpha) || !std::isfinite(beta))
        throw non_finite_error("ensemble weights must be finite");
    if (alpha < 0.0 || beta < 0.0)
        throw invalid_input_error("ensemble weights must be non-negative");
    if (!(alpha + beta > 0.0))
        throw invalid_input_error("ensemble weights must not both be zero");
}

namespace {

struct SideScores {
    // Keyed by exact (video_id, start, end). Duplicate candidates within a
    // run keep their best score.
    std::map<std::tuple<std::string, double, double>, double> by_key;
    std::map<std::tuple<std::string, double, double>, const ScoredMoment*> moment;
    double missing = 0.0; // contribution for candidates this run lacks
};

SideScores score_side(const std::vector<ScoredMoment>* candidates,
                      Normalize normalize) {
    SideScores side;
    if (candidates == nullptr || candidates->empty())
        return side; // empty side: everything is "missing", worth 0
    std::vector<double> scores;
    scores.reserve(candidates->size());
    for (const ScoredMoment& m : *candidates)
        scores.push_back(m.score);
    if (normalize == Normalize::minmax_per_query)
        scores = minmax_normalize(scores);
    side.missing = *std::min_element(scores.begin(), scores.end());
    for (std::size_t i = 0; i < candidates->size(); ++i) {
        const ScoredMoment& m = (*candidates)[i];
        auto key = std::make_tuple(m.video_id, m.span.start, m.span.end);
        auto it = side.by_key.find(key);
        if (it == side.by_key.end() || scores[i] > it->second) {
            side.by_key[key] = scores[i];
            side.moment[key] = &m;
        }
    }
    return side;
}

std::vector<ScoredMoment> merge_query(const std::vector<ScoredMoment>* a,
                                      const std::vector<ScoredMoment>* b,
                                      const EnsembleWeights& w,
                                      Normalize normalize) {
    SideScores sa = score_side(a, normalize);
    SideScores sb = score_side(b, normalize);

    std::set<std::tuple<std::string, double, double>> keys;
    for (const auto& [key, score] : sa.by_key)
        keys.insert(key);
    for (const auto& [key, score] : sb.by_key)
        keys.insert(key);

    std::vector<ScoredMoment> merged;
    merged.reserve(keys.size());
    for (const auto& key : keys) {
        auto ia = sa.by_key.find(key);
        auto ib = sb.by_key.find(key);
        const double score_a = ia != sa.by_key.end() ? ia->second : sa.missing;
        const double score_b = ib != sb.by_key.end() ? ib->second : sb.missing;
        const ScoredMoment& base =
            ia != sa.by_key.end() ? *sa.moment.at(key) : *sb.moment.at(key);

        ScoredMoment out = base;
        out.score = w.alpha * score_a + w.beta * score_b;
        out.provenance = Provenance::ensemble;
        merged.push_back(std::move(out));
    }

    std::sort(merged.begin(), merged.end(),
              [](const ScoredMoment& x, const ScoredMoment& y) {
                  if (x.score != y.score)
                      return x.score > y.score;
                  return moment_key_less(x, y);
              });
    return merged;
}

} // namespace

Run merge_rerank(const Run& run_a, const Run& run_b, const EnsembleWeights& w,
                 Normalize normalize) {
    w.validate();
    std::set<std::string> query_ids;
    for (const auto& [qid, moments] : run_a)
        query_ids.insert(qid);
    for (const auto& [qid, moments] : run_b)
        query_ids.insert(qid);

    Run merged;
    for (const std::string& qid : query_ids) {
        auto ia = run_a.find(qid);
        auto ib = run_b.find(qid);
        merged[qid] = merge_query(ia != run_a.end() ? &ia->second : nullptr,
                                  ib != run_b.end() ? &ib->second : nullptr, w,
                                  normalize);
    }
    return merged;
}

std::vector<EnsembleWeights> default_weight_grid() {
    std::vector<EnsembleWeights> grid;
    grid.reserve(21);
    for (int i = 0; i <= 20; ++i) {
        const double alpha = static_cast<double>(i) / 20.0;
        grid.push_back({alpha, 1.0 - alpha});
    }
    return grid;
}

GridSearchResult grid_search(const Run& run_a, const Run& run_b,
                             const std::vector<Annotation>& val_annotations,
                             const EvalConfig& eval_cfg,
                             const std::vector<EnsembleWeights>& grid,
                             Normalize normalize, std::size_t threads) {
    if (grid.empty())
        throw invalid_input_error("grid search needs at least one weight pair");
    if (val_annotations.empty())
        throw invalid_input_error("grid search needs validation annotations");
    eval_cfg.validate();
    for (const EnsembleWeights& w : grid)
        w.validate();
    if (threads == 0)
        threads = 1;

    // Every grid point is evaluated; nothing is pruned. Points are
    // independent, so they can run concurrently; the reduction below walks
    // the results in grid order and is what makes the choice deterministic.
    std::vector<EvalReport> reports(grid.size());
    auto evaluate_range = [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            Run merged = merge_rerank(run_a, run_b, grid[i], normalize);
            reports[i] = evaluate(merged, val_annotations, eval_cfg);
        }
    };
    if (threads <= 1 || grid.size() <= 1) {
        evaluate_range(0, grid.size());
    } else {
        threads = std::min(threads, grid.size());
        const std::size_t chunk = (grid.size() + threads - 1) / threads;
        std::vector<std::thread> workers;
        for (std::size_t t = 0; t < threads; ++t) {
            const std::size_t begin = t * chunk;
            const std::size_t end = std::min(begin + chunk, grid.size());
            if (begin >= end)
                break;
            workers.emplace_back(evaluate_range, begin, end);
        }
        for (std::thread& worker : workers)
            worker.join();
    }

    std::size_t best = 0;
    for (std::size_t i = 1; i < grid.size(); ++i) {
        const double m = reports[i].average_recall;
        const double best_m = reports[best].average_recall;
        if (m > best_m ||
            (m == best_m && (grid[i].alpha < grid[best].alpha ||
                             (grid[i].alpha == grid[best].alpha &&
                              grid[i].beta < grid[best].beta))))
            best = i;
    }
    return {grid[best], reports[best].average_recall, reports[best]};
}

} // namespace vcmr
