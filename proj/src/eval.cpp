#include "vcmr/eval.hpp"

#include <algorithm>
#include <map>
#include <numeric>

#include "vcmr/errors.hpp"

namespace vcmr {

void EvalConfig::validate() const {
    if (ks.empty())
        throw invalid_input_error("eval config needs at least one cutoff k");
    std::size_t prev = 0;
    for (std::size_t k : ks) {
        if (k == 0)
            throw invalid_input_error("recall cutoff k must be positive");
        if (k <= prev)
            throw invalid_input_error("recall cutoffs must be strictly ascending");
        prev = k;
    }
    if (!(tiou_threshold >= 0.0 && tiou_threshold <= 1.0))
        throw invalid_input_error("tiou threshold must lie in [0, 1]");
}

bool is_hit(const ScoredMoment& prediction, const Annotation& annotation,
            const EvalConfig& cfg) {
    if (cfg.task == Task::VR)
        return prediction.video_id == annotation.video_id;
    if (!annotation.span)
        throw invalid_input_error("annotation for query '" + annotation.query_id +
                                  "' lacks a span but the task scores moments");
    return vcmr_hit({prediction.video_id, prediction.span},
                    {annotation.video_id, *annotation.span}, cfg.tiou_threshold);
}

namespace {

// Validates the one-annotation-per-query contract and gives keyed lookup.
std::map<std::string, const Annotation*>
index_annotations(const std::vector<Annotation>& annotations) {
    std::map<std::string, const Annotation*> by_query;
    for (const Annotation& a : annotations) {
        auto [it, inserted] = by_query.emplace(a.query_id, &a);
        if (!inserted)
            throw duplicate_id_error("duplicate annotation for query '" +
                                     a.query_id + "'");
    }
    return by_query;
}

bool hit_in_topk(const std::vector<ScoredMoment>& candidates,
                 const Annotation& annotation, std::size_t k,
                 const EvalConfig& cfg) {
    const std::size_t n = std::min(k, candidates.size());
    for (std::size_t i = 0; i < n; ++i)
        if (is_hit(candidates[i], annotation, cfg))
            return true;
    return false;
}

} // namespace

double recall_at_k(const Run& run, const std::vector<Annotation>& annotations,
                   std::size_t k, const EvalConfig& cfg) {
    if (k == 0)
        throw invalid_input_error("recall cutoff k must be positive");
    auto by_query = index_annotations(annotations);
    if (by_query.empty())
        throw invalid_input_error("cannot evaluate against zero annotations");
    std::size_t hits = 0;
    for (const auto& [query_id, ann] : by_query) {
        auto it = run.find(query_id);
        if (it == run.end())
            continue; // absent query counts as a miss
        if (hit_in_topk(it->second, *ann, k, cfg))
            ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(by_query.size());
}

EvalReport evaluate(const Run& run, const std::vector<Annotation>& annotations,
                    const EvalConfig& cfg) {
    cfg.validate();
    auto by_query = index_annotations(annotations);
    if (by_query.empty())
        throw invalid_input_error("cannot evaluate against zero annotations");

    EvalReport report;
    report.ks = cfg.ks;
    report.query_count = by_query.size();
    for (const auto& [query_id, ann] : by_query) {
        (void)ann;
        if (run.find(query_id) == run.end())
            ++report.missing_queries;
    }
    for (std::size_t k : cfg.ks)
        report.recalls.push_back(recall_at_k(run, annotations, k, cfg));
    report.average_recall =
        std::accumulate(report.recalls.begin(), report.recalls.end(), 0.0) /
        static_cast<double>(report.recalls.size());
    return report;
}

double average_rank(const std::vector<int>& per_dataset_ranks) {
    if (per_dataset_ranks.empty())
        throw invalid_input_error("average rank needs at least one rank");
    double sum = 0.0;
    for (int r : per_dataset_ranks) {
        if (r < 1)
            throw invalid_input_error("leaderboard ranks start at 1");
        sum += static_cast<double>(r);
    }
    return sum / static_cast<double>(per_dataset_ranks.size());
}

} // namespace vcmr
