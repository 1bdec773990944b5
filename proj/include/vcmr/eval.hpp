#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "vcmr/run.hpp"
#include "vcmr/time_span.hpp"

namespace vcmr {

// Ground truth for one query: the correct video and, for moment-retrieval
// datasets, the correct span. Exactly one annotation per query id.
struct Annotation {
    std::string query_id;
    std::string video_id;
    std::optional<TimeSpan> span;
};

// VR ranks whole videos (hit = correct video); VCMR ranks moments
// (hit = correct video AND tiou above the threshold, strictly).
enum class Task { VR, VCMR };

struct EvalConfig {
    std::vector<std::size_t> ks = {1, 5, 10};
    double tiou_threshold = 0.7;
    Task task = Task::VCMR;

    void validate() const; // ks nonempty, positive, strictly ascending
};

struct EvalReport {
    std::vector<std::size_t> ks;
    std::vector<double> recalls;   // parallel to ks
    double average_recall = 0.0;   // mean of the per-k recalls
    std::size_t query_count = 0;
    std::size_t missing_queries = 0; // annotated queries absent from the run
};

// Whether a single prediction satisfies the task's correctness predicate.
bool is_hit(const ScoredMoment& prediction, const Annotation& annotation,
            const EvalConfig& cfg);

// Fraction of annotated queries whose top-k candidates contain a hit.
// Queries missing from the run count as misses, not errors.
double recall_at_k(const Run& run, const std::vector<Annotation>& annotations,
                   std::size_t k, const EvalConfig& cfg);

// Recall at every configured k plus their mean. Throws on an empty
// annotation list.
EvalReport evaluate(const Run& run, const std::vector<Annotation>& annotations,
                    const EvalConfig& cfg);

// Arithmetic mean of per-dataset leaderboard ranks; the cross-dataset
// aggregate used to order submissions. Ranks must be positive.
double average_rank(const std::vector<int>& per_dataset_ranks);

} // namespace vcmr
