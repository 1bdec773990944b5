#pragma once

#include <cstddef>
#include <vector>

#include "vcmr/eval.hpp"
#include "vcmr/reader_fusion.hpp" // Normalize
#include "vcmr/run.hpp"

namespace vcmr {

// Mixing coefficients for the two runs: combined = alpha*A + beta*B.
struct EnsembleWeights {
    double alpha = 0.5;
    double beta = 0.5;

    void validate() const; // both >= 0, finite, alpha + beta > 0
};

// Merge two runs per query and re-rank by the weighted score. Candidates
// are matched across runs by exact (video_id, start, end); a candidate
// absent from one run takes that run's minimum normalized score for the
// missing side (0 under minmax, since the run's own minimum normalizes to
// 0), i.e. absence ranks below everything the run returned. Queries present
// in only one run are merged against an empty other side.
Run merge_rerank(const Run& run_a, const Run& run_b, const EnsembleWeights& w,
                 Normalize normalize = Normalize::minmax_per_query);

// alpha = 0.00, 0.05, ..., 1.00 with beta = 1 - alpha. Normalization makes
// the sum-to-one restriction lossless: scaling (alpha, beta) by any c > 0
// cannot change an argsort.
std::vector<EnsembleWeights> default_weight_grid();

struct GridSearchResult {
    EnsembleWeights weights;
    double metric = 0.0; // average recall of the winning merge
    EvalReport report;   // full evaluation at the winning weights
};

// Exhaustively evaluates merge_rerank at every grid point against the
// validation annotations and returns the weights with the highest average
// recall. Ties break toward the smallest alpha, then the smallest beta.
// `threads` bounds how many grid points are evaluated concurrently; the
// selection itself is a deterministic reduction, so the result does not
// depend on the thread count.
GridSearchResult grid_search(const Run& run_a, const Run& run_b,
                             const std::vector<Annotation>& val_annotations,
                             const EvalConfig& eval_cfg,
                             const std::vector<EnsembleWeights>& grid,
                             Normalize normalize = Normalize::minmax_per_query,
                             std::size_t threads = 1);

} // namespace vcmr
