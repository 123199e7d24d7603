#pragma once

#include "patternlab/pattern.hpp"

#include <vector>

namespace patternlab {

/// Finite-window surrogate for Fell convergence: patterns are compared by
/// two-sided nearest-point matching on a window around the identity, so that
/// "every point is approximated" and "no spurious points" are both captured
/// at finite scale.
struct WindowMetricParams {
    double window_radius = 1.0;
    double boundary_slack = 0.1;
    GroupMetricParams metric{};
};

/// Pattern right-translated so that one of its resonators sits at the
/// identity: align_at(p, i) = x_i . p with x_i = p.points[i].
struct AlignedPattern {
    std::size_t aligned_at = 0;
    Pattern pattern; // contains the identity
};

struct TransversalEstimate {
    std::vector<AlignedPattern> aligned;            // one per clustered site
    std::vector<std::size_t> cluster_assignment;    // aligned index -> cluster id
    std::vector<std::size_t> representatives;       // cluster id -> aligned index
    Eigen::MatrixXd pairwise_distances;
    std::size_t cluster_count = 0;
    std::size_t excluded_sites = 0; // too close to the boundary to compare
};

/// Report for the circle embedding of a quasirotation orbit: each aligned
/// pair (m, n) is scored by the circle distance of (m - n) theta against the
/// window distance of the aligned patterns.
struct CirclePairSample {
    std::size_t site_m = 0;
    std::size_t site_n = 0;
    double circle_distance = 0.0;
    double window_distance = 0.0;
};
struct CircleEmbeddingReport {
    std::vector<CirclePairSample> pairs;
    double decile_circle_cutoff = 0.0;
    double fitted_slope = 0.0; // window distance per circle distance on the small-decile pairs
    bool consistent = true;
};

AlignedPattern align_at(const Pattern& p, std::size_t i);

/// Symmetrized one-sided matching distance on the shrunk comparison window.
/// The comparison radius is capped by both patterns' window trust radii so
/// that truncated environments are only compared where they are complete.
double window_distance(const Pattern& a, const Pattern& b, const WindowMetricParams& params);

/// Single-linkage clustering of the alignments under window_distance. Sites
/// whose environment is incomplete on the comparison radius are excluded:
/// their alignments carry too little data to be told apart from anything.
TransversalEstimate estimate_transversal(const Pattern& p, const WindowMetricParams& params,
                                         double merge_tol, int workers = 1);

/// Requires QuasiRotation provenance. Pairs are drawn from alignment sites
/// whose window environment is complete on the comparison radius.
CircleEmbeddingReport circle_embedding_check(const Pattern& p, const WindowMetricParams& params);

} // namespace patternlab
