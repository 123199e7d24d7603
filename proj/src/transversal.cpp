#include "patternlab/transversal.hpp"

#include "patternlab/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace patternlab {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

double circle_distance(double angle) {
    double a = std::fmod(angle, kTwoPi);
    if (a < 0) a += kTwoPi;
    return std::min(a, kTwoPi - a);
}

// Largest distance from a-points inside `radius` to their nearest b-point.
double one_sided(const Pattern& a, const Pattern& b, double radius,
                 const GroupMetricParams& metric) {
    double worst = 0.0;
    for (const auto& x : a.points) {
        if (x.trans3().norm() > radius) continue;
        double best = std::numeric_limits<double>::infinity();
        for (const auto& y : b.points) best = std::min(best, group_distance(x, y, metric));
        worst = std::max(worst, best);
    }
    return worst;
}

} // namespace

AlignedPattern align_at(const Pattern& p, std::size_t i) {
    if (i >= p.points.size()) throw std::out_of_range("align_at: index out of range");
    AlignedPattern out;
    out.aligned_at = i;
    out.pattern = translate_pattern(p.points[i], p);
    return out;
}

double window_distance(const Pattern& a, const Pattern& b, const WindowMetricParams& params) {
    if (a.dim != b.dim) throw std::invalid_argument("window_distance: dimension mismatch");
    const double radius = std::max(
        0.0, std::min({params.window_radius, a.window.trust_radius(), b.window.trust_radius()}) -
                 params.boundary_slack);
    return std::max(one_sided(a, b, radius, params.metric),
                    one_sided(b, a, radius, params.metric));
}

TransversalEstimate estimate_transversal(const Pattern& p, const WindowMetricParams& params,
                                         double merge_tol, int workers) {
    if (p.empty()) throw std::invalid_argument("estimate_transversal: empty pattern");
    if (params.boundary_slack <= 0.0 || params.boundary_slack >= params.window_radius)
        throw std::invalid_argument("boundary_slack must be in (0, window_radius)");

    TransversalEstimate out;
    for (std::size_t i = 0; i < p.points.size(); ++i) {
        AlignedPattern aligned = align_at(p, i);
        if (aligned.pattern.window.trust_radius() >= params.window_radius)
            out.aligned.push_back(std::move(aligned));
        else
            ++out.excluded_sites;
    }
    const std::size_t n = out.aligned.size();
    if (n == 0)
        throw std::invalid_argument(
            "estimate_transversal: no site has a complete comparison window");

    out.pairwise_distances = Eigen::MatrixXd::Zero(n, n);
    std::vector<std::pair<std::size_t, std::size_t>> jobs;
    jobs.reserve(n * (n - 1) / 2);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) jobs.emplace_back(i, j);
    parallel_for(jobs.size(), workers, [&](std::size_t idx) {
        const auto [i, j] = jobs[idx];
        const double d = window_distance(out.aligned[i].pattern, out.aligned[j].pattern, params);
        out.pairwise_distances(i, j) = d;
        out.pairwise_distances(j, i) = d;
    });

    // Single linkage: union components over all pairs below threshold.
    std::vector<std::size_t> parent(n);
    std::iota(parent.begin(), parent.end(), 0);
    std::function<std::size_t(std::size_t)> find = [&](std::size_t i) {
        while (parent[i] != i) i = parent[i] = parent[parent[i]];
        return i;
    };
    for (const auto& [i, j] : jobs)
        if (out.pairwise_distances(i, j) <= merge_tol) parent[find(i)] = find(j);

    out.cluster_assignment.assign(n, 0);
    std::vector<long> cluster_of_root(n, -1);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t root = find(i);
        if (cluster_of_root[root] < 0) {
            cluster_of_root[root] = static_cast<long>(out.representatives.size());
            out.representatives.push_back(i);
        }
        out.cluster_assignment[i] = static_cast<std::size_t>(cluster_of_root[root]);
    }
    out.cluster_count = out.representatives.size();
    return out;
}

CircleEmbeddingReport circle_embedding_check(const Pattern& p,
                                             const WindowMetricParams& params) {
    if (!p.provenance || !std::holds_alternative<QuasiRotationSpec>(*p.provenance))
        throw std::invalid_argument("circle_embedding_check needs quasirotation provenance");
    const auto& spec = std::get<QuasiRotationSpec>(*p.provenance);
    const double step_len = spec.translation.norm();

    // Restrict to sites whose truncated environment is complete on the
    // comparison radius; edge sites would contaminate the circle correlation
    // with truncation artifacts.
    const long margin = static_cast<long>(std::ceil(params.window_radius / step_len));
    std::vector<std::size_t> sites;
    std::vector<long> steps;
    long max_step = 0;
    for (std::size_t i = 0; i < p.points.size(); ++i) {
        const long n = static_cast<long>(std::llround(p.points[i].trans3().norm() / step_len));
        max_step = std::max(max_step, n);
        steps.push_back(n);
    }
    for (std::size_t i = 0; i < p.points.size(); ++i)
        if (steps[i] >= margin && steps[i] <= max_step - margin) sites.push_back(i);

    CircleEmbeddingReport report;
    std::vector<AlignedPattern> aligned;
    aligned.reserve(sites.size());
    for (const auto s : sites) aligned.push_back(align_at(p, s));
    for (std::size_t a = 0; a < sites.size(); ++a) {
        for (std::size_t b = a + 1; b < sites.size(); ++b) {
            CirclePairSample sample;
            sample.site_m = sites[a];
            sample.site_n = sites[b];
            sample.circle_distance =
                circle_distance(double(steps[sites[a]] - steps[sites[b]]) * spec.angle);
            sample.window_distance =
                window_distance(aligned[a].pattern, aligned[b].pattern, params);
            report.pairs.push_back(sample);
        }
    }
    if (report.pairs.empty()) return report;

    std::vector<double> circ;
    circ.reserve(report.pairs.size());
    for (const auto& s : report.pairs) circ.push_back(s.circle_distance);
    std::sort(circ.begin(), circ.end());
    report.decile_circle_cutoff = circ[circ.size() / 10];

    double slope = 0.0;
    for (const auto& s : report.pairs)
        if (s.circle_distance > 0.0 && s.circle_distance <= report.decile_circle_cutoff)
            slope = std::max(slope, s.window_distance / s.circle_distance);
    report.fitted_slope = slope;

    // Allow slack of 2x the fitted modulus when flagging.
    for (const auto& s : report.pairs)
        if (s.circle_distance <= report.decile_circle_cutoff &&
            s.window_distance > 2.0 * slope * std::max(s.circle_distance,
                                                       report.decile_circle_cutoff * 0.01))
            report.consistent = false;
    return report;
}

} // namespace patternlab
