#pragma once

#include "patternlab/pattern.hpp"
#include "patternlab/transversal.hpp"

#include <vector>

namespace patternlab {

/// Element (g, L) of the canonical groupoid of a pattern, with g in L.
/// Carries a full pattern value: finite windows drift under translation, so
/// canonicalization is deferred to transversal clustering.
struct GroupoidElement {
    Isometry g;
    Pattern pattern;
};

struct NotComposable : std::runtime_error {
    explicit NotComposable(double mismatch)
        : std::runtime_error("groupoid elements are not composable"), mismatch(mismatch) {}
    double mismatch = 0.0;
};

/// Tolerance and comparison window for the composability test L' = g.L.
struct ComposabilityParams {
    WindowMetricParams window{};
    double tolerance = kGroupEqTol;
};

GroupoidElement make_element(const Isometry& g, const Pattern& pattern,
                             double membership_tol = kGroupEqTol);

/// s(g, L) = (e, L).
GroupoidElement source(const GroupoidElement& e);

/// r(g, L) = (e, g.L).
GroupoidElement range(const GroupoidElement& e);

/// (g, L)^{-1} = (g^{-1}, g.L).
GroupoidElement invert(const GroupoidElement& e);

/// (g', L') . (g, L) = (g' g, L), defined when L' = g.L.
GroupoidElement compose_elements(const GroupoidElement& a, const GroupoidElement& b,
                                 const ComposabilityParams& params);

/// Elements (g, p) with g in p and d(g, e) <= coupling_range; p must contain
/// the identity. Discreteness of the fiber is the etale property.
std::vector<GroupoidElement> range_fiber(const Pattern& p, double coupling_range,
                                         const GroupMetricParams& metric = {});

// debugging export
void to_json(nlohmann::json& j, const GroupoidElement& e);

} // namespace patternlab
