#include "patternlab/groupoid.hpp"

namespace patternlab {

GroupoidElement make_element(const Isometry& g, const Pattern& pattern, double membership_tol) {
    for (const auto& x : pattern.points)
        if (group_distance(x, g) <= membership_tol) return {g, pattern};
    throw std::invalid_argument("groupoid element: g is not a point of the pattern");
}

GroupoidElement source(const GroupoidElement& e) {
    return {Isometry::identity(e.g.dim()), e.pattern};
}

GroupoidElement range(const GroupoidElement& e) {
    return {Isometry::identity(e.g.dim()), translate_pattern(e.g, e.pattern)};
}

GroupoidElement invert(const GroupoidElement& e) {
    return {inverse(e.g), translate_pattern(e.g, e.pattern)};
}

GroupoidElement compose_elements(const GroupoidElement& a, const GroupoidElement& b,
                                 const ComposabilityParams& params) {
    const Pattern translated = translate_pattern(b.g, b.pattern);
    const double mismatch = window_distance(a.pattern, translated, params.window);
    if (mismatch > params.tolerance) throw NotComposable(mismatch);
    return {compose(a.g, b.g), b.pattern};
}

std::vector<GroupoidElement> range_fiber(const Pattern& p, double coupling_range,
                                         const GroupMetricParams& metric) {
    if (!p.index_of_identity())
        throw std::invalid_argument("range_fiber: pattern does not contain the identity");
    std::vector<GroupoidElement> fiber;
    for (const auto& x : p.points)
        if (distance_to_identity(x, metric) <= coupling_range) fiber.push_back({x, p});
    return fiber;
}

void to_json(nlohmann::json& j, const GroupoidElement& e) {
    j = nlohmann::json{{"g", e.g}, {"pattern", e.pattern}};
}

} // namespace patternlab
