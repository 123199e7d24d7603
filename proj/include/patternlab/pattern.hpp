#pragma once

#include "patternlab/isometry.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace patternlab {

/// Finite truncation window. A group element x belongs to the window with
/// center c when the right quotient q = x c^{-1} satisfies
/// ||trans(q)|| <= radius_translation and ||rot(q) - I||_HS <= radius_rotation.
/// The right-quotient form keeps membership invariant under simultaneous
/// right translation of points and center.
struct Window {
    double radius_translation = 0.0;
    double radius_rotation = 0.0;
    Isometry center = Isometry::identity(2);

    bool contains(const Isometry& x) const;

    /// Radius around the identity on which the window content is guaranteed
    /// complete: radius_translation - ||trans(center)||.
    double trust_radius() const;
};

struct WallpaperSpec {
    std::string group = "p2"; // p1 | p2 | p4
    Eigen::Vector2d a1 = {1.0, 0.0};
    Eigen::Vector2d a2 = {0.0, 1.0};
    Isometry seed_offset = Isometry::identity(2);
};

/// Quasiperiodic chain: point n = (n rot(n theta) t, rot(n theta)), n >= 0.
/// These labels are the inverse frames of resonators marching along a
/// straight line with a spin of theta per step; the right-translates of the
/// pattern form a circle family indexed by n theta mod 2 pi.
struct QuasiRotationSpec {
    Eigen::Vector2d translation = {1.0, 0.0};
    double angle = 0.0;
    /// Optional cap on n; window cuts apply either way.
    std::optional<long> max_steps;
};

struct DisorderedSpec {
    WallpaperSpec base;
    double epsilon_t = 0.0;
    double epsilon_angle = 0.0;
    std::uint64_t rng_seed = 0;
};

struct ExplicitSpec {
    std::vector<Isometry> points;
};

using GeneratorSpec = std::variant<WallpaperSpec, QuasiRotationSpec, DisorderedSpec, ExplicitSpec>;

/// Finite-window sample of an architecture L in Iso(E^d).
struct Pattern {
    int dim = 2;
    std::vector<Isometry> points;
    Window window;
    std::optional<GeneratorSpec> provenance;

    std::size_t size() const { return points.size(); }
    bool empty() const { return points.empty(); }

    /// Index of the point equal to the identity within tol, if any.
    std::optional<std::size_t> index_of_identity(double tol = kGroupEqTol) const;
};

/// Test set for separation/density checks (Delone classification).
/// BallTimesO: B_radius x O(d); quotient-set form B_{2 radius} x O(d).
/// ExplicitSet: union of group-metric balls of `radius` around the samples.
struct BallTimesOSpec {
    double radius = 0.0;
};
struct ExplicitSetSpec {
    std::vector<Isometry> sample;
    double radius = 0.0;
};
struct SeparationSpec {
    std::variant<BallTimesOSpec, ExplicitSetSpec> shape;
    GroupMetricParams metric{};
};

enum class PatternClass { UniformlySeparated, Delone, Neither };

struct SeparationResult {
    bool separated = true;
    std::optional<std::pair<std::size_t, std::size_t>> witness; // violating pair
};

Pattern generate(const GeneratorSpec& spec, const Window& window);

/// Pointwise right translation x -> x g^{-1}; window recentered by the same motion.
Pattern translate_pattern(const Isometry& g, const Pattern& p);

/// Pairwise quotient-set reduction of |L ∩ g·S| <= 1 for all g:
/// L is S-separated iff no distinct x, y in L have x y^{-1} in S S^{-1} \ {e}.
SeparationResult is_separated(const Pattern& p, const SeparationSpec& u);

/// Grid search over g (boundary-safe) for |L ∩ g·K| >= 1 for all g.
bool is_relatively_dense(const Pattern& p, const SeparationSpec& k);

PatternClass classify(const Pattern& p, const SeparationSpec& u, const SeparationSpec& k);

/// Largest rho such that the pattern is (B_rho x O(d))-separated, i.e. half
/// the minimal pairwise ||trans(x y^{-1})||. Zero for patterns with colliding
/// quotient translations; nullopt for patterns with fewer than two points.
std::optional<double> largest_separating_ball_radius(const Pattern& p);

/// Largest rho certifying separation by the group-metric ball around e.
std::optional<double> largest_separating_group_ball_radius(const Pattern& p,
                                                           const GroupMetricParams& m = {});

const char* to_string(PatternClass c);

void to_json(nlohmann::json& j, const Window& w);
void from_json(const nlohmann::json& j, Window& w);
void to_json(nlohmann::json& j, const GeneratorSpec& s);
void from_json(const nlohmann::json& j, GeneratorSpec& s);
void to_json(nlohmann::json& j, const Pattern& p);
void from_json(const nlohmann::json& j, Pattern& p);
void to_json(nlohmann::json& j, const SeparationSpec& s);
void from_json(const nlohmann::json& j, SeparationSpec& s);

} // namespace patternlab
