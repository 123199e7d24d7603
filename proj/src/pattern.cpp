#include "patternlab/pattern.hpp"

#include "patternlab/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace patternlab {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

Isometry right_quotient(const Isometry& x, const Isometry& y) {
    return compose(x, inverse(y));
}

bool contains_duplicate(const std::vector<Isometry>& pts, const Isometry& x) {
    for (const auto& p : pts)
        if (approx_equal(p, x)) return true;
    return false;
}

std::vector<Isometry> point_group(const std::string& group) {
    if (group == "p1") return {Isometry::identity(2)};
    if (group == "p2") return {Isometry::identity(2), Isometry::rotation2d(kTwoPi / 2)};
    if (group == "p4")
        return {Isometry::identity(2), Isometry::rotation2d(kTwoPi / 4),
                Isometry::rotation2d(kTwoPi / 2), Isometry::rotation2d(3 * kTwoPi / 4)};
    throw std::invalid_argument("wallpaper group must be p1, p2 or p4");
}

long lattice_extent(const WallpaperSpec& w, const Window& window) {
    Eigen::Matrix2d a;
    a.col(0) = w.a1;
    a.col(1) = w.a2;
    Eigen::JacobiSVD<Eigen::Matrix2d> svd(a);
    const double smin = svd.singularValues()(1);
    if (smin <= 1e-12) throw std::invalid_argument("lattice vectors are linearly dependent");
    const double reach = window.radius_translation + window.center.trans3().norm() +
                         w.seed_offset.trans3().norm();
    return static_cast<long>(std::ceil(reach / smin)) + 2;
}

// Resonator frames are the orbit gamma . seed_offset of the wallpaper group;
// the pattern stores the inverse isometries. Under the right action the
// labels then move the way rigidly handled frames do, and the translation
// part of a pairwise quotient x y^{-1} is exactly the distance between the
// physical resonator centers.
void append_wallpaper_points(const WallpaperSpec& spec, const Window& window, double eps_t,
                             double eps_angle, std::uint64_t seed, bool disordered,
                             std::vector<Isometry>& out) {
    const auto rotations = point_group(spec.group);
    const long extent = lattice_extent(spec, window);
    for (long m = -extent; m <= extent; ++m) {
        for (long n = -extent; n <= extent; ++n) {
            const Eigen::Vector2d t = double(m) * spec.a1 + double(n) * spec.a2;
            for (std::size_t s = 0; s < rotations.size(); ++s) {
                Isometry gamma = compose(Isometry::translation(t), rotations[s]);
                Isometry frame = compose(gamma, spec.seed_offset);
                if (disordered) {
                    CounterRng rng(seed, lattice_key(m, n, static_cast<long>(s)));
                    const double radius = eps_t * std::sqrt(rng.next_double());
                    const double phi = rng.uniform(0.0, kTwoPi);
                    const double dalpha = rng.uniform(-eps_angle, eps_angle);
                    Eigen::Vector2d dt{radius * std::cos(phi), radius * std::sin(phi)};
                    Isometry wobble =
                        compose(Isometry::translation(dt), Isometry::rotation2d(dalpha));
                    frame = compose(frame, wobble);
                }
                const Isometry x = inverse(frame);
                if (window.contains(x) && !contains_duplicate(out, x)) out.push_back(x);
            }
        }
    }
}

void append_quasirotation_points(const QuasiRotationSpec& spec, const Window& window,
                                 std::vector<Isometry>& out) {
    const double step_len = spec.translation.norm();
    if (step_len <= 0.0) throw std::invalid_argument("quasirotation translation must be nonzero");
    const double reach = window.radius_translation + window.center.trans3().norm();
    long n_max = static_cast<long>(std::floor(reach / step_len)) + 1;
    if (spec.max_steps) n_max = std::min(n_max, *spec.max_steps);
    for (long n = 0; n <= n_max; ++n) {
        const Isometry rot = Isometry::rotation2d(double(n) * spec.angle);
        const Eigen::Vector2d v = double(n) * (rot.rotation() * spec.translation);
        const Isometry x = Isometry::from_parts(rot.rotation(), v);
        if (window.contains(x) && !contains_duplicate(out, x)) out.push_back(x);
    }
}

} // namespace

bool Window::contains(const Isometry& x) const {
    if (x.dim() != center.dim()) throw std::invalid_argument("window/point dimension mismatch");
    const Isometry q = compose(x, inverse(center));
    return q.trans3().norm() <= radius_translation &&
           (q.rot3() - Eigen::Matrix3d::Identity()).norm() <= radius_rotation;
}

double Window::trust_radius() const {
    return radius_translation - center.trans3().norm();
}

std::optional<std::size_t> Pattern::index_of_identity(double tol) const {
    for (std::size_t i = 0; i < points.size(); ++i)
        if (points[i].is_identity(tol)) return i;
    return std::nullopt;
}

Pattern generate(const GeneratorSpec& spec, const Window& window) {
    if (window.radius_translation <= 0.0 || window.radius_rotation <= 0.0)
        throw std::invalid_argument("window radii must be positive");
    Pattern p;
    p.window = window;
    p.provenance = spec;
    if (std::holds_alternative<WallpaperSpec>(spec)) {
        const auto& w = std::get<WallpaperSpec>(spec);
        p.dim = 2;
        append_wallpaper_points(w, window, 0.0, 0.0, 0, false, p.points);
    } else if (std::holds_alternative<QuasiRotationSpec>(spec)) {
        p.dim = 2;
        append_quasirotation_points(std::get<QuasiRotationSpec>(spec), window, p.points);
    } else if (std::holds_alternative<DisorderedSpec>(spec)) {
        const auto& d = std::get<DisorderedSpec>(spec);
        if (d.epsilon_t < 0.0 || d.epsilon_angle < 0.0)
            throw std::invalid_argument("disorder amplitudes must be nonnegative");
        p.dim = 2;
        append_wallpaper_points(d.base, window, d.epsilon_t, d.epsilon_angle, d.rng_seed, true,
                                p.points);
    } else {
        const auto& e = std::get<ExplicitSpec>(spec);
        p.dim = e.points.empty() ? window.center.dim() : e.points.front().dim();
        for (const auto& x : e.points) {
            if (x.dim() != p.dim) throw std::invalid_argument("explicit points mix dimensions");
            if (window.contains(x) && !contains_duplicate(p.points, x)) p.points.push_back(x);
        }
    }
    return p;
}

Pattern translate_pattern(const Isometry& g, const Pattern& p) {
    Pattern out;
    out.dim = p.dim;
    out.provenance = p.provenance;
    out.window = p.window;
    out.window.center = right_translate(g, p.window.center);
    out.points.reserve(p.points.size());
    for (const auto& x : p.points) out.points.push_back(right_translate(g, x));
    return out;
}

namespace {

bool quotient_in_test_set(const Isometry& q, const SeparationSpec& s) {
    if (std::holds_alternative<BallTimesOSpec>(s.shape)) {
        const double rho = std::get<BallTimesOSpec>(s.shape).radius;
        return q.trans3().norm() < 2.0 * rho;
    }
    const auto& e = std::get<ExplicitSetSpec>(s.shape);
    for (const auto& si : e.sample)
        for (const auto& sj : e.sample)
            if (group_distance(q, compose(si, inverse(sj)), s.metric) < 2.0 * e.radius)
                return true;
    return false;
}

double spec_radius(const SeparationSpec& s) {
    if (std::holds_alternative<BallTimesOSpec>(s.shape))
        return std::get<BallTimesOSpec>(s.shape).radius;
    return std::get<ExplicitSetSpec>(s.shape).radius;
}

double spec_reach(const SeparationSpec& s) {
    if (std::holds_alternative<BallTimesOSpec>(s.shape))
        return std::get<BallTimesOSpec>(s.shape).radius;
    const auto& e = std::get<ExplicitSetSpec>(s.shape);
    double reach = e.radius;
    for (const auto& si : e.sample)
        reach = std::max(reach, distance_to_identity(si, s.metric) + e.radius);
    return reach;
}

} // namespace

SeparationResult is_separated(const Pattern& p, const SeparationSpec& u) {
    if (p.empty()) throw std::invalid_argument("is_separated: empty pattern");
    if (spec_radius(u) <= 0.0) throw std::invalid_argument("separation radius must be positive");
    for (std::size_t i = 0; i < p.points.size(); ++i) {
        for (std::size_t j = i + 1; j < p.points.size(); ++j) {
            const Isometry q = right_quotient(p.points[i], p.points[j]);
            if (quotient_in_test_set(q, u)) return {false, std::make_pair(i, j)};
        }
    }
    return {true, std::nullopt};
}

bool is_relatively_dense(const Pattern& p, const SeparationSpec& k) {
    if (p.empty()) return false;
    const double radius = spec_radius(k);
    if (radius <= 0.0) throw std::invalid_argument("density radius must be positive");
    const double reach = spec_reach(k);
    const double box = p.window.trust_radius() - reach;
    if (box <= 0.0) return true; // no boundary-safe test points; vacuous
    const double spacing = radius / 4.0;
    const long cells = static_cast<long>(std::floor(box / spacing));
    const int d = p.dim;

    if (std::holds_alternative<BallTimesOSpec>(k.shape)) {
        // x g in B_R x O(d)  <=>  v_g within R of -r_x^{-1} v_x; rotation free.
        std::vector<Eigen::Vector3d> centers;
        centers.reserve(p.points.size());
        for (const auto& x : p.points)
            centers.push_back(-(x.rot3().transpose() * x.trans3()));
        auto grid_ok = [&](const Eigen::Vector3d& vg) {
            if (vg.norm() > box) return true; // outside boundary-safe region
            for (const auto& c : centers)
                if ((vg - c).norm() <= radius) return true;
            return false;
        };
        for (long i = -cells; i <= cells; ++i)
            for (long j = -cells; j <= cells; ++j) {
                if (d == 2) {
                    if (!grid_ok({i * spacing, j * spacing, 0.0})) return false;
                } else {
                    for (long l = -cells; l <= cells; ++l)
                        if (!grid_ok({i * spacing, j * spacing, l * spacing})) return false;
                }
            }
        return true;
    }

    // Explicit set: sweep translations x rotations of g, testing
    // min_x min_i d(x g, s_i) <= radius.
    const auto& es = std::get<ExplicitSetSpec>(k.shape);
    if (es.sample.empty()) throw std::invalid_argument("explicit separation set needs samples");
    std::vector<Isometry> rotations;
    const double angle_step = std::min(radius / (4.0 * std::max(k.metric.rotation_weight, 1e-9) *
                                                 std::sqrt(2.0)),
                                       kTwoPi / 8.0);
    const int n_angles = std::max(8, static_cast<int>(std::ceil(kTwoPi / angle_step)));
    if (d == 2) {
        for (int a = 0; a < n_angles; ++a) {
            rotations.push_back(Isometry::rotation2d(kTwoPi * a / n_angles));
            rotations.push_back(Isometry::reflection2d(kTwoPi * a / n_angles / 2.0));
        }
    } else {
        // Coarse O(3) sweep over a fixed axis set; adequate for the window
        // scales exercised here.
        const std::vector<Eigen::Vector3d> axes = {
            {1, 0, 0}, {0, 1, 0}, {0, 0, 1}, {1, 1, 1}, {1, -1, 0}, {0, 1, -1}};
        for (const auto& ax : axes)
            for (int a = 0; a < n_angles; ++a) {
                const Isometry r = Isometry::rotation3d(ax, kTwoPi * a / n_angles);
                rotations.push_back(r);
                Eigen::Matrix3d neg = -r.rotation();
                rotations.push_back(Isometry::from_parts(neg, Eigen::Vector3d::Zero()));
            }
    }
    auto g_ok = [&](const Isometry& g) {
        for (const auto& x : p.points) {
            const Isometry xg = compose(x, g);
            for (const auto& s : es.sample)
                if (group_distance(xg, s, k.metric) <= radius) return true;
        }
        return false;
    };
    for (long i = -cells; i <= cells; ++i)
        for (long j = -cells; j <= cells; ++j) {
            Eigen::VectorXd v(d);
            if (d == 2) {
                v << i * spacing, j * spacing;
                if (v.norm() > box) continue;
                for (const auto& r : rotations)
                    if (!g_ok(compose(Isometry::translation(v), r))) return false;
            } else {
                for (long l = -cells; l <= cells; ++l) {
                    v << i * spacing, j * spacing, l * spacing;
                    if (v.norm() > box) continue;
                    for (const auto& r : rotations)
                        if (!g_ok(compose(Isometry::translation(v), r))) return false;
                }
            }
        }
    return true;
}

PatternClass classify(const Pattern& p, const SeparationSpec& u, const SeparationSpec& k) {
    const bool sep = is_separated(p, u).separated;
    const bool dense = is_relatively_dense(p, k);
    if (sep && dense) return PatternClass::Delone;
    if (sep) return PatternClass::UniformlySeparated;
    return PatternClass::Neither;
}

std::optional<double> largest_separating_ball_radius(const Pattern& p) {
    if (p.size() < 2) return std::nullopt;
    double min_q = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < p.points.size(); ++i)
        for (std::size_t j = i + 1; j < p.points.size(); ++j)
            min_q = std::min(min_q,
                             right_quotient(p.points[i], p.points[j]).trans3().norm());
    return min_q / 2.0;
}

std::optional<double> largest_separating_group_ball_radius(const Pattern& p,
                                                           const GroupMetricParams& m) {
    if (p.size() < 2) return std::nullopt;
    double min_q = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < p.points.size(); ++i)
        for (std::size_t j = i + 1; j < p.points.size(); ++j)
            min_q = std::min(min_q, distance_to_identity(
                                        right_quotient(p.points[i], p.points[j]), m));
    return min_q / 2.0;
}

const char* to_string(PatternClass c) {
    switch (c) {
        case PatternClass::UniformlySeparated: return "UniformlySeparated";
        case PatternClass::Delone: return "Delone";
        default: return "Neither";
    }
}

void to_json(nlohmann::json& j, const Window& w) {
    j = nlohmann::json{{"radius_translation", w.radius_translation},
                       {"radius_rotation", w.radius_rotation},
                       {"center", w.center}};
}

void from_json(const nlohmann::json& j, Window& w) {
    w.radius_translation = j.at("radius_translation").get<double>();
    w.radius_rotation = j.at("radius_rotation").get<double>();
    if (j.contains("center")) w.center = j.at("center").get<Isometry>();
}

void to_json(nlohmann::json& j, const GeneratorSpec& s) {
    if (std::holds_alternative<WallpaperSpec>(s)) {
        const auto& w = std::get<WallpaperSpec>(s);
        j = nlohmann::json{{"type", "wallpaper"},
                           {"group", w.group},
                           {"a1", {w.a1.x(), w.a1.y()}},
                           {"a2", {w.a2.x(), w.a2.y()}},
                           {"seed_offset", w.seed_offset}};
    } else if (std::holds_alternative<QuasiRotationSpec>(s)) {
        const auto& q = std::get<QuasiRotationSpec>(s);
        j = nlohmann::json{{"type", "quasirotation"},
                           {"translation", {q.translation.x(), q.translation.y()}},
                           {"angle", q.angle}};
        if (q.max_steps) j["max_steps"] = *q.max_steps;
    } else if (std::holds_alternative<DisorderedSpec>(s)) {
        const auto& d = std::get<DisorderedSpec>(s);
        nlohmann::json base;
        to_json(base, GeneratorSpec{d.base});
        base.erase("type");
        j = nlohmann::json{{"type", "disordered"},
                           {"base", base},
                           {"epsilon_t", d.epsilon_t},
                           {"epsilon_angle", d.epsilon_angle},
                           {"rng_seed", d.rng_seed}};
    } else {
        j = nlohmann::json{{"type", "explicit"}, {"points", std::get<ExplicitSpec>(s).points}};
    }
}

namespace {

WallpaperSpec wallpaper_from_json(const nlohmann::json& j) {
    WallpaperSpec w;
    w.group = j.at("group").get<std::string>();
    if (j.contains("a1")) w.a1 = {j["a1"].at(0).get<double>(), j["a1"].at(1).get<double>()};
    if (j.contains("a2")) w.a2 = {j["a2"].at(0).get<double>(), j["a2"].at(1).get<double>()};
    if (j.contains("seed_offset")) w.seed_offset = j.at("seed_offset").get<Isometry>();
    return w;
}

} // namespace

void from_json(const nlohmann::json& j, GeneratorSpec& s) {
    const std::string type = j.at("type").get<std::string>();
    if (type == "wallpaper") {
        s = wallpaper_from_json(j);
    } else if (type == "quasirotation") {
        QuasiRotationSpec q;
        q.translation = {j.at("translation").at(0).get<double>(),
                         j.at("translation").at(1).get<double>()};
        q.angle = j.at("angle").get<double>();
        if (j.contains("max_steps")) q.max_steps = j.at("max_steps").get<long>();
        s = q;
    } else if (type == "disordered") {
        DisorderedSpec d;
        d.base = wallpaper_from_json(j.at("base"));
        d.epsilon_t = j.at("epsilon_t").get<double>();
        d.epsilon_angle = j.at("epsilon_angle").get<double>();
        if (j.contains("rng_seed")) d.rng_seed = j.at("rng_seed").get<std::uint64_t>();
        s = d;
    } else if (type == "explicit") {
        ExplicitSpec e;
        for (const auto& pt : j.at("points")) e.points.push_back(pt.get<Isometry>());
        s = e;
    } else {
        throw std::invalid_argument("unknown generator type: " + type);
    }
}

void to_json(nlohmann::json& j, const Pattern& p) {
    j = nlohmann::json{{"dim", p.dim}, {"window", p.window}, {"points", p.points}};
    if (p.provenance) j["provenance"] = *p.provenance;
}

void from_json(const nlohmann::json& j, Pattern& p) {
    p.dim = j.at("dim").get<int>();
    p.window = j.at("window").get<Window>();
    p.points.clear();
    for (const auto& pt : j.at("points")) p.points.push_back(pt.get<Isometry>());
    if (j.contains("provenance")) p.provenance = j.at("provenance").get<GeneratorSpec>();
}

void to_json(nlohmann::json& j, const SeparationSpec& s) {
    if (std::holds_alternative<BallTimesOSpec>(s.shape)) {
        j = nlohmann::json{{"type", "ball_o"},
                           {"radius", std::get<BallTimesOSpec>(s.shape).radius}};
    } else {
        const auto& e = std::get<ExplicitSetSpec>(s.shape);
        j = nlohmann::json{{"type", "explicit"}, {"radius", e.radius}, {"sample", e.sample}};
    }
}

void from_json(const nlohmann::json& j, SeparationSpec& s) {
    const std::string type = j.at("type").get<std::string>();
    if (type == "ball_o") {
        s.shape = BallTimesOSpec{j.at("radius").get<double>()};
    } else if (type == "explicit") {
        ExplicitSetSpec e;
        e.radius = j.at("radius").get<double>();
        if (j.contains("sample"))
            for (const auto& pt : j.at("sample")) e.sample.push_back(pt.get<Isometry>());
        s.shape = e;
    } else {
        throw std::invalid_argument("unknown separation type: " + type);
    }
}

} // namespace patternlab
