#pragma once

#include "patternlab/pattern.hpp"
#include "patternlab/rng.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <vector>

namespace patternlab::testing {

inline constexpr double kTwoPi = 6.283185307179586476925286766559;

inline Isometry random_isometry(CounterRng& rng, int dim, double translation_scale = 2.0) {
    Eigen::VectorXd v(dim);
    for (int i = 0; i < dim; ++i) v(i) = rng.uniform(-translation_scale, translation_scale);
    Isometry rot = Isometry::identity(dim);
    if (dim == 2) {
        rot = rng.next_double() < 0.5 ? Isometry::rotation2d(rng.uniform(0.0, kTwoPi))
                                      : Isometry::reflection2d(rng.uniform(0.0, kTwoPi));
    } else {
        Eigen::Vector3d axis{rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0),
                             rng.uniform(-1.0, 1.0)};
        if (axis.norm() < 1e-3) axis = {0, 0, 1};
        rot = Isometry::rotation3d(axis, rng.uniform(0.0, kTwoPi));
        if (rng.next_double() < 0.5)
            rot = Isometry::from_parts((-rot.rotation()).eval(), Eigen::Vector3d::Zero());
    }
    return compose(Isometry::translation(v), rot);
}

// Homogeneous-matrix oracle for the group arithmetic: an isometry acts as the
// 4x4 block [[r, v], [0, 1]], and composition is plain matrix multiplication.
inline Eigen::Matrix4d homogeneous(const Isometry& a) {
    Eigen::Matrix4d h = Eigen::Matrix4d::Identity();
    h.topLeftCorner<3, 3>() = a.rot3();
    h.topRightCorner<3, 1>() = a.trans3();
    return h;
}

inline double homogeneous_mismatch(const Isometry& a, const Eigen::Matrix4d& oracle) {
    return (homogeneous(a) - oracle).cwiseAbs().maxCoeff();
}

inline Pattern explicit_pattern(std::vector<Isometry> points, double radius_translation,
                                double radius_rotation = 4.0) {
    const int dim = points.empty() ? 2 : points.front().dim();
    Window w;
    w.radius_translation = radius_translation;
    w.radius_rotation = radius_rotation;
    w.center = Isometry::identity(dim);
    return generate(ExplicitSpec{std::move(points)}, w);
}

// Open 1D chain embedded in Iso(E^2): sites (n * spacing, 0) with identity
// orientation, site 0 at the origin.
inline Pattern chain_pattern(int sites, double spacing = 1.0) {
    std::vector<Isometry> pts;
    pts.reserve(sites);
    for (int n = 0; n < sites; ++n)
        pts.push_back(Isometry::translation(Eigen::Vector2d{n * spacing, 0.0}));
    return explicit_pattern(std::move(pts), sites * spacing + 5.0);
}

inline Pattern wallpaper_pattern(const std::string& group, double window_radius,
                                 const Eigen::Vector2d& seed_offset = {0.32, 0.14},
                                 double seed_angle = 0.0) {
    WallpaperSpec spec;
    spec.group = group;
    spec.seed_offset =
        compose(Isometry::translation(seed_offset), Isometry::rotation2d(seed_angle));
    Window w;
    w.radius_translation = window_radius;
    w.radius_rotation = 4.0;
    return generate(spec, w);
}

inline Pattern quasirotation_pattern(double angle, long max_steps,
                                     double window_extra = 200.0) {
    QuasiRotationSpec spec;
    spec.translation = {1.0, 0.0};
    spec.angle = angle;
    spec.max_steps = max_steps;
    Window w;
    w.radius_translation = double(max_steps) + window_extra;
    w.radius_rotation = 4.0;
    return generate(spec, w);
}

// Brute-force grid search over g for the separation test |L ∩ g·U| <= 1 with
// U = B_rho x O(d) and g·U = U g^{-1}: x in g·U iff ||trans(x g)|| < rho.
// The grid covers the aligned-center box and is enriched with all pair
// midpoints, which are exactly the motions that witness violations.
inline bool brute_force_separated(const Pattern& p, double rho) {
    std::vector<Eigen::Vector3d> aligned_centers;
    for (const auto& x : p.points)
        aligned_centers.push_back(-(x.rot3().transpose() * x.trans3()));

    std::vector<Eigen::Vector3d> grid;
    double extent = 0.0;
    for (const auto& c : aligned_centers) extent = std::max(extent, c.cwiseAbs().maxCoeff());
    extent += 2.0 * rho;
    const double spacing = rho / 4.0;
    const int cells = static_cast<int>(std::ceil(extent / spacing));
    const bool flat = p.dim == 2;
    for (int i = -cells; i <= cells; ++i)
        for (int j = -cells; j <= cells; ++j) {
            if (flat) {
                grid.push_back({i * spacing, j * spacing, 0.0});
            } else {
                for (int l = -cells; l <= cells; ++l)
                    grid.push_back({i * spacing, j * spacing, l * spacing});
            }
        }
    for (std::size_t i = 0; i < aligned_centers.size(); ++i)
        for (std::size_t j = i + 1; j < aligned_centers.size(); ++j)
            grid.push_back((aligned_centers[i] + aligned_centers[j]) / 2.0);

    for (const auto& vg : grid) {
        int count = 0;
        for (const auto& c : aligned_centers)
            if ((c - vg).norm() < rho) ++count; // ||trans(x g)|| = ||r_x^{-1} v_x + v_g||
        if (count >= 2) return false;
    }
    return true;
}

} // namespace patternlab::testing
