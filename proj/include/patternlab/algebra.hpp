#pragma once

#include "patternlab/pattern.hpp"

#include <complex>
#include <functional>
#include <vector>

namespace patternlab {

using ComplexMatrix = Eigen::MatrixXcd;

/// Compactly supported M_N-valued kernel f(g, L) on the canonical groupoid:
/// the algebra element. `evaluate` must be pure, reentrant, and return the
/// zero matrix whenever d(g, e) > coupling_range.
struct CouplingKernel {
    int n_dof = 1;
    double coupling_range = 0.0;
    GroupMetricParams metric{};
    std::function<ComplexMatrix(const Isometry& g, const Pattern& L)> evaluate;
};

/// Data-driven kernel: finite list of (g, matrix) samples matched by nearest
/// group distance within `match_tolerance`; zero elsewhere. Ignores the
/// pattern argument, which is exact for crystal couplings.
struct TabulatedKernel {
    int n_dof = 1;
    double coupling_range = 0.0;
    double match_tolerance = 1e-6;
    GroupMetricParams metric{};
    std::vector<std::pair<Isometry, ComplexMatrix>> entries;

    /// Appends missing (g^{-1}, m^dagger) pairs so the kernel is hermitian as
    /// an algebra element.
    void close_hermitian();

    CouplingKernel kernel() const;
};

/// Finite surrogate for an element of the core algebra: a kernel together
/// with the transversal points it acts on.
struct AlgebraElementSample {
    CouplingKernel kernel;
    std::vector<Pattern> transversal_sample; // each contains the identity
};

struct NormEstimate {
    double value = 0.0;
    std::vector<std::pair<double, double>> table; // (window size, max norm over sample)
};

/// Unit of the algebra: delta_e(g, L) = 1{g = e} I_N.
CouplingKernel delta_kernel(int n_dof);

CouplingKernel scale_kernel(std::complex<double> c, const CouplingKernel& f);

/// (f1 * f2)(g, L) = sum_{g' in L} f1(g'.(g, L)) f2(g', L), with
/// g'.(g, L) = (g g'^{-1}, g'.L). Support range adds.
CouplingKernel convolve(const CouplingKernel& f1, const CouplingKernel& f2);

/// f*(g, L) = f(g^{-1}, g.L)^dagger.
CouplingKernel star(const CouplingKernel& f);

/// Restriction map (rho f)(L) = f(e, L); L must contain the identity.
ComplexMatrix restriction(const CouplingKernel& f, const Pattern& L);

/// <f1|f2>(L) = sum_{g in L} f1(g, L)^dagger f2(g, L); conjugate-linear in
/// the first slot, so <f1|f2> = rho(f1* . f2).
ComplexMatrix inner_product(const CouplingKernel& f1, const CouplingKernel& f2, const Pattern& L);

/// Left-regular representation matrix on l^2(L, C^N): block (row x, col x')
/// = f(x x'^{-1}, x'.L). L must contain the identity.
ComplexMatrix left_regular_matrix(const CouplingKernel& f, const Pattern& L);

/// Operator norm (largest singular value).
double operator_norm(const ComplexMatrix& m);

/// Max over sampled transversal points of the operator norm of the truncated
/// left-regular matrix, per window size. `value` is taken at the largest
/// window.
NormEstimate norm_estimate(const AlgebraElementSample& sample,
                           const std::vector<double>& window_sizes);

/// Radius around the identity on which convolution values are free of window
/// truncation: trust_radius(L) - range(f1) - range(f2).
double convolution_trusted_radius(const Pattern& L, const CouplingKernel& f1,
                                  const CouplingKernel& f2);

void to_json(nlohmann::json& j, const TabulatedKernel& k);
void from_json(const nlohmann::json& j, TabulatedKernel& k);

} // namespace patternlab
