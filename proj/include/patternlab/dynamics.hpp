#pragma once

#include "patternlab/algebra.hpp"
#include "patternlab/coupling.hpp"
#include "patternlab/pattern.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace patternlab {

/// Dense self-adjoint dynamical matrix on l^2(L, C^N).
/// Row index = site * n_dof + dof. The interior mask marks sites at least a
/// coupling range away from the window boundary; bulk-property tests use it
/// to suppress edge modes.
struct DynamicalMatrix {
    Pattern pattern;
    int n_dof = 1;
    double coupling_range = 0.0; // spatial support of the couplings
    ComplexMatrix matrix;
    std::vector<bool> interior;
    bool symmetrized = false;

    Eigen::Index rows() const { return matrix.rows(); }
    Eigen::Index index_of(std::size_t site, int dof) const {
        return static_cast<Eigen::Index>(site) * n_dof + dof;
    }
};

struct AssembleOptions {
    bool symmetrize = false;        // accept non-hermitian kernels by averaging
    double hermiticity_tol = 1e-9;  // relative deviation treated as rounding noise
};

struct NonHermitianKernel : std::runtime_error {
    explicit NonHermitianKernel(double dev)
        : std::runtime_error("kernel is not hermitian as an algebra element"), deviation(dev) {}
    double deviation;
};

struct SpectrumResult {
    Eigen::VectorXd eigenvalues; // ascending
    std::optional<ComplexMatrix> eigenvectors;
    bool interior_filtered = false;
    double max_residual = 0.0; // ||D v - lambda v|| over ||D||, when vectors computed
};

struct ResponseResult {
    Eigen::VectorXcd xi;
    double residual = 0.0;
};

struct Resonant : std::runtime_error {
    explicit Resonant(double distance)
        : std::runtime_error("drive frequency is resonant"), eigenvalue_distance(distance) {}
    double eigenvalue_distance;
};

struct BandProjection {
    double gap_lo = 0.0;
    double gap_hi = 0.0;
    ComplexMatrix projector;
    Eigen::Index rank = 0;
};

struct GapViolation : std::runtime_error {
    explicit GapViolation(double eigenvalue)
        : std::runtime_error("eigenvalue touches the gap boundary"), eigenvalue(eigenvalue) {}
    double eigenvalue;
};

/// D block (x, x') = f(x' x^{-1}, x.L); hermitian kernels give a hermitian
/// matrix, enforced exactly by mirroring once the raw deviation is at
/// rounding level.
DynamicalMatrix assemble(const CouplingKernel& k, const Pattern& p,
                         const AssembleOptions& options = {});

/// Direct route D = sum_{x,x'} M^{-1/2} W_{x,x'} M^{-1/2} (x) |x><x'|,
/// bypassing the kernel machinery. Equals assemble(reduce(w), w.pattern).
DynamicalMatrix assemble_from_couplings(const CouplingMatrixSet& w, const SeedResonator& seed);

/// Left-regular representation matrix of the kernel at a transversal point:
/// entry (g', g) = f(g' g^{-1}, g.L). For hermitian kernels this equals
/// assemble entrywise.
DynamicalMatrix represent(const CouplingKernel& k, const Pattern& p);

SpectrumResult spectrum(const DynamicalMatrix& d, bool want_eigenvectors = false);

/// Groups of consecutive eigenvalues within the degeneracy tolerance,
/// reported as (first index, multiplicity).
std::vector<std::pair<Eigen::Index, int>> degeneracy_groups(const SpectrumResult& s,
                                                            double tol = 1e-9);

/// Eigenvalues whose eigenvectors carry at least `min_weight` of their mass
/// on interior sites.
SpectrumResult interior_spectrum(const DynamicalMatrix& d, double min_weight = 0.5);

/// Solves (D - omega^2 I) xi = (M0^{-1/2} (x) I) f.
ResponseResult respond(const DynamicalMatrix& d, const SeedResonator& seed,
                       const Eigen::VectorXcd& drive, double omega,
                       double resonance_tol = 1e-8);

/// Spectral projector onto eigenvalues strictly inside (a, b).
BandProjection band_projection(const SpectrumResult& s, double a, double b,
                               double boundary_tol = 1e-8);

struct SweepSpec {
    std::string parameter_name = "param";
    std::vector<double> values;                       // nonempty, sorted
    std::function<DynamicalMatrix(double)> build;     // pattern + kernel factory
    int workers = 1;
};

struct SweepRow {
    double parameter = 0.0;
    Eigen::Index index = 0;
    double eigenvalue = 0.0;
};

struct SweepResult {
    std::vector<SweepRow> rows; // grid order, then index
    std::vector<std::pair<double, std::string>> failures;
};

/// Per-point failures are recorded and the sweep continues; rows merge in
/// grid order regardless of scheduling.
SweepResult sweep(const SweepSpec& spec);

} // namespace patternlab
