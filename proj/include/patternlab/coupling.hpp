#pragma once

#include "patternlab/algebra.hpp"
#include "patternlab/pattern.hpp"

#include <map>
#include <memory>
#include <vector>

namespace patternlab {

struct Dipole {
    Eigen::Vector3d offset = Eigen::Vector3d::Zero(); // seed-frame position, z = 0 for d = 2
    Eigen::Vector3d moment = Eigen::Vector3d::Zero(); // pseudo-vector
};

/// The reference resonator. Every site is a rigid copy positioned by an
/// isometry; displacements live in the rigid-body chart (dx, dy, dphi) for
/// d = 2 and (dv, axis-angle) for d = 3, restricted to the active dofs.
struct SeedResonator {
    int dim = 2;
    Eigen::MatrixXd mass;      // n_dof x n_dof, symmetric positive definite
    Eigen::MatrixXd stiffness; // n_dof x n_dof, symmetric positive definite (on-site V0)
    std::vector<Dipole> dipoles;
    std::vector<bool> active_dofs; // chart mask, size 3 (d=2) or 6 (d=3)

    int chart_size() const { return dim == 2 ? 3 : 6; }
    int n_dof() const;
    void validate() const;
};

/// Displacement isometry for an active-dof vector q under the seed's chart.
Isometry seed_displacement(const SeedResonator& seed, const Eigen::VectorXd& q);

/// Frame of the resonator labeled x displaced by q, in lab coordinates.
/// Labels transform by the right action while displacements post-compose the
/// frame, which is what makes pair energies depend only on relative data.
Isometry displaced_frame(const SeedResonator& seed, const Isometry& x, const Eigen::VectorXd& q);

/// Pairwise-additive coupling energy between two displaced resonators.
class PairPotential {
  public:
    virtual ~PairPotential() = default;
    virtual double energy(const Isometry& x, const Isometry& xp, const Eigen::VectorXd& q,
                          const Eigen::VectorXd& qp) const = 0;
    /// Hard support cutoff in group distance of the pair quotient.
    virtual double range() const = 0;
};

/// Closed-form point-dipole interaction, summed over moment pairs, with
/// moments rotated by the site orientations acting on pseudo-vectors.
/// Valid at separations large against the resonator size.
class DipolePotential final : public PairPotential {
  public:
    DipolePotential(const SeedResonator& seed, double coupling_range, double strength = 1.0);

    double energy(const Isometry& x, const Isometry& xp, const Eigen::VectorXd& q,
                  const Eigen::VectorXd& qp) const override;
    double range() const override { return range_; }

  private:
    SeedResonator seed_;
    double range_;
    double strength_;
};

/// Equivariance-breaking wrapper for tests: adds a lab-frame field term that
/// couples the displacement to the absolute site position.
class BrokenDipolePotential final : public PairPotential {
  public:
    BrokenDipolePotential(const SeedResonator& seed, double coupling_range, double strength,
                          double field_strength, const Eigen::Vector3d& field_wavevector);

    double energy(const Isometry& x, const Isometry& xp, const Eigen::VectorXd& q,
                  const Eigen::VectorXd& qp) const override;
    double range() const override { return base_.range(); }

  private:
    DipolePotential base_;
    SeedResonator seed_;
    double field_strength_;
    Eigen::Vector3d field_wavevector_;
};

/// Measured-coupling stand-in: quadratic pair energy with a tabulated
/// 2N x 2N stiffness block per relative isometry, matched by nearest group
/// distance.
class TabulatedPairPotential final : public PairPotential {
  public:
    TabulatedPairPotential(int n_dof, double coupling_range, double match_tolerance,
                           std::vector<std::pair<Isometry, Eigen::MatrixXd>> entries);

    double energy(const Isometry& x, const Isometry& xp, const Eigen::VectorXd& q,
                  const Eigen::VectorXd& qp) const override;
    double range() const override { return range_; }

  private:
    int n_dof_;
    double range_;
    double match_tolerance_;
    std::vector<std::pair<Isometry, Eigen::MatrixXd>> entries_;
};

/// Energy of two dipole-fitted resonators (the sites must be distinct).
double dipole_pair_energy(const SeedResonator& seed, const Isometry& x, const Isometry& xp,
                          const Eigen::VectorXd& q, const Eigen::VectorXd& qp,
                          double strength = 1.0);

struct EquilibriumOptions {
    int max_iterations = 50;
    double gradient_tolerance = 1e-10;
    double trust_radius_factor = 0.2; // times nearest-neighbor distance
    double fd_step_factor = 1e-4;     // times characteristic length
    int workers = 1;                  // pair-stencil evaluation pool
};

struct NonConvergence : std::runtime_error {
    explicit NonConvergence(double grad_norm)
        : std::runtime_error("equilibration did not converge"), gradient_norm(grad_norm) {}
    double gradient_norm;
};

struct EscapedBasin : std::runtime_error {
    explicit EscapedBasin(double norm)
        : std::runtime_error("equilibrium escaped the trust region"), offset_norm(norm) {}
    double offset_norm;
};

/// Hessian blocks of the full potential at equilibrium: the coupling
/// matrices W_{x,x'} = delta_{x,x'} V0 + d^2 V / dq_x dq_x'.
struct CouplingMatrixSet {
    Pattern pattern;
    int n_dof = 0;
    double coupling_range = 0.0;
    std::vector<Eigen::VectorXd> equilibrium_offsets;
    std::map<std::pair<std::size_t, std::size_t>, Eigen::MatrixXd> blocks; // includes (i,i)
    double fd_error_estimate = 0.0;

    const Eigen::MatrixXd* block(std::size_t i, std::size_t j) const;
};

/// Damped Newton minimization of the total potential around q = 0.
std::vector<Eigen::VectorXd> find_equilibrium(const Pattern& p, const SeedResonator& seed,
                                              const PairPotential& pot,
                                              const EquilibriumOptions& opts = {});

CouplingMatrixSet coupling_matrices(const Pattern& p, const SeedResonator& seed,
                                    const PairPotential& pot,
                                    const EquilibriumOptions& opts = {});

/// Reduced kernel w = M0^{-1/2} W M0^{-1/2} in groupoid form
/// f(g, L) = w_{e,g}(L), defined on right-translates of the base pattern.
CouplingKernel reduce(const CouplingMatrixSet& w, const SeedResonator& seed);

/// Two-argument coupling map (x, x', L) -> W block, for equivariance checks.
using PairCoupling =
    std::function<Eigen::MatrixXd(const Isometry& x, const Isometry& xp, const Pattern& L)>;

PairCoupling coupling_from_potential(const SeedResonator& seed,
                                     std::shared_ptr<const PairPotential> pot,
                                     const EquilibriumOptions& opts = {});

/// Max over random motions g and stored bonds of
/// || W_{g.x, g.x'}(g.L) - W_{x,x'}(L) ||_inf.
double check_equivariance(const PairCoupling& w, const Pattern& p, int trials,
                          std::uint64_t rng_seed = 0);

Eigen::MatrixXd matrix_inverse_sqrt(const Eigen::MatrixXd& spd);

void to_json(nlohmann::json& j, const SeedResonator& s);
void from_json(const nlohmann::json& j, SeedResonator& s);

} // namespace patternlab
