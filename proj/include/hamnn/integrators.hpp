#pragma once

#include <functional>
#include <string>
#include <vector>

namespace hamnn {

// Point in phase space.
struct PhaseState {
  std::vector<double> q;
  std::vector<double> p;
  double t = 0.0;
};

// Separable system H(q, p) = T(p) + V(q), given through its derivatives and
// total energy. Construction spot-checks the energy against the supplied
// derivatives by central differences (tolerance 1e-6) and throws
// std::invalid_argument on disagreement.
class SeparableHamiltonian {
 public:
  using VecFn = std::function<std::vector<double>(const std::vector<double>&)>;
  using EnergyFn = std::function<double(const std::vector<double>&, const std::vector<double>&)>;

  SeparableHamiltonian(std::size_t dim, VecFn dT_dp, VecFn dV_dq, EnergyFn energy);

  std::size_t dim() const { return dim_; }
  std::vector<double> dT_dp(const std::vector<double>& p) const { return dT_dp_(p); }
  std::vector<double> dV_dq(const std::vector<double>& q) const { return dV_dq_(q); }
  double energy(const std::vector<double>& q, const std::vector<double>& p) const {
    return energy_(q, p);
  }

 private:
  std::size_t dim_;
  VecFn dT_dp_;
  VecFn dV_dq_;
  EnergyFn energy_;
};

// H = (p^2 + q^2) / 2, one degree of freedom.
SeparableHamiltonian harmonic_oscillator();
// H = p^2 / 2 + (1 - cos q), one degree of freedom.
SeparableHamiltonian pendulum();

enum class Integrator { ExplicitEuler, SymplecticEuler, Leapfrog, ForestRuth };

// Sign of the position drift in the first-order symplectic step. Negative
// subtracts dt * dT_dp instead of adding it; kept for side-by-side study,
// it destroys the method's area preservation on H = T + V.
enum class DriftSign { Positive, Negative };

// p' = p - dt * dV_dq(q); q' = q + dt * dT_dp(p)  (old momentum, not symplectic).
PhaseState explicit_euler_step(const SeparableHamiltonian& sys, const PhaseState& s, double dt);

// Momentum first, then position with the updated momentum:
// p' = p - dt * dV_dq(q); q' = q + sign * dt * dT_dp(p').
PhaseState symplectic_euler_step(const SeparableHamiltonian& sys, const PhaseState& s, double dt,
                                 DriftSign drift = DriftSign::Positive);

// Half-kick / drift / half-kick (Stormer-Verlet).
PhaseState leapfrog_step(const SeparableHamiltonian& sys, const PhaseState& s, double dt);

// Fourth-order triple-jump composition of leapfrog with inner coefficients
// (w, 1 - 2w, w), w = 1 / (2 - 2^(1/3)).
PhaseState forest_ruth_step(const SeparableHamiltonian& sys, const PhaseState& s, double dt);

struct Trajectory {
  std::vector<PhaseState> states;
  std::vector<double> energies;
  double dt = 0.0;
};

Trajectory integrate(const SeparableHamiltonian& sys, const PhaseState& s0, double dt,
                     std::size_t n_steps, Integrator kind,
                     DriftSign drift = DriftSign::Positive);

struct DriftStats {
  double max_abs_deviation = 0.0;  // max |H(t) - H(0)|
  double linear_drift_rate = 0.0;  // least-squares slope of H(t)
};

// Throws std::invalid_argument on an empty trajectory.
DriftStats energy_drift(const Trajectory& traj);

// CSV with header "t,q0,...,p0,...,H".
void export_trajectory_csv(const Trajectory& traj, const std::string& path);

}  // namespace hamnn
