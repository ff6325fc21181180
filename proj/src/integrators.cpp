#include "hamnn/integrators.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "hamnn/errors.hpp"

namespace hamnn {

namespace {

// Probe points for the construction-time consistency check.
std::vector<double> probe_vector(std::size_t dim, double base) {
  std::vector<double> v(dim);
  for (std::size_t i = 0; i < dim; ++i) v[i] = base + 0.11 * static_cast<double>(i);
  return v;
}

}  // namespace

SeparableHamiltonian::SeparableHamiltonian(std::size_t dim, VecFn dT_dp, VecFn dV_dq,
                                           EnergyFn energy)
    : dim_(dim), dT_dp_(std::move(dT_dp)), dV_dq_(std::move(dV_dq)), energy_(std::move(energy)) {
  if (dim_ == 0) throw std::invalid_argument("SeparableHamiltonian: dim must be >= 1");
  const double h = 1e-6;
  const double tol = 1e-6;
  for (double base : {0.3, -0.7}) {
    std::vector<double> q = probe_vector(dim_, base);
    std::vector<double> p = probe_vector(dim_, base + 0.17);
    const std::vector<double> gp = dT_dp_(p);
    const std::vector<double> gq = dV_dq_(q);
    if (gp.size() != dim_ || gq.size() != dim_)
      throw std::invalid_argument("SeparableHamiltonian: derivative dimension mismatch");
    for (std::size_t i = 0; i < dim_; ++i) {
      std::vector<double> pp = p, pm = p;
      pp[i] += h;
      pm[i] -= h;
      const double fd_p = (energy_(q, pp) - energy_(q, pm)) / (2.0 * h);
      std::vector<double> qp = q, qm = q;
      qp[i] += h;
      qm[i] -= h;
      const double fd_q = (energy_(qp, p) - energy_(qm, p)) / (2.0 * h);
      const double err_p = std::fabs(fd_p - gp[i]) / std::max(1.0, std::fabs(gp[i]));
      const double err_q = std::fabs(fd_q - gq[i]) / std::max(1.0, std::fabs(gq[i]));
      if (err_p > tol || err_q > tol)
        throw std::invalid_argument(
            "SeparableHamiltonian: energy disagrees with the supplied derivatives");
    }
  }
}

SeparableHamiltonian harmonic_oscillator() {
  return SeparableHamiltonian(
      1, [](const std::vector<double>& p) { return p; },
      [](const std::vector<double>& q) { return q; },
      [](const std::vector<double>& q, const std::vector<double>& p) {
        return 0.5 * (q[0] * q[0] + p[0] * p[0]);
      });
}

SeparableHamiltonian pendulum() {
  return SeparableHamiltonian(
      1, [](const std::vector<double>& p) { return p; },
      [](const std::vector<double>& q) { return std::vector<double>{std::sin(q[0])}; },
      [](const std::vector<double>& q, const std::vector<double>& p) {
        return 0.5 * p[0] * p[0] + (1.0 - std::cos(q[0]));
      });
}

PhaseState explicit_euler_step(const SeparableHamiltonian& sys, const PhaseState& s, double dt) {
  PhaseState out = s;
  const std::vector<double> force = sys.dV_dq(s.q);
  const std::vector<double> vel = sys.dT_dp(s.p);  // old momentum
  for (std::size_t i = 0; i < sys.dim(); ++i) {
    out.p[i] = s.p[i] - dt * force[i];
    out.q[i] = s.q[i] + dt * vel[i];
  }
  out.t = s.t + dt;
  return out;
}

PhaseState symplectic_euler_step(const SeparableHamiltonian& sys, const PhaseState& s, double dt,
                                 DriftSign drift) {
  PhaseState out = s;
  const std::vector<double> force = sys.dV_dq(s.q);
  for (std::size_t i = 0; i < sys.dim(); ++i) out.p[i] = s.p[i] - dt * force[i];
  const std::vector<double> vel = sys.dT_dp(out.p);  // updated momentum
  const double sign = drift == DriftSign::Positive ? 1.0 : -1.0;
  for (std::size_t i = 0; i < sys.dim(); ++i) out.q[i] = s.q[i] + sign * dt * vel[i];
  out.t = s.t + dt;
  return out;
}

PhaseState leapfrog_step(const SeparableHamiltonian& sys, const PhaseState& s, double dt) {
  PhaseState out = s;
  const std::vector<double> force0 = sys.dV_dq(s.q);
  std::vector<double> p_half(sys.dim());
  for (std::size_t i = 0; i < sys.dim(); ++i) p_half[i] = s.p[i] - 0.5 * dt * force0[i];
  const std::vector<double> vel = sys.dT_dp(p_half);
  for (std::size_t i = 0; i < sys.dim(); ++i) out.q[i] = s.q[i] + dt * vel[i];
  const std::vector<double> force1 = sys.dV_dq(out.q);
  for (std::size_t i = 0; i < sys.dim(); ++i) out.p[i] = p_half[i] - 0.5 * dt * force1[i];
  out.t = s.t + dt;
  return out;
}

PhaseState forest_ruth_step(const SeparableHamiltonian& sys, const PhaseState& s, double dt) {
  // Triple jump: leapfrog(w*dt) o leapfrog((1-2w)*dt) o leapfrog(w*dt),
  // w = 1 / (2 - 2^(1/3)) ~ 1.351207191959658.
  static const double w = 1.0 / (2.0 - std::cbrt(2.0));
  PhaseState out = leapfrog_step(sys, s, w * dt);
  out = leapfrog_step(sys, out, (1.0 - 2.0 * w) * dt);
  out = leapfrog_step(sys, out, w * dt);
  out.t = s.t + dt;  // re-pin the time against sub-step rounding
  return out;
}

Trajectory integrate(const SeparableHamiltonian& sys, const PhaseState& s0, double dt,
                     std::size_t n_steps, Integrator kind, DriftSign drift) {
  Trajectory traj;
  traj.dt = dt;
  traj.states.reserve(n_steps + 1);
  traj.energies.reserve(n_steps + 1);
  traj.states.push_back(s0);
  traj.energies.push_back(sys.energy(s0.q, s0.p));
  PhaseState s = s0;
  for (std::size_t i = 0; i < n_steps; ++i) {
    switch (kind) {
      case Integrator::ExplicitEuler:
        s = explicit_euler_step(sys, s, dt);
        break;
      case Integrator::SymplecticEuler:
        s = symplectic_euler_step(sys, s, dt, drift);
        break;
      case Integrator::Leapfrog:
        s = leapfrog_step(sys, s, dt);
        break;
      case Integrator::ForestRuth:
        s = forest_ruth_step(sys, s, dt);
        break;
    }
    traj.states.push_back(s);
    traj.energies.push_back(sys.energy(s.q, s.p));
  }
  return traj;
}

DriftStats energy_drift(const Trajectory& traj) {
  if (traj.states.empty()) throw std::invalid_argument("energy_drift: empty trajectory");
  DriftStats stats;
  const double h0 = traj.energies.front();
  for (double h : traj.energies)
    stats.max_abs_deviation = std::max(stats.max_abs_deviation, std::fabs(h - h0));

  // Least-squares slope of H against t.
  const std::size_t n = traj.states.size();
  if (n < 2) return stats;
  double mean_t = 0.0, mean_h = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mean_t += traj.states[i].t;
    mean_h += traj.energies[i];
  }
  mean_t /= static_cast<double>(n);
  mean_h /= static_cast<double>(n);
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dt_i = traj.states[i].t - mean_t;
    num += dt_i * (traj.energies[i] - mean_h);
    den += dt_i * dt_i;
  }
  stats.linear_drift_rate = den > 0.0 ? num / den : 0.0;
  return stats;
}

void export_trajectory_csv(const Trajectory& traj, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw io_error("cannot open '" + path + "' for writing");
  const std::size_t dim = traj.states.empty() ? 0 : traj.states.front().q.size();
  out << "t";
  for (std::size_t i = 0; i < dim; ++i) out << ",q" << i;
  for (std::size_t i = 0; i < dim; ++i) out << ",p" << i;
  out << ",H\n";
  char buf[40];
  for (std::size_t s = 0; s < traj.states.size(); ++s) {
    const PhaseState& st = traj.states[s];
    std::snprintf(buf, sizeof buf, "%.17g", st.t);
    out << buf;
    for (double v : st.q) {
      std::snprintf(buf, sizeof buf, "%.17g", v);
      out << "," << buf;
    }
    for (double v : st.p) {
      std::snprintf(buf, sizeof buf, "%.17g", v);
      out << "," << buf;
    }
    std::snprintf(buf, sizeof buf, "%.17g", traj.energies[s]);
    out << "," << buf << "\n";
  }
  if (!out) throw io_error("write failed for '" + path + "'");
}

}  // namespace hamnn
