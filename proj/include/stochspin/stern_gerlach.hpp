#pragma once

// Spin-dependent beam deflection in a field gradient: branch selection by the
// Born rule, ballistic transverse motion under F = M_z dB_z/dz, the plate
// distribution, moment precession and energy-transition bookkeeping.

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "stochspin/csv.hpp"
#include "stochspin/error.hpp"
#include "stochspin/parallel.hpp"
#include "stochspin/rng.hpp"
#include "stochspin/spin_state.hpp"

namespace stochspin {

using Vec3 = std::array<double, 3>;

inline double dot(const Vec3& a, const Vec3& b) noexcept { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }
inline Vec3 cross(const Vec3& a, const Vec3& b) noexcept {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}
inline double norm(const Vec3& a) noexcept { return std::sqrt(dot(a, a)); }

/// W = -M . B
inline double potential_energy(const Vec3& moment, const Vec3& field) noexcept { return -dot(moment, field); }

/// F_z = M_z dB_z/dz, with the in-plane moment components averaging to zero.
inline double magnetic_force_z(double m_z, double grad_bz) noexcept { return m_z * grad_bz; }

enum class Branch { up, down };

inline const char* to_string(Branch b) noexcept { return b == Branch::up ? "up" : "down"; }

struct BeamConfig {
  double mass = 1.0;
  double gamma = 1.0;
  double grad_bz = -1.0;
  double b_z = 1.0;
  double magnet_length = 1.0;
  double drift_length = 1.0;
  double v_beam = 1.0;
  double sigma_z = 0.0;
  double hbar = kDefaultHbar;

  /// Throws InvalidInput for hard violations; returns warnings for a field
  /// gradient that is not negative.
  std::vector<std::string> validate() const {
    auto positive = [](double v, const char* name) {
      if (!(v > 0.0) || !std::isfinite(v)) throw InvalidInput(std::string(name) + " must be > 0");
    };
    positive(mass, "mass");
    positive(v_beam, "v_beam");
    positive(magnet_length, "magnet_length");
    positive(drift_length, "drift_length");
    positive(b_z, "b_z");
    positive(hbar, "hbar");
    if (!std::isfinite(gamma)) throw InvalidInput("gamma must be finite");
    if (!std::isfinite(grad_bz)) throw InvalidInput("grad_bz must be finite");
    if (!(sigma_z >= 0.0) || !std::isfinite(sigma_z)) throw InvalidInput("sigma_z must be >= 0");
    std::vector<std::string> warnings;
    if (!(grad_bz < 0.0)) warnings.emplace_back("grad_bz is not negative; deflection directions are mirrored");
    return warnings;
  }

  double time_in_magnet() const noexcept { return magnet_length / v_beam; }
  double time_in_drift() const noexcept { return drift_length / v_beam; }

  /// M_z = +-gamma hbar / 2.
  double moment_z(Branch b) const noexcept { return (b == Branch::up ? 0.5 : -0.5) * gamma * hbar; }
  double acceleration(Branch b) const noexcept { return magnetic_force_z(moment_z(b), grad_bz) / mass; }
};

struct PlateRecord {
  Branch branch;
  double z_final;
  double p_final;

  bool operator==(const PlateRecord&) const = default;
};

/// up iff u < |alpha|^2.
inline Branch sample_branch(const Spinor& state, double u) noexcept {
  return u < std::norm(state.alpha()) ? Branch::up : Branch::down;
}

struct Deflection {
  double z_final;
  double p_final;
};

/// Constant acceleration a = M_z grad_bz / m for t1 = L1 / v, then free flight
/// for t2 = L2 / v: z = a t1^2 / 2 + a t1 t2, p = m a t1.
inline Deflection deflection(Branch branch, const BeamConfig& cfg) {
  const double a = cfg.acceleration(branch);
  const double t1 = cfg.time_in_magnet();
  const double t2 = cfg.time_in_drift();
  const double vz = a * t1;
  return {0.5 * a * t1 * t1 + vz * t2, cfg.mass * vz};
}

/// Transverse trajectory after the magnet, z = v_z * tau, sampled at n points
/// for tau in (0, horizon]. tau is measured from the apparent source point
/// (mid-magnet, t = t1/2), where the straight exit line crosses z = 0.
struct StraightTrajectory {
  std::vector<double> times;
  std::vector<double> z;
};

inline StraightTrajectory post_magnet_trajectory(Branch branch, const BeamConfig& cfg, std::size_t n, double horizon) {
  if (n < 2 || !(horizon > 0.0)) throw InvalidInput("post_magnet_trajectory needs n >= 2 and horizon > 0");
  const double vz = cfg.acceleration(branch) * cfg.time_in_magnet();
  StraightTrajectory tr;
  tr.times.resize(n);
  tr.z.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double tau = horizon * static_cast<double>(k + 1) / static_cast<double>(n);
    tr.times[k] = tau;
    tr.z[k] = vz * tau;
  }
  return tr;
}

/// Branch-samples and deflects n particles. Particle i draws its branch from
/// the `branch` stream and its entry offset N(0, sigma_z^2) from the `plate`
/// stream, both keyed by i, so results do not depend on `threads`.
inline std::vector<PlateRecord> simulate_beam(const Spinor& state, const BeamConfig& cfg, std::size_t n,
                                              std::uint64_t seed, unsigned threads = 1) {
  if (n < 1) throw InvalidInput("simulate_beam needs n >= 1");
  cfg.validate();
  const Deflection up = deflection(Branch::up, cfg);
  const Deflection down = deflection(Branch::down, cfg);
  const CounterRng branch_rng(seed, RngStream::branch);
  const CounterRng plate_rng(seed, RngStream::plate);
  std::vector<PlateRecord> out(n);
  for_each_block(n, 4096, threads, [&](std::size_t, std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const Branch b = sample_branch(state, branch_rng.uniform(i, 0));
      const Deflection& d = b == Branch::up ? up : down;
      const double z0 = cfg.sigma_z > 0.0 ? cfg.sigma_z * plate_rng.normal(i, 0) : 0.0;
      out[i] = {b, z0 + d.z_final, d.p_final};
    }
  });
  return out;
}

enum class EnergyMode {
  /// m (|p+|^2 - |p-|^2), the expression as usually quoted for this model.
  literal,
  /// (|p+|^2 - |p-|^2) / (2 m), the kinetic-energy difference.
  kinetic,
};

inline double energy_transition(double p_minus, double p_plus, double mass, EnergyMode mode = EnergyMode::literal) {
  if (!(mass > 0.0)) throw InvalidInput("energy_transition requires mass > 0");
  const double d = p_plus * p_plus - p_minus * p_minus;
  return mode == EnergyMode::literal ? mass * d : d / (2.0 * mass);
}

/// Exact rotation of the kinetic moment for dGamma/dt = gamma Gamma x B over dt:
/// a rotation about B by the angle -gamma |B| dt (Rodrigues' formula).
inline Vec3 precess_moment(const Vec3& moment, const Vec3& field, double gamma, double dt) noexcept {
  const double b = norm(field);
  if (b == 0.0) return moment;
  const Vec3 k{field[0] / b, field[1] / b, field[2] / b};
  const double angle = -gamma * b * dt;
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  const Vec3 kxv = cross(k, moment);
  const double kv = dot(k, moment);
  Vec3 out{};
  for (int i = 0; i < 3; ++i) out[i] = moment[i] * c + kxv[i] * s + k[i] * kv * (1.0 - c);
  return out;
}

struct BranchSummary {
  std::size_t count = 0;
  double fraction = 0.0;
  double mean_z = 0.0;
  double std_z = 0.0;
  double mean_p = 0.0;
  double std_p = 0.0;
};

struct BeamSummary {
  BranchSummary up;
  BranchSummary down;
};

inline BeamSummary summarize_beam(std::span<const PlateRecord> records) {
  struct Acc {
    double n = 0, sz = 0, szz = 0, sp = 0, spp = 0;
  } acc[2];
  for (const auto& r : records) {
    Acc& a = acc[r.branch == Branch::up ? 0 : 1];
    a.n += 1;
    a.sz += r.z_final;
    a.szz += r.z_final * r.z_final;
    a.sp += r.p_final;
    a.spp += r.p_final * r.p_final;
  }
  auto finish = [&](const Acc& a) {
    BranchSummary s;
    s.count = static_cast<std::size_t>(a.n);
    s.fraction = records.empty() ? 0.0 : a.n / static_cast<double>(records.size());
    if (a.n > 0) {
      s.mean_z = a.sz / a.n;
      s.mean_p = a.sp / a.n;
    }
    if (a.n > 1) {
      s.std_z = std::sqrt(std::max(0.0, (a.szz - a.n * s.mean_z * s.mean_z) / (a.n - 1)));
      s.std_p = std::sqrt(std::max(0.0, (a.spp - a.n * s.mean_p * s.mean_p) / (a.n - 1)));
    }
    return s;
  };
  return {finish(acc[0]), finish(acc[1])};
}

/// Number of separate regions where the histogram exceeds `rel_threshold`
/// times its maximum. Gaps of sub-threshold bins split modes.
inline std::size_t count_histogram_modes(std::span<const double> heights, double rel_threshold = 0.05) {
  double peak = 0.0;
  for (double h : heights) peak = std::max(peak, h);
  if (peak <= 0.0) return 0;
  std::size_t modes = 0;
  bool inside = false;
  for (double h : heights) {
    const bool above = h > rel_threshold * peak;
    if (above && !inside) ++modes;
    inside = above;
  }
  return modes;
}

/// CSV: index,branch,z_final,p_final
inline std::string to_csv(std::span<const PlateRecord> records) {
  std::string out = "index,branch,z_final,p_final\n";
  for (std::size_t i = 0; i < records.size(); ++i) {
    out += std::to_string(i);
    out += ',';
    out += to_string(records[i].branch);
    out += ',';
    out += format_double(records[i].z_final);
    out += ',';
    out += format_double(records[i].p_final);
    out += '\n';
  }
  return out;
}

/// CSV: branch,count,fraction,mean_z,std_z,mean_p,std_p
inline std::string to_csv(const BeamSummary& s) {
  std::string out = "branch,count,fraction,mean_z,std_z,mean_p,std_p\n";
  auto row = [&out](const char* name, const BranchSummary& b) {
    out += name;
    for (double v : {static_cast<double>(b.count), b.fraction, b.mean_z, b.std_z, b.mean_p, b.std_p}) {
      out += ',';
      out += format_double(v);
    }
    out += '\n';
  };
  row("up", s.up);
  row("down", s.down);
  return out;
}

inline std::vector<PlateRecord> plate_records_from_csv(const CsvTable& table) {
  const auto bcol = table.column("branch");
  const auto z = table.numeric_column("z_final");
  const auto p = table.numeric_column("p_final");
  std::vector<PlateRecord> out;
  out.reserve(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) {
    const auto& name = table.rows[i][bcol];
    if (name != "up" && name != "down") throw InvalidInput("unknown branch '" + name + "' in plate CSV");
    out.push_back({name == "up" ? Branch::up : Branch::down, z[i], p[i]});
  }
  return out;
}

}  // namespace stochspin
