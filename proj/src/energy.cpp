#include "xtal/energy.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace xtal {

double coulomb_pair(double qi, double qj, double d, double constant) {
  if (!(d > 0.0)) throw std::invalid_argument("coulomb_pair: distance must be positive");
  return constant * qi * qj / d;
}

double buckingham_pair(const BuckinghamCoeffs& coeffs, double d) {
  if (!(d > 0.0)) throw std::invalid_argument("buckingham_pair: distance must be positive");
  if (!(coeffs.rho > 0.0)) throw std::invalid_argument("buckingham_pair: rho must be positive");
  const double d2 = d * d;
  const double d6 = d2 * d2 * d2;
  return coeffs.A * std::exp(-d / coeffs.rho) - coeffs.C / d6;
}

namespace {

/// Canonical image-window geometry of one site pair.
///
/// The window is centered on the minimum-image separation, which makes the
/// truncated sum invariant under rigid translation. The sign is normalized
/// (first nonzero untied component positive) so the value is bitwise
/// independent of site labeling. Components that land exactly on the +-1/2
/// boundary are degenerate minimum images; both windows enter with half
/// weight, which keeps the energy symmetric at high-symmetry arrangements.
struct PairGeometry {
  std::array<Eigen::Vector3d, 8> bases;  // fractional, one per tie branch
  int n_branches = 1;
  double weight = 1.0;
  Eigen::Vector3d unflip;  // per-component map from canonical back to j-i

  void build(const Eigen::Vector3d& frac_i, const Eigen::Vector3d& frac_j) {
    Eigen::Vector3d d = frac_j - frac_i;
    std::array<bool, 3> tie{};
    unflip = Eigen::Vector3d::Ones();
    for (int c = 0; c < 3; ++c) {
      d[c] -= std::round(d[c]);
      tie[c] = std::abs(d[c]) == 0.5;
      if (tie[c] && d[c] < 0.0) {
        d[c] = 0.5;
        unflip[c] = -1.0;
      }
    }
    double sign = 1.0;
    for (int c = 0; c < 3; ++c) {
      if (!tie[c] && d[c] != 0.0) {
        sign = d[c] > 0.0 ? 1.0 : -1.0;
        break;
      }
    }
    for (int c = 0; c < 3; ++c) {
      if (!tie[c]) {
        d[c] *= sign;
        unflip[c] = sign;  // canonical = sign * (j - i) on untied components
      }
    }

    n_branches = 1;
    bases[0] = d;
    for (int c = 0; c < 3; ++c) {
      if (!tie[c]) continue;
      for (int b = 0; b < n_branches; ++b) {
        bases[n_branches + b] = bases[b];
        bases[n_branches + b][c] = -0.5;
      }
      n_branches *= 2;
    }
    weight = 1.0 / n_branches;
  }
};

}  // namespace

EnergyContext::EnergyContext(const Structure& s, const ForceField& ff, int depth)
    : s_(s), lm_(LatticeMatrix::from_cell(s.cell)), depth_(depth) {
  if (depth < 1) throw std::invalid_argument("depth must be >= 1");
  if (s.sites.empty()) throw std::invalid_argument("structure has no sites");

  n_species_ = static_cast<int>(s.species.size());
  pair_coeffs_.resize(static_cast<std::size_t>(n_species_) * n_species_);
  for (int a = 0; a < n_species_; ++a) {
    for (int b = 0; b < n_species_; ++b) {
      const BuckinghamCoeffs bc = ff.lookup(s.species[a].symbol, s.species[b].symbol);
      PairCoeffs pc;
      pc.A = bc.A;
      pc.inv_rho = 1.0 / bc.rho;
      pc.C = bc.C;
      pc.kqq = ff.coulomb_constant() * s.species[a].charge * s.species[b].charge;
      const double min_d = s.species[a].radius + s.species[b].radius;
      pc.min_d2 = min_d * min_d;
      pair_coeffs_[static_cast<std::size_t>(a) * n_species_ + b] = pc;
    }
  }

  const ImageShell shell = ImageShell::cube(depth);
  offsets_cart_.reserve(shell.offsets.size());
  for (const auto& o : shell.offsets) offsets_cart_.push_back(lm_.cart() * o.cast<double>());
  const ImageShell feas_shell = ImageShell::cube(1);
  feas_offsets_cart_.reserve(feas_shell.offsets.size());
  for (const auto& o : feas_shell.offsets)
    feas_offsets_cart_.push_back(lm_.cart() * o.cast<double>());

  // Self-image terms: distances |M*offset| do not depend on the arrangement,
  // so the whole contribution is a constant of (cell, composition, depth).
  std::vector<int> species_count(n_species_, 0);
  for (const auto& site : s_.sites) ++species_count[site.species];
  for (const auto& t : offsets_cart_) {
    const double d2 = t.squaredNorm();
    if (d2 == 0.0) continue;
    const double d = std::sqrt(d2);
    const double d6 = d2 * d2 * d2;
    for (int a = 0; a < n_species_; ++a) {
      if (species_count[a] == 0) continue;
      const PairCoeffs& pc = pair_coeffs_[static_cast<std::size_t>(a) * n_species_ + a];
      self_coulomb_ += species_count[a] * pc.kqq / d;
      self_buckingham_ +=
          species_count[a] * (pc.A * std::exp(-d * pc.inv_rho) - pc.C / d6);
    }
  }
}

inline double EnergyContext::pair_phi(const PairCoeffs& pc, double d2, double* coulomb,
                                      double* buckingham) const {
  if (d2 < kMinPairDistance * kMinPairDistance)
    throw SingularityError("pair distance below singularity guard");
  const double d = std::sqrt(d2);
  const double d6 = d2 * d2 * d2;
  const double c = pc.kqq / d;
  const double b = pc.A * std::exp(-d * pc.inv_rho) - pc.C / d6;
  if (coulomb) *coulomb += c;
  if (buckingham) *buckingham += b;
  return c + b;
}

EnergyReport EnergyContext::energy() const {
  const int n = static_cast<int>(s_.sites.size());
  // pair contributions are reduced in sorted order so the total is bitwise
  // independent of site labeling
  std::vector<double> coulomb_terms, buckingham_terms;
  coulomb_terms.reserve(static_cast<std::size_t>(n) * (n - 1) / 2);
  buckingham_terms.reserve(coulomb_terms.capacity());

  PairGeometry geo;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const PairCoeffs& pc = coeffs(i, j);
      geo.build(s_.sites[i].frac, s_.sites[j].frac);
      double pair_c = 0.0, pair_b = 0.0;
      for (int b = 0; b < geo.n_branches; ++b) {
        const Eigen::Vector3d base = lm_.to_cart(geo.bases[b]);
        double branch_c = 0.0, branch_b = 0.0;
        for (const auto& t : offsets_cart_)
          pair_phi(pc, (base + t).squaredNorm(), &branch_c, &branch_b);
        pair_c += geo.weight * branch_c;
        pair_b += geo.weight * branch_b;
      }
      coulomb_terms.push_back(pair_c);
      buckingham_terms.push_back(pair_b);
    }
  }
  std::sort(coulomb_terms.begin(), coulomb_terms.end());
  std::sort(buckingham_terms.begin(), buckingham_terms.end());
  double cp = 0.0, bp = 0.0;
  for (double v : coulomb_terms) cp += v;
  for (double v : buckingham_terms) bp += v;
  cp = 2.0 * cp + self_coulomb_;  // each in-cell pair counts from both endpoints
  bp = 2.0 * bp + self_buckingham_;

  EnergyReport report;
  report.depth = depth_;
  report.coulomb_part = cp;
  report.buckingham_part = bp;
  report.total = cp + bp;
  report.per_ion = report.total / n;
  return report;
}

EnergyGradient EnergyContext::energy_gradient() const {
  const int n = static_cast<int>(s_.sites.size());
  EnergyGradient result;
  result.gradient.assign(n, Eigen::Vector3d::Zero());
  double cp = 0.0, bp = 0.0;
  PairGeometry geo;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const PairCoeffs& pc = coeffs(i, j);
      geo.build(s_.sites[i].frac, s_.sites[j].frac);
      Eigen::Vector3d g_pair = Eigen::Vector3d::Zero();
      for (int b = 0; b < geo.n_branches; ++b) {
        const Eigen::Vector3d base = lm_.to_cart(geo.bases[b]);
        for (const auto& t : offsets_cart_) {
          const Eigen::Vector3d dv = base + t;
          const double d2 = dv.squaredNorm();
          if (d2 < kMinPairDistance * kMinPairDistance)
            throw SingularityError("pair distance below singularity guard");
          const double d = std::sqrt(d2);
          const double d6 = d2 * d2 * d2;
          cp += 2.0 * geo.weight * (pc.kqq / d);
          bp += 2.0 * geo.weight * (pc.A * std::exp(-d * pc.inv_rho) - pc.C / d6);
          // dphi/dd, with the factor 2 of the literal double counting
          const double dphi = -pc.kqq / d2 -
                              pc.A * pc.inv_rho * std::exp(-d * pc.inv_rho) +
                              6.0 * pc.C / (d6 * d);
          g_pair += (2.0 * geo.weight * dphi / d) * dv;
        }
      }
      // map the canonical-frame force back onto d(j) - d(i); the component
      // flips act in fractional space, so conjugate through the lattice
      Eigen::Vector3d g_true;
      if (geo.unflip == Eigen::Vector3d::Ones()) {
        g_true = g_pair;
      } else if (geo.unflip == -Eigen::Vector3d::Ones()) {
        g_true = -g_pair;
      } else {
        g_true = lm_.inv().transpose() *
                 geo.unflip.cwiseProduct(lm_.cart().transpose() * g_pair);
      }
      result.gradient[j] += g_true;
      result.gradient[i] -= g_true;
    }
  }
  cp += self_coulomb_;
  bp += self_buckingham_;  // self images contribute no gradient: |M*o| is constant

  result.report.depth = depth_;
  result.report.coulomb_part = cp;
  result.report.buckingham_part = bp;
  result.report.total = cp + bp;
  result.report.per_ion = result.report.total / n;
  return result;
}

double EnergyContext::window_sum(const PairCoeffs& pc, const Eigen::Vector3d& frac_a,
                                 const Eigen::Vector3d& frac_b) const {
  PairGeometry geo;
  geo.build(frac_a, frac_b);
  double sum = 0.0;
  for (int b = 0; b < geo.n_branches; ++b) {
    const Eigen::Vector3d base = lm_.to_cart(geo.bases[b]);
    double branch = 0.0;
    for (const auto& t : offsets_cart_)
      branch += pair_phi(pc, (base + t).squaredNorm(), nullptr, nullptr);
    sum += geo.weight * branch;
  }
  return sum;
}

double EnergyContext::energy_delta(std::span<const int> sites,
                                   std::span<const Eigen::Vector3d> new_frac) const {
  const int n = static_cast<int>(s_.sites.size());
  std::vector<char> moved(n, 0);
  std::vector<Eigen::Vector3d> wrapped(sites.size());
  for (std::size_t m = 0; m < sites.size(); ++m) {
    moved[sites[m]] = 1;
    wrapped[m] = wrap_unit(new_frac[m]);
  }

  double delta = 0.0;
  for (std::size_t m = 0; m < sites.size(); ++m) {
    const int i = sites[m];
    for (int j = 0; j < n; ++j) {
      if (moved[j]) continue;
      const PairCoeffs& pc = coeffs(i, j);
      delta += window_sum(pc, wrapped[m], s_.sites[j].frac) -
               window_sum(pc, s_.sites[i].frac, s_.sites[j].frac);
    }
  }
  for (std::size_t m = 0; m + 1 < sites.size(); ++m) {
    for (std::size_t l = m + 1; l < sites.size(); ++l) {
      const PairCoeffs& pc = coeffs(sites[m], sites[l]);
      delta += window_sum(pc, wrapped[m], wrapped[l]) -
               window_sum(pc, s_.sites[sites[m]].frac, s_.sites[sites[l]].frac);
    }
  }
  return 2.0 * delta;
}

bool EnergyContext::move_keeps_feasible(std::span<const int> sites,
                                        std::span<const Eigen::Vector3d> new_frac) const {
  const int n = static_cast<int>(s_.sites.size());
  std::vector<char> moved(n, 0);
  std::vector<Eigen::Vector3d> wrapped(sites.size());
  for (std::size_t m = 0; m < sites.size(); ++m) {
    moved[sites[m]] = 1;
    wrapped[m] = wrap_unit(new_frac[m]);
  }

  // the depth-1 window around the minimum image always contains the global
  // minimum distance, so scanning one branch decides feasibility
  auto pair_ok = [&](const Eigen::Vector3d& frac_a, const Eigen::Vector3d& frac_b,
                     double min_d2) {
    Eigen::Vector3d d = frac_b - frac_a;
    for (int c = 0; c < 3; ++c) d[c] -= std::round(d[c]);
    const Eigen::Vector3d base = lm_.to_cart(d);
    for (const auto& t : feas_offsets_cart_)
      if ((base + t).squaredNorm() < min_d2) return false;
    return true;
  };

  for (std::size_t m = 0; m < sites.size(); ++m) {
    const int i = sites[m];
    for (int j = 0; j < n; ++j) {
      if (moved[j]) continue;
      if (!pair_ok(wrapped[m], s_.sites[j].frac, coeffs(i, j).min_d2)) return false;
    }
  }
  for (std::size_t m = 0; m + 1 < sites.size(); ++m)
    for (std::size_t l = m + 1; l < sites.size(); ++l)
      if (!pair_ok(wrapped[m], wrapped[l], coeffs(sites[m], sites[l]).min_d2)) return false;
  return true;  // untouched pairs and self-images are unchanged
}

void EnergyContext::apply(std::span<const int> sites,
                          std::span<const Eigen::Vector3d> new_frac) {
  for (std::size_t m = 0; m < sites.size(); ++m)
    s_.sites[sites[m]].frac = wrap_unit(new_frac[m]);
}

EnergyReport depth_energy(const Structure& s, const ForceField& ff, int depth,
                          PairCounting counting) {
  EnergyReport report = EnergyContext(s, ff, depth).energy();
  if (counting == PairCounting::conventional) {
    report.total *= 0.5;
    report.per_ion *= 0.5;
    report.coulomb_part *= 0.5;
    report.buckingham_part *= 0.5;
  }
  return report;
}

std::vector<Eigen::Vector3d> depth_energy_gradient(const Structure& s, const ForceField& ff,
                                                   int depth) {
  return EnergyContext(s, ff, depth).energy_gradient().gradient;
}

EnergyGradient depth_energy_with_gradient(const Structure& s, const ForceField& ff,
                                          int depth) {
  return EnergyContext(s, ff, depth).energy_gradient();
}

namespace {

bool same_species(const Species& a, const Species& b) {
  return a.symbol == b.symbol && a.charge == b.charge && a.radius == b.radius;
}

}  // namespace

Ordering energy_ordering(const Structure& a, const Structure& b, const ForceField& ff,
                         int depth) {
  if (a.cell.lengths != b.cell.lengths || a.cell.angles_deg != b.cell.angles_deg)
    throw std::invalid_argument("energy_ordering: cell mismatch");
  if (a.species.size() != b.species.size() || a.sites.size() != b.sites.size())
    throw std::invalid_argument("energy_ordering: composition mismatch");
  for (std::size_t i = 0; i < a.species.size(); ++i)
    if (!same_species(a.species[i], b.species[i]))
      throw std::invalid_argument("energy_ordering: composition mismatch");
  for (std::size_t i = 0; i < a.sites.size(); ++i)
    if (a.sites[i].species != b.sites[i].species)
      throw std::invalid_argument("energy_ordering: composition mismatch");

  const double ea = depth_energy(a, ff, depth).total;
  const double eb = depth_energy(b, ff, depth).total;
  if (std::abs(ea - eb) <= kEnergyTie) return Ordering::tie;
  return ea < eb ? Ordering::a_lower : Ordering::b_lower;
}

}  // namespace xtal
