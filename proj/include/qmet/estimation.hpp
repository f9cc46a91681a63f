#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

#include <json.hpp>

#include "qmet/encoding.hpp"
#include "qmet/information.hpp"
#include "qmet/measurement.hpp"
#include "qmet/parallel.hpp"
#include "qmet/rng.hpp"

namespace qmet {

struct CountVector {
  std::array<long long, 4> n{0, 0, 0, 0};
  long long nu() const { return n[0] + n[1] + n[2] + n[3]; }
};

struct Estimate {
  double phi_hat = 0.0;    // in [0, pi/2]
  double delta_hat = 0.0;  // in [0, delta_max]
  double loglik = 0.0;
  bool converged = false;
};

struct EncodingMode {
  enum Kind { analytic, finite_sample } kind = analytic;
  int m = 200;               // phases per copy in finite_sample mode
  bool redraw_per_rep = true;  // false: one fixed phase realization for all reps
};

struct ExperimentRecord {
  ParamPoint setting{0.0, 0.0};
  long long nu_target = 0;
  int repetitions = 0;
  std::vector<Estimate> estimates;
  std::vector<CountVector> counts;  // kept for Poisson resampling
  Mat2d covariance = Mat2d::Zero();
  Mat2d fim_inferred = Mat2d::Zero();
  double merit = 0.0;
  double merit_error = 0.0;
};

constexpr double kPhiMax = M_PI / 2.0;
// e^{-2*9} is below count resolution at nu = 1e4; larger delta is
// indistinguishable, so the search is boxed here.
constexpr double kDeltaMax = 3.0;

/// Bell-port outcome probabilities for the chosen encoding. The finite_sample
/// mode draws independent phase lists per copy (seeds split from the given
/// one) and uses the Bell probabilities of the resulting product state.
inline std::array<double, 4> outcome_probs(const ParamPoint& p,
                                           const EncodingMode& mode,
                                           std::uint64_t phase_seed) {
  if (mode.kind == EncodingMode::analytic) return bell_probs(p);
  const QubitPrep prep(M_PI / 2.0);
  auto phases1 = sample_phases(p, mode.m, SplitMix64::split(phase_seed, 1));
  auto phases2 = sample_phases(p, mode.m, SplitMix64::split(phase_seed, 2));
  Mat rho = kron(finite_sample_state(prep, phases1).mat(),
                 finite_sample_state(prep, phases2).mat());
  auto basis = bell_basis();
  std::array<double, 4> probs{};
  for (int k = 0; k < 4; ++k)
    probs[k] = (basis[k].adjoint() * rho * basis[k])(0, 0).real();
  return probs;
}

/// Multinomial counts at the four Bell ports.
inline CountVector sample_counts(const ParamPoint& p, long long nu,
                                 const EncodingMode& mode, std::uint64_t seed) {
  if (nu < 1) throw std::invalid_argument("sample_counts: nu < 1");
  const auto probs = outcome_probs(p, mode, seed);
  SplitMix64 g(SplitMix64::split(seed, 0));
  CountVector out;
  out.n = multinomial4(g, nu, probs);
  return out;
}

namespace detail {

inline double log_likelihood(const CountVector& counts, double phi, double delta) {
  const auto p = bell_probs({phi, delta});
  double ll = 0.0;
  for (int k = 0; k < 4; ++k)
    if (counts.n[k] > 0) ll += counts.n[k] * std::log(std::max(p[k], 1e-300));
  return ll;
}

/// Shared coarse grid of log Bell probabilities over
/// [0, pi/2] x [0, delta_max]; built once, read-only afterwards.
struct MleGrid {
  static constexpr int kN = 128;
  std::vector<std::array<double, 4>> logp;  // row-major (phi, delta)
  std::vector<double> phis, deltas;

  MleGrid() {
    logp.reserve(kN * kN);
    for (int i = 0; i < kN; ++i)
      phis.push_back(kPhiMax * i / (kN - 1));
    for (int j = 0; j < kN; ++j)
      deltas.push_back(kDeltaMax * j / (kN - 1));
    for (int i = 0; i < kN; ++i)
      for (int j = 0; j < kN; ++j) {
        auto p = bell_probs({phis[i], deltas[j]});
        std::array<double, 4> lp{};
        for (int k = 0; k < 4; ++k) lp[k] = std::log(std::max(p[k], 1e-300));
        logp.push_back(lp);
      }
  }

  static const MleGrid& instance() {
    static MleGrid grid;
    return grid;
  }
};

/// Nelder-Mead on the box-clamped negative log-likelihood.
inline Estimate nelder_mead(const CountVector& counts, double phi0, double delta0) {
  auto clamp = [](double phi, double delta) {
    return std::pair<double, double>{std::clamp(phi, 0.0, kPhiMax),
                                     std::clamp(delta, 0.0, kDeltaMax)};
  };
  auto f = [&](double phi, double delta) {
    auto [cp, cd] = clamp(phi, delta);
    return -log_likelihood(counts, cp, cd);
  };
  struct Pt {
    double x, y, v;
  };
  std::array<Pt, 3> s;
  const double h = 0.02;
  s[0] = {phi0, delta0, f(phi0, delta0)};
  s[1] = {phi0 + h, delta0, f(phi0 + h, delta0)};
  s[2] = {phi0, delta0 + h, f(phi0, delta0 + h)};
  for (int it = 0; it < 500; ++it) {
    std::sort(s.begin(), s.end(), [](const Pt& a, const Pt& b) { return a.v < b.v; });
    const double size = std::max({std::abs(s[1].x - s[0].x), std::abs(s[2].x - s[0].x),
                                  std::abs(s[1].y - s[0].y), std::abs(s[2].y - s[0].y)});
    if (size < 1e-9 && std::abs(s[2].v - s[0].v) < 1e-10) break;
    const double cx = 0.5 * (s[0].x + s[1].x);
    const double cy = 0.5 * (s[0].y + s[1].y);
    Pt refl{cx + (cx - s[2].x), cy + (cy - s[2].y), 0.0};
    refl.v = f(refl.x, refl.y);
    if (refl.v < s[0].v) {
      Pt exp_{cx + 2.0 * (cx - s[2].x), cy + 2.0 * (cy - s[2].y), 0.0};
      exp_.v = f(exp_.x, exp_.y);
      s[2] = exp_.v < refl.v ? exp_ : refl;
    } else if (refl.v < s[1].v) {
      s[2] = refl;
    } else {
      Pt con{cx + 0.5 * (s[2].x - cx), cy + 0.5 * (s[2].y - cy), 0.0};
      con.v = f(con.x, con.y);
      if (con.v < s[2].v) {
        s[2] = con;
      } else {
        for (int i = 1; i < 3; ++i) {
          s[i].x = s[0].x + 0.5 * (s[i].x - s[0].x);
          s[i].y = s[0].y + 0.5 * (s[i].y - s[0].y);
          s[i].v = f(s[i].x, s[i].y);
        }
      }
    }
  }
  std::sort(s.begin(), s.end(), [](const Pt& a, const Pt& b) { return a.v < b.v; });
  auto [phi, delta] = clamp(s[0].x, s[0].y);
  Estimate est;
  est.phi_hat = phi;
  est.delta_hat = delta;
  est.loglik = -s[0].v;
  const double tol = 1e-7;
  est.converged = delta > tol && delta < kDeltaMax - tol;
  return est;
}

}  // namespace detail

/// Maximum-likelihood estimate of (phi, delta) from four Bell-port counts:
/// coarse 128x128 grid, moment-statistic seeding, then simplex refinement.
/// A = (N3-N4)/(N3+N4) estimates e^{-2 delta^2}; B = (N1-N2)/(N1+N2)
/// estimates e^{-2 delta^2} cos 2 phi. Boundary-clipped estimates are
/// reported with converged = false.
inline Estimate mle(const CountVector& counts) {
  if (counts.nu() < 1) throw EmptyCountsError("mle: no counts");
  const auto& grid = detail::MleGrid::instance();
  double best = -std::numeric_limits<double>::infinity();
  int best_i = 0, best_j = 0;
  for (int i = 0; i < detail::MleGrid::kN; ++i)
    for (int j = 0; j < detail::MleGrid::kN; ++j) {
      const auto& lp = grid.logp[i * detail::MleGrid::kN + j];
      const double ll = counts.n[0] * lp[0] + counts.n[1] * lp[1] +
                        counts.n[2] * lp[2] + counts.n[3] * lp[3];
      if (ll > best) {
        best = ll;
        best_i = i;
        best_j = j;
      }
    }
  double phi0 = grid.phis[best_i];
  double delta0 = grid.deltas[best_j];
  // moment seed, unless a denominator degenerates (then pure grid search)
  const double sum34 = static_cast<double>(counts.n[2] + counts.n[3]);
  const double sum12 = static_cast<double>(counts.n[0] + counts.n[1]);
  if (sum34 > 0.0 && sum12 > 0.0) {
    const double a = (counts.n[2] - counts.n[3]) / sum34;
    if (a > 1e-12) {
      const double dm = std::sqrt(std::max(0.0, -0.5 * std::log(std::min(a, 1.0))));
      const double b = (counts.n[0] - counts.n[1]) / sum12;
      const double cos2phi = std::clamp(b / a, -1.0, 1.0);
      const double pm = 0.5 * std::acos(cos2phi);
      if (detail::log_likelihood(counts, pm, std::min(dm, kDeltaMax)) >= best) {
        phi0 = pm;
        delta0 = std::min(dm, kDeltaMax);
      }
    }
  }
  return detail::nelder_mead(counts, phi0, delta0);
}

/// Full protocol: reps rounds of sample_counts + mle, covariance across reps,
/// FIM inferred as (nu V)^{-1}, merit = Tr(Q2^{-1} F_inferred) with the
/// analytic two-copy QFIM at the true setting. Seeds split per repetition,
/// so repetitions may run in parallel with a deterministic result.
inline ExperimentRecord run_experiment(const ParamPoint& setting, long long nu,
                                       int reps, const EncodingMode& mode,
                                       std::uint64_t seed) {
  if (reps < 2) throw std::invalid_argument("run_experiment: reps < 2");
  ExperimentRecord rec;
  rec.setting = setting;
  rec.nu_target = nu;
  rec.repetitions = reps;
  rec.estimates.resize(reps);
  rec.counts.resize(reps);
  const bool fixed_phases =
      mode.kind == EncodingMode::finite_sample && !mode.redraw_per_rep;
  std::array<double, 4> fixed_probs{};
  if (fixed_phases)
    fixed_probs = outcome_probs(setting, mode, SplitMix64::split(seed, 0x7fffffff));
  parallel_for(reps, [&](std::size_t r) {
    const std::uint64_t rep_seed = SplitMix64::split(seed, r);
    if (fixed_phases) {
      // one phase realization for the whole record; only counts vary per rep
      SplitMix64 g(SplitMix64::split(rep_seed, 0));
      rec.counts[r].n = multinomial4(g, nu, fixed_probs);
    } else {
      rec.counts[r] = sample_counts(setting, nu, mode, rep_seed);
    }
    rec.estimates[r] = mle(rec.counts[r]);
  });
  Eigen::Vector2d mean = Eigen::Vector2d::Zero();
  for (const auto& e : rec.estimates) mean += Eigen::Vector2d(e.phi_hat, e.delta_hat);
  mean /= reps;
  Mat2d cov = Mat2d::Zero();
  for (const auto& e : rec.estimates) {
    Eigen::Vector2d d = Eigen::Vector2d(e.phi_hat, e.delta_hat) - mean;
    cov += d * d.transpose();
  }
  cov /= (reps - 1);
  rec.covariance = cov;
  Mat2d nv = static_cast<double>(nu) * cov;
  if (nv.norm() < 1e-24)
    throw SingularCovarianceError("run_experiment: degenerate covariance");
  if (std::abs(nv.determinant()) < 1e-30) {
    // rank-deficient but nonzero spread (e.g. two repetitions): invert on the
    // observed directions only
    Eigen::SelfAdjointEigenSolver<Mat2d> es(nv);
    Mat2d pinv = Mat2d::Zero();
    for (int i = 0; i < 2; ++i)
      if (es.eigenvalues()(i) > 1e-15 * es.eigenvalues().maxCoeff())
        pinv += es.eigenvectors().col(i) * es.eigenvectors().col(i).transpose() /
                es.eigenvalues()(i);
    rec.fim_inferred = pinv;
  } else {
    rec.fim_inferred = nv.inverse();
  }
  rec.merit = figure_of_merit(rec.fim_inferred, qfim2_analytic(setting.delta));
  return rec;
}

/// Parametric bootstrap error bar for the merit. Each resample regenerates
/// a full synthetic ensemble: every repetition draws its four port counts
/// from independent Poisson laws whose means are the setting's mean observed
/// counts (pooled over all repetitions), so resamples carry the same
/// rep-to-rep spread as fresh data rather than the observed spread plus extra
/// resampling noise. Returns the standard deviation of the resampled merits.
inline double monte_carlo_error(const ExperimentRecord& record, int resamples,
                                std::uint64_t seed = 0xb00757) {
  if (resamples < 2)
    throw std::invalid_argument("monte_carlo_error: resamples < 2");
  std::vector<double> merits(resamples);
  const Mat2d q2 = qfim2_analytic(record.setting.delta);
  std::array<double, 4> mean_counts{0.0, 0.0, 0.0, 0.0};
  for (const auto& c : record.counts)
    for (int k = 0; k < 4; ++k) mean_counts[k] += static_cast<double>(c.n[k]);
  for (int k = 0; k < 4; ++k) mean_counts[k] /= record.counts.size();
  parallel_for(resamples, [&](std::size_t s) {
    SplitMix64 g(SplitMix64::split(seed, s));
    const int reps = record.repetitions;
    Eigen::Vector2d mean = Eigen::Vector2d::Zero();
    std::vector<Eigen::Vector2d> xs(reps);
    for (int r = 0; r < reps; ++r) {
      CountVector c;
      for (int k = 0; k < 4; ++k) c.n[k] = poisson(g, mean_counts[k]);
      if (c.nu() < 1) c.n[2] = 1;  // keep the estimator defined
      Estimate e = mle(c);
      xs[r] = Eigen::Vector2d(e.phi_hat, e.delta_hat);
      mean += xs[r];
    }
    mean /= reps;
    Mat2d cov = Mat2d::Zero();
    for (const auto& x : xs) cov += (x - mean) * (x - mean).transpose();
    cov /= (reps - 1);
    Mat2d nv = static_cast<double>(record.nu_target) * cov;
    merits[s] = std::abs(nv.determinant()) < 1e-30
                    ? 0.0
                    : figure_of_merit(Mat2d(nv.inverse()), q2);
  });
  double m = 0.0;
  for (double v : merits) m += v;
  m /= resamples;
  double var = 0.0;
  for (double v : merits) var += (v - m) * (v - m);
  return std::sqrt(var / (resamples - 1));
}

/// (gamma_phi, gamma_delta) coordinates of a record in the trade-off diagram.
inline std::pair<double, double> ratio_coordinates(const ExperimentRecord& record) {
  const Mat2d q2 = qfim2_analytic(record.setting.delta);
  return {record.fim_inferred(0, 0) / q2(0, 0),
          record.fim_inferred(1, 1) / q2(1, 1)};
}

inline nlohmann::json experiment_record_to_json(const ExperimentRecord& rec) {
  nlohmann::json j;
  j["setting"] = {{"phi", rec.setting.phi}, {"delta", rec.setting.delta}};
  j["nu_target"] = rec.nu_target;
  j["repetitions"] = rec.repetitions;
  j["merit"] = rec.merit;
  j["merit_error"] = rec.merit_error;
  j["covariance"] = {{rec.covariance(0, 0), rec.covariance(0, 1)},
                     {rec.covariance(1, 0), rec.covariance(1, 1)}};
  j["fim_inferred"] = {{rec.fim_inferred(0, 0), rec.fim_inferred(0, 1)},
                       {rec.fim_inferred(1, 0), rec.fim_inferred(1, 1)}};
  auto [gp, gd] = ratio_coordinates(rec);
  j["gamma_phi"] = gp;
  j["gamma_delta"] = gd;
  nlohmann::json ests = nlohmann::json::array();
  for (const auto& e : rec.estimates)
    ests.push_back({{"phi_hat", e.phi_hat},
                    {"delta_hat", e.delta_hat},
                    {"loglik", e.loglik},
                    {"converged", e.converged}});
  j["estimates"] = ests;
  return j;
}

inline std::string experiment_record_csv_header() {
  return "phi,delta,nu,reps,merit,merit_error,gamma_phi,gamma_delta,"
         "cov_pp,cov_pd,cov_dd";
}

inline std::string experiment_record_csv_row(const ExperimentRecord& rec) {
  auto [gp, gd] = ratio_coordinates(rec);
  char buf[512];
  std::snprintf(buf, sizeof(buf),
                "%.17g,%.17g,%lld,%d,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g",
                rec.setting.phi, rec.setting.delta, rec.nu_target,
                rec.repetitions, rec.merit, rec.merit_error, gp, gd,
                rec.covariance(0, 0), rec.covariance(0, 1), rec.covariance(1, 1));
  return buf;
}

}  // namespace qmet
