#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "opm/canonical.hpp"
#include "opm/market.hpp"
#include "opm/mechanism.hpp"
#include "opm/rng.hpp"

namespace opm {

// The sets of the competitive-ratio analysis for one truthful run, built from
// the instance's true amounts. Set members are in canonical order where that
// exists, otherwise sorted by reference.
struct DiagnosticSets {
  std::size_t tau = 0;
  std::vector<UserRef> p_o;  // users of S_c(P, B)
  std::vector<SlotRef> b_o;
  std::vector<UserRef> tilde_p;  // locations 1..ceil((1 - 6 alpha^(1/3) / r) tau)
  std::vector<SlotRef> tilde_b;
  std::vector<UserRef> hat_p;  // assignable users of post-observation mediators
  std::vector<SlotRef> hat_b;
  Money ell;  // value of the slot at location tau

  std::size_t observed_canonical_size = 0;  // |S_c(P(M_T), B(A_T))|
  std::size_t f = 0;
  std::vector<EntityId> l;  // last f entities of sigma_E
  std::vector<std::uint32_t> m_l, a_l;

  // E': |X ∩ observed| within alpha^(1/3) tau of r |X| for X = B_o, P_o, B~, P~.
  bool e_prime_b_o = false;
  bool e_prime_p_o = false;
  bool e_prime_tilde_b = false;
  bool e_prime_tilde_p = false;
  // The two extra conditions of E.
  bool hat_b_outside_l_fits = false;  // |B^ \ B(A_L)| <= |P^|
  bool hat_p_outside_l_fits = false;  // |P^ \ P(M_L)| <= |B^|

  // Consequences that E is claimed to imply; measured, never assumed.
  bool tilde_b_unobserved_in_hat_b = false;  // (i)
  bool tilde_p_unobserved_in_hat_p = false;  // (ii)
  bool hat_sandwich = false;                 // (v): c(p) <= ell <= v(b) on P^ x B^
  bool hat_p_in_p_o = false;                 // upper inclusion
  bool hat_b_in_b_o = false;
  bool hat_sizes_in_band = false;            // -7 alpha^(1/3) tau / r <= |X^| - (1-r) tau <= alpha^(1/3) tau

  // Deterministic facts, expected on every run.
  bool ell_sandwich = false;         // c(p) <= ell <= v(b) on P_o x B_o
  bool observed_size_sandwich = false;  // min/max bracket of |S_c(P(M_T), B(A_T))|

  bool e_prime() const { return e_prime_b_o && e_prime_p_o && e_prime_tilde_b && e_prime_tilde_p; }
  bool e() const { return e_prime() && hat_b_outside_l_fits && hat_p_outside_l_fits; }
  // Consequences of E that failed although E held.
  std::vector<std::string> broken_consequences() const;
};

// Rng::DeriveSeed label of the f draw's substream, apart from the mechanism's coins.
inline constexpr std::uint64_t kTailSampleLabel = 0x4c;

// `rng` drives only the draw of f: one Bernoulli(min{16 alpha^(1/3) / r, 1})
// per post-observation entity. Throws std::invalid_argument when tau = 0.
DiagnosticSets ComputeDiagnosticSets(const Instance& instance, const MechanismOutcome& outcome,
                                     Ratio r, Ratio alpha, Rng& rng);

struct Interval {
  double lo = 0;
  double hi = 0;
};
// Wilson score interval, 95% by default.
Interval Wilson(std::size_t successes, std::size_t n, double z = 1.959963984540054);

// 1 - 10 e^(-2 / alpha^(1/3)); may be negative.
double EventBound(Ratio alpha);
// 1 - r - 22 alpha^(1/3) / r - 10 e^(-2 / alpha^(1/3))
double RatioBound(Ratio alpha, Ratio r);
// 1 - 9.5 alpha^(1/6) - 10 e^(-2 / alpha^(1/3)), the r = 4 alpha^(1/6) form.
double HeadlineRatioBound(Ratio alpha);
inline double ClampBound(double b) { return b < 0 ? 0 : b; }

// --------------------------------------------------------------------------
// Experiments. Each (instance, seed) pair is one run; runs are independent and
// fan out over `threads` (1 = serial). Results are reduced in run order.

struct ExperimentConfig {
  Ratio alpha{1, 1};
  std::optional<Ratio> r;  // DeriveR(alpha) when absent
  std::optional<std::size_t> forced_observation_count;
  std::vector<std::uint64_t> seeds;
  int threads = 1;
};

struct EventCount {
  std::string name;
  std::size_t hits = 0;
  Interval ci;
};

struct EventFrequencyResult {
  Ratio alpha;
  Ratio r;
  std::size_t runs = 0;
  std::size_t skipped_instances = 0;  // tau = 0
  double mean_tau = 0;
  std::vector<EventCount> events;  // E', its four inequalities, E's two extras, E
  double bound_raw = 0;
  double bound = 0;  // clamped
  std::size_t consequence_violations = 0;  // E held but a claimed consequence failed
  std::size_t ell_sandwich_violations = 0;
  std::size_t observed_size_violations = 0;
  std::vector<std::string> examples;  // first few violations

  const EventCount& count(const std::string& name) const;
  double frequency(const std::string& name) const;
};

EventFrequencyResult RunEventFrequency(const std::vector<Instance>& family,
                                       const ExperimentConfig& config);

struct RatioPoint {
  Ratio alpha;
  Ratio r;
  std::size_t runs = 0;
  std::size_t skipped_instances = 0;  // optimum gain 0
  double mean_tau = 0;
  double mean = 0;
  double sd = 0;
  double std_error = 0;
  double min = 0, p10 = 0, median = 0, p90 = 0, max = 0;
  double nonempty_fraction = 0;  // runs with at least one trade
  double dummy_fraction = 0;     // runs with dummy thresholds
  double bound_raw = 0;          // with this r
  double headline_bound_raw = 0;
  double bound = 0;              // clamped
};

// GfT(S^) / GfT(S_c(P, B)) under truthful reports.
double RunRatio(const Instance& instance, const MechanismOutcome& outcome);

RatioPoint RunRatioExperiment(const std::vector<Instance>& family, const ExperimentConfig& config);

struct TrendVerdict {
  bool non_decreasing = true;  // every step above -2 standard errors
  bool floor_met = true;       // mean at the smallest alpha >= floor
  std::vector<std::string> notes;
};

// `points` ordered by decreasing alpha.
TrendVerdict CheckRatioTrend(const std::vector<RatioPoint>& points, double floor);

}  // namespace opm
