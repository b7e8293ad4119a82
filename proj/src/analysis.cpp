#include "opm/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "opm/parallel.hpp"

namespace opm {

namespace {

template <typename Ref>
bool Contains(const std::vector<Ref>& sorted, const Ref& x) {
  return std::binary_search(sorted.begin(), sorted.end(), x);
}

template <typename Ref>
std::vector<Ref> Sorted(std::vector<Ref> v) {
  std::sort(v.begin(), v.end());
  return v;
}

double CubeRoot(Ratio a) { return std::cbrt(a.ToDouble()); }

}  // namespace

std::vector<std::string> DiagnosticSets::broken_consequences() const {
  std::vector<std::string> out;
  if (!e()) return out;
  if (!tilde_b_unobserved_in_hat_b) out.push_back("B~ \\ B(A_T) not inside B^");
  if (!tilde_p_unobserved_in_hat_p) out.push_back("P~ \\ P(M_T) not inside P^");
  if (!hat_sandwich) out.push_back("ell does not separate P^ from B^");
  if (!hat_p_in_p_o) out.push_back("P^ not inside P_o");
  if (!hat_b_in_b_o) out.push_back("B^ not inside B_o");
  if (!hat_sizes_in_band) out.push_back("|P^| or |B^| outside its band");
  return out;
}

DiagnosticSets ComputeDiagnosticSets(const Instance& instance, const MechanismOutcome& outcome,
                                     Ratio r, Ratio alpha, Rng& rng) {
  const ReportProfile truth = ReportProfile::Truthful(instance);
  const CanonicalAssignment canon = Canonicalize(AllUsers(instance, truth), AllSlots(instance, truth));
  DiagnosticSets d;
  d.tau = canon.size;
  if (d.tau == 0) throw std::invalid_argument("tau = 0: the market has no profitable trade");

  for (std::size_t i = 0; i < d.tau; ++i) {
    d.p_o.push_back(canon.users[i].ref);
    d.b_o.push_back(canon.slots[i].ref);
  }
  const std::size_t tilde = ScaledPrefixLocation(d.tau, 6, alpha, r).value_or(0);
  d.tilde_p.assign(d.p_o.begin(), d.p_o.begin() + static_cast<std::ptrdiff_t>(tilde));
  d.tilde_b.assign(d.b_o.begin(), d.b_o.begin() + static_cast<std::ptrdiff_t>(tilde));
  d.ell = canon.slot_at(d.tau).key.amount;

  std::vector<bool> m_observed(instance.mediators().size(), false);
  std::vector<bool> a_observed(instance.advertisers().size(), false);
  for (std::uint32_t m : outcome.observed_mediators()) m_observed[m] = true;
  for (std::uint32_t a : outcome.observed_advertisers()) a_observed[a] = true;

  for (std::uint32_t m = 0; m < instance.mediators().size(); ++m) {
    if (m_observed[m]) continue;
    for (std::uint32_t i = 0; i < instance.mediators()[m].user_costs.size(); ++i)
      if (outcome.thresholds.user_assignable(UserKey(instance, truth, {m, i}))) d.hat_p.push_back({m, i});
  }
  for (std::uint32_t a = 0; a < instance.advertisers().size(); ++a) {
    if (a_observed[a]) continue;
    for (std::uint32_t s = 0; s < instance.advertisers()[a].capacity; ++s)
      if (outcome.thresholds.slot_assignable(SlotKey(instance, truth, {a, s}))) d.hat_b.push_back({a, s});
  }

  d.observed_canonical_size = Canonicalize(UsersOf(instance, truth, outcome.observed_mediators()),
                                           SlotsOf(instance, truth, outcome.observed_advertisers()))
                                  .size;

  // f and L.
  const std::size_t post = outcome.arrival_order.size() - outcome.observation_count;
  const bool everyone = ScaledCubeRootAtLeastOne(16, alpha, r);
  const double p = everyone ? 1.0 : 16 * CubeRoot(alpha) / r.ToDouble();
  for (std::size_t i = 0; i < post; ++i) d.f += (everyone || rng.Bernoulli(p)) ? 1 : 0;
  std::vector<bool> m_in_l(instance.mediators().size(), false);
  std::vector<bool> a_in_l(instance.advertisers().size(), false);
  for (std::size_t i = outcome.arrival_order.size() - d.f; i < outcome.arrival_order.size(); ++i) {
    const EntityId e = outcome.arrival_order[i];
    d.l.push_back(e);
    if (e.is_mediator()) {
      d.m_l.push_back(e.index);
      m_in_l[e.index] = true;
    } else {
      d.a_l.push_back(e.index);
      a_in_l[e.index] = true;
    }
  }

  auto observed_users = [&](const std::vector<UserRef>& xs) {
    return static_cast<std::size_t>(
        std::count_if(xs.begin(), xs.end(), [&](const UserRef& u) { return m_observed[u.mediator]; }));
  };
  auto observed_slots = [&](const std::vector<SlotRef>& xs) {
    return static_cast<std::size_t>(
        std::count_if(xs.begin(), xs.end(), [&](const SlotRef& b) { return a_observed[b.advertiser]; }));
  };
  const std::size_t p_o_t = observed_users(d.p_o), b_o_t = observed_slots(d.b_o);
  d.e_prime_b_o = WithinCubeRootBand(b_o_t, d.b_o.size(), r, alpha, d.tau);
  d.e_prime_p_o = WithinCubeRootBand(p_o_t, d.p_o.size(), r, alpha, d.tau);
  d.e_prime_tilde_b = WithinCubeRootBand(observed_slots(d.tilde_b), d.tilde_b.size(), r, alpha, d.tau);
  d.e_prime_tilde_p = WithinCubeRootBand(observed_users(d.tilde_p), d.tilde_p.size(), r, alpha, d.tau);

  const auto hat_b_outside = static_cast<std::size_t>(std::count_if(
      d.hat_b.begin(), d.hat_b.end(), [&](const SlotRef& b) { return !a_in_l[b.advertiser]; }));
  const auto hat_p_outside = static_cast<std::size_t>(std::count_if(
      d.hat_p.begin(), d.hat_p.end(), [&](const UserRef& u) { return !m_in_l[u.mediator]; }));
  d.hat_b_outside_l_fits = hat_b_outside <= d.hat_p.size();
  d.hat_p_outside_l_fits = hat_p_outside <= d.hat_b.size();

  const auto hat_p = Sorted(d.hat_p);
  const auto hat_b = Sorted(d.hat_b);
  d.tilde_b_unobserved_in_hat_b = std::all_of(d.tilde_b.begin(), d.tilde_b.end(), [&](const SlotRef& b) {
    return a_observed[b.advertiser] || Contains(hat_b, b);
  });
  d.tilde_p_unobserved_in_hat_p = std::all_of(d.tilde_p.begin(), d.tilde_p.end(), [&](const UserRef& u) {
    return m_observed[u.mediator] || Contains(hat_p, u);
  });
  auto cost = [&](const UserRef& u) { return instance.mediators()[u.mediator].user_costs[u.user]; };
  auto value = [&](const SlotRef& b) { return instance.advertisers()[b.advertiser].value; };
  d.hat_sandwich = std::all_of(hat_p.begin(), hat_p.end(), [&](const UserRef& u) { return cost(u) <= d.ell; }) &&
                   std::all_of(hat_b.begin(), hat_b.end(), [&](const SlotRef& b) { return d.ell <= value(b); });
  const auto p_o = Sorted(d.p_o);
  const auto b_o = Sorted(d.b_o);
  d.hat_p_in_p_o = std::all_of(hat_p.begin(), hat_p.end(), [&](const UserRef& u) { return Contains(p_o, u); });
  d.hat_b_in_b_o = std::all_of(hat_b.begin(), hat_b.end(), [&](const SlotRef& b) { return Contains(b_o, b); });
  d.hat_sizes_in_band = WithinAssignableBand(d.hat_p.size(), d.tau, r, alpha) &&
                        WithinAssignableBand(d.hat_b.size(), d.tau, r, alpha);

  d.ell_sandwich = std::all_of(d.p_o.begin(), d.p_o.end(), [&](const UserRef& u) { return cost(u) <= d.ell; }) &&
                   std::all_of(d.b_o.begin(), d.b_o.end(), [&](const SlotRef& b) { return d.ell <= value(b); });
  const std::size_t lo = std::min(p_o_t, b_o_t), hi = std::max(p_o_t, b_o_t);
  d.observed_size_sandwich = lo <= d.observed_canonical_size && d.observed_canonical_size <= hi;
  return d;
}

Interval Wilson(std::size_t successes, std::size_t n, double z) {
  if (n == 0) return {0, 1};
  const double nn = static_cast<double>(n);
  const double p = static_cast<double>(successes) / nn;
  const double z2 = z * z;
  const double centre = (p + z2 / (2 * nn)) / (1 + z2 / nn);
  const double half = z * std::sqrt(p * (1 - p) / nn + z2 / (4 * nn * nn)) / (1 + z2 / nn);
  return {std::max(0.0, centre - half), std::min(1.0, centre + half)};
}

double EventBound(Ratio alpha) { return 1 - 10 * std::exp(-2 / CubeRoot(alpha)); }

double RatioBound(Ratio alpha, Ratio r) {
  return 1 - r.ToDouble() - 22 * CubeRoot(alpha) / r.ToDouble() - 10 * std::exp(-2 / CubeRoot(alpha));
}

double HeadlineRatioBound(Ratio alpha) {
  return 1 - 9.5 * std::pow(alpha.ToDouble(), 1.0 / 6) - 10 * std::exp(-2 / CubeRoot(alpha));
}

// ---------------------------------------------------------------------------

namespace {

struct Job {
  std::size_t instance;
  std::uint64_t seed;
};

std::vector<Job> Jobs(std::size_t instances, const std::vector<std::uint64_t>& seeds) {
  std::vector<Job> jobs;
  jobs.reserve(instances * seeds.size());
  for (std::size_t i = 0; i < instances; ++i)
    for (std::uint64_t s : seeds) jobs.push_back({i, s});
  return jobs;
}

MechanismConfig ConfigFor(const ExperimentConfig& config, std::uint64_t seed) {
  MechanismConfig cfg;
  cfg.alpha = config.alpha;
  cfg.r = config.r;
  cfg.seed = seed;
  cfg.forced_observation_count = config.forced_observation_count;
  return cfg;
}

const char* const kEventNames[] = {"E'", "E'(i) B_o", "E'(ii) P_o", "E'(iii) B~", "E'(iv) P~",
                                   "E(i) B^ outside L", "E(ii) P^ outside L", "E"};

}  // namespace

const EventCount& EventFrequencyResult::count(const std::string& name) const {
  for (const auto& e : events)
    if (e.name == name) return e;
  throw std::out_of_range("no event named " + name);
}

double EventFrequencyResult::frequency(const std::string& name) const {
  return runs == 0 ? 0 : static_cast<double>(count(name).hits) / static_cast<double>(runs);
}

EventFrequencyResult RunEventFrequency(const std::vector<Instance>& family,
                                       const ExperimentConfig& config) {
  EventFrequencyResult res;
  res.alpha = config.alpha;
  res.r = config.r.value_or(DeriveR(config.alpha));
  res.bound_raw = EventBound(config.alpha);
  res.bound = ClampBound(res.bound_raw);

  std::vector<bool> usable(family.size());
  for (std::size_t i = 0; i < family.size(); ++i) usable[i] = Tau(family[i]) > 0;
  res.skipped_instances = static_cast<std::size_t>(std::count(usable.begin(), usable.end(), false));

  struct Row {
    bool used = false;
    std::size_t tau = 0;
    bool flags[8] = {};
    std::vector<std::string> broken;
    bool ell = true, observed = true;
  };
  const auto jobs = Jobs(family.size(), config.seeds);
  std::vector<Row> rows(jobs.size());
  ParallelFor(jobs.size(), config.threads, [&](std::size_t j) {
    const Instance& inst = family[jobs[j].instance];
    if (!usable[jobs[j].instance]) return;
    const auto out = RunMechanism(inst, ReportProfile::Truthful(inst), ConfigFor(config, jobs[j].seed));
    Rng tail(Rng::DeriveSeed(jobs[j].seed, kTailSampleLabel));
    const DiagnosticSets d = ComputeDiagnosticSets(inst, out, out.r, config.alpha, tail);
    Row& row = rows[j];
    row.used = true;
    row.tau = d.tau;
    const bool f[8] = {d.e_prime(), d.e_prime_b_o, d.e_prime_p_o, d.e_prime_tilde_b,
                       d.e_prime_tilde_p, d.hat_b_outside_l_fits, d.hat_p_outside_l_fits, d.e()};
    std::copy(std::begin(f), std::end(f), row.flags);
    row.broken = d.broken_consequences();
    row.ell = d.ell_sandwich;
    row.observed = d.observed_size_sandwich;
  });

  std::size_t hits[8] = {};
  double tau_sum = 0;
  for (std::size_t j = 0; j < rows.size(); ++j) {
    const Row& row = rows[j];
    if (!row.used) continue;
    ++res.runs;
    tau_sum += static_cast<double>(row.tau);
    for (int k = 0; k < 8; ++k) hits[k] += row.flags[k];
    const std::string where =
        "instance " + std::to_string(jobs[j].instance) + " seed " + std::to_string(jobs[j].seed) + ": ";
    if (!row.broken.empty()) {
      ++res.consequence_violations;
      if (res.examples.size() < 5) res.examples.push_back(where + row.broken.front());
    }
    if (!row.ell) {
      ++res.ell_sandwich_violations;
      if (res.examples.size() < 5) res.examples.push_back(where + "ell sandwich fails");
    }
    if (!row.observed) {
      ++res.observed_size_violations;
      if (res.examples.size() < 5) res.examples.push_back(where + "observed canonical size outside bracket");
    }
  }
  res.mean_tau = res.runs ? tau_sum / static_cast<double>(res.runs) : 0;
  for (int k = 0; k < 8; ++k) res.events.push_back({kEventNames[k], hits[k], Wilson(hits[k], res.runs)});
  return res;
}

double RunRatio(const Instance& instance, const MechanismOutcome& outcome) {
  const ReportProfile truth = ReportProfile::Truthful(instance);
  const Money opt = Canonicalize(AllUsers(instance, truth), AllSlots(instance, truth)).Gain();
  if (opt <= Money()) throw std::invalid_argument("optimal gain from trade is 0");
  const Money got = GainFromTrade(outcome.assignment(), truth);
  return static_cast<double>(got.micros()) / static_cast<double>(opt.micros());
}

RatioPoint RunRatioExperiment(const std::vector<Instance>& family, const ExperimentConfig& config) {
  RatioPoint pt;
  pt.alpha = config.alpha;
  pt.r = config.r.value_or(DeriveR(config.alpha));
  pt.bound_raw = RatioBound(config.alpha, pt.r);
  pt.headline_bound_raw = HeadlineRatioBound(config.alpha);
  pt.bound = ClampBound(pt.bound_raw);

  std::vector<std::size_t> taus(family.size());
  ParallelFor(family.size(), config.threads, [&](std::size_t i) { taus[i] = Tau(family[i]); });
  for (std::size_t t : taus) pt.skipped_instances += t == 0;

  struct Row {
    bool used = false;
    double ratio = 0;
    bool nonempty = false, dummy = false;
  };
  const auto jobs = Jobs(family.size(), config.seeds);
  std::vector<Row> rows(jobs.size());
  ParallelFor(jobs.size(), config.threads, [&](std::size_t j) {
    const Instance& inst = family[jobs[j].instance];
    if (taus[jobs[j].instance] == 0) return;
    const auto out = RunMechanism(inst, ReportProfile::Truthful(inst), ConfigFor(config, jobs[j].seed));
    rows[j] = {true, RunRatio(inst, out), !out.trades.empty(), out.thresholds.dummy()};
  });

  std::vector<double> ratios;
  double tau_sum = 0;
  std::size_t nonempty = 0, dummy = 0;
  for (std::size_t j = 0; j < rows.size(); ++j) {
    if (!rows[j].used) continue;
    ratios.push_back(rows[j].ratio);
    tau_sum += static_cast<double>(taus[jobs[j].instance]);
    nonempty += rows[j].nonempty;
    dummy += rows[j].dummy;
  }
  pt.runs = ratios.size();
  if (pt.runs == 0) return pt;
  const double n = static_cast<double>(pt.runs);
  pt.mean_tau = tau_sum / n;
  double sum = 0;
  for (double x : ratios) sum += x;
  pt.mean = sum / n;
  double ss = 0;
  for (double x : ratios) ss += (x - pt.mean) * (x - pt.mean);
  pt.sd = pt.runs > 1 ? std::sqrt(ss / (n - 1)) : 0;
  pt.std_error = pt.sd / std::sqrt(n);
  pt.nonempty_fraction = static_cast<double>(nonempty) / n;
  pt.dummy_fraction = static_cast<double>(dummy) / n;
  std::sort(ratios.begin(), ratios.end());
  auto q = [&](double p) { return ratios[static_cast<std::size_t>(p * (n - 1) + 0.5)]; };
  pt.min = ratios.front();
  pt.p10 = q(0.1);
  pt.median = q(0.5);
  pt.p90 = q(0.9);
  pt.max = ratios.back();
  return pt;
}

TrendVerdict CheckRatioTrend(const std::vector<RatioPoint>& points, double floor) {
  TrendVerdict v;
  for (std::size_t i = 1; i < points.size(); ++i) {
    const RatioPoint& a = points[i - 1];
    const RatioPoint& b = points[i];
    const double se = std::sqrt(a.std_error * a.std_error + b.std_error * b.std_error);
    const double step = b.mean - a.mean;
    if (step < -2 * se) {
      v.non_decreasing = false;
      v.notes.push_back("mean falls from " + std::to_string(a.mean) + " at alpha " + a.alpha.ToString() +
                        " to " + std::to_string(b.mean) + " at alpha " + b.alpha.ToString());
    }
  }
  if (!points.empty() && points.back().mean < floor) {
    v.floor_met = false;
    v.notes.push_back("mean " + std::to_string(points.back().mean) + " at alpha " +
                      points.back().alpha.ToString() + " is below " + std::to_string(floor));
  }
  return v;
}

}  // namespace opm
