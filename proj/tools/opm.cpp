// opm: generate instances, run the mechanism, verify its properties, run the
// ratio and event experiments, and replay recorded runs.

#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>
#include <sstream>

#include "opm/analysis.hpp"
#include "opm/errors.hpp"
#include "opm/generator.hpp"
#include "opm/io.hpp"
#include "opm/sweep.hpp"

namespace {

using namespace opm;

constexpr int kUsage = 2;

CountDist ParseCount(const std::string& text) {
  CountDist d;
  const auto colon = text.find(':');
  try {
    if (colon == std::string::npos) {
      d.lo = d.hi = static_cast<std::uint32_t>(std::stoul(text));
    } else {
      d.lo = static_cast<std::uint32_t>(std::stoul(text.substr(0, colon)));
      d.hi = static_cast<std::uint32_t>(std::stoul(text.substr(colon + 1)));
    }
  } catch (const std::exception&) {
    throw ParseError("", "count '" + text + "' must be N or LO:HI");
  }
  return d;
}

std::vector<std::uint64_t> Seeds(std::size_t n, std::uint64_t base) {
  std::vector<std::uint64_t> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = Rng::DeriveSeed(base, i);
  return out;
}

std::vector<Ratio> ParseAlphas(const std::vector<std::string>& texts) {
  std::vector<Ratio> out;
  for (const auto& t : texts) out.push_back(Ratio::Parse(t));
  return out;
}

void Emit(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    if (!text.empty() && text.back() != '\n') std::cout << '\n';
  } else {
    WriteFile(path, text);
  }
}

struct Common {
  std::uint64_t seed = 1;
  int threads = 1;
};

// ---------------------------------------------------------------------------

struct GenerateArgs {
  GeneratorConfig config;
  std::string users = "1:2", capacity = "1:2", cost = "uniform:0:100", value = "uniform:0:100";
  std::string alpha = "1";
  bool no_scale = false;
  std::string out;
};

int Generate(GenerateArgs& a, const Common& c) {
  a.config.users_per_mediator = ParseCount(a.users);
  a.config.capacity = ParseCount(a.capacity);
  a.config.cost = AmountDist::Parse(a.cost);
  a.config.value = AmountDist::Parse(a.value);
  a.config.target_alpha = Ratio::Parse(a.alpha);
  a.config.scale_counts = !a.no_scale;
  a.config.seed = c.seed;
  const Instance inst = GenerateInstance(a.config);
  Emit(a.out, SerializeInstance(inst));
  std::cerr << "generated " << inst.mediators().size() << " mediators, " << inst.advertisers().size()
            << " advertisers, tau " << Tau(inst) << '\n';
  return 0;
}

struct RunArgs {
  std::string instance, reports, alpha = "1", r, variant = "faithful", out;
  bool trajectories = false;
};

int Run(const RunArgs& a, const Common& c) {
  Instance inst = ParseInstance(ReadFile(a.instance));
  std::optional<ReportProfile> reports;
  if (!a.reports.empty()) reports = ParseReports(ReadFile(a.reports));
  MechanismConfig cfg;
  cfg.alpha = Ratio::Parse(a.alpha);
  if (!a.r.empty()) cfg.r = Ratio::Parse(a.r);
  cfg.seed = c.seed;
  cfg.variant = ParseVariant(a.variant);
  const RunReport run = RunReport::Run(std::move(inst), std::move(reports), cfg, a.trajectories);
  Emit(a.out, SerializeRunReport(run));
  const auto& o = run.outcome;
  std::cerr << "t " << o.observation_count << ", " << (o.thresholds.dummy() ? "dummy thresholds" : "thresholds set")
            << ", " << o.trades.size() << " trades\n";
  return 0;
}

struct VerifyArgs {
  std::size_t instances = 200, seeds = 20, misreports = 20;
  std::string alpha = "1/100", variant = "faithful";
  bool skip_ic = false;
};

void PrintTally(const char* role, const RoleTally& t) {
  std::cout << "  " << role << ": " << t.cases << " misreports, " << t.paired_runs << " paired runs, "
            << t.profitable << " profitable, " << t.losing << " losing, " << t.traded << " with trades\n";
}

int Verify(const VerifyArgs& a, const Common& c) {
  const Ratio alpha = Ratio::Parse(a.alpha);
  std::cout << "generating " << a.instances << " instances at alpha " << alpha.ToString() << '\n';
  const auto corpus = GenerateCorpus(a.instances, alpha, c.seed, c.threads);
  SweepConfig cfg;
  cfg.alpha = alpha;
  cfg.seeds = Seeds(a.seeds, Rng::DeriveSeed(c.seed, 1));
  cfg.variant = ParseVariant(a.variant);
  cfg.threads = c.threads;

  const AuditSweepResult audit = RunAuditSweep(corpus, cfg);
  std::cout << "truthful runs: " << audit.runs << " (" << audit.nonempty_runs << " with trades, " << audit.trades
            << " trades, " << audit.players_checked << " player trajectories)\n"
            << "  budget balance violations: " << audit.budget_violations << '\n'
            << "  continuous IR violations:  " << audit.ir_violations << '\n'
            << "  surplus invariant violations: " << audit.surplus_violations << '\n'
            << "  online legality violations: " << audit.legality_violations << '\n';
  bool ok = audit.ok();
  std::vector<std::string> examples = audit.examples;

  if (!a.skip_ic) {
    const IcSweepResult ic = RunIcSweep(corpus, cfg, a.misreports, Rng::DeriveSeed(c.seed, 2));
    std::cout << "deviations:\n";
    PrintTally("users", ic.users);
    PrintTally("mediators", ic.mediators);
    PrintTally("advertisers", ic.advertisers);
    std::cout << "  deviant-run surplus violations: " << ic.surplus_violations
              << ", legality violations: " << ic.legality_violations << '\n';
    ok = ok && ic.ok();
    examples.insert(examples.end(), ic.examples.begin(), ic.examples.end());
  }
  for (std::size_t i = 0; i < examples.size() && i < 8; ++i) std::cout << "  e.g. " << examples[i] << '\n';
  std::cout << (ok ? "verdict: pass" : "verdict: FAIL") << '\n';
  return ok ? 0 : 1;
}

struct ExperimentArgs {
  std::string kind;
  std::vector<std::string> alphas{"1/5", "1/20", "1/80"};
  std::size_t instances = 10, seeds = 50;
  std::string r, out;
};

int Experiment(const ExperimentArgs& a, const Common& c) {
  const auto alphas = ParseAlphas(a.alphas);
  std::ostringstream table;
  if (a.kind == "ratio") {
    std::vector<RatioPoint> points;
    for (std::size_t k = 0; k < alphas.size(); ++k) {
      ExperimentConfig cfg;
      cfg.alpha = alphas[k];
      if (!a.r.empty()) cfg.r = Ratio::Parse(a.r);
      cfg.seeds = Seeds(a.seeds, Rng::DeriveSeed(c.seed, 100 + k));
      cfg.threads = c.threads;
      const auto family = GenerateFamily(a.instances, alphas[k], Rng::DeriveSeed(c.seed, k), c.threads);
      points.push_back(RunRatioExperiment(family, cfg));
      const auto& p = points.back();
      std::cerr << "alpha " << p.alpha.ToString() << ": mean ratio " << p.mean << " (se " << p.std_error
                << ", tau ~" << p.mean_tau << ")\n";
    }
    WriteRatioTable(table, points);
    const TrendVerdict v = CheckRatioTrend(points, 0.5);
    for (const auto& n : v.notes) std::cerr << n << '\n';
  } else {
    std::vector<EventFrequencyResult> results;
    for (std::size_t k = 0; k < alphas.size(); ++k) {
      ExperimentConfig cfg;
      cfg.alpha = alphas[k];
      if (!a.r.empty()) cfg.r = Ratio::Parse(a.r);
      cfg.seeds = Seeds(a.seeds, Rng::DeriveSeed(c.seed, 100 + k));
      cfg.threads = c.threads;
      const auto family = GenerateCorpus(a.instances, alphas[k], Rng::DeriveSeed(c.seed, k), c.threads);
      results.push_back(RunEventFrequency(family, cfg));
      const auto& res = results.back();
      std::cerr << "alpha " << res.alpha.ToString() << ": Pr[E'] " << res.frequency("E'") << ", Pr[E] "
                << res.frequency("E") << " over " << res.runs << " runs\n";
    }
    WriteEventTable(table, results);
  }
  Emit(a.out, table.str());
  return 0;
}

int DoReplay(const std::string& path) {
  const ReplayResult res = Replay(ReadFile(path));
  if (res.bit_exact) {
    std::cout << "bit-exact: " << res.detail << '\n';
    return 0;
  }
  std::cout << "MISMATCH: " << res.detail << '\n';
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Observe-and-price mechanism toolkit"};
  app.require_subcommand(1);
  Common common;
  if (const char* env = std::getenv("OPM_SEED")) {
    try {
      common.seed = std::stoull(env);
    } catch (const std::exception&) {
      std::cerr << "OPM_SEED must be an unsigned integer\n";
      return kUsage;
    }
  }
  auto add_common = [&](CLI::App* sub, bool threads) {
    sub->add_option("--seed", common.seed, "Base seed (default $OPM_SEED or 1)");
    if (threads) sub->add_option("--threads", common.threads, "Worker threads (1 = serial)")->check(CLI::PositiveNumber);
  };

  GenerateArgs gen;
  auto* g = app.add_subcommand("generate", "Generate an instance file");
  g->add_option("--mediators", gen.config.mediators, "Initial mediator count");
  g->add_option("--advertisers", gen.config.advertisers, "Initial advertiser count");
  g->add_option("--users", gen.users, "Users per mediator, N or LO:HI");
  g->add_option("--capacity", gen.capacity, "Advertiser capacity, N or LO:HI");
  g->add_option("--cost", gen.cost, "Cost distribution, uniform:a:b[:grid] or lognormal:mu:sigma[:grid]");
  g->add_option("--value", gen.value, "Value distribution");
  g->add_option("--alpha", gen.alpha, "Target alpha");
  g->add_flag("--no-scale", gen.no_scale, "Do not grow the entity counts to meet alpha");
  g->add_option("-o,--out", gen.out, "Output file (default stdout)");
  add_common(g, false);

  RunArgs run;
  auto* r = app.add_subcommand("run", "Run the mechanism on an instance and write a run report");
  r->add_option("instance", run.instance, "Instance file")->required();
  r->add_option("--reports", run.reports, "Report profile file (default truthful)");
  r->add_option("--alpha", run.alpha, "Alpha");
  r->add_option("--r", run.r, "Observation probability (default derived from alpha)");
  r->add_option("--variant", run.variant, "faithful | pay-slot-price | skip-payment-updates");
  r->add_flag("--trajectories", run.trajectories, "Include per-arrival utility trajectories");
  r->add_option("-o,--out", run.out, "Output file (default stdout)");
  add_common(r, false);

  VerifyArgs ver;
  auto* v = app.add_subcommand("verify", "Audit budget balance, IR, truthfulness and invariants");
  v->add_option("--instances", ver.instances, "Generated instances");
  v->add_option("--seeds", ver.seeds, "Mechanism seeds per instance");
  v->add_option("--misreports", ver.misreports, "Misreports per player role");
  v->add_option("--alpha", ver.alpha, "Alpha of the corpus");
  v->add_option("--variant", ver.variant, "Engine variant");
  v->add_flag("--skip-ic", ver.skip_ic, "Only the truthful audits");
  add_common(v, true);

  ExperimentArgs exp;
  auto* e = app.add_subcommand("experiment", "Ratio or event-frequency grid");
  e->add_option("kind", exp.kind, "ratio | events")->required()->check(CLI::IsMember({"ratio", "events"}));
  e->add_option("--alphas", exp.alphas, "Alpha grid")->delimiter(',');
  e->add_option("--instances", exp.instances, "Instances per alpha");
  e->add_option("--seeds", exp.seeds, "Seeds per instance");
  e->add_option("--r", exp.r, "Fixed r (default derived from alpha)");
  e->add_option("-o,--out", exp.out, "CSV output (default stdout)");
  add_common(e, true);

  std::string replay_path;
  auto* p = app.add_subcommand("replay", "Re-run a run report and compare bytes");
  p->add_option("report", replay_path, "Run report file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& ex) {
    return app.exit(ex);
  } catch (const CLI::CallForAllHelp& ex) {
    return app.exit(ex);
  } catch (const CLI::ParseError& ex) {
    std::cerr << ex.what() << "\n\n" << (app.get_subcommands().empty() ? app.help() : app.get_subcommands().front()->help());
    return kUsage;
  }

  try {
    if (g->parsed()) return Generate(gen, common);
    if (r->parsed()) return Run(run, common);
    if (v->parsed()) return Verify(ver, common);
    if (e->parsed()) return Experiment(exp, common);
    return DoReplay(replay_path);
  } catch (const ParseError& ex) {
    std::cerr << "error: " << ex.what() << '\n';
    return kUsage;
  } catch (const GeneratorError& ex) {
    std::cerr << "error: " << ex.what() << '\n';
    return kUsage;
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << '\n';
    return kUsage;
  }
}
