#include "opm/io.hpp"

#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "opm/canonical.hpp"
#include "opm/errors.hpp"

namespace opm {

using Json = nlohmann::ordered_json;

namespace {

// ---------------------------------------------------------------------------
// Reading

std::string Join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }
std::string Index(const std::string& path, std::size_t i) { return path + "[" + std::to_string(i) + "]"; }

const Json& Field(const Json& obj, const std::string& key, const std::string& path) {
  if (!obj.is_object()) throw ParseError(path.empty() ? "document" : path, "expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) throw ParseError(Join(path, key), key + " required");
  return *it;
}

const Json* Optional(const Json& obj, const std::string& key) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return nullptr;
  return &*it;
}

const Json& Array(const Json& j, const std::string& path) {
  if (!j.is_array()) throw ParseError(path, "expected an array");
  return j;
}

Money AsMoney(const Json& j, const std::string& path) {
  if (j.is_number_integer()) {
    const auto v = j.get<std::int64_t>();
    if (v > 9'000'000'000'000LL || v < -9'000'000'000'000LL) throw ParseError(path, "amount out of range");
    return Money::Units(v);
  }
  if (!j.is_string()) throw ParseError(path, "amount must be a decimal string");
  try {
    return Money::Parse(j.get<std::string>());
  } catch (const ParseError& e) {
    throw ParseError(path, e.what());
  }
}

std::uint64_t AsU64(const Json& j, const std::string& path) {
  if (!j.is_number_unsigned() && !(j.is_number_integer() && j.get<std::int64_t>() >= 0))
    throw ParseError(path, "expected a non-negative integer");
  return j.get<std::uint64_t>();
}

std::uint32_t AsU32(const Json& j, const std::string& path) {
  const std::uint64_t v = AsU64(j, path);
  if (v > UINT32_MAX) throw ParseError(path, "integer out of range");
  return static_cast<std::uint32_t>(v);
}

Ratio AsRatio(const Json& j, const std::string& path) {
  if (!j.is_string()) throw ParseError(path, "expected a rational string such as \"1/100\"");
  try {
    return Ratio::Parse(j.get<std::string>());
  } catch (const std::exception& e) {
    throw ParseError(path, e.what());
  }
}

EntityId AsEntity(const Json& j, const std::string& path) {
  if (!j.is_string()) throw ParseError(path, "expected an entity id such as \"m0\"");
  try {
    return EntityId::Parse(j.get<std::string>());
  } catch (const std::exception& e) {
    throw ParseError(path, e.what());
  }
}

void CheckHeader(const Json& doc, std::string_view kind) {
  if (!doc.is_object()) throw ParseError("document", "expected an object");
  const Json& v = Field(doc, "schema_version", "");
  if (!v.is_number_integer() || v.get<int>() != kSchemaVersion)
    throw ParseError("schema_version", "unsupported schema version (expected " + std::to_string(kSchemaVersion) + ")");
  const Json& k = Field(doc, "kind", "");
  if (!k.is_string() || k.get<std::string>() != kind)
    throw ParseError("kind", "expected \"" + std::string(kind) + "\"");
}

Json ParseText(std::string_view text) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ParseError("syntax", e.what());
  }
}

// Places entries by their "id"; ids must be unique and cover 0..n-1.
template <typename T, typename Fn>
std::vector<T> ByIndex(const Json& list, const std::string& path, EntityKind kind, Fn&& read) {
  Array(list, path);
  std::vector<std::optional<T>> slots(list.size());
  for (std::size_t i = 0; i < list.size(); ++i) {
    const std::string at = Index(path, i);
    const EntityId id = AsEntity(Field(list[i], "id", at), Join(at, "id"));
    if (id.kind != kind) throw ParseError(Join(at, "id"), "wrong entity kind " + id.ToString());
    if (id.index >= list.size())
      throw ParseError(Join(at, "id"), id.ToString() + " out of range: ids must be 0.." + std::to_string(list.size() - 1));
    if (slots[id.index]) throw ParseError(Join(at, "id"), "duplicate id " + id.ToString());
    slots[id.index] = read(list[i], at);
  }
  std::vector<T> out;
  out.reserve(slots.size());
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

Instance InstanceFrom(const Json& doc) {
  CheckHeader(doc, "instance");
  auto mediators = ByIndex<MediatorSpec>(Field(doc, "mediators", ""), "mediators", EntityKind::kMediator,
                                         [](const Json& j, const std::string& at) {
                                           MediatorSpec m;
                                           const std::string p = Join(at, "user_costs");
                                           const Json& costs = Array(Field(j, "user_costs", at), p);
                                           for (std::size_t k = 0; k < costs.size(); ++k) {
                                             const Money c = AsMoney(costs[k], Index(p, k));
                                             if (c < Money()) throw ParseError(Index(p, k), "negative cost");
                                             m.user_costs.push_back(c);
                                           }
                                           return m;
                                         });
  auto advertisers = ByIndex<AdvertiserSpec>(Field(doc, "advertisers", ""), "advertisers", EntityKind::kAdvertiser,
                                             [](const Json& j, const std::string& at) {
                                               AdvertiserSpec a;
                                               a.capacity = AsU32(Field(j, "capacity", at), Join(at, "capacity"));
                                               if (a.capacity == 0) throw ParseError(Join(at, "capacity"), "capacity must be positive");
                                               a.value = AsMoney(Field(j, "value", at), Join(at, "value"));
                                               if (a.value < Money()) throw ParseError(Join(at, "value"), "negative value");
                                               return a;
                                             });
  std::vector<EntityId> order;
  const Json& tie = Array(Field(doc, "tie_order", ""), "tie_order");
  for (std::size_t i = 0; i < tie.size(); ++i) order.push_back(AsEntity(tie[i], Index("tie_order", i)));
  try {
    return Instance::Create(std::move(mediators), std::move(advertisers), std::move(order));
  } catch (const std::invalid_argument& e) {
    throw ParseError("tie_order", e.what());
  }
}

ReportProfile ReportsFrom(const Json& doc) {
  CheckHeader(doc, "reports");
  ReportProfile rep;
  rep.mediators = ByIndex<MediatorReport>(Field(doc, "mediators", ""), "mediators", EntityKind::kMediator,
                                          [](const Json& j, const std::string& at) {
                                            MediatorReport m;
                                            const std::string p = Join(at, "users");
                                            const Json& users = Array(Field(j, "users", at), p);
                                            for (std::size_t k = 0; k < users.size(); ++k) {
                                              const std::string u = Index(p, k);
                                              ReportedUser r;
                                              r.cost = AsMoney(Field(users[k], "cost", u), Join(u, "cost"));
                                              if (r.cost < Money()) throw ParseError(Join(u, "cost"), "negative cost");
                                              if (const Json* b = Optional(users[k], "backing"))
                                                r.backing = AsU32(*b, Join(u, "backing"));
                                              m.users.push_back(r);
                                            }
                                            return m;
                                          });
  rep.advertisers = ByIndex<AdvertiserReport>(Field(doc, "advertisers", ""), "advertisers", EntityKind::kAdvertiser,
                                              [](const Json& j, const std::string& at) {
                                                AdvertiserReport a;
                                                a.capacity = AsU32(Field(j, "capacity", at), Join(at, "capacity"));
                                                a.value = AsMoney(Field(j, "value", at), Join(at, "value"));
                                                if (a.value < Money()) throw ParseError(Join(at, "value"), "negative value");
                                                return a;
                                              });
  return rep;
}

TieKey KeyFrom(const Json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 3) throw ParseError(path, "key must be [amount, rank, index]");
  return {AsMoney(j[0], Index(path, 0)), AsU32(j[1], Index(path, 1)), AsU32(j[2], Index(path, 2))};
}

MechanismConfig ConfigFrom(const Json& j) {
  const std::string p = "config";
  MechanismConfig c;
  c.alpha = AsRatio(Field(j, "alpha", p), "config.alpha");
  if (const Json* r = Optional(j, "r")) c.r = AsRatio(*r, "config.r");
  c.seed = AsU64(Field(j, "seed", p), "config.seed");
  const Json& v = Field(j, "variant", p);
  if (!v.is_string()) throw ParseError("config.variant", "expected a string");
  try {
    c.variant = ParseVariant(v.get<std::string>());
  } catch (const std::invalid_argument& e) {
    throw ParseError("config.variant", e.what());
  }
  if (const Json* t = Optional(j, "threshold_override")) {
    Thresholds th;
    if (const Json* u = Optional(*t, "user")) th.user = KeyFrom(*u, "config.threshold_override.user");
    if (const Json* s = Optional(*t, "slot")) th.slot = KeyFrom(*s, "config.threshold_override.slot");
    c.threshold_override = th;
  }
  if (const Json* o = Optional(j, "forced_arrival_order")) {
    std::vector<EntityId> order;
    Array(*o, "config.forced_arrival_order");
    for (std::size_t i = 0; i < o->size(); ++i)
      order.push_back(AsEntity((*o)[i], Index("config.forced_arrival_order", i)));
    c.forced_arrival_order = std::move(order);
  }
  if (const Json* t = Optional(j, "forced_observation_count"))
    c.forced_observation_count = AsU64(*t, "config.forced_observation_count");
  return c;
}

// ---------------------------------------------------------------------------
// Writing

Json Header(std::string_view kind) {
  Json j;
  j["schema_version"] = kSchemaVersion;
  j["kind"] = kind;
  return j;
}

Json ToJson(const Instance& inst) {
  Json j = Header("instance");
  Json ms = Json::array();
  for (std::uint32_t m = 0; m < inst.mediators().size(); ++m) {
    Json costs = Json::array();
    for (Money c : inst.mediators()[m].user_costs) costs.push_back(c.ToString());
    ms.push_back(Json{{"id", EntityId::Mediator(m).ToString()}, {"user_costs", costs}});
  }
  Json as = Json::array();
  for (std::uint32_t a = 0; a < inst.advertisers().size(); ++a) {
    const auto& ad = inst.advertisers()[a];
    as.push_back(Json{{"id", EntityId::Advertiser(a).ToString()}, {"capacity", ad.capacity}, {"value", ad.value.ToString()}});
  }
  Json order = Json::array();
  for (EntityId e : inst.tie_order()) order.push_back(e.ToString());
  j["mediators"] = ms;
  j["advertisers"] = as;
  j["tie_order"] = order;
  return j;
}

Json ToJson(const ReportProfile& rep) {
  Json j = Header("reports");
  Json ms = Json::array();
  for (std::uint32_t m = 0; m < rep.mediators.size(); ++m) {
    Json users = Json::array();
    for (const auto& u : rep.mediators[m].users)
      users.push_back(Json{{"cost", u.cost.ToString()}, {"backing", u.backing ? Json(*u.backing) : Json(nullptr)}});
    ms.push_back(Json{{"id", EntityId::Mediator(m).ToString()}, {"users", users}});
  }
  Json as = Json::array();
  for (std::uint32_t a = 0; a < rep.advertisers.size(); ++a)
    as.push_back(Json{{"id", EntityId::Advertiser(a).ToString()},
                      {"capacity", rep.advertisers[a].capacity},
                      {"value", rep.advertisers[a].value.ToString()}});
  j["mediators"] = ms;
  j["advertisers"] = as;
  return j;
}

Json ToJson(const TieKey& k) { return Json::array({k.amount.ToString(), k.entity_rank, k.within}); }

Json ToJson(const MechanismConfig& c) {
  Json j;
  j["alpha"] = c.alpha.ToString();
  j["r"] = c.r ? Json(c.r->ToString()) : Json(nullptr);
  j["seed"] = c.seed;
  j["variant"] = VariantName(c.variant);
  if (c.threshold_override) {
    const auto& t = *c.threshold_override;
    j["threshold_override"] = Json{{"user", t.user ? ToJson(*t.user) : Json(nullptr)},
                                   {"slot", t.slot ? ToJson(*t.slot) : Json(nullptr)}};
  } else {
    j["threshold_override"] = nullptr;
  }
  if (c.forced_arrival_order) {
    Json o = Json::array();
    for (EntityId e : *c.forced_arrival_order) o.push_back(e.ToString());
    j["forced_arrival_order"] = o;
  } else {
    j["forced_arrival_order"] = nullptr;
  }
  j["forced_observation_count"] = c.forced_observation_count ? Json(*c.forced_observation_count) : Json(nullptr);
  return j;
}

Json ToJson(const MechanismOutcome& o) {
  Json j;
  j["alpha"] = o.alpha.ToString();
  j["r"] = o.r.ToString();
  j["seed"] = o.seed;
  j["variant"] = VariantName(o.variant);
  j["used_overrides"] = o.used_overrides;
  Json order = Json::array();
  for (EntityId e : o.arrival_order) order.push_back(e.ToString());
  j["arrival_order"] = order;
  j["t"] = o.observation_count;
  j["observed_canonical_size"] = o.observed_canonical_size;
  if (o.thresholds.dummy()) {
    j["thresholds"] = Json{{"dummy", true}};
  } else {
    j["thresholds"] = Json{{"dummy", false},
                           {"p_hat_cost", o.thresholds.user->amount.ToString()},
                           {"b_hat_value", o.thresholds.slot->amount.ToString()},
                           {"p_hat_key", ToJson(*o.thresholds.user)},
                           {"b_hat_key", ToJson(*o.thresholds.slot)}};
  }
  Json trades = Json::array();
  for (const Trade& t : o.trades)
    trades.push_back(Json{{"event", t.event},
                          {"seq", t.seq},
                          {"user", Json::array({t.user.mediator, t.user.user})},
                          {"slot", Json::array({t.slot.advertiser, t.slot.slot})},
                          {"charge", t.charge.ToString()},
                          {"payment", t.payment.ToString()},
                          {"charge_key", ToJson(t.charge_key)},
                          {"payment_key", ToJson(t.payment_key)}});
  j["trades"] = trades;
  Json updates = Json::array();
  for (const TargetUpdate& u : o.target_updates)
    updates.push_back(Json{{"event", u.event},
                           {"seq", u.seq},
                           {"mediator", u.mediator},
                           {"target", u.target.ToString()},
                           {"within_event", u.within_event}});
  j["target_updates"] = updates;
  Json events = Json::array();
  for (const EventRecord& e : o.events)
    events.push_back(Json{{"entity", e.entity.ToString()},
                          {"trades", Json::array({e.trades_begin, e.trades_end})},
                          {"updates", Json::array({e.updates_begin, e.updates_end})}});
  j["events"] = events;
  auto amounts = [](const std::vector<Money>& v) {
    Json a = Json::array();
    for (Money m : v) a.push_back(m.ToString());
    return a;
  };
  j["charges"] = amounts(o.charges);
  j["receipts"] = amounts(o.receipts);
  j["targets"] = amounts(o.targets);
  return j;
}

Json Verdict(const std::vector<std::string>& violations) {
  Json v = Json::array();
  for (std::size_t i = 0; i < violations.size() && i < 20; ++i) v.push_back(violations[i]);
  return Json{{"ok", violations.empty()}, {"violations", violations.size()}, {"first", v}};
}

Json Summary(const RunReport& r) {
  const ReportProfile truth = ReportProfile::Truthful(r.instance);
  const CanonicalAssignment canon = Canonicalize(AllUsers(r.instance, truth), AllSlots(r.instance, truth));
  const Money gft = GainFromTrade(r.outcome.assignment(), truth);
  Json s;
  s["tau"] = canon.size;
  s["t"] = r.outcome.observation_count;
  s["trades"] = r.outcome.trades.size();
  s["gft"] = gft.ToString();
  s["opt_gft"] = canon.Gain().ToString();
  if (canon.Gain() > Money()) {
    std::ostringstream os;
    os << std::setprecision(12) << static_cast<double>(gft.micros()) / static_cast<double>(canon.Gain().micros());
    s["ratio"] = os.str();
  } else {
    s["ratio"] = nullptr;
  }
  return s;
}

Json Checks(const RunReport& r) {
  Json c;
  c["budget_balance"] = Verdict(CheckBudgetBalance(r.outcome, r.reports).violations);
  c["continuous_ir"] = r.truthful ? Verdict(CheckAllContinuousIR(r.outcome, r.instance, r.reports).violations) : Json(nullptr);
  c["surplus_invariant"] = Verdict(CheckSurplusInvariant(r.outcome, r.instance, r.reports).violations);
  c["online_legality"] = Verdict(CheckOnlineLegality(r.outcome, r.reports).violations);
  return c;
}

Json Diagnostics(const RunReport& r) {
  if (!r.truthful || Tau(r.instance) == 0) return nullptr;
  Rng tail(Rng::DeriveSeed(r.outcome.seed, kTailSampleLabel));
  const DiagnosticSets d = ComputeDiagnosticSets(r.instance, r.outcome, r.outcome.r, r.outcome.alpha, tail);
  Json j;
  j["tau"] = d.tau;
  j["tilde_size"] = d.tilde_p.size();
  j["hat_p_size"] = d.hat_p.size();
  j["hat_b_size"] = d.hat_b.size();
  j["ell"] = d.ell.ToString();
  j["f"] = d.f;
  j["e_prime"] = d.e_prime();
  j["e"] = d.e();
  j["ell_sandwich"] = d.ell_sandwich;
  j["observed_size_sandwich"] = d.observed_size_sandwich;
  return j;
}

Json Trajectories(const RunReport& r) {
  std::vector<Player> players;
  for (std::uint32_t m = 0; m < r.instance.mediators().size(); ++m) {
    players.push_back(MediatorPlayer{m});
    for (std::uint32_t u = 0; u < r.instance.mediators()[m].user_costs.size(); ++u) players.push_back(UserPlayer{m, u});
  }
  for (std::uint32_t a = 0; a < r.instance.advertisers().size(); ++a) players.push_back(AdvertiserPlayer{a});
  Json out = Json::array();
  for (const Player& p : players) {
    const UtilityTrajectory t = ComputeTrajectory(r.outcome, r.instance, r.reports, p);
    Json series = Json::array();
    for (const Utility& u : t.series) series.push_back(u.infeasible ? std::string("-inf") : u.value.ToString());
    out.push_back(Json{{"player", PlayerName(p)}, {"series", series}});
  }
  return out;
}

std::string Dump(const Json& j) { return j.dump(2) + "\n"; }

std::string Fixed(double x) {
  std::ostringstream os;
  os << std::setprecision(10) << x;
  return os.str();
}

}  // namespace

std::string SerializeInstance(const Instance& instance) { return Dump(ToJson(instance)); }

Instance ParseInstance(std::string_view text) { return InstanceFrom(ParseText(text)); }

std::string SerializeReports(const ReportProfile& reports) { return Dump(ToJson(reports)); }

ReportProfile ParseReports(std::string_view text) { return ReportsFrom(ParseText(text)); }

std::string_view VariantName(EngineVariant v) {
  switch (v) {
    case EngineVariant::kFaithful: return "faithful";
    case EngineVariant::kPaySlotPrice: return "pay-slot-price";
    case EngineVariant::kSkipPaymentUpdates: return "skip-payment-updates";
  }
  return "faithful";
}

EngineVariant ParseVariant(std::string_view name) {
  for (EngineVariant v : {EngineVariant::kFaithful, EngineVariant::kPaySlotPrice, EngineVariant::kSkipPaymentUpdates})
    if (VariantName(v) == name) return v;
  throw std::invalid_argument("unknown engine variant '" + std::string(name) + "'");
}

RunReport RunReport::Run(Instance instance, std::optional<ReportProfile> reports, MechanismConfig config,
                         bool with_trajectories) {
  RunReport r;
  r.truthful = !reports.has_value();
  r.reports = reports ? std::move(*reports) : ReportProfile::Truthful(instance);
  r.instance = std::move(instance);
  r.config = std::move(config);
  r.with_trajectories = with_trajectories;
  r.outcome = RunMechanism(r.instance, r.reports, r.config);
  return r;
}

std::string SerializeOutcome(const MechanismOutcome& outcome) { return Dump(ToJson(outcome)); }

std::string SerializeRunReport(const RunReport& report) {
  Json j = Header("run_report");
  j["instance"] = ToJson(report.instance);
  j["reports"] = report.truthful ? Json(nullptr) : ToJson(report.reports);
  j["config"] = ToJson(report.config);
  j["summary"] = Summary(report);
  j["checks"] = Checks(report);
  j["diagnostics"] = Diagnostics(report);
  j["outcome"] = ToJson(report.outcome);
  if (report.with_trajectories) j["trajectories"] = Trajectories(report);
  return Dump(j);
}

ReplayResult Replay(std::string_view report_text) {
  const Json doc = ParseText(report_text);
  CheckHeader(doc, "run_report");
  std::optional<ReportProfile> reports;
  if (const Json* r = Optional(doc, "reports")) reports = ReportsFrom(*r);
  const RunReport again = RunReport::Run(InstanceFrom(Field(doc, "instance", "")), std::move(reports),
                                         ConfigFrom(Field(doc, "config", "")));
  ReplayResult res;
  const std::string recorded = Dump(Field(doc, "outcome", ""));
  const std::string fresh = SerializeOutcome(again.outcome);
  if (recorded != fresh) {
    std::size_t at = 0;
    while (at < recorded.size() && at < fresh.size() && recorded[at] == fresh[at]) ++at;
    res.detail = "outcome differs from byte " + std::to_string(at);
    return res;
  }
  if (Dump(Field(doc, "summary", "")) != Dump(Summary(again))) {
    res.detail = "summary differs";
    return res;
  }
  res.bit_exact = true;
  res.detail = std::to_string(again.outcome.trades.size()) + " trades, " +
               std::to_string(again.outcome.events.size()) + " arrivals reproduced";
  return res;
}

void WriteRatioTable(std::ostream& os, const std::vector<RatioPoint>& points) {
  os << "alpha,r,runs,skipped_instances,mean_tau,mean_ratio,sd,std_error,min,p10,median,p90,max,"
        "nonempty_fraction,dummy_fraction,bound_raw,headline_bound_raw,bound\n";
  for (const RatioPoint& p : points)
    os << p.alpha.ToString() << ',' << p.r.ToString() << ',' << p.runs << ',' << p.skipped_instances << ','
       << Fixed(p.mean_tau) << ',' << Fixed(p.mean) << ',' << Fixed(p.sd) << ',' << Fixed(p.std_error) << ','
       << Fixed(p.min) << ',' << Fixed(p.p10) << ',' << Fixed(p.median) << ',' << Fixed(p.p90) << ','
       << Fixed(p.max) << ',' << Fixed(p.nonempty_fraction) << ',' << Fixed(p.dummy_fraction) << ','
       << Fixed(p.bound_raw) << ',' << Fixed(p.headline_bound_raw) << ',' << Fixed(p.bound) << '\n';
}

void WriteEventTable(std::ostream& os, const std::vector<EventFrequencyResult>& results) {
  os << "alpha,r,runs,mean_tau,event,hits,frequency,ci_lo,ci_hi,bound_raw,bound,"
        "consequence_violations,ell_sandwich_violations,observed_size_violations\n";
  for (const auto& res : results)
    for (const auto& e : res.events)
      os << res.alpha.ToString() << ',' << res.r.ToString() << ',' << res.runs << ',' << Fixed(res.mean_tau) << ",\""
         << e.name << "\"," << e.hits << ',' << Fixed(res.frequency(e.name)) << ',' << Fixed(e.ci.lo) << ','
         << Fixed(e.ci.hi) << ',' << Fixed(res.bound_raw) << ',' << Fixed(res.bound) << ','
         << res.consequence_violations << ',' << res.ell_sandwich_violations << ','
         << res.observed_size_violations << '\n';
}

std::string ReadFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void WriteFile(const std::string& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
  if (!out) throw std::runtime_error("write failed for " + path);
}

}  // namespace opm
