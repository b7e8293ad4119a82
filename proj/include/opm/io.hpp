#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "opm/analysis.hpp"
#include "opm/econ.hpp"
#include "opm/market.hpp"
#include "opm/mechanism.hpp"
#include "opm/sweep.hpp"

namespace opm {

// All documents are JSON with a "schema_version" and a "kind" field. Amounts
// are decimal strings on the 1e-6 grid; rationals are "num/den" strings;
// entities are "m<i>" / "a<i>". Serialization is canonical: the same value
// always produces the same bytes.
inline constexpr int kSchemaVersion = 1;

std::string SerializeInstance(const Instance& instance);
// Throws ParseError naming the offending field.
Instance ParseInstance(std::string_view text);

std::string SerializeReports(const ReportProfile& reports);
ReportProfile ParseReports(std::string_view text);

std::string_view VariantName(EngineVariant v);
EngineVariant ParseVariant(std::string_view name);

// Everything needed to repeat one run, plus what it produced.
struct RunReport {
  Instance instance;
  ReportProfile reports;
  bool truthful = true;  // reports are the instance's truth; not stored separately
  MechanismConfig config;
  MechanismOutcome outcome;
  bool with_trajectories = false;

  // Runs the mechanism and fills the outcome. Absent reports mean truthful.
  static RunReport Run(Instance instance, std::optional<ReportProfile> reports, MechanismConfig config,
                       bool with_trajectories = false);
};

std::string SerializeRunReport(const RunReport& report);

// The JSON text of the outcome section alone; replays compare these bytes.
std::string SerializeOutcome(const MechanismOutcome& outcome);

struct ReplayResult {
  bool bit_exact = false;
  std::string detail;
};

// Parses a report, re-runs it from its recorded inputs and compares the new
// outcome with the recorded one byte for byte.
ReplayResult Replay(std::string_view report_text);

// Comma-separated result tables.
void WriteRatioTable(std::ostream& os, const std::vector<RatioPoint>& points);
void WriteEventTable(std::ostream& os, const std::vector<EventFrequencyResult>& results);

std::string ReadFile(const std::string& path);
void WriteFile(const std::string& path, std::string_view text);

}  // namespace opm
