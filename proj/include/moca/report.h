#pragma once

#include <string>
#include <vector>

#include "moca/credit.h"
#include "moca/harness.h"
#include "moca/metrics.h"
#include "moca/simulate.h"

namespace moca {

enum class ReportFormat { Jsonl, TableText };

// All emitters write deterministic bytes: stable field order, reals rounded
// to 4 decimals in metric reports. Empty inputs are an error and no file is
// created.

void emit_rewards_jsonl(const std::vector<ScoredTrajectory> & scored, const std::string & path);

void emit_advantages_jsonl(const std::vector<TokenAdvantages> & advantages, const std::string & path);

void emit_metrics(const std::vector<MetricsReport> & reports, const std::string & path, ReportFormat format);

void emit_agreement(const AgreementStats & stats, const std::string & path, ReportFormat format);

void emit_simulation(const SimulationReport & report, const std::string & path);

std::string format_metrics_table(const std::vector<MetricsReport> & reports);
std::string format_agreement_table(const AgreementStats & stats);

std::string agreement_to_json(const AgreementStats & stats);
std::string simulation_to_json(const SimulationReport & report);

}  // namespace moca
