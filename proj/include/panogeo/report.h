#pragma once

// Machine-readable reports for the evaluation and loss subcommands.
//
// JSON layout (key order is fixed):
//   {"tool", "version", "report", <metric blocks>, "details", "provenance"}
// The metric blocks carry exactly the table columns; counts and alignment
// parameters live under "details". CSV is a single header row of dotted key
// paths plus one row of JSON-encoded cells.

#include <optional>
#include <string>

#include <json.hpp>

#include "panogeo/eval_metrics.h"
#include "panogeo/losses.h"

namespace panogeo {

using OrderedJson = nlohmann::ordered_json;

inline constexpr const char* kToolVersion = "0.1.0";

struct MetricsReport {
  std::optional<PoseMetrics> pose;
  std::optional<DepthMetrics> depth;
  std::optional<PcMetrics> pc;
  OrderedJson provenance = OrderedJson::object();
};

OrderedJson report_json(const MetricsReport& report);
OrderedJson report_json(const LossReport& report,
                        const OrderedJson& provenance = OrderedJson::object());

enum class ReportFormat { kJson, kCsv };

std::string to_csv(const OrderedJson& report);
OrderedJson csv_to_json(const std::string& csv);

// Serialized text ending in a newline.
std::string serialize(const OrderedJson& report, ReportFormat format);

}  // namespace panogeo
