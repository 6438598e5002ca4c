#pragma once

#include <string>

#include "rbs/metrics.hpp"

namespace rbs {

enum class ReportFormat : uint8_t { Rows = 0, Table = 1, Plot = 2 };

// Parses "rows" | "table" | "plot"; throws ConfigError otherwise.
ReportFormat parse_format(const std::string& s);
const char* format_extension(ReportFormat f);

// Byte-stable rendering: the same report always produces identical bytes.
// Rows: one record per line, machine-parseable. Table: human-readable.
// Plot: (series, x, y) triples for external plotting.
std::string render_report(const MetricsReport& rep, ReportFormat format);

}  // namespace rbs
