#pragma once

#include "mbclust/experiment.hpp"

#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace mbclust {

/// Mean and sample standard deviation of one metric over the successful
/// runs of a method. Both are absent when no run produced the metric.
struct MetricStats {
    std::optional<double> mean;
    std::optional<double> std;
    int count = 0;
};

enum class WilcoxonStatus { NotRequested, Reference, Computed, Insufficient };

struct MethodSummary {
    std::string method;
    int runs = 0;
    int failed = 0;
    MetricStats ari;
    MetricStats nmi;
    MetricStats ci;
    MetricStats fitness;
    MetricStats wall_time;
    WilcoxonStatus wilcoxon = WilcoxonStatus::NotRequested;
    double wilcoxon_p = 0.0;  // meaningful only when wilcoxon == Computed
};

MetricStats describe(const std::vector<double>& values);

/// One summary per method tag in lexicographic order. With a reference tag,
/// each other method's ARI is paired with the reference's by seed and
/// compared with the signed-rank test. Throws InvalidState on empty input.
std::vector<MethodSummary> summarize(const std::vector<RunRecord>& records,
                                     const std::optional<std::string>& reference = std::nullopt);

enum class ReportFormat { Csv, Json };

ReportFormat parse_report_format(std::string_view name);

void emit_report(const std::vector<RunRecord>& records, ReportFormat format, std::ostream& out,
                 const std::optional<std::string>& reference = std::nullopt);

/// One CSV line per run, in the order given.
void emit_records_csv(const std::vector<RunRecord>& records, std::ostream& out);

}  // namespace mbclust
