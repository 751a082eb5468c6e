#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "ktlb/memory_map.hpp"
#include "ktlb/simulation.hpp"

namespace ktlb {

/// One CSV row: a (workload, scheme, configuration) run normalized against
/// the Base run of the same workload.
struct ReportRow {
  std::string workload;
  SimReport report;
  std::optional<double> relative_misses;  // walks / Base walks
  std::optional<double> coverage_ratio;   // mean coverage / Base mean coverage
};

/// `base` may be null, leaving the relative columns empty.
ReportRow make_row(std::string workload, SimReport report, const SimReport* base);

/// Column names in output order.
const std::vector<std::string>& report_columns();

void write_report(std::ostream& out, const std::vector<ReportRow>& rows);
void emit_report(const std::string& path, const std::vector<ReportRow>& rows);

/// Concatenates report CSVs that share one header. Throws FormatError when
/// a header differs or a row has the wrong field count.
void merge_reports(const std::vector<std::string>& paths, std::ostream& out);

/// Histogram CSV: workload,size,freq,pages,band.
void write_histogram_csv(std::ostream& out, const std::string& workload,
                         const ContiguityHistogram& h, bool header = true);

}  // namespace ktlb
