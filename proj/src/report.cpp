#include "ktlb/report.hpp"

#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>

namespace ktlb {

namespace {

std::string fixed(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

std::string fixed(const std::optional<double>& v) { return v ? fixed(*v) : std::string(); }

std::optional<double> ratio(double num, double den) {
  if (den == 0) return num == 0 ? std::optional<double>(1.0) : std::nullopt;
  return num / den;
}

std::string join_widths(const std::vector<unsigned>& k) {
  std::string s;
  for (std::size_t i = 0; i < k.size(); ++i) {
    if (i) s += '|';
    s += std::to_string(k[i]);
  }
  return s;
}

std::size_t field_count(const std::string& line) {
  std::size_t n = 1;
  for (char c : line) n += c == ',' ? 1 : 0;
  return n;
}

}  // namespace

ReportRow make_row(std::string workload, SimReport report, const SimReport* base) {
  ReportRow row{std::move(workload), std::move(report), std::nullopt, std::nullopt};
  if (base != nullptr) {
    row.relative_misses = ratio(static_cast<double>(row.report.walks), static_cast<double>(base->walks));
    row.coverage_ratio = ratio(row.report.coverage_mean(), base->coverage_mean());
  }
  return row;
}

const std::vector<std::string>& report_columns() {
  static const std::vector<std::string> cols = {
      "workload",        "scheme",           "k_count",
      "k_set",           "anchor_distance",  "accesses",
      "l1_misses",       "l2_hits",          "coalesced_hits",
      "walks",           "relative_misses_vs_base",
      "coverage_mean",   "coverage_ratio",   "predictor_accuracy",
      "cycles_l1",       "cycles_l2_hit",    "cycles_coalesced",
      "cycles_extra_lookup", "cycles_walk",  "total_cycles",
      "cycles_per_access", "cycles_per_instruction", "init_work",
  };
  return cols;
}

void write_report(std::ostream& out, const std::vector<ReportRow>& rows) {
  const auto& cols = report_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
  out << '\n';
  for (const ReportRow& row : rows) {
    const SimReport& r = row.report;
    out << row.workload << ',' << r.scheme << ',' << r.k_set.size() << ','
        << join_widths(r.k_set) << ',' << r.anchor_distance << ',' << r.accesses << ','
        << r.l1_misses() << ',' << r.l2_hits << ',' << r.coalesced_hits << ',' << r.walks << ','
        << fixed(row.relative_misses) << ',' << fixed(r.coverage_mean()) << ','
        << fixed(row.coverage_ratio) << ',' << fixed(r.predictor_accuracy()) << ','
        << r.cycles_l1 << ',' << r.cycles_l2_hit << ',' << r.cycles_coalesced << ','
        << r.cycles_extra_lookup << ',' << r.cycles_walk << ',' << r.total_cycles << ','
        << fixed(r.cycles_per_access()) << ',' << fixed(r.cycles_per_instruction()) << ','
        << r.init_work << '\n';
  }
}

void emit_report(const std::string& path, const std::vector<ReportRow>& rows) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write report '" + path + "'");
  write_report(out, rows);
  if (!out) throw Error("write failed for '" + path + "'");
}

void merge_reports(const std::vector<std::string>& paths, std::ostream& out) {
  std::string header;
  for (const std::string& path : paths) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open report '" + path + "'");
    std::string line;
    if (!std::getline(in, line)) throw FormatError("empty report '" + path + "'", 1);
    if (header.empty()) {
      header = line;
      out << header << '\n';
    } else if (line != header) {
      throw FormatError("header of '" + path + "' differs", 1);
    }
    const std::size_t fields = field_count(header);
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
      ++lineno;
      if (line.empty()) continue;
      if (field_count(line) != fields) throw FormatError("wrong field count in '" + path + "'", lineno);
      out << line << '\n';
    }
  }
}

void write_histogram_csv(std::ostream& out, const std::string& workload,
                         const ContiguityHistogram& h, bool header) {
  static constexpr const char* kBands[] = {"small", "medium", "large"};
  if (header) out << "workload,size,freq,pages,band\n";
  for (const HistogramBin& b : h.bins) {
    out << workload << ',' << b.size << ',' << b.freq << ',' << b.size * b.freq << ','
        << kBands[static_cast<int>(band_of(b.size))] << '\n';
  }
}

}  // namespace ktlb
