#include "ktlb/sweep.hpp"

#include <algorithm>
#include <exception>

namespace ktlb {

Workload build_workload(const WorkloadSpec& spec) {
  Workload w;
  w.name = spec.name;
  w.mapping = spec.mapping_path ? load_mapping(*spec.mapping_path)
                                : generate_synthetic_mapping(spec.kind, spec.pages, spec.map_seed, spec.placement);
  if (spec.trace_path) {
    w.trace = load_trace(*spec.trace_path);
    w.trace.accesses_per_instruction = spec.trace.accesses_per_instruction;
  } else {
    w.trace = generate_trace(w.mapping, spec.trace);
  }
  validate_trace(w.mapping, w.trace);
  return w;
}

namespace {

struct Run {
  std::size_t workload;
  SimConfig config;
  bool hidden;
};

}  // namespace

std::vector<ReportRow> run_sweep(const SweepSpec& spec) {
  if (spec.jobs == 0) throw ConfigError("jobs must be at least 1");
  std::vector<Workload> workloads;
  workloads.reserve(spec.workloads.size());
  for (const WorkloadSpec& ws : spec.workloads) workloads.push_back(build_workload(ws));

  const bool has_base = std::find(spec.schemes.begin(), spec.schemes.end(), SchemeId::kBase) !=
                        spec.schemes.end();
  std::vector<KSetting> k_settings = spec.k_settings;
  if (k_settings.empty()) k_settings.push_back({std::nullopt, spec.base.psi});

  std::vector<Run> runs;
  std::vector<std::size_t> base_run(workloads.size());
  for (std::size_t w = 0; w < workloads.size(); ++w) {
    if (!has_base) {
      SimConfig c = spec.base;
      c.scheme = SchemeId::kBase;
      base_run[w] = runs.size();
      runs.push_back({w, c, true});
    }
    for (SchemeId s : spec.schemes) {
      SimConfig c = spec.base;
      c.scheme = s;
      if (s == SchemeId::kBase) base_run[w] = runs.size();
      if (s != SchemeId::kKAligned) {
        runs.push_back({w, c, false});
        continue;
      }
      for (const KSetting& k : k_settings) {
        c.widths = k.widths;
        c.psi = k.psi;
        runs.push_back({w, c, false});
      }
    }
  }

  std::vector<SimReport> reports(runs.size());
  std::vector<std::exception_ptr> errors(runs.size());
  const long n = static_cast<long>(runs.size());
  const auto execute = [&](long i) {
    try {
      const Run& r = runs[i];
      reports[i] = run_simulation(workloads[r.workload].mapping, workloads[r.workload].trace, r.config);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  };
  if (spec.jobs == 1) {
    for (long i = 0; i < n; ++i) execute(i);
  } else {
#pragma omp parallel for schedule(dynamic, 1) num_threads(spec.jobs)
    for (long i = 0; i < n; ++i) execute(i);
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  std::vector<ReportRow> rows;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    if (runs[i].hidden) continue;
    const std::size_t w = runs[i].workload;
    rows.push_back(make_row(workloads[w].name, reports[i], &reports[base_run[w]]));
  }
  return rows;
}

}  // namespace ktlb
