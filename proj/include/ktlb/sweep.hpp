#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ktlb/memory_map.hpp"
#include "ktlb/report.hpp"
#include "ktlb/simulation.hpp"
#include "ktlb/trace.hpp"

namespace ktlb {

/// A mapping plus a trace, each read from a file or generated.
struct WorkloadSpec {
  std::string name;
  std::optional<std::string> mapping_path;
  ContiguityKind kind = ContiguityKind::kMixed;
  std::uint64_t pages = 1 << 18;
  std::uint64_t map_seed = 1;
  Placement placement = Placement::kSizeClass;
  std::optional<std::string> trace_path;
  TraceOptions trace;
};

struct Workload {
  std::string name;
  PageTable mapping;
  AccessTrace trace;
};

Workload build_workload(const WorkloadSpec& spec);

/// A K configuration for the kaligned scheme: fixed widths, or a psi bound
/// for the histogram-driven selection.
struct KSetting {
  std::optional<AlignmentSet> widths;
  unsigned psi = 4;
};

struct SweepSpec {
  std::vector<WorkloadSpec> workloads;
  std::vector<SchemeId> schemes;
  /// Applied to kaligned only; empty means one run with `base.psi`.
  std::vector<KSetting> k_settings;
  /// Shared settings; scheme and K fields are overwritten per run.
  SimConfig base;
  /// Concurrent runs. 1 runs everything on the calling thread.
  unsigned jobs = 1;
};

/// Runs the cartesian product workloads x schemes x K settings. Row order is
/// workload, then scheme in the given order, then K setting, independent of
/// `jobs`. A hidden Base run normalizes every workload whose scheme list
/// lacks it.
std::vector<ReportRow> run_sweep(const SweepSpec& spec);

}  // namespace ktlb
