// ktlbsim: trace-driven TLB simulation driver.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "ktlb/config.hpp"
#include "ktlb/k_select.hpp"
#include "ktlb/report.hpp"
#include "ktlb/simulation.hpp"
#include "ktlb/sweep.hpp"
#include "ktlb/trace.hpp"

using namespace ktlb;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitTrace = 3;

// Widths separated by ',', ':' or '|'.
AlignmentSet parse_widths(const std::string& text, double theta, unsigned psi) {
  std::vector<unsigned> widths;
  std::string token;
  std::istringstream in(text);
  while (std::getline(in, token, text.find('|') != std::string::npos   ? '|'
                                 : text.find(':') != std::string::npos ? ':'
                                                                       : ',')) {
    if (token.empty()) continue;
    try {
      widths.push_back(static_cast<unsigned>(std::stoul(token)));
    } catch (const std::exception&) {
      throw ConfigError("bad alignment width '" + token + "'");
    }
  }
  if (widths.empty()) throw ConfigError("empty alignment set '" + text + "'");
  return AlignmentSet(widths, theta, std::max<unsigned>(psi, static_cast<unsigned>(widths.size())));
}

struct MappingArgs {
  std::string path;
  std::string kind = "mixed";
  std::uint64_t pages = 1 << 18;
  std::uint64_t seed = 1;
  std::string placement = "size-class";

  void add(CLI::App* app) {
    app->add_option("--mapping", path, "Mapping file (vpn ppn perm per line)");
    app->add_option("--kind", kind, "Synthetic contiguity: small, medium, large, mixed");
    app->add_option("--pages", pages, "Synthetic mapping size in pages");
    app->add_option("--map-seed", seed, "Synthetic mapping seed");
    app->add_option("--placement", placement, "Synthetic chunk placement: size-class, buddy, packed");
  }
  PageTable load() const {
    if (!path.empty()) return load_mapping(path);
    return generate_synthetic_mapping(parse_contiguity_kind(kind), pages, seed,
                                      parse_placement(placement));
  }
  std::string name() const {
    if (!path.empty()) return std::filesystem::path(path).stem().string();
    return kind + "-s" + std::to_string(seed);
  }
};

struct TraceArgs {
  std::string path;
  std::string pattern = "zipf";
  TraceOptions options;
  std::string widths;
  std::string zipf_weight = "page";

  void add(CLI::App* app) {
    app->add_option("--trace", path, "Trace file (text or TLBTRACE1 binary)");
    app->add_option("--pattern", pattern, "sequential, strided, random, zipf, alternating");
    app->add_option("--length", options.length, "Generated accesses");
    app->add_option("--trace-seed", options.seed, "Trace seed");
    app->add_option("--stride", options.stride, "Page stride for the strided pattern");
    app->add_option("--zipf-alpha", options.zipf_alpha);
    app->add_option("--zipf-weight", zipf_weight, "Zipf weight per chunk: page (size-scaled) or chunk");
    app->add_option("--burst", options.burst, "Pages per zipf pick");
    app->add_option("--write-fraction", options.write_fraction);
    app->add_option("--unmap-every", options.unmap_every, "Unmap a page every N accesses");
    app->add_option("--apc", options.accesses_per_instruction, "Memory accesses per instruction");
    app->add_option("--alternate-k", widths, "Widths for the alternating pattern");
  }
  TraceOptions resolved() const {
    TraceOptions o = options;
    o.pattern = parse_trace_pattern(pattern);
    if (zipf_weight != "page" && zipf_weight != "chunk") {
      throw ConfigError("zipf weight must be 'page' or 'chunk'");
    }
    o.zipf_page_weighted = zipf_weight == "page";
    if (!widths.empty()) o.widths = parse_widths(widths, 0.9, 8);
    return o;
  }
  AccessTrace load(const PageTable& pt) const {
    if (path.empty()) return generate_trace(pt, resolved());
    AccessTrace t = load_trace(path);
    t.accesses_per_instruction = options.accesses_per_instruction;
    return t;
  }
};

struct SimArgs {
  SimConfig config;
  std::string k;
  bool no_probe_charge = false;

  void add(CLI::App* app, bool scheme) {
    if (scheme) app->add_option("--k", k, "Fixed alignment set, e.g. 4,7");
    app->add_option("--theta", config.theta, "Coverage target for K selection");
    app->add_option("--psi", config.psi, "Upper bound on |K|");
    app->add_option("--anchor-distance", config.anchor_distance);
    app->add_option("--rmm-min-range", config.rmm_min_range, "Smallest chunk kept as a range");
    app->add_option("--coverage-interval", config.coverage_interval, "Accesses per coverage sample");
    app->add_option("--reeval-interval", config.reeval_interval, "Accesses per K re-evaluation");
    app->add_flag("--no-probe-charge", no_probe_charge, "Do not charge probes that precede a walk");
    app->add_flag("--verify", config.verify, "Check every translation against the mapping");
  }
  SimConfig resolved() const {
    SimConfig c = config;
    c.latency.charge_probes_before_walk = !no_probe_charge;
    if (!k.empty()) c.widths = parse_widths(k, c.theta, c.psi);
    return c;
  }
};

std::vector<std::string> split_list(const std::vector<std::string>& items) {
  std::vector<std::string> out;
  for (const std::string& item : items) {
    std::istringstream in(item);
    std::string token;
    while (std::getline(in, token, ',')) {
      if (!token.empty()) out.push_back(token);
    }
  }
  return out;
}

void print_summary(std::ostream& out, const std::string& workload, const SimReport& r) {
  out << workload << " " << r.scheme;
  if (!r.k_set.empty()) {
    out << " K={";
    for (std::size_t i = 0; i < r.k_set.size(); ++i) out << (i ? "," : "") << r.k_set[i];
    out << "}";
  }
  if (r.anchor_distance) out << " distance=" << r.anchor_distance;
  out << "\n  accesses " << r.accesses << "  l1 misses " << r.l1_misses() << "  l2 hits "
      << r.l2_hits << "  coalesced hits " << r.coalesced_hits << "  walks " << r.walks << "\n"
      << std::fixed << std::setprecision(4) << "  cycles " << r.total_cycles << "  per access "
      << r.cycles_per_access() << "  per instruction " << r.cycles_per_instruction()
      << "  coverage " << r.coverage_mean();
  if (auto acc = r.predictor_accuracy()) out << "  predictor " << *acc;
  if (r.mismatches) out << "  MISMATCHES " << r.mismatches;
  out << "\n" << std::defaultfloat;
}

// Config-file entries go in front of the user's flags; a key the user also
// passes on the command line is dropped so the flag wins.
std::vector<std::string> merge_config(const std::vector<std::string>& argv) {
  std::vector<std::string> user(argv.begin() + 1, argv.end());
  std::string config_path;
  std::set<std::string> given;
  for (std::size_t i = 0; i < user.size(); ++i) {
    const std::string& a = user[i];
    if (a.rfind("--", 0) != 0) continue;
    const std::string flag = a.substr(0, a.find('='));
    if (flag == "--config") {
      config_path = a.find('=') != std::string::npos ? a.substr(a.find('=') + 1)
                    : i + 1 < user.size()             ? user[i + 1]
                                                      : "";
    }
    given.insert(flag);
  }
  if (config_path.empty() || user.empty()) return user;

  std::vector<std::string> merged{user.front()};  // subcommand
  for (const std::string& a : config_to_args(load_config(config_path))) {
    if (!given.count(a.substr(0, a.find('=')))) merged.push_back(a);
  }
  merged.insert(merged.end(), user.begin() + 1, user.end());
  return merged;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Trace-driven simulator for K-bit aligned TLB coalescing and baseline schemes"};
  app.require_subcommand(1);
  std::string config_path;
  const auto add_config = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "key=value run configuration; flags override it");
  };

  // simulate
  auto* simulate = app.add_subcommand("simulate", "Run one scheme over one workload");
  MappingArgs sim_map;
  TraceArgs sim_trace;
  SimArgs sim;
  std::string sim_scheme = "kaligned";
  std::string sim_out;
  sim_map.add(simulate);
  sim_trace.add(simulate);
  sim.add(simulate, true);
  simulate->add_option("--scheme", sim_scheme, "base, thp, colt, cluster, rmm, anchor, "
                                               "anchor-static, anchor-dynamic, kaligned");
  simulate->add_option("--seed", sim_map.seed, "Alias of --map-seed");
  simulate->add_option("--out", sim_out, "Write the report row(s) as CSV");
  add_config(simulate);

  // sweep
  auto* sweep = app.add_subcommand("sweep", "Cartesian product of schemes x mappings x K settings");
  MappingArgs sw_map;
  TraceArgs sw_trace;
  SimArgs sw;
  std::vector<std::string> sw_schemes{"base,thp,colt,cluster,rmm,anchor-static,anchor-dynamic,kaligned"};
  std::vector<std::string> sw_kinds;
  std::vector<std::string> sw_mappings;
  std::vector<std::uint64_t> sw_seeds;
  std::vector<unsigned> sw_psis;
  std::vector<std::string> sw_ksets;
  unsigned sw_jobs = 1;
  std::string sw_out;
  sw_map.add(sweep);
  sw_trace.add(sweep);
  sw.add(sweep, false);
  sweep->add_option("--schemes", sw_schemes, "Comma-separated scheme list");
  sweep->add_option("--kinds", sw_kinds, "Synthetic contiguity kinds")->delimiter(',');
  sweep->add_option("--mappings", sw_mappings, "Mapping files")->delimiter(',');
  sweep->add_option("--map-seeds", sw_seeds, "Synthetic mapping seeds")->delimiter(',');
  sweep->add_option("--psi-values", sw_psis, "psi bounds for kaligned")->delimiter(',');
  sweep->add_option("--k-sets", sw_ksets, "Fixed K sets for kaligned, e.g. 4:7")->delimiter(',');
  sweep->add_option("--jobs", sw_jobs, "Concurrent runs");
  sweep->add_option("--out", sw_out, "CSV output path (stdout when empty)");
  add_config(sweep);

  // genmap
  auto* genmap = app.add_subcommand("genmap", "Write a synthetic mapping");
  MappingArgs gm;
  std::string gm_out;
  genmap->add_option("--kind", gm.kind, "small, medium, large, mixed");
  genmap->add_option("--pages", gm.pages);
  genmap->add_option("--seed", gm.seed);
  genmap->add_option("--placement", gm.placement, "size-class, buddy, packed");
  genmap->add_option("--out", gm_out)->required();
  add_config(genmap);

  // gentrace
  auto* gentrace = app.add_subcommand("gentrace", "Write a synthetic trace for a mapping");
  MappingArgs gt_map;
  TraceArgs gt;
  std::string gt_out;
  bool gt_binary = false;
  gt_map.add(gentrace);
  gentrace->add_option("--pattern", gt.pattern);
  gentrace->add_option("--length", gt.options.length);
  gentrace->add_option("--seed,--trace-seed", gt.options.seed);
  gentrace->add_option("--stride", gt.options.stride);
  gentrace->add_option("--zipf-alpha", gt.options.zipf_alpha);
  gentrace->add_option("--zipf-weight", gt.zipf_weight, "page or chunk");
  gentrace->add_option("--burst", gt.options.burst);
  gentrace->add_option("--write-fraction", gt.options.write_fraction);
  gentrace->add_option("--unmap-every", gt.options.unmap_every);
  gentrace->add_option("--alternate-k", gt.widths);
  gentrace->add_option("--out", gt_out)->required();
  gentrace->add_flag("--binary", gt_binary, "TLBTRACE1 binary form");
  add_config(gentrace);

  // scan
  auto* scan = app.add_subcommand("scan", "Contiguity histogram of a mapping");
  MappingArgs sc_map;
  std::string sc_csv;
  double sc_theta = 0.9;
  unsigned sc_psi = 4;
  sc_map.add(scan);
  scan->add_option("--csv", sc_csv, "Histogram CSV output");
  scan->add_option("--theta", sc_theta);
  scan->add_option("--psi", sc_psi);
  add_config(scan);

  // report
  auto* report = app.add_subcommand("report", "Merge report CSVs");
  std::vector<std::string> rp_in;
  std::string rp_out;
  report->add_option("inputs", rp_in, "CSV files")->required()->check(CLI::ExistingFile);
  report->add_option("--out", rp_out, "Merged CSV (stdout when empty)");


  std::vector<std::string> args;
  try {
    std::vector<std::string> raw(argv, argv + argc);
    args = merge_config(raw);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  }
  std::reverse(args.begin(), args.end());

  try {
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*simulate) {
      const PageTable pt = sim_map.load();
      const AccessTrace trace = sim_trace.load(pt);
      validate_trace(pt, trace);
      SimConfig c = sim.resolved();
      c.scheme = parse_scheme(sim_scheme);
      std::vector<ReportRow> rows;
      SimReport r = run_simulation(pt, trace, c);
      if (c.scheme == SchemeId::kBase) {
        rows.push_back(make_row(sim_map.name(), r, &r));
      } else {
        SimConfig bc = c;
        bc.scheme = SchemeId::kBase;
        const SimReport base = run_simulation(pt, trace, bc);
        rows.push_back(make_row(sim_map.name(), r, &base));
      }
      print_summary(std::cout, sim_map.name(), rows.front().report);
      if (!sim_out.empty()) emit_report(sim_out, rows);
      return rows.front().report.mismatches == 0 ? 0 : 1;
    }

    if (*sweep) {
      SweepSpec spec;
      spec.base = sw.resolved();
      spec.jobs = sw_jobs;
      for (const std::string& s : split_list(sw_schemes)) spec.schemes.push_back(parse_scheme(s));
      for (unsigned p : sw_psis) spec.k_settings.push_back({std::nullopt, p});
      for (const std::string& k : sw_ksets) {
        const AlignmentSet K = parse_widths(k, spec.base.theta, 8);
        spec.k_settings.push_back({K, static_cast<unsigned>(K.size())});
      }
      const TraceOptions topt = sw_trace.resolved();
      const auto add_workload = [&](WorkloadSpec ws) {
        ws.trace = topt;
        if (!sw_trace.path.empty()) ws.trace_path = sw_trace.path;
        spec.workloads.push_back(std::move(ws));
      };
      for (const std::string& path : sw_mappings) {
        WorkloadSpec ws;
        ws.name = std::filesystem::path(path).stem().string();
        ws.mapping_path = path;
        add_workload(ws);
      }
      if (sw_mappings.empty() && !sw_map.path.empty()) {
        WorkloadSpec ws;
        ws.name = sw_map.name();
        ws.mapping_path = sw_map.path;
        add_workload(ws);
      }
      if (spec.workloads.empty()) {
        if (sw_kinds.empty()) sw_kinds.push_back(sw_map.kind);
        if (sw_seeds.empty()) sw_seeds.push_back(sw_map.seed);
        for (const std::string& kind : sw_kinds) {
          for (std::uint64_t seed : sw_seeds) {
            WorkloadSpec ws;
            ws.name = kind + "-s" + std::to_string(seed);
            ws.kind = parse_contiguity_kind(kind);
            ws.pages = sw_map.pages;
            ws.map_seed = seed;
            ws.placement = parse_placement(sw_map.placement);
            add_workload(ws);
          }
        }
      }
      const std::vector<ReportRow> rows = run_sweep(spec);
      if (sw_out.empty()) {
        write_report(std::cout, rows);
      } else {
        emit_report(sw_out, rows);
      }
      return 0;
    }

    if (*genmap) {
      save_mapping(gm_out, gm.load());
      return 0;
    }

    if (*gentrace) {
      const PageTable pt = gt_map.load();
      save_trace(gt_out, generate_trace(pt, gt.resolved()), gt_binary);
      return 0;
    }

    if (*scan) {
      const PageTable pt = sc_map.load();
      const auto chunks = scan_contiguity_chunks(pt);
      const ContiguityHistogram h = build_histogram(chunks);
      const auto shares = band_page_shares(h);
      const AlignmentSet K = determine_K(h, sc_theta, sc_psi);
      std::cout << "mapping " << sc_map.name() << "\n  pages " << pt.size() << "  chunks "
                << h.chunk_count() << "  distinct sizes " << h.bins.size() << "\n"
                << std::fixed << std::setprecision(3) << "  page shares small " << shares[0]
                << "  medium " << shares[1] << "  large " << shares[2] << "\n";
      if (!h.empty()) std::cout << "  contiguity " << to_string(classify_contiguity(h)) << "\n";
      std::cout << "  K {";
      for (std::size_t i = 0; i < K.size(); ++i) std::cout << (i ? "," : "") << K.widths()[i];
      std::cout << "}\n";
      if (!sc_csv.empty()) {
        std::ofstream out(sc_csv);
        if (!out) throw Error("cannot write '" + sc_csv + "'");
        write_histogram_csv(out, sc_map.name(), h);
      }
      return 0;
    }

    if (*report) {
      if (rp_out.empty()) {
        merge_reports(rp_in, std::cout);
      } else {
        std::ofstream out(rp_out);
        if (!out) throw Error("cannot write '" + rp_out + "'");
        merge_reports(rp_in, out);
      }
      return 0;
    }
  } catch (const TraceIntegrityError& e) {
    std::cerr << "trace error: " << e.what() << "\n";
    return kExitTrace;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const FormatError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
