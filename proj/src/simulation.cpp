#include "ktlb/simulation.hpp"

#include <algorithm>
#include <exception>
#include <numeric>

#include "ktlb/baselines.hpp"
#include "ktlb/kaligned_mmu.hpp"

namespace ktlb {

namespace {

constexpr std::array<SchemeId, 9> kSchemes = {
    SchemeId::kBase,   SchemeId::kThp,          SchemeId::kColt,
    SchemeId::kCluster, SchemeId::kRmm,         SchemeId::kAnchor,
    SchemeId::kAnchorStatic, SchemeId::kAnchorDynamic, SchemeId::kKAligned,
};

}  // namespace

std::string_view to_string(SchemeId s) {
  switch (s) {
    case SchemeId::kBase: return "base";
    case SchemeId::kThp: return "thp";
    case SchemeId::kColt: return "colt";
    case SchemeId::kCluster: return "cluster";
    case SchemeId::kRmm: return "rmm";
    case SchemeId::kAnchor: return "anchor";
    case SchemeId::kAnchorStatic: return "anchor-static";
    case SchemeId::kAnchorDynamic: return "anchor-dynamic";
    case SchemeId::kKAligned: return "kaligned";
  }
  return "?";
}

SchemeId parse_scheme(std::string_view name) {
  for (SchemeId s : kSchemes) {
    if (to_string(s) == name) return s;
  }
  throw ConfigError("unknown scheme '" + std::string(name) + "'");
}

std::span<const SchemeId> all_schemes() { return kSchemes; }

double SimReport::cycles_per_access() const {
  return accesses == 0 ? 0.0 : static_cast<double>(total_cycles) / static_cast<double>(accesses);
}

double SimReport::cycles_per_instruction() const {
  return cycles_per_access() * accesses_per_instruction;
}

double SimReport::coverage_mean() const {
  if (coverage_samples.empty()) return 0.0;
  const double sum = std::accumulate(coverage_samples.begin(), coverage_samples.end(), 0.0);
  return sum / static_cast<double>(coverage_samples.size());
}

std::optional<double> SimReport::predictor_accuracy() const {
  if (scheme != "kaligned" || coalesced_hits == 0) return std::nullopt;
  return static_cast<double>(hits_by_lookup[1]) / static_cast<double>(coalesced_hits);
}

std::uint64_t translation_cost(const Translation& t, const LatencyModel& lat) {
  const auto probes = [&](unsigned n) {
    return n == 0 ? 0 : lat.coalesced_hit_first + (n - 1) * lat.extra_lookup;
  };
  switch (t.outcome) {
    case Outcome::kL1Hit: return lat.l1_hit;
    case Outcome::kL2Hit: return lat.l2_hit;
    case Outcome::kCoalescedHit: return probes(t.lookups);
    case Outcome::kWalk:
      return lat.walk + (lat.charge_probes_before_walk ? probes(t.lookups) : 0);
  }
  return 0;
}

std::unique_ptr<Mmu> make_mmu(const PageTable& pt, const SimConfig& c, const AccessTrace* trace) {
  switch (c.scheme) {
    case SchemeId::kBase: return std::make_unique<BaseMmu>(pt, false);
    case SchemeId::kThp: return std::make_unique<BaseMmu>(pt, true);
    case SchemeId::kColt: return std::make_unique<ColtMmu>(pt);
    case SchemeId::kCluster: return std::make_unique<ClusterMmu>(pt);
    case SchemeId::kRmm: return std::make_unique<RmmMmu>(pt, c.rmm_min_range);
    case SchemeId::kAnchor: return std::make_unique<AnchorMmu>(pt, c.anchor_distance);
    case SchemeId::kAnchorStatic: {
      if (trace == nullptr) throw ConfigError("anchor-static needs the trace to pick a distance");
      return std::make_unique<AnchorMmu>(pt, anchor_static_search(pt, *trace, c).best_distance);
    }
    case SchemeId::kAnchorDynamic: return std::make_unique<AnchorMmu>(pt);
    case SchemeId::kKAligned: {
      KAlignedOptions o;
      o.widths = c.widths;
      o.theta = c.theta;
      o.psi = c.psi;
      return std::make_unique<KAlignedMmu>(pt, std::move(o));
    }
  }
  throw ConfigError("unknown scheme");
}

namespace {

SimReport replay_impl(const PageTable& view, PageTable* owner, Mmu& mmu, const AccessTrace& trace,
                      const SimConfig& c) {
  const LatencyModel& lat = c.latency;
  SimReport r;
  r.scheme = std::string(to_string(c.scheme));
  r.accesses_per_instruction = trace.accesses_per_instruction;

  std::uint64_t index = 0;
  for (const TraceRecord& rec : trace.records) {
    const Vpn vpn = rec.vpn();
    if (rec.op == TraceOp::kUnmap) {
      if (owner == nullptr) throw ConfigError("trace has unmap events but the mapping is read-only");
      try {
        owner->unmap(vpn);
      } catch (const Error& e) {
        throw TraceIntegrityError(e.what(), index);
      }
      mmu.page_unmapped(vpn);
      ++r.unmap_events;
      continue;
    }

    Translation t;
    try {
      t = mmu.translate(vpn);
    } catch (const UnmappedPageError& e) {
      throw TraceIntegrityError(e.what(), index);
    }
    if (c.verify) {
      const auto expect = view.lookup(vpn);
      if (!expect || *expect != t.ppn) ++r.mismatches;
    }

    const bool charge_probes = t.outcome == Outcome::kCoalescedHit ||
                               (t.outcome == Outcome::kWalk && lat.charge_probes_before_walk);
    switch (t.outcome) {
      case Outcome::kL1Hit:
        ++r.l1_hits;
        r.cycles_l1 += lat.l1_hit;
        break;
      case Outcome::kL2Hit:
        ++r.l2_hits;
        r.cycles_l2_hit += lat.l2_hit;
        break;
      case Outcome::kCoalescedHit:
        ++r.coalesced_hits;
        ++r.hits_by_lookup[std::min<std::size_t>(t.lookups, kMaxLookups)];
        break;
      case Outcome::kWalk:
        ++r.walks;
        r.cycles_walk += lat.walk;
        break;
    }
    if (charge_probes && t.lookups > 0) {
      ++r.first_probes;
      r.extra_lookups += t.lookups - 1;
      r.cycles_coalesced += lat.coalesced_hit_first;
      r.cycles_extra_lookup += (t.lookups - 1) * lat.extra_lookup;
    }

    ++index;
    if (c.coverage_interval != 0 && index % c.coverage_interval == 0) {
      r.coverage_samples.push_back(mmu.coverage());
    }
    if (c.reeval_interval != 0 && index % c.reeval_interval == 0 && mmu.reevaluate()) {
      ++r.reevaluations;
    }
  }

  r.accesses = index;
  r.total_cycles = r.cycles_l1 + r.cycles_l2_hit + r.cycles_coalesced + r.cycles_extra_lookup +
                   r.cycles_walk;
  r.init_work = mmu.init_work();
  if (const auto* k = dynamic_cast<const KAlignedMmu*>(&mmu)) {
    const auto w = k->alignment().widths();
    r.k_set.assign(w.begin(), w.end());
  }
  if (const auto* a = dynamic_cast<const AnchorMmu*>(&mmu)) r.anchor_distance = a->distance();
  return r;
}

}  // namespace

SimReport replay(PageTable& pt, Mmu& mmu, const AccessTrace& trace, const SimConfig& config) {
  return replay_impl(pt, &pt, mmu, trace, config);
}

SimReport run_simulation(const PageTable& pt, const AccessTrace& trace, const SimConfig& config) {
  if (trace.event_count() == 0) {
    auto mmu = make_mmu(pt, config, &trace);
    return replay_impl(pt, nullptr, *mmu, trace, config);
  }
  PageTable copy = pt;
  auto mmu = make_mmu(copy, config, &trace);
  SimReport r = replay_impl(copy, &copy, *mmu, trace, config);
  return r;
}

AnchorSearch anchor_static_search(const PageTable& pt, const AccessTrace& trace,
                                  const SimConfig& config, bool parallel) {
  const std::vector<std::uint64_t> candidates = anchor_distances();
  const long n = static_cast<long>(candidates.size());
  std::vector<std::uint64_t> walks(candidates.size());
  std::vector<std::exception_ptr> errors(candidates.size());
  SimConfig c = config;
  c.scheme = SchemeId::kAnchor;
  c.coverage_interval = 0;
  c.verify = false;
  const auto run = [&](long i) {
    SimConfig ci = c;
    ci.anchor_distance = candidates[i];
    try {
      walks[i] = run_simulation(pt, trace, ci).walks;
    } catch (...) {
      errors[i] = std::current_exception();
    }
  };
  if (parallel) {
#pragma omp parallel for schedule(dynamic, 1)
    for (long i = 0; i < n; ++i) run(i);
  } else {
    for (long i = 0; i < n; ++i) run(i);
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  AnchorSearch s;
  std::uint64_t best_walks = 0;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    s.walks.emplace_back(candidates[i], walks[i]);
    if (i == 0 || walks[i] < best_walks) {
      best_walks = walks[i];
      s.best_distance = candidates[i];
    }
  }
  return s;
}

}  // namespace ktlb
