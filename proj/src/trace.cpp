#include "ktlb/trace.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>
#include <unordered_set>

#include "ktlb/k_select.hpp"

namespace ktlb {

std::uint64_t AccessTrace::access_count() const {
  return static_cast<std::uint64_t>(
      std::count_if(records.begin(), records.end(), [](const TraceRecord& r) { return r.is_access(); }));
}

// ---- text form ------------------------------------------------------------

namespace {

std::uint64_t parse_hex(const std::string& s) {
  std::size_t used = 0;
  std::uint64_t v = std::stoull(s, &used, 16);
  if (used != s.size()) throw std::invalid_argument(s);
  return v;
}

constexpr char kMagic[] = "TLBTRACE1";
constexpr std::size_t kMagicSize = sizeof(kMagic) - 1;

}  // namespace

AccessTrace read_text_trace(std::istream& in) {
  AccessTrace trace;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    std::istringstream fields(line);
    std::string first, second, extra;
    if (!(fields >> first)) continue;
    if (!(fields >> second) || (fields >> extra)) {
      throw FormatError("expected '<hex address> <r|w>' or 'unmap <hex vpn>'", lineno);
    }
    TraceRecord r;
    try {
      if (first == "unmap") {
        r.op = TraceOp::kUnmap;
        r.address = parse_hex(second);
      } else {
        r.address = parse_hex(first);
        if (second == "r" || second == "R") {
          r.op = TraceOp::kRead;
        } else if (second == "w" || second == "W") {
          r.op = TraceOp::kWrite;
        } else {
          throw std::invalid_argument(second);
        }
      }
    } catch (const std::exception&) {
      throw FormatError("malformed trace line", lineno);
    }
    trace.records.push_back(r);
  }
  return trace;
}

void write_text_trace(std::ostream& out, const AccessTrace& trace) {
  out << std::hex;
  for (const TraceRecord& r : trace.records) {
    switch (r.op) {
      case TraceOp::kRead: out << r.address << " r\n"; break;
      case TraceOp::kWrite: out << r.address << " w\n"; break;
      case TraceOp::kUnmap: out << "unmap " << r.address << '\n'; break;
    }
  }
  out << std::dec;
}

// ---- binary form ----------------------------------------------------------

AccessTrace read_binary_trace(std::istream& in) {
  char magic[kMagicSize];
  if (!in.read(magic, kMagicSize) || std::memcmp(magic, kMagic, kMagicSize) != 0) {
    throw FormatError("missing TLBTRACE1 header", 0);
  }
  AccessTrace trace;
  std::array<unsigned char, 9> buf{};
  std::size_t record = 0;
  while (in.read(reinterpret_cast<char*>(buf.data()), buf.size())) {
    ++record;
    std::uint64_t addr = 0;
    for (int i = 7; i >= 0; --i) addr = (addr << 8) | buf[i];
    if (buf[8] > 2) throw FormatError("bad op byte", record);
    trace.records.push_back({addr, static_cast<TraceOp>(buf[8])});
  }
  if (in.gcount() != 0) throw FormatError("truncated record", record + 1);
  return trace;
}

void write_binary_trace(std::ostream& out, const AccessTrace& trace) {
  out.write(kMagic, kMagicSize);
  std::array<char, 9> buf{};
  for (const TraceRecord& r : trace.records) {
    for (int i = 0; i < 8; ++i) buf[i] = static_cast<char>((r.address >> (8 * i)) & 0xff);
    buf[8] = static_cast<char>(r.op);
    out.write(buf.data(), buf.size());
  }
}

AccessTrace load_trace(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open trace file '" + path + "'");
  char magic[kMagicSize] = {};
  in.read(magic, kMagicSize);
  const bool binary = in.gcount() == static_cast<std::streamsize>(kMagicSize) &&
                      std::memcmp(magic, kMagic, kMagicSize) == 0;
  in.clear();
  in.seekg(0);
  return binary ? read_binary_trace(in) : read_text_trace(in);
}

void save_trace(const std::string& path, const AccessTrace& trace, bool binary) {
  std::ofstream out(path, binary ? std::ios::binary : std::ios::out);
  if (!out) throw Error("cannot write trace file '" + path + "'");
  if (binary) {
    write_binary_trace(out, trace);
  } else {
    write_text_trace(out, trace);
  }
  if (!out) throw Error("write failed for '" + path + "'");
}

void validate_trace(const PageTable& pt, const AccessTrace& trace) {
  std::unordered_set<Vpn> removed;
  std::size_t access = 0;
  for (const TraceRecord& r : trace.records) {
    const Vpn v = r.vpn();
    const bool mapped = pt.contains(v) && removed.count(v) == 0;
    if (r.op == TraceOp::kUnmap) {
      if (!mapped) {
        std::ostringstream msg;
        msg << "unmap of unmapped vpn 0x" << std::hex << v;
        throw TraceIntegrityError(msg.str(), access);
      }
      removed.insert(v);
      continue;
    }
    if (!mapped) {
      std::ostringstream msg;
      msg << "access to unmapped vpn 0x" << std::hex << v;
      throw TraceIntegrityError(msg.str(), access);
    }
    ++access;
  }
}

// ---- generation -----------------------------------------------------------

std::string_view to_string(TracePattern p) {
  switch (p) {
    case TracePattern::kSequential: return "sequential";
    case TracePattern::kStrided: return "strided";
    case TracePattern::kRandom: return "random";
    case TracePattern::kZipf: return "zipf";
    case TracePattern::kAlternating: return "alternating";
  }
  return "?";
}

TracePattern parse_trace_pattern(std::string_view name) {
  for (TracePattern p : {TracePattern::kSequential, TracePattern::kStrided, TracePattern::kRandom,
                         TracePattern::kZipf, TracePattern::kAlternating}) {
    if (to_string(p) == name) return p;
  }
  throw ConfigError("unknown trace pattern '" + std::string(name) + "'");
}

namespace {

class PageSource {
 public:
  PageSource(const PageTable& pt, const TraceOptions& o, std::mt19937_64& rng)
      : o_(o), rng_(rng) {
    pages_.reserve(pt.size());
    for (const auto& entry : pt) pages_.push_back(entry.first);
    chunks_ = scan_contiguity_chunks(pt);
    switch (o.pattern) {
      case TracePattern::kZipf: init_zipf(); break;
      case TracePattern::kAlternating: init_alternating(pt); break;
      default: break;
    }
  }

  Vpn next() {
    switch (o_.pattern) {
      case TracePattern::kSequential: return pages_[cursor_++ % pages_.size()];
      case TracePattern::kStrided: {
        const Vpn v = pages_[cursor_];
        cursor_ = (cursor_ + o_.stride) % pages_.size();
        return v;
      }
      case TracePattern::kRandom:
        return pages_[std::uniform_int_distribution<std::size_t>(0, pages_.size() - 1)(rng_)];
      case TracePattern::kZipf: return next_zipf();
      case TracePattern::kAlternating: return next_alternating();
    }
    return pages_.front();
  }

  /// A uniformly chosen page, for unmap events.
  Vpn any() {
    return pages_[std::uniform_int_distribution<std::size_t>(0, pages_.size() - 1)(rng_)];
  }

 private:
  void init_zipf() {
    order_.resize(chunks_.size());
    std::iota(order_.begin(), order_.end(), std::size_t{0});
    std::shuffle(order_.begin(), order_.end(), rng_);
    std::vector<double> w(chunks_.size());
    for (std::size_t r = 0; r < w.size(); ++r) {
      w[r] = 1.0 / std::pow(static_cast<double>(r + 1), o_.zipf_alpha);
    }
    if (o_.zipf_page_weighted) {
      for (std::size_t r = 0; r < w.size(); ++r) w[r] *= static_cast<double>(chunks_[order_[r]].size);
    }
    zipf_ = std::discrete_distribution<std::size_t>(w.begin(), w.end());
  }

  Vpn next_zipf() {
    if (burst_left_ == 0) {
      const ContiguityChunk& c = chunks_[order_[zipf_(rng_)]];
      burst_chunk_ = &c;
      burst_pos_ = std::uniform_int_distribution<std::uint64_t>(0, c.size - 1)(rng_);
      burst_left_ = std::max<std::uint64_t>(o_.burst, 1);
    }
    --burst_left_;
    const Vpn v = burst_chunk_->start_vpn + burst_pos_;
    burst_pos_ = (burst_pos_ + 1) % burst_chunk_->size;
    return v;
  }

  void init_alternating(const PageTable& pt) {
    AlignmentSet K = o_.widths ? *o_.widths : determine_K(build_histogram(chunks_));
    const AnnotationStore store = annotate_table(pt, K).store;
    for (unsigned k : K.widths()) {
      std::vector<AlignedAnnotation> pool;
      for (const AlignedAnnotation& a : store.annotations()) {
        if (a.width != k || a.contiguity < 2) continue;
        // Skip regions a wider aligned entry would claim first.
        bool claimed = false;
        for (unsigned wider : K.widths()) {
          if (wider <= k) break;
          const AlignedAnnotation* b = store.find_class(a.vpn, wider);
          if (b != nullptr && b->covers(a.vpn)) claimed = true;
        }
        if (!claimed) pool.push_back(a);
      }
      if (pool.empty()) continue;
      std::shuffle(pool.begin(), pool.end(), rng_);
      if (pool.size() > kAlternatingPool) pool.resize(kAlternatingPool);
      pools_.push_back(std::move(pool));
    }
    if (pools_.size() < 2) {
      throw ConfigError("alternating trace needs aligned regions of at least two widths");
    }
  }

  Vpn next_alternating() {
    const auto& pool = pools_[cursor_++ % pools_.size()];
    const AlignedAnnotation& a =
        pool[std::uniform_int_distribution<std::size_t>(0, pool.size() - 1)(rng_)];
    return a.vpn + std::uniform_int_distribution<std::uint64_t>(0, a.contiguity - 1)(rng_);
  }

  // Regions per width: small enough that every aligned entry stays cached.
  static constexpr std::size_t kAlternatingPool = 64;

  const TraceOptions& o_;
  std::mt19937_64& rng_;
  std::vector<Vpn> pages_;
  std::vector<ContiguityChunk> chunks_;
  std::size_t cursor_ = 0;

  std::vector<std::size_t> order_;
  std::discrete_distribution<std::size_t> zipf_;
  const ContiguityChunk* burst_chunk_ = nullptr;
  std::uint64_t burst_pos_ = 0;
  std::uint64_t burst_left_ = 0;

  std::vector<std::vector<AlignedAnnotation>> pools_;
};

}  // namespace

AccessTrace generate_trace(const PageTable& pt, const TraceOptions& o) {
  if (pt.empty()) throw ConfigError("cannot generate a trace over an empty mapping");
  if (o.write_fraction < 0 || o.write_fraction > 1) throw ConfigError("write fraction outside [0, 1]");
  if (o.pattern == TracePattern::kStrided && o.stride == 0) throw ConfigError("stride must be positive");

  std::mt19937_64 rng(o.seed);
  PageSource source(pt, o, rng);
  std::bernoulli_distribution is_write(o.write_fraction);
  std::uniform_int_distribution<std::uint64_t> word(0, (kPageSize / 8) - 1);
  std::unordered_set<Vpn> removed;
  const std::size_t max_draws = 64 * pt.size() + 1024;

  AccessTrace trace;
  trace.accesses_per_instruction = o.accesses_per_instruction;
  trace.records.reserve(o.length + (o.unmap_every ? o.length / o.unmap_every : 0));
  for (std::uint64_t i = 0; i < o.length; ++i) {
    Vpn v = source.next();
    for (std::size_t draws = 0; removed.count(v) != 0; ++draws) {
      if (draws == max_draws) throw ConfigError("trace generation ran out of mapped pages");
      v = source.next();
    }
    const TraceOp op = is_write(rng) ? TraceOp::kWrite : TraceOp::kRead;
    trace.records.push_back({(v << kPageShift) | (word(rng) * 8), op});

    if (o.unmap_every != 0 && (i + 1) % o.unmap_every == 0 && removed.size() + 1 < pt.size()) {
      Vpn u = source.any();
      while (removed.count(u) != 0) u = source.any();
      removed.insert(u);
      trace.records.push_back({u, TraceOp::kUnmap});
    }
  }
  return trace;
}

}  // namespace ktlb
