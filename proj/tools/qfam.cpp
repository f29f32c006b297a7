// qfam: command-line front end for the family toolkit.
//
// Exit codes: 0 ok, 1 usage or validation, 2 factorization incomplete
// (field), 3 precision exhausted (field), 4 I/O failure, 5 internal defect.

#include <qfam/qfam.hpp>

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

namespace {

enum Exit { kOk = 0, kUsage = 1, kFactor = 2, kPrecision = 3, kIo = 4, kDefect = 5 };

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

long parse_long(const std::string& s, const std::string& what) {
  std::size_t pos = 0;
  long v = 0;
  try {
    v = std::stol(s, &pos);
  } catch (const std::exception&) {
    throw UsageError("bad " + what + " '" + s + "'");
  }
  if (pos != s.size()) throw UsageError("bad " + what + " '" + s + "'");
  return v;
}

std::vector<long> parse_primes(const std::string& s) {
  std::vector<long> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    const long p = parse_long(tok, "--p entry");
    if (p < 3 || !qfam::is_prime(qfam::Int(p))) throw UsageError("p must be an odd prime, got " + tok);
    out.push_back(p);
  }
  if (out.empty()) throw UsageError("--p is empty");
  return out;
}

std::pair<unsigned, unsigned> parse_r(const std::string& s) {
  const auto dots = s.find("..");
  long lo, hi;
  if (dots == std::string::npos) {
    lo = hi = parse_long(s, "--r");
  } else {
    lo = parse_long(s.substr(0, dots), "--r");
    hi = parse_long(s.substr(dots + 2), "--r");
  }
  if (lo < 2 || hi < lo || hi > 10'000) throw UsageError("--r must be r or a..b with 2 <= a <= b");
  return {static_cast<unsigned>(lo), static_cast<unsigned>(hi)};
}

struct Common {
  unsigned long factor_effort = qfam::kDefaultFactorEffort;
  unsigned long precision_cap = qfam::kDefaultPrecisionCap;
  std::int64_t classno_ceiling = qfam::kDefaultClassnoCeiling;
  std::string cache;

  void add_to(CLI::App* app) {
    app->add_option("--factor-effort", factor_effort, "Trial-division bound")->check(CLI::PositiveNumber);
    app->add_option("--precision-cap", precision_cap, "p-adic digits before giving up")->check(CLI::PositiveNumber);
    app->add_option("--classno-ceiling", classno_ceiling, "Largest discriminant for class numbers")
        ->check(CLI::PositiveNumber);
    app->add_option("--cache", cache, "Factor cache file");
  }

  qfam::AnalysisOptions options(std::unique_ptr<qfam::FactorCache>& holder) const {
    qfam::AnalysisOptions opts;
    opts.precision_cap = precision_cap;
    opts.classno_ceiling = classno_ceiling;
    opts.family.factor_effort = factor_effort;
    if (!cache.empty()) {
      // touch the file so an unusable path fails up front
      std::ofstream probe(cache, std::ios::app);
      if (!probe) throw IoError("cannot open cache file " + cache);
      holder = std::make_unique<qfam::FactorCache>(cache);
      opts.family.factorizer = holder->factorizer();
    }
    return opts;
  }

  std::string describe() const {
    return "factor-effort=" + std::to_string(factor_effort) + " precision-cap=" + std::to_string(precision_cap) +
           " classno-ceiling=" + std::to_string(classno_ceiling);
  }
};

void write_output(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text << std::flush;
    if (!std::cout) throw IoError("write to stdout failed");
    return;
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << text;
  out.flush();
  if (!out) throw IoError("write to " + path + " failed");
}

std::string human_readable(const qfam::ScanRecord& rec) {
  std::ostringstream os;
  const auto j = qfam::to_json(rec);
  for (const auto& [key, value] : j.items()) {
    os << key << ": ";
    if (value.is_string()) {
      os << value.get<std::string>();
    } else if (value.is_null()) {
      os << "-";
    } else if (key == "unit") {
      os << value["u"].get<std::string>() << " + " << value["v"].get<std::string>() << " sqrt D";
      if (value["den"].get<int>() == 2) os << " (over 2)";
    } else if (key == "notes") {
      bool first = true;
      for (const auto& n : value) {
        os << (first ? "" : "; ") << n.get<std::string>();
        first = false;
      }
    } else {
      os << value.dump();
    }
    os << "\n";
  }
  return os.str();
}

// ---------------------------------------------------------------------------

int run_field(long p, long r, long m, const std::string& format, const Common& common) {
  if (p < 3 || !qfam::is_prime(qfam::Int(p))) throw UsageError("p must be an odd prime, got " + std::to_string(p));
  if (r < 2) throw UsageError("r must be >= 2");
  if (m < 1) throw UsageError("m must be positive");
  if (std::gcd(p, m) != 1) throw UsageError("gcd(p, m) must be 1");

  std::unique_ptr<qfam::FactorCache> cache;
  const auto opts = common.options(cache);
  const auto report = qfam::analyze(qfam::Int(p), static_cast<unsigned>(r), qfam::Int(m), opts);
  const auto rec = qfam::record_from_report(report);
  std::cout << (format == "json" ? qfam::to_json(rec).dump(2) + "\n" : human_readable(rec));
  for (const auto& n : rec.notes) {
    if (n == "precision exhausted") {
      std::cerr << "qfam: precision exhausted; raise --precision-cap\n";
      return kPrecision;
    }
  }
  return kOk;
}

struct ScanArgs {
  std::string p;
  std::string r;
  std::string m = "one";
  std::string format = "csv";
  std::string out;
  unsigned jobs = 1;
  long m_max = 250'000;
};

int run_scan(const ScanArgs& args, const Common& common) {
  const auto ps = parse_primes(args.p);
  const auto [r_lo, r_hi] = parse_r(args.r);
  qfam::MPolicy policy = qfam::MPolicy::fixed;
  long fixed_m = 0;
  if (args.m == "one") {
    policy = qfam::MPolicy::one;
  } else if (args.m == "bound") {
    policy = qfam::MPolicy::bound;
  } else {
    fixed_m = parse_long(args.m, "--m");
    if (fixed_m < 1) throw UsageError("--m must be one, bound or a positive integer");
  }

  const auto plan = qfam::plan_cells(ps, r_lo, r_hi, policy, fixed_m, args.m_max);
  for (const auto& t : plan.truncated) {
    std::cerr << "qfam: warning: m enumeration for " << t << " truncated at --m-max " << args.m_max << "\n";
  }

  std::unique_ptr<qfam::FactorCache> cache;
  const auto opts = common.options(cache);
  const auto records = qfam::run_scan(plan.cells, opts, args.jobs);

  std::string text;
  if (args.format == "json") {
    text = qfam::write_json(records);
  } else {
    std::string meta = "qfam scan p=" + args.p + " r=" + args.r + " m=" + args.m + " " + common.describe();
    if (policy == qfam::MPolicy::bound) meta += " m-max=" + std::to_string(args.m_max);
    for (const auto& t : plan.truncated) meta += " truncated(" + t + ")";
    text = qfam::write_csv(records, meta);
  }
  write_output(args.out, text);
  std::cerr << "qfam: " << qfam::summarize(records).str() << "\n";
  return kOk;
}

int run_gseq_pair(long n, bool json) {
  const auto pp = qfam::pell_pair(n);
  if (json) {
    std::cout << nlohmann::ordered_json{{"n", n}, {"G", qfam::to_dec(pp.G)}, {"F", qfam::to_dec(pp.F)}}.dump() << "\n";
  } else {
    std::cout << "G=" << pp.G << " F=" << pp.F << "\n";
  }
  return kOk;
}

int run_gseq_gcd(long l, long m, bool json) {
  if (l < 1 || m < 1) throw UsageError("gcd indices must be positive");
  const auto g = qfam::g_gcd(static_cast<unsigned long>(l), static_cast<unsigned long>(m));
  if (json) {
    std::cout << nlohmann::ordered_json{{"l", l}, {"m", m}, {"gcd", qfam::to_dec(g)}}.dump() << "\n";
  } else {
    std::cout << g << "\n";
  }
  return kOk;
}

int run_gseq_search(long p, long n_max, bool json) {
  if (p < 3 || !qfam::is_prime(qfam::Int(p))) throw UsageError("p must be an odd prime");
  if (n_max < 1) throw UsageError("--max must be positive");
  const auto hits = qfam::prime_power_search(qfam::Int(p), static_cast<unsigned long>(n_max));
  if (json) {
    auto arr = nlohmann::ordered_json::array();
    for (const auto& h : hits) arr.push_back({{"n", h.n}, {"r", h.r}});
    std::cout << nlohmann::ordered_json{{"p", p}, {"max", n_max}, {"hits", arr}}.dump() << "\n";
  } else if (hits.empty()) {
    std::cout << "no solutions\n";
  }
  for (const auto& h : hits) {
    std::cerr << "*** SOLUTION FOUND: G_" << h.n << " = " << p << "^" << h.r << " ***\n";
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Real quadratic fields Q(sqrt(m^2 p^(2r) + 1)): invariants, scans and the Pell pair"};
  app.require_subcommand(1);

  Common common;

  long f_p = 0, f_r = 0, f_m = 1;
  std::string f_format = "text";
  auto* field = app.add_subcommand("field", "Analyze one field");
  field->add_option("--p", f_p, "Odd prime")->required();
  field->add_option("--r", f_r, "Exponent r >= 2")->required();
  field->add_option("--m", f_m, "Multiplier coprime to p");
  field->add_option("--format", f_format, "text or json")->check(CLI::IsMember({"text", "json"}));
  common.add_to(field);

  ScanArgs scan_args;
  auto* scan = app.add_subcommand("scan", "Scan a (p, r, m) grid");
  scan->add_option("--p", scan_args.p, "Comma-separated odd primes")->required();
  scan->add_option("--r", scan_args.r, "r or a..b")->required();
  scan->add_option("--m", scan_args.m, "one, bound or an integer");
  scan->add_option("--format", scan_args.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  scan->add_option("--out", scan_args.out, "Output path (default stdout)");
  scan->add_option("--jobs", scan_args.jobs, "Worker threads")->check(CLI::PositiveNumber);
  scan->add_option("--m-max", scan_args.m_max, "Cap on m for --m bound")->check(CLI::PositiveNumber);
  common.add_to(scan);

  bool g_json = false;
  auto* gseq = app.add_subcommand("gseq", "The Pell pair (1 + sqrt 2)^n = G_n + F_n sqrt 2");
  gseq->require_subcommand(1);
  gseq->add_flag("--json", g_json, "JSON output");
  long g_n = 0, g_l = 0, g_m = 0, g_p = 0, g_max = 2000;
  auto* pair = gseq->add_subcommand("pair", "Print G_n and F_n");
  pair->add_option("n", g_n, "Index (may be negative)")->required()->allow_extra_args(false);
  auto* gcd = gseq->add_subcommand("gcd", "gcd(G_l, G_m)");
  gcd->add_option("l", g_l)->required();
  gcd->add_option("m", g_m)->required();
  auto* search = gseq->add_subcommand("search", "Search for G_n = p^r with r >= 2");
  search->add_option("--p", g_p, "Odd prime")->required();
  search->add_option("--max", g_max, "Largest n");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*field) return run_field(f_p, f_r, f_m, f_format, common);
    if (*scan) return run_scan(scan_args, common);
    if (*pair) return run_gseq_pair(g_n, g_json);
    if (*gcd) return run_gseq_gcd(g_l, g_m, g_json);
    if (*search) return run_gseq_search(g_p, g_max, g_json);
  } catch (const UsageError& e) {
    std::cerr << "qfam: " << e.what() << "\n";
    return kUsage;
  } catch (const IoError& e) {
    std::cerr << "qfam: " << e.what() << "\n";
    return kIo;
  } catch (const qfam::Error& e) {
    std::cerr << "qfam: " << e.what() << "\n";
    switch (e.kind()) {
      case qfam::ErrorKind::invalid_argument: return kUsage;
      case qfam::ErrorKind::cannot_certify: return kFactor;
      case qfam::ErrorKind::precision_exhausted: return kPrecision;
      default: return kDefect;
    }
  }
  return kUsage;
}
