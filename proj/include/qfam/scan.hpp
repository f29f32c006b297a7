#pragma once

// Grid scans over (p, r, m): per-cell records, CSV/JSON encoding, a
// restartable factor cache, and a deterministic parallel runner.

#include <qfam/bigint.hpp>
#include <qfam/error.hpp>
#include <qfam/intkit.hpp>
#include <qfam/invariants.hpp>
#include <qfam/quadfield.hpp>

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

namespace qfam {

struct UnitCoords {
  std::string u;
  std::string v;
  int den = 1;
  friend bool operator==(const UnitCoords&, const UnitCoords&) = default;
};

struct ScanRecord {
  long p = 0;
  long r = 0;
  long m = 0;
  std::optional<std::string> N;
  std::optional<std::string> b;
  std::optional<std::string> D;
  std::optional<std::string> disc;
  std::optional<UnitCoords> unit;
  std::optional<int> unit_norm;
  std::optional<bool> t_is_fundamental;
  bool splits = false;
  std::optional<long> n2;
  std::string n1_is_one = "unknown";
  std::optional<std::string> class_number;
  std::optional<long> h_val_p;
  bool wieferich = false;
  bool m_bound_ok = false;
  std::string p_rational = "inconclusive";
  std::string greenberg = "inconclusive";
  std::optional<std::string> an_prediction;
  std::vector<std::string> notes;

  friend bool operator==(const ScanRecord&, const ScanRecord&) = default;

  // Commas and semicolons are reserved by the CSV encoding.
  void add_note(std::string note) {
    for (char& ch : note) {
      if (ch == ',' || ch == ';' || ch == '\n' || ch == '|') ch = ' ';
    }
    notes.push_back(std::move(note));
  }
};

inline const std::vector<std::string>& scan_record_fields() {
  static const std::vector<std::string> names = {
      "p",          "r",      "m",         "N",         "b",           "D",           "disc",
      "unit",       "unit_norm", "t_is_fundamental", "splits", "n2",    "n1_is_one",   "class_number",
      "h_val_p",    "wieferich", "m_bound_ok", "p_rational", "greenberg", "an_prediction", "notes"};
  return names;
}

inline ScanRecord record_from_report(const InvariantReport& rep) {
  const auto& f = rep.family;
  ScanRecord rec;
  rec.p = f.p.get_si();
  rec.r = f.r;
  rec.m = f.m.get_si();
  rec.N = to_dec(f.N);
  rec.b = to_dec(f.b);
  rec.D = to_dec(f.D);
  rec.disc = to_dec(f.field.disc());
  rec.unit = UnitCoords{to_dec(rep.eps.u()), to_dec(rep.eps.v()), rep.eps.den()};
  rec.unit_norm = rep.eps.norm().get_si();
  rec.t_is_fundamental = rep.t_is_fundamental;
  rec.splits = true;
  if (rep.n2) rec.n2 = static_cast<long>(*rep.n2);
  rec.n1_is_one = to_string(rep.n1_is_one);
  if (rep.class_number) rec.class_number = to_dec(*rep.class_number);
  if (rep.h_val_p) rec.h_val_p = static_cast<long>(*rep.h_val_p);
  rec.wieferich = rep.wieferich;
  rec.m_bound_ok = rep.m_bound_ok;
  rec.p_rational = to_string(rep.p_rational);
  rec.greenberg = to_string(rep.greenberg.verdict);
  if (rep.greenberg.an_prediction) rec.an_prediction = to_dec(*rep.greenberg.an_prediction);
  for (const auto& n : rep.notes) rec.add_note(n);
  return rec;
}

inline const char* note_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::cannot_certify: return "factorization incomplete";
    case ErrorKind::precision_exhausted: return "precision exhausted";
    case ErrorKind::too_large: return "class number ceiling";
    default: return "error";
  }
}

/// One grid cell. Failures become notes; the record is always produced.
inline ScanRecord scan_cell(const Int& p, unsigned r, const Int& m, const AnalysisOptions& opts) {
  try {
    return record_from_report(analyze(p, r, m, opts));
  } catch (const Error& e) {
    ScanRecord rec;
    rec.p = p.get_si();
    rec.r = r;
    rec.m = m.get_si();
    const Int mpr = m * pow_int(p, r);
    rec.N = to_dec(mpr * mpr + 1);
    rec.splits = jacobi(mpr * mpr + 1, p) == 1;
    rec.wieferich = is_wieferich(p);
    rec.m_bound_ok = m_bound_satisfied(p, r, m);
    rec.add_note(note_for(e.kind()));
    rec.add_note(e.what());
    return rec;
  }
}

// ---------------------------------------------------------------------------
// JSON

inline nlohmann::ordered_json to_json(const ScanRecord& rec) {
  using nlohmann::ordered_json;
  auto opt = [](const auto& v) -> ordered_json { return v ? ordered_json(*v) : ordered_json(nullptr); };
  ordered_json j;
  j["p"] = rec.p;
  j["r"] = rec.r;
  j["m"] = rec.m;
  j["N"] = opt(rec.N);
  j["b"] = opt(rec.b);
  j["D"] = opt(rec.D);
  j["disc"] = opt(rec.disc);
  if (rec.unit) {
    j["unit"] = ordered_json{{"u", rec.unit->u}, {"v", rec.unit->v}, {"den", rec.unit->den}};
  } else {
    j["unit"] = nullptr;
  }
  j["unit_norm"] = opt(rec.unit_norm);
  j["t_is_fundamental"] = opt(rec.t_is_fundamental);
  j["splits"] = rec.splits;
  j["n2"] = opt(rec.n2);
  j["n1_is_one"] = rec.n1_is_one;
  j["class_number"] = opt(rec.class_number);
  j["h_val_p"] = opt(rec.h_val_p);
  j["wieferich"] = rec.wieferich;
  j["m_bound_ok"] = rec.m_bound_ok;
  j["p_rational"] = rec.p_rational;
  j["greenberg"] = rec.greenberg;
  j["an_prediction"] = opt(rec.an_prediction);
  j["notes"] = rec.notes;
  return j;
}

inline ScanRecord from_json(const nlohmann::ordered_json& j) {
  auto opt = [&](const char* key, auto& out) {
    using T = typename std::decay_t<decltype(out)>::value_type;
    if (!j.at(key).is_null()) out = j.at(key).get<T>();
  };
  ScanRecord rec;
  rec.p = j.at("p").get<long>();
  rec.r = j.at("r").get<long>();
  rec.m = j.at("m").get<long>();
  opt("N", rec.N);
  opt("b", rec.b);
  opt("D", rec.D);
  opt("disc", rec.disc);
  if (!j.at("unit").is_null()) {
    const auto& u = j.at("unit");
    rec.unit = UnitCoords{u.at("u").get<std::string>(), u.at("v").get<std::string>(), u.at("den").get<int>()};
  }
  opt("unit_norm", rec.unit_norm);
  opt("t_is_fundamental", rec.t_is_fundamental);
  rec.splits = j.at("splits").get<bool>();
  opt("n2", rec.n2);
  rec.n1_is_one = j.at("n1_is_one").get<std::string>();
  opt("class_number", rec.class_number);
  opt("h_val_p", rec.h_val_p);
  rec.wieferich = j.at("wieferich").get<bool>();
  rec.m_bound_ok = j.at("m_bound_ok").get<bool>();
  rec.p_rational = j.at("p_rational").get<std::string>();
  rec.greenberg = j.at("greenberg").get<std::string>();
  opt("an_prediction", rec.an_prediction);
  rec.notes = j.at("notes").get<std::vector<std::string>>();
  return rec;
}

inline std::string write_json(const std::vector<ScanRecord>& records) {
  auto arr = nlohmann::ordered_json::array();
  for (const auto& rec : records) arr.push_back(to_json(rec));
  return arr.dump(2) + "\n";
}

inline std::vector<ScanRecord> read_json(const std::string& text) {
  std::vector<ScanRecord> out;
  for (const auto& j : nlohmann::ordered_json::parse(text)) out.push_back(from_json(j));
  return out;
}

// ---------------------------------------------------------------------------
// CSV: nulls are empty cells, the unit is u|v|den, notes are joined by ';'.

namespace detail {

template <class T>
std::string csv_cell(const std::optional<T>& v) {
  if (!v) return "";
  if constexpr (std::is_same_v<T, bool>) {
    return *v ? "true" : "false";
  } else if constexpr (std::is_same_v<T, std::string>) {
    return *v;
  } else {
    return std::to_string(*v);
  }
}

inline std::string csv_bool(bool v) { return v ? "true" : "false"; }

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : s) {
    if (ch == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += ch;
    }
  }
  out.push_back(cur);
  return out;
}

inline bool parse_bool(const std::string& s) {
  if (s == "true") return true;
  if (s == "false") return false;
  fail(ErrorKind::invalid_argument, "bad boolean cell '" + s + "'");
}

}  // namespace detail

inline std::string csv_header() {
  std::string out;
  for (const auto& name : scan_record_fields()) {
    if (!out.empty()) out += ',';
    out += name;
  }
  return out;
}

inline std::string csv_row(const ScanRecord& rec) {
  using detail::csv_bool;
  using detail::csv_cell;
  std::vector<std::string> cells = {
      std::to_string(rec.p),
      std::to_string(rec.r),
      std::to_string(rec.m),
      csv_cell(rec.N),
      csv_cell(rec.b),
      csv_cell(rec.D),
      csv_cell(rec.disc),
      rec.unit ? rec.unit->u + "|" + rec.unit->v + "|" + std::to_string(rec.unit->den) : "",
      csv_cell(rec.unit_norm),
      csv_cell(rec.t_is_fundamental),
      csv_bool(rec.splits),
      csv_cell(rec.n2),
      rec.n1_is_one,
      csv_cell(rec.class_number),
      csv_cell(rec.h_val_p),
      csv_bool(rec.wieferich),
      csv_bool(rec.m_bound_ok),
      rec.p_rational,
      rec.greenberg,
      csv_cell(rec.an_prediction),
  };
  std::string notes;
  for (const auto& n : rec.notes) {
    if (!notes.empty()) notes += ';';
    notes += n;
  }
  cells.push_back(notes);
  std::string out;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) out += ',';
    out += cells[i];
  }
  return out;
}

/// Header comment (optional), header row, one row per record; LF endings.
inline std::string write_csv(const std::vector<ScanRecord>& records, const std::string& comment = "") {
  std::string out;
  if (!comment.empty()) out += "# " + comment + "\n";
  out += csv_header() + "\n";
  for (const auto& rec : records) out += csv_row(rec) + "\n";
  return out;
}

inline std::vector<ScanRecord> read_csv(const std::string& text) {
  std::vector<ScanRecord> out;
  std::istringstream in(text);
  std::string line;
  bool header_seen = false;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (!header_seen) {
      if (line != csv_header()) fail(ErrorKind::invalid_argument, "unexpected CSV header");
      header_seen = true;
      continue;
    }
    const auto c = detail::split(line, ',');
    if (c.size() != scan_record_fields().size()) fail(ErrorKind::invalid_argument, "wrong CSV column count");
    auto str = [](const std::string& s) { return s.empty() ? std::nullopt : std::optional<std::string>(s); };
    auto num = [](const std::string& s) { return s.empty() ? std::nullopt : std::optional<long>(std::stol(s)); };
    ScanRecord rec;
    rec.p = std::stol(c[0]);
    rec.r = std::stol(c[1]);
    rec.m = std::stol(c[2]);
    rec.N = str(c[3]);
    rec.b = str(c[4]);
    rec.D = str(c[5]);
    rec.disc = str(c[6]);
    if (!c[7].empty()) {
      const auto parts = detail::split(c[7], '|');
      if (parts.size() != 3) fail(ErrorKind::invalid_argument, "bad unit cell");
      rec.unit = UnitCoords{parts[0], parts[1], std::stoi(parts[2])};
    }
    if (!c[8].empty()) rec.unit_norm = std::stoi(c[8]);
    if (!c[9].empty()) rec.t_is_fundamental = detail::parse_bool(c[9]);
    rec.splits = detail::parse_bool(c[10]);
    rec.n2 = num(c[11]);
    rec.n1_is_one = c[12];
    rec.class_number = str(c[13]);
    rec.h_val_p = num(c[14]);
    rec.wieferich = detail::parse_bool(c[15]);
    rec.m_bound_ok = detail::parse_bool(c[16]);
    rec.p_rational = c[17];
    rec.greenberg = c[18];
    rec.an_prediction = str(c[19]);
    if (!c[20].empty()) rec.notes = detail::split(c[20], ';');
    out.push_back(std::move(rec));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Factor cache: one line per entry, "N p1^e1 p2^e2 ...".

class FactorCache {
 public:
  FactorCache() = default;

  explicit FactorCache(std::string path) : path_(std::move(path)) {
    std::ifstream in(path_);
    std::string line;
    while (std::getline(in, line)) {
      if (auto f = parse_line(line)) entries_.emplace(to_dec(f->value), std::move(*f));
    }
  }

  std::optional<Factorization> lookup(const Int& n) const {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = entries_.find(to_dec(n));
    if (it == entries_.end()) return std::nullopt;
    return it->second;
  }

  /// Complete factorizations only; each entry is written with a single
  /// appending write.
  void store(const Factorization& f) {
    if (!f.complete) return;
    std::lock_guard<std::mutex> lock(mu_);
    const auto key = to_dec(f.value);
    if (!entries_.emplace(key, f).second || path_.empty()) return;
    const std::string line = format_line(f);
    if (std::FILE* out = std::fopen(path_.c_str(), "a")) {
      std::fwrite(line.data(), 1, line.size(), out);
      std::fclose(out);
    }
  }

  std::size_t size() const {
    std::lock_guard<std::mutex> lock(mu_);
    return entries_.size();
  }

  Factorizer factorizer() {
    return [this](const Int& n, unsigned long effort) {
      if (auto hit = lookup(n)) return *hit;
      auto f = factor(n, effort);
      store(f);
      return f;
    };
  }

  static std::string format_line(const Factorization& f) {
    std::string line = to_dec(f.value);
    for (const auto& pp : f.factors) line += " " + to_dec(pp.prime) + "^" + std::to_string(pp.exponent);
    return line + "\n";
  }

  /// Entries whose factors do not multiply back to N are rejected.
  static std::optional<Factorization> parse_line(const std::string& line) {
    std::istringstream in(line);
    std::string tok;
    if (!(in >> tok)) return std::nullopt;
    Factorization f;
    try {
      f.value = Int(tok);
      while (in >> tok) {
        const auto caret = tok.find('^');
        if (caret == std::string::npos) return std::nullopt;
        f.factors.push_back({Int(tok.substr(0, caret)), static_cast<unsigned>(std::stoul(tok.substr(caret + 1)))});
      }
    } catch (const std::exception&) {
      return std::nullopt;
    }
    f.complete = true;
    if (f.value < 2 || f.product() != f.value) return std::nullopt;
    for (std::size_t i = 0; i < f.factors.size(); ++i) {
      if (!is_prime(f.factors[i].prime)) return std::nullopt;
      if (i && !(f.factors[i - 1].prime < f.factors[i].prime)) return std::nullopt;
    }
    return f;
  }

 private:
  std::string path_;
  mutable std::mutex mu_;
  std::map<std::string, Factorization> entries_;
};

// ---------------------------------------------------------------------------
// Runner

struct Cell {
  long p = 0;
  unsigned r = 0;
  long m = 0;
  friend auto operator<=>(const Cell&, const Cell&) = default;
};

enum class MPolicy { one, bound, fixed };

struct CellPlan {
  std::vector<Cell> cells;
  std::vector<std::string> truncated;  // (p, r) whose admissible m exceeded the cap
};

/// Cells sorted by (p, r, m). `m_max` caps the bound policy per (p, r).
inline CellPlan plan_cells(const std::vector<long>& ps, unsigned r_lo, unsigned r_hi, MPolicy policy, long fixed_m,
                           long m_max) {
  CellPlan plan;
  for (long p : ps) {
    for (unsigned r = r_lo; r <= r_hi; ++r) {
      if (policy == MPolicy::one) {
        plan.cells.push_back({p, r, 1});
      } else if (policy == MPolicy::fixed) {
        plan.cells.push_back({p, r, fixed_m});
      } else {
        for (long m = 1; m <= m_max; ++m) {
          if (!m_bound_satisfied(Int(p), r, Int(m))) break;
          if (m % p != 0) plan.cells.push_back({p, r, m});
        }
        if (m_bound_satisfied(Int(p), r, Int(m_max + 1))) {
          plan.truncated.push_back("p=" + std::to_string(p) + " r=" + std::to_string(r));
        }
      }
    }
  }
  std::sort(plan.cells.begin(), plan.cells.end());
  plan.cells.erase(std::unique(plan.cells.begin(), plan.cells.end()), plan.cells.end());
  return plan;
}

/// Runs cells on up to `jobs` threads; output order is cell order.
inline std::vector<ScanRecord> run_scan(const std::vector<Cell>& cells, const AnalysisOptions& opts, unsigned jobs) {
  std::vector<ScanRecord> out(cells.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < cells.size(); i = next++) {
      const auto& c = cells[i];
      out[i] = scan_cell(Int(c.p), c.r, Int(c.m), opts);
    }
  };
  jobs = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(std::max<std::size_t>(cells.size(), 1))));
  std::vector<std::thread> pool;
  for (unsigned j = 1; j < jobs; ++j) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  return out;
}

struct ScanSummary {
  std::size_t rows = 0;
  std::size_t non_p_rational = 0;
  std::size_t p_rational_inconclusive = 0;
  std::size_t mu_lambda_zero = 0;
  std::size_t greenberg_inconclusive = 0;
  std::size_t failed = 0;  // rows without a constructed field

  std::string str() const {
    std::ostringstream os;
    os << "rows=" << rows << " non-p-rational=" << non_p_rational
       << " p-rational-inconclusive=" << p_rational_inconclusive << " mu-lambda-zero=" << mu_lambda_zero
       << " greenberg-inconclusive=" << greenberg_inconclusive << " failed=" << failed;
    return os.str();
  }
};

inline ScanSummary summarize(const std::vector<ScanRecord>& records) {
  ScanSummary s;
  for (const auto& rec : records) {
    ++s.rows;
    (rec.p_rational == "non-p-rational" ? s.non_p_rational : s.p_rational_inconclusive)++;
    (rec.greenberg == "mu-lambda-zero" ? s.mu_lambda_zero : s.greenberg_inconclusive)++;
    if (!rec.D) ++s.failed;
  }
  return s;
}

}  // namespace qfam
