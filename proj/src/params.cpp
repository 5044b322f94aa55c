#include "isp/params.hpp"

#include <openssl/evp.h>

#include <fstream>
#include <map>
#include <sstream>

namespace isp {

namespace {

std::string opt_str(const std::optional<Int>& v) { return v ? v->get_str() : "-"; }

std::string clean(std::string s) {
  for (char& c : s) {
    if (c == '\t' || c == '\n' || c == '\r') c = ' ';
  }
  return s;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

Int parse_int(const std::string& s, const std::string& what) {
  Int v;
  if (s.empty() || v.set_str(s, 10) != 0) throw ParseError("bad integer for " + what + ": '" + s + "'");
  return v;
}

std::optional<Int> parse_opt_int(const std::string& s, const std::string& what) {
  if (s == "-") return std::nullopt;
  return parse_int(s, what);
}

std::uint64_t parse_u64(const std::string& s, const std::string& what) {
  try {
    std::size_t used = 0;
    const auto v = std::stoull(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ParseError("bad unsigned value for " + what + ": '" + s + "'");
  }
}

// "k1=v1 k2=v2" -> map
std::map<std::string, std::string> parse_fields(const std::string& s) {
  std::map<std::string, std::string> out;
  std::istringstream in(s);
  std::string tok;
  while (in >> tok) {
    const auto eq = tok.find('=');
    if (eq == std::string::npos) throw ParseError("expected key=value, got '" + tok + "'");
    out[tok.substr(0, eq)] = tok.substr(eq + 1);
  }
  return out;
}

const std::string& field(const std::map<std::string, std::string>& f, const std::string& key) {
  const auto it = f.find(key);
  if (it == f.end()) throw ParseError("missing field '" + key + "'");
  return it->second;
}

void write_check(std::ostream& out, const ConditionCheck& c) {
  out << "check\t" << c.id << '\t' << status_name(c.status) << '\t' << (c.applicable ? "applicable" : "n/a") << '\t'
      << clean(c.lhs) << '\t' << clean(c.rhs) << '\t' << clean(c.range) << '\t' << clean(c.note) << '\n';
}

ConditionCheck parse_check(const std::string& line) {
  const auto parts = split(line, '\t');
  if (parts.size() != 8) throw ParseError("check line needs 8 tab-separated fields");
  ConditionCheck c;
  c.id = parts[1];
  try {
    c.status = parse_status(parts[2]);
  } catch (const std::invalid_argument& e) {
    throw ParseError(e.what());
  }
  if (parts[3] != "applicable" && parts[3] != "n/a") throw ParseError("bad applicability '" + parts[3] + "'");
  c.applicable = parts[3] == "applicable";
  c.lhs = parts[4];
  c.rhs = parts[5];
  c.range = parts[6];
  c.note = parts[7];
  return c;
}

}  // namespace

WeightConfig ParameterFile::weight_config() const {
  WeightConfig w;
  w.gain = gain;
  w.memo_cap = memo_cap;
  return w;
}

OperatorModel ParameterFile::build_model() const {
  OperatorModel m(mode, weight_config());
  for (std::size_t n = 0; n < stages.size(); ++n) {
    m.push_stage(stages[n].choice);
    if (stages[n].log2_D) m.commit_D(n, *stages[n].log2_D);
  }
  return m;
}

void append_searched_stage(ParameterFile& pf, OperatorModel& model, const SamplerConfig& sampler,
                           const Progress& progress) {
  const std::size_t n = model.stage_count();
  StageRecord rec;
  rec.report = extend_stage(model, {}, progress);
  const StageParams& st = model.stage(n);
  rec.choice = {st.a, st.b, st.s};
  if (progress) progress("stage " + std::to_string(n) + ": estimating D from " + std::to_string(sampler.count) + " samples");
  const DEstimate est = estimate_D(n, model, sampler);
  model.commit_D(n, est.log2_D);
  rec.log2_D = est.log2_D;
  rec.d_source = DRecord{true, est.samples, est.seed, est.max_mass};
  if (progress) progress("stage " + std::to_string(n) + ": D = 2^" + est.log2_D.get_str() + " (max mass " + est.max_mass.str() + ")");
  pf.stages.push_back(std::move(rec));
}

void append_manual_stage(ParameterFile& pf, OperatorModel& model, const StageChoice& choice, const Int& log2_D) {
  const std::size_t n = model.stage_count();
  model.push_stage(choice);
  model.commit_D(n, log2_D);
  StageRecord rec;
  rec.choice = choice;
  rec.log2_D = log2_D;
  rec.d_source = DRecord{false, 0, 0, Scalar(0)};
  rec.report = evaluate_conditions(model, n);
  pf.stages.push_back(std::move(rec));
}

ParameterFile builtin_params(Mode mode, const Progress& progress) {
  ParameterFile pf;
  pf.mode = mode;
  OperatorModel model = pf.build_model();
  if (mode == Mode::strict) {
    for (int n = 0; n < 2; ++n) append_searched_stage(pf, model, {}, progress);
    return pf;
  }
  const long a[] = {4, 16, 64, 250};
  const long b[] = {0, 6, 30, 120};
  const long s[] = {0, 14, 62, 242};
  for (std::size_t n = 0; n < 4; ++n) {
    StageChoice c{Int(a[n]), std::nullopt, std::nullopt};
    if (n > 0) {
      c.b = Int(b[n]);
      c.s = Int(s[n]);
    }
    append_manual_stage(pf, model, c, Int(1));
  }
  return pf;
}

std::string to_text(const ParameterFile& pf) {
  const OperatorModel m = pf.build_model();
  std::ostringstream out;
  out << kParamsMagic << '\n';
  out << "mode " << mode_name(pf.mode) << '\n';
  out << "weights gain=" << pf.gain << " memo_cap=" << pf.memo_cap << '\n';
  out << "stages " << pf.stages.size() << '\n';
  for (std::size_t n = 0; n < pf.stages.size(); ++n) {
    const StageRecord& rec = pf.stages[n];
    const StageParams& st = m.stage(n);
    out << "stage " << n << '\n';
    out << "a " << rec.choice.a.get_str() << '\n';
    out << "b " << opt_str(rec.choice.b) << '\n';
    out << "s " << opt_str(rec.choice.s) << '\n';
    out << "log2_D " << opt_str(rec.log2_D) << '\n';
    if (rec.d_source) {
      const DRecord& d = *rec.d_source;
      out << "d_source " << (d.empirical ? "empirical" : "manual") << " samples=" << d.samples << " seed=" << d.seed
          << " max_mass=" << d.max_mass.str() << '\n';
    }
    out << "derived level=" << st.level << " delta=" << st.delta.get_str() << " delta_next=" << st.delta_next.get_str()
        << " D=" << (st.log2_D ? st.D().str() : "-") << " eps=" << st.eps.str() << '\n';
    out << "positions delta=" << st.pos_delta.get_str() << " a=" << st.pos_a.get_str()
        << " b=" << opt_str(st.pos_b) << " s=" << opt_str(st.pos_s) << " delta_next=" << st.pos_delta_next.get_str()
        << '\n';
    if (rec.report) {
      for (const auto& c : rec.report->checks) write_check(out, c);
    }
    out << "end\n";
  }
  return out.str();
}

ParameterFile parse_params(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  auto next = [&]() -> bool {
    if (!std::getline(in, line)) return false;
    ++lineno;
    return true;
  };
  auto fail = [&](const std::string& msg) -> ParseError {
    return ParseError("line " + std::to_string(lineno) + ": " + msg);
  };
  auto expect_key = [&](const std::string& key) -> std::string {
    if (!next()) throw fail("unexpected end of file, wanted '" + key + "'");
    if (line.rfind(key + " ", 0) != 0) throw fail("expected '" + key + "', got '" + line + "'");
    return line.substr(key.size() + 1);
  };

  if (!next() || line != kParamsMagic) throw ParseError("not a parameter file (missing '" + std::string(kParamsMagic) + "')");
  ParameterFile pf;
  try {
    pf.mode = parse_mode(expect_key("mode"));
  } catch (const std::invalid_argument& e) {
    throw fail(e.what());
  }
  {
    const auto f = parse_fields(expect_key("weights"));
    const auto gain = parse_u64(field(f, "gain"), "gain");
    if (gain == 0 || gain > 64) throw fail("gain out of range");
    pf.gain = static_cast<unsigned>(gain);
    pf.memo_cap = parse_u64(field(f, "memo_cap"), "memo_cap");
  }
  const std::uint64_t count = parse_u64(expect_key("stages"), "stages");
  std::vector<std::pair<std::string, std::string>> derived;  // per stage: derived + positions lines
  for (std::uint64_t n = 0; n < count; ++n) {
    if (expect_key("stage") != std::to_string(n)) throw fail("stages out of order");
    StageRecord rec;
    rec.choice.a = parse_int(expect_key("a"), "a");
    rec.choice.b = parse_opt_int(expect_key("b"), "b");
    rec.choice.s = parse_opt_int(expect_key("s"), "s");
    rec.log2_D = parse_opt_int(expect_key("log2_D"), "log2_D");
    if (!next()) throw fail("unexpected end of file");
    if (line.rfind("d_source ", 0) == 0) {
      std::istringstream ds(line.substr(9));
      std::string kind;
      ds >> kind;
      if (kind != "empirical" && kind != "manual") throw fail("bad d_source '" + kind + "'");
      std::string rest;
      std::getline(ds, rest);
      const auto f = parse_fields(rest);
      DRecord d;
      d.empirical = kind == "empirical";
      d.samples = parse_u64(field(f, "samples"), "samples");
      d.seed = parse_u64(field(f, "seed"), "seed");
      try {
        d.max_mass = Scalar::parse(field(f, "max_mass"));
      } catch (const std::exception& e) {
        throw fail(e.what());
      }
      rec.d_source = d;
      if (!next()) throw fail("unexpected end of file");
    }
    if (line.rfind("derived ", 0) != 0) throw fail("expected 'derived', got '" + line + "'");
    std::string derived_line = line;
    const std::string positions_line = "positions " + expect_key("positions");
    ConditionReport report;
    report.stage = n;
    for (;;) {
      if (!next()) throw fail("unexpected end of file in stage " + std::to_string(n));
      if (line == "end") break;
      if (line.rfind("check\t", 0) != 0) throw fail("unexpected line '" + line + "'");
      try {
        report.checks.push_back(parse_check(line));
      } catch (const ParseError& e) {
        throw fail(e.what());
      }
    }
    if (!report.checks.empty()) rec.report = std::move(report);
    pf.stages.push_back(std::move(rec));
    derived.emplace_back(std::move(derived_line), positions_line);
  }
  while (next()) {
    if (!line.empty()) throw fail("trailing content '" + line + "'");
  }

  // Rebuild and cross-check every derived value.
  ParameterFile copy = pf;
  std::string rebuilt;
  try {
    rebuilt = to_text(copy);
  } catch (const std::exception& e) {
    throw ParseError(std::string("stage choices do not form a valid model: ") + e.what());
  }
  std::istringstream rin(rebuilt);
  std::size_t k = 0;
  while (std::getline(rin, line)) {
    if (line.rfind("derived ", 0) == 0) {
      if (line != derived[k].first) throw ParseError("stage " + std::to_string(k) + ": derived values disagree: file '" +
                                                     derived[k].first + "', rebuilt '" + line + "'");
    } else if (line.rfind("positions ", 0) == 0) {
      if (line != derived[k].second) throw ParseError("stage " + std::to_string(k) + ": positions disagree");
      ++k;
    }
  }
  return pf;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("write failed for " + path.string());
}

void save_params(const std::filesystem::path& path, const ParameterFile& pf) { write_file(path, to_text(pf)); }

ParameterFile load_params(const std::filesystem::path& path) { return parse_params(read_file(path)); }

std::string sha256_hex(const std::string& data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1) throw Error("SHA-256 failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 15];
  }
  return out;
}

}  // namespace isp
