// isp: parameter files, ordering, operator, verification and certificates.
//
// Exit codes: 0 success, 1 verification failure, 2 horizon, 3 usage or parse.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include "CLI11.hpp"
#include "isp/formats.hpp"
#include "isp/params.hpp"
#include "isp/verify.hpp"

namespace {

using namespace isp;

constexpr int kOk = 0;
constexpr int kFailed = 1;
constexpr int kHorizon = 2;
constexpr int kUsage = 3;

constexpr const char* kParamsEnv = "ISP_PARAMS";

class UsageError : public Error {
 public:
  using Error::Error;
};

struct ModelSource {
  std::string params;
  std::string mode;
};

struct Loaded {
  ParameterFile pf;
  std::string hash;
  std::string origin;
  OperatorModel model;
};

void add_model_options(CLI::App* cmd, ModelSource& src) {
  cmd->add_option("--params", src.params, "parameter file (default: $ISP_PARAMS, else the builtin model)");
  cmd->add_option("--mode", src.mode, "builtin model when no file is given")->check(CLI::IsMember({"strict", "toy"}));
}

Loaded load_model(const ModelSource& src) {
  std::string path = src.params;
  if (path.empty() && src.mode.empty()) {
    if (const char* env = std::getenv(kParamsEnv)) path = env;
  }
  ParameterFile pf;
  std::string hash, origin;
  if (!path.empty()) {
    const std::string text = read_file(path);
    pf = parse_params(text);
    if (!src.mode.empty() && parse_mode(src.mode) != pf.mode) {
      throw UsageError("--mode " + src.mode + " contradicts " + path + " (mode " + mode_name(pf.mode) + ")");
    }
    hash = sha256_hex(text);
    origin = path;
  } else {
    const Mode mode = src.mode.empty() ? Mode::strict : parse_mode(src.mode);
    pf = builtin_params(mode);
    hash = sha256_hex(to_text(pf));
    origin = std::string("builtin ") + mode_name(mode);
  }
  OperatorModel model = pf.build_model();
  return Loaded{std::move(pf), hash, origin, std::move(model)};
}

void emit(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
  } else {
    write_file(path, text);
  }
}

std::string read_input(const std::string& path) {
  if (path == "-") {
    std::ostringstream ss;
    ss << std::cin.rdbuf();
    return ss.str();
  }
  return read_file(path);
}

Int parse_int_arg(const std::string& s, const char* what) {
  Int v;
  if (s.empty() || v.set_str(s, 10) != 0) throw UsageError(std::string(what) + ": not an integer: '" + s + "'");
  return v;
}

// ---------------------------------------------------------------- params

struct ParamsArgs {
  std::string mode = "strict";
  std::string file, out;
  std::size_t stages = 1;
  std::uint64_t seed = 20240611;
  std::size_t samples = 64;
  std::vector<std::string> a, b, s, log2_D;
  bool quiet = false;
};

Progress progress_printer(bool quiet) {
  if (quiet) return {};
  return [](const std::string& msg) { std::cerr << "  " << msg << '\n'; };
}

SamplerConfig sampler_of(const ParamsArgs& args) {
  SamplerConfig cfg;
  cfg.seed = args.seed;
  cfg.count = args.samples;
  return cfg;
}

// Appends the manual toy stages given by --a/--b/--s/--log2-D.
void append_manual_lists(ParameterFile& pf, OperatorModel& model, const ParamsArgs& args) {
  const std::size_t k = args.a.size();
  if (args.log2_D.size() != k) throw UsageError("--log2-D needs one value per --a value");
  const std::size_t first = model.stage_count();
  const std::size_t paired = first == 0 ? k - 1 : k;
  if (k == 0 || args.b.size() != paired || args.s.size() != paired) {
    throw UsageError("--b and --s need one value per stage after stage 0");
  }
  for (std::size_t i = 0; i < k; ++i) {
    StageChoice c{parse_int_arg(args.a[i], "--a"), std::nullopt, std::nullopt};
    if (first + i > 0) {
      const std::size_t at = first == 0 ? i - 1 : i;
      c.b = parse_int_arg(args.b[at], "--b");
      c.s = parse_int_arg(args.s[at], "--s");
    }
    try {
      append_manual_stage(pf, model, c, parse_int_arg(args.log2_D[i], "--log2-D"));
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
  }
}

void save_and_report(const ParameterFile& pf, const std::string& path) {
  const std::string text = to_text(pf);
  emit(path, text);
  if (!path.empty() && path != "-") {
    std::cout << "wrote " << path << " (" << pf.stages.size() << " stages, sha256 " << sha256_hex(text) << ")\n";
  }
}

int params_build(const ParamsArgs& args) {
  ParameterFile pf;
  pf.mode = parse_mode(args.mode);
  OperatorModel model = pf.build_model();
  if (pf.mode == Mode::strict) {
    if (!args.a.empty()) throw UsageError("strict stages are searched; --a/--b/--s apply to toy mode");
    for (std::size_t n = 0; n < args.stages; ++n) append_searched_stage(pf, model, sampler_of(args), progress_printer(args.quiet));
  } else if (args.a.empty()) {
    pf = builtin_params(Mode::toy);
  } else {
    append_manual_lists(pf, model, args);
  }
  save_and_report(pf, args.out);
  return kOk;
}

int params_extend(const ParamsArgs& args) {
  ParameterFile pf = load_params(args.file);
  OperatorModel model = pf.build_model();
  if (pf.mode == Mode::strict) {
    if (!args.a.empty()) throw UsageError("strict stages are searched; --a/--b/--s apply to toy mode");
    if (!args.quiet) std::cerr << "extending to stage " << model.stage_count() << '\n';
    append_searched_stage(pf, model, sampler_of(args), progress_printer(args.quiet));
  } else {
    if (args.a.empty()) throw UsageError("toy stages need --a, --b, --s and --log2-D");
    append_manual_lists(pf, model, args);
  }
  save_and_report(pf, args.out.empty() ? args.file : args.out);
  return kOk;
}

int params_show(const ParamsArgs& args) {
  const std::string text = read_file(args.file);
  const ParameterFile pf = parse_params(text);
  const OperatorModel model = pf.build_model();
  std::cout << "file " << args.file << '\n';
  std::cout << "sha256 " << sha256_hex(text) << '\n';
  std::cout << "mode " << mode_name(pf.mode) << "  gain " << pf.gain << "  memo_cap " << pf.memo_cap << '\n';
  for (const StageParams& st : model.stages()) {
    std::cout << "stage " << st.index << "  N=" << st.level << "  a=" << st.a.get_str()
              << "  b=" << (st.b ? st.b->get_str() : "-") << "  s=" << (st.s ? st.s->get_str() : "-")
              << "  D=" << (st.log2_D ? st.D().str() : "-") << "  eps=" << st.eps.str() << '\n';
    std::cout << "  ranks  P_n=" << st.pos_delta.get_str() << "  A_n=" << st.pos_a.get_str()
              << "  P_n+1=" << st.pos_delta_next.get_str() << '\n';
    const auto& rec = pf.stages[st.index];
    if (rec.d_source && rec.d_source->empirical) {
      std::cout << "  D estimate  samples=" << rec.d_source->samples << "  seed=" << rec.d_source->seed
                << "  max_mass=" << rec.d_source->max_mass.str() << '\n';
    }
    if (rec.report) {
      std::cout << "  conditions";
      for (const auto& c : rec.report->checks) std::cout << "  " << c.id << '=' << status_name(c.status);
      std::cout << '\n';
    }
  }
  std::cout << "rank horizon " << model.rank_horizon().get_str() << '\n';
  return kOk;
}

int params_check(const ParamsArgs& args) {
  const ParameterFile pf = load_params(args.file);
  const OperatorModel model = pf.build_model();
  std::size_t failed = 0, stale = 0;
  for (std::size_t n = 0; n < model.stage_count(); ++n) {
    const ConditionReport now = evaluate_conditions(model, n);
    const auto& stored = pf.stages[n].report;
    if (stored && !(*stored == now)) {
      ++stale;
      std::cout << "stage " << n << " stored report differs from re-evaluation\n";
    }
    for (const auto& c : now.checks) {
      std::cout << "stage " << n << ' ' << c.id << ' ' << status_name(c.status);
      if (c.applicable) std::cout << "  lhs=" << c.lhs << "  rhs=" << c.rhs;
      if (!c.note.empty()) std::cout << "  (" << c.note << ')';
      std::cout << '\n';
      if (c.status == CheckStatus::fails) ++failed;
    }
  }
  if (failed || stale) {
    std::cout << "FAIL " << failed << " failing conditions, " << stale << " stale reports";
    if (pf.mode == Mode::toy) std::cout << " (toy mode)";
    std::cout << '\n';
    for (std::size_t n = 0; n < model.stage_count(); ++n) {
      for (const auto& c : evaluate_conditions(model, n).checks) {
        if (c.status == CheckStatus::fails) std::cout << "failed stage " << n << ' ' << c.id << '\n';
      }
    }
    return kFailed;
  }
  std::cout << "PASS all conditions hold\n";
  return kOk;
}

// ---------------------------------------------------------------- order

struct OrderArgs {
  std::vector<std::string> b;
  ModelSource src;
  std::string rank, row, col, out;
  std::size_t count = 200;
};

StageGeometry geometry_of(const OrderArgs& args) {
  if (args.b.empty()) return load_model(args.src).model.geometry();
  BParams p;
  for (const auto& v : args.b) p.values.push_back(parse_int_arg(v, "--b"));
  try {
    p.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  return StageGeometry(p);
}

int order_rank(const OrderArgs& args) {
  std::cout << geometry_of(args).rank_to_coord(parse_int_arg(args.rank, "rank")).str() << '\n';
  return kOk;
}

int order_coord(const OrderArgs& args) {
  const Int i = parse_int_arg(args.row, "row");
  const Int j = parse_int_arg(args.col, "column");
  if (i < 0 || j < 0 || !j.fits_ulong_p()) throw UsageError("coordinates must be non-negative");
  std::cout << geometry_of(args).coord_to_rank(Coord{i, j.get_ui()}).get_str() << '\n';
  return kOk;
}

std::vector<Coord> path_of(const OrderArgs& args) {
  const StageGeometry g = geometry_of(args);
  std::vector<Coord> path;
  path.reserve(args.count);
  for (std::size_t k = 0; k < args.count; ++k) path.push_back(g.rank_to_coord(Rank(static_cast<unsigned long>(k))));
  return path;
}

int order_path(const OrderArgs& args) {
  std::ostringstream os;
  write_path_csv(os, path_of(args));
  emit(args.out, os.str());
  return kOk;
}

int order_figure(const OrderArgs& args) {
  std::ostringstream os;
  write_path_svg(os, path_of(args), geometry_of(args).params());
  emit(args.out, os.str());
  if (!args.out.empty() && args.out != "-") std::cout << "wrote " << args.out << " (" << args.count << " cells)\n";
  return kOk;
}

// ---------------------------------------------------------------- op

struct OpArgs {
  ModelSource src;
  std::string file, out, k, j, form;
  bool inverse = false;
};

bool rank_form(const std::string& text) { return text.find("\nform ranks") != std::string::npos; }

std::string vector_out(const SparseVector& x, const OperatorModel& m, bool ranks) {
  return ranks ? vector_text(m.to_rank_form(x)) : vector_text(x);
}

bool output_ranks(const OpArgs& args, const std::string& input) {
  if (args.form.empty()) return rank_form(input);
  return args.form == "ranks";
}

int op_apply(const OpArgs& args) {
  const Loaded l = load_model(args.src);
  const std::string text = read_input(args.file);
  const SparseVector x = parse_vector(text, l.model);
  emit(args.out, vector_out(apply_T(x, l.model), l.model, output_ranks(args, text)));
  return kOk;
}

int op_power(const OpArgs& args) {
  const Loaded l = load_model(args.src);
  const std::string text = read_input(args.file);
  const SparseVector x = parse_vector(text, l.model);
  const Rank k = parse_int_arg(args.k, "--k");
  if (k < 0) throw UsageError("--k must be non-negative");
  emit(args.out, vector_out(apply_T_power(k, x, l.model), l.model, output_ranks(args, text)));
  return kOk;
}

int op_alpha(const OpArgs& args) {
  const Loaded l = load_model(args.src);
  const Rank j = parse_int_arg(args.j, "--j");
  if (j < 0) throw UsageError("--j must be non-negative");
  std::cout << l.model.alpha(j).str() << '\n';
  return kOk;
}

int op_gamma(const OpArgs& args) {
  const Loaded l = load_model(args.src);
  const std::string text = read_input(args.file);
  if (args.inverse) {
    const SparseVector x = from_gamma(parse_gamma(text), l.model);
    emit(args.out, vector_out(x, l.model, args.form == "ranks"));
  } else {
    emit(args.out, gamma_text(to_gamma(parse_vector(text, l.model), l.model)));
  }
  return kOk;
}

// ---------------------------------------------------------------- verify

struct VerifyArgs {
  ModelSource src;
  std::string suite = "all", out, json;
  VerifyRanges ranges;
};

int cmd_verify(const VerifyArgs& args) {
  const Loaded l = load_model(args.src);
  std::vector<std::string> ids;
  if (args.suite == "all") {
    ids = suite_ids();
  } else {
    const auto& known = suite_ids();
    if (std::find(known.begin(), known.end(), args.suite) == known.end()) {
      throw UsageError("unknown suite '" + args.suite + "'");
    }
    ids = {args.suite};
  }
  std::vector<SuiteReport> reports;
  for (const auto& id : ids) reports.push_back(run_verification_suite(id, l.model, args.ranges));
  emit(args.out, format_reports(reports, args.ranges, l.hash));
  if (!args.json.empty()) emit(args.json, summary_json(reports, args.ranges, l.hash));
  if (!args.out.empty() && args.out != "-") {
    for (const auto& r : reports) std::cout << r.suite << ' ' << r.verdict() << '\n';
  }
  for (const auto& r : reports) {
    if (r.verdict() == "FAIL") return kFailed;
  }
  return kOk;
}

// ---------------------------------------------------------------- cyclic

struct CyclicArgs {
  ModelSource src;
  std::string input, out, support_below;
  unsigned N = 0;
  std::uint64_t seed = 7;
};

Rank support_bound(const std::string& s, const OperatorModel& m) {
  if (s.empty()) return m.stage(0).pos_a;
  for (std::size_t n = 0; n < m.stage_count(); ++n) {
    const std::string idx = std::to_string(n);
    if (s == "pos(a" + idx + ",0)" || s == "pos(a_" + idx + ",0)") return m.stage(n).pos_a;
  }
  const Rank r = parse_int_arg(s, "--support-below");
  if (r <= 0) throw UsageError("--support-below must be positive");
  return r;
}

int cmd_cyclic(const CyclicArgs& args) {
  const Loaded l = load_model(args.src);
  SparseVector x;
  if (args.input == "random") {
    std::mt19937_64 rng(args.seed);
    x = l.model.to_coord_form(random_rank_vector(support_bound(args.support_below, l.model), rng));
  } else {
    x = parse_vector(read_input(args.input), l.model);
  }
  CyclicityReport rep;
  try {
    rep = cyclic_certificate(x, args.N, l.model);
  } catch (const Unresolved& e) {
    std::cout << "Unresolved: " << e.what() << '\n';
    return kHorizon;
  }
  const bool pass = rep.final_norm <= Scalar(4);
  std::cout << "verdict " << (pass ? "PASS" : "FAIL") << '\n';
  std::cout << "residual " << rep.final_norm.str() << '\n';
  std::cout << "bound 4\n";
  std::cout << "stage " << rep.stage << "  N " << rep.N << "  method " << rep.certificate.method << "  mass "
            << rep.certificate.mass.str() << "  degree terms " << rep.certificate.coeffs.size() << '\n';
  if (!rep.certificate.warning.empty()) std::cout << "warning " << rep.certificate.warning << '\n';
  if (!args.out.empty()) {
    emit(args.out, certificate_text(rep, l.hash));
    if (args.out != "-") std::cout << "wrote " << args.out << '\n';
  }
  return pass ? kOk : kFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Exact operator on s^N without invariant subspaces: parameters, ordering, operator, checks"};
  app.require_subcommand(1);
  int status = kOk;

  ParamsArgs pa;
  auto* params = app.add_subcommand("params", "build, extend, show or check parameter files");
  params->require_subcommand(1);
  auto add_lists = [&pa](CLI::App* c) {
    c->add_option("--a", pa.a, "toy a_n values")->delimiter(',');
    c->add_option("--b", pa.b, "toy b_n values (stage 1 on)")->delimiter(',');
    c->add_option("--s", pa.s, "toy s_n values (stage 1 on)")->delimiter(',');
    c->add_option("--log2-D", pa.log2_D, "toy log2 D_n values")->delimiter(',');
    c->add_option("--seed", pa.seed, "sampler seed for D estimates");
    c->add_option("--samples", pa.samples, "sampled K_n members per D estimate");
    c->add_flag("-q,--quiet", pa.quiet, "no progress output");
    c->add_option("-o,--output", pa.out, "output file (default stdout; extend rewrites the input)");
  };
  auto* build = params->add_subcommand("build", "new parameter file");
  build->add_option("--mode", pa.mode)->check(CLI::IsMember({"strict", "toy"}));
  build->add_option("--stages", pa.stages, "strict stages to search")->check(CLI::Range(1, 2));
  add_lists(build);
  build->callback([&] { status = params_build(pa); });
  auto* extend = params->add_subcommand("extend", "append one stage");
  extend->add_option("file", pa.file)->required();
  add_lists(extend);
  extend->callback([&] { status = params_extend(pa); });
  auto* show = params->add_subcommand("show", "summarize a parameter file");
  show->add_option("file", pa.file)->required();
  show->callback([&] { status = params_show(pa); });
  auto* check = params->add_subcommand("check", "re-evaluate every condition");
  check->add_option("file", pa.file)->required();
  check->callback([&] { status = params_check(pa); });

  OrderArgs oa;
  auto* order = app.add_subcommand("order", "the enumeration of N x N");
  order->require_subcommand(1);
  auto add_order = [&oa](CLI::App* c) {
    c->add_option("--b", oa.b, "closed list of b_n values (default: the model's)")->delimiter(',');
    add_model_options(c, oa.src);
  };
  auto* rank = order->add_subcommand("rank", "rank -> (i,j)");
  rank->add_option("rank", oa.rank)->required();
  add_order(rank);
  rank->callback([&] { status = order_rank(oa); });
  auto* coord = order->add_subcommand("coord", "(i,j) -> rank");
  coord->add_option("i", oa.row)->required();
  coord->add_option("j", oa.col)->required();
  add_order(coord);
  coord->callback([&] { status = order_coord(oa); });
  auto* path = order->add_subcommand("path", "CSV of the first cells");
  auto* figure = order->add_subcommand("figure", "SVG of the first cells");
  for (auto* c : {path, figure}) {
    c->add_option("--count", oa.count, "cells")->check(CLI::Range(1, 10000000));
    c->add_option("-o,--output", oa.out);
    add_order(c);
  }
  path->callback([&] { status = order_path(oa); });
  figure->callback([&] { status = order_figure(oa); });

  OpArgs opa;
  auto* op = app.add_subcommand("op", "apply the operator to vector files");
  op->require_subcommand(1);
  auto add_op = [&opa](CLI::App* c, bool file) {
    add_model_options(c, opa.src);
    if (file) {
      c->add_option("file", opa.file, "vector file ('-' for stdin)")->required();
      c->add_option("-o,--output", opa.out);
      c->add_option("--form", opa.form, "output form")->check(CLI::IsMember({"ranks", "coords"}));
    }
  };
  auto* apply = op->add_subcommand("apply", "T x");
  add_op(apply, true);
  apply->callback([&] { status = op_apply(opa); });
  auto* power = op->add_subcommand("power", "T^k x");
  add_op(power, true);
  power->add_option("--k", opa.k)->required();
  power->callback([&] { status = op_power(opa); });
  auto* alpha = op->add_subcommand("alpha", "the weight alpha_j");
  add_op(alpha, false);
  alpha->add_option("--j", opa.j)->required();
  alpha->callback([&] { status = op_alpha(opa); });
  auto* gamma = op->add_subcommand("gamma", "gamma coefficients, or back with --inverse");
  add_op(gamma, true);
  gamma->add_flag("--inverse", opa.inverse);
  gamma->callback([&] { status = op_gamma(opa); });

  VerifyArgs va;
  auto* verify = app.add_subcommand("verify", "run verification suites");
  verify->add_option("suite", va.suite, "suite id or 'all'");
  add_model_options(verify, va.src);
  verify->add_option("--jmax", va.ranges.jmax);
  verify->add_option("--Nmax", va.ranges.Nmax);
  verify->add_option("--seed", va.ranges.seed);
  verify->add_option("--samples", va.ranges.samples);
  verify->add_option("-o,--output", va.out, "text report (default stdout)");
  verify->add_option("--json", va.json, "JSON summary");
  verify->callback([&] { status = cmd_verify(va); });

  CyclicArgs ca;
  auto* cyclic = app.add_subcommand("cyclic", "certificate ||P(T)x - e_0||_N <= 4");
  cyclic->add_option("input", ca.input, "vector file or 'random'")->required();
  add_model_options(cyclic, ca.src);
  cyclic->add_option("--N", ca.N, "seminorm level");
  cyclic->add_option("--seed", ca.seed, "seed for 'random'");
  cyclic->add_option("--support-below", ca.support_below, "rank bound for 'random' (integer or pos(a0,0))");
  cyclic->add_option("-o,--output", ca.out, "certificate file");
  cyclic->callback([&] { status = cmd_cyclic(ca); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  } catch (const HorizonExceeded& e) {
    std::cerr << "horizon: " << e.what() << '\n';
    return kHorizon;
  } catch (const Unresolved& e) {
    std::cerr << "Unresolved: " << e.what() << '\n';
    return kHorizon;
  } catch (const UsageError& e) {
    std::cerr << "usage: " << e.what() << '\n';
    return kUsage;
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << '\n';
    return kUsage;
  } catch (const IoError& e) {
    std::cerr << e.what() << '\n';
    return kUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid input: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kFailed;
  }
  return status;
}
