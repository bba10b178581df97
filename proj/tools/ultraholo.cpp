// ultraholo: command-line front end for the ultraholo library.
#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "ultraholo/checks.hpp"
#include "ultraholo/conjugate.hpp"
#include "ultraholo/extension.hpp"
#include "ultraholo/flatkernel.hpp"
#include "ultraholo/indices.hpp"
#include "ultraholo/parallel.hpp"
#include "ultraholo/sources.hpp"
#include "ultraholo/weightfn.hpp"
#include "ultraholo/weightseq.hpp"
#include "ultraholo/wmatrix.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace uh;

namespace {

struct Global {
  std::string weight = "power:0.5";
  std::size_t horizon = 200;
  int precision = 113;
  std::uint64_t seed = 0;
  std::string out;
  double tol = 1e-9;
  bool no_meta = false;
  std::string command_line;
};

std::string utc_now() {
  std::time_t t = std::time(nullptr);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return buf;
}

// CSV bodies are deterministic; the optional comment header carries the run metadata.
std::string with_meta(const Global& g, const std::string& body) {
  if (g.no_meta) return body;
  std::ostringstream os;
  os << "# ultraholo " << g.command_line << "\n# generated " << utc_now() << "\n";
  return os.str() + body;
}

// Writes name under --out, or to stdout when no directory was given.
void emit(const Global& g, const std::string& name, const std::string& text) {
  if (g.out.empty()) {
    std::cout << text;
    return;
  }
  fs::create_directories(g.out);
  std::ofstream f(fs::path(g.out) / name, std::ios::binary);
  if (!f) throw Error("io-error", "cannot write " + name);
  f << text;
  std::cerr << "wrote " << (fs::path(g.out) / name).string() << "\n";
}

void emit_csv(const Global& g, const std::string& name, const std::string& body) { emit(g, name, with_meta(g, body)); }

void emit_json(const Global& g, const std::string& name, json j) {
  if (!g.no_meta) j["meta"] = {{"generated", utc_now()}, {"command", g.command_line}};
  emit(g, name, j.dump(2) + "\n");
}

std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error("io-error", "cannot read " + path);
  std::ostringstream os;
  os << f.rdbuf();
  return os.str();
}

std::string num(double v) { return csv_number(v); }

WeightSequence load_sequence(const std::string& spec, std::size_t P) {
  auto colon = spec.find(':');
  std::string head = spec.substr(0, colon), arg = colon == std::string::npos ? "" : spec.substr(colon + 1);
  if (head == "gevrey") return gevrey(arg.empty() ? 1.0 : std::stod(arg), P);
  if (head == "pathological")
    return pathological_source(arg.empty() ? std::exp(1.0) : std::stod(arg))->materialize(P);
  if (fs::exists(spec)) {
    std::string text = read_file(spec);
    if (fs::path(spec).extension() == ".csv") return WeightSequence::from_csv(text, fs::path(spec).stem().string());
    return WeightSequence::from_json(json::parse(text));
  }
  throw Error("bad-spec", "unknown sequence spec " + spec);
}

SourcePtr load_source(const std::string& spec, std::size_t P) {
  auto colon = spec.find(':');
  std::string head = spec.substr(0, colon), arg = colon == std::string::npos ? "" : spec.substr(colon + 1);
  if (head == "gevrey") return gevrey_source(arg.empty() ? 1.0 : std::stod(arg));
  if (head == "pathological") return pathological_source(arg.empty() ? std::exp(1.0) : std::stod(arg));
  return table_source(load_sequence(spec, P));
}

std::vector<double> parse_list(const std::string& s) {
  std::vector<double> v;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) v.push_back(std::stod(item));
  return v;
}

// ---- seq ----

struct SeqArgs {
  std::string sequence;
  double gevrey_s = 0;
  bool pathological = false, predicates = false, minorant = false;
  std::string relation;
};

int cmd_seq(const Global& g, const SeqArgs& a) {
  WeightSequence M = a.gevrey_s > 0     ? gevrey(a.gevrey_s, g.horizon)
                     : a.pathological   ? pathological_source()->materialize(g.horizon)
                     : !a.sequence.empty() ? load_sequence(a.sequence, g.horizon)
                                          : throw Error("bad-spec", "give --gevrey, --pathological or --sequence");
  if (a.minorant) M = log_convex_minorant(M);
  auto mu = quotients(M).log_mu;
  std::ostringstream csv;
  csv << "p,log_M,log_mu\n";
  for (std::size_t p = 0; p <= M.horizon(); ++p) csv << p << "," << num(M.log_term(p)) << "," << num(mu[p]) << "\n";
  if (!g.out.empty() || (!a.predicates && a.relation.empty())) emit_csv(g, "sequence.csv", csv.str());

  json report = {{"label", M.label()}, {"horizon", M.horizon()}};
  if (a.predicates) {
    json preds = json::object();
    for (std::string id : {"lc", "slc", "mg", "gamma1", "beta1", "beta2"}) {
      try {
        auto r = predicate(M, id);
        preds[id] = r.to_json();
        std::cout << id << ": " << to_string(r.verdict);
        if (r.index) std::cout << " (index " << *r.index << ")";
        if (id != "lc" && id != "slc") std::cout << " value " << r.value;
        std::cout << "\n";
      } catch (const Error& e) {
        preds[id] = {{"error", e.what()}};
        std::cout << id << ": " << e.what() << "\n";
      }
    }
    report["predicates"] = preds;
  }
  if (!a.relation.empty()) {
    auto N = load_sequence(a.relation, M.horizon());
    auto r = relation(M, N);
    std::cout << "relation(" << M.label() << ", " << N.label() << "): " << r.headline << "\n";
    report["relation"] = r.to_json();
  }
  if (!g.out.empty()) emit_json(g, "sequence.json", report);
  return 0;
}

// ---- weight ----

struct WeightArgs {
  double t_min = 1e-2, t_max = 1e6;
  std::size_t points = 200;
  bool diagnostics = false;
};

int cmd_weight(const Global& g, const WeightArgs& a) {
  auto w = WeightFunction::parse(g.weight);
  std::ostringstream csv;
  csv << "t,omega\n";
  for (double t : log_grid(a.t_min, a.t_max, a.points)) csv << num(t) << "," << num(w(t)) << "\n";
  emit_csv(g, "weight.csv", csv.str());
  if (a.diagnostics) {
    auto d = diagnostics(w);
    json j = d.to_json();
    j["weight"] = w.to_json();
    if (g.out.empty()) {
      for (auto& [k, v] : j.items())
        if (v.is_object() && v.contains("holds")) std::cerr << k << ": " << (v["holds"].get<bool>() ? "holds" : "fails") << "\n";
    } else {
      emit_json(g, "diagnostics.json", j);
    }
  }
  return 0;
}

// ---- conj ----

struct ConjArgs {
  double lo = 1e-3, hi = 1e3;
  std::size_t points = 100;
  bool numeric = false;
};

int cmd_conj(const Global& g, const ConjArgs& a) {
  auto w = WeightFunction::parse(g.weight);
  auto mode = a.numeric ? ConjMode::Numeric : ConjMode::Auto;
  auto star = upper_star_of(w);
  std::ostringstream c1, c2;
  c1 << "s,phi_star,omega_star\n";
  for (double s : log_grid(a.lo, a.hi, a.points)) {
    std::string ps, us;
    try {
      ps = num(phi_star(w, s, mode));
    } catch (const Error&) {
      ps = "nan";
    }
    try {
      us = num(upper_star(w, s, mode));
    } catch (const Error&) {
      us = "nan";
    }
    c1 << num(s) << "," << ps << "," << us << "\n";
  }
  // Duality residual of the biconjugate; zero for concave weights.
  c2 << "t,omega,biconjugate,residual\n";
  for (double t : log_grid(1.0, a.hi, a.points)) {
    double v = w(t), b = lower_star(star, t);
    c2 << num(t) << "," << num(v) << "," << num(b) << "," << num(b - v) << "\n";
  }
  if (g.out.empty()) {
    std::cout << c1.str() << "\n" << c2.str();
  } else {
    emit_csv(g, "conjugates.csv", c1.str());
    emit_csv(g, "duality.csv", c2.str());
  }
  return 0;
}

// ---- matrix ----

struct MatrixArgs {
  std::string levels = "0.5,1,2";
  std::size_t j_max = 60;
  double h = std::exp(1.0);
  std::string against;
};

int cmd_matrix(const Global& g, const MatrixArgs& a) {
  auto w = WeightFunction::parse(g.weight);
  WeightMatrix W(w, default_index_grid(), g.horizon);
  std::ostringstream csv;
  csv << "x,p,log_W\n";
  json report = {{"weight", w.to_json()}, {"horizon", g.horizon}};
  json checks = json::array();
  int failures = 0;
  for (double x : parse_list(a.levels)) {
    auto L = W.level(x);
    for (std::size_t p = 0; p <= L.horizon(); ++p) csv << num(x) << "," << p << "," << num(L.log_term(p)) << "\n";
    auto mg = check_mg_across_levels(W, x, a.j_max);
    failures += !mg.passed;
    checks.push_back(mg.to_json());
    std::cout << "mg-across-levels l=" << x << ": " << (mg.passed ? "pass" : "FAIL") << "\n";
    try {
      auto ab = check_absorption(W, a.h, x);
      checks.push_back(ab.to_json());
      std::cout << "absorption h=" << a.h << " l=" << x << ": D=" << ab.constants.value("D", 0.0)
                << (ab.stable ? " stable" : " unstable") << "\n";
    } catch (const Error& e) {
      std::cout << "absorption l=" << x << ": " << e.what() << "\n";
    }
  }
  report["checks"] = checks;
  if (!a.against.empty()) {
    WeightMatrix B(WeightFunction::parse(a.against), default_index_grid(), g.horizon);
    auto eq = matrix_equivalence(W, B);
    std::cout << "equivalence: " << eq.verdict << "\n";
    report["equivalence"] = eq.to_json();
  }
  if (!g.out.empty()) {
    emit_csv(g, "matrix.csv", csv.str());
    emit_json(g, "matrix.json", report);
  }
  return failures ? 1 : 0;
}

// ---- index ----

struct IndexArgs {
  std::string sequence;
  bool identities = false;
};

int cmd_index(const Global& g, const IndexArgs& a) {
  json report;
  if (!a.sequence.empty()) {
    auto M = load_sequence(a.sequence, g.horizon);
    auto e = gamma_seq(M);
    std::cout << "gamma(M) = " << e.value << " (stability " << e.stability << ")\n";
    report["gamma_seq"] = e.to_json();
    auto src = load_source(a.sequence, g.horizon);
    auto ef = gamma_fn(from_sequence(src));
    std::cout << "gamma(omega_M) = " << ef.value << " (stability " << ef.stability << ")\n";
    report["gamma_fn"] = ef.to_json();
    if (a.identities) {
      // closed form for gevrey, otherwise a long table so gamma_fn can reach its grid
      SourcePtr m_src;
      if (a.sequence.rfind("gevrey:", 0) == 0 && std::stod(a.sequence.substr(7)) > 1)
        m_src = gevrey_source(std::stod(a.sequence.substr(7)) - 1);
      else
        m_src = table_source(divide_by_factorials(src->materialize(std::size_t(std::min<std::int64_t>(src->horizon(), 1 << 16)))));
      auto rep = check_index_identities(M, m_src, src);
      report["identities"] = rep.to_json();
      for (auto& r : rep.rows) std::cout << r.id << ": " << (r.agrees ? "agrees" : "differs") << "\n";
    }
  } else {
    auto w = WeightFunction::parse(g.weight);
    auto e = gamma_fn(w);
    std::cout << "gamma(omega) = " << (std::isinf(e.value) ? std::string("+inf") : std::to_string(e.value))
              << " (stability " << e.stability << ")\n";
    report["gamma_fn"] = e.to_json();
    if (a.identities) {
      auto rep = check_index_identities(w);
      report["identities"] = rep.to_json();
      for (auto& r : rep.rows) std::cout << r.id << ": " << (r.agrees ? "agrees" : "differs") << "\n";
    }
  }
  if (!g.out.empty()) emit_json(g, "index.json", report);
  return 0;
}

// ---- flat ----

struct FlatArgs {
  std::string tau;
  double gamma = 1.0, a = 1.0;
  std::size_t rays = 5, radii = 60;
  bool fit = false;
};

int cmd_flat(const Global& g, const FlatArgs& a) {
  auto tau = WeightFunction::parse(a.tau.empty() ? g.weight : a.tau);
  auto m = build_model(tau, a.gamma, a.a);
  std::ostringstream csv;
  csv << "ray,theta,r,log_abs_G\n";
  auto radii = log_grid(1e-3, 1e3, a.radii);
  for (std::size_t k = 0; k < a.rays; ++k) {
    double th = a.rays == 1 ? 0.0 : (-1.0 + 2.0 * double(k) / double(a.rays - 1)) * 0.99 * a.gamma * kPi / 2;
    for (double r : radii) csv << k << "," << num(th) << "," << num(r) << "," << num(m.log_abs_G({r, th})) << "\n";
  }
  emit_csv(g, "flat.csv", csv.str());
  json report = m.to_json();
  if (a.fit) {
    SandwichOptions so;
    so.rays = a.rays;
    so.radii = a.radii;
    auto sw = verify_flat_sandwich(m, so);
    report["sandwich"] = sw.fit.to_json();
    std::cerr << "sandwich: K1=" << sw.K1 << " K2=" << sw.K2 << " K3=" << sw.K3 << (sw.fit.stable ? " stable" : " unstable")
              << "\n";
    if (sw.fit.stable) {
      auto ms = verify_moment_sandwich(m, sw.K2, sw.K3);
      report["moment_sandwich"] = ms.to_json();
      std::cerr << "moment sandwich: " << (ms.stable ? "stable" : "unstable") << "\n";
    }
  }
  if (!g.out.empty()) emit_json(g, "flat.json", report);
  return 0;
}

// ---- extend ----

int cmd_extend(Global g, const std::string& job_path) {
  json job = json::parse(read_file(job_path));
  if (job.contains("version") && job.at("version").get<int>() != 1) throw Error("bad-spec", "unsupported job version");
  auto tau = job.contains("weight")
                 ? (job.at("weight").is_string() ? WeightFunction::parse(job.at("weight").get<std::string>())
                                                 : WeightFunction::from_json(job.at("weight")))
                 : WeightFunction::parse(g.weight);
  double x = job.value("x", 1.0), h = job.value("h", 1.0), gamma = job.value("gamma", 0.5);
  ExtensionOptions opt;
  opt.precision = job.value("precision", g.precision);
  std::uint64_t seed = job.value("seed", g.seed);
  WeightMatrix T(tau, default_index_grid(), g.horizon);
  TargetSequence target;
  const json& src = job.contains("lambda") ? job.at("lambda") : json("boundary");
  if (src.is_string()) {
    target = named_target(src.get<std::string>(), T, x, h, opt.p_max, seed);
  } else if (src.contains("family")) {
    target = named_target(src.at("family").get<std::string>(), T, x, h, opt.p_max, seed);
  } else if (src.contains("file")) {
    fs::path p = src.at("file").get<std::string>();
    if (p.is_relative()) p = fs::path(job_path).parent_path() / p;
    target = TargetSequence::from_json(json::parse(read_file(p.string())));
    target.x = x;
    target.h = h;
    validate_class(target, T);
  } else {
    throw Error("bad-spec", "lambda must name a family or a file");
  }
  auto model = build_extension(target, tau, gamma, opt);
  if (g.out.empty()) g.out = job.value("out", std::string("extension"));

  std::ostringstream csv;
  csv << "ray,theta,r,re_f,im_f\n";
  auto radii = log_grid(1e-3, 1.0, 40);
  const std::size_t rays = 5;
  for (std::size_t k = 0; k < rays; ++k) {
    double th = (-1.0 + 2.0 * double(k) / double(rays - 1)) * 0.9 * gamma * kPi / 2;
    auto f = model.eval_ray(th, radii);
    for (std::size_t i = 0; i < radii.size(); ++i)
      csv << k << "," << num(th) << "," << num(radii[i]) << "," << num(f[i].real()) << "," << num(f[i].imag()) << "\n";
  }
  emit_csv(g, "interpolant.csv", csv.str());
  auto rem = remainder_check(model);
  json rj = rem.to_json();
  rj["model"] = model.to_json();
  emit_json(g, "remainder.json", rj);
  auto borel = borel_check(model);
  emit_json(g, "borel.json", borel.to_json());
  std::cout << "remainder: " << (rem.stable ? "stable" : "unstable") << " C=" << rem.constants.value("C", 0.0)
            << " k=" << rem.constants.value("k", 0.0) << "\n"
            << "borel: " << (borel.passed ? "pass" : "fail") << "\n";
  return borel.passed ? 0 : 1;
}

// ---- verify ----

struct VerifyArgs {
  bool all = false;
  std::vector<std::string> ids;
  std::string config, tau, sequence;
  bool list = false;
};

int cmd_verify(Global g, const VerifyArgs& a, bool weight_given) {
  const auto& reg = default_registry();
  if (a.list) {
    for (auto& e : reg.entries()) std::cout << e.id << " [" << to_string(e.strategy) << "] " << e.anchor << "\n";
    return 0;
  }
  CheckContext ctx = a.config.empty() ? CheckContext{} : CheckContext::from_json(json::parse(read_file(a.config)));
  if (weight_given) ctx.omega = WeightFunction::parse(g.weight);
  if (!a.tau.empty()) ctx.tau = WeightFunction::parse(a.tau);
  if (!a.sequence.empty()) ctx.sequence = load_source(a.sequence, g.horizon);
  ctx.precision = g.precision;
  ctx.seed = g.seed;
  ctx.horizon = g.horizon;
  ctx.tol = g.tol;
  if (!a.all && a.ids.empty()) throw Error("bad-spec", "give --all or --check <id>");
  auto rep = a.all ? reg.run_all(ctx) : reg.run(a.ids, ctx);
  if (g.out.empty()) g.out = "report";
  rep.write_bundle(g.out, ctx, !g.no_meta);
  for (auto& r : rep.results) {
    std::cout << (r.passed ? "PASS " : (r.hard_failure() ? "FAIL " : "SOFT ")) << r.id;
    if (r.strategy == Strategy::Fitted) std::cout << (r.stable ? " (stable)" : " (unstable)");
    if (!r.error.empty()) std::cout << " error: " << r.error;
    std::cout << "\n";
  }
  std::cout << "report written to " << g.out << "\n";
  return rep.exact_ok() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Weight sequences, weight functions, flat kernels and Borel extension checks"};
  app.require_subcommand(1);
  app.fallthrough();
  Global g;
  for (int i = 1; i < argc; ++i) g.command_line += (i > 1 ? " " : "") + std::string(argv[i]);

  auto* weight_opt = app.add_option("--weight", g.weight, "Weight spec: power:a, logpower:s, gevrey:s, pathological, JSON or file");
  app.add_option("--horizon", g.horizon, "Sequence horizon P")->check(CLI::Range(2, 1 << 24));
  app.add_option("--precision", g.precision, "Working precision in bits (53 or up to 113)");
  app.add_option("--seed", g.seed, "Random seed");
  app.add_option("--out", g.out, "Output directory");
  app.add_option("--tol", g.tol, "Log slack for exact checks");
  app.add_flag("--no-meta", g.no_meta, "Omit timestamps and command lines from outputs");

  SeqArgs sa;
  auto* seq = app.add_subcommand("seq", "Build and inspect weight sequences");
  seq->add_option("--gevrey", sa.gevrey_s, "Gevrey order s");
  seq->add_flag("--pathological", sa.pathological, "The pathological sequence");
  seq->add_option("--sequence", sa.sequence, "gevrey:s, pathological[:q] or a JSON/CSV file");
  seq->add_flag("--predicates", sa.predicates, "Print lc/slc/mg/gamma1/beta verdicts");
  seq->add_flag("--minorant", sa.minorant, "Replace by the log-convex minorant");
  seq->add_option("--relation", sa.relation, "Compare with another sequence");

  WeightArgs wa;
  auto* weight = app.add_subcommand("weight", "Evaluate and diagnose a weight function");
  weight->add_option("--t-min", wa.t_min);
  weight->add_option("--t-max", wa.t_max);
  weight->add_option("--points", wa.points);
  weight->add_flag("--diagnostics", wa.diagnostics, "Report (omega_1)..(omega_6) and (omega_snq)");

  ConjArgs ca;
  auto* conj = app.add_subcommand("conj", "Young and Legendre conjugates with duality residuals");
  conj->add_option("--lo", ca.lo);
  conj->add_option("--hi", ca.hi);
  conj->add_option("--points", ca.points);
  conj->add_flag("--numeric", ca.numeric, "Ignore closed forms");

  MatrixArgs ma;
  auto* matrix = app.add_subcommand("matrix", "Materialize the weight matrix and run level checks");
  matrix->add_option("--levels", ma.levels, "Comma-separated levels");
  matrix->add_option("--jmax", ma.j_max);
  matrix->add_option("--absorb-h", ma.h, "Absorption factor h");
  matrix->add_option("--against", ma.against, "Second weight for matrix equivalence");

  IndexArgs ia;
  auto* index = app.add_subcommand("index", "Estimate growth indices");
  index->add_option("--sequence", ia.sequence, "Estimate gamma(M) for this sequence instead of gamma(omega)");
  index->add_flag("--identities", ia.identities, "Run the index identity checks");

  FlatArgs fa;
  auto* flat = app.add_subcommand("flat", "Build the flat function model and sample it along rays");
  flat->add_option("--tau", fa.tau, "Weight (defaults to --weight)");
  flat->add_option("--gamma", fa.gamma);
  flat->add_option("--a", fa.a);
  flat->add_option("--rays", fa.rays);
  flat->add_option("--radii", fa.radii);
  flat->add_flag("--fit", fa.fit, "Fit the sandwich and moment constants");

  std::string job;
  auto* extend = app.add_subcommand("extend", "Build an extension from a job file");
  extend->add_option("--job", job, "Job JSON")->required();

  VerifyArgs va;
  auto* verify = app.add_subcommand("verify", "Run the checks registry");
  verify->add_flag("--all", va.all);
  verify->add_option("--check", va.ids, "Registry id (repeatable)");
  verify->add_option("--config", va.config, "Context JSON");
  verify->add_option("--tau", va.tau, "Weight for the kernel and extension checks");
  verify->add_option("--sequence", va.sequence, "Sequence for the sequence checks");
  verify->add_flag("--list", va.list, "List registry entries");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*seq) return cmd_seq(g, sa);
    if (*weight) return cmd_weight(g, wa);
    if (*conj) return cmd_conj(g, ca);
    if (*matrix) return cmd_matrix(g, ma);
    if (*index) return cmd_index(g, ia);
    if (*flat) return cmd_flat(g, fa);
    if (*extend) return cmd_extend(g, job);
    if (*verify) return cmd_verify(g, va, weight_opt->count() > 0);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
