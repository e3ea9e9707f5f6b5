// Command-line front end: solve, analyze, saa and convert.
//
// Every run resolves its settings into one JSON config (defaults, then the
// --config file, then explicit flags). The resolved config is echoed in the
// machine report, and `--config report.json` replays it.

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "stochlp/analysis.hpp"
#include "stochlp/error.hpp"
#include "stochlp/fixtures.hpp"
#include "stochlp/lshaped.hpp"
#include "stochlp/phedging.hpp"
#include "stochlp/sampling.hpp"
#include "stochlp/serialize.hpp"
#include "stochlp/smps.hpp"

using nlohmann::json;
using namespace stochlp;

namespace {

constexpr const char* kReportFormat = "stochlp-report";
constexpr int kReportVersion = 1;

enum Exit { kOk = 0, kFailure = 1, kLimit = 2, kInfeasible = 3 };

[[noreturn]] void config_error(const std::string& field, const std::string& msg) {
  throw Error(ErrorCode::ConfigError, "config field '" + field + "': " + msg);
}

json defaults() {
  return {
      {"input", json::object()},
      {"method", "lshaped"},
      {"cuts", "multi"},
      {"regularization", "none"},
      {"consolidate", false},
      {"gap", nullptr},
      {"max_iterations", nullptr},
      {"penalty", "fixed:1"},
      {"exec", "serial"},
      {"workers", nullptr},
      {"measures", {"ews", "evpi", "eev", "vss"}},
      {"evaluate", nullptr},
      {"sampler", nullptr},
      {"saa",
       {{"confidence", 0.95},
        {"rel_tol", 5e-2},
        {"initial_n", 16},
        {"batches", 10},
        {"eval_samples", 1000},
        {"growth", 2},
        {"max_n", 4096}}},
      {"seed", 1},
      {"out", nullptr},
      {"format", "text"},
  };
}

// --- typed access with field diagnostics -----------------------------------

std::string get_string(const json& c, const std::string& key) {
  const json& v = c.at(key);
  if (!v.is_string()) config_error(key, "expected a string, got " + v.dump());
  return v.get<std::string>();
}

double get_number(const json& c, const std::string& key, const std::string& path) {
  const json& v = c.at(key);
  if (!v.is_number()) config_error(path, "expected a number, got " + v.dump());
  return v.get<double>();
}

std::size_t get_count(const json& c, const std::string& key, const std::string& path) {
  const json& v = c.at(key);
  if (!v.is_number_integer() || v.get<long long>() < 0) config_error(path, "expected a nonnegative integer, got " + v.dump());
  return v.get<std::size_t>();
}

double parse_double(const std::string& text, const std::string& field) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    config_error(field, "'" + text + "' is not a number");
  }
}

// --- policy parsing ----------------------------------------------------------

void apply_cuts(const std::string& text, LShapedConfig& lc) {
  if (text == "single") {
    lc.cut_mode = CutMode::Single;
  } else if (text == "multi") {
    lc.cut_mode = CutMode::Multi;
  } else if (text.rfind("partial:", 0) == 0) {
    const double n = parse_double(text.substr(8), "cuts");
    if (!(n >= 1 && n == std::floor(n))) config_error("cuts", "bundle size must be a positive integer");
    lc.cut_mode = CutMode::Partial;
    lc.bundle_size = static_cast<std::size_t>(n);
  } else {
    config_error("cuts", "expected single, multi or partial:N, got '" + text + "'");
  }
}

Regularization parse_regularization(const std::string& text) {
  if (text == "none") return Regularization::None;
  if (text == "tr") return Regularization::TrustRegion;
  if (text == "rd") return Regularization::RegularizedDecomposition;
  if (text == "level") return Regularization::Level;
  config_error("regularization", "expected none, tr, rd or level, got '" + text + "'");
}

ExecConfig parse_exec(const json& c) {
  ExecConfig ec;
  const std::string text = get_string(c, "exec");
  if (text == "serial") {
    ec.mode = ExecMode::Serial;
  } else if (text == "sync") {
    ec.mode = ExecMode::Sync;
  } else if (text.rfind("async:", 0) == 0) {
    ec.mode = ExecMode::Async;
    ec.kappa = parse_double(text.substr(6), "exec");
  } else {
    config_error("exec", "expected serial, sync or async:KAPPA, got '" + text + "'");
  }
  ec.workers = get_count(c, "workers", "workers");
  if (ec.mode != ExecMode::Serial && ec.workers < 1) config_error("workers", "must be at least 1");
  if (ec.workers < 1) ec.workers = 1;
  try {
    ec.check();
  } catch (const Error& e) {
    config_error("exec", e.what());
  }
  return ec;
}

void apply_penalty(const std::string& text, PhConfig& pc) {
  if (text == "adaptive") {
    pc.adaptive = true;
  } else if (text.rfind("fixed:", 0) == 0) {
    pc.adaptive = false;
    pc.penalty = parse_double(text.substr(6), "penalty");
    if (!(pc.penalty > 0)) config_error("penalty", "fixed penalty must be positive");
  } else {
    config_error("penalty", "expected fixed:R or adaptive, got '" + text + "'");
  }
}

// --- input -------------------------------------------------------------------

TwoStageProblem load_input(const json& c) {
  const json& in = c.at("input");
  if (!in.is_object()) config_error("input", "expected an object");
  const int sources = static_cast<int>(in.contains("fixture")) + static_cast<int>(in.contains("file")) +
                      static_cast<int>(in.contains("smps"));
  if (sources != 1) config_error("input", "give exactly one of --fixture, --input or --smps");
  if (in.contains("fixture")) return fixtures::by_name(get_string(in, "fixture"));
  if (in.contains("file")) return load_problem(get_string(in, "file"));
  const json& s = in.at("smps");
  if (!s.is_array() || s.size() != 3) config_error("input.smps", "expected three paths: CORE TIME STOCH");
  return read_smps_files(s[0].get<std::string>(), s[1].get<std::string>(), s[2].get<std::string>());
}

std::unique_ptr<Sampler> make_sampler(const json& spec, const TwoStageProblem& p) {
  if (spec.is_null()) config_error("sampler", "saa needs --sampler");
  if (spec.is_string()) {
    const std::string name = spec.get<std::string>();
    if (name == "discrete") return std::make_unique<DiscreteSampler>(p.scenarios);
    if (name == "simple-normal") {
      if (p.first_cols() != 2 || p.second_cols() != 2 || p.second_rows() != 2) {
        config_error("sampler", "simple-normal only fits the 2x2 textbook model");
      }
      return std::make_unique<NormalSampler>(textbook_normal_sampler());
    }
    if (name.rfind("fixed:", 0) == 0) {
      const double k = parse_double(name.substr(6), "sampler");
      if (!(k >= 0 && k == std::floor(k) && k < static_cast<double>(p.num_scenarios()))) {
        config_error("sampler", "fixed scenario index out of range");
      }
      Scenario s = p.scenarios[static_cast<std::size_t>(k)];
      s.probability = 1.0;
      return std::make_unique<DiscreteSampler>(std::vector<Scenario>{s});
    }
    config_error("sampler", "expected discrete, fixed:K, simple-normal or a normal sampler object, got '" + name + "'");
  }
  if (!spec.is_object() || spec.value("type", "") != "normal") {
    config_error("sampler", "a sampler object needs \"type\": \"normal\"");
  }
  const std::size_t base = spec.value("base", 0u);
  if (base >= p.num_scenarios()) config_error("sampler.base", "scenario index out of range");
  std::vector<EntryTarget> targets;
  for (const json& t : spec.at("targets")) {
    const std::string kind = t.at("kind").get<std::string>();
    EntryTarget e;
    if (kind == "cost") e.kind = EntryKind::Cost;
    else if (kind == "rhs") e.kind = EntryKind::Rhs;
    else if (kind == "technology") e.kind = EntryKind::Technology;
    else if (kind == "lower") e.kind = EntryKind::Lower;
    else if (kind == "upper") e.kind = EntryKind::Upper;
    else config_error("sampler.targets", "unknown kind '" + kind + "'");
    e.row = t.value("row", 0u);
    e.col = t.value("col", 0u);
    targets.push_back(e);
  }
  return std::make_unique<NormalSampler>(p.scenarios[base], std::move(targets),
                                         spec.at("mean").get<std::vector<double>>(),
                                         spec.at("cov").get<std::vector<std::vector<double>>>());
}

SaaConfig parse_saa(const json& c, const ExecConfig& exec) {
  const json& s = c.at("saa");
  if (!s.is_object()) config_error("saa", "expected an object");
  SaaConfig sc;
  sc.confidence = get_number(s, "confidence", "saa.confidence");
  sc.rel_tol = get_number(s, "rel_tol", "saa.rel_tol");
  sc.initial_n = get_count(s, "initial_n", "saa.initial_n");
  sc.batches = get_count(s, "batches", "saa.batches");
  sc.eval_samples = get_count(s, "eval_samples", "saa.eval_samples");
  sc.growth = get_count(s, "growth", "saa.growth");
  sc.max_n = get_count(s, "max_n", "saa.max_n");
  sc.seed = get_count(c, "seed", "seed");
  sc.exec = exec;
  try {
    sc.check();
  } catch (const Error& e) {
    if (e.code() == ErrorCode::TooFewBatches) throw;
    config_error("saa", e.what());
  }
  return sc;
}

// --- reports -----------------------------------------------------------------

json interval_json(const ConfidenceReport& c) {
  return {{"point", number_to_json(c.point)}, {"lo", number_to_json(c.lo)},   {"hi", number_to_json(c.hi)},
          {"level", c.level},                 {"n", c.n},                    {"batches", c.batches},
          {"relative_error", number_to_json(c.relative_error)}};
}

json report_json(const SolveReport& r) {
  json trace = json::array();
  for (const auto& t : r.trace) {
    trace.push_back({{"iteration", t.iteration},
                     {"lower", number_to_json(t.lower)},
                     {"upper", number_to_json(t.upper)},
                     {"gap", number_to_json(t.gap)},
                     {"cuts_added", t.cuts_added},
                     {"step", t.step},
                     {"radius", t.radius},
                     {"primal_gap", t.primal_gap},
                     {"dual_gap", t.dual_gap},
                     {"penalty", t.penalty},
                     {"objective", number_to_json(t.objective)},
                     {"wall_seconds", t.wall_seconds}});
  }
  json recourse = json::array();
  for (const auto& y : r.recourse) recourse.push_back(vector_to_json(y));
  json out = {{"method", r.method},
              {"status", to_string(r.status)},
              {"objective", number_to_json(r.objective)},
              {"x", vector_to_json(r.x)},
              {"recourse_values", vector_to_json(r.recourse_values)},
              {"recourse", recourse},
              {"lower_bound", number_to_json(r.lower_bound)},
              {"upper_bound", number_to_json(r.upper_bound)},
              {"gap", number_to_json(r.gap)},
              {"iterations", r.iterations},
              {"trace", trace},
              {"wall_seconds", r.wall_seconds},
              {"notes", r.notes}};
  if (r.async.published > 0) {
    json versions = json::array();
    for (const auto& v : r.async.trace) {
      versions.push_back({{"version", v.version}, {"awaited", v.awaited}, {"received", v.received}, {"published_at", v.published_at}});
    }
    out["async"] = {{"published", r.async.published},
                    {"issued", r.async.issued},
                    {"received", r.async.received},
                    {"versions", versions}};
  }
  return out;
}

json measure_json(const MeasureResult& m) {
  json comps = json::object();
  for (const auto& [k, v] : m.components) comps[k] = number_to_json(v);
  json out = {{"measure", m.measure},       {"mode", m.mode},       {"value", number_to_json(m.value)},
              {"raw", number_to_json(m.raw)}, {"clamped", m.clamped}, {"infinite", m.infinite},
              {"components", comps},        {"solver", m.solver},   {"warnings", m.warnings}};
  if (m.interval) out["interval"] = interval_json(*m.interval);
  return out;
}

json saa_json(const SaaResult& r) {
  json rounds = json::array();
  for (const auto& rd : r.rounds) {
    rounds.push_back({{"n", rd.n},
                      {"batch", interval_json(rd.batch)},
                      {"incumbent", interval_json(rd.incumbent)},
                      {"relative_error", number_to_json(rd.relative_error)}});
  }
  return {{"interval", interval_json(r.interval)},
          {"batch", interval_json(r.batch)},
          {"incumbent", interval_json(r.incumbent)},
          {"x", vector_to_json(r.x)},
          {"n", r.n},
          {"budget_exceeded", r.budget_exceeded},
          {"seed", r.seed},
          {"rounds", rounds}};
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(12);
  os << v;
  return os.str();
}

std::string fmt_vec(const std::vector<double>& v) {
  std::string s = "(";
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + fmt(v[i]);
  return s + ")";
}

int status_exit(RunStatus s) {
  switch (s) {
    case RunStatus::Optimal: return kOk;
    case RunStatus::IterationLimit: return kLimit;
    case RunStatus::Infeasible:
    case RunStatus::Unbounded: return kInfeasible;
  }
  return kFailure;
}

int error_exit(ErrorCode c) {
  switch (c) {
    case ErrorCode::BudgetExceeded: return kLimit;
    case ErrorCode::InfeasibleScenario:
    case ErrorCode::MasterInfeasible:
    case ErrorCode::FirstStageInfeasible:
    case ErrorCode::SecondStageInfeasible:
    case ErrorCode::UnboundedSubproblem:
    case ErrorCode::MasterUnbounded: return kInfeasible;
    default: return kFailure;
  }
}

// --- commands ----------------------------------------------------------------

struct Outcome {
  int exit = kOk;
  json body;
  std::string text;
};

Outcome cmd_solve(const json& c) {
  const TwoStageProblem p = load_input(c);
  const std::string method = get_string(c, "method");
  const ExecConfig exec = parse_exec(c);
  Outcome o;
  SolveReport report;
  json extra = json::object();
  if (method == "dep") {
    report = solve_extensive_form(p);
  } else if (method == "lshaped") {
    LShapedConfig lc;
    apply_cuts(get_string(c, "cuts"), lc);
    lc.regularization = parse_regularization(get_string(c, "regularization"));
    if (!c.at("consolidate").is_boolean()) config_error("consolidate", "expected true or false");
    lc.consolidate = c.at("consolidate").get<bool>();
    if (!c.at("gap").is_null()) lc.gap_tolerance = get_number(c, "gap", "gap");
    if (!c.at("max_iterations").is_null()) lc.max_iterations = get_count(c, "max_iterations", "max_iterations");
    lc.exec = exec;
    report = solve_lshaped(p, lc);
  } else if (method == "ph") {
    PhConfig pc;
    apply_penalty(get_string(c, "penalty"), pc);
    if (!c.at("gap").is_null()) pc.primal_tolerance = pc.dual_tolerance = get_number(c, "gap", "gap");
    if (!c.at("max_iterations").is_null()) pc.max_iterations = get_count(c, "max_iterations", "max_iterations");
    pc.exec = exec;
    const PhReport ph = solve_ph(p, pc);
    report = ph;
    extra["ph"] = {{"penalty", ph.state.r},
                   {"primal_gap", ph.state.primal_gap},
                   {"dual_gap", ph.state.dual_gap},
                   {"implementable_value", number_to_json(ph.implementable_value)}};
  } else {
    config_error("method", "expected dep, lshaped or ph, got '" + method + "'");
  }
  o.body = report_json(report);
  o.body.update(extra);
  o.exit = status_exit(report.status);
  std::ostringstream t;
  t << "method:     " << report.method << "\n"
    << "status:     " << to_string(report.status) << "\n"
    << "objective:  " << fmt(report.objective) << "\n"
    << "x:          " << fmt_vec(report.x) << "\n"
    << "iterations: " << report.iterations << "\n";
  if (method != "dep") t << "gap:        " << fmt(report.gap) << "\n";
  for (const auto& n : report.notes) t << "note:       " << n << "\n";
  o.text = t.str();
  return o;
}

std::vector<double> read_decision(const std::string& path) {
  std::ifstream in(path);
  if (!in) config_error("evaluate", "cannot open '" + path + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    config_error("evaluate", std::string("'") + path + "' is not JSON: " + e.what());
  }
  const json* x = &doc;
  if (doc.is_object()) {
    if (!doc.contains("x")) config_error("evaluate", "object in '" + path + "' has no \"x\" field");
    x = &doc.at("x");
  }
  if (!x->is_array()) config_error("evaluate", "expected an array of numbers");
  std::vector<double> out;
  for (const json& v : *x) out.push_back(number_from_json(v, "x"));
  return out;
}

Outcome cmd_analyze(const json& c) {
  const TwoStageProblem p = load_input(c);
  const ExecConfig exec = parse_exec(c);
  std::vector<std::string> wanted;
  for (const json& m : c.at("measures")) {
    const std::string name = m.get<std::string>();
    if (name != "ews" && name != "evpi" && name != "eev" && name != "vss") {
      config_error("measures", "unknown measure '" + name + "' (known: ews, evpi, eev, vss)");
    }
    wanted.push_back(name);
  }
  auto want = [&](const std::string& n) { return std::find(wanted.begin(), wanted.end(), n) != wanted.end(); };
  Outcome o;
  std::ostringstream t;
  json measures = json::array();

  if (!c.at("sampler").is_null()) {
    const SaaConfig sc = parse_saa(c, exec);
    const auto sampler = make_sampler(c.at("sampler"), p);
    const SampledMeasures sm = sampled_measures(p, *sampler, sc);
    measures.push_back(measure_json(sm.vrp));
    if (want("evpi")) measures.push_back(measure_json(sm.evpi));
    if (want("vss")) measures.push_back(measure_json(sm.vss));
    for (const MeasureResult* m : {&sm.vrp, &sm.evpi, &sm.vss}) {
      if (m != &sm.vrp && !want(m->measure)) continue;
      t << m->measure << ": " << fmt(m->value) << "  [" << fmt(m->interval->lo) << ", " << fmt(m->interval->hi)
        << "] at " << m->interval->level << "\n";
      for (const auto& w : m->warnings) t << "warning: " << w << "\n";
    }
    o.body["saa"] = saa_json(sm.saa);
    if (sm.saa.budget_exceeded) o.exit = kLimit;
  } else {
    AnalysisConfig ac;
    ac.exec = exec;
    const MeasureSet m = exact_measures(p, ac);
    t << "vrp: " << fmt(m.vrp.objective) << " (" << m.vrp.method << ")\n";
    MeasureResult vrp;
    vrp.measure = "vrp";
    vrp.value = vrp.raw = m.vrp.objective;
    vrp.solver = m.vrp.method;
    measures.push_back(measure_json(vrp));
    if (want("ews")) {
      MeasureResult e;
      e.measure = "ews";
      e.value = e.raw = m.ews;
      measures.push_back(measure_json(e));
      t << "ews: " << fmt(m.ews) << "\n";
    }
    if (want("eev")) {
      MeasureResult e;
      e.measure = "eev";
      e.value = e.raw = m.eev.value;
      e.infinite = !m.eev.finite;
      e.components = {{"ev_decision_norm", 0.0}};
      e.components.clear();
      measures.push_back(measure_json(e));
      measures.back()["ev_decision"] = vector_to_json(m.ev_decision);
      t << "eev: " << fmt(m.eev.value) << "\n";
    }
    for (const MeasureResult* r : {&m.evpi, &m.vss}) {
      if (!want(r->measure)) continue;
      measures.push_back(measure_json(*r));
      t << r->measure << ": " << fmt(r->value) << (r->clamped ? " (clamped from " + fmt(r->raw) + ")" : "") << "\n";
      for (const auto& w : r->warnings) t << "warning: " << w << "\n";
    }
  }
  o.body["measures"] = measures;

  if (!c.at("evaluate").is_null()) {
    const std::vector<double> x = read_decision(get_string(c, "evaluate"));
    AnalysisConfig ac;
    ac.exec = exec;
    const DecisionValue v = evaluate_decision(p, x, ac);
    json ev = {{"x", vector_to_json(x)},
               {"value", number_to_json(v.value)},
               {"finite", v.finite},
               {"scenario_values", vector_to_json(v.scenario_values)}};
    if (v.infeasible_scenario) ev["infeasible_scenario"] = *v.infeasible_scenario;
    o.body["evaluation"] = ev;
    t << "evaluate " << fmt_vec(x) << ": " << fmt(v.value) << "\n";
  }
  o.text = t.str();
  return o;
}

Outcome cmd_saa(const json& c) {
  const TwoStageProblem p = load_input(c);
  const ExecConfig exec = parse_exec(c);
  const SaaConfig sc = parse_saa(c, exec);
  const auto sampler = make_sampler(c.at("sampler"), p);
  const SaaResult r = saa_solve(p, *sampler, sc);
  Outcome o;
  o.body = saa_json(r);
  o.exit = r.budget_exceeded ? kLimit : kOk;
  std::ostringstream t;
  t << "confidence interval: [" << fmt(r.interval.lo) << ", " << fmt(r.interval.hi) << "] at " << r.interval.level
    << "\n"
    << "point estimate:      " << fmt(r.interval.point) << "\n"
    << "relative error:      " << fmt(r.interval.relative_error) << "\n"
    << "sample size:         " << r.n << "\n"
    << "x:                   " << fmt_vec(r.x) << "\n"
    << "seed:                " << r.seed << "\n";
  if (r.budget_exceeded) t << "warning: sample size budget exhausted before the relative tolerance was met\n";
  o.text = t.str();
  return o;
}

Outcome cmd_convert(const json& c) {
  const TwoStageProblem p = load_input(c);
  if (c.at("out").is_null()) config_error("out", "convert needs --out PATH");
  save_problem(p, get_string(c, "out"));
  Outcome o;
  o.body = {{"first_stage_variables", p.first_cols()},
            {"first_stage_constraints", p.first.A.rows()},
            {"second_stage_variables", p.second_cols()},
            {"second_stage_constraints", p.second_rows()},
            {"scenarios", p.num_scenarios()},
            {"warnings", p.warnings}};
  std::ostringstream t;
  t << "wrote " << get_string(c, "out") << ": " << p.first_cols() << " first-stage variables, " << p.first.A.rows()
    << " first-stage constraints, " << p.second_cols() << " second-stage variables, " << p.second_rows()
    << " second-stage constraints, " << p.num_scenarios() << " scenarios\n";
  o.text = t.str();
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-stage stochastic linear programming"};
  app.require_subcommand(1);

  struct Flags {
    std::string config, input, fixture, method, cuts, regularization, exec, penalty, out, format, evaluate, sampler;
    std::vector<std::string> smps, measures;
    double gap = 0, rel_tol = 0, confidence = 0;
    std::size_t workers = 0, max_iterations = 0, eval_samples = 0, batches = 0, initial_n = 0, max_n = 0;
    std::uint64_t seed = 0;
    bool consolidate = false;
  } f;

  std::map<std::string, CLI::Option*> opts;
  auto common = [&](CLI::App* sub) {
    opts["config"] = sub->add_option("--config", f.config, "JSON config file, or a report whose config to replay");
    opts["input"] = sub->add_option("--input", f.input, "native problem file");
    opts["fixture"] = sub->add_option("--fixture", f.fixture, "built-in problem: simple, farmer, norrc-1");
    opts["smps"] = sub->add_option("--smps", f.smps, "SMPS triplet: CORE TIME STOCH")->expected(3);
    opts["exec"] = sub->add_option("--exec", f.exec, "serial | sync | async:KAPPA");
    opts["workers"] = sub->add_option("--workers", f.workers, "worker threads (overrides STOCHLP_WORKERS)");
    opts["seed"] = sub->add_option("--seed", f.seed, "random seed");
    opts["out"] = sub->add_option("--out", f.out, "write the machine-readable report (or, for convert, the problem) here");
    opts["format"] = sub->add_option("--format", f.format, "stdout format: text | machine");
  };
  auto sampling = [&](CLI::App* sub) {
    opts["sampler"] = sub->add_option("--sampler", f.sampler, "discrete | fixed:K | simple-normal");
    opts["rel_tol"] = sub->add_option("--rel-tol", f.rel_tol, "target relative width of the interval");
    opts["confidence"] = sub->add_option("--confidence", f.confidence, "confidence level");
    opts["batches"] = sub->add_option("--batches", f.batches, "lower-bound batches per round");
    opts["initial_n"] = sub->add_option("--initial-n", f.initial_n, "scenarios per batch in the first round");
    opts["eval_samples"] = sub->add_option("--eval-samples", f.eval_samples, "scenarios used to evaluate the incumbent");
    opts["max_n"] = sub->add_option("--max-n", f.max_n, "largest batch size before giving up");
  };

  CLI::App* solve = app.add_subcommand("solve", "solve a problem");
  common(solve);
  opts["method"] = solve->add_option("--method", f.method, "dep | lshaped | ph");
  opts["cuts"] = solve->add_option("--cuts", f.cuts, "single | multi | partial:N");
  opts["regularization"] = solve->add_option("--regularization", f.regularization, "none | tr | rd | level");
  opts["consolidate"] = solve->add_flag("--consolidate", f.consolidate, "consolidate inactive cuts");
  opts["penalty"] = solve->add_option("--penalty", f.penalty, "fixed:R | adaptive");
  opts["gap"] = solve->add_option("--gap", f.gap, "L-shaped relative gap, or PH primal and dual gap tolerance");
  opts["max_iterations"] = solve->add_option("--max-iterations", f.max_iterations, "iteration limit");

  CLI::App* analyze = app.add_subcommand("analyze", "EWS, EVPI, EEV, VSS and decision evaluation");
  common(analyze);
  sampling(analyze);
  opts["measures"] = analyze->add_option("--measures", f.measures, "subset of ews,evpi,eev,vss")->delimiter(',');
  opts["evaluate"] = analyze->add_option("--evaluate", f.evaluate, "JSON file with a decision x (array or {\"x\": [...]})");

  CLI::App* saa = app.add_subcommand("saa", "sample average approximation with confidence intervals");
  common(saa);
  sampling(saa);

  CLI::App* convert = app.add_subcommand("convert", "convert a problem to the native format");
  common(convert);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kFailure;
  }

  CLI::App* active = app.get_subcommands().front();
  const std::string command = active->get_name();
  auto given = [&](const std::string& key) {
    const auto it = opts.find(key);
    if (it == opts.end()) return false;
    // the same key may be registered on several subcommands; only the active one counts
    for (CLI::Option* o : active->get_options()) {
      if (o->get_name() == it->second->get_name() && o->count() > 0) return true;
    }
    return false;
  };

  json cfg;
  std::string format = "text";
  try {
    cfg = defaults();
    if (given("config")) {
      std::ifstream in(f.config);
      if (!in) config_error("config", "cannot open '" + f.config + "'");
      json doc;
      try {
        doc = json::parse(in);
      } catch (const json::parse_error& e) {
        throw Error(ErrorCode::ConfigError, f.config + ": " + e.what());
      }
      if (doc.contains("format") && doc.at("format") == kReportFormat) doc = doc.at("config");
      if (!doc.is_object()) config_error("config", "expected a JSON object");
      for (const auto& [k, v] : doc.items()) {
        if (k == "command") continue;
        if (!cfg.contains(k)) config_error(k, "unknown field");
        if (k == "saa") {
          for (const auto& [sk, sv] : v.items()) {
            if (!cfg["saa"].contains(sk)) config_error("saa." + sk, "unknown field");
            cfg["saa"][sk] = sv;
          }
        } else {
          cfg[k] = v;
        }
      }
    }
    if (given("input") || given("fixture") || given("smps")) {
      json in = json::object();
      if (given("input")) in["file"] = f.input;
      if (given("fixture")) in["fixture"] = f.fixture;
      if (given("smps")) in["smps"] = f.smps;
      cfg["input"] = in;
    }
    if (given("method")) cfg["method"] = f.method;
    if (given("cuts")) cfg["cuts"] = f.cuts;
    if (given("regularization")) cfg["regularization"] = f.regularization;
    if (given("consolidate")) cfg["consolidate"] = f.consolidate;
    if (given("penalty")) cfg["penalty"] = f.penalty;
    if (given("gap")) cfg["gap"] = f.gap;
    if (given("max_iterations")) cfg["max_iterations"] = f.max_iterations;
    if (given("exec")) cfg["exec"] = f.exec;
    if (given("workers")) {
      cfg["workers"] = f.workers;
    } else if (cfg["workers"].is_null()) {
      cfg["workers"] = workers_from_env(cfg["exec"] == "serial" ? 1 : 4);
    }
    if (given("seed")) cfg["seed"] = f.seed;
    if (given("out")) cfg["out"] = f.out;
    if (given("format")) cfg["format"] = f.format;
    if (given("measures")) cfg["measures"] = f.measures;
    if (given("evaluate")) cfg["evaluate"] = f.evaluate;
    if (given("sampler")) cfg["sampler"] = f.sampler;
    if (given("rel_tol")) cfg["saa"]["rel_tol"] = f.rel_tol;
    if (given("confidence")) cfg["saa"]["confidence"] = f.confidence;
    if (given("batches")) cfg["saa"]["batches"] = f.batches;
    if (given("initial_n")) cfg["saa"]["initial_n"] = f.initial_n;
    if (given("eval_samples")) cfg["saa"]["eval_samples"] = f.eval_samples;
    if (given("max_n")) cfg["saa"]["max_n"] = f.max_n;
    format = get_string(cfg, "format");
    if (format != "text" && format != "machine") config_error("format", "expected text or machine, got '" + format + "'");
    get_count(cfg, "seed", "seed");
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kFailure;
  } catch (const json::exception& e) {
    std::cerr << "error: config: " << e.what() << "\n";
    return kFailure;
  }

  json report = {{"format", kReportFormat}, {"version", kReportVersion}, {"command", command}};
  json echo = cfg;
  echo["command"] = command;
  report["config"] = echo;
  report["seed"] = cfg["seed"];
  int exit_code = kOk;
  std::string text;
  try {
    Outcome o;
    if (command == "solve") o = cmd_solve(cfg);
    else if (command == "analyze") o = cmd_analyze(cfg);
    else if (command == "saa") o = cmd_saa(cfg);
    else o = cmd_convert(cfg);
    report["result"] = o.body;
    exit_code = o.exit;
    text = o.text;
  } catch (const Error& e) {
    exit_code = error_exit(e.code());
    report["error"] = {{"code", to_string(e.code())}, {"message", e.what()}};
    if (e.scenario()) report["error"]["scenario"] = *e.scenario();
    std::cerr << "error: " << e.what() << "\n";
  } catch (const json::exception& e) {
    std::cerr << "error: config: " << e.what() << "\n";
    return kFailure;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kFailure;
  }
  report["exit_code"] = exit_code;

  if (command != "convert" && !cfg["out"].is_null()) {
    std::ofstream out(cfg["out"].get<std::string>());
    if (!out) {
      std::cerr << "error: cannot write '" << cfg["out"].get<std::string>() << "'\n";
      return kFailure;
    }
    out << report.dump(2) << "\n";
  }
  if (format == "machine") {
    std::cout << report.dump(2) << "\n";
  } else {
    std::cout << text;
  }
  return exit_code;
}
