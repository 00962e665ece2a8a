#include "secantlab/runner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>

#include "secantlab/geometry.hpp"
#include "secantlab/hierarchy.hpp"
#include "secantlab/kummer.hpp"
#include "secantlab/series.hpp"

namespace secantlab {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

const std::set<std::string> kCommands = {
    "theta-eval",    "addition-check",  "secant-check",
    "secant-search", "hierarchy-run",   "restriction-check"};

cplx parse_complex(const json& node, const std::string& field) {
  if (!node.is_array() || node.size() != 2 || !node[0].is_number() ||
      !node[1].is_number())
    throw Error(ErrorCode::ParseError,
                field + " must be a two-element [re, im] array");
  return cplx(node[0].get<double>(), node[1].get<double>());
}

Eigen::VectorXcd parse_cvector(const json& node, int g,
                               const std::string& field) {
  if (!node.is_array() || static_cast<int>(node.size()) != g)
    throw Error(ErrorCode::ParseError,
                field + " must be an array of " + std::to_string(g) +
                    " [re, im] entries");
  Eigen::VectorXcd v(g);
  for (int i = 0; i < g; ++i)
    v[i] = parse_complex(node[i], field + "[" + std::to_string(i) + "]");
  return v;
}

std::vector<Eigen::VectorXcd> parse_cvector_list(const json& node, int g,
                                                 const std::string& field) {
  if (!node.is_array())
    throw Error(ErrorCode::ParseError, field + " must be an array of points");
  std::vector<Eigen::VectorXcd> out;
  for (std::size_t i = 0; i < node.size(); ++i)
    out.push_back(
        parse_cvector(node[i], g, field + "[" + std::to_string(i) + "]"));
  return out;
}

ordered_json emit_complex(cplx v) {
  return ordered_json::array({v.real(), v.imag()});
}

ordered_json emit_cvector(const Eigen::VectorXcd& v) {
  ordered_json arr = ordered_json::array();
  for (int i = 0; i < v.size(); ++i) arr.push_back(emit_complex(v[i]));
  return arr;
}

double get_tol(const json& extra, const std::string& key, double fallback) {
  if (!extra.contains(key)) return fallback;
  if (!extra[key].is_number())
    throw Error(ErrorCode::ParseError, key + " must be a number");
  double v = extra[key].get<double>();
  if (!(v > 0))
    throw Error(ErrorCode::ValidationError, key + " must be positive");
  return v;
}

int get_int(const json& extra, const std::string& key, int fallback) {
  if (!extra.contains(key)) return fallback;
  if (!extra[key].is_number_integer())
    throw Error(ErrorCode::ParseError, key + " must be an integer");
  return extra[key].get<int>();
}

std::uint64_t require_seed(const json& extra) {
  if (!extra.contains("seed"))
    throw Error(ErrorCode::ValidationError,
                "seed is required whenever randomness is used");
  if (!extra["seed"].is_number_integer())
    throw Error(ErrorCode::ParseError, "seed must be an integer");
  return extra["seed"].get<std::uint64_t>();
}

TruncationPolicy policy_from(const json& extra) {
  TruncationPolicy policy;
  policy.tol = get_tol(extra, "theta_tol", 1e-12);
  policy.max_radius = get_tol(extra, "max_radius", 24.0);
  policy.validate();
  return policy;
}

// Canonical echo: command, genus, omega first, every other key sorted.
ordered_json canonical_echo(const RunConfig& config) {
  ordered_json echo;
  echo["command"] = config.command;
  echo["genus"] = config.genus;
  ordered_json omega = ordered_json::array();
  for (int i = 0; i < config.genus; ++i) {
    ordered_json row = ordered_json::array();
    for (int j = 0; j < config.genus; ++j)
      row.push_back(emit_complex(config.omega(i, j)));
    omega.push_back(row);
  }
  echo["omega"] = omega;
  std::vector<std::string> keys;
  for (auto it = config.extra.begin(); it != config.extra.end(); ++it)
    keys.push_back(it.key());
  std::sort(keys.begin(), keys.end());
  for (const auto& k : keys) echo[k] = config.extra.at(k);
  return echo;
}

void write_json(std::string& out, const ordered_json& node) {
  switch (node.type()) {
    case ordered_json::value_t::object: {
      out += '{';
      bool first = true;
      for (auto it = node.begin(); it != node.end(); ++it) {
        if (!first) out += ',';
        first = false;
        out += ordered_json(it.key()).dump();
        out += ':';
        write_json(out, it.value());
      }
      out += '}';
      break;
    }
    case ordered_json::value_t::array: {
      out += '[';
      for (std::size_t i = 0; i < node.size(); ++i) {
        if (i) out += ',';
        write_json(out, node[i]);
      }
      out += ']';
      break;
    }
    case ordered_json::value_t::number_float: {
      char buf[40];
      std::snprintf(buf, sizeof(buf), "%.17g", node.get<double>());
      out += buf;
      break;
    }
    default:
      out += node.dump();
  }
}

struct WorkflowContext {
  const RunConfig& config;
  TruncationPolicy policy;
  ordered_json payload;
  std::string status = "success";
};

void run_theta_eval(WorkflowContext& wf) {
  const auto& extra = wf.config.extra;
  if (!extra.contains("z"))
    throw Error(ErrorCode::ParseError, "theta-eval requires z");
  Eigen::VectorXcd z = parse_cvector(extra["z"], wf.config.genus, "z");
  ThetaCharacteristic chr = ThetaCharacteristic::zero(wf.config.genus);
  if (extra.contains("char_a"))
    for (int i = 0; i < wf.config.genus; ++i)
      chr.a[i] = extra["char_a"].at(i).get<double>();
  if (extra.contains("char_b"))
    for (int i = 0; i < wf.config.genus; ++i)
      chr.b[i] = extra["char_b"].at(i).get<double>();
  ThetaEngine engine(wf.config.siegel);
  cplx value = engine.theta(chr, z, wf.policy);
  wf.payload["value"] = emit_complex(value);
  wf.payload["radius"] =
      engine.truncation_radius(wf.policy, 0, z.imag().norm());
}

void run_addition_check(WorkflowContext& wf) {
  const auto& extra = wf.config.extra;
  std::uint64_t seed = require_seed(extra);
  int pairs = get_int(extra, "pairs", 100);
  double threshold = get_tol(extra, "threshold", 1e-9);
  KummerContext ctx(wf.config.siegel);
  Rng rng(seed);
  const int g = wf.config.genus;
  std::vector<Eigen::VectorXcd> zs, ws;
  for (int i = 0; i < pairs; ++i) {
    Eigen::VectorXd pz(g), qz(g), pw(g), qw(g);
    for (int k = 0; k < g; ++k) {
      pz[k] = rng.uniform();
      qz[k] = rng.uniform(-0.25, 0.25);
      pw[k] = rng.uniform();
      qw[k] = rng.uniform(-0.25, 0.25);
    }
    zs.push_back(pz.cast<cplx>() + wf.config.omega * qz.cast<cplx>());
    ws.push_back(pw.cast<cplx>() + wf.config.omega * qw.cast<cplx>());
  }
  std::vector<double> residuals(pairs, 0.0);
  parallel_for(pairs, [&](std::size_t i) {
    residuals[i] = ctx.addition_formula_residual(zs[i], ws[i], wf.policy);
  });
  double mx = *std::max_element(residuals.begin(), residuals.end());
  wf.payload["pairs"] = pairs;
  wf.payload["threshold"] = threshold;
  wf.payload["max_residual"] = mx;
  wf.status = mx <= threshold ? "success" : "failed";
}

ordered_json emit_secant_report(const SecantReport& rep) {
  ordered_json out;
  out["matrix_rows"] = rep.matrix_rows;
  ordered_json sv = ordered_json::array();
  for (double s : rep.singular_values) sv.push_back(s);
  out["singular_values"] = sv;
  out["rank_estimate"] = rep.rank_estimate;
  out["is_secant"] = rep.is_secant;
  out["gap_ratio"] = rep.gap_ratio;
  return out;
}

void run_secant_check(WorkflowContext& wf) {
  const auto& extra = wf.config.extra;
  const int g = wf.config.genus;
  double tol_rank = get_tol(extra, "tol_rank", 1e-7);
  KummerContext ctx(wf.config.siegel);
  std::string mode =
      extra.contains("mode") ? extra["mode"].get<std::string>() : "honest";
  SecantReport rep;
  if (mode == "honest") {
    if (!extra.contains("points"))
      throw Error(ErrorCode::ParseError, "secant-check requires points");
    auto pts = parse_cvector_list(extra["points"], g, "points");
    SecantConfig config = center_config(pts, &ctx.engine());
    Eigen::VectorXcd zeta = Eigen::VectorXcd::Zero(g);
    if (extra.contains("zeta")) zeta = parse_cvector(extra["zeta"], g, "zeta");
    rep = ctx.honest_secant_test(config, zeta, tol_rank, wf.policy);
    wf.payload["m"] = config.m;
  } else if (mode == "degenerate") {
    for (const char* key : {"u", "d1", "b"})
      if (!extra.contains(key))
        throw Error(ErrorCode::ParseError,
                    std::string("degenerate secant-check requires ") + key);
    Eigen::VectorXcd u = parse_cvector(extra["u"], g, "u");
    Eigen::VectorXcd d1 = parse_cvector(extra["d1"], g, "d1");
    auto b = parse_cvector_list(extra["b"], g, "b");
    rep = ctx.degenerate_secant_test(u, d1, b, tol_rank, wf.policy);
    wf.payload["m"] = static_cast<int>(b.size());
  } else {
    throw Error(ErrorCode::ParseError, "mode must be honest or degenerate");
  }
  wf.payload["mode"] = mode;
  wf.payload["tol_rank"] = tol_rank;
  wf.payload["report"] = emit_secant_report(rep);
}

ordered_json emit_search_result(const SecantSearchResult& res) {
  ordered_json out;
  out["success"] = res.success;
  out["u"] = emit_cvector(res.config.centered_u);
  ordered_json b = ordered_json::array();
  for (const auto& bj : res.config.centered_b) b.push_back(emit_cvector(bj));
  out["b"] = b;
  out["d1"] = emit_cvector(res.d1);
  out["d1_scale"] = res.d1_scale;
  out["alpha1_1"] = emit_complex(res.alpha1_1);
  ordered_json aj = ordered_json::array();
  for (const auto& a : res.alpha_j_1) aj.push_back(emit_complex(a));
  out["alpha_j_1"] = aj;
  out["final_residual"] = res.final_residual;
  out["iterations"] = res.iterations;
  out["seed"] = res.seed;
  return out;
}

SecantSearchResult search_from_config(const WorkflowContext& wf,
                                      const KummerContext& ctx) {
  const auto& extra = wf.config.extra;
  std::uint64_t seed = require_seed(extra);
  int m = get_int(extra, "m", 1);
  double tol_search = get_tol(extra, "tol_search", 1e-8);
  int max_iters = get_int(extra, "max_iters", 200);
  return find_degenerate_secant(ctx, m, seed, tol_search, max_iters,
                                wf.policy);
}

void run_secant_search(WorkflowContext& wf) {
  KummerContext ctx(wf.config.siegel);
  SecantSearchResult res = search_from_config(wf, ctx);
  wf.payload = emit_search_result(res);
  wf.status = res.success ? "success" : "failed";
}

// Resolves the configuration for hierarchy-run / restriction-check: either
// explicit u, b points or the output of an in-line degenerate-secant search.
SecantConfig resolve_config(WorkflowContext& wf, const KummerContext& ctx) {
  const auto& extra = wf.config.extra;
  const int g = wf.config.genus;
  if (extra.contains("from_search") && extra["from_search"].get<bool>()) {
    SecantSearchResult res = search_from_config(wf, ctx);
    wf.payload["search"] = emit_search_result(res);
    if (!res.success)
      throw Error(ErrorCode::ValidationError,
                  "in-line degenerate secant search failed with residual " +
                      std::to_string(res.final_residual));
    return res.config;
  }
  for (const char* key : {"u", "b"})
    if (!extra.contains(key))
      throw Error(ErrorCode::ParseError,
                  std::string("command requires ") + key + " or from_search");
  Eigen::VectorXcd u = parse_cvector(extra["u"], g, "u");
  auto b = parse_cvector_list(extra["b"], g, "b");
  return config_from_centered(u, b, &ctx.engine());
}

void run_hierarchy_cmd(WorkflowContext& wf) {
  const auto& extra = wf.config.extra;
  KummerContext ctx(wf.config.siegel);
  SecantConfig config = resolve_config(wf, ctx);
  std::uint64_t seed = require_seed(extra);
  int s_max = get_int(extra, "s_max", 4);
  double tol_solve = get_tol(extra, "tol_solve", 1e-8);
  GridSpec grid_spec;
  grid_spec.count = get_int(extra, "grid_size", 0);
  grid_spec.seed = seed;
  HierarchyRun run = run_hierarchy(ctx.engine_ptr(), config, s_max, tol_solve,
                                   grid_spec, wf.policy);
  ordered_json orders = ordered_json::array();
  for (int s = 1; s <= run.state.solved_order(); ++s) {
    ordered_json entry;
    entry["order"] = s;
    entry["residual"] = run.state.residuals[s - 1];
    entry["alpha_1"] = emit_complex(run.state.alphas.get(1, s));
    entry["d"] = emit_cvector(run.state.seq.at(s));
    orders.push_back(entry);
  }
  wf.payload["m"] = config.m;
  wf.payload["s_max"] = s_max;
  wf.payload["tol_solve"] = tol_solve;
  wf.payload["grid_seed"] = seed;
  wf.payload["grid_size"] = static_cast<int>(run.state.grid.points.size());
  wf.payload["solved_orders"] = run.state.solved_order();
  wf.payload["orders"] = orders;
  if (run.first_failed_order > 0) {
    wf.payload["first_failed_order"] = run.first_failed_order;
    wf.payload["failure_status"] = solve_status_name(run.failure_status);
    wf.payload["failure_residual"] = run.failure_residual;
    wf.status = run.state.solved_order() > 0 ? "partial" : "failed";
  }
  if (extra.contains("rt_orders")) {
    Rng rng(seed ^ 0x72cbULL);
    int samples = get_int(extra, "rt_samples", 10);
    ordered_json rt = ordered_json::array();
    for (const auto& node : extra["rt_orders"]) {
      int s = node.get<int>();
      if (s > run.state.solved_order()) continue;
      double wr = 0, wt = 0, wsq = 0;
      for (int i = 0; i < samples; ++i) {
        Eigen::VectorXd p(wf.config.genus), q(wf.config.genus);
        for (int k = 0; k < wf.config.genus; ++k) {
          p[k] = rng.uniform();
          q[k] = rng.uniform(-0.2, 0.2);
        }
        Eigen::VectorXcd z =
            p.cast<cplx>() + wf.config.omega * q.cast<cplx>();
        RtResiduals res = rt_cross_check(run.state, s, z, wf.policy);
        wr = std::max(wr, res.r_residual);
        wt = std::max(wt, res.t_residual);
        wsq = std::max(wsq, res.rsq_residual);
      }
      ordered_json entry;
      entry["order"] = s;
      entry["max_r_residual"] = wr;
      entry["max_t_residual"] = wt;
      entry["max_rsq_residual"] = wsq;
      rt.push_back(entry);
    }
    wf.payload["rt_cross_check"] = rt;
  }
}

void run_restriction_cmd(WorkflowContext& wf) {
  const auto& extra = wf.config.extra;
  KummerContext ctx(wf.config.siegel);
  SecantConfig config = resolve_config(wf, ctx);
  std::uint64_t seed = require_seed(extra);
  std::vector<int> orders;
  if (extra.contains("orders"))
    for (const auto& node : extra["orders"]) orders.push_back(node.get<int>());
  else
    orders = {1, 2};
  int max_order = *std::max_element(orders.begin(), orders.end());
  double tol_solve = get_tol(extra, "tol_solve", 1e-6);
  double tol_intersect = get_tol(extra, "tol_intersect", 1e-9);
  int n_starts = get_int(extra, "n_starts", 48);
  GridSpec grid_spec;
  grid_spec.count = get_int(extra, "grid_size", 0);
  grid_spec.seed = seed;
  HierarchyRun run = run_hierarchy(ctx.engine_ptr(), config, max_order - 1,
                                   tol_solve, grid_spec, wf.policy);
  if (run.first_failed_order > 0)
    throw Error(ErrorCode::ValidationError,
                "hierarchy solve failed at order " +
                    std::to_string(run.first_failed_order));
  DivisorIntersection isect = divisor_intersection_points(
      ctx.engine(), config.centered_u, n_starts, tol_intersect, wf.policy);
  ordered_json pts = ordered_json::array();
  for (const auto& p : isect.points) pts.push_back(emit_cvector(p));
  wf.payload["intersection_points"] = pts;
  wf.payload["point_count"] = static_cast<int>(isect.points.size());
  ordered_json res = ordered_json::array();
  for (int s : orders) {
    ordered_json entry;
    entry["order"] = s;
    entry["residual"] = restriction_check(run.state, s, isect, wf.policy);
    res.push_back(entry);
  }
  wf.payload["restriction_residuals"] = res;
}

}  // namespace

RunConfig parse_config(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::ParseError, e.what());
  }
  if (!doc.is_object())
    throw Error(ErrorCode::ParseError, "config must be a JSON object");
  RunConfig config;
  if (!doc.contains("command") || !doc["command"].is_string())
    throw Error(ErrorCode::ParseError, "command must be a string");
  config.command = doc["command"].get<std::string>();
  if (!kCommands.count(config.command))
    throw Error(ErrorCode::ValidationError,
                "unknown command " + config.command);
  if (!doc.contains("genus") || !doc["genus"].is_number_integer())
    throw Error(ErrorCode::ParseError, "genus must be an integer");
  config.genus = doc["genus"].get<int>();
  if (config.genus < 1 || config.genus > 6)
    throw Error(ErrorCode::ValidationError, "genus must be in 1..6");
  if (!doc.contains("omega") || !doc["omega"].is_array() ||
      static_cast<int>(doc["omega"].size()) != config.genus)
    throw Error(ErrorCode::ParseError,
                "omega must be a genus x genus array of [re, im] pairs");
  config.omega.resize(config.genus, config.genus);
  for (int i = 0; i < config.genus; ++i) {
    const auto& row = doc["omega"][i];
    if (!row.is_array() || static_cast<int>(row.size()) != config.genus)
      throw Error(ErrorCode::ParseError,
                  "omega[" + std::to_string(i) + "] must have genus entries");
    for (int j = 0; j < config.genus; ++j)
      config.omega(i, j) =
          parse_complex(row[j], "omega[" + std::to_string(i) + "][" +
                                    std::to_string(j) + "]");
  }
  try {
    config.siegel = validate_siegel(config.omega);
  } catch (const Error& e) {
    throw Error(ErrorCode::ValidationError, e.what());
  }
  config.extra = doc;
  config.extra.erase("command");
  config.extra.erase("genus");
  config.extra.erase("omega");
  return config;
}

RunReport dispatch(const RunConfig& config, bool verbose) {
  auto started = std::chrono::steady_clock::now();
  WorkflowContext wf{config, policy_from(config.extra), {}, "success"};
  try {
    if (config.command == "theta-eval")
      run_theta_eval(wf);
    else if (config.command == "addition-check")
      run_addition_check(wf);
    else if (config.command == "secant-check")
      run_secant_check(wf);
    else if (config.command == "secant-search")
      run_secant_search(wf);
    else if (config.command == "hierarchy-run")
      run_hierarchy_cmd(wf);
    else if (config.command == "restriction-check")
      run_restriction_cmd(wf);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::ParseError) throw;
    wf.status = "failed";
    wf.payload["error"] = e.what();
  }
  RunReport report;
  report.status = wf.status;
  report.doc["artifact_version"] = kArtifactVersion;
  report.doc["command"] = config.command;
  report.doc["status"] = wf.status;
  report.doc["config_echo"] = canonical_echo(config);
  report.doc["payload"] = wf.payload;
  if (verbose) {
    auto ms = std::chrono::duration<double, std::milli>(
                  std::chrono::steady_clock::now() - started)
                  .count();
    report.doc["timing_ms"] = ms;
  }
  return report;
}

std::string serialize_report(const RunReport& report) {
  std::string out;
  write_json(out, report.doc);
  out += '\n';
  return out;
}

}  // namespace secantlab
