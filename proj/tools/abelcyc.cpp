// abelcyc: analysis CLI for the piecewise-linear Abel equation
//   x' = a(t)|x| + b(t),  a, b degree-1 trigonometric polynomials.
//
// Subcommands:
//   analyze  one equation -> JSON report (cycles, center class, tangency
//            solutions, component count, bound audit)
//   scan     coefficient grid sweep -> CSV, one row per cell
//   curves   sampled h = 0 branch, m = 0 components, tangency points -> CSV
//   bounds   the exact counting bounds -> JSON or CSV
//   oracle   independent brute-force cycle count -> JSON or CSV
//
// Exit codes: 0 ok, 2 invalid input, 3 partial numeric failure (a report is
// still emitted where possible).

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "abelpw/bounds.hpp"
#include "abelpw/centers.hpp"
#include "abelpw/curves.hpp"
#include "abelpw/flow.hpp"
#include "abelpw/oracle.hpp"
#include "abelpw/poincare.hpp"
#include "abelpw/trigpoly.hpp"

namespace {

using json = nlohmann::ordered_json;
using namespace abelpw;

constexpr int kSchemaVersion = 1;

// ---------------------------------------------------------------------------
// formatting

std::string fmt_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string csv_quote(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::string csv_row(const std::vector<std::string>& fields) {
  std::string out;
  for (size_t i = 0; i < fields.size(); ++i) {
    if (i) out += ',';
    out += csv_quote(fields[i]);
  }
  out += "\r\n";
  return out;
}

void write_output(const std::string& path, const std::string& content) {
  if (path.empty() || path == "-") {
    std::cout << content;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw CLI::ValidationError("--out", "cannot open " + path);
  f << content;
}

// ---------------------------------------------------------------------------
// coefficient input

std::vector<double> parse_list(const std::string& s, const char* flag) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      size_t pos = 0;
      out.push_back(std::stod(item, &pos));
      if (pos != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw CLI::ValidationError(flag, "not a number: '" + item + "'");
    }
  }
  return out;
}

struct EqInput {
  AbelEq eq;
  bool b_was_normalized_form = false;  // --b gave a single b0
};

// --a c0,c1,c2 and --b either c0,c1,c2 (raw) or a single b0 (pre-normalized
// form b = sin t + b0 (1 - cos t)).
EqInput make_eq(const std::string& astr, const std::string& bstr) {
  auto ac = parse_list(astr, "--a");
  if (ac.size() != 3) throw CLI::ValidationError("--a", "need c0,c1,c2");
  auto bc = parse_list(bstr, "--b");
  EqInput in;
  in.eq.a = TrigPoly{ac[0], ac[1], ac[2]};
  if (bc.size() == 1) {
    in.eq.b = normalized_b(bc[0]);
    in.b_was_normalized_form = true;
  } else if (bc.size() == 3) {
    in.eq.b = TrigPoly{bc[0], bc[1], bc[2]};
  } else {
    throw CLI::ValidationError("--b", "need c0,c1,c2 or a single b0");
  }
  return in;
}

Tolerances make_tol(const std::string& tolstr) {
  Tolerances tol;
  if (tolstr.empty()) return tol;
  auto v = parse_list(tolstr, "--tol");
  if (v.size() != 2 || v[0] <= 0 || v[1] <= 0)
    throw CLI::ValidationError("--tol", "need REL,ABS positive");
  tol.rel = v[0];
  tol.abs = v[1];
  return tol;
}

// ---------------------------------------------------------------------------
// JSON pieces

json trig_json(const TrigPoly& p) {
  return json{{"c0", p.c0}, {"c1", p.c1}, {"c2", p.c2}};
}

const char* sign_class_name(SignClass s) {
  switch (s) {
    case SignClass::positive: return "positive";
    case SignClass::negative: return "negative";
    default: return "sign_changing";
  }
}

const char* center_kind_name(CenterKind k) {
  switch (k) {
    case CenterKind::global: return "global";
    case CenterKind::linear_positive: return "linear_positive";
    case CenterKind::linear_negative: return "linear_negative";
    default: return "none";
  }
}

json center_json(const CenterClass& cc) {
  return json{{"kind", center_kind_name(cc.kind)},
              {"a0_zero", cc.a0_zero},
              {"proportional", cc.proportional},
              {"proportionality_residual", cc.proportionality_residual},
              {"A_one", cc.A_one},
              {"B_zero", cc.B_zero},
              {"Abar_one", cc.Abar_one},
              {"Bbar_zero", cc.Bbar_zero},
              {"symmetry_residual", cc.symmetry_residual}};
}

json cycles_json(const CycleReport& rep) {
  json out;
  out["kind"] = rep.kind == ReportKind::center ? "center" : "finite";
  out["suspected_center"] = rep.suspected_center;
  json cs = json::array();
  for (const auto& c : rep.cycles) {
    json cj{{"x0", c.x0},
            {"sign_class", sign_class_name(c.sign_class)},
            {"multiplier", c.mult},
            {"hyperbolic", c.hyperbolic}};
    if (c.crossings)
      cj["crossings"] = json{c.crossings->first, c.crossings->second};
    cs.push_back(cj);
  }
  out["cycles"] = cs;
  out["warnings"] = rep.warnings;
  return out;
}

json point_json(const CurvePoint& p) {
  return json{{"t", p.t}, {"x", p.x}, {"h_res", p.h_res}, {"m_res", p.m_res}};
}

json bounds_json(const BoundReport& r) {
  return json{{"khovanskii_region", r.khovanskii_region.str()},
              {"khovanskii_total", r.khovanskii_total.str()},
              {"coarse_total", r.coarse_total.str()},
              {"bezout_tangency", r.bezout_tangency.str()},
              {"assembled_bezout", r.assembled_bezout.str()},
              {"assembled_groebner", r.assembled_groebner.str()}};
}

json audit_json(const AuditVerdict& v) {
  json lines = json::array();
  for (const auto& l : v.lines)
    lines.push_back(json{{"name", l.name},
                         {"lhs", l.lhs},
                         {"rhs", l.rhs},
                         {"pass", l.pass},
                         {"margin", l.margin}});
  return json{{"ok", v.ok}, {"lines", lines}};
}

// ---------------------------------------------------------------------------
// analyze

struct AnalyzeResult {
  json report;
  int exit_code = 0;
};

AnalyzeResult run_analyze(const EqInput& in, const Tolerances& tol) {
  AnalyzeResult out;
  const AbelEq& eq = in.eq;
  json& rep = out.report;
  rep["schema"] = "abelcyc.analyze";
  rep["schema_version"] = kSchemaVersion;
  rep["input"] = json{{"a", trig_json(eq.a)},
                      {"b", trig_json(eq.b)},
                      {"b_given_as", in.b_was_normalized_form ? "normalized" : "raw"}};

  // Normalization transform (echoed; cycles below are reported on the input
  // equation itself).
  std::optional<NormalizedForm> nf;
  try {
    nf = normalize(eq.a, eq.b);
    rep["normalization"] = json{{"time_shift", nf->time_shift},
                                {"x_scale", nf->x_scale},
                                {"b0", nf->b0},
                                {"tbar", nf->tbar},
                                {"a", trig_json(nf->a)}};
  } catch (const Error& e) {
    rep["normalization"] = json{{"failed", true}, {"reason", e.what()}};
  }

  rep["center"] = center_json(detect_center(eq, tol));

  SearchConfig cfg;
  cfg.ode = tol;
  CycleReport cyc;
  try {
    cyc = find_cycles(eq, cfg);
    rep["cycles"] = cycles_json(cyc);
  } catch (const Error& e) {
    rep["cycles"] = json{{"failed", true}, {"reason", e.what()}};
    out.exit_code = 3;
  }

  int tangency_count = 0, component_count = 0;
  if (cyc.kind == ReportKind::center) {
    // the tangency/component machinery addresses isolated cycles; a center
    // has none and typically sits on the a0 = 0 degeneracy
    rep["components_m"] = nullptr;
    rep["tangency"] = json{{"skipped", true}, {"reason", "center"}};
  } else if (nf) {
    const AbelEq neq{nf->a, normalized_b(nf->b0)};
    try {
      component_count = count_components_m(neq);
      rep["components_m"] = component_count;
    } catch (const Error& e) {
      rep["components_m"] = json{{"failed", true}, {"reason", e.what()}};
      out.exit_code = 3;
    }
    json tj;
    try {
      TangencyReport tr = solve_tangency(neq);
      tangency_count = (int)tr.points.size();
      tj["count"] = tangency_count;
      tj["partial"] = tr.partial;
      tj["generic"] = tr.generic;
      tj["used_fallback"] = tr.used_fallback;
      json pts = json::array(), bnd = json::array();
      for (const auto& p : tr.points) pts.push_back(point_json(p));
      for (const auto& p : tr.boundary) bnd.push_back(point_json(p));
      tj["points"] = pts;
      tj["boundary"] = bnd;
      if (tr.partial) out.exit_code = 3;
    } catch (const Error& e) {
      tj = json{{"failed", true}, {"partial", true}, {"reason", e.what()}};
      out.exit_code = 3;
    }
    rep["tangency"] = tj;
  } else {
    rep["components_m"] = nullptr;
    rep["tangency"] = json{{"skipped", true},
                           {"reason", "normalization unavailable"}};
  }

  rep["bounds"] = bounds_json(paper_bounds());
  rep["audit"] = audit_json(audit(cyc, tangency_count, component_count));
  if (out.exit_code != 0) rep["partial"] = true;
  return out;
}

// ---------------------------------------------------------------------------
// scan

struct GridAxis {
  std::string name;
  double lo = 0.0, hi = 0.0;
  int n = 1;
  double at(int i) const { return n == 1 ? lo : lo + (hi - lo) * i / (n - 1); }
};

// Grid spec: comma-separated var=lo:hi:count or var=value, with var among
// a0,a1,a2,b0,b1,b2. Cells enumerate in the canonical variable order
// (a0,a1,a2,b0,b1,b2), last listed variable fastest. If neither b1 nor b2 is
// given, b takes the pre-normalized form sin t + b0 (1 - cos t).
struct GridSpec {
  std::vector<GridAxis> axes;  // canonical order
  bool b_normalized_form = true;
  long long cells = 1;
};

GridSpec parse_grid(const std::string& spec) {
  static const std::vector<std::string> names{"a0", "a1", "a2", "b0", "b1", "b2"};
  std::map<std::string, GridAxis> given;
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    auto eq = item.find('=');
    if (eq == std::string::npos)
      throw CLI::ValidationError("--grid", "expected var=lo:hi:count in '" + item + "'");
    std::string name = item.substr(0, eq);
    if (std::find(names.begin(), names.end(), name) == names.end())
      throw CLI::ValidationError("--grid", "unknown variable '" + name + "'");
    std::string rest = item.substr(eq + 1);
    GridAxis ax;
    ax.name = name;
    std::vector<std::string> parts;
    std::stringstream ps(rest);
    std::string p;
    while (std::getline(ps, p, ':')) parts.push_back(p);
    try {
      if (parts.size() == 1) {
        ax.lo = ax.hi = std::stod(parts[0]);
        ax.n = 1;
      } else if (parts.size() == 3) {
        ax.lo = std::stod(parts[0]);
        ax.hi = std::stod(parts[1]);
        ax.n = std::stoi(parts[2]);
        if (ax.n < 1) throw std::invalid_argument("count");
      } else {
        throw std::invalid_argument(rest);
      }
    } catch (const std::exception&) {
      throw CLI::ValidationError("--grid", "bad range '" + rest + "'");
    }
    given[name] = ax;
  }
  if (given.empty()) throw CLI::ValidationError("--grid", "empty grid spec");

  GridSpec gs;
  gs.b_normalized_form = !given.count("b1") && !given.count("b2");
  for (const auto& n : names) {
    auto it = given.find(n);
    if (it != given.end()) {
      gs.axes.push_back(it->second);
    } else {
      GridAxis ax;
      ax.name = n;
      gs.axes.push_back(ax);  // fixed 0
    }
  }
  for (const auto& ax : gs.axes) gs.cells *= ax.n;
  return gs;
}

AbelEq cell_eq(const GridSpec& gs, long long idx, std::vector<double>& coeffs) {
  coeffs.assign(6, 0.0);
  long long rem = idx;
  for (int k = (int)gs.axes.size() - 1; k >= 0; --k) {
    const GridAxis& ax = gs.axes[k];
    coeffs[k] = ax.at((int)(rem % ax.n));
    rem /= ax.n;
  }
  AbelEq eq;
  eq.a = TrigPoly{coeffs[0], coeffs[1], coeffs[2]};
  if (gs.b_normalized_form) {
    eq.b = normalized_b(coeffs[3]);
    coeffs[3] = eq.b.c0;
    coeffs[4] = eq.b.c1;
    coeffs[5] = eq.b.c2;
  } else {
    eq.b = TrigPoly{coeffs[3], coeffs[4], coeffs[5]};
  }
  return eq;
}

std::string scan_cell_row(const GridSpec& gs, long long idx,
                          const Tolerances& tol, bool timing, int cycle_grid,
                          int contour) {
  std::vector<double> coeffs;
  AbelEq eq = cell_eq(gs, idx, coeffs);
  std::vector<std::string> f;
  f.push_back(std::to_string(idx));
  for (double c : coeffs) f.push_back(fmt_double(c));

  auto t0 = std::chrono::steady_clock::now();
  std::string kind = "finite", status = "ok", audit_col = "pass";
  int n_sc = 0, n_cs = 0, tangency = 0, components = 0;
  try {
    SearchConfig cfg;
    cfg.ode = tol;
    cfg.grid = cycle_grid;
    CycleReport cyc = find_cycles(eq, cfg);
    if (cyc.kind == ReportKind::center) kind = "center";
    for (const auto& c : cyc.cycles)
      (c.sign_class == SignClass::sign_changing ? n_sc : n_cs) += 1;
    if (cyc.kind == ReportKind::finite) {
      try {
        NormalizedForm nf = normalize(eq.a, eq.b);
        AbelEq neq{nf.a, normalized_b(nf.b0)};
        components = count_components_m(neq, contour);
        TangencyReport tr = solve_tangency(neq);
        tangency = (int)tr.points.size();
        if (tr.partial) status = "partial_tangency";
      } catch (const Error& e) {
        status = std::string("curve_failure: ") + e.what();
      }
    }
    // Without an equation-specific tangency/component count, audit against
    // the unconditional Bezout numbers (27 tangency solutions, 3 components)
    // so a curve failure cannot flag a spurious violation.
    bool curves_ok = status == "ok" || status == "partial_tangency";
    AuditVerdict v = curves_ok ? audit(cyc, tangency, components)
                               : audit(cyc, 27, 3);
    audit_col = v.ok ? "pass" : "VIOLATION";
  } catch (const Error& e) {
    status = std::string("cycle_failure: ") + e.what();
    audit_col = "";
  }
  auto t1 = std::chrono::steady_clock::now();

  f.push_back(kind);
  f.push_back(std::to_string(n_sc + n_cs));
  f.push_back(std::to_string(n_sc));
  f.push_back(std::to_string(n_cs));
  f.push_back(std::to_string(tangency));
  f.push_back(std::to_string(components));
  f.push_back(audit_col);
  f.push_back(status);
  if (timing)
    f.push_back(std::to_string(
        std::chrono::duration_cast<std::chrono::milliseconds>(t1 - t0).count()));
  return csv_row(f);
}

int run_scan(const std::string& gridspec, int jobs, const Tolerances& tol,
             bool timing, int cycle_grid, int contour,
             const std::string& out_path) {
  GridSpec gs = parse_grid(gridspec);
  std::vector<std::string> rows(gs.cells);
  std::atomic<long long> next{0};
  auto worker = [&]() {
    for (;;) {
      long long i = next.fetch_add(1);
      if (i >= gs.cells) return;
      rows[i] = scan_cell_row(gs, i, tol, timing, cycle_grid, contour);
    }
  };
  jobs = std::max(1, jobs);
  std::vector<std::thread> pool;
  for (int k = 1; k < jobs; ++k) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();

  std::vector<std::string> hdr{"cell", "a0", "a1", "a2", "b0", "b1", "b2",
                               "kind", "n_cycles", "n_sign_changing",
                               "n_constant_sign", "tangency_count",
                               "component_count", "audit", "status"};
  if (timing) hdr.push_back("wall_ms");
  std::string out = csv_row(hdr);
  for (const auto& r : rows) out += r;
  write_output(out_path, out);
  return 0;
}

// ---------------------------------------------------------------------------
// curves export

// m = 0 contour on the torus at the given resolution: crossing points on
// grid edges, refined by bisection, grouped into connected components
// (union-find over cells, matching the component counter's conventions).
void export_m_components(const AbelEq& eq, int N, std::string& out) {
  auto node = [&](int i) { return two_pi * (i + 0.5) / N; };
  auto wrap = [&](int i) { return i == N ? 0 : i; };
  // periodic samples: the value depends only on the wrapped index
  std::vector<std::vector<double>> v(N + 1, std::vector<double>(N + 1));
  for (int i = 0; i <= N; ++i)
    for (int j = 0; j <= N; ++j)
      v[i][j] = (i == N || j == N) ? v[wrap(i)][wrap(j)]
                                   : m_eval(eq, node(i), node(j));

  auto sg = [](double x) { return x >= 0.0 ? 1 : -1; };
  // union-find over edge ids (same ids as the component counter)
  std::vector<int> parent(2 * N * N, -1);
  std::function<int(int)> find = [&](int u) {
    while (parent[u] != u) u = parent[u] = parent[parent[u]];
    return u;
  };
  auto activate = [&](int id) {
    if (parent[id] == -1) parent[id] = id;
  };
  auto unite = [&](int a, int b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[a] = b;
  };
  auto hid = [&](int i, int j) { return 2 * (wrap(i) * N + wrap(j)); };
  auto vid = [&](int i, int j) { return 2 * (wrap(i) * N + wrap(j)) + 1; };

  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j) {
      std::vector<int> act;
      if (sg(v[i][j]) != sg(v[i + 1][j])) act.push_back(hid(i, j));
      if (sg(v[i][j + 1]) != sg(v[i + 1][j + 1])) act.push_back(hid(i, j + 1));
      if (sg(v[i][j]) != sg(v[i][j + 1])) act.push_back(vid(i, j));
      if (sg(v[i + 1][j]) != sg(v[i + 1][j + 1])) act.push_back(vid(i + 1, j));
      if (act.size() == 4) {
        // saddle cell: split by the sign at the center
        double mc = m_eval(eq, 0.5 * (node(i) + node(i + 1)),
                           0.5 * (node(j) + node(j + 1)));
        for (int id : act) activate(id);
        if (sg(mc) == sg(v[i][j])) {
          unite(hid(i, j), vid(i, j));
          unite(hid(i, j + 1), vid(i + 1, j));
        } else {
          unite(hid(i, j), vid(i + 1, j));
          unite(hid(i, j + 1), vid(i, j));
        }
        continue;
      }
      for (int id : act) activate(id);
      for (size_t k = 1; k < act.size(); ++k) unite(act[0], act[k]);
    }

  auto bisect_edge = [&](double t0, double x0, double t1, double x1) {
    double f0 = m_eval(eq, t0, x0);
    for (int it = 0; it < 80; ++it) {
      double tm = 0.5 * (t0 + t1), xm = 0.5 * (x0 + x1);
      double fm = m_eval(eq, tm, xm);
      if ((fm >= 0.0) == (f0 >= 0.0)) {
        t0 = tm;
        x0 = xm;
        f0 = fm;
      } else {
        t1 = tm;
        x1 = xm;
      }
    }
    return std::pair<double, double>{0.5 * (t0 + t1), 0.5 * (x0 + x1)};
  };

  std::map<int, int> label;  // root -> component id by first appearance
  for (int i = 0; i < N; ++i)
    for (int j = 0; j <= N; ++j) {
      // horizontal edge (i,j)-(i+1,j); j == N duplicates j == 0, skip
      if (j < N && parent[hid(i, j)] != -1 && sg(v[i][j]) != sg(v[i + 1][j])) {
        int root = find(hid(i, j));
        auto [c, _] = label.emplace(root, (int)label.size());
        auto [t, x] = bisect_edge(node(i), node(j), node(i + 1), node(j));
        out += csv_row({"component", std::to_string(c->second), fmt_double(t),
                        fmt_double(x), fmt_double(h_eval(eq, t, x)),
                        fmt_double(m_eval(eq, t, x))});
      }
      if (j < N && parent[vid(i, j)] != -1 && sg(v[i][j]) != sg(v[i][j + 1])) {
        int root = find(vid(i, j));
        auto [c, _] = label.emplace(root, (int)label.size());
        auto [t, x] = bisect_edge(node(i), node(j), node(i), node(j + 1));
        out += csv_row({"component", std::to_string(c->second), fmt_double(t),
                        fmt_double(x), fmt_double(h_eval(eq, t, x)),
                        fmt_double(m_eval(eq, t, x))});
      }
    }
}

int run_curves(const EqInput& in, int resolution, const std::string& out_path) {
  NormalizedForm nf = normalize(in.eq.a, in.eq.b);  // throws on degenerate b
  AbelEq neq{nf.a, normalized_b(nf.b0)};

  std::string out = csv_row({"kind", "id", "t", "x", "res_h", "res_m"});

  // h = 0 branch in sum/difference coordinates z1 = t + x, z2 = x - t.
  for (int i = 0; i <= 2 * resolution; ++i) {
    double z1 = 2.0 * two_pi * i / (2 * resolution);
    double z2;
    try {
      z2 = h_zero_branch(neq, z1);
    } catch (const OutOfRangeError&) {
      continue;
    }
    double t = 0.5 * (z1 - z2), x = 0.5 * (z1 + z2);
    out += csv_row({"h_branch", "0", fmt_double(t), fmt_double(x),
                    fmt_double(h_eval(neq, t, x)), fmt_double(m_eval(neq, t, x))});
  }

  export_m_components(neq, resolution, out);

  int exit_code = 0;
  try {
    TangencyReport tr = solve_tangency(neq);
    int id = 0;
    for (const auto& p : tr.points)
      out += csv_row({"tangency", std::to_string(id++), fmt_double(p.t),
                      fmt_double(p.x), fmt_double(p.h_res), fmt_double(p.m_res)});
    for (const auto& p : tr.boundary)
      out += csv_row({"tangency_boundary", std::to_string(id++), fmt_double(p.t),
                      fmt_double(p.x), fmt_double(p.h_res), fmt_double(p.m_res)});
    if (tr.partial) exit_code = 3;
  } catch (const IllConditionedError&) {
    exit_code = 3;
  }
  write_output(out_path, out);
  return exit_code;
}

// ---------------------------------------------------------------------------
// bounds / oracle

int run_bounds(const std::string& format, const std::string& out_path) {
  BoundReport r = paper_bounds();
  if (format == "csv") {
    std::string out = csv_row({"name", "value"});
    out += csv_row({"khovanskii_region", r.khovanskii_region.str()});
    out += csv_row({"khovanskii_total", r.khovanskii_total.str()});
    out += csv_row({"coarse_total", r.coarse_total.str()});
    out += csv_row({"bezout_tangency", r.bezout_tangency.str()});
    out += csv_row({"assembled_bezout", r.assembled_bezout.str()});
    out += csv_row({"assembled_groebner", r.assembled_groebner.str()});
    write_output(out_path, out);
  } else {
    json rep;
    rep["schema"] = "abelcyc.bounds";
    rep["schema_version"] = kSchemaVersion;
    rep["bounds"] = bounds_json(r);
    write_output(out_path, rep.dump(2) + "\n");
  }
  return 0;
}

int run_oracle(const EqInput& in, double eps, int harmonic, int grid,
               double window, const std::string& format,
               const std::string& out_path) {
  BruteResult res;
  int exit_code = 0;
  std::string error;
  bool generalized = eps != 0.0;
  try {
    if (generalized) {
      // literature family x' = eps cos(k t) |x| + sin t
      auto a = [eps, harmonic](double t) { return eps * std::cos(harmonic * t); };
      auto b = [](double t) { return std::sin(t); };
      double W = window > 0.0 ? window : brute_window(a, b);
      res = brute_count(a, b, -W, W, grid);
    } else if (window > 0.0) {
      res = brute_count(in.eq, -window, window, grid);
    } else {
      res = brute_count(in.eq, grid);
    }
  } catch (const Error& e) {
    error = e.what();
    exit_code = 3;
  }
  if (format == "csv") {
    std::string out = csv_row({"index", "x0"});
    for (size_t i = 0; i < res.roots.size(); ++i)
      out += csv_row({std::to_string(i), fmt_double(res.roots[i])});
    write_output(out_path, out);
  } else {
    json rep;
    rep["schema"] = "abelcyc.oracle";
    rep["schema_version"] = kSchemaVersion;
    rep["count"] = res.count;
    rep["roots"] = res.roots;
    rep["suspected_continuum"] = res.suspected_continuum;
    if (!error.empty()) rep["error"] = error;
    write_output(out_path, rep.dump(2) + "\n");
  }
  return exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"limit-cycle analysis of x' = a(t)|x| + b(t) with degree-1 "
               "trigonometric coefficients"};
  app.require_subcommand(1);

  std::string astr, bstr, tolstr, gridspec, out_path, format = "json";
  int jobs = 1, resolution = 512, ogrid = 4096, harmonic = 4;
  double eps = 0.0, window = 0.0;
  bool timing = false;

  auto add_eq_flags = [&](CLI::App* c, bool required) {
    auto* oa = c->add_option("--a", astr, "a coefficients c0,c1,c2");
    auto* ob = c->add_option("--b", bstr, "b coefficients c0,c1,c2, or a single b0 for the normalized form");
    if (required) {
      oa->required();
      ob->required();
    }
  };

  auto* analyze = app.add_subcommand("analyze", "full single-equation report (JSON)");
  add_eq_flags(analyze, true);
  analyze->add_option("--tol", tolstr, "integration tolerances REL,ABS");
  analyze->add_option("--out", out_path, "output path (default stdout)");

  auto* scan = app.add_subcommand("scan", "coefficient grid sweep (CSV)");
  scan->add_option("--grid", gridspec,
                   "grid spec: var=lo:hi:count or var=value, comma separated; "
                   "vars a0,a1,a2,b0,b1,b2")->required();
  scan->add_option("--jobs", jobs, "worker threads")->check(CLI::PositiveNumber);
  scan->add_option("--tol", tolstr, "integration tolerances REL,ABS");
  int cycle_grid = 512, contour = 512;
  scan->add_option("--cycle-grid", cycle_grid, "Delta bracketing grid per cell")
      ->check(CLI::PositiveNumber);
  scan->add_option("--contour", contour, "m = 0 contour grid per cell")
      ->check(CLI::PositiveNumber);
  scan->add_option("--out", out_path, "output path (default stdout)");
  scan->add_flag("--timing", timing,
                 "append a wall_ms column (breaks byte-determinism across runs)");

  auto* curves = app.add_subcommand("curves", "h=0 branch, m=0 components, tangency points (CSV)");
  add_eq_flags(curves, true);
  curves->add_option("--resolution", resolution, "contour grid resolution")
      ->check(CLI::PositiveNumber);
  curves->add_option("--out", out_path, "output path (default stdout)");

  auto* bounds = app.add_subcommand("bounds", "exact counting bounds");
  bounds->add_option("--format", format, "json|csv")
      ->check(CLI::IsMember({"json", "csv"}));
  bounds->add_option("--out", out_path, "output path (default stdout)");

  auto* oracle = app.add_subcommand("oracle", "independent brute-force cycle count");
  add_eq_flags(oracle, false);
  oracle->add_option("--eps", eps, "generalized mode: a = eps cos(k t), b = sin t");
  oracle->add_option("--harmonic", harmonic, "k in the generalized mode")
      ->check(CLI::PositiveNumber);
  oracle->add_option("--grid", ogrid, "displacement sampling grid")
      ->check(CLI::PositiveNumber);
  oracle->add_option("--window", window, "search window [-W, W] (default automatic)");
  oracle->add_option("--format", format, "json|csv")
      ->check(CLI::IsMember({"json", "csv"}));
  oracle->add_option("--out", out_path, "output path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (app.got_subcommand(analyze)) {
      AnalyzeResult res = run_analyze(make_eq(astr, bstr), make_tol(tolstr));
      write_output(out_path, res.report.dump(2) + "\n");
      return res.exit_code;
    }
    if (app.got_subcommand(scan))
      return run_scan(gridspec, jobs, make_tol(tolstr), timing, cycle_grid,
                      contour, out_path);
    if (app.got_subcommand(curves))
      return run_curves(make_eq(astr, bstr), resolution, out_path);
    if (app.got_subcommand(bounds)) return run_bounds(format, out_path);
    if (app.got_subcommand(oracle)) {
      EqInput in;
      if (eps == 0.0) {
        if (astr.empty() || bstr.empty())
          throw CLI::ValidationError("--a/--b", "required unless --eps is given");
        in = make_eq(astr, bstr);
      }
      return run_oracle(in, eps, harmonic, ogrid, window, format, out_path);
    }
  } catch (const CLI::Error& e) {
    std::cerr << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
