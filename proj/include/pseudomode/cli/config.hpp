#pragma once

// Run configuration: strict JSON ingestion. Every object rejects keys it does
// not know, and numeric ranges are validated on read.

#include <json.hpp>

#include <cmath>
#include <complex>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "pseudomode/boundary.hpp"
#include "pseudomode/coefficients.hpp"
#include "pseudomode/errors.hpp"
#include "pseudomode/grid.hpp"
#include "pseudomode/phase.hpp"

namespace pseudomode::cli {

using json = nlohmann::json;

/// View of a JSON object that records which keys were read.
class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_ + " must be an object");
  }

  bool has(const std::string& key) const { return j_.contains(key); }

  const json& raw(const std::string& key) {
    seen_.insert(key);
    if (!j_.contains(key)) throw ConfigError("missing key " + where(key));
    return j_.at(key);
  }

  Section sub(const std::string& key) { return Section(raw(key), where(key)); }

  double number(const std::string& key) { return as_number(raw(key), where(key)); }
  double number(const std::string& key, double fallback) { return has(key) ? number(key) : fallback; }

  int integer(const std::string& key) {
    const json& v = raw(key);
    if (!v.is_number_integer()) throw ConfigError(where(key) + " must be an integer");
    return v.get<int>();
  }
  int integer(const std::string& key, int fallback) { return has(key) ? integer(key) : fallback; }

  bool boolean(const std::string& key, bool fallback) {
    if (!has(key)) return fallback;
    const json& v = raw(key);
    if (!v.is_boolean()) throw ConfigError(where(key) + " must be a boolean");
    return v.get<bool>();
  }

  std::string text(const std::string& key) {
    const json& v = raw(key);
    if (!v.is_string()) throw ConfigError(where(key) + " must be a string");
    return v.get<std::string>();
  }
  std::string text(const std::string& key, const std::string& fallback) { return has(key) ? text(key) : fallback; }

  cplx complex(const std::string& key) { return as_complex(raw(key), where(key)); }
  cplx complex(const std::string& key, cplx fallback) { return has(key) ? complex(key) : fallback; }

  std::vector<double> numbers(const std::string& key) {
    const json& v = raw(key);
    if (!v.is_array()) throw ConfigError(where(key) + " must be an array of numbers");
    std::vector<double> out;
    for (std::size_t k = 0; k < v.size(); ++k) out.push_back(as_number(v[k], where(key) + "[" + std::to_string(k) + "]"));
    return out;
  }

  std::vector<cplx> complexes(const std::string& key) {
    const json& v = raw(key);
    if (!v.is_array()) throw ConfigError(where(key) + " must be an array");
    std::vector<cplx> out;
    for (std::size_t k = 0; k < v.size(); ++k) out.push_back(as_complex(v[k], where(key) + "[" + std::to_string(k) + "]"));
    return out;
  }

  /// Rejects every key that was never read.
  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!seen_.count(it.key())) throw ConfigError("unknown key " + where(it.key()));
  }

  std::string where(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  static double as_number(const json& v, const std::string& at) {
    if (!v.is_number()) throw ConfigError(at + " must be a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) throw ConfigError(at + " must be finite");
    return d;
  }

  /// A number, or [re, im].
  static cplx as_complex(const json& v, const std::string& at) {
    if (v.is_number()) return {as_number(v, at), 0.0};
    if (v.is_array() && v.size() == 2) return {as_number(v[0], at + "[0]"), as_number(v[1], at + "[1]")};
    throw ConfigError(at + " must be a number or a [re, im] pair");
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

struct Range {
  double lo = 0.0, hi = 1.0;
  int count = 2;
  std::vector<double> nodes() const { return count == 1 ? std::vector<double>{lo} : linspace(lo, hi, static_cast<std::size_t>(count)); }
  std::vector<double> geometric() const {
    std::vector<double> out;
    for (int k = 0; k < count; ++k)
      out.push_back(count == 1 ? lo : lo * std::pow(hi / lo, static_cast<double>(k) / (count - 1)));
    return out;
  }
};

inline Range read_range(Section s, bool allow_empty = false) {
  Range r;
  r.lo = s.number("lo");
  r.hi = s.number("hi");
  r.count = s.integer("count");
  s.finish();
  if (r.count < (allow_empty ? 0 : 1)) throw ConfigError(s.where("count") + " is out of range");
  if (r.count > 1 && !(r.lo < r.hi)) throw ConfigError(s.where("lo") + " must be below hi");
  return r;
}

inline void check_h(double h, const std::string& at) {
  if (!(h > 0.0 && h <= 1.0)) throw ConfigError(at + " must lie in (0, 1]");
}

struct RegionBlock {
  Range u, xi;
  bool plot = true;
};

struct ModeBlock {
  std::string kind = "interior";
  double u = 0.0, xi = -1.0, h = 0.0625;
};

struct BoundaryBlock {
  cplx z;
  cplx coef_deriv{1.0, 0.0}, coef_value{1.0, 0.0};
  double h = 0.01;
  double t_max = 3.0;
  int count = 201;
};

struct SweepBlock {
  std::vector<std::string> kinds{"interior", "rough", "gaussian"};
  std::vector<int> orders{0, 1, 2};
  double u = 0.0, xi = -1.0;
  std::optional<cplx> boundary_xi;
};

struct PsgridBlock {
  double h = 1.0 / 128;
  int m = 400;
  Range re, im;
  std::optional<Range> cloud_u, cloud_xi;
  bool plot = true;
};

struct FbiBlock {
  cplx kappa{1.0, 0.5};
  std::vector<double> hs{1e-1, 1e-2, 1e-3};
  Range s{-20.0, 20.0, 81};
  std::vector<double> ts{1e-6, 1e-9, 1e-12};
  bool orthogonality = false;
  Range ou_u, ou_xi, ov_u, ov_xi, o_h;
  int functions = 20;
  int seed = 7;
};

struct EvolveBlock {
  double h = 1.0 / 64;
  int m = 400;
  std::vector<std::pair<double, double>> modes;
  std::vector<double> ts{0.1, 0.5, 1.0};
  std::vector<double> deltas{1e-2, 1e-4, 1e-6};
};

struct RunConfig {
  std::string operator_name;
  std::optional<CoefficientField> field;
  std::vector<double> h_sweep = default_h_sweep();
  int n = 1;
  int K = kDefaultTruncation;
  CutoffRequest cutoff;
  BoundaryCondition left = BoundaryCondition::dirichlet(), right = BoundaryCondition::dirichlet();
  std::string output = "out";

  std::optional<RegionBlock> region;
  std::optional<ModeBlock> mode;
  std::optional<BoundaryBlock> boundary;
  std::optional<SweepBlock> sweep;
  std::optional<PsgridBlock> psgrid;
  std::optional<FbiBlock> fbi;
  std::optional<EvolveBlock> evolve;

  const CoefficientField& operator_field() const { return *field; }
};

namespace detail {

inline CoefficientField read_operator(Section s, std::optional<std::pair<double, double>> domain) {
  if (s.has("name")) {
    const std::string name = s.text("name");
    s.finish();
    return domain ? builtin_operator(name, domain->first, domain->second) : builtin_operator(name);
  }
  const auto a = s.complexes("a"), b = s.complexes("b"), c = s.complexes("c");
  s.finish();
  if (a.empty() || b.empty() || c.empty()) throw ConfigError("operator coefficient lists must be nonempty");
  if (!domain) throw ConfigError("a polynomial operator needs a domain");
  return CoefficientField(Coefficient::polynomial(a), Coefficient::polynomial(b), Coefficient::polynomial(c),
                          domain->first, domain->second, "custom");
}

inline BoundaryCondition read_bc(Section s) {
  const std::string kind = s.text("kind");
  BoundaryCondition bc;
  if (kind == "dirichlet") {
    bc = BoundaryCondition::dirichlet();
  } else if (kind == "robin") {
    const cplx d = s.complex("coef_deriv"), v = s.complex("coef_value");
    if (d == cplx{} && v == cplx{}) throw ConfigError(s.where("coef_deriv") + " and coef_value both vanish");
    bc = BoundaryCondition::robin(d, v);
  } else {
    throw ConfigError(s.where("kind") + " must be dirichlet or robin");
  }
  s.finish();
  return bc;
}

}  // namespace detail

inline RunConfig parse_config(const json& j) {
  Section top(j, "");
  RunConfig c;
  std::optional<std::pair<double, double>> domain;
  if (top.has("domain")) {
    const auto d = top.numbers("domain");
    if (d.size() != 2 || !(d[0] < d[1])) throw ConfigError("domain must be [lo, hi] with lo < hi");
    domain = std::make_pair(d[0], d[1]);
  }
  {
    Section op = top.sub("operator");
    if (op.has("name")) c.operator_name = Section(j.at("operator"), "operator").text("name");
    try {
      c.field = detail::read_operator(std::move(op), domain);
    } catch (const DomainError& e) {
      throw ConfigError(std::string("operator: ") + e.what());
    }
    if (c.operator_name.empty()) c.operator_name = "custom";
  }
  if (top.has("h_sweep")) {
    c.h_sweep = top.numbers("h_sweep");
    for (std::size_t k = 0; k < c.h_sweep.size(); ++k) check_h(c.h_sweep[k], "h_sweep[" + std::to_string(k) + "]");
  }
  c.n = top.integer("n", c.n);
  if (c.n < 0) throw ConfigError("n must be >= 0");
  c.K = top.integer("K", c.K);
  if (c.K < 4) throw ConfigError("K must be >= 4");
  if (top.has("cutoff")) {
    Section s = top.sub("cutoff");
    c.cutoff.delta0 = s.number("delta0", c.cutoff.delta0);
    c.cutoff.max_halvings = s.integer("max_halvings", c.cutoff.max_halvings);
    c.cutoff.probes = s.integer("probes", c.cutoff.probes);
    c.cutoff.tail_tol = s.number("tail_tol", c.cutoff.tail_tol);
    c.cutoff.patch_spacing = s.number("patch_spacing", c.cutoff.patch_spacing);
    s.finish();
    if (!(c.cutoff.delta0 > 0.0)) throw ConfigError("cutoff.delta0 must be > 0");
    if (c.cutoff.max_halvings < 0 || c.cutoff.probes < 2) throw ConfigError("cutoff ladder settings out of range");
    if (!(c.cutoff.tail_tol > 0.0) || !(c.cutoff.patch_spacing > 0.0)) throw ConfigError("cutoff tolerances must be > 0");
  }
  if (top.has("bc")) {
    Section s = top.sub("bc");
    if (s.has("left")) c.left = detail::read_bc(s.sub("left"));
    if (s.has("right")) c.right = detail::read_bc(s.sub("right"));
    s.finish();
  }
  c.output = top.text("output", c.output);

  if (top.has("region")) {
    Section s = top.sub("region");
    RegionBlock b;
    b.u = read_range(s.sub("u"));
    b.xi = read_range(s.sub("xi"));
    b.plot = s.boolean("plot", b.plot);
    s.finish();
    c.region = b;
  }
  if (top.has("mode")) {
    Section s = top.sub("mode");
    ModeBlock b;
    b.kind = s.text("kind", b.kind);
    if (b.kind != "interior" && b.kind != "rough" && b.kind != "gaussian")
      throw ConfigError("mode.kind must be interior, rough or gaussian");
    b.u = s.number("u");
    b.xi = s.number("xi");
    b.h = s.number("h");
    check_h(b.h, "mode.h");
    s.finish();
    c.mode = b;
  }
  if (top.has("boundary")) {
    Section s = top.sub("boundary");
    BoundaryBlock b;
    b.z = s.complex("z");
    if (s.has("robin")) {
      Section r = s.sub("robin");
      b.coef_deriv = r.complex("coef_deriv");
      b.coef_value = r.complex("coef_value");
      r.finish();
      if (b.coef_deriv == cplx{} && b.coef_value == cplx{}) throw ConfigError("boundary.robin coefficients both vanish");
    }
    b.h = s.number("h", b.h);
    check_h(b.h, "boundary.h");
    b.t_max = s.number("t_max", b.t_max);
    b.count = s.integer("count", b.count);
    if (!(b.t_max > 0.0) || b.count < 2) throw ConfigError("boundary polyline settings out of range");
    s.finish();
    c.boundary = b;
  }
  if (top.has("sweep")) {
    Section s = top.sub("sweep");
    SweepBlock b;
    if (s.has("kinds")) {
      const json& k = s.raw("kinds");
      if (!k.is_array()) throw ConfigError("sweep.kinds must be an array");
      b.kinds.clear();
      for (const auto& v : k) {
        if (!v.is_string()) throw ConfigError("sweep.kinds entries must be strings");
        const auto name = v.get<std::string>();
        if (name != "interior" && name != "rough" && name != "gaussian" && name != "boundary")
          throw ConfigError("sweep.kinds entry '" + name + "' is not a mode kind");
        b.kinds.push_back(name);
      }
    }
    if (s.has("orders")) {
      b.orders.clear();
      for (double v : s.numbers("orders")) {
        if (v < 0 || v != std::floor(v)) throw ConfigError("sweep.orders must be non-negative integers");
        b.orders.push_back(static_cast<int>(v));
      }
    }
    b.u = s.number("u", b.u);
    b.xi = s.number("xi", b.xi);
    if (s.has("boundary_xi")) b.boundary_xi = s.complex("boundary_xi");
    s.finish();
    for (const auto& k : b.kinds)
      if (k == "boundary" && !b.boundary_xi) throw ConfigError("sweep.boundary_xi is required for boundary rows");
    if (c.h_sweep.size() < 4) throw ConfigError("h_sweep needs at least 4 values for order fits");
    c.sweep = b;
  }
  if (top.has("psgrid")) {
    Section s = top.sub("psgrid");
    PsgridBlock b;
    b.h = s.number("h", b.h);
    check_h(b.h, "psgrid.h");
    b.m = s.integer("m", b.m);
    if (b.m < 8) throw ConfigError("psgrid.m must be >= 8");
    b.re = read_range(s.sub("re"), true);
    b.im = read_range(s.sub("im"), true);
    if (s.has("cloud")) {
      Section cl = s.sub("cloud");
      b.cloud_u = read_range(cl.sub("u"));
      b.cloud_xi = read_range(cl.sub("xi"));
      cl.finish();
    }
    b.plot = s.boolean("plot", b.plot);
    s.finish();
    c.psgrid = b;
  }
  if (top.has("fbi")) {
    Section s = top.sub("fbi");
    FbiBlock b;
    b.kappa = s.complex("kappa", b.kappa);
    if (!(b.kappa.real() > 0.0)) throw ConfigError("fbi.kappa must have positive real part");
    if (s.has("h")) b.hs = s.numbers("h");
    for (double h : b.hs) check_h(h, "fbi.h");
    if (s.has("s")) b.s = read_range(s.sub("s"));
    if (s.has("t")) b.ts = s.numbers("t");
    for (double t : b.ts)
      if (!(t > 0.0)) throw ConfigError("fbi.t entries must be > 0");
    if (s.has("orthogonality")) {
      Section o = s.sub("orthogonality");
      Section U = o.sub("U"), V = o.sub("V");
      b.ou_u = read_range(U.sub("u"));
      b.ou_xi = read_range(U.sub("xi"));
      b.ov_u = read_range(V.sub("u"));
      b.ov_xi = read_range(V.sub("xi"));
      U.finish();
      V.finish();
      b.o_h = read_range(o.sub("h"));
      check_h(b.o_h.lo, "fbi.orthogonality.h.lo");
      check_h(b.o_h.hi, "fbi.orthogonality.h.hi");
      o.finish();
      b.orthogonality = true;
    }
    b.functions = s.integer("functions", b.functions);
    b.seed = s.integer("seed", b.seed);
    if (b.functions < 0) throw ConfigError("fbi.functions must be >= 0");
    s.finish();
    c.fbi = b;
  }
  if (top.has("evolve")) {
    Section s = top.sub("evolve");
    EvolveBlock b;
    b.h = s.number("h", b.h);
    check_h(b.h, "evolve.h");
    b.m = s.integer("m", b.m);
    if (b.m < 8) throw ConfigError("evolve.m must be >= 8");
    const json& roster = s.raw("modes");
    if (!roster.is_array() || roster.empty()) throw ConfigError("evolve.modes must be a nonempty array of [u, xi]");
    for (std::size_t k = 0; k < roster.size(); ++k) {
      const std::string at = "evolve.modes[" + std::to_string(k) + "]";
      if (!roster[k].is_array() || roster[k].size() != 2) throw ConfigError(at + " must be [u, xi]");
      b.modes.emplace_back(Section::as_number(roster[k][0], at), Section::as_number(roster[k][1], at));
    }
    if (s.has("t")) b.ts = s.numbers("t");
    for (double t : b.ts)
      if (!(t >= 0.0)) throw ConfigError("evolve.t entries must be >= 0");
    if (s.has("delta")) b.deltas = s.numbers("delta");
    for (double d : b.deltas)
      if (!(d > 0.0)) throw ConfigError("evolve.delta entries must be > 0");
    s.finish();
    c.evolve = b;
  }
  top.finish();
  return c;
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  return parse_config(j);
}

}  // namespace pseudomode::cli
