#pragma once

// Subcommand bodies. Each reads its block of the run config, writes its files into
// the output directory and returns a JSON summary.

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "pseudomode/boundary.hpp"
#include "pseudomode/cli/config.hpp"
#include "pseudomode/cli/io.hpp"
#include "pseudomode/fbi.hpp"
#include "pseudomode/frame.hpp"
#include "pseudomode/grid.hpp"
#include "pseudomode/symbol.hpp"
#include "pseudomode/wkb.hpp"

namespace pseudomode::cli {

using nlohmann::json;

namespace detail {

template <class Block>
const Block& require_block(const std::optional<Block>& b, const char* name) {
  if (!b) throw ConfigError(std::string("config has no '") + name + "' block");
  return *b;
}

inline void write_mode_samples(const OutputDir& dir, const std::string& name, const Pseudomode& m) {
  CsvWriter csv(dir, name, {"x", "re_f", "im_f", "re_residual", "im_residual"});
  for (std::size_t k = 0; k < m.x.size(); ++k) csv.cell(m.x[k]).cell(m.f[k]).cell(m.residual[k]).end_row();
}

inline json triple_json(const ResidualTriple& r) {
  return {{"rQ", number_json(r.rQ)}, {"rP", number_json(r.rP)}, {"rL", number_json(r.rL)}, {"norm", r.norm}};
}

inline json mode_json(const Pseudomode& m) {
  return {{"kind", to_string(m.kind)}, {"h", m.h},         {"n", m.n},
          {"u", m.u},                  {"xi", complex_json(m.xi)}, {"z", complex_json(m.z)},
          {"delta", m.cutoff.delta},   {"samples", m.x.size()}};
}

inline Pseudomode make_mode(const RunConfig& cfg, const std::string& kind, const PhasePoint& p, double h, int n) {
  const auto& cf = cfg.operator_field();
  if (kind == "interior") return assemble_mode(cf, p, h, n, cfg.K, cfg.cutoff);
  if (kind == "rough") return rough_mode(cf, p, h);
  if (kind == "gaussian") return gaussian_mode(cf, p, h);
  throw ConfigError("unknown mode kind '" + kind + "'");
}

inline constexpr double kRoundoffResidual = 1e-13;

/// Residuals this small everywhere mark an exact eigenfunction, which has no finite order.
inline bool at_roundoff(const std::vector<double>& r) {
  return std::all_of(r.begin(), r.end(), [](double v) { return v <= kRoundoffResidual; });
}

struct LineFit {
  double slope = 0.0, intercept = 0.0, r2 = 0.0;
};

/// Least squares y = slope x + intercept.
inline LineFit line_fit(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw PreconditionError("line fit needs at least two points");
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0;
  for (std::size_t k = 0; k < x.size(); ++k) sx += x[k], sy += y[k];
  const double mx = sx / n, my = sy / n;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    sxx += (x[k] - mx) * (x[k] - mx);
    sxy += (x[k] - mx) * (y[k] - my);
    syy += (y[k] - my) * (y[k] - my);
  }
  if (!(sxx > 0.0)) throw PreconditionError("line fit needs distinct abscissae");
  LineFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  f.r2 = syy > 0.0 ? sxy * sxy / (sxx * syy) : 1.0;
  return f;
}

struct Packet {
  double x0, s;
  cplx c;
};

/// Sums of four Gaussian wave packets of width 1/4, centres in [-0.3, 0.3], frequencies in [-6, 6].
inline std::vector<std::vector<Packet>> random_packets(int count, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<std::vector<Packet>> out(static_cast<std::size_t>(count));
  for (auto& f : out)
    for (int k = 0; k < 4; ++k) f.push_back({0.3 * u(rng), 6.0 * u(rng), cplx(u(rng), u(rng))});
  return out;
}

inline Vector packet_samples(const std::vector<Packet>& f, const std::vector<double>& x) {
  Vector v(static_cast<Eigen::Index>(x.size()));
  for (std::size_t k = 0; k < x.size(); ++k) {
    cplx a = 0.0;
    for (const auto& p : f) {
      const double d = x[k] - p.x0;
      a += p.c * std::exp(-d * d / (2.0 * 0.0625) + I * p.s * x[k]);
    }
    v(static_cast<Eigen::Index>(k)) = a;
  }
  return v;
}

}  // namespace detail

inline json cmd_region(const RunConfig& cfg, const OutputDir& dir) {
  const auto& b = detail::require_block(cfg.region, "region");
  const auto& cf = cfg.operator_field();
  const RegionMask mask = region_mask(cf, b.u.nodes(), b.xi.nodes());
  {
    CsvWriter csv(dir, "region_mask.csv", {"u", "xi", "bracket", "in_omega"});
    for (std::size_t i = 0; i < mask.rows(); ++i)
      for (std::size_t j = 0; j < mask.cols(); ++j)
        csv.cell(mask.u_grid[i]).cell(mask.xi_grid[j]).cell(mask.bracket[i][j]).cell(mask.in_omega[i][j] ? 1 : 0).end_row();
  }
  const auto image = symbol_image(mask, cf);
  {
    CsvWriter csv(dir, "symbol_image.csv", {"u", "xi", "re_sigma", "im_sigma"});
    for (const auto& p : image) csv.cell(p.u).cell(p.xi).cell(p.sigma).end_row();
  }
  if (b.plot) {
    auto gp = dir.open("region.gp");
    gp << "set datafile separator ','\n"
          "set multiplot layout 1,2\n"
          "set xlabel 'u'\nset ylabel 'xi'\n"
          "plot 'region_mask.csv' every ::1 using 1:2:4 with points pt 5 ps 0.4 palette notitle\n"
          "set xlabel 'Re sigma'\nset ylabel 'Im sigma'\n"
          "plot 'symbol_image.csv' every ::1 using 3:4 with dots notitle\n"
          "unset multiplot\n";
  }
  json out{{"operator", cfg.operator_name},
           {"grid_points", mask.rows() * mask.cols()},
           {"in_omega", mask.count()},
           {"image_points", image.size()}};
  dir.write_json("region.json", out);
  return out;
}

inline json cmd_mode(const RunConfig& cfg, const OutputDir& dir) {
  const auto& b = detail::require_block(cfg.mode, "mode");
  const Pseudomode m = detail::make_mode(cfg, b.kind, {b.u, b.xi}, b.h, cfg.n);
  detail::write_mode_samples(dir, "mode_samples.csv", m);
  json out = detail::mode_json(m);
  out["operator"] = cfg.operator_name;
  out["residual"] = detail::triple_json(residual_triple(m));
  dir.write_json("mode.json", out);
  return out;
}

inline json cmd_boundary(const RunConfig& cfg, const OutputDir& dir) {
  const auto& b = detail::require_block(cfg.boundary, "boundary");
  const auto& cf = cfg.operator_field();
  const RobinCondition rc(b.coef_deriv, b.coef_value);
  const RobinMode rm = robin_combination(cf, rc, b.z, b.h, cfg.n, cfg.K, cfg.cutoff);
  {
    CsvWriter csv(dir, "parabola.csv", {"t", "re", "im"});
    for (const auto& [t, s] : parabola_polyline(cf, b.t_max, static_cast<std::size_t>(b.count)))
      csv.cell(t).cell(s).end_row();
  }
  detail::write_mode_samples(dir, "boundary_mode.csv", rm.mode);
  json out = detail::mode_json(rm.mode);
  out["operator"] = cfg.operator_name;
  out["exit_condition"] = exit_condition(cf);
  out["roots"] = {complex_json(rm.xi1), complex_json(rm.xi2)};
  out["alpha"] = complex_json(rm.alpha);
  out["beta"] = complex_json(rm.beta);
  out["bc_residual"] = number_json(rm.bc_residual);
  out["residual"] = detail::triple_json(residual_triple(rm.mode));
  dir.write_json("boundary.json", out);
  return out;
}

inline json cmd_sweep(const RunConfig& cfg, const OutputDir& dir) {
  const auto& b = detail::require_block(cfg.sweep, "sweep");
  const auto& cf = cfg.operator_field();
  struct Series {
    std::string kind;
    int n;
    std::vector<double> h, rQ, rP, rL;
  };
  std::vector<Series> all;
  for (const auto& kind : b.kinds) {
    const bool ordered = kind == "interior" || kind == "boundary";
    const std::vector<int> orders = ordered ? b.orders : std::vector<int>{0};
    for (int n : orders) {
      Series s{kind, n, {}, {}, {}, {}};
      for (double h : cfg.h_sweep) {
        Pseudomode m;
        if (kind == "boundary") {
          if (!b.boundary_xi) throw ConfigError("sweep.boundary_xi is required for boundary modes");
          m = boundary_mode(cf, BoundaryCovector(*b.boundary_xi), h, n, cfg.K, cfg.cutoff);
        } else {
          m = detail::make_mode(cfg, kind, {b.u, b.xi}, h, n);
        }
        const auto r = residual_triple(m);
        s.h.push_back(h);
        s.rQ.push_back(r.rQ);
        s.rP.push_back(r.rP);
        s.rL.push_back(r.rL);
      }
      all.push_back(std::move(s));
    }
  }
  {
    CsvWriter csv(dir, "sweep.csv", {"kind", "n", "h", "rQ", "rP", "rL"});
    for (const auto& s : all)
      for (std::size_t k = 0; k < s.h.size(); ++k)
        csv.cell(s.kind).cell(s.n).cell(s.h[k]).cell(s.rQ[k]).cell(s.rP[k]).cell(s.rL[k]).end_row();
  }
  json fits = json::array();
  {
    CsvWriter csv(dir, "sweep_fit.csv", {"kind", "n", "quantity", "slope", "intercept", "r2"});
    for (const auto& s : all) {
      const std::pair<const char*, const std::vector<double>*> qs[] = {{"rQ", &s.rQ}, {"rP", &s.rP}, {"rL", &s.rL}};
      for (const auto& [name, r] : qs) {
        const bool exact = detail::at_roundoff(*r);
        json row{{"kind", s.kind}, {"n", s.n}, {"quantity", name}};
        csv.cell(s.kind).cell(s.n).cell(std::string(name));
        if (exact) {
          csv.cell(std::string("inf")).cell(std::string("nan")).cell(std::string("nan"));
          row["slope"] = "inf";
        } else {
          const auto f = order_fit(s.h, *r);
          csv.cell(f.slope).cell(f.intercept).cell(f.r2);
          row["slope"] = f.slope;
          row["r2"] = f.r2;
        }
        csv.end_row();
        fits.push_back(row);
      }
    }
  }
  json out{{"operator", cfg.operator_name}, {"h_sweep", cfg.h_sweep}, {"fits", fits}};
  dir.write_json("sweep.json", out);
  return out;
}

inline json cmd_psgrid(const RunConfig& cfg, const OutputDir& dir) {
  const auto& b = detail::require_block(cfg.psgrid, "psgrid");
  const auto& cf = cfg.operator_field();
  const DenseOperator op = discretize(cf, b.h, Grid1D::uniform(cf.x_lo(), cf.x_hi(), b.m), cfg.left, cfg.right);

  std::vector<cplx> zs;
  for (double re : b.re.nodes())
    for (double im : b.im.nodes()) zs.emplace_back(re, im);
  const auto cells = resolvent_map(op, zs);
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  {
    CsvWriter csv = cells.empty() ? CsvWriter(dir, "resolvent.csv") : CsvWriter(dir, "resolvent.csv", {"re", "im", "s_min"});
    for (const auto& c : cells) {
      csv.cell(c.z).cell(c.s_min).end_row();
      lo = std::min(lo, c.s_min);
      hi = std::max(hi, c.s_min);
    }
  }
  json out{{"operator", cfg.operator_name}, {"h", b.h}, {"m", b.m}, {"cells", cells.size()}};
  if (!cells.empty()) {
    out["s_min_lo"] = lo;
    out["s_min_hi"] = hi;
  }

  const bool cloud = b.cloud_u && b.cloud_xi;
  if (cloud) {
    const auto image = symbol_image(region_mask(cf, b.cloud_u->nodes(), b.cloud_xi->nodes()), cf);
    std::vector<cplx> sigmas;
    for (const auto& p : image) sigmas.push_back(p.sigma);
    const auto at = resolvent_map(op, sigmas);
    double worst = 0.0;
    CsvWriter csv(dir, "symbol_cloud.csv", {"u", "xi", "re_sigma", "im_sigma", "s_min"});
    for (std::size_t k = 0; k < image.size(); ++k) {
      csv.cell(image[k].u).cell(image[k].xi).cell(image[k].sigma).cell(at[k].s_min).end_row();
      worst = std::max(worst, at[k].s_min);
    }
    out["cloud_points"] = image.size();
    if (!image.empty()) out["cloud_s_min_max"] = worst;
  }
  const bool parabola = exit_condition(cf);
  if (parabola) {
    CsvWriter csv(dir, "parabola.csv", {"t", "re", "im"});
    for (const auto& [t, s] : parabola_polyline(cf, 3.0, 201)) csv.cell(t).cell(s).end_row();
  }
  if (b.plot) {
    auto gp = dir.open("psgrid.gp");
    gp << "set datafile separator ','\n"
          "set xlabel 'Re z'\nset ylabel 'Im z'\nset cblabel 'log10 s_min'\n"
          "plot 'resolvent.csv' every ::1 using 1:2:(log10($3)) with points pt 5 ps 0.6 palette notitle";
    if (cloud) gp << ", \\\n     'symbol_cloud.csv' every ::1 using 3:4 with dots lc rgb 'black' title 'sigma(Omega)'";
    if (parabola) gp << ", \\\n     'parabola.csv' every ::1 using 2:3 with lines lc rgb 'red' title 'P'";
    gp << '\n';
  }
  dir.write_json("psgrid.json", out);
  return out;
}

inline json cmd_fbi(const RunConfig& cfg, const OutputDir& dir) {
  const auto& b = detail::require_block(cfg.fbi, "fbi");
  const double c6 = b.kappa.real();
  json out{{"kappa", complex_json(b.kappa)}, {"c6", c6}};

  // F(h, s) against G(h^2 s^3) on s > 0.
  double profile_gap = 0.0;
  {
    CsvWriter csv(dir, "fbi_profile.csv", {"h", "s", "F", "G"});
    for (double h : b.hs)
      for (double s : b.s.nodes()) {
        const double f = boundedness_profile(c6, h, s);
        csv.cell(h).cell(s).cell(f);
        if (s > 0.0) {
          const double g = boundedness_G(c6, h * h * s * s * s);
          profile_gap = std::max(profile_gap, std::abs(f - g) / g);
          csv.cell(g);
        } else {
          csv.cell(std::string("nan"));
        }
        csv.end_row();
      }
  }
  out["profile_vs_G"] = profile_gap;

  const double limit = boundedness_limit(c6);
  {
    CsvWriter csv(dir, "fbi_limit.csv", {"t", "G", "limit", "relative_error"});
    double last = 0.0;
    for (double t : b.ts) {
      const double g = boundedness_G(c6, t);
      last = std::abs(g - limit) / limit;
      csv.cell(t).cell(g).cell(limit).cell(last).end_row();
    }
    out["limit"] = limit;
    if (!b.ts.empty()) out["limit_error"] = last;
  }

  std::vector<double> norms;
  {
    CsvWriter csv(dir, "fbi_norms.csv", {"h", "norm", "iterations"});
    for (double h : b.hs) {
      const auto g = distorted_norm_grids(b.kappa, h);
      const auto r = operator_norm(distorted_fbi(b.kappa, h, g.grid, g.x));
      norms.push_back(r.norm);
      csv.cell(h).cell(r.norm).cell(r.iterations).end_row();
    }
  }
  if (!norms.empty()) {
    const auto [lo, hi] = std::minmax_element(norms.begin(), norms.end());
    out["norm_variation"] = (*hi - *lo) / *lo;
  }

  if (b.functions > 0) {
    const auto fs = detail::random_packets(b.functions, static_cast<unsigned>(b.seed));
    CsvWriter csv(dir, "fbi_isometry.csv", {"h", "mean_ratio", "spread"});
    json spreads = json::array();
    for (double h : b.hs) {
      const auto g = distorted_analysis_grids(b.kappa, h, -1.3, 1.3, 20.0);
      const auto s = distorted_fbi(b.kappa, h, g.grid, g.x);
      std::vector<double> r;
      for (const auto& f : fs) r.push_back(analysis_ratio(s, detail::packet_samples(f, g.x)));
      const auto [lo, hi] = std::minmax_element(r.begin(), r.end());
      double mean = 0.0;
      for (double v : r) mean += v / static_cast<double>(r.size());
      const double spread = (*hi - *lo) / mean;
      csv.cell(h).cell(mean).cell(spread).end_row();
      spreads.push_back(spread);
    }
    out["isometry_spread"] = spreads;
  }

  if (b.orthogonality) {
    const auto& cf = cfg.operator_field();
    const auto U = phase_space_grid(cf, b.ou_u.nodes(), b.ou_xi.nodes());
    const auto V = phase_space_grid(cf, b.ov_u.nodes(), b.ov_xi.nodes());
    std::vector<double> inv_h, log_norm;
    CsvWriter csv(dir, "fbi_orthogonality.csv", {"h", "norm"});
    for (double h : b.o_h.geometric()) {
      const double v = asymptotic_orthogonality(cf, U, V, h);
      if (!(v > 0.0)) throw NumericError("cross-Gram norm underflowed to zero");
      csv.cell(h).cell(v).end_row();
      inv_h.push_back(1.0 / h);
      log_norm.push_back(std::log(v));
    }
    const auto fit = detail::line_fit(inv_h, log_norm);
    out["orthogonality"] = {{"slope", fit.slope}, {"intercept", fit.intercept}, {"r2", fit.r2}};
  }
  dir.write_json("fbi.json", out);
  return out;
}

inline json cmd_evolve(const RunConfig& cfg, const OutputDir& dir) {
  const auto& b = detail::require_block(cfg.evolve, "evolve");
  const auto& cf = cfg.operator_field();
  if (b.modes.empty()) throw ConfigError("evolve.modes must list at least one (u, xi) pair");
  const DenseOperator op = discretize(cf, b.h, Grid1D::uniform(cf.x_lo(), cf.x_hi(), b.m), cfg.left, cfg.right);
  std::vector<Pseudomode> modes;
  double centre = 0.0;
  for (const auto& [u, xi] : b.modes) {
    modes.push_back(assemble_mode(cf, {u, xi}, b.h, cfg.n, cfg.K, cfg.cutoff));
    centre += u / static_cast<double>(b.modes.size());
  }
  const Matrix a = -op.matrix;
  const FrameMatrix F = negated(build_frame(modes, op));
  const EvolutionBound c = numerical_range_bound(a, F);
  const BoundReport rep = semigroup_bound_check(a, F, c, b.ts);
  {
    CsvWriter csv(dir, "evolve_bound.csv", {"t", "lhs", "bound", "ratio", "ok"});
    for (const auto& r : rep.rows) csv.cell(r.t).cell(r.lhs).cell(r.bound).cell(r.ratio).cell(r.ok ? 1 : 0).end_row();
  }
  const Vector f = op.sample([&](double x) { return cplx(std::exp(-(x - centre) * (x - centre) / 0.125)); });
  bool budget_ok = true;
  {
    CsvWriter csv(dir, "evolve_budget.csv", {"t", "delta", "error", "span_term", "defect_term", "budget", "ok"});
    for (double t : b.ts)
      for (double delta : b.deltas) {
        const auto r = evolve_approx(a, F, c, f, delta, t);
        budget_ok = budget_ok && r.ok;
        csv.cell(t).cell(delta).cell(r.error).cell(r.span_term).cell(r.defect_term).cell(r.budget).cell(r.ok ? 1 : 0).end_row();
      }
  }
  json out{{"operator", cfg.operator_name}, {"h", b.h},         {"m", b.m},
           {"columns", F.cols()},           {"epsilon", c.epsilon}, {"gamma", c.gamma},
           {"M", c.M},                      {"bound_ok", rep.all_ok()}, {"budget_ok", budget_ok}};
  dir.write_json("evolve.json", out);
  return out;
}

using Command = std::function<json(const RunConfig&, const OutputDir&)>;

inline const std::map<std::string, Command>& commands() {
  static const std::map<std::string, Command> table{
      {"region", cmd_region}, {"mode", cmd_mode},     {"boundary", cmd_boundary}, {"sweep", cmd_sweep},
      {"psgrid", cmd_psgrid}, {"fbi", cmd_fbi},       {"evolve", cmd_evolve}};
  return table;
}

}  // namespace pseudomode::cli
