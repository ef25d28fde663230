#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "rangewalk/coarse_grain.hpp"
#include "rangewalk/dv_bounds.hpp"
#include "rangewalk/errors.hpp"
#include "rangewalk/interpolation.hpp"
#include "rangewalk/sampler.hpp"
#include "rangewalk/shape_analysis.hpp"
#include "rangewalk/spectral.hpp"
#include "rangewalk/variational.hpp"

namespace rangewalk::cli {

namespace fs = std::filesystem;

namespace {

Json point_json(const Point& p, int d) {
  Json a = Json::array();
  for (int i = 0; i < d; ++i) a.push_back(p[i]);
  return a;
}

Json site_json(const Site& s, int d) {
  Json a = Json::array();
  for (int i = 0; i < d; ++i) a.push_back(s[i]);
  return a;
}

long long int_pow(long long base, int exp) {
  long long r = 1;
  for (int i = 0; i < exp; ++i) r *= base;
  return r;
}

// n with n^(d+2) == N, or 0
long long scale_of(long long N, int d) {
  const long long guess = std::llround(std::pow(double(N), 1.0 / (d + 2)));
  for (long long n = std::max(1LL, guess - 1); n <= guess + 1; ++n)
    if (int_pow(n, d + 2) == N) return n;
  return 0;
}

WalkPath load_walk(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot read walk snapshot " + path.string());
  return read_snapshot(in);
}

// ---------------------------------------------------------------- constants

void cmd_constants(const Config& cfg, RunContext& ctx) {
  const int only = int(cfg.integer("d"));
  std::vector<Json> out;
  for (int d = 1; d <= kMaxDim; ++d) {
    if (only != 0 && d != only) continue;
    const BallSpectrum s = continuum_constants(d);
    out.push_back(ctx.stamp({{"d", d}, {"lambda", s.lambda}, {"omega", s.omega}, {"rho", s.rho}, {"chi", s.chi}}));
  }
  if (out.empty()) throw InvalidInput("d must lie in 1.." + std::to_string(kMaxDim));
  ctx.write_jsonl("constants.jsonl", out);
}

// ---------------------------------------------------------------- sample

void cmd_sample(const Config& cfg, RunContext& ctx) {
  const int d = int(cfg.integer("d"));
  check_dim(d);
  const long long n = cfg.integer("n"), Nkey = cfg.integer("N");
  if ((n > 0) == (Nkey > 0)) throw UsageError("give exactly one of n and N");
  const long long N = n > 0 ? int_pow(n, d + 2) : Nkey;
  if (N > (1LL << 30)) throw Infeasible("walk length n^(d+2) too large");

  ChainConfig base;
  base.d = d;
  base.N = int(N);
  base.beta = cfg.real("beta");
  base.sweeps = cfg.integer("sweeps");
  base.burn_in = cfg.integer("burn_in");
  base.thinning = cfg.integer("thinning");
  base.mix.p = {cfg.real("mix_single"), cfg.real("mix_block"), cfg.real("mix_pivot"), cfg.real("mix_fiber"),
                cfg.real("mix_shuffle")};
  base.validate();
  const long long chains = cfg.integer("chains");
  const long long every = cfg.integer("snapshot_every");
  if (chains < 1) throw InvalidInput("chains must be positive");
  if (every < 0) throw InvalidInput("snapshot_every must be nonnegative");

  struct Snapshot {
    std::string name, body;
  };
  std::vector<std::vector<Json>> records(static_cast<std::size_t>(chains));
  std::vector<std::vector<Snapshot>> snaps(static_cast<std::size_t>(chains));
  ctx.executor()(std::size_t(chains), [&](std::size_t c) {
    ChainConfig cc = base;
    cc.seed = derive_seed(cfg.seed(), c);
    long count = 0;
    run_chain(cc, [&](const WalkPath& w, const SampleRecord& r) {
      Json rec = ctx.stamp({{"chain", c}, {"sweep", r.sweep}, {"N", N}, {"range", r.range}, {"energy", r.energy}});
      if (every > 0 && count % every == 0) {
        std::ostringstream os;
        write_snapshot(os, w);
        const std::string name = "snapshots/chain" + std::to_string(c) + "_sweep" + std::to_string(r.sweep) + ".walk";
        snaps[c].push_back({name, os.str()});
        rec["snapshot"] = name;
      }
      ++count;
      records[c].push_back(std::move(rec));
      return true;
    });
  });
  std::vector<Json> all;
  for (std::size_t c = 0; c < records.size(); ++c) {
    for (auto& s : snaps[c]) ctx.write_atomic(s.name, s.body);
    for (auto& r : records[c]) all.push_back(std::move(r));
  }
  ctx.write_jsonl("sample.jsonl", all);
}

// ---------------------------------------------------------------- zn

void cmd_zn(const Config& cfg, RunContext& ctx) {
  const int d = int(cfg.integer("d"));
  const long long N = cfg.integer("N");
  const double beta = cfg.real("beta");
  const std::string mode = cfg.text("mode");
  Json rec{{"d", d}, {"N", N}, {"beta", beta}, {"mode", mode}};
  if (mode == "exact") {
    const double z = exact_partition(d, int(N), beta);
    rec["Z"] = z;
    rec["log_Z"] = std::log(z);
  } else if (mode == "ais") {
    AisOptions opt;
    opt.replicas = int(cfg.integer("replicas"));
    opt.sweeps_per_rung = cfg.integer("sweeps_per_rung");
    opt.seed = cfg.seed();
    const auto schedule = geometric_schedule(int(cfg.integer("rungs")), beta, cfg.real("first_beta"));
    const AisResult r = ais_partition(d, int(N), schedule, opt);
    rec["Z"] = r.estimate;
    rec["se"] = r.se;
    rec["log_Z"] = r.log_estimate;
    rec["replicas"] = opt.replicas;
    rec["schedule"] = {{"rungs", schedule.size() - 1}, {"first", cfg.real("first_beta")}, {"last", beta},
                       {"spacing", "geometric"}};
  } else {
    throw UsageError("mode must be exact or ais");
  }
  ctx.write_jsonl("zn.jsonl", {ctx.stamp(rec)});
}

// ---------------------------------------------------------------- shape

void cmd_shape(const Config& cfg, RunContext& ctx) {
  const int d = int(cfg.integer("d"));
  check_dim(d);
  const std::string input = cfg.text("input");
  if (input.empty()) throw UsageError("shape needs input = <sample archive>");
  std::ifstream in(input);
  if (!in) throw InvalidInput("cannot read sample archive " + input);
  const fs::path base = fs::path(input).parent_path();
  const double kappa = cfg.real("kappa"), fill_factor = cfg.real("fill_factor"), level = cfg.real("fill_level");

  std::vector<Json> entries;
  std::string line;
  long skipped = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    Json j = Json::parse(line);
    if (j.contains("snapshot")) {
      entries.push_back(std::move(j));
    } else {
      ++skipped;
    }
  }
  if (entries.empty()) throw InvalidInput("archive has no snapshots; run sample with snapshot_every > 0");

  const RadialEigenfunction phi = eigenfunction_profile(d);
  const double rho = continuum_constants(d).rho;
  std::vector<Json> per(entries.size());
  ctx.executor()(entries.size(), [&](std::size_t i) {
    const Json& e = entries[i];
    const WalkPath walk = load_walk(base / e["snapshot"].get<std::string>());
    if (walk.dim() != d) throw InvalidInput("snapshot dimension differs from d");
    const long long N = static_cast<long long>(walk.length());
    const long long n = scale_of(N, d);
    if (n == 0) throw InvalidInput("walk length is not of the form n^(d+2)");
    const ShapeSample s = analyse_walk(walk, ScaleRelation::from_n(d, n), phi, fill_factor);
    Json rec{{"chain", e.value("chain", 0)}, {"sweep", e.value("sweep", 0)}, {"N", N}, {"n", n},
             {"range", s.range}, {"gloc_distance", s.fit.distance}, {"center", point_json(s.fit.center, d)},
             {"gloc_pass", s.gloc_pass}, {"fill", s.fill}, {"filled", s.fill >= level}};
    // bridges in the mesoscopic ball about the fitted centre, when it is big enough
    const long m = std::lround(rho * std::pow(double(n), 1 - 2 * kappa));
    if (m >= 4) {
      Site z;
      for (int k = 0; k < d; ++k) z[k] = int(std::lround(double(n) * s.fit.center[k] - 0.5));
      rec["bridges"] = detect_bridges(walk, meso_ball(d, z, n, kappa)).size();
    } else {
      rec["bridges"] = nullptr;
    }
    per[i] = ctx.stamp(rec);
  });

  std::map<long long, std::vector<const Json*>> by_n;
  for (const Json& r : per) by_n[r["n"].get<long long>()].push_back(&r);
  std::vector<Json> out = per;
  std::map<long, double> mean_range;
  for (const auto& [n, rs] : by_n) {
    std::vector<double> g;
    double range = 0, filled = 0;
    for (const Json* r : rs) {
      g.push_back((*r)["gloc_distance"].get<double>());
      range += (*r)["range"].get<double>();
      filled += (*r)["filled"].get<bool>() ? 1 : 0;
    }
    std::sort(g.begin(), g.end());
    const double median = g.size() % 2 ? g[g.size() / 2] : 0.5 * (g[g.size() / 2 - 1] + g[g.size() / 2]);
    mean_range[long(n)] = range / double(rs.size());
    out.push_back(ctx.stamp({{"kind", "aggregate"}, {"n", n}, {"samples", rs.size()},
                             {"mean_range", mean_range[long(n)]}, {"median_gloc_distance", median},
                             {"filled_fraction", filled / double(rs.size())}}));
  }
  Json fit{{"kind", "fit"}, {"scales", mean_range.size()}, {"skipped_records", skipped}};
  fit["range_exponent"] = mean_range.size() >= 3 ? Json(range_exponent_fit(d, mean_range)) : Json(nullptr);
  out.push_back(ctx.stamp(fit));
  ctx.write_jsonl("shape.jsonl", out);
}

// ---------------------------------------------------------------- coarse

void cmd_coarse(const Config& cfg, RunContext& ctx) {
  const std::string path = cfg.text("walk");
  if (path.empty()) throw UsageError("coarse needs walk = <snapshot>");
  const WalkPath walk = load_walk(path);
  const int d = walk.dim();
  const long long N = static_cast<long long>(walk.length());
  long long n = cfg.integer("n");
  if (n == 0) n = scale_of(N, d);
  if (n < 2 || int_pow(n, d + 2) != N)
    throw Infeasible("walk length must equal n^(d+2) for the budget (N = " + std::to_string(N) + ")");
  const GammaBudget budget = gamma_budget(n, d, cfg.real("c"), cfg.real("kappa"));
  if (!budget.constraints_ok) {
    std::string which;
    for (std::size_t i = 0; i < budget.constraints.size(); ++i)
      if (!budget.constraints[i]) which += (which.empty() ? "" : ",") + std::to_string(i + 1);
    throw Infeasible("exponent constraints violated (numbers " + which + " in order)");
  }
  const PipelineReport r = run_pipeline(local_time(walk), budget);
  Json rec{{"d", d}, {"n", n}, {"N", N}, {"X", r.dec.X.size()}, {"D", r.dec.D.size()}, {"E", r.dec.E.size()},
           {"M", budget.M}, {"energy", r.energy}, {"energy_event", r.energy_event}, {"dist_f", r.dist_f},
           {"dist_L", r.dist_L}, {"gamma0", budget.gamma0}, {"gamma1", budget.gamma1}, {"gamma2", budget.gamma2},
           {"gamma3", budget.gamma3}, {"gamma4", budget.gamma4}, {"sizes_ok", budget.sizes_ok},
           {"within_gamma0", r.within_gamma0}, {"within_gamma1", r.within_gamma1}};
  ctx.write_jsonl("coarse.jsonl", {ctx.stamp(rec)});
}

// ---------------------------------------------------------------- dv-check

void cmd_dv_check(const Config& cfg, RunContext& ctx) {
  const int d = int(cfg.integer("d"));
  check_dim(d);
  const auto sizes = cfg.int_list("sites");
  const int t = int(cfg.integer("t"));
  const double radius = cfg.real("radius");
  const long trials = long(cfg.integer("trials"));
  McOptions opt;
  opt.margin = int(cfg.integer("margin"));
  std::vector<Json> out(sizes.size());
  ctx.executor()(sizes.size(), [&](std::size_t i) {
    const long long k = sizes[i];
    if (k < 1 || k > 64) throw InvalidInput("segment length must lie in 1..64");
    std::vector<Site> sites;
    SiteField g(d);
    // decreasing profile along the segment, total mass t
    const double weight = double(t) / (double(k) * double(k + 1) / 2);
    for (long long j = 0; j < k; ++j) {
      Site s;
      s[0] = int(j);
      sites.push_back(s);
      g.set(s, weight * double(k - j));
    }
    const Domain D(d, sites);
    const GdBound bound = gd_upper_bound(D, g, t, radius, derive_seed(cfg.seed(), 2 * i));
    const OccupationEvent ev = make_event(D, g, t, radius);
    const HittingChain chain = induced_chain(D, int(k) + 2 * opt.margin);
    double inf = 2;
    Site worst;
    for (const Site& x : chain.closure) {
      const double p = chain_event_probability(chain, ev, x).p;
      if (p < inf) {
        inf = p;
        worst = x;
      }
    }
    Rng rng = make_rng(cfg.seed(), 2 * i + 1);
    const McEstimate mc = estimate_occupation(ev, worst, trials, rng, opt);
    Json inst{{"shape", "segment"}, {"sites", k}, {"d", d}, {"t", t}, {"radius", radius}};
    out[i] = ctx.stamp({{"instance", inst}, {"lhs", mc.p}, {"se", mc.se}, {"lhs_chain", inf},
                        {"start", site_json(worst, d)},
                        {"rhs", bound.bound}, {"infimum", bound.infimum}, {"pass", mc.p <= bound.bound + 3 * mc.se}});
  });
  ctx.write_jsonl("dv-check.jsonl", out);
}

// ---------------------------------------------------------------- fk

void cmd_fk(const Config& cfg, RunContext& ctx) {
  const std::string path = cfg.text("voxels");
  if (path.empty()) throw UsageError("fk needs voxels = <file>");
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot read voxel file " + path);
  const VoxelDomain G = read_voxels(in);
  const Asymmetry a = fraenkel_asymmetry(G);
  const FaberKrahnDeficit f = fk_deficit(G);
  Json rec{{"d", G.d},
           {"cells", G.cells.size()},
           {"spacing", G.spacing},
           {"volume", G.volume()},
           {"asymmetry", a.value},
           {"asymmetry_error", a.discretisation},
           {"ball_center", point_json(a.center, G.d)},
           {"ball_radius", a.radius},
           {"lambda", f.lambda},
           {"lambda_coarse", f.lambda_coarse},
           {"lambda_fine", f.lambda_fine},
           {"normalised", f.normalised},
           {"ball_value", f.ball_value},
           {"deficit", f.deficit},
           {"deficit_error", f.error}};
  ctx.write_jsonl("fk.jsonl", {ctx.stamp(rec)});
}

// ---------------------------------------------------------------- ineq-check

void cmd_ineq_check(const Config& cfg, RunContext& ctx) {
  const int d = int(cfg.integer("d"));
  check_dim(d);
  if (d < 3) throw InvalidInput("the Sobolev exponent needs d >= 3");
  const int n = int(cfg.integer("n"));
  const long long fields = cfg.integer("fields");
  const double density = cfg.real("density");
  if (n < 1 || fields < 1 || density <= 0 || density > 1) throw InvalidInput("need n >= 1, fields >= 1, density in (0, 1]");
  const FunctionalConstants k = FunctionalConstants::defaults(d);
  const Domain box = centered_box(d, Site{}, n);
  std::vector<Json> out(static_cast<std::size_t>(fields));
  ctx.executor()(std::size_t(fields), [&](std::size_t i) {
    Rng rng = make_rng(cfg.seed(), i);
    SiteField f(d);
    for (const Site& y : box)
      if (uniform01(rng) < density) f.set(y, uniform01(rng));
    if (f.values().empty()) f.set(box[0], 1.0);
    const double ps = check_poincare_sobolev(f, Site{}, n);
    const double pw = check_poincare_wirtinger(f, Site{}, n);
    const double sob = sobolev_ratio(f);
    Json rec{{"field", i}, {"sites", f.values().size()}, {"poincare_sobolev", ps}, {"sobolev", sob}};
    rec["poincare_wirtinger"] = std::isfinite(pw) ? Json(pw) : Json(nullptr);
    rec["wirtinger_pass"] = !std::isfinite(pw) || pw <= k.c_pw;
    out[i] = ctx.stamp(rec);
  });
  double max_ps = 0, max_pw = 0, max_sob = 0;
  for (const Json& r : out) {
    max_ps = std::max(max_ps, r["poincare_sobolev"].get<double>());
    max_sob = std::max(max_sob, r["sobolev"].get<double>());
    if (!r["poincare_wirtinger"].is_null()) max_pw = std::max(max_pw, r["poincare_wirtinger"].get<double>());
  }
  out.push_back(ctx.stamp({{"kind", "summary"}, {"max_poincare_sobolev", max_ps}, {"max_poincare_wirtinger", max_pw},
                           {"max_sobolev", max_sob}, {"c_pw", k.c_pw}, {"c_ups", k.c_ups}, {"c_ps", k.c_ps}}));
  ctx.write_jsonl("ineq-check.jsonl", out);
}

}  // namespace

void run_command(const Config& cfg, RunContext& ctx) {
  const std::string& s = cfg.subcommand();
  if (s == "constants") return cmd_constants(cfg, ctx);
  if (s == "sample") return cmd_sample(cfg, ctx);
  if (s == "zn") return cmd_zn(cfg, ctx);
  if (s == "shape") return cmd_shape(cfg, ctx);
  if (s == "coarse") return cmd_coarse(cfg, ctx);
  if (s == "dv-check") return cmd_dv_check(cfg, ctx);
  if (s == "fk") return cmd_fk(cfg, ctx);
  if (s == "ineq-check") return cmd_ineq_check(cfg, ctx);
  throw UsageError("unknown subcommand '" + s + "'");
}

}  // namespace rangewalk::cli
