#include <cmath>
#include <cstdio>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "cdpp/diagnostics.hpp"
#include "cdpp/dual_sampler.hpp"
#include "cdpp/error.hpp"
#include "cdpp/exact_reference.hpp"
#include "cdpp/io.hpp"
#include "cdpp/kernel.hpp"
#include "cdpp/parallel.hpp"
#include "cdpp/repulsive_mixture.hpp"
#include "cdpp/schur_gibbs.hpp"

using namespace cdpp;
using nlohmann::json;

namespace {

struct Common {
  std::uint64_t seed = 0;
  std::string out;
  int threads = 1;

  Exec exec() const { return threads > 1 ? Exec::parallel : Exec::serial; }
  json echo() const { return {{"seed", seed}, {"out", out}, {"threads", threads}}; }
};

void add_common(CLI::App* cmd, Common& c, bool out_required = true) {
  cmd->add_option("--seed", c.seed, "RNG seed")->capture_default_str();
  auto* o = cmd->add_option("--out", c.out, "output path");
  if (out_required) o->required();
  cmd->add_option("--threads", c.threads, "worker threads")->capture_default_str();
}

std::string points_header(const std::string& key, int d) {
  std::string h = key + ",point_index";
  for (int j = 1; j <= d; ++j) h += ",x" + std::to_string(j);
  return h + "\n";
}

void append_points(std::string& csv, long id, const SampleSet& s) {
  for (std::size_t i = 0; i < s.size(); ++i) {
    csv += std::to_string(id) + "," + std::to_string(i);
    for (Eigen::Index j = 0; j < s[i].size(); ++j) csv += "," + format_double(s[i][j]);
    csv += "\n";
  }
}

std::vector<double> column_values(const CsvTable& t, const std::string& name, const std::string& path) {
  const int c = t.column(name);
  if (c < 0) throw IoError("'" + path + "' has no column '" + name + "'");
  std::vector<double> v;
  v.reserve(t.rows.size());
  for (const auto& r : t.rows) v.push_back(r[c]);
  return v;
}

// ---- sample

struct SampleArgs {
  Common c;
  std::string kernel, method = "nystrom";
  int rank = 0;
  std::optional<int> k;
  int n_sets = 1;
};

void run_sample(const SampleArgs& a) {
  set_threads(a.c.threads);
  const KernelSpec kern = KernelSpec::from_json(read_json(a.kernel));
  RngStream rng(a.c.seed);
  RngStream map_rng = rng.split(0);
  const DualSampler sampler(build_map(kern, parse_map_kind(a.method), a.rank, map_rng));
  std::vector<SampleSet> sets(a.n_sets);
  parallel_for(static_cast<std::size_t>(a.n_sets), a.c.exec(), [&](std::size_t i) {
    RngStream r = rng.split(1 + i);
    sets[i] = sampler.sample(r, a.k);
  });
  std::string csv = points_header("set_id", kern.dim());
  for (int i = 0; i < a.n_sets; ++i) append_points(csv, i, sets[i]);
  write_text(a.c.out, csv);
  json cfg = a.c.echo();
  cfg.update({{"kernel", kern.to_json()}, {"method", a.method}, {"rank", a.rank}, {"n_sets", a.n_sets}});
  cfg["k"] = a.k ? json(*a.k) : json(nullptr);
  write_sidecar(a.c.out, "sample", cfg);
}

// ---- tv

struct TvArgs {
  Common c;
  int d = 1, k = 10, rank = 50, n_samples = 100, replicates = 1;
  double rho2 = 1.0;
  std::vector<double> sigma2{0.1, 0.5, 1.0};
  std::vector<std::string> methods{"nystrom", "rff"};
};

void run_tv(const TvArgs& a) {
  set_threads(a.c.threads);
  if (a.replicates < 1) throw ConfigError("tv: replicates must be positive");
  RngStream rng(a.c.seed);
  std::string csv = "d,rho2,sigma2,method,rank,k,replicates,n_samples,n_excluded,tv_mean,tv_stderr\n";
  json rows = json::array();
  std::uint64_t stream = 0;
  for (double s2 : a.sigma2) {
    const KernelSpec kern = gaussian_kernel(a.d, a.rho2, s2);
    for (const auto& m : a.methods) {
      const MapKind kind = parse_map_kind(m);
      std::vector<TvEstimate> reps;
      for (int r = 0; r < a.replicates; ++r) {
        RngStream rr = rng.split(stream++);
        reps.push_back(estimate_tv(kern, kind, a.rank, a.k, a.n_samples, rr, a.c.exec()));
      }
      double mean = 0.0;
      int used = 0, excluded = 0;
      for (const auto& e : reps) {
        mean += e.mean / reps.size();
        used += e.n_samples;
        excluded += e.n_excluded;
      }
      double se = reps.front().std_error;
      if (reps.size() > 1) {
        double ss = 0.0;
        for (const auto& e : reps) ss += (e.mean - mean) * (e.mean - mean);
        se = std::sqrt(ss / (reps.size() - 1) / reps.size());
      }
      csv += std::to_string(a.d) + "," + format_double(a.rho2) + "," + format_double(s2) + "," + m + "," +
             std::to_string(a.rank) + "," + std::to_string(a.k) + "," + std::to_string(a.replicates) + "," +
             std::to_string(used) + "," + std::to_string(excluded) + "," + format_double(mean) + "," +
             format_double(se) + "\n";
    }
  }
  write_text(a.c.out, csv);
  json cfg = a.c.echo();
  cfg.update({{"d", a.d},
              {"rho2", a.rho2},
              {"sigma2", a.sigma2},
              {"methods", a.methods},
              {"k", a.k},
              {"rank", a.rank},
              {"n_samples", a.n_samples},
              {"replicates", a.replicates}});
  write_sidecar(a.c.out, "tv", cfg);
}

// ---- gibbs-kdpp

struct GibbsArgs {
  Common c;
  std::string kernel;
  int k = 0, chains = 1;
  long iterations = 0, burn_in = 0, thin = 1;
};

void run_gibbs(const GibbsArgs& a) {
  set_threads(a.c.threads);
  const KernelSpec kern = KernelSpec::from_json(read_json(a.kernel));
  RngStream rng(a.c.seed);
  const auto chains = run_gibbs_chains(kern, a.k, a.chains, a.iterations, a.burn_in, a.thin, rng, a.c.exec());
  std::string csv = "chain," + points_header("cycle", kern.dim());
  for (std::size_t c = 0; c < chains.size(); ++c) {
    for (std::size_t t = 0; t < chains[c].size(); ++t) {
      std::string part;
      append_points(part, static_cast<long>(t), chains[c][t]);
      std::istringstream lines(part);
      std::string line;
      while (std::getline(lines, line)) csv += std::to_string(c) + "," + line + "\n";
    }
  }
  write_text(a.c.out, csv);
  json cfg = a.c.echo();
  cfg.update({{"kernel", kern.to_json()},
              {"k", a.k},
              {"chains", a.chains},
              {"iterations", a.iterations},
              {"burn_in", a.burn_in},
              {"thin", a.thin}});
  write_sidecar(a.c.out, "gibbs-kdpp", cfg);
}

// ---- diagnose

struct DiagnoseArgs {
  Common c;
  std::string chain, ess_rule = "verbatim";
  bool sort_points = false;
};

void run_diagnose(const DiagnoseArgs& a) {
  const CsvTable t = read_csv(a.chain);
  const int cc = t.column("chain");
  std::map<long, CsvTable> by_chain;
  for (const auto& r : t.rows) {
    auto& sub = by_chain[cc < 0 ? 0 : static_cast<long>(r[cc])];
    sub.header = t.header;
    sub.rows.push_back(r);
  }
  if (by_chain.empty()) throw IoError("'" + a.chain + "' has no rows");
  EssTruncation rule;
  if (a.ess_rule == "verbatim")
    rule = EssTruncation::verbatim;
  else if (a.ess_rule == "geyer")
    rule = EssTruncation::geyer;
  else
    throw ConfigError("unknown ESS rule '" + a.ess_rule + "' (expected verbatim or geyer)");
  json per = json::array();
  double m_sum = 0.0, a_sum = 0.0;
  for (auto& [id, sub] : by_chain) {
    auto sets = sets_from_table(sub, "cycle");
    if (a.sort_points) sets = sort_matched(sets);
    const double m = average_movement(sets);
    const double al = ess_alpha(sets, rule);
    per.push_back({{"chain", id}, {"m", m}, {"alpha", al}, {"cycles", sets.size()}});
    m_sum += m;
    a_sum += al;
  }
  const double n = static_cast<double>(by_chain.size());
  json res{{"m", m_sum / n}, {"alpha", a_sum / n}, {"chains", per}};
  std::cout << "m " << format_double(m_sum / n) << "\nalpha " << format_double(a_sum / n) << "\n";
  if (!a.c.out.empty()) {
    write_text(a.c.out, res.dump(2) + "\n");
    json cfg = a.c.echo();
    cfg.update({{"chain", a.chain}, {"ess_rule", a.ess_rule}, {"sort_points", a.sort_points}});
    write_sidecar(a.c.out, "diagnose", cfg);
  }
}

// ---- mixture

struct MixtureArgs {
  Common c;
  std::string data, heldout, synthetic, prior = "iid";
  int n = 100, heldout_n = 100;
  MixtureModelSpec spec;
  long iterations = 10000, burn_in = 5000, thin = 10;
};

void run_mixture(MixtureArgs a) {
  a.spec.prior = parse_prior_kind(a.prior);
  RngStream rng(a.c.seed);
  std::vector<double> train, held;
  std::vector<int> labels;
  bool have_labels = false, have_held = false;
  if (!a.synthetic.empty()) {
    if (!a.data.empty()) throw ConfigError("mixture: give either --data or --synthetic");
    RngStream g = rng.split(0);
    const SyntheticData all = synthetic_mixture(parse_synthetic_kind(a.synthetic), a.n + a.heldout_n, g);
    train.assign(all.y.begin(), all.y.begin() + a.n);
    labels.assign(all.labels.begin(), all.labels.begin() + a.n);
    held.assign(all.y.begin() + a.n, all.y.end());
    have_labels = true;
    have_held = a.heldout_n > 0;
  } else {
    if (a.data.empty()) throw ConfigError("mixture: need --data or --synthetic");
    train = column_values(read_csv(a.data), "y", a.data);
    if (!a.heldout.empty()) {
      held = column_values(read_csv(a.heldout), "y", a.heldout);
      have_held = true;
    }
  }
  const Standardizer scale = Standardizer::fit(train);
  const std::vector<double> ys = scale.apply(train);
  RngStream chain_rng = rng.split(1);
  const auto chain = run_mog(ys, a.spec, a.iterations, a.burn_in, a.thin, chain_rng);
  const MixtureMetrics m =
      compute_metrics(chain, ys, have_labels ? &labels : nullptr, have_held ? &held : nullptr, scale);

  std::string csv = "iter,k,pi_k,mu_k,sigma2_k\n";
  for (std::size_t t = 0; t < chain.size(); ++t)
    for (int k = 0; k < a.spec.K; ++k)
      csv += std::to_string(t) + "," + std::to_string(k + 1) + "," + format_double(chain[t].pi[k]) + "," +
             format_double(chain[t].mu[k]) + "," + format_double(chain[t].sigma2[k]) + "\n";
  write_text(a.c.out, csv);

  json metrics{{"membership_entropy", m.membership_entropy}};
  metrics["clustering_error"] = m.clustering_error ? json(*m.clustering_error) : json(nullptr);
  metrics["heldout_loglik"] = m.heldout_loglik ? json(*m.heldout_loglik) : json(nullptr);
  std::cout << metrics.dump(2) << "\n";
  json cfg = a.c.echo();
  cfg.update({{"data", a.data},
              {"heldout", a.heldout},
              {"synthetic", a.synthetic},
              {"n", a.n},
              {"heldout_n", a.heldout_n},
              {"prior", a.prior},
              {"K", a.spec.K},
              {"alpha", a.spec.alpha},
              {"a_sigma", a.spec.a_sigma},
              {"b_sigma", a.spec.b_sigma},
              {"mu0", a.spec.mu0},
              {"sigma0_2", a.spec.sigma0_2},
              {"gamma0_2", a.spec.gamma0_2},
              {"iterations", a.iterations},
              {"burn_in", a.burn_in},
              {"thin", a.thin}});
  write_sidecar(a.c.out, "mixture", cfg,
                {{"metrics", metrics}, {"standardization", {{"mean", scale.mean}, {"sd", scale.sd}}}});
}

// ---- coverage

struct CoverageArgs {
  Common c;
  std::string reference, synthetic, method = "nystrom";
  int n_reference = 1000, d = 10, k = 50, rank = 100, runs = 10, grid = 200;
  double fraction = 0.9;
};

void run_coverage(const CoverageArgs& a) {
  set_threads(a.c.threads);
  RngStream rng(a.c.seed);
  SampleSet ref;
  if (!a.synthetic.empty()) {
    if (a.synthetic != "rare-mode") throw ConfigError("unknown synthetic dataset '" + a.synthetic + "' (expected rare-mode)");
    RngStream g = rng.split(0);
    ref = rare_mode_data(a.n_reference, a.d, g);
  } else {
    if (a.reference.empty()) throw ConfigError("coverage: need --reference or --synthetic");
    const CsvTable t = read_csv(a.reference);
    for (const auto& r : t.rows) ref.push_back(Eigen::Map<const Eigen::VectorXd>(r.data(), r.size()));
  }
  const KernelSpec kern = coverage_kernel(ref);
  const MapKind kind = parse_map_kind(a.method);
  std::vector<CoverageRun> runs(a.runs);
  parallel_for(static_cast<std::size_t>(a.runs), a.c.exec(), [&](std::size_t r) {
    RngStream rr = rng.split(1 + r);
    const SampleSet x = sample_kdpp(kern, kind, a.rank, a.k, rr);
    runs[r] = coverage_experiment(ref, x, rr);
  });
  const CoverageCurves cur = coverage_curves(runs, a.grid);
  std::string csv = "epsilon,coverage_dpp,coverage_iid\n";
  for (std::size_t g = 0; g < cur.epsilon.size(); ++g)
    csv += format_double(cur.epsilon[g]) + "," + format_double(cur.dpp[g]) + "," + format_double(cur.iid[g]) + "\n";
  write_text(a.c.out, csv);
  json per = json::array();
  int wins = 0;
  for (const auto& r : runs) {
    const double ed = epsilon_for_coverage(r.nearest_dpp, a.fraction);
    const double ei = epsilon_for_coverage(r.nearest_iid, a.fraction);
    wins += ed < ei;
    per.push_back({{"epsilon_dpp", ed}, {"epsilon_iid", ei}});
  }
  json cfg = a.c.echo();
  cfg.update({{"reference", a.reference},
              {"synthetic", a.synthetic},
              {"n_reference", a.n_reference},
              {"d", a.d},
              {"k", a.k},
              {"rank", a.rank},
              {"method", a.method},
              {"runs", a.runs},
              {"grid", a.grid},
              {"fraction", a.fraction}});
  write_sidecar(a.c.out, "coverage", cfg, {{"runs", per}, {"dpp_wins", wins}});
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Continuous DPP sampling and evaluation"};
  app.require_subcommand(1);

  SampleArgs sa;
  auto* sample = app.add_subcommand("sample", "draw sets with the low-rank dual sampler");
  add_common(sample, sa.c);
  sample->add_option("--kernel", sa.kernel, "kernel JSON")->required();
  sample->add_option("--method", sa.method, "rff or nystrom")->capture_default_str();
  sample->add_option("--rank", sa.rank, "approximation rank D")->required();
  sample->add_option("--k", sa.k, "set size; omit for a variable-size DPP");
  sample->add_option("--n-sets", sa.n_sets, "number of sets")->capture_default_str();

  TvArgs ta;
  auto* tv = app.add_subcommand("tv", "total-variation sweep against the exact Gaussian k-DPP");
  add_common(tv, ta.c);
  tv->add_option("--d", ta.d)->capture_default_str();
  tv->add_option("--rho2", ta.rho2)->capture_default_str();
  tv->add_option("--sigma2", ta.sigma2)->delimiter(',')->capture_default_str();
  tv->add_option("--k", ta.k)->capture_default_str();
  tv->add_option("--rank", ta.rank)->capture_default_str();
  tv->add_option("--methods", ta.methods)->delimiter(',')->capture_default_str();
  tv->add_option("--n-samples", ta.n_samples)->capture_default_str();
  tv->add_option("--replicates", ta.replicates)->capture_default_str();

  GibbsArgs ga;
  auto* gibbs = app.add_subcommand("gibbs-kdpp", "Schur-complement Gibbs chains for a k-DPP");
  add_common(gibbs, ga.c);
  gibbs->add_option("--kernel", ga.kernel, "kernel JSON")->required();
  gibbs->add_option("--k", ga.k)->required();
  gibbs->add_option("--iterations", ga.iterations, "single-point updates per chain")->required();
  gibbs->add_option("--burn-in", ga.burn_in)->capture_default_str();
  gibbs->add_option("--thin", ga.thin)->capture_default_str();
  gibbs->add_option("--chains", ga.chains)->capture_default_str();

  DiagnoseArgs da;
  auto* diag = app.add_subcommand("diagnose", "average movement and ESS factor of Gibbs chains");
  add_common(diag, da.c, false);
  diag->add_option("--chain", da.chain, "chain CSV from gibbs-kdpp")->required();
  diag->add_option("--ess-rule", da.ess_rule, "verbatim or geyer")->capture_default_str();
  diag->add_flag("--sort-points", da.sort_points, "match points across cycles by rank (1-d)");

  MixtureArgs ma;
  auto* mix = app.add_subcommand("mixture", "Gaussian mixture with i.i.d. or DPP prior on the means");
  add_common(mix, ma.c);
  mix->add_option("--data", ma.data, "CSV with a 'y' column");
  mix->add_option("--heldout", ma.heldout, "held-out CSV with a 'y' column");
  mix->add_option("--synthetic", ma.synthetic, "poor-sep or well-sep");
  mix->add_option("--n", ma.n, "synthetic training size")->capture_default_str();
  mix->add_option("--heldout-n", ma.heldout_n, "synthetic held-out size")->capture_default_str();
  mix->add_option("--prior", ma.prior, "iid or dpp")->capture_default_str();
  mix->add_option("--K", ma.spec.K)->capture_default_str();
  mix->add_option("--alpha", ma.spec.alpha)->capture_default_str();
  mix->add_option("--a-sigma", ma.spec.a_sigma)->capture_default_str();
  mix->add_option("--b-sigma", ma.spec.b_sigma)->capture_default_str();
  mix->add_option("--mu0", ma.spec.mu0)->capture_default_str();
  mix->add_option("--sigma0-2", ma.spec.sigma0_2)->capture_default_str();
  mix->add_option("--gamma0-2", ma.spec.gamma0_2)->capture_default_str();
  mix->add_option("--iterations", ma.iterations)->capture_default_str();
  mix->add_option("--burn-in", ma.burn_in)->capture_default_str();
  mix->add_option("--thin", ma.thin)->capture_default_str();

  CoverageArgs ca;
  auto* cov = app.add_subcommand("coverage", "coverage-rate curves of a k-DPP sample and a matched Gaussian");
  add_common(cov, ca.c);
  cov->add_option("--reference", ca.reference, "reference points CSV (one column per coordinate)");
  cov->add_option("--synthetic", ca.synthetic, "rare-mode");
  cov->add_option("--n-reference", ca.n_reference)->capture_default_str();
  cov->add_option("--d", ca.d)->capture_default_str();
  cov->add_option("--k", ca.k)->capture_default_str();
  cov->add_option("--rank", ca.rank)->capture_default_str();
  cov->add_option("--method", ca.method)->capture_default_str();
  cov->add_option("--runs", ca.runs)->capture_default_str();
  cov->add_option("--grid", ca.grid)->capture_default_str();
  cov->add_option("--fraction", ca.fraction)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (*sample) run_sample(sa);
    else if (*tv) run_tv(ta);
    else if (*gibbs) run_gibbs(ga);
    else if (*diag) run_diagnose(da);
    else if (*mix) run_mixture(ma);
    else if (*cov) run_coverage(ca);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const NumericError& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return 2;
  } catch (const IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return 3;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
