// Replicated experiments: Gibbs mixing, mixture entropy and coverage.

#include <algorithm>
#include <cmath>
#include <vector>

#include "cdpp/diagnostics.hpp"
#include "cdpp/dual_sampler.hpp"
#include "cdpp/repulsive_mixture.hpp"
#include "cdpp/schur_gibbs.hpp"
#include "criteria.hpp"

namespace acceptance {
namespace {

using namespace cdpp;

KernelSpec box_kernel(double sigma2) {
  SimilaritySpec s;
  s.cov = Eigen::MatrixXd::Constant(1, 1, sigma2);
  return KernelSpec({QualityKind::uniform, {}, {}}, s,
                    Domain{true, Eigen::VectorXd::Constant(1, -0.5), Eigen::VectorXd::Constant(1, 0.5)});
}

struct Summary {
  double mean, lo, hi;
};

/// Mean with the 2.5% and 97.5% empirical quantiles.
Summary summarize(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  double s = 0.0;
  for (double x : v) s += x;
  auto q = [&](double p) { return v[static_cast<std::size_t>(std::lround(p * (v.size() - 1)))]; };
  return {s / v.size(), q(0.025), q(0.975)};
}

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / v.size();
}

double sd_of(const std::vector<double>& v) {
  const double m = mean_of(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / (v.size() - 1));
}

}  // namespace

Verdict gibbs_mixing() {
  struct Setting {
    const char* name;
    double sigma2, m_lo, m_hi, a_lo, a_hi;
  };
  const Setting settings[] = {{"high repulsion", 0.01, 0.07, 0.08, 0.31, 0.45},
                              {"low repulsion", 0.001, 0.10, 0.11, 0.80, 1.00}};
  RngStream rng(1006);
  bool pass = true;
  std::string summary;
  double alpha_high = 0.0, alpha_low = 0.0;
  for (const auto& s : settings) {
    const KernelSpec kern = box_kernel(s.sigma2);
    RngStream chain_rng = rng.split(s.sigma2 < 0.005 ? 1 : 0);
    const auto chains = run_gibbs_chains(kern, 15, 100, 3000, 1500, 15, chain_rng, Exec::parallel);
    std::vector<double> m, alpha, alpha_geyer, m_sorted;
    for (const auto& c : chains) {
      m.push_back(average_movement(c));
      alpha.push_back(ess_alpha(c));
      alpha_geyer.push_back(ess_alpha(c, EssTruncation::geyer));
      m_sorted.push_back(average_movement(sort_matched(c)));
    }
    const Summary sm = summarize(m), sa = summarize(alpha), sg = summarize(alpha_geyer), ss = summarize(m_sorted);
    note("%s (sigma2=%g), %zu chains of %zu cycles:", s.name, s.sigma2, chains.size(), chains[0].size());
    note("  m     %.4f  (2.5%%..97.5%% over chains %.4f..%.4f)  target [%.2f, %.2f]", sm.mean, sm.lo, sm.hi, s.m_lo,
         s.m_hi);
    note("  alpha %.4f  (%.4f..%.4f)  target [%.2f, %.2f]", sa.mean, sa.lo, sa.hi, s.a_lo, s.a_hi);
    note("  alpha with Geyer truncation %.4f (%.4f..%.4f); m with rank-matched points %.4f", sg.mean, sg.lo, sg.hi,
         ss.mean);
    const bool ok = sm.mean >= s.m_lo && sm.mean <= s.m_hi && sa.mean >= s.a_lo && sa.mean <= s.a_hi;
    pass = pass && ok;
    summary += format("%s%s m %.3f in [%.2f,%.2f]: %s, alpha %.3f in [%.2f,%.2f]: %s", summary.empty() ? "" : "; ",
                      s.name, sm.mean, s.m_lo, s.m_hi, sm.mean >= s.m_lo && sm.mean <= s.m_hi ? "yes" : "no", sa.mean,
                      s.a_lo, s.a_hi, sa.mean >= s.a_lo && sa.mean <= s.a_hi ? "yes" : "no");
    (s.sigma2 < 0.005 ? alpha_low : alpha_high) = sa.mean;
  }
  note("mixing ordering: alpha(low repulsion) %.3f %s alpha(high repulsion) %.3f", alpha_low,
       alpha_low > alpha_high ? ">" : "<=", alpha_high);

  // i.i.d. benchmark from the Nystrom-approximated 15-DPP, for reference.
  for (double sigma2 : {0.01, 0.001}) {
    RngStream map_rng = rng.split(10);
    const DualSampler sampler(build_nystrom(box_kernel(sigma2), 100, map_rng));
    std::vector<double> m, m_sorted, alpha;
    for (int c = 0; c < 20; ++c) {
      RngStream cr = rng.split(20 + c);
      std::vector<SampleSet> chain;
      for (int t = 0; t < 100; ++t) chain.push_back(sampler.sample(cr, 15));
      m.push_back(average_movement(chain));
      m_sorted.push_back(average_movement(sort_matched(chain)));
      alpha.push_back(ess_alpha(chain));
    }
    note("i.i.d. Nystrom (D=100) benchmark, sigma2=%g, 20 chains: m %.4f (rank-matched %.4f), alpha %.4f", sigma2,
         mean_of(m), mean_of(m_sorted), mean_of(alpha));
  }
  return {pass, summary};
}

Verdict mixture_entropy() {
  const int seeds = 3;
  MixtureModelSpec base;
  std::vector<double> ent_iid, ent_dpp, ll_iid, ll_dpp;
  for (int seed = 1; seed <= seeds; ++seed) {
    RngStream rng(seed);
    RngStream data_rng = rng.split(0), held_rng = rng.split(1);
    const SyntheticData train = synthetic_mixture(SyntheticKind::poor_sep, 100, data_rng);
    const SyntheticData held = synthetic_mixture(SyntheticKind::poor_sep, 100, held_rng);
    const Standardizer scale = Standardizer::fit(train.y);
    const std::vector<double> y = scale.apply(train.y);
    for (PriorKind prior : {PriorKind::iid, PriorKind::dpp}) {
      MixtureModelSpec spec = base;
      spec.prior = prior;
      RngStream chain_rng = rng.split(prior == PriorKind::iid ? 2 : 3);
      const auto chain = run_mog(y, spec, 10000, 5000, 10, chain_rng);
      const MixtureMetrics m = compute_metrics(chain, y, &train.labels, &held.y, scale);
      note("seed %d %-3s: entropy %.4f, clustering error %.3f, held-out log-likelihood %.4f", seed,
           prior_kind_name(prior), m.membership_entropy, *m.clustering_error, *m.heldout_loglik);
      (prior == PriorKind::iid ? ent_iid : ent_dpp).push_back(m.membership_entropy);
      (prior == PriorKind::iid ? ll_iid : ll_dpp).push_back(*m.heldout_loglik);
    }
  }
  const double ei = mean_of(ent_iid), ed = mean_of(ent_dpp);
  const double half_i = 1.96 * sd_of(ll_iid) / std::sqrt(seeds), half_d = 1.96 * sd_of(ll_dpp) / std::sqrt(seeds);
  const double li = mean_of(ll_iid), ld = mean_of(ll_dpp);
  const bool overlap = li - half_i <= ld + half_d && ld - half_d <= li + half_i;
  const bool order = ed < ei - 0.2;
  note("held-out 95%% intervals: IID [%.4f, %.4f], DPP [%.4f, %.4f]", li - half_i, li + half_i, ld - half_d,
       ld + half_d);
  return {order && overlap, format("entropy DPP %.3f vs IID %.3f (gap %.3f, need > 0.2): %s; held-out intervals "
                                   "overlap: %s",
                                   ed, ei, ei - ed, order ? "yes" : "no", overlap ? "yes" : "no")};
}

Verdict coverage_property() {
  const int runs = 100;
  RngStream rng(1008);
  RngStream ref_rng = rng.split(0);
  std::vector<int> rare;
  const SampleSet ref = rare_mode_data(1000, 10, ref_rng, &rare);
  const KernelSpec kern = coverage_kernel(ref);
  int wins = 0;
  std::vector<double> eps_dpp, eps_iid;
  for (int r = 0; r < runs; ++r) {
    RngStream rr = rng.split(1 + r);
    const SampleSet x = sample_kdpp(kern, MapKind::nystrom, 100, 50, rr);
    const CoverageRun run = coverage_experiment(ref, x, rr, Exec::parallel);
    const double ed = epsilon_for_coverage(run.nearest_dpp, 0.9), ei = epsilon_for_coverage(run.nearest_iid, 0.9);
    eps_dpp.push_back(ed);
    eps_iid.push_back(ei);
    wins += ed < ei;
  }
  int n_rare = 0;
  for (int v : rare) n_rare += v;
  note("reference: 1000 points in d=10, %d in the rare mode", n_rare);
  note("epsilon for 90%% coverage: DPP mean %.4f, i.i.d. mean %.4f", mean_of(eps_dpp), mean_of(eps_iid));
  return {wins >= 90, format("DPP smaller in %d of %d paired runs (need >= 90)", wins, runs)};
}

}  // namespace acceptance
