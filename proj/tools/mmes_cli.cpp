#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mmes/experiment.hpp"
#include "mmes/verify.hpp"

namespace {

struct CommonOpts {
  std::string problem = "sphere:dim=128";
  int dim = 0;
  std::uint64_t seed = 1;
  int trials = 0;
  std::vector<std::uint64_t> seeds;
  std::uint64_t max_fes = 0;
  double target = 1e-8;
  std::string restarts = "off";
  int trace_every = 1;
  int mixing_strength = 4;
  std::string base = "gaussian";
  double c_sigma = 0.3;
  double d_sigma = 1.0;
  double alpha_z = 0.05;
  bool sigma_uses_new_w = false;
  int max_rotation_dim = 4096;
  std::string out = "out";
};

void add_common(CLI::App* cmd, CommonOpts& o) {
  cmd->fallthrough(true);
  cmd->add_option("--problem", o.problem,
                  "problem spec, e.g. elli:alpha=6:rot=1:dim=1000");
  cmd->add_option("--dim", o.dim, "overrides the dim field of --problem");
  cmd->add_option("--seed", o.seed, "base seed (decimal 64-bit unsigned)");
  cmd->add_option("--trials", o.trials, "number of trials; seeds are seed..seed+trials-1");
  cmd->add_option("--seeds", o.seeds, "explicit trial seeds")->delimiter(',');
  cmd->add_option("--max-fes", o.max_fes, "evaluation budget per trial");
  cmd->add_option("--target", o.target, "convergence threshold on f");
  cmd->add_option("--restarts", o.restarts, "on|off: restart on stagnation")
      ->check(CLI::IsMember({"on", "off"}));
  cmd->add_option("--trace-every", o.trace_every, "record every K generations");
  cmd->add_option("--mixing-strength", o.mixing_strength, "mixing strength l");
  cmd->add_option("--base", o.base, "base distribution")
      ->check(CLI::IsMember({"gaussian", "student-t", "rademacher"}));
  cmd->add_option("--c-sigma", o.c_sigma, "smoothing rate of the success statistic");
  cmd->add_option("--d-sigma", o.d_sigma, "damping of the sigma update");
  cmd->add_option("--alpha-z", o.alpha_z, "z-test significance level");
  cmd->add_flag("--sigma-uses-new-w", o.sigma_uses_new_w,
                "feed the sigma update the freshly smoothed W");
  cmd->add_option("--max-rotation-dim", o.max_rotation_dim,
                  "refuse rotated problems above this dimension");
  cmd->add_option("--out", o.out, "output directory");
}

mmes::ExperimentSpec to_spec(const CommonOpts& o) {
  mmes::ExperimentSpec spec;
  spec.problem = mmes::ProblemSpec::parse(o.problem);
  if (o.dim > 0) spec.problem.dim = o.dim;
  if (!o.seeds.empty()) {
    spec.seeds = o.seeds;
  } else {
    const int k = o.trials > 0 ? o.trials : 1;
    for (int i = 0; i < k; ++i) spec.seeds.push_back(o.seed + static_cast<std::uint64_t>(i));
  }
  spec.max_fes = o.max_fes != 0 ? o.max_fes
                                : static_cast<std::uint64_t>(spec.problem.dim) * 100000ull;
  spec.target_f = o.target;
  spec.restarts = o.restarts == "on";
  spec.trace_every = o.trace_every;
  spec.mixing_strength = o.mixing_strength;
  spec.base = mmes::base_distribution_from_string(o.base);
  spec.c_sigma = o.c_sigma;
  spec.d_sigma = o.d_sigma;
  spec.alpha_z = o.alpha_z;
  spec.sigma_uses_new_w = o.sigma_uses_new_w;
  spec.max_rotation_dim = o.max_rotation_dim;
  spec.out_dir = o.out;
  return spec;
}

int do_run(const CommonOpts& o) {
  const auto spec = to_spec(o);
  const auto results = mmes::cmd_run(spec);
  std::vector<double> fes;
  for (const auto& r : results) {
    fes.push_back(static_cast<double>(r.fes_to_target));
    std::printf("seed %llu: fes_to_target=%llu final_f=%s status=%s restarts=%d\n",
                static_cast<unsigned long long>(r.seed),
                static_cast<unsigned long long>(r.fes_to_target),
                mmes::format_double(r.final_f).c_str(), mmes::to_string(r.status), r.restarts);
  }
  std::printf("median fes_to_target: %s\n", mmes::format_double(mmes::median(fes)).c_str());
  std::printf("wrote %s\n", (spec.out_dir / "summary.csv").string().c_str());
  return 0;
}

int do_sweep(const CommonOpts& o, const std::vector<int>& l_values,
             const std::vector<long>& dims_in) {
  auto spec = to_spec(o);
  std::vector<Eigen::Index> dims;
  for (long d : dims_in) dims.push_back(d);
  if (dims.empty()) dims.push_back(spec.problem.dim);
  const auto cells = mmes::cmd_sweep_l(spec, l_values, dims);
  for (const auto& c : cells)
    std::printf("l=%d dim=%lld median_fes=%s\n", c.l, static_cast<long long>(c.dim),
                mmes::format_double(c.median_fes).c_str());
  std::printf("wrote %s\n", (spec.out_dir / "sweep_l.csv").string().c_str());
  return 0;
}

int do_timing(const std::vector<long>& dims_in, int gens, std::uint64_t seed, int l,
              const std::string& out) {
  std::vector<Eigen::Index> dims;
  for (long d : dims_in) dims.push_back(d);
  const auto t = mmes::measure_timing(dims, gens, seed, l);
  for (const auto& r : t.rows)
    std::printf("dim=%lld sec_per_eval=%s\n", static_cast<long long>(r.dim),
                mmes::format_double(r.sec_per_eval).c_str());
  if (t.loglog_slope)
    std::printf("loglog_slope=%s\n", mmes::format_double(*t.loglog_slope).c_str());
  std::filesystem::create_directories(out);
  mmes::write_timing_csv(std::filesystem::path(out) / "timing.csv", t);
  std::printf("wrote %s\n", (std::filesystem::path(out) / "timing.csv").string().c_str());
  return 0;
}

int do_verify(std::uint64_t seed, long ns, const std::vector<int>& l_values, long wnull_gens,
              const std::string& out) {
  using namespace mmes;
  bool ok = true;
  const auto check = [&](bool cond, const std::string& what) {
    std::printf("[%s] %s\n", cond ? "PASS" : "FAIL", what.c_str());
    if (!cond) ok = false;
  };

  const auto rows = ladder_metrics(DiagonalLadder::standard(), l_values, ns, seed);
  RngStream wrng(seed, 3);
  const auto wnull = w_null_distribution_test(12, wnull_gens, wrng);

  std::filesystem::create_directories(out);
  const auto csv_path = std::filesystem::path(out) / "verify.csv";
  {
    std::ofstream os(csv_path);
    os << "# mmes distribution verification (ladder scenario m=200 n=1000 c_a=0.004, N_s="
       << ns << ")\n";
    os << "l,NV,SME_4,SME_6,min_kurtosis,KS_stat\n";
    for (const auto& r : rows)
      os << r.l << "," << format_double(r.nv) << "," << format_double(r.sme4) << ","
         << format_double(r.sme6) << "," << format_double(r.min_kurtosis) << ","
         << format_double(wnull.ks) << "\n";
  }

  std::vector<double> products;
  for (const auto& r : rows) {
    check(r.nv >= 0.97 && r.nv <= 1.03,
          "NV(l=" + std::to_string(r.l) + ") = " + format_double(r.nv) + " in [0.97, 1.03]");
    const double ref = sme4_reference(r.l);
    check(std::abs(r.sme4 - ref) <= 0.25 * ref,
          "SME_4(l=" + std::to_string(r.l) + ") = " + format_double(r.sme4) +
              " within 25% of " + format_double(ref));
    check(r.min_kurtosis >= -0.05, "min projected kurtosis(l=" + std::to_string(r.l) +
                                       ") = " + format_double(r.min_kurtosis) + " >= -0.05");
    products.push_back(r.sme4 * (r.l + 0.04));
  }
  if (products.size() >= 2) {
    const auto [mn, mx] = std::minmax_element(products.begin(), products.end());
    check(*mx / *mn < 1.5, "SME_4 * (l+0.04) max/min = " + format_double(*mx / *mn) + " < 1.5");
  }
  check(wnull.ks < wnull.ks_crit, "W null KS = " + format_double(wnull.ks) + " < " +
                                      format_double(wnull.ks_crit) + " (alpha=0.01)");
  check(std::abs(wnull.mean) < 0.05, "|mean(W)| = " + format_double(std::abs(wnull.mean)) + " < 0.05");
  check(wnull.variance > 0.8 && wnull.variance < 1.2,
        "var(W) = " + format_double(wnull.variance) + " in (0.8, 1.2)");

  std::printf("wrote %s\n", csv_path.string().c_str());
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"MMES: mixture-model evolution strategy for large-scale optimization"};
  app.require_subcommand(1);
  // flat dotted keys, e.g. `run.problem=sphere:dim=64`; flags override
  app.set_config("--config", "", "key=value file (keys like run.problem)");

  CommonOpts run_opts;
  auto* run_cmd = app.add_subcommand("run", "run independent optimization trials");
  add_common(run_cmd, run_opts);

  CommonOpts sweep_opts;
  std::vector<int> l_values{2, 4, 8, 16, 32};
  std::vector<long> sweep_dims;
  auto* sweep_cmd = app.add_subcommand("sweep-l", "median FEs per (mixing strength, dim) cell");
  add_common(sweep_cmd, sweep_opts);
  sweep_cmd->add_option("--l-values", l_values, "mixing strengths")->delimiter(',');
  sweep_cmd->add_option("--dims", sweep_dims, "dimensions")->delimiter(',');

  std::vector<long> timing_dims{256, 1024, 4096};
  int timing_gens = 300;
  std::uint64_t timing_seed = 1;
  int timing_l = 4;
  std::string timing_out = "out";
  auto* timing_cmd = app.add_subcommand("timing", "runtime per evaluation, objective excluded");
  timing_cmd->fallthrough(true);
  timing_cmd->add_option("--dims", timing_dims, "dimensions")->delimiter(',');
  timing_cmd->add_option("--gens", timing_gens, "generations measured per dimension");
  timing_cmd->add_option("--seed", timing_seed, "seed");
  timing_cmd->add_option("--mixing-strength", timing_l, "mixing strength l");
  timing_cmd->add_option("--out", timing_out, "output directory");

  std::uint64_t verify_seed = 1;
  long verify_ns = 10000;
  std::vector<int> verify_l{2, 4, 8, 16, 32};
  long wnull_gens = 100000;
  std::string verify_out = "out";
  auto* verify_cmd =
      app.add_subcommand("verify", "distributional checks against the exact sampler");
  verify_cmd->fallthrough(true);
  verify_cmd->add_option("--seed", verify_seed, "seed");
  verify_cmd->add_option("--ns", verify_ns, "samples per batch");
  verify_cmd->add_option("--l-values", verify_l, "mixing strengths")->delimiter(',');
  verify_cmd->add_option("--wnull-gens", wnull_gens, "generations for the W null simulation");
  verify_cmd->add_option("--out", verify_out, "output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run_cmd->parsed()) return do_run(run_opts);
    if (sweep_cmd->parsed()) return do_sweep(sweep_opts, l_values, sweep_dims);
    if (timing_cmd->parsed())
      return do_timing(timing_dims, timing_gens, timing_seed, timing_l, timing_out);
    if (verify_cmd->parsed())
      return do_verify(verify_seed, verify_ns, verify_l, wnull_gens, verify_out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
