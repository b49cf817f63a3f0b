#include "cli/commands.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <random>

#include "lcm/aggregation.hpp"
#include "lcm/io_formats.hpp"
#include "lcm/lcm_core.hpp"
#include "lcm/oracle.hpp"
#include "lcm/rng.hpp"
#include "lcm/ssm_likelihood.hpp"

namespace lcm::cli {
namespace {

std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), spec, v);
  return buf;
}

double wall_seconds(const std::chrono::steady_clock::time_point& t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

// ---- fit ----------------------------------------------------------------

struct FitArgs {
  std::string input, out;
  double lr = 0.01;
  std::size_t epochs = 200;
  std::uint64_t seed = 0;
  bool center = false;
};

int cmd_fit(const FitArgs& args, std::ostream& out) {
  FeatureBatch b = load_features(args.input);
  // Without --center the input is taken as already centered.
  if (!args.center) b.centered = true;

  FitConfig cfg;
  cfg.lr = args.lr;
  cfg.epochs = args.epochs;
  cfg.seed = args.seed;

  const auto t0 = std::chrono::steady_clock::now();
  const FitResult r = fit(b, cfg);
  const double seconds = wall_seconds(t0);

  // Below the dense cap the data-dependent constant ||sigma_hat||_F^2 is
  // added so the printed values are true squared Frobenius distances; above
  // it only the optimized (shifted) objective is printable.
  double constant = 0.0;
  if (b.c <= kDenseCap) {
    const FeatureBatch centered = b.centered ? b : center(b);
    constant = empirical_cov(centered).squaredNorm();
  }
  write_model(args.out, r.params);
  out << "# fit,initial_loss,final_loss,wall_seconds\n";
  out << "fit," << fmt("%.10g", r.initial_loss + constant) << ","
      << fmt("%.10g", r.final_loss + constant) << "," << fmt("%.4f", seconds)
      << "\n";
  out << "# wrote " << args.out << " (best epoch " << r.best_epoch << ")\n";
  return 0;
}

// ---- nll ----------------------------------------------------------------

struct NllArgs {
  std::string model, input;
  bool per_sample = false;
};

int cmd_nll(const NllArgs& args, std::ostream& out) {
  const LcmParams p = read_model(args.model);
  const FeatureBatch b = load_features(args.input);
  if (b.c != p.dim()) {
    throw std::invalid_argument(
        "nll: model dimension " + std::to_string(p.dim()) +
        " does not match input width " + std::to_string(b.c));
  }
  out << "nll," << fmt("%.12g", gaussian_nll(p, b)) << "\n";
  if (args.per_sample) {
    const std::vector<double> per = gaussian_nll_per_sample(p, b);
    for (std::size_t i = 0; i < per.size(); ++i) {
      out << "nll_sample," << i << "," << fmt("%.12g", per[i]) << "\n";
    }
  }
  return 0;
}

// ---- sample -------------------------------------------------------------

struct SampleArgs {
  std::string model, out_path;
  std::size_t n = 1;
  std::uint64_t seed = 0;
};

int cmd_sample(const SampleArgs& args, std::ostream& out) {
  const LcmParams p = read_model(args.model);
  const FeatureBatch b = sample(p, args.n, args.seed);
  write_feature_matrix(args.out_path, b);
  out << "sample," << b.n << "," << b.c << "," << args.out_path << "\n";
  return 0;
}

// ---- aggregate ----------------------------------------------------------

struct AggregateArgs {
  std::string old_path, new_path, out_path;
  double n_old = 1.0;
  double n_new = 1.0;
  std::string mode = "dense";
  std::size_t samples = 100000;
  std::uint64_t seed = 0;
  double lr = 0.01;
  std::size_t epochs = 200;
};

int cmd_aggregate(const AggregateArgs& args, std::ostream& out) {
  const LcmParams p_old = read_model(args.old_path);
  const LcmParams p_new = read_model(args.new_path);
  TaskWeights w;
  w.n_old = args.n_old;
  w.n_new = args.n_new;

  AggregateOptions opt;
  if (args.mode == "dense") {
    opt.mode = AggregateMode::dense;
  } else if (args.mode == "sampled") {
    opt.mode = AggregateMode::sampled;
  } else {
    throw std::invalid_argument("aggregate: --mode must be dense or sampled");
  }
  opt.n_samples = args.samples;
  opt.seed = args.seed;
  opt.fit.lr = args.lr;
  opt.fit.epochs = args.epochs;
  opt.fit.seed = args.seed;

  const FitResult r = aggregate_refit(p_old, p_new, w, opt);
  write_model(args.out_path, r.params);
  out << "# aggregate,initial_loss,final_loss\n";
  out << "aggregate," << fmt("%.10g", r.initial_loss) << ","
      << fmt("%.10g", r.final_loss) << "\n";
  out << "# wrote " << args.out_path << "\n";
  return 0;
}

// ---- compare ------------------------------------------------------------

struct CompareArgs {
  std::size_t dims = 32;
  std::size_t n_train = 5000;
  std::size_t n_test = 2000;
  std::uint64_t seed = 0;
  std::string structure = "ar1:0.7";
  double lr = 0.01;
  std::size_t epochs = 200;
};

double uniform01(std::mt19937_64& eng) {
  return static_cast<double>(eng() >> 11) * 0x1.0p-53;
}

// Unit-variance AR(1) rows, one RNG substream per sample.
FeatureBatch gen_ar1(std::size_t n, std::size_t c, double rho,
                     std::uint64_t root_seed) {
  FeatureBatch b;
  b.n = n;
  b.c = c;
  b.data.resize(n * c);
  const double innov = std::sqrt(1.0 - rho * rho);
  for (std::size_t i = 0; i < n; ++i) {
    NormalStream g(substream_seed(root_seed, i));
    double* row = b.row(i);
    double z = g.next();
    row[0] = z;
    for (std::size_t k = 1; k < c; ++k) {
      z = rho * z + innov * g.next();
      row[k] = z;
    }
  }
  return b;
}

LcmParams planted_params(std::size_t c, std::uint64_t seed) {
  std::mt19937_64 eng(substream_seed(seed, 0x706c616e74ULL));
  LcmParams p;
  p.mu.resize(c);
  p.u.resize(c);
  p.w.resize(c);
  p.a.resize(c);
  for (std::size_t i = 0; i < c; ++i) {
    p.mu[i] = 2.0 * uniform01(eng) - 1.0;
    p.u[i] = -2.0 + uniform01(eng);              // d in ~[0.13, 0.31]
    p.w[i] = 0.8 + 0.4 * uniform01(eng);
    p.a[i] = 0.15 * static_cast<double>(i) + 0.02 * uniform01(eng);
  }
  return p;
}

int cmd_compare(const CompareArgs& args, std::ostream& out) {
  if (args.dims < 1 || args.n_train < 2 || args.n_test < 1) {
    throw std::invalid_argument(
        "compare: need dims >= 1, n-train >= 2, n-test >= 1");
  }
  const std::uint64_t train_seed = substream_seed(args.seed, 0);
  const std::uint64_t test_seed = substream_seed(args.seed, 1);

  FeatureBatch train, test;
  if (args.structure.rfind("ar1:", 0) == 0) {
    const std::string num = args.structure.substr(4);
    double rho = 0.0;
    const auto [ptr, ec] =
        std::from_chars(num.data(), num.data() + num.size(), rho);
    if (ec != std::errc() || ptr != num.data() + num.size() || rho < 0.0 ||
        rho >= 1.0) {
      throw std::invalid_argument(
          "compare: ar1 coefficient must be a number in [0, 1)");
    }
    train = gen_ar1(args.n_train, args.dims, rho, train_seed);
    test = gen_ar1(args.n_test, args.dims, rho, test_seed);
  } else if (args.structure == "planted") {
    const LcmParams gen = planted_params(args.dims, args.seed);
    train = sample(gen, args.n_train, train_seed);
    test = sample(gen, args.n_test, test_seed);
  } else {
    throw std::invalid_argument(
        "compare: --structure must be ar1:<rho> or planted");
  }

  const DiagonalGaussian diag = diag_mle(train);

  FitConfig cfg;
  cfg.lr = args.lr;
  cfg.epochs = args.epochs;
  cfg.seed = args.seed;
  const FitResult r = fit(train, cfg);  // uncentered: means become mu

  const double ll_diag = -gaussian_nll(diag, test);
  const double ll_lcm = -gaussian_nll(r.params, test);

  out << "# split train_seed=" << train_seed << " test_seed=" << test_seed
      << "\n";
  out << "# structure,C,ll_diag,ll_lcm,delta\n";
  out << args.structure << "," << args.dims << "," << fmt("%.6f", ll_diag)
      << "," << fmt("%.6f", ll_lcm) << "," << fmt("%.6f", ll_lcm - ll_diag)
      << "\n";
  return 0;
}

// ---- bench --------------------------------------------------------------

struct BenchArgs {
  std::vector<std::uint64_t> dims = {1024, 4096, 16384, 65536};
  std::size_t n = 8;
  std::uint64_t seed = 0;
};

// Milliseconds per call, repetitions adapted until >= 20 ms of work.
template <typename F>
double time_ms(F&& f) {
  f();  // warm-up
  std::size_t reps = 1;
  for (;;) {
    const auto t0 = std::chrono::steady_clock::now();
    for (std::size_t r = 0; r < reps; ++r) f();
    const double total = wall_seconds(t0);
    if (total >= 0.02 || reps >= (std::size_t{1} << 22)) {
      return total * 1000.0 / static_cast<double>(reps);
    }
    reps *= 4;
  }
}

double regression_slope(const std::vector<double>& logx,
                        const std::vector<double>& logy) {
  const double n = static_cast<double>(logx.size());
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < logx.size(); ++i) {
    sx += logx[i];
    sy += logy[i];
    sxx += logx[i] * logx[i];
    sxy += logx[i] * logy[i];
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

int cmd_bench(const BenchArgs& args, std::ostream& out) {
  if (args.dims.empty() || args.n < 2) {
    throw std::invalid_argument("bench: need at least one dim and --n >= 2");
  }
  if (!std::is_sorted(args.dims.begin(), args.dims.end()) ||
      std::adjacent_find(args.dims.begin(), args.dims.end()) !=
          args.dims.end()) {
    throw std::invalid_argument("bench: dims must be strictly ascending");
  }

  out << "# bench,C,frobenius_ms,kalman_ms\n";
  std::vector<double> logc, log_frob, log_kalman;
  double sink = 0.0;
  for (std::uint64_t dim : args.dims) {
    const std::size_t c = dim;
    std::mt19937_64 eng(substream_seed(args.seed, dim));
    LcmParams p;
    p.mu.assign(c, 0.0);
    p.u.resize(c);
    p.w.resize(c);
    p.a.resize(c);
    for (std::size_t i = 0; i < c; ++i) {
      p.u[i] = 2.0 * uniform01(eng) - 1.0;
      p.w[i] = 0.5 + uniform01(eng);
      p.a[i] = 0.1 * static_cast<double>(i) + 0.05 * uniform01(eng);
    }
    FeatureBatch raw;
    raw.n = args.n;
    raw.c = c;
    raw.data.resize(raw.n * c);
    NormalStream g(substream_seed(args.seed, dim + 1));
    for (double& x : raw.data) x = g.next();
    const FeatureBatch batch = center(raw);

    const double frob_ms =
        time_ms([&] { sink += frobenius_loss_decomposed(p, batch); });
    const double kalman_ms = time_ms([&] { sink += gaussian_nll(p, batch); });
    out << "bench," << c << "," << fmt("%.6f", frob_ms) << ","
        << fmt("%.6f", kalman_ms) << "\n";
    logc.push_back(std::log(static_cast<double>(c)));
    log_frob.push_back(std::log(frob_ms));
    log_kalman.push_back(std::log(kalman_ms));
  }
  if (args.dims.size() >= 2) {
    out << "bench_exponent,frobenius,"
        << fmt("%.4f", regression_slope(logc, log_frob)) << "\n";
    out << "bench_exponent,kalman,"
        << fmt("%.4f", regression_slope(logc, log_kalman)) << "\n";
  }
  if (!std::isfinite(sink)) out << "# non-finite sink\n";
  return 0;
}

// ---- memreport ----------------------------------------------------------

struct MemreportArgs {
  std::vector<std::uint64_t> dims = {200704, 100352, 50176, 25088};
  std::uint64_t vectors_per_dim = 2;
};

int cmd_memreport(const MemreportArgs& args, std::ostream& out) {
  if (args.dims.empty() || args.vectors_per_dim == 0) {
    throw std::invalid_argument(
        "memreport: need at least one positive dim and vectors-per-dim >= 1");
  }
  for (std::uint64_t d : args.dims) {
    if (d == 0) throw std::invalid_argument("memreport: dims must be >= 1");
  }
  const MemoryReport report =
      build_memory_report(args.dims, args.vectors_per_dim);
  const auto print_row = [&](const char* tag, const MemoryReport::Row& r) {
    out << tag << "," << r.dim << "," << r.lcm_bytes << "," << r.dense_bytes
        << "," << fmt("%.2f", static_cast<double>(r.lcm_bytes) / 0x1.0p20)
        << "," << fmt("%.2f", static_cast<double>(r.dense_bytes) / 0x1.0p30)
        << "," << r.ratio << "\n";
  };
  out << "# sizes in binary units (MiB = 2^20 B, GiB = 2^30 B)\n";
  out << "# memreport,D,lcm_bytes,dense_bytes,lcm_mib,dense_gib,ratio\n";
  for (const auto& row : report.rows) print_row("memreport", row);
  print_row("memreport_total", report.total);
  return 0;
}

}  // namespace

MemoryReport build_memory_report(const std::vector<std::uint64_t>& dims,
                                 std::uint64_t vectors_per_dim) {
  MemoryReport report;
  for (std::uint64_t d : dims) {
    MemoryReport::Row row;
    row.dim = d;
    row.lcm_bytes = 8 * vectors_per_dim * d;
    row.dense_bytes = 8 * d * (d + 1) / 2;
    row.ratio = static_cast<std::uint64_t>(
        std::llround(static_cast<double>(row.dense_bytes) /
                     static_cast<double>(row.lcm_bytes)));
    report.total.dim += row.dim;
    report.total.lcm_bytes += row.lcm_bytes;
    report.total.dense_bytes += row.dense_bytes;
    report.rows.push_back(row);
  }
  report.total.ratio = static_cast<std::uint64_t>(
      std::llround(static_cast<double>(report.total.dense_bytes) /
                   static_cast<double>(report.total.lcm_bytes)));
  return report;
}

int run(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Structured covariance toolkit (diagonal + Laplace-kernel)"};
  app.require_subcommand(1);

  FitArgs fit_args;
  auto* fit_cmd = app.add_subcommand(
      "fit", "Fit the structured covariance to a feature matrix");
  fit_cmd->add_option("--input", fit_args.input, "Feature matrix (FMX1 or CSV)")
      ->required();
  fit_cmd->add_option("--out", fit_args.out, "Output model JSON")->required();
  fit_cmd->add_option("--lr", fit_args.lr, "Adam learning rate");
  fit_cmd->add_option("--epochs", fit_args.epochs, "Adam epochs");
  fit_cmd->add_option("--seed", fit_args.seed, "Init jitter seed");
  fit_cmd->add_flag("--center", fit_args.center,
                    "Subtract column means before fitting (means become mu); "
                    "without this flag the input is assumed centered");

  NllArgs nll_args;
  auto* nll_cmd =
      app.add_subcommand("nll", "Mean Gaussian NLL of a batch under a model");
  nll_cmd->add_option("--model", nll_args.model, "Model JSON")->required();
  nll_cmd->add_option("--input", nll_args.input, "Feature matrix (FMX1 or CSV)")
      ->required();
  nll_cmd->add_flag("--per-sample", nll_args.per_sample,
                    "Also print one NLL line per sample");

  SampleArgs sample_args;
  auto* sample_cmd =
      app.add_subcommand("sample", "Draw samples from a model into FMX1");
  sample_cmd->add_option("--model", sample_args.model, "Model JSON")
      ->required();
  sample_cmd->add_option("--n", sample_args.n, "Number of samples")
      ->required();
  sample_cmd->add_option("--seed", sample_args.seed, "RNG seed");
  sample_cmd->add_option("--out", sample_args.out_path, "Output FMX1 path")
      ->required();

  AggregateArgs agg_args;
  auto* agg_cmd = app.add_subcommand(
      "aggregate", "Count-weighted aggregation of two models plus refit");
  agg_cmd->add_option("--old", agg_args.old_path, "Old model JSON")->required();
  agg_cmd->add_option("--new", agg_args.new_path, "New model JSON")->required();
  agg_cmd->add_option("--n-old", agg_args.n_old, "Old task count (>= 1)")
      ->required();
  agg_cmd->add_option("--n-new", agg_args.n_new, "New task count (>= 1)")
      ->required();
  agg_cmd->add_option("--mode", agg_args.mode, "dense or sampled");
  agg_cmd->add_option("--samples", agg_args.samples,
                      "Total pooled draws (sampled mode)");
  agg_cmd->add_option("--seed", agg_args.seed, "Sampling / init seed");
  agg_cmd->add_option("--lr", agg_args.lr, "Refit learning rate");
  agg_cmd->add_option("--epochs", agg_args.epochs, "Refit epochs");
  agg_cmd->add_option("--out", agg_args.out_path, "Output model JSON")
      ->required();

  CompareArgs cmp_args;
  auto* cmp_cmd = app.add_subcommand(
      "compare", "Held-out likelihood: diagonal baseline vs structured model");
  cmp_cmd->add_option("--dims", cmp_args.dims, "Feature dimension")->required();
  cmp_cmd->add_option("--n-train", cmp_args.n_train, "Training samples")
      ->required();
  cmp_cmd->add_option("--n-test", cmp_args.n_test, "Held-out samples")
      ->required();
  cmp_cmd->add_option("--seed", cmp_args.seed, "Split seed");
  cmp_cmd->add_option("--structure", cmp_args.structure,
                      "Data structure: ar1:<rho> or planted");
  cmp_cmd->add_option("--lr", cmp_args.lr, "Fit learning rate");
  cmp_cmd->add_option("--epochs", cmp_args.epochs, "Fit epochs");

  BenchArgs bench_args;
  auto* bench_cmd = app.add_subcommand(
      "bench", "Wall-time scaling of the loss and likelihood fast paths");
  bench_cmd->add_option("--dims", bench_args.dims, "Ascending dim list")
      ->delimiter(',');
  bench_cmd->add_option("--n", bench_args.n, "Samples per evaluation");
  bench_cmd->add_option("--seed", bench_args.seed, "Data seed");

  MemreportArgs mem_args;
  auto* mem_cmd = app.add_subcommand(
      "memreport", "Structured vs dense covariance memory accounting");
  mem_cmd->add_option("--dims", mem_args.dims, "Layer dimensions")
      ->delimiter(',');
  mem_cmd->add_option("--vectors-per-dim", mem_args.vectors_per_dim,
                      "Stored binary64 vectors counted per dimension");

  std::reverse(args.begin(), args.end());
  try {
    app.parse(args);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << e.what() << "\n";
    return 2;
  }

  try {
    if (fit_cmd->parsed()) return cmd_fit(fit_args, out);
    if (nll_cmd->parsed()) return cmd_nll(nll_args, out);
    if (sample_cmd->parsed()) return cmd_sample(sample_args, out);
    if (agg_cmd->parsed()) return cmd_aggregate(agg_args, out);
    if (cmp_cmd->parsed()) return cmd_compare(cmp_args, out);
    if (bench_cmd->parsed()) return cmd_bench(bench_args, out);
    if (mem_cmd->parsed()) return cmd_memreport(mem_args, out);
    err << "no subcommand\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace lcm::cli
