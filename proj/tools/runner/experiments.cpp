#include "experiments.hpp"

#include "pool.hpp"

#include <seqlab/complexity.hpp>
#include <seqlab/concept.hpp>
#include <seqlab/fitting.hpp>
#include <seqlab/inversion.hpp>
#include <seqlab/languages.hpp>
#include <seqlab/rnn.hpp>
#include <seqlab/sequences.hpp>
#include <seqlab/training.hpp>

#include <cmath>
#include <filesystem>
#include <map>
#include <ostream>
#include <tuple>

namespace seqlab::runner {

namespace {

std::vector<OptionSpec> with_common(std::vector<OptionSpec> specific) {
  std::vector<OptionSpec> out{
      {"seed", "1", "root seed; replicate i uses seed + i (SEQLAB_SEED overrides)"},
      {"out", ".", "output directory"},
      {"plot", "false", "also write an SVG line chart", true},
      {"jobs", "1", "worker threads for grid points"},
  };
  out.insert(out.end(), specific.begin(), specific.end());
  return out;
}

std::vector<std::uint64_t> replicate_seeds(const ExperimentConfig& cfg, const std::string& key = "seeds") {
  const std::uint64_t base = cfg.get_u64("seed");
  const std::size_t n = cfg.get_size(key);
  if (n == 0) throw ConfigError("config: '" + key + "' must be at least 1");
  std::vector<std::uint64_t> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(base + i);
  return out;
}

std::vector<NormalizedSequence> sample_normalized(RngStream rng, std::size_t n, std::size_t L, std::size_t d,
                                                  double eps_x) {
  std::vector<NormalizedSequence> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(normalize(sample_true_sequence(rng, L, d), eps_x));
  return out;
}

/// Median of `value` grouped by (line label, x).
Chart median_chart(const std::string& file, const std::string& title, const std::string& x_label,
                   const std::string& y_label, const std::vector<std::tuple<std::string, double, double>>& pts) {
  std::map<std::string, std::map<double, std::vector<double>>> groups;
  for (const auto& [label, x, y] : pts) groups[label][x].push_back(y);
  Chart c{file, title, x_label, y_label, true, {}};
  for (auto& [label, xs] : groups) {
    Series s{label, {}};
    for (auto& [x, ys] : xs) s.points.emplace_back(x, median(ys));
    c.series.push_back(std::move(s));
  }
  return c;
}

std::size_t jobs_of(const ExperimentConfig& cfg) {
  const std::size_t j = cfg.get_size("jobs");
  if (j == 0) throw ConfigError("config: 'jobs' must be at least 1");
  return j;
}

// ---------------------------------------------------------------------------

ExperimentOutput run_invert_analytic(const ExperimentConfig& cfg) {
  const auto ms = cfg.get_size_list("grid-m");
  const auto Ls = cfg.get_size_list("L");
  const auto ds = cfg.get_size_list("d");
  const double eps = cfg.get_double("eps");
  const auto seeds = replicate_seeds(cfg);
  const std::size_t n_test = cfg.get_size("n-test");
  const DecoderVariant variant = parse_decoder_variant(cfg.get_string("variant"));
  for (auto L : Ls) check_eps_x(eps, L);

  struct Task { std::size_t m, L, d; std::uint64_t seed; };
  std::vector<Task> tasks;
  for (auto m : ms) for (auto L : Ls) for (auto d : ds) for (auto s : seeds) tasks.push_back({m, L, d, s});
  const auto results = parallel_map<InversionErrors>(tasks.size(), jobs_of(cfg), [&](std::size_t i) {
    const Task& t = tasks[i];
    const RngStream root(t.seed);
    const RnnParams params = init_params(root.split("rnn"), t.m, t.d, 1);
    const Decoder dec = build_decoder(params, t.L, eps, variant);
    const auto seqs = sample_normalized(root.split("inputs"), n_test, t.L, t.d, eps);
    return inversion_errors(dec, make_decoder_data(params, dec, seqs));
  });

  Table table{"invert_analytic.csv",
              {"seed", "m", "L", "d", "eps_x", "variant", "provenance", "avg_rel_l2", "avg_linf"}, {}};
  std::vector<std::tuple<std::string, double, double>> pts;
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    const Task& t = tasks[i];
    table.add({std::to_string(t.seed), fmt(t.m), fmt(t.L), fmt(t.d), fmt(eps), to_string(variant), "analytic",
               fmt(results[i].avg_rel_l2), fmt(results[i].avg_linf)});
    pts.emplace_back("L=" + std::to_string(t.L) + " d=" + std::to_string(t.d), static_cast<double>(t.m),
                     results[i].avg_linf);
  }
  ExperimentOutput out;
  out.charts.push_back(median_chart("invert_analytic.svg", "Analytic decoder", "m", "median avg L-inf error", pts));
  for (const auto& s : out.charts[0].series) {
    for (auto [x, y] : s.points) out.summary.push_back(s.name + " m=" + fmt(x) + " median_linf=" + fmt(y));
  }
  out.tables.push_back(std::move(table));
  return out;
}

ExperimentOutput run_invert_learn(const ExperimentConfig& cfg) {
  const auto ms = cfg.get_size_list("grid-m");
  const auto Ls = cfg.get_size_list("L");
  const auto ds = cfg.get_size_list("d");
  const auto seeds = replicate_seeds(cfg);
  InversionStudyConfig base;
  base.Ls = Ls;
  base.n_train = cfg.get_size("n-train");
  base.n_test = cfg.get_size("n-test");
  base.fit.epochs = cfg.get_size("epochs");
  base.fit.lr = cfg.get_double("lr");
  base.fit.momentum = cfg.get_double("momentum");
  base.fit.batch = cfg.get_size("batch");
  base.raw_unit_variance = cfg.get_bool("raw-unit-variance");
  if (base.n_train == 0 || base.n_test == 0) throw ConfigError("config: n-train and n-test must be positive");

  struct Task { std::size_t m, d; std::uint64_t seed; };
  std::vector<Task> tasks;
  for (auto m : ms) for (auto d : ds) for (auto s : seeds) tasks.push_back({m, d, s});
  const auto results = parallel_map<std::vector<InversionStudyRow>>(tasks.size(), jobs_of(cfg), [&](std::size_t i) {
    InversionStudyConfig c = base;
    c.m = tasks[i].m;
    c.d = tasks[i].d;
    return run_inversion_study(c, tasks[i].seed);
  });

  Table table{"invert_learn.csv",
              {"seed", "m", "L", "d", "eps_x", "variant", "provenance", "avg_rel_l2", "avg_linf"}, {}};
  std::vector<std::tuple<std::string, double, double>> pts;
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    for (const auto& row : results[i]) {
      table.add({std::to_string(tasks[i].seed), fmt(tasks[i].m), fmt(row.L), fmt(tasks[i].d), "na", "full",
                 "fitted", fmt(row.errors.avg_rel_l2), fmt(row.errors.avg_linf)});
      pts.emplace_back("L=" + std::to_string(row.L) + " d=" + std::to_string(tasks[i].d),
                       static_cast<double>(tasks[i].m), row.errors.avg_rel_l2);
    }
  }
  ExperimentOutput out;
  out.charts.push_back(median_chart("invert_learn.svg", "Learned decoder", "m", "median avg relative L2 error", pts));
  for (const auto& s : out.charts[0].series) {
    for (auto [x, y] : s.points) out.summary.push_back(s.name + " m=" + fmt(x) + " median_rel_l2=" + fmt(y));
  }
  out.tables.push_back(std::move(table));
  return out;
}

ExperimentOutput run_lemma_check(const ExperimentConfig& cfg) {
  const std::string suite = cfg.get_string("suite");
  if (suite != "all" && suite != "norm" && suite != "coupling" && suite != "single-layer") {
    throw ConfigError("config: suite must be all, norm, coupling or single-layer");
  }
  const bool do_norm = suite == "all" || suite == "norm";
  const bool do_coupling = suite == "all" || suite == "coupling";
  const bool do_single = suite == "all" || suite == "single-layer";
  const std::size_t L = cfg.get_size("L");
  const std::size_t d = cfg.get_size("d");
  const double eps = cfg.get_double("eps");
  check_eps_x(eps, L);
  const auto norm_ms = cfg.get_size_list("norm-m");
  const auto norm_seeds = replicate_seeds(cfg, "norm-seeds");
  const auto coupling_ms = cfg.get_size_list("coupling-m");
  const auto coupling_seeds = replicate_seeds(cfg, "coupling-seeds");
  const auto ts = cfg.get_double_list("t");
  const double delta = cfg.get_double("delta");
  const std::size_t d_out = cfg.get_size("d-out");
  const auto single_ms = cfg.get_size_list("single-m");
  const auto single_seeds = replicate_seeds(cfg, "single-seeds");
  const std::size_t jobs = jobs_of(cfg);
  ExperimentOutput out;

  if (do_norm) {
    struct Task { std::size_t m; std::uint64_t seed; };
    std::vector<Task> tasks;
    for (auto m : norm_ms) for (auto s : norm_seeds) tasks.push_back({m, s});
    const auto res = parallel_map<NormDiagnostics>(tasks.size(), jobs, [&](std::size_t i) {
      const RngStream root(tasks[i].seed);
      const RnnParams params = init_params(root.split("rnn"), tasks[i].m, d, 1);
      RngStream in = root.split("inputs");
      return norm_diagnostics(params, normalize(sample_true_sequence(in, L, d), eps));
    });
    Table t{"lemma_norm.csv", {"seed", "m", "L", "d", "eps_x", "ell", "norm_residual"}, {}};
    std::vector<std::tuple<std::string, double, double>> pts;
    for (std::size_t i = 0; i < tasks.size(); ++i) {
      for (std::size_t l = 0; l < res[i].residuals.size(); ++l) {
        t.add({std::to_string(tasks[i].seed), fmt(tasks[i].m), fmt(L), fmt(d), fmt(eps), fmt(l + 1),
               fmt(res[i].residuals[l])});
        pts.emplace_back("ell=" + std::to_string(l + 1), static_cast<double>(tasks[i].m), res[i].residuals[l]);
      }
    }
    out.tables.push_back(std::move(t));
    out.charts.push_back(median_chart("lemma_norm.svg", "Hidden-norm residual", "m", "median residual", pts));
  }
  if (do_coupling) {
    struct Task { std::size_t m; std::uint64_t seed; };
    std::vector<Task> tasks;
    for (auto m : coupling_ms) for (auto s : coupling_seeds) tasks.push_back({m, s});
    const auto res = parallel_map<std::vector<double>>(tasks.size(), jobs, [&](std::size_t i) {
      const RngStream root(tasks[i].seed);
      const RnnParams params = init_params(root.split("rnn"), tasks[i].m, d, d_out);
      RngStream off_rng = root.split("offsets");
      const WeightOffsets offs = random_offsets(off_rng, tasks[i].m, d, delta);
      RngStream in = root.split("inputs");
      const Mat tokens = normalize(sample_true_sequence(in, L, d), eps).tokens;
      std::vector<double> r;
      for (double t : ts) r.push_back(coupling_residual(params, tokens, offs, t));
      return r;
    });
    Table t{"lemma_coupling.csv", {"seed", "m", "L", "d", "eps_x", "delta", "t", "coupling_residual"}, {}};
    std::vector<std::tuple<std::string, double, double>> pts;
    for (std::size_t i = 0; i < tasks.size(); ++i) {
      for (std::size_t k = 0; k < ts.size(); ++k) {
        t.add({std::to_string(tasks[i].seed), fmt(tasks[i].m), fmt(L), fmt(d), fmt(eps), fmt(delta), fmt(ts[k]),
               fmt(res[i][k])});
        pts.emplace_back("t=" + fmt(ts[k]), static_cast<double>(tasks[i].m), res[i][k]);
      }
    }
    out.tables.push_back(std::move(t));
    out.charts.push_back(
        median_chart("lemma_coupling.svg", "First-order coupling", "m", "median relative residual", pts));
    for (const auto& s : out.charts.back().series) {
      for (auto [x, y] : s.points) out.summary.push_back("coupling " + s.name + " m=" + fmt(x) + " median=" + fmt(y));
    }
  }
  if (do_single) {
    Table t{"lemma_single_layer.csv", {"seed", "m", "d", "estimate", "exact", "abs_error", "bound"}, {}};
    std::vector<std::tuple<std::string, double, double>> pts;
    for (auto m : single_ms) {
      for (auto s : single_seeds) {
        RngStream rng = RngStream(s).split("single-layer");
        const Mat T = gaussian_matrix(rng, m, d, 1.0);
        const Vec v = gaussian_vector(rng, d, 1.0);
        const Vec x = gaussian_vector(rng, d, 1.0);
        const double f = single_layer_invert(T, v, x, 1.0);
        const double exact = v.dot(x);
        const double bound = 5.0 * v.norm() * x.norm() / std::sqrt(static_cast<double>(m));
        t.add({std::to_string(s), fmt(m), fmt(d), fmt(f), fmt(exact), fmt(std::abs(f - exact)), fmt(bound)});
        pts.emplace_back("d=" + std::to_string(d), static_cast<double>(m), std::abs(f - exact));
      }
    }
    out.tables.push_back(std::move(t));
    out.charts.push_back(median_chart("lemma_single_layer.svg", "Single-layer inversion", "m", "median |f - v.x|", pts));
  }
  return out;
}

ExperimentOutput run_complexity(const ExperimentConfig& cfg) {
  auto presets = cfg.get_list("preset");
  if (presets.size() == 1 && presets[0] == "all") presets = taylor_preset_names();
  const double R = cfg.get_double("R");
  const double eps = cfg.get_double("eps");
  if (!(R > 0.0)) throw ConfigError("config: R must be positive");
  if (!(eps > 0.0 && eps < 1.0)) throw ConfigError("config: eps must lie in (0, 1)");
  std::vector<TaylorSeries> series;
  for (const auto& p : presets) series.push_back(taylor_preset(p, R));
  Table t{"complexity.csv", {"name", "R", "eps", "c_s", "c_eps", "tail_bound"}, {}};
  ExperimentOutput out;
  for (const auto& s : series) {
    const ComplexityReport r = complexity_report(s, R, eps);
    t.add({r.name, fmt(R), fmt(eps), fmt(r.c_s), fmt(r.c_eps), fmt(r.truncation_tail_bound)});
    out.summary.push_back(r.name + " c_s=" + fmt(r.c_s) + " c_eps=" + fmt(r.c_eps) + " log_c_eps=" +
                          fmt(r.log_c_eps));
  }
  out.tables.push_back(std::move(t));
  return out;
}

ExperimentOutput run_concept_verify(const ExperimentConfig& cfg) {
  const auto langs = cfg.get_list("languages");
  const std::size_t max_len = cfg.get_size("max-len");
  if (max_len == 0 || max_len > 20) throw ConfigError("config: max-len must lie in [1, 20]");
  for (const auto& l : langs) (void)language_spec(l);
  const auto res = parallel_map<std::vector<std::string>>(langs.size(), jobs_of(cfg), [&](std::size_t i) {
    return concept_oracle_mismatches(langs[i], max_len);
  });
  Table t{"concept_verify.csv", {"language", "max_len", "mismatches"}, {}};
  ExperimentOutput out;
  for (std::size_t i = 0; i < langs.size(); ++i) {
    t.add({langs[i], fmt(max_len), fmt(res[i].size())});
    std::string line = langs[i] + " mismatches=" + std::to_string(res[i].size());
    for (std::size_t k = 0; k < std::min<std::size_t>(res[i].size(), 5); ++k) line += ' ' + res[i][k];
    out.summary.push_back(line);
  }
  out.tables.push_back(std::move(t));
  return out;
}

ExperimentOutput run_additive_impossibility(const ExperimentConfig& cfg) {
  const auto Ls = cfg.get_size_list("L");
  for (auto L : Ls) {
    if (L < 2 || L > 12) throw ConfigError("config: L must lie in [2, 12]");
  }
  struct Result { double min_error; std::size_t infeasible; };
  const auto res = parallel_map<Result>(Ls.size(), jobs_of(cfg), [&](std::size_t i) {
    const std::size_t L = Ls[i];
    std::size_t infeasible = 0;
    for (std::size_t q = 0; q + 2 <= L; ++q) infeasible += dl1_block_infeasible(q, L).infeasible ? 1 : 0;
    return Result{additive_min_error(L).min_error, infeasible};
  });
  Table t{"additive_impossibility.csv", {"language", "L", "min_error", "infeasible_blocks"}, {}};
  ExperimentOutput out;
  for (std::size_t i = 0; i < Ls.size(); ++i) {
    t.add({"dl1", fmt(Ls[i]), fmt(res[i].min_error), fmt(res[i].infeasible)});
    out.summary.push_back("dl1 L=" + std::to_string(Ls[i]) + " infeasible_blocks=" + std::to_string(res[i].infeasible) +
                          "/" + std::to_string(Ls[i] - 1) + " min_error=" + fmt(res[i].min_error));
  }
  out.tables.push_back(std::move(t));
  return out;
}

ExperimentOutput run_lang_train(const ExperimentConfig& cfg) {
  const auto langs = cfg.get_list("language");
  const auto seeds = replicate_seeds(cfg);
  const std::size_t m = cfg.get_size("m");
  if (m == 0) throw ConfigError("config: m must be positive");
  TrainConfig base;
  base.activation = parse_activation(cfg.get_string("activation"));
  base.optimizer.kind = parse_optimizer(cfg.get_string("optimizer"));
  base.optimizer.lr = cfg.get_double("lr");
  base.optimizer.momentum = cfg.get_double("momentum");
  base.epochs = cfg.get_size("epochs");
  base.batch = cfg.get_size("batch");
  base.train_readout = cfg.get_bool("train-readout");
  base.init_scale = cfg.get_double("init-scale");
  base.loss = parse_loss(cfg.get_string("loss"));
  base.lambda_scale = cfg.get_double("lambda");
  base.validate();
  auto size_or_table = [&](const std::string& key, std::size_t table_value) {
    return cfg.get_string(key) == "table" ? table_value : cfg.get_size(key);
  };
  struct Sizes { std::size_t n_train, n_test, len_min, len_max; };
  std::vector<Sizes> sizes;
  for (const auto& l : langs) {
    (void)language_spec(l);
    LanguageTableRow row{l, 1000, 200, 2, 50};
    try {
      row = language_table_row(l);
    } catch (const std::invalid_argument&) {
    }
    sizes.push_back({size_or_table("n-train", row.n_train), size_or_table("n-test", row.n_test),
                     size_or_table("len-min", row.len_min), size_or_table("len-max", row.len_max)});
  }

  struct Task { std::size_t lang; std::uint64_t seed; };
  std::vector<Task> tasks;
  for (std::size_t l = 0; l < langs.size(); ++l) for (auto s : seeds) tasks.push_back({l, s});
  const auto res = parallel_map<TrainReport>(tasks.size(), jobs_of(cfg), [&](std::size_t i) {
    const Sizes& sz = sizes[tasks[i].lang];
    const LabeledDataset data = generate_dataset(language_spec(langs[tasks[i].lang]), sz.n_train, sz.n_test,
                                                 sz.len_min, sz.len_max, RngStream(tasks[i].seed).split("data"));
    TrainConfig c = base;
    c.seed = tasks[i].seed;
    return train_classifier(data, m, c);
  });

  Table t{"lang_train.csv",
          {"seed", "language", "activation", "m", "lr", "epoch", "train_loss", "train_acc", "test_acc", "w_disp",
           "a_disp"},
          {}};
  Chart chart{"lang_train.svg", "Language training", "epoch", "test accuracy", false, {}};
  ExperimentOutput out;
  std::map<std::string, double> best;
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    const std::string& lang = langs[tasks[i].lang];
    Series s{lang + " seed " + std::to_string(tasks[i].seed), {}};
    for (std::size_t e = 0; e < res[i].epochs.size(); ++e) {
      const EpochStats& st = res[i].epochs[e];
      t.add({std::to_string(tasks[i].seed), lang, to_string(base.activation), fmt(m), fmt(base.optimizer.lr),
             fmt(e + 1), fmt(st.train_loss), fmt(st.train_acc), fmt(st.test_acc), fmt(st.w_disp), fmt(st.a_disp)});
      s.points.emplace_back(static_cast<double>(e + 1), st.test_acc);
    }
    chart.series.push_back(std::move(s));
    best[lang] = std::max(best.count(lang) ? best[lang] : 0.0, res[i].final_test_acc);
    out.summary.push_back(lang + " seed=" + std::to_string(tasks[i].seed) + " final_test_acc=" +
                          fmt(res[i].final_test_acc) + " seconds=" + fmt(res[i].wall_seconds));
  }
  for (const auto& l : langs) out.summary.push_back(l + " best_test_acc=" + fmt(best[l]));
  out.tables.push_back(std::move(t));
  out.charts.push_back(std::move(chart));
  return out;
}

ExperimentOutput run_existence_check(const ExperimentConfig& cfg) {
  const auto ms = cfg.get_size_list("grid-m");
  const auto seeds = replicate_seeds(cfg);
  ExistenceConfig base;
  base.L = cfg.get_size("L");
  base.d = cfg.get_size("d");
  base.eps_x = cfg.get_double("eps");
  base.p = cfg.get_size("p");
  base.d_out = cfg.get_size("d-out");
  base.phi = cfg.get_string("phi");
  base.n_seqs = cfg.get_size("n-seqs");
  base.fit.n_mc = cfg.get_size("n-mc");
  base.fit.K = cfg.get_size("fit-K");
  const std::string storage = cfg.get_string("storage");
  if (storage != "auto" && storage != "dense" && storage != "streamed") {
    throw ConfigError("config: storage must be auto, dense or streamed");
  }
  check_eps_x(base.eps_x, base.L);
  (void)taylor_preset(base.phi);
  if (base.p == 0 || base.d_out == 0 || base.n_seqs < 2) throw ConfigError("config: p, d-out >= 1 and n-seqs >= 2");

  struct Task { std::size_t m; std::uint64_t seed; };
  std::vector<Task> tasks;
  for (auto m : ms) for (auto s : seeds) tasks.push_back({m, s});
  const auto res = parallel_map<ExistenceRun>(tasks.size(), jobs_of(cfg), [&](std::size_t i) {
    ExistenceConfig c = base;
    c.m = tasks[i].m;
    c.storage = storage == "streamed" || (storage == "auto" && c.m > 16384) ? WeightStorage::streamed
                                                                             : WeightStorage::dense;
    return run_existence(c, tasks[i].seed);
  });

  Table t{"existence_check.csv", {"m", "p", "L", "d", "eps_x", "mean_abs_err", "correlation", "seed"}, {}};
  std::vector<std::tuple<std::string, double, double>> err_pts, corr_pts;
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    const auto& st = res[i].stats;
    t.add({fmt(tasks[i].m), fmt(base.p), fmt(base.L), fmt(base.d), fmt(base.eps_x), fmt(st.mean_abs_err),
           fmt(st.correlation), std::to_string(tasks[i].seed)});
    err_pts.emplace_back("mean abs error", static_cast<double>(tasks[i].m), st.mean_abs_err);
    corr_pts.emplace_back("correlation", static_cast<double>(tasks[i].m), st.correlation);
  }
  ExperimentOutput out;
  Chart chart = median_chart("existence_check.svg", "Existence check (L=" + std::to_string(base.L) + ")", "m",
                             "median over seeds", err_pts);
  Chart corr = median_chart("", "", "", "", corr_pts);
  chart.series.push_back(corr.series.at(0));
  for (std::size_t k = 0; k < chart.series[0].points.size(); ++k) {
    out.summary.push_back("m=" + fmt(chart.series[0].points[k].first) +
                          " median_mean_abs_err=" + fmt(chart.series[0].points[k].second) +
                          " median_correlation=" + fmt(chart.series[1].points[k].second));
  }
  out.tables.push_back(std::move(t));
  out.charts.push_back(std::move(chart));
  return out;
}

}  // namespace

const std::vector<ExperimentDef>& experiments() {
  static const std::vector<ExperimentDef> defs{
      {"invert-analytic", "Recover normalized sequences from h(L) with the analytic decoder",
       with_common({{"grid-m", "512,2048,8192", "hidden sizes"},
                    {"L", "4", "sequence lengths"},
                    {"d", "4", "token dimensions"},
                    {"eps", "0.05", "eps_x"},
                    {"seeds", "10", "replicates per grid point"},
                    {"n-test", "100", "sequences per replicate"},
                    {"variant", "full", "full or true_seq"}}),
       &run_invert_analytic},
      {"invert-learn", "Fit linear decoders from h(L) to Gaussian inputs by SGD",
       with_common({{"grid-m", "500,1000,2000,5000,10000", "hidden sizes"},
                    {"L", "2,4,6", "sequence lengths"},
                    {"d", "2,4", "token dimensions"},
                    {"seeds", "3", "replicates per grid point"},
                    {"n-train", "1000", "training sequences"},
                    {"n-test", "1000", "test sequences"},
                    {"epochs", "20", "SGD epochs"},
                    {"lr", "0.1", "SGD learning rate"},
                    {"momentum", "0.9", "SGD momentum"},
                    {"batch", "128", "SGD batch size"},
                    {"raw-unit-variance", "false", "W, A ~ N(0, 1) instead of N(0, 2/m)", true}}),
       &run_invert_learn},
      {"lemma-check", "Hidden-norm, first-order coupling and single-layer inversion suites",
       with_common({{"suite", "all", "all, norm, coupling or single-layer"},
                    {"L", "6", "sequence length"},
                    {"d", "4", "token dimension"},
                    {"eps", "0.05", "eps_x"},
                    {"norm-m", "10000", "hidden sizes for the norm suite"},
                    {"norm-seeds", "100", "replicates for the norm suite"},
                    {"coupling-m", "256,1024,4096", "hidden sizes for the coupling suite"},
                    {"coupling-seeds", "20", "replicates for the coupling suite"},
                    {"t", "1", "offset scales for the coupling suite"},
                    {"delta", "1", "offset budget Delta"},
                    {"d-out", "10", "output dimension for the coupling suite"},
                    {"single-m", "1024,4096,16384", "widths for the single-layer suite"},
                    {"single-seeds", "200", "replicates for the single-layer suite"}}),
       &run_lemma_check},
      {"complexity", "Function complexities C_s and C_eps of Taylor presets",
       with_common({{"preset", "all", "preset names or all"},
                    {"R", "1", "radius"},
                    {"eps", "0.1353", "target accuracy"}}),
       &run_complexity},
      {"concept-verify", "Compare concept acceptors with language membership exhaustively",
       with_common({{"languages", "dl1,parity,substring:0110", "languages with a concept construction"},
                    {"max-len", "12", "longest string checked"}}),
       &run_concept_verify},
      {"additive-impossibility", "Show additive models cannot recognize D_L1",
       with_common({{"L", "6", "string lengths in [2, 12]"}}), &run_additive_impossibility},
      {"lang-train", "Train RNN classifiers on formal languages",
       with_common({{"language", "tomita1,tomita2,tomita4,parity", "languages"},
                    {"seeds", "3", "replicates per language"},
                    {"m", "32", "hidden size"},
                    {"activation", "tanh", "tanh or relu"},
                    {"optimizer", "rmsprop", "rmsprop or sgd"},
                    {"lr", "0.01", "learning rate"},
                    {"momentum", "0", "sgd momentum"},
                    {"epochs", "100", "epochs"},
                    {"batch", "32", "batch size"},
                    {"train-readout", "true", "also train B"},
                    {"init-scale", "0.25", "multiplier on the N(0, 2/m) init std of W and A"},
                    {"loss", "logistic", "logistic or l2"},
                    {"lambda", "1", "output scale"},
                    {"n-train", "table", "training strings, or table"},
                    {"n-test", "table", "test strings, or table"},
                    {"len-min", "table", "shortest string, or table"},
                    {"len-max", "table", "longest string, or table"}}),
       &run_lang_train},
      {"existence-check", "Build A* from fitted H functions and compare the pseudo-network with the concept",
       with_common({{"grid-m", "2048,8192", "hidden sizes"},
                    {"L", "4", "sequence length"},
                    {"d", "4", "token dimension"},
                    {"eps", "0.05", "eps_x"},
                    {"p", "1", "concept neurons"},
                    {"d-out", "1", "output dimension"},
                    {"phi", "monomial:1", "concept activation preset"},
                    {"seeds", "5", "replicates per m"},
                    {"n-seqs", "64", "test sequences"},
                    {"n-mc", "20000", "Monte Carlo samples per H fit"},
                    {"fit-K", "8", "Hermite degree of H"},
                    {"storage", "auto", "auto, dense or streamed W"}}),
       &run_existence_check},
  };
  return defs;
}

const ExperimentDef& find_experiment(const std::string& name) {
  for (const auto& d : experiments()) {
    if (d.name == name) return d;
  }
  throw ConfigError("config: unknown subcommand '" + name + "'");
}

ExperimentConfig default_config(const ExperimentDef& def) { return ExperimentConfig(def.name, def.options); }

int run_experiment(const ExperimentConfig& cfg, const std::string& version, std::ostream& out, std::ostream& err) {
  auto report = [&](const char* kind, const std::string& msg) {
    std::string clean = msg;
    for (char& c : clean) {
      if (c == '\n') c = ' ';
    }
    err << "error: kind=" << kind << " subcommand=" << cfg.subcommand() << " message=" << clean << '\n';
  };
  try {
    const ExperimentDef& def = find_experiment(cfg.subcommand());
    const std::string dir = cfg.get_string("out");
    const bool plot = cfg.get_bool("plot");
    ExperimentOutput result = def.run(cfg);
    std::filesystem::create_directories(dir);
    const std::string config_line = cfg.resolved();
    for (const auto& t : result.tables) {
      const std::string path = (std::filesystem::path(dir) / t.file).string();
      write_text_file(path, render_csv(t, config_line, version));
      out << "wrote " << path << '\n';
    }
    if (plot) {
      for (const auto& c : result.charts) {
        const std::string path = (std::filesystem::path(dir) / c.file).string();
        write_text_file(path, render_svg(c));
        out << "wrote " << path << '\n';
      }
    }
    for (const auto& line : result.summary) out << line << '\n';
    return 0;
  } catch (const ConfigError& e) {
    report("config", e.what());
    return 2;
  } catch (const std::invalid_argument& e) {
    report("config", e.what());
    return 2;
  } catch (const std::exception& e) {
    report("numeric", e.what());
    return 3;
  }
}

}  // namespace seqlab::runner
