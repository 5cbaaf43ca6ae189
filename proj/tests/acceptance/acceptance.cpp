// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.
#include <seqlab/complexity.hpp>
#include <seqlab/concept.hpp>
#include <seqlab/fitting.hpp>
#include <seqlab/inversion.hpp>
#include <seqlab/languages.hpp>
#include <seqlab/rnn.hpp>
#include <seqlab/training.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

using namespace seqlab;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::vector<NormalizedSequence> sample_normalized(RngStream rng, std::size_t n, std::size_t L, std::size_t d,
                                                  double eps) {
  std::vector<NormalizedSequence> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(normalize(sample_true_sequence(rng, L, d), eps));
  return out;
}

// 1. Learned decoder: median avg_rel_l2 falls with m and rises with L.
Outcome inversion_trends() {
  const auto t0 = Clock::now();
  const std::vector<std::size_t> ms{500, 1000, 2000, 5000, 10000};
  const std::vector<std::size_t> Ls{2, 4, 6};
  const std::vector<std::size_t> ds{2, 4};
  // med[d][L][m]
  std::map<std::size_t, std::map<std::size_t, std::map<std::size_t, double>>> med;
  for (auto d : ds) {
    for (auto m : ms) {
      std::map<std::size_t, std::vector<double>> errs;
      for (std::uint64_t seed = 1; seed <= 3; ++seed) {
        InversionStudyConfig cfg;
        cfg.m = m;
        cfg.d = d;
        cfg.Ls = Ls;
        for (const auto& row : run_inversion_study(cfg, seed)) errs[row.L].push_back(row.errors.avg_rel_l2);
      }
      for (auto L : Ls) med[d][L][m] = median(errs[L]);
    }
  }
  bool ok = true;
  std::ostringstream why;
  for (auto d : ds) {
    for (auto L : Ls) {
      for (std::size_t i = 1; i < ms.size(); ++i) {
        if (!(med[d][L][ms[i]] < med[d][L][ms[i - 1]])) {
          ok = false;
          why << " not decreasing at d=" << d << " L=" << L << " m=" << ms[i];
        }
      }
    }
    for (auto m : ms) {
      for (std::size_t i = 1; i < Ls.size(); ++i) {
        if (!(med[d][Ls[i]][m] > med[d][Ls[i - 1]][m])) {
          ok = false;
          why << " not increasing at d=" << d << " m=" << m << " L=" << Ls[i];
        }
      }
    }
  }
  const double secs = seconds_since(t0);
  if (secs >= 1200) ok = false;
  std::ostringstream s;
  s << "d=4 L=4 medians m=500:" << num(med[4][4][500]) << " m=10000:" << num(med[4][4][10000])
    << "; runtime " << num(secs) << " s (limit 1200)" << why.str();
  return {ok, s.str()};
}

// 2. Analytic decoder: median L-inf error at m=8192 below m=512.
Outcome analytic_decoder() {
  const auto t0 = Clock::now();
  std::map<std::size_t, std::vector<double>> errs;
  for (std::size_t m : {512, 8192}) {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
      const RngStream root(seed);
      const RnnParams params = init_params(root.split("rnn"), m, 4, 1);
      const Decoder dec = build_decoder(params, 4, 0.05, DecoderVariant::full);
      const auto seqs = sample_normalized(root.split("inputs"), 100, 4, 4, 0.05);
      errs[m].push_back(inversion_errors(dec, make_decoder_data(params, dec, seqs)).avg_linf);
    }
  }
  const double small = median(errs[512]), large = median(errs[8192]);
  const double secs = seconds_since(t0);
  return {large < small && secs < 300,
          "median linf m=512: " + num(small) + ", m=8192: " + num(large) + "; runtime " + num(secs) + " s"};
}

// 3. Single-layer inversion concentration and m^-1/2 rate.
Outcome single_layer() {
  const auto t0 = Clock::now();
  std::map<std::size_t, std::vector<double>> errs;
  std::size_t within = 0;
  for (std::size_t m : {1024, 4096, 16384}) {
    for (std::uint64_t s = 1; s <= 200; ++s) {
      RngStream rng = RngStream(s).split("single-layer");
      const Mat T = gaussian_matrix(rng, m, 4, 1.0);
      const Vec v = gaussian_vector(rng, 4, 1.0);
      const Vec x = gaussian_vector(rng, 4, 1.0);
      const double err = std::abs(single_layer_invert(T, v, x, 1.0) - v.dot(x));
      errs[m].push_back(err);
      if (m == 4096 && err <= 5.0 * v.norm() * x.norm() / 64.0) ++within;
    }
  }
  const double ratio = median(errs[1024]) / median(errs[16384]);
  const double frac = static_cast<double>(within) / 200.0;
  const double secs = seconds_since(t0);
  return {frac >= 0.95 && ratio >= 2.0 && ratio <= 8.0 && secs < 60,
          "within bound " + num(frac) + " (need 0.95); median ratio 1024/16384 = " + num(ratio) +
              " (need [2, 8]); runtime " + num(secs) + " s"};
}

// 4. Complexity calculator.
Outcome complexity() {
  std::ostringstream why;
  bool ok = true;
  const ComplexityReport sq = complexity_report(taylor_preset("monomial:2"), 1.0, std::exp(-2.0));
  const double cs_exact = 1e4 * std::pow(3.0, 1.75);
  if (std::abs(sq.c_s - cs_exact) > 1e-6 * cs_exact) {
    ok = false;
    why << " C_s(z^2)=" << num(sq.c_s);
  }
  if (std::abs(sq.c_eps - 2e8) > 1e-6) {
    ok = false;
    why << " C_eps(z^2)=" << sq.c_eps;
  }
  const double eps = std::exp(-2.0);
  for (const auto& name : taylor_preset_names()) {
    // Logs, since C_eps of an entire function overflows a double.
    double last_s = -1e300, last_e = -1e300;
    for (double R : {0.5, 1.0, 2.0}) {
      const ComplexityReport r = complexity_report(taylor_preset(name, R), R, eps);
      if (!(r.log_c_s > last_s && r.log_c_eps > last_e)) {
        ok = false;
        why << " " << name << " not monotone in R at R=" << R;
      }
      last_s = r.log_c_s;
      last_e = r.log_c_eps;
    }
    const ComplexityReport looser = complexity_report(taylor_preset(name, 1.0), 1.0, 0.3);
    const ComplexityReport r = complexity_report(taylor_preset(name, 1.0), 1.0, eps);
    if (!(r.log_c_eps >= looser.log_c_eps)) {
      ok = false;
      why << " " << name << " C_eps not monotone in eps";
    }
    if (!(r.log_c_s <= r.log_c_eps)) {
      ok = false;
      why << " " << name << ": C_s=" << num(r.c_s) << " > C_eps=" << num(r.c_eps) << " at eps=e^-2";
    }
  }
  return {ok, "C_s(z^2)=" + num(sq.c_s) + " C_eps(z^2,e^-2)=" + num(sq.c_eps) + why.str()};
}

// 5. Concept acceptors agree with the recognizers on all strings up to length 12.
Outcome concept_oracle() {
  const auto t0 = Clock::now();
  std::size_t bad = 0;
  std::ostringstream s;
  for (const char* lang : {"dl1", "parity", "substring:0110", "substring:11", "substring:101"}) {
    const auto mm = concept_oracle_mismatches(lang, 12);
    bad += mm.size();
    s << lang << ":" << mm.size() << " ";
  }
  const double secs = seconds_since(t0);
  s << "mismatches; runtime " << num(secs) << " s";
  return {bad == 0 && secs < 60, s.str()};
}

// 6. D_L1 is out of reach of additive models.
Outcome dl1_impossibility() {
  const auto t0 = Clock::now();
  bool ok = true;
  std::ostringstream why;
  std::size_t blocks = 0;
  for (std::size_t L = 2; L <= 12; ++L) {
    for (std::size_t q = 0; q + 2 <= L; ++q) {
      ++blocks;
      if (!dl1_block_infeasible(q, L).infeasible) {
        ok = false;
        why << " feasible block q=" << q << " L=" << L;
      }
    }
  }
  for (std::size_t L = 2; L <= 6; ++L) {
    const double e = additive_min_error(L).min_error;
    if (std::abs(e - 0.25) > 1e-12) {
      ok = false;
      why << " min_error(L=" << L << ")=" << num(e);
    }
  }
  const double secs = seconds_since(t0);
  if (secs >= 120) ok = false;
  return {ok, std::to_string(blocks) + " blocks infeasible, min error 0.25 for L=2..6; runtime " + num(secs) + " s" +
                  why.str()};
}

// 7. Language training, best of three seeds.
Outcome language_training() {
  const auto t0 = Clock::now();
  TrainConfig base;
  base.activation = Activation::tanh;
  base.optimizer = {OptimizerKind::rmsprop, 1e-2, 0.0};
  base.epochs = 100;
  base.batch = 32;
  base.train_readout = true;
  base.init_scale = 0.25;
  bool ok = true;
  std::ostringstream s;
  for (const char* lang : {"tomita1", "tomita2", "tomita4", "parity"}) {
    const LanguageTableRow row = language_table_row(lang);
    double best = 0.0;
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
      const LabeledDataset data = generate_dataset(language_spec(lang), row.n_train, row.n_test, row.len_min,
                                                   row.len_max, RngStream(seed).split("data"));
      TrainConfig cfg = base;
      cfg.seed = seed;
      best = std::max(best, train_classifier(data, 32, cfg).final_test_acc);
    }
    if (best < 0.95) ok = false;
    s << lang << "=" << num(best) << " ";
  }
  const double secs = seconds_since(t0);
  if (secs >= 600) ok = false;
  s << "(best test accuracy, need 0.95); runtime " << num(secs) << " s";
  return {ok, s.str()};
}

// 8. First-order coupling residual shrinks with m.
Outcome coupling() {
  const auto t0 = Clock::now();
  std::vector<double> meds;
  for (std::size_t m : {256, 1024, 4096}) {
    std::vector<double> r;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
      const RngStream root(seed);
      const RnnParams params = init_params(root.split("rnn"), m, 4, 10);
      RngStream off_rng = root.split("offsets");
      const WeightOffsets offs = random_offsets(off_rng, m, 4, 1.0);
      RngStream in = root.split("inputs");
      const Mat tokens = normalize(sample_true_sequence(in, 6, 4), 0.05).tokens;
      r.push_back(coupling_residual(params, tokens, offs, 1.0));
    }
    meds.push_back(median(r));
  }
  const double secs = seconds_since(t0);
  return {meds[1] < meds[0] && meds[2] < meds[1] && secs < 120,
          "median residual m=256,1024,4096: " + num(meds[0]) + ", " + num(meds[1]) + ", " + num(meds[2]) +
              "; runtime " + num(secs) + " s"};
}

// 9. Hidden-norm concentration at every step.
Outcome hidden_norms() {
  const std::size_t m = 10000;
  const double tol = 10.0 / std::sqrt(static_cast<double>(m));
  std::size_t good = 0;
  std::vector<double> worst_by_ell(6, 0.0);
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    const RngStream root(seed);
    const RnnParams params = init_params(root.split("rnn"), m, 4, 1);
    RngStream in = root.split("inputs");
    const NormDiagnostics nd = norm_diagnostics(params, normalize(sample_true_sequence(in, 6, 4), 0.05));
    bool all = true;
    for (std::size_t l = 0; l < 6; ++l) {
      worst_by_ell[l] = std::max(worst_by_ell[l], nd.residuals[l]);
      if (nd.residuals[l] > tol) all = false;
    }
    good += all;
  }
  std::ostringstream s;
  s << good << "/100 seeds within " << num(tol) << " at every ell; worst residual by ell:";
  for (double w : worst_by_ell) s << " " << num(w);
  return {good >= 90, s.str()};
}

// 10. Reverse-mode gradients against central differences.
Outcome gradients() {
  const std::size_t m = 16, L = 3;
  double worst = 0.0;
  std::size_t points = 0;
  for (Activation act : {Activation::tanh, Activation::relu}) {
    TrainConfig cfg;
    cfg.activation = act;
    cfg.train_readout = true;
    RngStream pick = RngStream(99).split(to_string(act));
    std::size_t accepted = 0;
    for (std::uint64_t k = 0; accepted < 50; ++k) {
      const RnnParams p = init_params(RngStream(k).split("rnn"), m, 3, 1);
      Offsets off = Offsets::zeros(p);
      off.W = gaussian_matrix(pick, m, m, 0.05);
      off.A = gaussian_matrix(pick, m, 3, 0.05);
      off.B = gaussian_matrix(pick, 1, m, 0.05);
      std::string bits;
      for (std::size_t i = 0; i < L; ++i) bits += pick.uniform() < 0.5 ? '0' : '1';
      const Mat tokens = encode_tokens(bits, TokenEncoding::one_hot_bias);
      const Vec y = Vec::Constant(1, pick.uniform() < 0.5 ? 0.0 : 1.0);
      if (act == Activation::relu) {
        // Smooth point: every preactivation away from the kink.
        const Mat We = p.W.dense() + off.W, Ae = p.A + off.A;
        Vec h = Vec::Zero(static_cast<Eigen::Index>(m));
        double closest = 1e300;
        for (Eigen::Index l = 0; l < tokens.rows(); ++l) {
          const Vec g = Ae * tokens.row(l).transpose() + We * h;
          closest = std::min(closest, g.cwiseAbs().minCoeff());
          h = g.cwiseMax(0.0);
        }
        if (closest < 1e-3) continue;
      }
      ++accepted;
      ++points;
      const Gradients g = rnn_gradients(p, off, tokens, y, cfg);
      auto check = [&](Mat Offsets::*which, const Mat& analytic) {
        Offsets o = off;
        Mat& M = o.*which;
        Mat numeric(M.rows(), M.cols());
        const double h = 1e-6;
        for (Eigen::Index i = 0; i < M.size(); ++i) {
          const double keep = M.data()[i];
          M.data()[i] = keep + h;
          const double up = rnn_loss(p, o, tokens, y, cfg);
          M.data()[i] = keep - h;
          const double down = rnn_loss(p, o, tokens, y, cfg);
          M.data()[i] = keep;
          numeric.data()[i] = (up - down) / (2 * h);
        }
        const double denom = std::max(numeric.norm() + analytic.norm(), 1e-12);
        worst = std::max(worst, (numeric - analytic).norm() / denom);
      };
      check(&Offsets::W, g.W);
      check(&Offsets::A, g.A);
      check(&Offsets::B, *g.B);
    }
  }
  return {worst <= 1e-4, std::to_string(points) + " points, worst relative error " + num(worst) + " (limit 1e-4)"};
}

// 11. H fitting and the existence check.
Outcome h_fitting_and_existence() {
  bool ok = true;
  std::ostringstream s;
  FitHConfig fc;
  fc.n_mc = 20000;
  const std::vector<std::pair<const char*, std::function<double(double)>>> phis = {
      {"z", [](double z) { return z; }},
      {"z^2", [](double z) { return z * z; }},
      {"2z-z^2", [](double z) { return 2 * z - z * z; }},
  };
  s << "sup error";
  for (const auto& [name, phi] : phis) {
    const double err = fit_h(phi, 1.0, 1.0, fc, RngStream(1).split(name)).sup_error;
    if (!(err <= 0.05)) ok = false;
    s << " " << name << "=" << num(err);
  }
  std::vector<double> med_err;
  double corr_8192 = 0.0;
  for (std::size_t m : {2048, 8192, 32768}) {
    std::vector<double> errs, corrs;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      ExistenceConfig cfg;
      cfg.m = m;
      cfg.storage = m > 16384 ? WeightStorage::streamed : WeightStorage::dense;
      const ExistenceRun run = run_existence(cfg, seed);
      errs.push_back(run.stats.mean_abs_err);
      corrs.push_back(run.stats.correlation);
    }
    med_err.push_back(median(errs));
    if (m == 8192) corr_8192 = median(corrs);
  }
  if (!(corr_8192 > 0.0)) ok = false;
  if (!(med_err[1] <= med_err[0] && med_err[2] <= med_err[1])) ok = false;
  s << "; median correlation at m=8192 " << num(corr_8192) << "; median abs error m=2048,8192,32768: "
    << num(med_err[0]) << ", " << num(med_err[1]) << ", " << num(med_err[2]);
  return {ok, s.str()};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<const char*, Outcome (*)()>> criteria = {
      {"inversion trends with m and L", inversion_trends},
      {"analytic decoder error falls with m", analytic_decoder},
      {"single-layer inversion", single_layer},
      {"complexity calculator", complexity},
      {"concept/recognizer equivalence", concept_oracle},
      {"D_L1 additive impossibility", dl1_impossibility},
      {"language training", language_training},
      {"first-order coupling", coupling},
      {"hidden-norm concentration", hidden_norms},
      {"gradient correctness", gradients},
      {"H fitting and existence check", h_fitting_and_existence},
  };
  // Optional argument: comma-separated criterion numbers to run.
  std::vector<bool> selected(criteria.size(), argc < 2);
  if (argc >= 2) {
    std::stringstream ss(argv[1]);
    std::string item;
    while (std::getline(ss, item, ',')) {
      const int k = std::atoi(item.c_str());
      if (k >= 1 && k <= static_cast<int>(criteria.size())) selected[k - 1] = true;
    }
  }
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    if (!selected[i]) continue;
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("%s criterion %zu (%s): %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, o.detail.c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
