/* Acceptance suite: each criterion prints one [PASS]/[FAIL] line and the
 * binary exits nonzero if any requested criterion fails. Run with a number
 * (1-10) to check a single criterion, or with no arguments for the full
 * sweep. Gates and tolerances are fixed here on purpose; loosening them is
 * not a fix for a failing build. */

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <string>
#include <vector>

#include "spikeseq/analysis.hpp"
#include "spikeseq/bench.hpp"
#include "spikeseq/dataio.hpp"
#include "spikeseq/energy.hpp"
#include "spikeseq/equivalence.hpp"
#include "spikeseq/models.hpp"
#include "spikeseq/report.hpp"
#include "spikeseq/rng.hpp"
#include "spikeseq/synth.hpp"
#include "spikeseq/train.hpp"
#include "spikeseq/traingrad.hpp"

using namespace spikeseq;

namespace {

struct Outcome {
  bool pass = false;
  std::string details;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

/* 1. Leaky neuron: the convolution + threshold-scan route reproduces the
 * stepwise recurrence: spikes bitwise, membranes within 1e-9 relative. */
Outcome criterion_leaky_equivalence() {
  EquivConfig cfg;
  cfg.cases = 1000;
  cfg.leaky = true;
  cfg.resonate = false;
  EquivReport r = run_equivalence_suite(cfg);
  Outcome o;
  o.pass = r.passed() && r.cases_run == cfg.cases;
  o.details = std::to_string(r.cases_run) + " cases, " + std::to_string(r.spike_mismatches) +
              " spike mismatches, max membrane rel err " + fmt("%.3e", r.max_rel_err_leaky) +
              " (gate 1e-9)";
  return o;
}

/* 2. Oscillator neuron: recurrence vs convolution vs two-real-state deploy
 * form agree within 1e-9; spikes identical. */
Outcome criterion_oscillator_equivalence() {
  EquivConfig cfg;
  cfg.cases = 1000;
  cfg.leaky = false;
  cfg.resonate = true;
  EquivReport r = run_equivalence_suite(cfg);
  Outcome o;
  o.pass = r.passed() && r.cases_run == cfg.cases;
  o.details = std::to_string(r.cases_run) + " cases, " + std::to_string(r.spike_mismatches) +
              " spike mismatches, max trace rel err " + fmt("%.3e", r.max_rel_err_resonate) +
              " (gate 1e-9)";
  return o;
}

/* 3. Soft reset rewritten as threshold adaptation: identical spike trains
 * on 1000 random cases. */
Outcome criterion_reset_as_threshold() {
  MatchReport r = check_reset_as_threshold(1000, 20240301ULL);
  Outcome o;
  o.pass = r.passed() && r.cases == 1000;
  o.details = std::to_string(r.cases) + " cases, " + std::to_string(r.spike_mismatches) +
              " spike mismatches, " + std::to_string(r.trace_mismatches) + " trace mismatches";
  return o;
}

/* 4. Oscillator at zero frequency and unit step degenerates to a reset-free
 * accumulator with decay exp(-1/tau), bitwise. */
Outcome criterion_oscillator_degenerates() {
  MatchReport r = check_oscillator_degenerates(100, 20240402ULL);
  Outcome o;
  o.pass = r.passed() && r.cases == 100;
  o.details = std::to_string(r.cases) + " cases, " + std::to_string(r.spike_mismatches) +
              " spike mismatches, " + std::to_string(r.trace_mismatches) +
              " real-part mismatches (bitwise)";
  return o;
}

/* 5. Stationary membrane variance under white input: Monte Carlo at 1e5
 * trials within 3 standard errors of the closed form; small-step
 * approximation within 1% of the limit; pinned values at
 * delta=0.5, tau=4, sigma=1. */
Outcome criterion_membrane_variance() {
  VarianceReport r = check_membrane_variance(0.5, 4.0, 1.0, 100000, 0, 20240503ULL);
  const double se = r.rel_se * r.exact_value;
  const bool mc_ok = std::abs(r.empirical - r.exact_value) <= 3.0 * se;
  const bool exact_ok = std::abs(r.limit_value - 1.1302) < 5e-5;
  const bool approx_ok = std::abs(r.approx_value - 1.0) < 1e-12;
  const double small_exact = variance_limit(0.04, 4.0, 1.0);  // delta/tau = 0.01
  const double small_approx = variance_approx(0.04, 4.0, 1.0);
  const bool smallstep_ok = std::abs(small_approx - small_exact) / small_exact < 0.01;
  Outcome o;
  o.pass = mc_ok && exact_ok && approx_ok && smallstep_ok;
  o.details = "empirical " + fmt("%.5f", r.empirical) + " vs exact " +
              fmt("%.5f", r.exact_value) + " (|diff| " +
              fmt("%.2e", std::abs(r.empirical - r.exact_value)) + " <= 3SE " +
              fmt("%.2e", 3.0 * se) + (mc_ok ? ", ok" : ", VIOLATED") + "); limit " +
              fmt("%.4f", r.limit_value) + " (want 1.1302), approx " +
              fmt("%.1f", r.approx_value) + " (want 1.0); small-step gap " +
              fmt("%.3f", 100.0 * std::abs(small_approx - small_exact) / small_exact) +
              "% (gate 1%)";
  return o;
}

/* 6. Steady-state gain of the driven oscillator peaks at the preferred
 * frequency on a theta/50 grid, and the peak height matches the time
 * constant within 10% for (tau=2, theta=0.5, delta=0.1). */
Outcome criterion_frequency_response() {
  FreqSimConfig cfg;  // tau=2, theta=0.5, delta=0.1
  const double res = cfg.theta / 50.0;
  std::vector<double> omegas;
  for (int i = 0; i <= 100; ++i) omegas.push_back(res * (double)i);  // [0, 2*theta]
  std::vector<double> sim = frequency_response_sim(cfg, omegas);
  const size_t peak = (size_t)(std::max_element(sim.begin(), sim.end()) - sim.begin());
  const double peak_omega = omegas[peak];
  const double peak_gain = sim[peak];
  const bool at_theta = std::abs(peak_omega - cfg.theta) < res / 2.0;
  const bool height_ok = std::abs(peak_gain - cfg.tau) / cfg.tau <= 0.10;
  Outcome o;
  o.pass = at_theta && height_ok;
  o.details = "peak at omega " + fmt("%.3f", peak_omega) + " (want " + fmt("%.3f", cfg.theta) +
              ", grid " + fmt("%.3f", res) + "), height " + fmt("%.4f", peak_gain) + " vs tau " +
              fmt("%.1f", cfg.tau) + " (" + fmt("%.2f", 100.0 * std::abs(peak_gain - cfg.tau) / cfg.tau) +
              "% off, gate 10%)";
  return o;
}

/* 7. Analytic gradients vs central finite differences (h=1e-6) through a
 * 2-block spiking mixer at (T=32, B=2, D=8), smoothed threshold so the
 * loss is differentiable: max relative error <= 1e-5 over all parameters. */
Outcome criterion_gradient_check() {
  ModelConfig mc;
  mc.width = 8;
  mc.depth = 2;
  mc.classes = 10;
  mc.input_channels = 1;
  mc.seed = 3;
  const int64_t T = 32, B = 2;

  SplitMix64 rng(11);
  traingrad::Tensor input({T, B, 1});
  for (int64_t i = 0; i < input.size(); ++i) input[i] = rng.normal();
  std::vector<int32_t> labels((size_t)B);
  for (auto& l : labels) l = (int32_t)rng.below((uint64_t)mc.classes);

  Model model = Model::make(mc);
  auto loss_value = [&]() {
    traingrad::Tape tape(true);  // smoothed forward
    model.bind(tape);
    traingrad::Var logits = model.forward(tape, input);
    return tape.scalar(tape.cross_entropy(logits, labels));
  };

  {  // analytic pass
    traingrad::Tape tape(true);
    model.bind(tape);
    traingrad::Var logits = model.forward(tape, input);
    tape.backward(tape.cross_entropy(logits, labels));
    model.collect_grads(tape);
  }

  const double h = 1e-6;
  double worst = 0.0;
  std::string worst_name;
  int64_t checked = 0;
  for (Param* p : model.params()) {
    for (int64_t i = 0; i < p->value.size(); ++i) {
      const double keep = p->value[i];
      p->value[i] = keep + h;
      const double up = loss_value();
      p->value[i] = keep - h;
      const double dn = loss_value();
      p->value[i] = keep;
      const double fd = (up - dn) / (2.0 * h);
      const double err = std::abs(p->grad[i] - fd) / std::max(1e-4, std::abs(fd));
      if (err > worst) {
        worst = err;
        worst_name = p->name + "[" + std::to_string(i) + "]";
      }
      ++checked;
    }
  }
  Outcome o;
  o.pass = worst <= 1e-5;
  o.details = std::to_string(checked) + " parameters, max rel err " + fmt("%.3e", worst) +
              " at " + worst_name + " (gate 1e-5)";
  return o;
}

/* 8. Timing contract for the fused route vs the per-step graph on one
 * training step at (B=64, N=128): faster at every L in {256, 1024, 4096},
 * monotonically nondecreasing speedup, and at least 2x at L=1024.
 * Measured honestly: same inputs, dtype, layout and allocator; medians
 * over 5 repeats after a warmup. */
Outcome criterion_speedup_trend() {
  BenchConfig cfg;
  cfg.repeats = 5;
  std::vector<BenchRecord> recs = run_bench(cfg);
  std::vector<std::pair<int64_t, double>> sp = bench_speedups(recs);

  bool faster_everywhere = true, monotone = true, twofold_at_1024 = false;
  std::string per_len;
  double prev = 0.0;
  for (size_t i = 0; i < sp.size(); ++i) {
    const auto& [len, s] = sp[i];
    per_len += (i ? ", " : "") + std::string("L=") + std::to_string(len) + ": " + fmt("%.2f", s) + "x";
    if (s <= 1.0) faster_everywhere = false;
    if (i > 0 && s < prev) monotone = false;
    if (len == 1024 && s >= 2.0) twofold_at_1024 = true;
    prev = s;
  }
  Outcome o;
  o.pass = faster_everywhere && monotone && twofold_at_1024;
  o.details = per_len + "; parallel faster at every L: " + (faster_everywhere ? "yes" : "NO") +
              "; monotone: " + (monotone ? "yes" : "NO") +
              "; >=2x at L=1024: " + (twofold_at_1024 ? "yes" : "NO");
  return o;
}

Dataset take_samples(const Dataset& d, int64_t count) {
  count = std::min(count, d.samples());
  Dataset out;
  out.inputs = traingrad::Tensor({count, d.steps()});
  std::copy(d.inputs.ptr(), d.inputs.ptr() + count * d.steps(), out.inputs.ptr());
  out.labels.assign(d.labels.begin(), d.labels.begin() + count);
  return out;
}

/* 9. Long-range recall: on the which-half impulse task (L=256) the
 * oscillator network reaches >= 95% test accuracy within 50 epochs while
 * the leaky network (fixed decay 0.5) stays <= 70% on the same budget.
 * Then a training smoke on a sequential-pixel digit corpus: strictly
 * decreasing loss over 5 epochs. Set SPIKESEQ_DATA_DIR to use a real IDX
 * corpus; otherwise a deterministic synthetic one is generated. */
Outcome criterion_long_range() {
  ImpulseTask task = make_impulse_task(ImpulseTaskConfig{});

  TrainConfig tc;
  tc.model.width = 32;
  tc.model.depth = 1;
  tc.model.classes = 2;
  tc.model.embed_scale = 1.5;
  tc.model.seed = 5;
  tc.lr = 0.02;
  tc.neuron_lr = 0.01;
  tc.batch = 16;
  tc.epochs = 50;
  tc.seed = 17;

  tc.model.temporal = TemporalKind::prf;
  Model osc = Model::make(tc.model);
  TrainResult ro = train_model(osc, tc, task.train, &task.test);
  double osc_best = 0.0;
  int64_t osc_epoch = -1;
  for (const EpochMetrics& m : ro.history)
    if (m.test_acc > osc_best) {
      osc_best = m.test_acc;
      osc_epoch = m.epoch;
    }

  tc.model.temporal = TemporalKind::lif;
  tc.model.lif_beta = 0.5;
  Model leaky = Model::make(tc.model);
  TrainResult rl = train_model(leaky, tc, task.train, &task.test);
  double leaky_best = 0.0;
  for (const EpochMetrics& m : rl.history) leaky_best = std::max(leaky_best, m.test_acc);

  const bool osc_ok = osc_best >= 0.95;
  const bool leaky_ok = leaky_best <= 0.70;

  // digit smoke: data dir override, else deterministic synthetic corpus
  std::string images, labels_path;
  const char* dir = std::getenv("SPIKESEQ_DATA_DIR");
  bool from_env = false;
  if (dir) {
    for (const char* suffix : {".gz", ""}) {
      const std::string ip = std::string(dir) + "/train-images-idx3-ubyte" + suffix;
      const std::string lp = std::string(dir) + "/train-labels-idx1-ubyte" + suffix;
      if (std::filesystem::exists(ip) && std::filesystem::exists(lp)) {
        images = ip;
        labels_path = lp;
        from_env = true;
        break;
      }
    }
  }
  if (!from_env) {
    const auto base = std::filesystem::temp_directory_path();
    images = (base / "spikeseq_accept_digits_images.idx.gz").string();
    labels_path = (base / "spikeseq_accept_digits_labels.idx.gz").string();
    write_synthetic_digits(images, labels_path, 2400, 33);
  }
  ImageSet set = load_image_set(images, labels_path);
  Dataset digits = take_samples(image_set_to_sequences(set, 4.0), 10000);

  TrainConfig sc;
  sc.model.width = 48;
  sc.model.depth = 1;
  sc.model.classes = 10;
  sc.model.seed = 9;
  sc.lr = 0.01;
  sc.neuron_lr = 0.003;
  sc.batch = 32;
  sc.epochs = 5;
  sc.seed = 21;
  Model smoke = Model::make(sc.model);
  TrainResult rs = train_model(smoke, sc, digits, nullptr);
  bool monotone = rs.history.size() == 5;
  std::string losses;
  for (size_t i = 0; i < rs.history.size(); ++i) {
    losses += (i ? "," : "") + fmt("%.4f", rs.history[i].train_loss);
    if (i > 0 && rs.history[i].train_loss >= rs.history[i - 1].train_loss) monotone = false;
  }

  Outcome o;
  o.pass = osc_ok && leaky_ok && monotone;
  o.details = "oscillator best test acc " + fmt("%.3f", osc_best) + " (epoch " +
              std::to_string(osc_epoch) + ", gate >=0.95), leaky best " + fmt("%.3f", leaky_best) +
              " (gate <=0.70); smoke losses [" + losses + "] " +
              (monotone ? "strictly decreasing" : "NOT monotone") +
              (from_env ? " on corpus from SPIKESEQ_DATA_DIR" : " on synthetic corpus");
  return o;
}

/* 10. Operation-count energy: an 8-layer spiking stack (D=128, measured
 * firing rate 3.53%) against a dense state-space stack (H=64): ratio
 * <= 0.05 and within 3x of 0.0147. */
Outcome criterion_energy_ratio() {
  EnergyConstants c;
  std::vector<LayerSpec> ours(8), dense(8);
  for (int i = 0; i < 8; ++i) {
    ours[(size_t)i].family = LayerFamily::ours;
    ours[(size_t)i].width = 128;
    ours[(size_t)i].rate_token = 0.0353;
    ours[(size_t)i].rate_channel = 0.0353;
    dense[(size_t)i].family = LayerFamily::s4_legs;
    dense[(size_t)i].width = 128;
    dense[(size_t)i].state = 64;
  }
  EnergyReport ro = estimate_energy(ours, c, 2048);
  EnergyReport rd = estimate_energy(dense, c, 2048);
  const double ratio = ro.per_step_pj / rd.per_step_pj;
  const bool under_cap = ratio <= 0.05;
  const bool near_ref = ratio >= 0.0147 / 3.0 && ratio <= 0.0147 * 3.0;
  Outcome o;
  o.pass = under_cap && near_ref;
  o.details = "ratio " + fmt("%.5f", ratio) + " (gate <=0.05, reference band [" +
              fmt("%.5f", 0.0147 / 3.0) + ", " + fmt("%.5f", 0.0147 * 3.0) + "])";
  return o;
}

struct Criterion {
  const char* name;
  Outcome (*run)();
};

const Criterion kCriteria[] = {
    {"leaky routes agree", criterion_leaky_equivalence},
    {"oscillator routes agree", criterion_oscillator_equivalence},
    {"reset equals threshold adaptation", criterion_reset_as_threshold},
    {"oscillator degenerates to accumulator", criterion_oscillator_degenerates},
    {"membrane variance matches closed form", criterion_membrane_variance},
    {"gain peaks at preferred frequency", criterion_frequency_response},
    {"analytic gradients match finite differences", criterion_gradient_check},
    {"fused route speedup trend", criterion_speedup_trend},
    {"long-range recall and training smoke", criterion_long_range},
    {"energy ratio vs dense baseline", criterion_energy_ratio},
};

}  // namespace

int main(int argc, char** argv) {
  std::vector<int> which;
  if (argc <= 1) {
    for (int i = 1; i <= 10; ++i) which.push_back(i);
  } else {
    for (int a = 1; a < argc; ++a) {
      const int n = std::atoi(argv[a]);
      if (n < 1 || n > 10) {
        std::fprintf(stderr, "usage: %s [criterion 1-10 ...]\n", argv[0]);
        return 2;
      }
      which.push_back(n);
    }
  }
  bool all_pass = true;
  for (int n : which) {
    const Criterion& c = kCriteria[n - 1];
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.pass = false;
      o.details = std::string("exception: ") + e.what();
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("[%s] criterion %d: %s — %s (%.1fs)\n", o.pass ? "PASS" : "FAIL", n, c.name,
                o.details.c_str(), secs);
    std::fflush(stdout);
    if (!o.pass) all_pass = false;
  }
  return all_pass ? 0 : 1;
}
