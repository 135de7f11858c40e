/* Python bindings for the spiking sequence engine. Arrays are numpy fp64
 * (complex128 where noted); sequence tensors are time-major (steps, batch,
 * channels), matching the C++ core. */

#include <pybind11/complex.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "spikeseq/analysis.hpp"
#include "spikeseq/bench.hpp"
#include "spikeseq/energy.hpp"
#include "spikeseq/equivalence.hpp"
#include "spikeseq/models.hpp"
#include "spikeseq/neurons.hpp"
#include "spikeseq/seqcore.hpp"
#include "spikeseq/synth.hpp"
#include "spikeseq/train.hpp"

namespace py = pybind11;
using namespace spikeseq;

namespace {

using NpReal = py::array_t<double, py::array::c_style | py::array::forcecast>;
using NpComplex = py::array_t<std::complex<double>, py::array::c_style | py::array::forcecast>;

template <class T>
Array<T> to_array(const py::array_t<T, py::array::c_style | py::array::forcecast>& a,
                  int expect_ndim, const char* name) {
  if (a.ndim() != expect_ndim)
    throw std::invalid_argument(std::string(name) + ": expected a " +
                                std::to_string(expect_ndim) + "-d array");
  std::vector<int64_t> shape(a.shape(), a.shape() + a.ndim());
  Array<T> out(shape);
  std::copy(a.data(), a.data() + a.size(), out.ptr());
  return out;
}

template <class T>
py::array_t<T> from_array(const Array<T>& a) {
  py::array_t<T> out(a.shape);
  std::copy(a.ptr(), a.ptr() + a.size(), out.mutable_data());
  return out;
}

RealSeq to_seq(const NpReal& a, const char* name) {
  return RealSeq(to_array<double>(a, 3, name), SignalKind::current);
}

py::dict match_dict(const MatchReport& r) {
  py::dict d;
  d["cases"] = r.cases;
  d["spike_mismatches"] = r.spike_mismatches;
  d["trace_mismatches"] = r.trace_mismatches;
  d["passed"] = r.passed();
  return d;
}

}  // namespace

PYBIND11_MODULE(_spikeseq, m) {
  m.doc() = "spiking sequence engine: parallel leaky and resonate neurons";
  m.attr("__version__") = "0.1.0";

  /* ---- kernels and convolution ---- */
  m.def(
      "lif_kernel",
      [](const NpReal& betas, int64_t steps) {
        return from_array(build_lif_kernel(to_array<double>(betas, 1, "betas"), steps).rows);
      },
      py::arg("betas"), py::arg("steps"),
      "Geometric decay kernel rows (channels, steps); row[t] weights an input t steps back.");
  m.def(
      "prf_kernel",
      [](const NpReal& delta, const NpReal& tau, const NpReal& theta, int64_t steps) {
        return from_array(build_prf_kernel(to_array<double>(delta, 1, "delta"),
                                           to_array<double>(tau, 1, "tau"),
                                           to_array<double>(theta, 1, "theta"), steps)
                              .rows);
      },
      py::arg("delta"), py::arg("tau"), py::arg("theta"), py::arg("steps"),
      "Damped-oscillator kernel rows (complex128).");
  m.def(
      "convolve",
      [](const NpReal& input, const NpReal& kernel) {
        DecayKernel<double> k{to_array<double>(kernel, 2, "kernel")};
        return from_array(causal_convolve(to_seq(input, "input"), k).values);
      },
      py::arg("input"), py::arg("kernel"),
      "Causal convolution of a (steps, batch, channels) input with kernel rows.");
  m.def(
      "convolve_complex",
      [](const NpReal& input, const NpComplex& kernel) {
        DecayKernel<std::complex<double>> k{
            to_array<std::complex<double>>(kernel, 2, "kernel")};
        return from_array(causal_convolve(to_seq(input, "input"), k).values);
      },
      py::arg("input"), py::arg("kernel"),
      "Causal convolution of a real input with complex kernel rows -> complex128.");

  /* ---- neurons ---- */
  m.def(
      "lif_sequential",
      [](const NpReal& input, const NpReal& betas, double v_th) {
        LifResult r = lif_sequential(to_seq(input, "input"),
                                     to_array<double>(betas, 1, "betas"), v_th);
        return py::make_tuple(from_array(r.spikes.values), from_array(r.potentials.values));
      },
      py::arg("input"), py::arg("betas"), py::arg("v_th") = 1.0,
      "Stepwise leaky neuron with soft reset -> (spikes, potentials).");
  m.def(
      "lif_parallel",
      [](const NpReal& input, const NpReal& betas, double v_th) {
        LifParallelResult r = lif_parallel(to_seq(input, "input"),
                                           to_array<double>(betas, 1, "betas"), v_th);
        return py::make_tuple(from_array(r.spikes.values), from_array(r.potentials.values),
                              from_array(r.thresholds.values));
      },
      py::arg("input"), py::arg("betas"), py::arg("v_th") = 1.0,
      "Convolution + threshold-scan route -> (spikes, potentials, thresholds).");
  m.def(
      "prf_sequential",
      [](const NpReal& input, const NpReal& delta, const NpReal& tau, const NpReal& theta,
         double v_th) {
        PrfResult r = prf_sequential(to_seq(input, "input"), to_array<double>(delta, 1, "delta"),
                                     to_array<double>(tau, 1, "tau"),
                                     to_array<double>(theta, 1, "theta"), v_th);
        return py::make_tuple(from_array(r.spikes.values), from_array(r.potentials.values));
      },
      py::arg("input"), py::arg("delta"), py::arg("tau"), py::arg("theta"),
      py::arg("v_th") = 1.0, "Stepwise oscillator neuron -> (spikes, potentials complex128).");
  m.def(
      "prf_parallel",
      [](const NpReal& input, const NpReal& delta, const NpReal& tau, const NpReal& theta,
         double v_th) {
        PrfResult r = prf_parallel(to_seq(input, "input"), to_array<double>(delta, 1, "delta"),
                                   to_array<double>(tau, 1, "tau"),
                                   to_array<double>(theta, 1, "theta"), v_th);
        return py::make_tuple(from_array(r.spikes.values), from_array(r.potentials.values));
      },
      py::arg("input"), py::arg("delta"), py::arg("tau"), py::arg("theta"),
      py::arg("v_th") = 1.0, "Convolution route -> (spikes, potentials complex128).");
  m.def(
      "prf_deploy",
      [](const NpReal& input, const NpReal& delta, const NpReal& tau, const NpReal& theta,
         double v_th) {
        const RealArray d = to_array<double>(delta, 1, "delta");
        DeployParams p = prf_deploy_params(d, to_array<double>(tau, 1, "tau"),
                                           to_array<double>(theta, 1, "theta"));
        DeployResult r = prf_deploy_run(to_seq(input, "input"), p, d, v_th);
        return py::make_tuple(from_array(r.spikes.values), from_array(r.re.values),
                              from_array(r.im.values));
      },
      py::arg("input"), py::arg("delta"), py::arg("tau"), py::arg("theta"),
      py::arg("v_th") = 1.0,
      "Two-real-state deployment recurrence -> (spikes, re, im).");
  m.def(
      "spatial",
      [](const NpReal& input, const NpReal& alpha, double v_th) {
        return from_array(
            spatial_forward(to_seq(input, "input"), to_array<double>(alpha, 1, "alpha"), v_th)
                .values);
      },
      py::arg("input"), py::arg("alpha"), py::arg("v_th") = 1.0,
      "Stateless amplitude-scaled threshold gate.");

  /* ---- verification suites ---- */
  m.def(
      "run_equivalence",
      [](int64_t cases, uint64_t seed, bool leaky, bool resonate, double tolerance,
         bool inject_kernel_bug, int64_t max_steps, int64_t max_batch, int64_t max_channels) {
        EquivConfig cfg;
        cfg.cases = cases;
        cfg.seed = seed;
        cfg.leaky = leaky;
        cfg.resonate = resonate;
        cfg.tolerance = tolerance;
        cfg.inject_kernel_bug = inject_kernel_bug;
        cfg.max_steps = max_steps;
        cfg.max_batch = max_batch;
        cfg.max_channels = max_channels;
        EquivReport r = run_equivalence_suite(cfg);
        py::dict d;
        d["cases_run"] = r.cases_run;
        d["failed_cases"] = r.failed_cases;
        d["spike_mismatches"] = r.spike_mismatches;
        d["max_rel_err_leaky"] = r.max_rel_err_leaky;
        d["max_rel_err_resonate"] = r.max_rel_err_resonate;
        d["failures"] = r.failures;
        d["passed"] = r.passed();
        return d;
      },
      py::arg("cases") = 100, py::arg("seed") = 2024, py::arg("leaky") = true,
      py::arg("resonate") = true, py::arg("tolerance") = 1e-9,
      py::arg("inject_kernel_bug") = false, py::arg("max_steps") = 512,
      py::arg("max_batch") = 8, py::arg("max_channels") = 32,
      "Random-configuration agreement suite across the neuron routes.");
  m.def(
      "check_reset_as_threshold",
      [](int64_t cases, uint64_t seed) { return match_dict(check_reset_as_threshold(cases, seed)); },
      py::arg("cases") = 100, py::arg("seed") = 1,
      "Soft reset vs threshold-adaptation form: spike trains must match exactly.");
  m.def(
      "check_oscillator_degenerates",
      [](int64_t cases, uint64_t seed) {
        return match_dict(check_oscillator_degenerates(cases, seed));
      },
      py::arg("cases") = 100, py::arg("seed") = 1,
      "Zero-frequency unit-step oscillator vs plain decay accumulator, bitwise.");
  m.def(
      "membrane_variance",
      [](double delta, double tau, double sigma, int64_t trials, int64_t steps, uint64_t seed) {
        VarianceReport r = check_membrane_variance(delta, tau, sigma, trials, steps, seed);
        py::dict d;
        d["empirical"] = r.empirical;
        d["exact"] = r.exact_value;
        d["limit"] = r.limit_value;
        d["approx"] = r.approx_value;
        d["rel_se"] = r.rel_se;
        d["trials"] = r.trials;
        d["steps"] = r.steps;
        return d;
      },
      py::arg("delta") = 0.5, py::arg("tau") = 4.0, py::arg("sigma") = 1.0,
      py::arg("trials") = 10000, py::arg("steps") = 0, py::arg("seed") = 1,
      "Monte Carlo stationary membrane variance vs the closed forms.");
  m.def(
      "frequency_response",
      [](double tau, double theta, double delta, int64_t steps, const NpReal& omegas) {
        std::vector<double> om(omegas.data(), omegas.data() + omegas.size());
        FreqSimConfig cfg;
        cfg.tau = tau;
        cfg.theta = theta;
        cfg.delta = delta;
        cfg.steps = steps;
        std::vector<double> closed = frequency_response_closed(tau, theta, om);
        std::vector<double> sim = frequency_response_sim(cfg, om);
        return py::make_tuple(py::cast(closed), py::cast(sim));
      },
      py::arg("tau"), py::arg("theta"), py::arg("delta"), py::arg("steps"), py::arg("omegas"),
      "(closed-form gains, simulated gains) at the given drive frequencies.");

  /* ---- performance and energy ---- */
  m.def(
      "run_bench",
      [](std::vector<int64_t> lens, int64_t batch, int64_t channels, int64_t repeats,
         uint64_t seed) {
        BenchConfig cfg;
        cfg.seq_lens = std::move(lens);
        cfg.batch = batch;
        cfg.channels = channels;
        cfg.repeats = repeats;
        cfg.seed = seed;
        std::vector<BenchRecord> recs = run_bench(cfg);
        py::list records;
        for (const BenchRecord& r : recs) {
          py::dict d;
          d["seq_len"] = r.seq_len;
          d["batch"] = r.batch;
          d["channels"] = r.channels;
          d["mode"] = r.mode;
          d["phase"] = r.phase;
          d["ms"] = r.ms;
          d["repeats"] = r.repeats;
          records.append(d);
        }
        py::dict speedups;
        for (const auto& [len, s] : bench_speedups(recs))
          speedups[py::int_(len)] = s;
        py::dict out;
        out["records"] = records;
        out["speedups"] = speedups;
        return out;
      },
      py::arg("lens") = std::vector<int64_t>{256, 1024}, py::arg("batch") = 64,
      py::arg("channels") = 128, py::arg("repeats") = 3, py::arg("seed") = 1,
      "Fused vs per-step training-step timings; wall-clock fields vary run to run.");
  m.def(
      "estimate_energy",
      [](const std::vector<py::dict>& layers, int64_t seq_len) {
        std::vector<LayerSpec> specs;
        for (const py::dict& lj : layers) {
          LayerSpec s;
          if (lj.contains("family")) s.family = parse_family(lj["family"].cast<std::string>());
          if (lj.contains("width")) s.width = lj["width"].cast<int64_t>();
          if (lj.contains("state")) s.state = lj["state"].cast<int64_t>();
          if (lj.contains("rate_token")) s.rate_token = lj["rate_token"].cast<double>();
          if (lj.contains("rate_channel")) s.rate_channel = lj["rate_channel"].cast<double>();
          specs.push_back(s);
        }
        EnergyConstants c;
        EnergyReport r = estimate_energy(specs, c, seq_len);
        py::list per_layer;
        for (const LayerEnergy& e : r.layers) {
          py::dict d;
          d["family"] = e.family;
          d["token_pj"] = e.token_pj;
          d["channel_pj"] = e.channel_pj;
          d["total_pj"] = e.total_pj;
          per_layer.append(d);
        }
        py::dict out;
        out["layers"] = per_layer;
        out["per_step_pj"] = r.per_step_pj;
        out["total_mj"] = r.total_mj;
        out["seq_len"] = r.seq_len;
        return out;
      },
      py::arg("layers"), py::arg("seq_len") = 1,
      "Operation-count energy model. Each layer dict: family ('ours', 's4-legs', "
      "'binary-s4d', 'gsu'), width, state, rate_token, rate_channel.");

  /* ---- training smoke ---- */
  m.def(
      "train_impulse",
      [](const std::string& temporal, int64_t width, int64_t depth, int64_t epochs,
         int64_t batch, double lr, double neuron_lr, double embed_scale, double lif_beta,
         uint64_t model_seed, uint64_t seed) {
        ImpulseTask task = make_impulse_task(ImpulseTaskConfig{});
        TrainConfig tc;
        tc.model.width = width;
        tc.model.depth = depth;
        tc.model.classes = 2;
        tc.model.temporal = temporal == "lif" ? TemporalKind::lif : TemporalKind::prf;
        tc.model.lif_beta = lif_beta;
        tc.model.embed_scale = embed_scale;
        tc.model.seed = model_seed;
        tc.lr = lr;
        tc.neuron_lr = neuron_lr;
        tc.batch = batch;
        tc.epochs = epochs;
        tc.seed = seed;
        Model model = Model::make(tc.model);
        TrainResult r = train_model(model, tc, task.train, &task.test);
        py::list hist;
        for (const EpochMetrics& e : r.history) {
          py::dict d;
          d["epoch"] = e.epoch;
          d["train_loss"] = e.train_loss;
          d["train_acc"] = e.train_acc;
          d["test_acc"] = e.test_acc;
          hist.append(d);
        }
        return hist;
      },
      py::arg("temporal") = "prf", py::arg("width") = 32, py::arg("depth") = 1,
      py::arg("epochs") = 5, py::arg("batch") = 16, py::arg("lr") = 0.02,
      py::arg("neuron_lr") = 0.01, py::arg("embed_scale") = 1.5, py::arg("lif_beta") = 0.5,
      py::arg("model_seed") = 5, py::arg("seed") = 17,
      "Train a small spiking mixer on the which-half impulse task; returns epoch metrics.");
}
