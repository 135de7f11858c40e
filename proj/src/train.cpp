#include "spikeseq/train.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <numeric>
#include <stdexcept>

#include "spikeseq/rng.hpp"

namespace spikeseq {

namespace {

using traingrad::Tensor;
using traingrad::Var;

constexpr char kCkptMagic[8] = {'S', 'S', 'E', 'Q', 'C', 'K', 'P', '1'};

Tensor batch_input(const Dataset& data, const std::vector<int64_t>& order, int64_t first,
                   int64_t count) {
  const int64_t steps = data.steps();
  Tensor x({steps, count, 1});
  for (int64_t i = 0; i < count; ++i) {
    const double* row = data.inputs.ptr() + order[(size_t)(first + i)] * steps;
    for (int64_t t = 0; t < steps; ++t) x[t * count + i] = row[t];
  }
  return x;
}

std::vector<int32_t> batch_labels(const Dataset& data, const std::vector<int64_t>& order,
                                  int64_t first, int64_t count) {
  std::vector<int32_t> y((size_t)count);
  for (int64_t i = 0; i < count; ++i) y[(size_t)i] = data.labels[(size_t)order[(size_t)(first + i)]];
  return y;
}

int64_t argmax_row(const Tensor& logits, int64_t row) {
  const int64_t classes = logits.dim(1);
  const double* p = logits.ptr() + row * classes;
  int64_t best = 0;
  for (int64_t c = 1; c < classes; ++c)
    if (p[c] > p[best]) best = c;
  return best;
}

}  // namespace

void AdamW::step(const std::vector<Param*>& params) {
  if (m_.empty()) {
    for (Param* p : params) {
      m_.emplace_back(p->value.shape, 0.0);
      v_.emplace_back(p->value.shape, 0.0);
    }
  }
  if (m_.size() != params.size()) throw std::logic_error("AdamW: parameter set changed");
  ++t;
  const double bc1 = 1.0 - std::pow(beta1, (double)t);
  const double bc2 = 1.0 - std::pow(beta2, (double)t);
  for (size_t pi = 0; pi < params.size(); ++pi) {
    Param& p = *params[pi];
    if (!p.grad.data) continue;  // no gradient reached this leaf
    const double rate = p.neuron ? neuron_lr : lr;
    const bool decay = !p.neuron && p.value.shape.size() >= 2;
    double* w = p.value.ptr();
    const double* g = p.grad.ptr();
    double* mb = m_[pi].ptr();
    double* vb = v_[pi].ptr();
    const int64_t n = p.value.size();
    for (int64_t i = 0; i < n; ++i) {
      mb[i] = beta1 * mb[i] + (1.0 - beta1) * g[i];
      vb[i] = beta2 * vb[i] + (1.0 - beta2) * g[i] * g[i];
      const double mhat = mb[i] / bc1;
      const double vhat = vb[i] / bc2;
      double upd = mhat / (std::sqrt(vhat) + eps);
      if (decay) upd += weight_decay * w[i];
      w[i] -= rate * upd;
    }
  }
}

void clamp_neuron_params(Model& model) {
  if (model.cfg.temporal != TemporalKind::prf) return;
  const double ln_half = std::log(0.5);
  for (Block& b : model.blocks) {
    for (int64_t i = 0; i < b.log_delta.value.size(); ++i) {
      const double cap = b.log_tau.value[i] + ln_half;  // delta <= tau/2
      if (b.log_delta.value[i] > cap) b.log_delta.value[i] = cap;
    }
  }
}

EvalResult evaluate(Model& model, const Dataset& data, int64_t batch) {
  const int64_t n = data.samples();
  std::vector<int64_t> order((size_t)n);
  std::iota(order.begin(), order.end(), 0);
  double loss_sum = 0.0;
  int64_t correct = 0;
  for (int64_t first = 0; first < n; first += batch) {
    const int64_t count = std::min(batch, n - first);
    traingrad::Tape tape;
    model.bind(tape);
    Tensor x = batch_input(data, order, first, count);
    std::vector<int32_t> y = batch_labels(data, order, first, count);
    Var logits = model.forward(tape, x);
    Var loss = tape.cross_entropy(logits, y);
    loss_sum += tape.scalar(loss) * (double)count;
    const Tensor& lv = tape.value(logits);
    for (int64_t i = 0; i < count; ++i)
      if (argmax_row(lv, i) == y[(size_t)i]) ++correct;
  }
  EvalResult r;
  r.loss = n ? loss_sum / (double)n : 0.0;
  r.acc = n ? (double)correct / (double)n : 0.0;
  return r;
}

TrainResult train_model(Model& model, const TrainConfig& cfg, const Dataset& train_data,
                        const Dataset* test_data) {
  if (train_data.samples() == 0) throw std::invalid_argument("train: empty dataset");
  AdamW opt;
  opt.lr = cfg.lr;
  opt.neuron_lr = cfg.neuron_lr;
  opt.weight_decay = cfg.weight_decay;

  TrainResult result;
  const int64_t n = train_data.samples();
  std::vector<int64_t> order((size_t)n);
  std::iota(order.begin(), order.end(), 0);

  for (int64_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    if (cfg.shuffle) {
      std::iota(order.begin(), order.end(), 0);
      SplitMix64 rng(stream_seed(cfg.seed, (uint64_t)epoch));
      fisher_yates(order, rng);
    }
    double loss_sum = 0.0;
    int64_t correct = 0;
    for (int64_t first = 0; first < n; first += cfg.batch) {
      const int64_t count = std::min(cfg.batch, n - first);
      traingrad::Tape tape;
      model.bind(tape);
      Tensor x = batch_input(train_data, order, first, count);
      std::vector<int32_t> y = batch_labels(train_data, order, first, count);
      Var logits = model.forward(tape, x);
      Var loss = tape.cross_entropy(logits, y);
      const double lval = tape.scalar(loss);
      if (!std::isfinite(lval)) {
        char msg[128];
        std::snprintf(msg, sizeof msg, "training aborted: non-finite loss at epoch %lld sample %lld",
                      (long long)epoch, (long long)first);
        throw std::runtime_error(msg);
      }
      const Tensor lv = tape.value(logits);  // keep data alive through backward
      tape.backward(loss);
      model.collect_grads(tape);
      opt.step(model.params());
      clamp_neuron_params(model);
      loss_sum += lval * (double)count;
      for (int64_t i = 0; i < count; ++i)
        if (argmax_row(lv, i) == y[(size_t)i]) ++correct;
    }
    EpochMetrics m;
    m.epoch = epoch;
    m.train_loss = loss_sum / (double)n;
    m.train_acc = (double)correct / (double)n;
    if (test_data) m.test_acc = evaluate(model, *test_data, cfg.batch).acc;
    result.history.push_back(m);
  }
  return result;
}

/* ----- checkpoint ----- */

namespace {

void put_u32(std::FILE* f, uint32_t v) {
  unsigned char b[4] = {(unsigned char)(v), (unsigned char)(v >> 8), (unsigned char)(v >> 16),
                        (unsigned char)(v >> 24)};
  std::fwrite(b, 1, 4, f);
}

uint32_t get_u32(std::FILE* f) {
  unsigned char b[4];
  if (std::fread(b, 1, 4, f) != 4) throw std::runtime_error("checkpoint: truncated");
  return (uint32_t)b[0] | ((uint32_t)b[1] << 8) | ((uint32_t)b[2] << 16) | ((uint32_t)b[3] << 24);
}

void put_i64(std::FILE* f, int64_t v) {
  put_u32(f, (uint32_t)((uint64_t)v & 0xffffffffu));
  put_u32(f, (uint32_t)((uint64_t)v >> 32));
}

int64_t get_i64(std::FILE* f) {
  uint64_t lo = get_u32(f);
  uint64_t hi = get_u32(f);
  return (int64_t)(lo | (hi << 32));
}

struct FileCloser {
  std::FILE* f;
  ~FileCloser() {
    if (f) std::fclose(f);
  }
};

}  // namespace

void save_checkpoint(const std::string& path, Model& model) {
  std::FILE* f = std::fopen(path.c_str(), "wb");
  if (!f) throw std::runtime_error("checkpoint: cannot open " + path + " for writing");
  FileCloser closer{f};
  std::fwrite(kCkptMagic, 1, sizeof kCkptMagic, f);
  std::vector<Param*> ps = model.params();
  put_u32(f, (uint32_t)ps.size());
  for (Param* p : ps) {
    put_u32(f, (uint32_t)p->name.size());
    std::fwrite(p->name.data(), 1, p->name.size(), f);
    put_u32(f, (uint32_t)p->value.shape.size());
    for (int64_t d : p->value.shape) put_i64(f, d);
    /* payload is raw fp64; the header is explicitly little-endian and this
     * writer only targets little-endian hosts */
    std::fwrite(p->value.ptr(), sizeof(double), (size_t)p->value.size(), f);
  }
  if (std::ferror(f)) throw std::runtime_error("checkpoint: write failed for " + path);
}

void load_checkpoint(const std::string& path, Model& model) {
  std::FILE* f = std::fopen(path.c_str(), "rb");
  if (!f) throw std::runtime_error("checkpoint: cannot open " + path);
  FileCloser closer{f};
  char magic[8];
  if (std::fread(magic, 1, 8, f) != 8 || std::memcmp(magic, kCkptMagic, 8) != 0)
    throw std::runtime_error("checkpoint: bad magic in " + path);
  std::vector<Param*> ps = model.params();
  const uint32_t count = get_u32(f);
  if (count != ps.size()) throw std::runtime_error("checkpoint: parameter count mismatch");
  for (Param* p : ps) {
    const uint32_t name_len = get_u32(f);
    std::string name((size_t)name_len, '\0');
    if (std::fread(name.data(), 1, name_len, f) != name_len)
      throw std::runtime_error("checkpoint: truncated");
    if (name != p->name) throw std::runtime_error("checkpoint: parameter order mismatch at " + name);
    const uint32_t ndim = get_u32(f);
    std::vector<int64_t> shape((size_t)ndim);
    for (uint32_t i = 0; i < ndim; ++i) shape[i] = get_i64(f);
    if (shape != p->value.shape) throw std::runtime_error("checkpoint: shape mismatch at " + name);
    if (std::fread(p->value.ptr(), sizeof(double), (size_t)p->value.size(), f) !=
        (size_t)p->value.size())
      throw std::runtime_error("checkpoint: truncated payload at " + name);
  }
}

}  // namespace spikeseq
