#include "spikeseq/report.hpp"

#include <cstdio>
#include <stdexcept>

#include "json.hpp"

namespace spikeseq {

using ordered_json = nlohmann::ordered_json;

std::string format_fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string bench_csv(const std::vector<BenchRecord>& records) {
  std::string out = "seq_len,batch,channels,mode,phase,ms,repeats\n";
  for (const BenchRecord& r : records) {
    out += std::to_string(r.seq_len) + ',' + std::to_string(r.batch) + ',' +
           std::to_string(r.channels) + ',' + r.mode + ',' + r.phase + ',' +
           format_fixed(r.ms, 6) + ',' + std::to_string(r.repeats) + '\n';
  }
  return out;
}

std::string bench_json(const std::vector<BenchRecord>& records) {
  ordered_json arr = ordered_json::array();
  for (const BenchRecord& r : records) {
    ordered_json row;
    row["seq_len"] = r.seq_len;
    row["batch"] = r.batch;
    row["channels"] = r.channels;
    row["mode"] = r.mode;
    row["phase"] = r.phase;
    row["ms"] = r.ms;
    row["repeats"] = r.repeats;
    arr.push_back(row);
  }
  ordered_json top;
  top["records"] = arr;
  ordered_json sp = ordered_json::array();
  for (const auto& [len, s] : bench_speedups(records)) {
    ordered_json row;
    row["seq_len"] = len;
    row["speedup"] = s;
    sp.push_back(row);
  }
  top["speedups"] = sp;
  return top.dump(2) + "\n";
}

std::string metrics_csv(const std::vector<EpochMetrics>& history) {
  std::string out = "epoch,train_loss,train_acc,test_acc\n";
  for (const EpochMetrics& m : history) {
    out += std::to_string(m.epoch) + ',' + format_fixed(m.train_loss, 6) + ',' +
           format_fixed(m.train_acc, 6) + ',' + format_fixed(m.test_acc, 6) + '\n';
  }
  return out;
}

std::string freq_csv(const std::vector<double>& omegas, const std::vector<double>& closed,
                     const std::vector<double>& simulated) {
  if (omegas.size() != closed.size() || omegas.size() != simulated.size())
    throw std::invalid_argument("freq_csv: column length mismatch");
  std::string out = "omega,closed,simulated\n";
  for (size_t i = 0; i < omegas.size(); ++i) {
    out += format_fixed(omegas[i], 9) + ',' + format_fixed(closed[i], 9) + ',' +
           format_fixed(simulated[i], 9) + '\n';
  }
  return out;
}

std::string equivalence_json(const EquivConfig& cfg, const EquivReport& report) {
  ordered_json j;
  j["cases"] = cfg.cases;
  j["seed"] = cfg.seed;
  j["leaky"] = cfg.leaky;
  j["resonate"] = cfg.resonate;
  j["inject_kernel_bug"] = cfg.inject_kernel_bug;
  j["cases_run"] = report.cases_run;
  j["failed_cases"] = report.failed_cases;
  j["spike_mismatches"] = report.spike_mismatches;
  j["max_rel_err_leaky"] = report.max_rel_err_leaky;
  j["max_rel_err_resonate"] = report.max_rel_err_resonate;
  j["passed"] = report.passed();
  j["failures"] = report.failures;
  return j.dump(2) + "\n";
}

std::string energy_json(const EnergyReport& report) {
  ordered_json j;
  j["seq_len"] = report.seq_len;
  j["per_step_pj"] = report.per_step_pj;
  j["total_mj"] = report.total_mj;
  ordered_json layers = ordered_json::array();
  for (const LayerEnergy& e : report.layers) {
    ordered_json row;
    row["family"] = e.family;
    row["token_pj"] = e.token_pj;
    row["channel_pj"] = e.channel_pj;
    row["total_pj"] = e.total_pj;
    layers.push_back(row);
  }
  j["layers"] = layers;
  return j.dump(2) + "\n";
}

void write_text_file(const std::string& path, const std::string& content) {
  std::FILE* f = std::fopen(path.c_str(), "wb");
  if (!f) throw std::runtime_error("cannot open " + path + " for writing");
  const size_t wrote = std::fwrite(content.data(), 1, content.size(), f);
  std::fclose(f);
  if (wrote != content.size()) throw std::runtime_error("write failed for " + path);
}

}  // namespace spikeseq
