#include "vardrop/report.hpp"

#include "vardrop/format.hpp"

#include <json.hpp>

#include <sstream>

namespace vardrop {

namespace {

using Json = nlohmann::ordered_json;

double r12(double x) { return round_sig12(x); }

Json index_list(std::span<const std::size_t> v) {
  Json a = Json::array();
  for (auto i : v) a.push_back(i);
  return a;
}

Json ledger_json(const FlopLedger& f) {
  Json j;
  j["embed"] = f.embed;
  j["qkv"] = f.qkv;
  j["scores"] = f.scores;
  j["softmax"] = f.softmax;
  j["context"] = f.context;
  j["head"] = f.head;
  j["attention"] = f.attention();
  j["total"] = f.total();
  return j;
}

Json flat(const Eigen::MatrixXd& m) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) a.push_back(m(i, j));
  return a;
}

}  // namespace

std::string hashes_json(std::size_t k, std::size_t epsilon, std::span<const HashValue> hashes) {
  Json j;
  j["k"] = k;
  j["epsilon"] = epsilon;
  Json keys = Json::array();
  for (const auto& h : hashes) keys.push_back(h.key());
  j["hashes"] = keys;
  Json groups = Json::object();
  for (const auto& [key, members] : group_by_hash(hashes).groups) groups[key] = index_list(members);
  j["groups"] = groups;
  return j.dump();
}

std::string reduce_json(const ReductionPlan& plan) {
  Json j;
  j["gs"] = plan.gs;
  j["seed"] = plan.seed;
  j["retained"] = index_list(plan.retained);
  j["delta"] = r12(plan.delta);
  Json groups = Json::object();
  for (const auto& [key, members] : plan.per_group) groups[key] = index_list(members);
  j["per_group"] = groups;
  return j.dump();
}

std::string reduction_csv(std::span<const ReductionPlan> plans) {
  std::ostringstream out;
  out << "iteration,tokens_used,delta\n";
  for (std::size_t i = 0; i < plans.size(); ++i) {
    out << i << ',' << plans[i].tokens_used() << ',' << format_real(plans[i].delta) << '\n';
  }
  return out.str();
}

std::string metrics_csv(std::span<const BatchMetrics> batches) {
  std::ostringstream out;
  out << "epoch,batch,loss,tokens_used,delta,flops\n";
  for (const auto& m : batches) {
    out << m.epoch << ',' << m.batch << ',' << format_real(m.loss) << ',' << m.tokens_used << ','
        << format_real(m.delta) << ',' << m.flops << '\n';
  }
  return out.str();
}

std::string report_json(const RunConfig& config, const ExperimentResult& result, bool include_timing) {
  Json j;
  j["config"] = config_echo(config);
  Json epochs = Json::array();
  for (const auto& e : result.epochs) {
    Json ej;
    ej["epoch"] = e.epoch;
    ej["train_loss"] = r12(e.train_loss);
    ej["val_loss"] = r12(e.val_loss);
    ej["mean_tokens"] = r12(e.mean_tokens);
    ej["mean_delta"] = r12(e.mean_delta);
    ej["flops"] = e.flops;
    ej["attention_flops"] = e.attention_flops;
    epochs.push_back(ej);
  }
  j["epochs"] = epochs;
  if (result.reduction) {
    Json r;
    r["iterations"] = result.reduction->iterations;
    r["mean_tokens"] = r12(result.reduction->mean_tokens);
    r["std_tokens"] = r12(result.reduction->std_tokens);
    r["mean_delta"] = r12(result.reduction->mean_delta);
    j["reduction"] = r;
  } else {
    j["reduction"] = nullptr;
  }
  j["total_flops"] = result.total_flops;
  j["total_attention_flops"] = result.total_attention_flops;
  j["final_val_loss"] = r12(result.final_val_loss);
  if (include_timing) j["seconds_per_iteration"] = result.seconds_per_iteration;
  return j.dump(2);
}

std::string checkpoint_json(const ModelParams& params, std::uint64_t seed) {
  const auto s = params.shape();
  Json j;
  j["seed"] = seed;
  j["shape"] = {{"T", s.lookback}, {"d", s.d_model}, {"d_k", s.d_k}, {"H", s.horizon}};
  Json tensors;
  const auto put = [&](const char* name, const Eigen::MatrixXd& m) {
    tensors[name] = {{"rows", m.rows()}, {"cols", m.cols()}, {"values", flat(m)}};
  };
  put("w_embed", params.w_embed);
  put("b_embed", params.b_embed);
  put("w_q", params.w_q);
  put("w_k", params.w_k);
  put("w_v", params.w_v);
  put("w_out", params.w_out);
  put("w_head", params.w_head);
  put("b_head", params.b_head);
  j["tensors"] = tensors;
  return j.dump();
}

std::string correlation_csv(const CorrelationMatrix& matrix) {
  std::ostringstream out;
  for (Eigen::Index i = 0; i < matrix.rho.rows(); ++i) {
    for (Eigen::Index j = 0; j < matrix.rho.cols(); ++j) {
      if (j) out << ',';
      out << format_real(matrix.rho(i, j));
    }
    out << '\n';
  }
  return out.str();
}

std::string histogram_csv(std::span<const HistogramBin> bins) {
  std::ostringstream out;
  out << "bin_lo,bin_hi,count\n";
  for (const auto& b : bins) out << format_real(b.lo) << ',' << format_real(b.hi) << ',' << b.count << '\n';
  return out.str();
}

std::string shift_json(const CorrelationShift& shift, std::span<const std::size_t> starts, std::size_t lookback) {
  Json j;
  j["T"] = lookback;
  j["starts"] = index_list(starts);
  Json fro = Json::array();
  for (double f : shift.consecutive_frobenius) fro.push_back(r12(f));
  j["consecutive_frobenius"] = fro;
  j["mean_frobenius"] = r12(shift.mean_frobenius);
  j["max_pair_shift"] = r12(shift.pair_max_abs_diff.size() ? shift.pair_max_abs_diff.maxCoeff() : 0.0);
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < shift.pair_max_abs_diff.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index c = 0; c < shift.pair_max_abs_diff.cols(); ++c) row.push_back(r12(shift.pair_max_abs_diff(i, c)));
    rows.push_back(row);
  }
  j["pair_max_abs_diff"] = rows;
  return j.dump();
}

std::string sweep_csv(const SweepResult& result) {
  std::ostringstream out;
  out << "k,gs,delta,val_loss\n";
  for (const auto& c : result.cells) {
    out << c.k << ',' << c.gs << ',' << format_real(c.delta) << ',' << format_real(c.val_loss) << '\n';
  }
  return out.str();
}

std::string flop_ledger_json(const FlopLedger& ledger) { return ledger_json(ledger).dump(); }

}  // namespace vardrop
