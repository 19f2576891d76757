#include "vardrop/analysis.hpp"
#include "vardrop/dataset.hpp"
#include "vardrop/error.hpp"
#include "vardrop/model.hpp"
#include "vardrop/reduction.hpp"
#include "vardrop/spectral.hpp"

#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace vardrop;

namespace {

using Array3 = py::array_t<double, py::array::c_style | py::array::forcecast>;

WindowBatch batch_from_array(const Array3& batch) {
  if (batch.ndim() != 3) throw py::value_error("batch must have shape (B, N, T)");
  const auto B = batch.shape(0), N = batch.shape(1), T = batch.shape(2);
  auto view = batch.unchecked<3>();
  WindowBatch out;
  for (py::ssize_t b = 0; b < B; ++b) {
    MultivariateWindow w;
    w.data.resize(N, T);
    for (py::ssize_t v = 0; v < N; ++v)
      for (py::ssize_t t = 0; t < T; ++t) w.data(v, t) = view(b, v, t);
    out.windows.push_back(std::move(w));
  }
  return out;
}

std::vector<std::string> keys_of(const std::vector<HashValue>& hashes) {
  std::vector<std::string> out;
  for (const auto& h : hashes) out.push_back(h.key());
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "k-dominant frequency hashing, stratified variate reduction and sparse variate attention";

  py::register_exception<Error>(m, "VarDropError", PyExc_ValueError);

  m.def(
      "amplitude_spectrum",
      [](const Eigen::VectorXd& signal) { return amplitude_spectrum(signal); }, py::arg("signal"),
      "Unnormalized one-sided DFT magnitudes for bins 1..floor(T/2).");
  m.def(
      "low_pass", [](const Eigen::VectorXd& spectrum, std::size_t epsilon) { return low_pass(spectrum, epsilon); },
      py::arg("spectrum"), py::arg("epsilon"));
  m.def(
      "kdfh",
      [](const Array3& batch, std::size_t k, std::size_t epsilon, bool normalize_windows) {
        return keys_of(kdfh(batch_from_array(batch), {k, epsilon, normalize_windows}));
      },
      py::arg("batch"), py::arg("k") = 3, py::arg("epsilon") = 25, py::arg("normalize_windows") = false,
      "Hash keys (e.g. '4-12-8') for each variate of a (B, N, T) batch.");
  m.def(
      "reconstruction_error",
      [](const std::vector<double>& signal, std::size_t k) {
        const auto r = reconstruction_error(signal, k);
        return py::make_tuple(r.mse, r.predicted_mse);
      },
      py::arg("signal"), py::arg("k"));

  m.def(
      "group_by_hash", [](const std::vector<std::string>& keys) { return group_by_key(keys).groups; },
      py::arg("keys"));
  m.def(
      "stratified_sample",
      [](const std::vector<std::string>& keys, std::size_t gs, std::uint64_t seed, std::uint64_t batch_index) {
        const auto plan = stratified_sample(group_by_key(keys), gs, seed, batch_index);
        py::dict d;
        d["retained"] = plan.retained;
        d["per_group"] = plan.per_group;
        d["delta"] = plan.delta;
        d["gs"] = plan.gs;
        d["seed"] = plan.seed;
        return d;
      },
      py::arg("keys"), py::arg("gs"), py::arg("seed") = 0, py::arg("batch_index") = 0);
  m.def(
      "reduction_ratio",
      [](const std::vector<std::string>& keys, std::size_t gs) { return reduction_ratio(group_by_key(keys), gs); },
      py::arg("keys"), py::arg("gs"));

  m.def(
      "count_flops",
      [](std::size_t n_tokens, std::size_t T, std::size_t d, std::size_t d_k, std::size_t H) {
        const auto f = count_flops(n_tokens, T, d, d_k, H);
        py::dict out;
        out["embed"] = f.embed;
        out["qkv"] = f.qkv;
        out["scores"] = f.scores;
        out["softmax"] = f.softmax;
        out["context"] = f.context;
        out["head"] = f.head;
        out["attention"] = f.attention();
        out["total"] = f.total();
        return out;
      },
      py::arg("n_tokens"), py::arg("T"), py::arg("d"), py::arg("d_k"), py::arg("H"));

  m.def(
      "synth_redundant",
      [](std::size_t n, std::size_t g, std::size_t length, double sigma, std::uint64_t seed, std::size_t period) {
        SynthSpec spec;
        spec.n_variates = n;
        spec.n_prototypes = g;
        spec.length = length;
        spec.noise_sigma = sigma;
        spec.seed = seed;
        spec.period = period;
        auto data = synth_redundant(spec);
        return py::make_tuple(data.table.values, data.labels);
      },
      py::arg("n"), py::arg("g"), py::arg("length"), py::arg("noise_sigma") = 0.0, py::arg("seed") = 0,
      py::arg("period") = 96, "Returns (values N x L, prototype labels).");

  m.def(
      "pearson_matrix", [](const Eigen::MatrixXd& data) { return pearson_matrix(data).rho; }, py::arg("data"));
  m.def(
      "adjusted_rand_index",
      [](const std::vector<int>& a, const std::vector<int>& b) { return adjusted_rand_index(a, b); }, py::arg("a"),
      py::arg("b"));

  py::class_<ModelParams>(m, "ModelParams")
      .def_static(
          "init",
          [](std::size_t T, std::size_t d, std::size_t d_k, std::size_t H, std::uint64_t seed) {
            return ModelParams::init({T, d, d_k, H}, seed);
          },
          py::arg("T"), py::arg("d"), py::arg("d_k"), py::arg("H"), py::arg("seed") = 0)
      .def_readwrite("w_embed", &ModelParams::w_embed)
      .def_readwrite("b_embed", &ModelParams::b_embed)
      .def_readwrite("w_q", &ModelParams::w_q)
      .def_readwrite("w_k", &ModelParams::w_k)
      .def_readwrite("w_v", &ModelParams::w_v)
      .def_readwrite("w_out", &ModelParams::w_out)
      .def_readwrite("w_head", &ModelParams::w_head)
      .def_readwrite("b_head", &ModelParams::b_head);

  m.def(
      "predict_full",
      [](const Eigen::MatrixXd& window, const ModelParams& params) {
        MultivariateWindow w;
        w.data = window;
        return predict_full(w, params);
      },
      py::arg("window"), py::arg("params"), "Dense N x H forecast for an N x T lookback window.");
}
