#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstring>

#include "softsense/checkpoint.hpp"
#include "softsense/dataset.hpp"
#include "softsense/errors.hpp"
#include "softsense/discovery.hpp"
#include "softsense/graph.hpp"
#include "softsense/metrics.hpp"
#include "softsense/model.hpp"
#include "softsense/synth.hpp"
#include "softsense/training.hpp"

namespace py = pybind11;
using namespace softsense;

namespace {

Matrix matrix_from_numpy(const py::array_t<double, py::array::c_style | py::array::forcecast>& a) {
    if (a.ndim() != 2) throw ShapeError("expected a 2-d array");
    Matrix m(static_cast<std::size_t>(a.shape(0)), static_cast<std::size_t>(a.shape(1)));
    std::memcpy(m.data(), a.data(), sizeof(double) * m.size());
    return m;
}

py::array_t<double> matrix_to_numpy(const Matrix& m) {
    py::array_t<double> out({m.rows(), m.cols()});
    std::memcpy(out.mutable_data(), m.data(), sizeof(double) * m.size());
    return out;
}

Vec vec_from_numpy(const py::array_t<double, py::array::c_style | py::array::forcecast>& a) {
    if (a.ndim() != 1) throw ShapeError("expected a 1-d array");
    return Vec(a.data(), a.data() + a.shape(0));
}

ProcessDataset dataset_from(const py::array_t<double>& values,
                            const std::vector<std::string>& tags) {
    ProcessDataset ds;
    ds.values = matrix_from_numpy(values);
    if (tags.size() != ds.n_vars()) {
        throw ShapeError("tags length does not match the number of columns");
    }
    for (std::size_t c = 0; c < tags.size(); ++c) {
        ds.variable_meta.push_back({static_cast<int>(c + 1), tags[c], "", ""});
    }
    return ds;
}

std::size_t target_index_of(const ProcessDataset& ds, const std::string& target) {
    const auto tags = ds.tags();
    for (std::size_t c = 0; c < tags.size(); ++c) {
        if (tags[c] == target) return c;
    }
    throw ConfigError("unknown target tag '" + target + "'");
}

TrainConfig config_from_kwargs(const py::kwargs& kwargs) {
    TrainConfig cfg;
    for (const auto& item : kwargs) {
        const auto key = item.first.cast<std::string>();
        if (key == "embedding_dim") cfg.embedding_dim = item.second.cast<std::size_t>();
        else if (key == "batch_size") cfg.batch_size = item.second.cast<std::size_t>();
        else if (key == "hidden_width") cfg.hidden_width = item.second.cast<std::size_t>();
        else if (key == "dropout") cfg.dropout = item.second.cast<double>();
        else if (key == "learning_rate") cfg.learning_rate = item.second.cast<double>();
        else if (key == "window") cfg.window = item.second.cast<std::size_t>();
        else if (key == "max_epochs") cfg.max_epochs = item.second.cast<std::size_t>();
        else if (key == "patience") cfg.patience = item.second.cast<std::size_t>();
        else if (key == "k") cfg.k = item.second.cast<std::size_t>();
        else if (key == "seed") cfg.seed = item.second.cast<std::uint64_t>();
        else if (key == "graph_refresh") cfg.graph_refresh = graph_refresh_from_string(item.second.cast<std::string>());
        else if (key == "symmetric_graph") cfg.symmetric_graph = item.second.cast<bool>();
        else if (key == "train_frac") cfg.fractions.train = item.second.cast<double>();
        else if (key == "val_frac") cfg.fractions.val = item.second.cast<double>();
        else if (key == "test_frac") cfg.fractions.test = item.second.cast<double>();
        else if (key == "grad_clip") cfg.grad_clip = item.second.cast<double>();
        else if (key == "threads") cfg.threads = item.second.cast<std::size_t>();
        else throw ConfigError("unknown config key '" + key + "'");
    }
    return cfg;
}

py::dict report_to_dict(const MetricsReport& r) {
    py::dict d;
    d["nrmse"] = r.nrmse;
    d["r2"] = r.r2;
    d["nmae"] = r.nmae;
    d["mape"] = r.mape;
    d["n_samples"] = r.n_samples;
    d["mape_excluded"] = r.mape_excluded;
    d["y_min"] = r.y_min;
    d["y_max"] = r.y_max;
    d["y_mean"] = r.y_mean;
    return d;
}

}  // namespace

PYBIND11_MODULE(_softsense, m) {
    m.doc() = "Graph-attention soft sensing: structure learning, training, metrics, discovery";

    py::register_exception<IoError>(m, "IoError", PyExc_IOError);
    py::register_exception<ShapeError>(m, "ShapeError", PyExc_ValueError);
    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);

    py::class_<Checkpoint>(m, "Checkpoint")
        .def_property_readonly("target_tag", [](const Checkpoint& c) { return c.target_tag; })
        .def_property_readonly("target_index", [](const Checkpoint& c) { return c.target_index; })
        .def_property_readonly("dataset_tags", [](const Checkpoint& c) { return c.dataset_tags; })
        .def_property_readonly("embeddings", [](const Checkpoint& c) { return matrix_to_numpy(c.z); })
        .def("save", [](const Checkpoint& c, const std::string& path) { save_checkpoint(c, path); })
        .def_static("load", [](const std::string& path) { return load_checkpoint(path); });

    m.def("gen_synth",
          [](std::size_t sensors, std::size_t length, const std::vector<std::size_t>& drivers,
             std::size_t lag, double noise, const std::string& kind, std::uint64_t seed) {
              SynthSpec spec{sensors, length, drivers, lag, noise, kind, seed};
              const SynthResult r = generate_synth(spec);
              return py::make_tuple(matrix_to_numpy(r.ds.values), r.ds.tags(), r.truth_json);
          },
          py::arg("sensors") = 6, py::arg("length") = 600,
          py::arg("drivers") = std::vector<std::size_t>{1, 2}, py::arg("lag") = 3,
          py::arg("noise") = 0.01, py::arg("kind") = "linear", py::arg("seed") = 1,
          "Synthesize a process dataset; returns (values, tags, truth_json)");

    m.def("load_csv", [](const std::string& path) {
        const ProcessDataset ds = load_csv(path);
        return py::make_tuple(matrix_to_numpy(ds.values), ds.tags());
    });

    m.def("init_embeddings",
          [](std::size_t n, std::size_t d, std::uint64_t seed) {
              return matrix_to_numpy(init_embeddings(n, d, seed));
          },
          py::arg("n"), py::arg("d"), py::arg("seed") = 42);

    m.def("cosine_similarity", [](const py::array_t<double>& z) {
        return matrix_to_numpy(cosine_similarity_matrix(matrix_from_numpy(z)));
    });

    m.def("topk_adjacency", [](const py::array_t<double>& sim, std::size_t k) {
        const Adjacency adj = topk_adjacency(matrix_from_numpy(sim), k);
        py::array_t<std::uint8_t> out({adj.n, adj.n});
        std::memcpy(out.mutable_data(), adj.edges.data(), adj.edges.size());
        return out;
    });

    m.def("nrmse", [](const py::array_t<double>& y, const py::array_t<double>& y_hat) {
        return nrmse(vec_from_numpy(y), vec_from_numpy(y_hat));
    });
    m.def("r2", [](const py::array_t<double>& y, const py::array_t<double>& y_hat) {
        return r2(vec_from_numpy(y), vec_from_numpy(y_hat));
    });
    m.def("nmae", [](const py::array_t<double>& y, const py::array_t<double>& y_hat) {
        return nmae(vec_from_numpy(y), vec_from_numpy(y_hat));
    });
    m.def("mape", [](const py::array_t<double>& y, const py::array_t<double>& y_hat) {
        const MapeResult r = mape(vec_from_numpy(y), vec_from_numpy(y_hat));
        return py::make_tuple(r.value_pct, r.excluded);
    });

    m.def("train",
          [](const py::array_t<double>& values, const std::vector<std::string>& tags,
             const std::string& target, const py::kwargs& kwargs) {
              const ProcessDataset ds = dataset_from(values, tags);
              const TrainConfig cfg = config_from_kwargs(kwargs);
              const TrainResult result = train(ds, cfg, target_index_of(ds, target));
              py::list history;
              for (const auto& row : result.history) {
                  py::dict d;
                  d["epoch"] = row.epoch;
                  d["train_mse"] = row.train_mse;
                  d["val_mse"] = row.val_mse;
                  history.append(d);
              }
              return py::make_tuple(result.checkpoint, history);
          },
          py::arg("values"), py::arg("tags"), py::arg("target"),
          "Train a soft sensor; returns (checkpoint, history)");

    m.def("evaluate",
          [](const Checkpoint& ckpt, const py::array_t<double>& values,
             const std::vector<std::string>& tags, const std::string& split) {
              const ProcessDataset ds = dataset_from(values, tags);
              const auto samples = windows_for_split(ds, ckpt, split);
              const EvalResult result = evaluate(ckpt, samples);
              py::array_t<double> preds({result.predictions.size(), std::size_t{3}});
              auto view = preds.mutable_unchecked<2>();
              for (std::size_t i = 0; i < result.predictions.size(); ++i) {
                  view(i, 0) = static_cast<double>(result.predictions[i].t_index);
                  view(i, 1) = result.predictions[i].y_true;
                  view(i, 2) = result.predictions[i].y_hat;
              }
              return py::make_tuple(report_to_dict(result.report), preds);
          },
          py::arg("checkpoint"), py::arg("values"), py::arg("tags"), py::arg("split") = "test",
          "Evaluate a checkpoint; returns (report, predictions[t_index, y_true, y_hat])");

    m.def("attention_matrix",
          [](const Checkpoint& ckpt, const py::array_t<double>& values,
             const std::vector<std::string>& tags, const std::string& split) {
              const ProcessDataset ds = dataset_from(values, tags);
              const auto samples = windows_for_split(ds, ckpt, split);
              return matrix_to_numpy(attention_matrix(ckpt, samples));
          },
          py::arg("checkpoint"), py::arg("values"), py::arg("tags"), py::arg("split") = "test");

    m.def("embedding_correlation", [](const py::array_t<double>& z) {
        return matrix_to_numpy(embedding_correlation(matrix_from_numpy(z)));
    });
}
