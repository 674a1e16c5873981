#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "oirl/bellman.hpp"
#include "oirl/environments.hpp"
#include "oirl/error.hpp"
#include "oirl/experiment.hpp"
#include "oirl/learner.hpp"
#include "oirl/metrics.hpp"
#include "oirl/reward_model.hpp"
#include "oirl/serialize.hpp"

namespace py = pybind11;
using namespace oirl;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

Array to_array(const Matrix& m) {
  Array out({m.rows(), m.cols()});
  std::copy(m.data().begin(), m.data().end(), out.mutable_data());
  return out;
}

Array to_array(const std::vector<double>& v) {
  Array out(v.size());
  std::copy(v.begin(), v.end(), out.mutable_data());
  return out;
}

Matrix to_matrix(const Array& a) {
  if (a.ndim() != 2) throw ShapeMismatch("expected a 2-d array");
  Matrix m(a.shape(0), a.shape(1));
  std::copy(a.data(), a.data() + a.size(), m.data().begin());
  return m;
}

std::vector<double> to_vector(const Array& a) {
  if (a.ndim() != 1) throw ShapeMismatch("expected a 1-d array");
  return {a.data(), a.data() + a.size()};
}

TabularMDP mdp_from_array(const Array& p, double discount) {
  if (p.ndim() != 3 || p.shape(0) != p.shape(2)) {
    throw ShapeMismatch("transitions must have shape (n_states, n_actions, n_states)");
  }
  return validate_mdp(TabularMDP(p.shape(0), p.shape(1), discount,
                                 std::vector<double>(p.data(), p.data() + p.size())));
}

Array transitions_array(const TabularMDP& mdp) {
  Array out({mdp.n_states(), mdp.n_actions(), mdp.n_states()});
  std::copy(mdp.transitions().begin(), mdp.transitions().end(), out.mutable_data());
  return out;
}

py::dict solve_dict(const SolveResult& r) {
  py::dict d;
  d["v"] = to_array(r.v);
  d["q"] = to_array(r.q);
  d["iterations"] = r.iterations;
  d["final_residual"] = r.final_residual;
  return d;
}

ApproxSpec spec_of(const std::string& kind, double k) { return {parse_approx_kind(kind), k}; }

py::object json_to_py(const Json& doc) {
  return py::module_::import("json").attr("loads")(doc.dump());
}

Json py_to_json(const py::object& obj) {
  return Json::parse(py::module_::import("json").attr("dumps")(obj).cast<std::string>());
}

py::dict env_dict(const EnvBundle& env) {
  py::dict d;
  d["name"] = env.name;
  d["transitions"] = transitions_array(env.mdp);
  d["discount"] = env.mdp.discount();
  d["true_reward"] = to_array(env.true_reward);
  d["features"] = to_array(env.features);
  std::vector<std::pair<int, int>> cells;
  for (const auto& c : env.cells) cells.emplace_back(c.row, c.col);
  d["cells"] = cells;
  d["width"] = env.width;
  d["height"] = env.height;
  return d;
}

}  // namespace

PYBIND11_MODULE(_oirl, m) {
  m.doc() = "Online inverse reinforcement learning via Bellman gradient iteration";

  auto base = py::register_exception<Error>(m, "Error");
  py::register_exception<InvalidModel>(m, "InvalidModel", base.ptr());
  py::register_exception<ShapeMismatch>(m, "ShapeMismatch", base.ptr());
  py::register_exception<ConvergenceError>(m, "ConvergenceError", base.ptr());
  py::register_exception<LearnerError>(m, "LearnerError", base.ptr());

  m.def("exact_value_iteration",
        [](const Array& p, double discount, const Array& r, double threshold, std::size_t max_iterations) {
          return solve_dict(exact_value_iteration(mdp_from_array(p, discount), to_vector(r),
                                                  {threshold, max_iterations}));
        },
        py::arg("transitions"), py::arg("discount"), py::arg("reward"), py::arg("threshold") = 1e-6,
        py::arg("max_iterations") = 10000);

  m.def("approximate_value_iteration",
        [](const Array& p, double discount, const Array& r, const std::string& kind, double k,
           double threshold, std::size_t max_iterations) {
          return solve_dict(approximate_value_iteration(mdp_from_array(p, discount), to_vector(r),
                                                        spec_of(kind, k), {threshold, max_iterations}));
        },
        py::arg("transitions"), py::arg("discount"), py::arg("reward"), py::arg("kind") = "gsoft",
        py::arg("k") = 100.0, py::arg("threshold") = 1e-6, py::arg("max_iterations") = 10000);

  m.def("bellman_gradient_iteration",
        [](const Array& p, double discount, const Array& q, const Array& jac, const std::string& kind,
           double k, double threshold, std::size_t max_iterations) {
          const auto mdp = mdp_from_array(p, discount);
          const auto g = bellman_gradient_iteration(mdp, to_matrix(q), to_matrix(jac), spec_of(kind, k),
                                                    {threshold, max_iterations});
          Array dq({mdp.n_states(), mdp.n_actions(), g.dq.cols()});
          std::copy(g.dq.data().begin(), g.dq.data().end(), dq.mutable_data());
          py::dict d;
          d["dv"] = to_array(g.dv);
          d["dq"] = dq;
          d["iterations"] = g.iterations;
          d["final_residual"] = g.final_residual;
          return d;
        },
        py::arg("transitions"), py::arg("discount"), py::arg("q"), py::arg("reward_jacobian"),
        py::arg("kind") = "gsoft", py::arg("k") = 100.0, py::arg("threshold") = 1e-6,
        py::arg("max_iterations") = 10000);

  m.def("approx_max",
        [](const Array& v, const std::string& kind, double k) { return approx_max(to_vector(v), spec_of(kind, k)); },
        py::arg("values"), py::arg("kind") = "gsoft", py::arg("k") = 100.0);
  m.def("approx_max_weights",
        [](const Array& v, const std::string& kind, double k) {
          return to_array(approx_max_weights(to_vector(v), spec_of(kind, k)));
        },
        py::arg("values"), py::arg("kind") = "gsoft", py::arg("k") = 100.0);
  m.def("approx_max_gap",
        [](const Array& v, const std::string& kind, double k) { return approx_max_gap(to_vector(v), spec_of(kind, k)); },
        py::arg("values"), py::arg("kind") = "gsoft", py::arg("k") = 100.0);

  m.def("boltzmann_policy", [](const Array& q, double b) { return to_array(boltzmann_policy(to_matrix(q), b)); },
        py::arg("q"), py::arg("b") = 1.0);
  m.def("action_log_likelihood",
        [](const Array& q, std::size_t s, std::size_t a, double b) {
          return action_log_likelihood(to_matrix(q), s, a, b);
        },
        py::arg("q"), py::arg("state"), py::arg("action"), py::arg("b") = 1.0);

  m.def("reward",
        [](const std::string& kind, const std::vector<std::size_t>& layers, const Array& theta, const Array& phi) {
          return to_array(reward({parse_model_kind(kind), layers, to_vector(theta)}, to_matrix(phi)));
        },
        py::arg("kind"), py::arg("layers"), py::arg("theta"), py::arg("features"));
  m.def("reward_jacobian",
        [](const std::string& kind, const std::vector<std::size_t>& layers, const Array& theta, const Array& phi) {
          return to_array(reward_jacobian({parse_model_kind(kind), layers, to_vector(theta)}, to_matrix(phi)));
        },
        py::arg("kind"), py::arg("layers"), py::arg("theta"), py::arg("features"));
  m.def("init_params",
        [](const std::string& kind, const std::vector<std::size_t>& layers, std::uint64_t seed, double scale) {
          return to_array(init_params(parse_model_kind(kind), layers, seed, scale));
        },
        py::arg("kind"), py::arg("layers"), py::arg("seed"), py::arg("scale") = 1.0);

  m.def("make_environment",
        [](const py::dict& config) { return env_dict(build_environment(config_from_json(py_to_json(config)))); },
        py::arg("config") = py::dict(),
        "Environment bundle for an experiment config (same keys as the CLI's --config).");
  m.def("generate_observations",
        [](const py::dict& config, std::size_t count, std::uint64_t seed) {
          const auto cfg = config_from_json(py_to_json(config));
          std::vector<std::tuple<std::size_t, std::size_t, long long>> out;
          for (const auto& o : generate_observations(build_environment(cfg), count, cfg.teleport_every, seed)) {
            out.emplace_back(o.state, o.action, o.t);
          }
          return out;
        },
        py::arg("config"), py::arg("count"), py::arg("seed") = 0);

  m.def("pearson_correlation",
        [](const Array& a, const Array& b) -> std::optional<double> {
          return pearson_correlation(to_vector(a), to_vector(b));
        });
  m.def("cleaning_energy_cost", [](const Array& belief, const Array& dirt) {
    return cleaning_energy_cost(to_vector(belief), to_vector(dirt));
  });

  m.def("run_experiment",
        [](const py::dict& config, const std::string& out_dir) {
          const auto cfg = config_from_json(py_to_json(config));
          RunOptions opts;
          opts.out_dir = out_dir;
          ExperimentResult result;
          {
            py::gil_scoped_release release;
            result = run_experiment(cfg, opts);
          }
          return json_to_py(result.summary);
        },
        py::arg("config"), py::arg("out_dir") = "");

  py::class_<OnlineLearner>(m, "OnlineLearner")
      .def(py::init([](const py::dict& config) {
             const auto cfg = config_from_json(py_to_json(config));
             const auto env = build_environment(cfg);
             return OnlineLearner(env.mdp, env.features, architecture(cfg, cfg.model, env.features.cols()),
                                  learner_config(cfg));
           }),
           py::arg("config") = py::dict())
      .def("observe",
           [](OnlineLearner& self, std::size_t s, std::size_t a) {
             const long long t = self.state().t + 1;
             const auto out = self.observe({s, a, t});
             return py::make_tuple(out.best_restart, out.best_score, to_array(out.best_reward));
           },
           py::arg("state"), py::arg("action"))
      .def_property_readonly("t", [](const OnlineLearner& self) { return self.state().t; })
      .def("theta", [](const OnlineLearner& self, std::size_t i) { return to_array(self.state().restarts.at(i).theta); })
      .def("scores", [](const OnlineLearner& self) {
        std::vector<double> s;
        for (const auto& rs : self.state().restarts) s.push_back(rs.score);
        return to_array(s);
      });
}
