#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "aoisched/aoimodel.hpp"
#include "aoisched/errors.hpp"
#include "aoisched/experiment.hpp"
#include "aoisched/fblmath.hpp"

namespace py = pybind11;
using namespace aoisched;

PYBIND11_MODULE(aoisched, m) {
  m.doc() = "AoI-optimal scheduling for wireless-powered short-packet clusters";

  py::register_exception<Error>(m, "Error", PyExc_RuntimeError);

  py::enum_<link::NoiseMode>(m, "NoiseMode")
      .value("Total", link::NoiseMode::Total)
      .value("PerHz", link::NoiseMode::PerHz);

  py::class_<link::SystemParams>(m, "SystemParams")
      .def(py::init<>())
      .def_readwrite("p_c_dbm", &link::SystemParams::p_c_dbm)
      .def_readwrite("mu", &link::SystemParams::mu)
      .def_readwrite("h_i_db", &link::SystemParams::h_i_db)
      .def_readwrite("sigma2_dbm", &link::SystemParams::sigma2_dbm)
      .def_readwrite("noise_mode", &link::SystemParams::noise_mode)
      .def_readwrite("eta", &link::SystemParams::eta)
      .def_readwrite("carrier_hz", &link::SystemParams::carrier_hz)
      .def_readwrite("bandwidth_hz", &link::SystemParams::bandwidth_hz)
      .def_readwrite("d_bits", &link::SystemParams::d_bits)
      .def_readwrite("eps_max", &link::SystemParams::eps_max)
      .def_readwrite("gamma_th", &link::SystemParams::gamma_th)
      .def("p_c_watts", &link::SystemParams::p_c_watts)
      .def("validate", &link::SystemParams::validate);

  py::class_<link::Device>(m, "Device")
      .def_readonly("id", &link::Device::id)
      .def_readonly("distance", &link::Device::distance)
      .def_readonly("fading", &link::Device::fading)
      .def_readonly("z", &link::Device::z)
      .def("__repr__", [](const link::Device& d) {
        return "Device(id=" + std::to_string(d.id) + ", distance=" + std::to_string(d.distance) +
               ", z=" + std::to_string(d.z) + ")";
      });
  m.def("make_device", &link::make_device, py::arg("params"), py::arg("distance"), py::arg("fading") = 1.0,
        py::arg("id") = 0);

  m.def("q_func", &fbl::q_func);
  m.def("error_probability", [](double gamma, double m_r, int d_bits) {
    return fbl::error_probability(fbl::FblPoint{gamma, m_r, d_bits});
  }, py::arg("gamma"), py::arg("m_r"), py::arg("d_bits"));
  m.def("avg_aoi", py::overload_cast<double, double>(&aoi::avg_aoi), py::arg("round_length"), py::arg("eps"));

  py::class_<opt::AllocationPolicy>(m, "AllocationPolicy")
      .def(py::init<>())
      .def(py::init([](double m_c, std::vector<double> m_r) { return opt::AllocationPolicy{m_c, std::move(m_r)}; }),
           py::arg("m_c"), py::arg("m_r"))
      .def_readwrite("m_c", &opt::AllocationPolicy::m_c)
      .def_readwrite("m_r", &opt::AllocationPolicy::m_r)
      .def("round_length", &opt::AllocationPolicy::round_length);

  py::class_<opt::DeviceOutcome>(m, "DeviceOutcome")
      .def_readonly("gamma", &opt::DeviceOutcome::gamma)
      .def_readonly("eps", &opt::DeviceOutcome::eps)
      .def_readonly("avg_aoi", &opt::DeviceOutcome::avg_aoi);

  py::class_<opt::SolveReport>(m, "SolveReport")
      .def_readonly("policy", &opt::SolveReport::policy)
      .def_readonly("delta_max", &opt::SolveReport::delta_max)
      .def_readonly("per_device", &opt::SolveReport::per_device)
      .def_readonly("saturated", &opt::SolveReport::saturated)
      .def_readonly("iterations", &opt::SolveReport::iterations)
      .def_property_readonly("status", [](const opt::SolveReport& r) { return std::string(opt::to_string(r.status)); });

  py::class_<opt::SingleSolution>(m, "SingleSolution")
      .def_readonly("m_c", &opt::SingleSolution::m_c)
      .def_readonly("m_r", &opt::SingleSolution::m_r)
      .def_readonly("aoi", &opt::SingleSolution::aoi);

  m.def("solve_single", [](const link::SystemParams& p, const link::Device& d) { return opt::solve_single(p, d); });
  m.def("solve_fixed_round", &opt::solve_fixed_round, py::arg("params"), py::arg("device"), py::arg("round_length"));
  m.def("solve_minmax", [](const link::SystemParams& p, const std::vector<link::Device>& d) {
    return opt::solve_minmax(p, d);
  });
  m.def("evaluate_policy", [](const link::SystemParams& p, const std::vector<link::Device>& d,
                              const opt::AllocationPolicy& policy) { return opt::evaluate_policy(p, d, policy); });

  py::class_<cluster::CapacityReport>(m, "CapacityReport")
      .def_readonly("i_min", &cluster::CapacityReport::i_min)
      .def_readonly("m_c_single", &cluster::CapacityReport::m_c_single)
      .def_readonly("m_r_single", &cluster::CapacityReport::m_r_single)
      .def_readonly("c_cap", &cluster::CapacityReport::c_cap)
      .def_readonly("saturated", &cluster::CapacityReport::saturated);
  m.def("cluster_capacity", [](const link::SystemParams& p, const std::vector<link::Device>& d) {
    return cluster::cluster_capacity(p, d);
  });
  m.def("algorithm1", [](const link::SystemParams& p, const std::vector<link::Device>& d) {
    return cluster::algorithm1(p, d);
  });
  m.def("ibl_baseline", [](const link::SystemParams& p, const std::vector<link::Device>& d) {
    return sim::ibl_baseline(p, d);
  });
  m.def("round_policy", [](const link::SystemParams& p, const std::vector<link::Device>& d,
                           const opt::AllocationPolicy& policy) { return cluster::round_policy(p, d, policy); });

  py::class_<sim::DeviceSimResult>(m, "DeviceSimResult")
      .def_readonly("time_avg_aoi", &sim::DeviceSimResult::time_avg_aoi)
      .def_readonly("success_rate", &sim::DeviceSimResult::success_rate)
      .def_readonly("std_error", &sim::DeviceSimResult::std_error)
      .def_readonly("attempts", &sim::DeviceSimResult::attempts);
  py::class_<sim::SimResult>(m, "SimResult").def_readonly("per_device", &sim::SimResult::per_device);

  m.def("simulate_policy",
        [](const link::SystemParams& p, const std::vector<link::Device>& d, const opt::AllocationPolicy& policy,
           std::int64_t rounds, std::uint64_t seed) {
          sim::SimConfig cfg;
          cfg.rounds = rounds;
          cfg.seed = seed;
          const auto schedule = cluster::reconstruct_schedule(cluster::round_policy(p, d, policy));
          return sim::simulate(schedule, d, p, cfg);
        },
        py::arg("params"), py::arg("devices"), py::arg("policy"), py::arg("rounds") = 100000,
        py::arg("seed") = 42);

  m.def("run_spec", [](const std::string& text, bool json) {
    const auto spec = exp::parse_spec_text(text);
    const auto result = exp::run(spec, {1, false, false});
    return json ? exp::to_json(result.rows, false) : exp::to_csv(result.rows, false);
  }, py::arg("spec_text"), py::arg("json") = false, "Run a JSON experiment spec and return CSV (or JSON) text");
}
