// Python bindings for the main operations: theta evaluation, Kummer /
// secancy tests, the hierarchy solver and the divisor-restriction checks.
#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "secantlab/geometry.hpp"
#include "secantlab/hierarchy.hpp"
#include "secantlab/kummer.hpp"
#include "secantlab/runner.hpp"
#include "secantlab/series.hpp"
#include "secantlab/theta.hpp"

namespace py = pybind11;
using namespace secantlab;

namespace {

TruncationPolicy make_policy(double tol, double max_radius) {
  TruncationPolicy policy;
  policy.tol = tol;
  policy.max_radius = max_radius;
  policy.validate();
  return policy;
}

ThetaCharacteristic make_char(int g, const Eigen::VectorXd& a,
                              const Eigen::VectorXd& b) {
  ThetaCharacteristic chr = ThetaCharacteristic::zero(g);
  if (a.size()) chr.a = a;
  if (b.size()) chr.b = b;
  return chr;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.attr("__version__") = kArtifactVersion;

  py::register_exception<Error>(m, "SecantLabError");

  py::class_<SiegelMatrix>(m, "SiegelMatrix")
      .def_readonly("g", &SiegelMatrix::g)
      .def_readonly("omega", &SiegelMatrix::omega);

  m.def("validate_siegel", &validate_siegel, py::arg("omega"),
        "Validate a period matrix (symmetric, Im positive definite).");

  py::class_<TruncationPolicy>(m, "TruncationPolicy")
      .def(py::init([](double tol, double max_radius) {
             return make_policy(tol, max_radius);
           }),
           py::arg("tol") = 1e-12, py::arg("max_radius") = 24.0)
      .def_readwrite("tol", &TruncationPolicy::tol)
      .def_readwrite("max_radius", &TruncationPolicy::max_radius);

  py::class_<DirectionalJet>(m, "DirectionalJet")
      .def_readonly("point", &DirectionalJet::point)
      .def_readonly("directions", &DirectionalJet::directions)
      .def_readonly("values", &DirectionalJet::values)
      .def("value", &DirectionalJet::value, py::arg("order"));

  py::class_<ThetaEngine, std::shared_ptr<ThetaEngine>>(m, "ThetaEngine")
      .def(py::init<SiegelMatrix>(), py::arg("siegel"))
      .def_property_readonly("genus", &ThetaEngine::genus)
      .def("truncation_radius", &ThetaEngine::truncation_radius,
           py::arg("policy"), py::arg("deriv_order") = 0,
           py::arg("z_bound") = 0.0)
      .def(
          "theta",
          [](const ThetaEngine& self, const Eigen::VectorXcd& z,
             const TruncationPolicy& policy, const Eigen::VectorXd& a,
             const Eigen::VectorXd& b) {
            return self.theta(make_char(self.genus(), a, b), z, policy);
          },
          py::arg("z"), py::arg("policy") = TruncationPolicy{},
          py::arg("char_a") = Eigen::VectorXd(),
          py::arg("char_b") = Eigen::VectorXd())
      .def(
          "jet",
          [](const ThetaEngine& self, const Eigen::VectorXcd& z,
             const std::vector<Eigen::VectorXcd>& directions, int max_order,
             const TruncationPolicy& policy) {
            return self.jet(ThetaCharacteristic::zero(self.genus()), z,
                            directions, max_order, policy);
          },
          py::arg("z"), py::arg("directions"), py::arg("max_order"),
          py::arg("policy") = TruncationPolicy{})
      .def("reduce_mod_lattice", &ThetaEngine::reduce_mod_lattice)
      .def("lattice_distance", &ThetaEngine::lattice_distance);

  py::class_<KummerPoint>(m, "KummerPoint")
      .def_readonly("coords", &KummerPoint::coords)
      .def_readonly("source_z", &KummerPoint::source_z);

  py::class_<SecantConfig>(m, "SecantConfig")
      .def_readonly("m", &SecantConfig::m)
      .def_readonly("points_a", &SecantConfig::points_a)
      .def_readonly("centered_u", &SecantConfig::centered_u)
      .def_readonly("centered_b", &SecantConfig::centered_b);

  py::class_<SecantReport>(m, "SecantReport")
      .def_readonly("matrix_rows", &SecantReport::matrix_rows)
      .def_readonly("singular_values", &SecantReport::singular_values)
      .def_readonly("rank_estimate", &SecantReport::rank_estimate)
      .def_readonly("is_secant", &SecantReport::is_secant)
      .def_readonly("gap_ratio", &SecantReport::gap_ratio);

  m.def(
      "center_config",
      [](const std::vector<Eigen::VectorXcd>& pts) {
        return center_config(pts);
      },
      py::arg("points_a"));

  py::class_<KummerContext>(m, "KummerContext")
      .def(py::init<SiegelMatrix>(), py::arg("siegel"))
      .def_property_readonly("genus", &KummerContext::genus)
      .def("second_order_basis", &KummerContext::second_order_basis,
           py::arg("z"), py::arg("policy") = TruncationPolicy{})
      .def("addition_formula_residual",
           &KummerContext::addition_formula_residual, py::arg("z"),
           py::arg("w"), py::arg("policy") = TruncationPolicy{})
      .def("kummer_map", &KummerContext::kummer_map, py::arg("z"),
           py::arg("policy") = TruncationPolicy{})
      .def("honest_secant_test", &KummerContext::honest_secant_test,
           py::arg("config"), py::arg("zeta"), py::arg("tol_rank") = 1e-7,
           py::arg("policy") = TruncationPolicy{})
      .def("degenerate_secant_test", &KummerContext::degenerate_secant_test,
           py::arg("u"), py::arg("d1"), py::arg("b"),
           py::arg("tol_rank") = 1e-7, py::arg("policy") = TruncationPolicy{});

  py::class_<WeightedPartition>(m, "WeightedPartition")
      .def_readonly("s", &WeightedPartition::s)
      .def_readonly("multiplicities", &WeightedPartition::multiplicities)
      .def_readonly("weight_num", &WeightedPartition::weight_num)
      .def_readonly("weight_den", &WeightedPartition::weight_den)
      .def("weight", &WeightedPartition::weight);

  m.def("partitions_weighted", &partitions_weighted, py::arg("s"));

  py::class_<SampleGrid>(m, "SampleGrid")
      .def_readonly("points", &SampleGrid::points)
      .def_readonly("seed", &SampleGrid::seed);

  py::class_<HierarchyState>(m, "HierarchyState")
      .def_readonly("config", &HierarchyState::config)
      .def_readonly("residuals", &HierarchyState::residuals)
      .def_readonly("grid", &HierarchyState::grid)
      .def_property_readonly("solved_order", &HierarchyState::solved_order)
      .def_property_readonly(
          "directions",
          [](const HierarchyState& self) { return self.seq.w; })
      .def("alpha",
           [](const HierarchyState& self, int j, int i) {
             return self.alphas.get(j, i);
           })
      .def("p_series",
           [](const HierarchyState& self, const Eigen::VectorXcd& z, int order,
              const TruncationPolicy& policy) {
             PowerSeries s = p_series_eval(self, z, order, policy);
             std::vector<cplx> coeffs;
             for (int i = 0; i <= s.order(); ++i) coeffs.push_back(s.coeff(i));
             return coeffs;
           },
           py::arg("z"), py::arg("order"),
           py::arg("policy") = TruncationPolicy{});

  py::class_<HierarchyRun>(m, "HierarchyRun")
      .def_readonly("state", &HierarchyRun::state)
      .def_readonly("first_failed_order", &HierarchyRun::first_failed_order)
      .def_readonly("failure_residual", &HierarchyRun::failure_residual)
      .def_readonly("failure_note", &HierarchyRun::failure_note)
      .def_property_readonly("failure_status", [](const HierarchyRun& self) {
        return std::string(solve_status_name(self.failure_status));
      });

  m.def(
      "run_hierarchy",
      [](const Eigen::MatrixXcd& omega, const Eigen::VectorXcd& u,
         const std::vector<Eigen::VectorXcd>& b, int s_max, double tol_solve,
         int grid_size, std::uint64_t seed, const TruncationPolicy& policy) {
        SiegelMatrix sm = validate_siegel(omega);
        auto engine = std::make_shared<ThetaEngine>(sm);
        SecantConfig config = config_from_centered(u, b, engine.get());
        GridSpec spec;
        spec.count = grid_size;
        spec.seed = seed;
        return run_hierarchy(engine, config, s_max, tol_solve, spec, policy);
      },
      py::arg("omega"), py::arg("u"), py::arg("b"), py::arg("s_max"),
      py::arg("tol_solve") = 1e-8, py::arg("grid_size") = 0,
      py::arg("seed") = 1, py::arg("policy") = TruncationPolicy{});

  py::class_<RtResiduals>(m, "RtResiduals")
      .def_readonly("r_residual", &RtResiduals::r_residual)
      .def_readonly("t_residual", &RtResiduals::t_residual)
      .def_readonly("rsq_residual", &RtResiduals::rsq_residual);

  m.def("rt_cross_check", &rt_cross_check, py::arg("state"), py::arg("s"),
        py::arg("z"), py::arg("policy") = TruncationPolicy{});

  py::class_<SecantSearchResult>(m, "SecantSearchResult")
      .def_readonly("success", &SecantSearchResult::success)
      .def_readonly("config", &SecantSearchResult::config)
      .def_readonly("d1", &SecantSearchResult::d1)
      .def_readonly("d1_scale", &SecantSearchResult::d1_scale)
      .def_readonly("alpha1_1", &SecantSearchResult::alpha1_1)
      .def_readonly("alpha_j_1", &SecantSearchResult::alpha_j_1)
      .def_readonly("final_residual", &SecantSearchResult::final_residual)
      .def_readonly("iterations", &SecantSearchResult::iterations)
      .def_readonly("seed", &SecantSearchResult::seed);

  m.def(
      "find_degenerate_secant",
      [](const Eigen::MatrixXcd& omega, int mm, std::uint64_t seed,
         double tol_search, int max_iters, const TruncationPolicy& policy) {
        KummerContext ctx(validate_siegel(omega));
        return find_degenerate_secant(ctx, mm, seed, tol_search, max_iters,
                                      policy);
      },
      py::arg("omega"), py::arg("m") = 1, py::arg("seed") = 1,
      py::arg("tol_search") = 1e-8, py::arg("max_iters") = 200,
      py::arg("policy") = TruncationPolicy{});

  m.def("translated_configs", &translated_configs, py::arg("u"), py::arg("b"));

  py::class_<DivisorIntersection>(m, "DivisorIntersection")
      .def_readonly("u", &DivisorIntersection::u)
      .def_readonly("points", &DivisorIntersection::points)
      .def_readonly("tol", &DivisorIntersection::tol);

  m.def(
      "divisor_intersection_points",
      [](const Eigen::MatrixXcd& omega, const Eigen::VectorXcd& u,
         int n_starts, double tol, const TruncationPolicy& policy) {
        ThetaEngine engine(validate_siegel(omega));
        return divisor_intersection_points(engine, u, n_starts, tol, policy);
      },
      py::arg("omega"), py::arg("u"), py::arg("n_starts") = 48,
      py::arg("tol") = 1e-9, py::arg("policy") = TruncationPolicy{});

  m.def("restriction_check", &restriction_check, py::arg("state"),
        py::arg("s"), py::arg("isect"), py::arg("policy") = TruncationPolicy{});

  m.def(
      "run_report",
      [](const std::string& config_text, bool verbose) {
        RunConfig config = parse_config(config_text);
        return serialize_report(dispatch(config, verbose));
      },
      py::arg("config_text"), py::arg("verbose") = false,
      "Parse a JSON config, run the workflow and return the report bytes.");
}
