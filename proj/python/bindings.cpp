#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "tomoseg/geometry.hpp"
#include "tomoseg/globalseg.hpp"
#include "tomoseg/harness.hpp"
#include "tomoseg/io.hpp"
#include "tomoseg/regularizers.hpp"
#include "tomoseg/simulate.hpp"
#include "tomoseg/solver.hpp"

namespace py = pybind11;
using namespace tomoseg;

namespace {

Image image_from_array(const py::array_t<double, py::array::c_style | py::array::forcecast>& a) {
    if (a.ndim() != 2)
        throw std::invalid_argument("expected a 2-D array");
    Image img(static_cast<int>(a.shape(1)), static_cast<int>(a.shape(0)));
    std::memcpy(img.data.data(), a.data(), sizeof(double) * img.data.size());
    return img;
}

py::array_t<double> image_to_array(const Image& img) {
    py::array_t<double> a({img.height, img.width});
    std::memcpy(a.mutable_data(), img.data.data(), sizeof(double) * img.data.size());
    return a;
}

Sinogram sino_from_array(const py::array_t<double, py::array::c_style | py::array::forcecast>& a) {
    if (a.ndim() != 2)
        throw std::invalid_argument("expected a 2-D array (angles x detectors)");
    Sinogram g(static_cast<int>(a.shape(0)), static_cast<int>(a.shape(1)));
    std::memcpy(g.data.data(), a.data(), sizeof(double) * g.data.size());
    return g;
}

py::array_t<double> sino_to_array(const Sinogram& g) {
    py::array_t<double> a({g.n_angles, g.n_detectors});
    std::memcpy(a.mutable_data(), g.data.data(), sizeof(double) * g.data.size());
    return a;
}

RegularizerParams params_from_kwargs(const std::string& kind, double a, double b,
                                     double epsilon, double p, double q, double c,
                                     double lambda_weight) {
    RegularizerParams prm;
    prm.kind = reg_kind_from_name(kind);
    prm.a = a;
    prm.b = b;
    prm.epsilon = epsilon;
    prm.p = p;
    prm.q = q;
    prm.c = c;
    prm.lambda_weight = lambda_weight;
    return prm;
}

} // namespace

PYBIND11_MODULE(tomoseg, m) {
    m.doc() = "Matrix-free iterative CT reconstruction with local regularizers and a "
              "global gray-level segmentation constraint";

    py::class_<Geometry>(m, "Geometry")
        .def(py::init<>())
        .def_readwrite("image_size", &Geometry::image_size)
        .def_readwrite("pixel_pitch", &Geometry::pixel_pitch)
        .def_readwrite("angles_deg", &Geometry::angles_deg)
        .def_readwrite("detector_count", &Geometry::detector_count)
        .def_readwrite("detector_pitch", &Geometry::detector_pitch)
        .def_static("uniform", &Geometry::make_uniform, py::arg("image_size"),
                    py::arg("n_views"), py::arg("start_deg") = 0.0,
                    py::arg("end_deg") = 180.0, py::arg("endpoint_exclusive") = true)
        .def_static("default_detector_count", &Geometry::default_detector_count)
        .def("validate", &Geometry::validate);

    py::class_<ReconConfig>(m, "ReconConfig")
        .def(py::init<>())
        .def_readwrite("alpha", &ReconConfig::alpha)
        .def_readwrite("beta", &ReconConfig::beta)
        .def_readwrite("n_g", &ReconConfig::n_g)
        .def_readwrite("n_c", &ReconConfig::n_c)
        .def_readwrite("n_stop", &ReconConfig::n_stop)
        .def_readwrite("n_iter", &ReconConfig::n_iter)
        .def_readwrite("global_enabled", &ReconConfig::global_enabled)
        .def_readwrite("rng_seed", &ReconConfig::rng_seed)
        .def_readwrite("data_steps", &ReconConfig::data_steps)
        .def_readwrite("group_count_override", &ReconConfig::group_count_override)
        .def_readwrite("beta_local", &ReconConfig::beta_local)
        .def_readwrite("beta_global", &ReconConfig::beta_global)
        .def_property(
            "regularizer",
            [](const ReconConfig& c) { return std::string(reg_kind_name(c.regularizer.kind)); },
            [](ReconConfig& c, const std::string& k) {
                c.regularizer.kind = reg_kind_from_name(k);
            })
        .def_property(
            "step_mode",
            [](const ReconConfig& c) {
                return std::string(c.step_mode == StepMode::Normalized ? "normalized" : "raw");
            },
            [](ReconConfig& c, const std::string& mode) {
                if (mode == "normalized") c.step_mode = StepMode::Normalized;
                else if (mode == "raw") c.step_mode = StepMode::Raw;
                else throw std::invalid_argument("step_mode is 'normalized' or 'raw'");
            })
        .def("validate", &ReconConfig::validate);

    py::class_<IterationRecord>(m, "IterationRecord")
        .def_readonly("iteration", &IterationRecord::iteration)
        .def_readonly("residual_norm", &IterationRecord::residual_norm)
        .def_readonly("snr_db", &IterationRecord::snr_db)
        .def_readonly("update_magnitude", &IterationRecord::update_magnitude)
        .def_readonly("n_groups", &IterationRecord::n_groups)
        .def("__repr__", [](const IterationRecord& r) {
            return "<IterationRecord i=" + std::to_string(r.iteration) +
                   " residual=" + std::to_string(r.residual_norm) + ">";
        });

    m.def(
        "forward_project",
        [](const py::array_t<double>& f, const Geometry& geom) {
            return sino_to_array(forward_project(image_from_array(f), geom));
        },
        py::arg("image"), py::arg("geometry"));

    m.def(
        "back_project",
        [](const py::array_t<double>& g, const Geometry& geom) {
            return image_to_array(back_project(sino_from_array(g), geom));
        },
        py::arg("sinogram"), py::arg("geometry"));

    m.def("operator_norm_estimate", &operator_norm_estimate, py::arg("geometry"),
          py::arg("iters") = 30);

    m.def(
        "sirt_step",
        [](const py::array_t<double>& f, const py::array_t<double>& g, const Geometry& geom,
           double alpha) {
            return image_to_array(sirt_step(image_from_array(f), sino_from_array(g), geom, alpha));
        },
        py::arg("image"), py::arg("sinogram"), py::arg("geometry"), py::arg("alpha"));

    m.def("enforce_positivity", [](const py::array_t<double>& f) {
        return image_to_array(enforce_positivity(image_from_array(f)));
    });

    m.def(
        "reconstruct",
        [](const py::array_t<double>& g, const Geometry& geom, const ReconConfig& cfg,
           py::object ground_truth) {
            Image truth;
            const Image* truth_ptr = nullptr;
            if (!ground_truth.is_none()) {
                truth = image_from_array(py::cast<py::array_t<double>>(ground_truth));
                truth_ptr = &truth;
            }
            ReconResult res = reconstruct(sino_from_array(g), geom, cfg, truth_ptr);
            return py::make_tuple(image_to_array(res.image), res.trace);
        },
        py::arg("sinogram"), py::arg("geometry"), py::arg("config"),
        py::arg("ground_truth") = py::none());

    m.def("run_schedule_preview", &run_schedule_preview, py::arg("config"));

    m.def(
        "tv_value", [](const py::array_t<double>& f) { return tv_value(image_from_array(f)); },
        py::arg("image"));

    m.def(
        "regularizer_value",
        [](const py::array_t<double>& f, const std::string& kind, double a, double b,
           double epsilon, double p, double q, double c, double lambda_weight) {
            RegularizerParams prm =
                params_from_kwargs(kind, a, b, epsilon, p, q, c, lambda_weight);
            Image img = image_from_array(f);
            switch (prm.kind) {
                case RegKind::TV: return tv_value(img);
                case RegKind::ATV: return atv_value(img, prm);
                case RegKind::RwATV: {
                    WeightField w = rwatv_update_weights(img, prm);
                    return rwatv_value(img, w, prm);
                }
                case RegKind::QGGMRF: return qggmrf_value(img, prm);
            }
            throw std::logic_error("unreachable");
        },
        py::arg("image"), py::arg("kind") = "tv", py::arg("a") = 1.0, py::arg("b") = 1.0,
        py::arg("epsilon") = 1e-8, py::arg("p") = 2.0, py::arg("q") = 1.0,
        py::arg("c") = 0.0625, py::arg("lambda_weight") = 1.0);

    m.def(
        "regularizer_gradient",
        [](const py::array_t<double>& f, const std::string& kind, double a, double b,
           double epsilon, double p, double q, double c, double lambda_weight) {
            RegularizerParams prm =
                params_from_kwargs(kind, a, b, epsilon, p, q, c, lambda_weight);
            Image img = image_from_array(f);
            if (prm.kind == RegKind::RwATV) {
                WeightField w = rwatv_update_weights(img, prm);
                return image_to_array(regularizer_gradient(img, prm, &w));
            }
            return image_to_array(regularizer_gradient(img, prm));
        },
        py::arg("image"), py::arg("kind") = "tv", py::arg("a") = 1.0, py::arg("b") = 1.0,
        py::arg("epsilon") = 1e-8, py::arg("p") = 2.0, py::arg("q") = 1.0,
        py::arg("c") = 0.0625, py::arg("lambda_weight") = 1.0);

    m.def(
        "otsu_thresholds",
        [](const py::array_t<double>& f, int n) { return otsu_thresholds(image_from_array(f), n); },
        py::arg("image"), py::arg("n"));

    m.def(
        "segment_labels",
        [](const py::array_t<double>& f, int n, bool refined) {
            Image img = image_from_array(f);
            SegmentationMap seg = segment(img, n);
            if (refined) seg = refine(seg, img);
            py::array_t<int> a({seg.height, seg.width});
            std::memcpy(a.mutable_data(), seg.labels.data(), sizeof(int) * seg.labels.size());
            return a;
        },
        py::arg("image"), py::arg("n"), py::arg("refined") = false);

    m.def(
        "global_update",
        [](const py::array_t<double>& f, int iteration, const ReconConfig& cfg) {
            return image_to_array(global_update(image_from_array(f), iteration, cfg));
        },
        py::arg("image"), py::arg("iteration"), py::arg("config"));

    m.def(
        "shepp_logan",
        [](int size, bool modified) { return image_to_array(make_shepp_logan(size, modified)); },
        py::arg("size"), py::arg("modified") = false);

    m.def(
        "disk",
        [](int size, double radius_px) { return image_to_array(make_disk(size, radius_px)); },
        py::arg("size"), py::arg("radius_px"));

    m.def(
        "simulate_lowdose",
        [](const py::array_t<double>& g, double i0, std::uint64_t seed) {
            return sino_to_array(simulate_lowdose(sino_from_array(g), NoiseSpec{i0, seed}));
        },
        py::arg("sinogram"), py::arg("i0"), py::arg("seed") = 0);

    m.def(
        "snr_db",
        [](const py::array_t<double>& ref, const py::array_t<double>& est) {
            return snr_db(image_from_array(ref), image_from_array(est));
        },
        py::arg("reference"), py::arg("estimate"));

    m.def(
        "spectrum_magnitude",
        [](const py::array_t<double>& f) {
            return image_to_array(spectrum_magnitude(image_from_array(f)));
        },
        py::arg("image"));

    m.def(
        "load_grayscale",
        [](const std::string& path) { return image_to_array(load_grayscale(path)); },
        py::arg("path"));

    m.def(
        "save_image",
        [](const py::array_t<double>& f, const std::string& path) {
            save_image(image_from_array(f), path);
        },
        py::arg("image"), py::arg("path"));

    m.attr("SNR_CAP_DB") = kSnrCapDb;
}
