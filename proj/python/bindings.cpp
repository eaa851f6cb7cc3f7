#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstring>
#include <string>
#include <vector>

#include "catgeo/cli.hpp"
#include "catgeo/gradcheck.hpp"
#include "catgeo/io.hpp"
#include "catgeo/sinkhorn.hpp"
#include "catgeo/synth.hpp"

namespace py = pybind11;
using namespace catgeo;

namespace {

std::span<const std::byte> as_bytes(const py::bytes& b, std::string& keep) {
    keep = b;
    return {reinterpret_cast<const std::byte*>(keep.data()), keep.size()};
}

py::bytes to_bytes(const std::vector<std::byte>& v) {
    return {reinterpret_cast<const char*>(v.data()), v.size()};
}

py::array_t<float> points_array(const PointCloud& c) {
    py::array_t<float> out({py::ssize_t(c.size()), py::ssize_t(4)});
    if (!c.empty()) std::memcpy(out.mutable_data(), c.points.data(), c.size() * sizeof(Point));
    return out;
}

PointCloud cloud_from(py::array_t<float, py::array::c_style | py::array::forcecast> a) {
    if (a.ndim() != 2 || a.shape(1) != 4) throw DimensionError("points must have shape (N, 4)");
    PointCloud c;
    c.points.resize(std::size_t(a.shape(0)));
    if (!c.empty()) std::memcpy(c.points.data(), a.data(), c.size() * sizeof(Point));
    return c;
}

}  // namespace

PYBIND11_MODULE(_catgeo, m) {
    m.doc() = "catgeo core bindings";
    m.attr("IGNORE_LABEL") = kIgnoreLabel;

    py::register_exception<io::FormatError>(m, "FormatError", PyExc_ValueError);
    py::register_exception<DimensionError>(m, "DimensionError", PyExc_ValueError);

    m.def(
        "sinkhorn",
        [](const Eigen::MatrixXd& cost, double sigma, int max_iters, double tol, bool negate_cost) {
            sinkhorn::SinkhornConfig cfg{sigma, max_iters, tol, negate_cost};
            const auto p = sinkhorn::solve(cost, cfg);
            return py::make_tuple(p.plan, p.residual, p.iters_used);
        },
        py::arg("cost"), py::arg("sigma") = 0.05, py::arg("max_iters") = 200, py::arg("tol") = 1e-8,
        py::arg("negate_cost") = false, "Entropic transport plan between uniform marginals: (plan, residual, iters).");

    m.def("decode_points", [](const py::bytes& b) {
        std::string keep;
        return points_array(io::decode_points(as_bytes(b, keep)));
    });
    m.def("encode_points", [](py::array_t<float, py::array::c_style | py::array::forcecast> a) {
        return to_bytes(io::encode_points(cloud_from(a)));
    });
    m.def("decode_labels", [](const py::bytes& b, std::size_t num_classes) {
        std::string keep;
        return io::decode_labels(as_bytes(b, keep), num_classes).labels;
    });
    m.def("encode_labels",
          [](const std::vector<std::uint32_t>& labels) { return to_bytes(io::encode_labels(LabelSet{labels})); });

    m.def(
        "synth_scene",
        [](std::size_t idx, std::uint64_t seed, std::size_t points, bool test) {
            synth::SynthConfig cfg;
            cfg.seed = seed;
            cfg.points_per_scene = points;
            const auto s = test ? synth::generate_test_scene(cfg, idx) : synth::generate_scene(cfg, idx);
            return py::make_tuple(points_array(s.cloud), s.labels.labels);
        },
        py::arg("idx"), py::arg("seed") = 0, py::arg("points") = 600, py::arg("test") = false);

    m.def(
        "gradcheck",
        [](std::uint64_t seed, std::size_t configs) {
            gradcheck::Options opts;
            opts.seed = seed;
            opts.configs = configs;
            const auto r = gradcheck::run(opts);
            py::dict d;
            d["configs"] = r.configs;
            d["coordinates"] = r.coordinates;
            d["failures"] = r.failures;
            d["max_rel_error"] = r.max_rel_error;
            d["embedding_untouched"] = r.embedding_untouched;
            d["passed"] = r.passed();
            return d;
        },
        py::arg("seed") = 0, py::arg("configs") = 20);

    m.def(
        "run_cli",
        [](std::vector<std::string> args) {
            args.insert(args.begin(), "catgeo");
            std::vector<const char*> argv;
            for (const auto& a : args) argv.push_back(a.c_str());
            py::gil_scoped_release release;
            return run_cli(int(argv.size()), argv.data());
        },
        "Runs a CLI subcommand in-process and returns its exit code.");
}
