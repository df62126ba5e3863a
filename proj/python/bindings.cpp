#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "nsrkit/harness/run.hpp"

namespace py = pybind11;
using namespace nsr;
using imaging::ImageF;

namespace {

using FloatArray = py::array_t<float, py::array::c_style | py::array::forcecast>;

ImageF to_image(const FloatArray& a) {
    if (a.ndim() != 3 || a.shape(2) != 3) throw py::value_error("expected an HxWx3 array");
    ImageF img(static_cast<std::size_t>(a.shape(0)), static_cast<std::size_t>(a.shape(1)));
    std::copy(a.data(), a.data() + a.size(), img.data.begin());
    return img;
}

FloatArray to_array(const ImageF& img) {
    FloatArray a({img.height, img.width, std::size_t{3}});
    std::copy(img.data.begin(), img.data.end(), a.mutable_data());
    return a;
}

noise::NoiseSpec noise_spec(const std::string& kind, double param, std::uint64_t seed) {
    noise::NoiseSpec s{noise::parse_kind(kind), param, seed};
    s.validate();
    return s;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Joint denoising and super-resolution toolkit";

    m.def("load_png", [](const std::filesystem::path& p) { return to_array(imaging::load_png(p)); }, py::arg("path"));
    m.def("save_png", [](const FloatArray& img, const std::filesystem::path& p) { imaging::save_png(to_image(img), p); },
          py::arg("image"), py::arg("path"));

    m.def("psnr", [](const FloatArray& a, const FloatArray& b) { return imaging::psnr(to_image(a), to_image(b)); });
    m.def("mse", [](const FloatArray& a, const FloatArray& b) { return imaging::mse(to_image(a), to_image(b)); });
    m.def("bicubic_downsample", [](const FloatArray& a, std::size_t s) { return to_array(imaging::bicubic_downsample(to_image(a), s)); },
          py::arg("image"), py::arg("scale"));
    m.def("bicubic_upsample", [](const FloatArray& a, std::size_t s) { return to_array(imaging::bicubic_upsample(to_image(a), s)); },
          py::arg("image"), py::arg("scale"));
    m.def("bicubic_resize",
          [](const FloatArray& a, std::size_t h, std::size_t w) { return to_array(imaging::bicubic_resize(to_image(a), h, w)); },
          py::arg("image"), py::arg("height"), py::arg("width"));

    m.def("corrupt",
          [](const FloatArray& a, const std::string& kind, double param, std::uint64_t seed) {
              return to_array(noise::corrupt(to_image(a), noise_spec(kind, param, seed)));
          },
          py::arg("image"), py::arg("kind"), py::arg("param"), py::arg("seed") = 0,
          "kind is one of none, gaussian, speckle, poisson, salt_pepper");

    m.def("median_filter", [](const FloatArray& a, std::size_t w) { return to_array(denoise::median_filter(to_image(a), w)); },
          py::arg("image"), py::arg("window") = 5);
    m.def("wiener_filter", [](const FloatArray& a, std::size_t w) { return to_array(denoise::wiener_filter(to_image(a), w)); },
          py::arg("image"), py::arg("window") = 5);

    m.def("generate_corpus",
          [](std::size_t n, std::size_t size, std::uint64_t seed) {
              std::vector<FloatArray> out;
              for (const auto& img : harness::generate_corpus(n, size, seed)) out.push_back(to_array(img));
              return out;
          },
          py::arg("n"), py::arg("size"), py::arg("seed"));

    m.def("config_hash", [](const std::filesystem::path& p) { return harness::config_hash(harness::load_config(p)); },
          py::arg("path"));

    py::class_<denoise::DaeModel, std::shared_ptr<denoise::DaeModel>>(m, "Dae")
        .def_static("load", [](const std::filesystem::path& p) { return std::make_shared<denoise::DaeModel>(denoise::DaeModel::load(p)); })
        .def("__call__", [](const denoise::DaeModel& d, const FloatArray& a) { return to_array(denoise::dae_forward(d, to_image(a))); })
        .def_property_readonly("parameter_count", &denoise::DaeModel::parameter_count);

    py::class_<sr::SrNetwork, std::shared_ptr<sr::SrNetwork>>(m, "SrNetwork")
        .def_static("load", [](const std::filesystem::path& p) { return std::make_shared<sr::SrNetwork>(sr::SrNetwork::load(p)); })
        .def("upscale", [](const sr::SrNetwork& n, const FloatArray& a) {
            ImageF out;
            const ImageF in = to_image(a);
            {
                py::gil_scoped_release release;
                out = n.upscale(in);
            }
            return to_array(out);
        })
        .def_property_readonly("scale", [](const sr::SrNetwork& n) { return n.model.config().scale; })
        .def_property_readonly("variant", [](const sr::SrNetwork& n) { return std::string(sr::variant_name(n.model.config().variant)); })
        .def_property_readonly("denoiser",
                               [](const sr::SrNetwork& n) { return std::string(denoise::kind_name(n.denoiser.spec().kind)); });

    py::register_exception<harness::ConfigError>(m, "ConfigError", PyExc_ValueError);
}
