// Copyright 2026 The bsmkit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "bsmkit/cli.hpp"
#include "bsmkit/core.hpp"
#include "bsmkit/design.hpp"
#include "bsmkit/io.hpp"
#include "bsmkit/metrics.hpp"
#include "bsmkit/scene.hpp"
#include "bsmkit/steering.hpp"

namespace py = pybind11;
using namespace bsm;

namespace {

using CArray = py::array_t<cplx, py::array::c_style | py::array::forcecast>;

// [F] of R x C matrices -> (F, R, C) array.
CArray stack(const std::vector<Eigen::MatrixXcd>& data) {
  const auto nf = static_cast<py::ssize_t>(data.size());
  const py::ssize_t rows = data.empty() ? 0 : data[0].rows();
  const py::ssize_t cols = data.empty() ? 0 : data[0].cols();
  CArray out({nf, rows, cols});
  auto a = out.mutable_unchecked<3>();
  for (py::ssize_t f = 0; f < nf; ++f) {
    for (py::ssize_t r = 0; r < rows; ++r) {
      for (py::ssize_t c = 0; c < cols; ++c) a(f, r, c) = data[f](r, c);
    }
  }
  return out;
}

std::vector<Eigen::MatrixXcd> unstack(const CArray& arr) {
  if (arr.ndim() != 3) throw Error(ErrorCode::kDimsMismatch, "expected a 3-D array");
  auto a = arr.unchecked<3>();
  std::vector<Eigen::MatrixXcd> out(a.shape(0), Eigen::MatrixXcd(a.shape(1), a.shape(2)));
  for (py::ssize_t f = 0; f < a.shape(0); ++f) {
    for (py::ssize_t r = 0; r < a.shape(1); ++r) {
      for (py::ssize_t c = 0; c < a.shape(2); ++c) out[f](r, c) = a(f, r, c);
    }
  }
  return out;
}

SourceDistance to_distance(const std::optional<double>& d) {
  return d ? SourceDistance::meters(*d) : SourceDistance::plane_wave();
}

std::optional<double> from_distance(const SourceDistance& d) {
  if (d.is_plane_wave()) return std::nullopt;
  return d.value();
}

std::shared_ptr<const DirectionGrid> grid_from(const std::string& spec) {
  if (spec == "lebedev-2702") return std::make_shared<const DirectionGrid>(DirectionGrid::lebedev_2702());
  if (spec.rfind("ring:", 0) == 0) {
    return std::make_shared<const DirectionGrid>(DirectionGrid::ring(std::stoul(spec.substr(5))));
  }
  throw Error(ErrorCode::kInvalidArgument, "grid must be lebedev-2702 or ring:N");
}

Eigen::MatrixXd grid_angles(const DirectionGrid& g) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(g.size()), 2);
  for (std::size_t q = 0; q < g.size(); ++q) {
    out(static_cast<Eigen::Index>(q), 0) = g[q].theta();
    out(static_cast<Eigen::Index>(q), 1) = g[q].phi();
  }
  return out;
}

py::object opt_or_none(const std::optional<double>& v) {
  return v ? py::object(py::float_(*v)) : py::object(py::none());
}

py::dict report_dict(const MetricsReport& r) {
  const auto n = static_cast<py::ssize_t>(r.frequency_rows.size());
  py::array_t<double> f(n);
  auto col = [&](auto pick) {
    py::array_t<double> a({n, py::ssize_t{2}});
    auto m = a.mutable_unchecked<2>();
    for (py::ssize_t i = 0; i < n; ++i) {
      for (int e = 0; e < 2; ++e) {
        const std::optional<double> v = pick(r.frequency_rows[i])[e];
        m(i, e) = v ? *v : std::numeric_limits<double>::quiet_NaN();
      }
    }
    return a;
  };
  auto fm = f.mutable_unchecked<1>();
  for (py::ssize_t i = 0; i < n; ++i) fm(i) = r.frequency_rows[i].f_hz;
  py::list dirs;
  for (const auto& d : r.direction_rows) {
    py::dict row;
    row["az_deg"] = d.az_deg;
    row["el_deg"] = d.el_deg;
    row["metric"] = d.metric;
    row["ref"] = d.ref;
    row["rep"] = d.rep;
    row["abs_err"] = d.abs_err;
    row["region"] = to_string(d.region);
    dirs.append(row);
  }
  py::dict out;
  out["f_hz"] = f;
  out["eps_ls"] = col([](const FrequencyRow& x) { return x.eps_ls; });
  out["eps_magls"] = col([](const FrequencyRow& x) { return x.eps_magls; });
  out["eps_mix"] = col([](const FrequencyRow& x) { return x.eps_mix; });
  out["xi_null"] = col([](const FrequencyRow& x) { return x.xi_null; });
  out["directions"] = dirs;
  const ReportSummary s = summarize(r);
  py::dict summary;
  summary["eps_mix_avg"] = py::make_tuple(opt_or_none(s.eps_mix_avg[0]), opt_or_none(s.eps_mix_avg[1]));
  summary["eps_ls_avg"] = py::make_tuple(opt_or_none(s.eps_ls_avg[0]), opt_or_none(s.eps_ls_avg[1]));
  summary["eps_magls_avg"] =
      py::make_tuple(opt_or_none(s.eps_magls_avg[0]), opt_or_none(s.eps_magls_avg[1]));
  summary["ild_err_avg"] = opt_or_none(s.ild_err_avg);
  summary["itd_err_avg"] = opt_or_none(s.itd_err_avg);
  out["summary"] = summary;
  return out;
}

}  // namespace

PYBIND11_MODULE(_bsmkit, m) {
  m.doc() = "Binaural signal matching for wearable microphone arrays";

  static py::handle error_type = py::exception<Error>(m, "BsmError", PyExc_RuntimeError).release();
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object exc = error_type(std::string(e.what()));
      exc.attr("code") = std::string(to_string(e.code()));
      PyErr_SetObject(error_type.ptr(), exc.ptr());
    }
  });

  m.def("alpha_weight", [](double f) { return alpha_weight(f); }, py::arg("f_hz"));
  m.def("lebedev_2702", [] { return grid_angles(DirectionGrid::lebedev_2702()); },
        "(Q, 2) array of (theta, phi) in radians");
  m.def("ring", [](std::size_t n) { return grid_angles(DirectionGrid::ring(n)); }, py::arg("n"));

  py::class_<SteeringSet>(m, "SteeringSet")
      .def_property_readonly("data", [](const SteeringSet& s) { return stack(s.data); })
      .def_property_readonly("frequencies", [](const SteeringSet& s) { return s.freq_axis->frequencies(); })
      .def_property_readonly("grid", [](const SteeringSet& s) { return grid_angles(*s.grid); })
      .def_property_readonly("distance", [](const SteeringSet& s) { return from_distance(s.source_distance); })
      .def_property_readonly("num_mics", &SteeringSet::num_mics)
      .def_property_readonly("num_dirs", &SteeringSet::num_dirs);

  py::class_<HrtfSet>(m, "HrtfSet")
      .def_property_readonly("data", [](const HrtfSet& h) { return stack(h.data); })
      .def_property_readonly("frequencies", [](const HrtfSet& h) { return h.freq_axis->frequencies(); })
      .def_property_readonly("distance", [](const HrtfSet& h) { return from_distance(h.source_distance); })
      .def("rotated", [](const HrtfSet& h, double deg) { return rotate_hrtf(h, deg2rad(deg)).hrtf; },
           py::arg("degrees"));

  py::class_<BsmFilterBank>(m, "FilterBank")
      .def_property_readonly("weights", [](const BsmFilterBank& c) { return stack(c.weights); })
      .def_property_readonly("criterion", [](const BsmFilterBank& c) { return to_string(c.criterion); })
      .def_property_readonly("frequencies", [](const BsmFilterBank& c) { return c.freq_axis->frequencies(); })
      .def_property_readonly("unconverged_bins",
                             [](const BsmFilterBank& c) { return c.magls_diagnostics.unconverged_bins; });

  m.def(
      "steering",
      [](std::optional<double> distance, double fs, std::size_t nfft, const std::string& grid) {
        return make_steering(std::make_shared<const ArrayGeometry>(ArrayGeometry::builtin_glasses()),
                             grid_from(grid), to_distance(distance),
                             std::make_shared<const FrequencyAxis>(fs, nfft));
      },
      py::arg("distance") = py::none(), py::arg("fs") = 48000.0, py::arg("nfft") = 512,
      py::arg("grid") = "lebedev-2702",
      "Analytic steering set of the built-in glasses array; distance None means plane waves.");
  m.def(
      "ear_proxy",
      [](std::optional<double> distance, double fs, std::size_t nfft, const std::string& grid) {
        return free_field_ear_proxy(grid_from(grid), to_distance(distance),
                                    std::make_shared<const FrequencyAxis>(fs, nfft));
      },
      py::arg("distance") = py::none(), py::arg("fs") = 48000.0, py::arg("nfft") = 512,
      py::arg("grid") = "lebedev-2702");

  m.def(
      "design",
      [](const SteeringSet& v, const HrtfSet& h, const std::string& criterion, double snr_db,
         std::optional<std::tuple<double, double, double>> fov, const std::string& mix_mode) {
        DesignOptions opts;
        opts.criterion = criterion_from_string(criterion);
        opts.noise = NoiseModel::from_snr_db(snr_db);
        opts.mix_mode = mix_mode_from_string(mix_mode);
        if (fov) {
          FovSpec spec;
          spec.az_halfwidth = deg2rad(std::get<0>(*fov));
          spec.el_halfwidth = deg2rad(std::get<1>(*fov));
          spec.beta = std::get<2>(*fov);
          opts.fov = spec;
        }
        py::gil_scoped_release release;
        return design(v, h, opts);
      },
      py::arg("steering"), py::arg("hrtf"), py::arg("criterion") = "mixed", py::arg("snr_db") = 20.0,
      py::arg("fov") = py::none(), py::arg("mix_mode") = "blend",
      "fov is (az_halfwidth_deg, el_halfwidth_deg, beta) or None.");

  m.def(
      "evaluate",
      [](const BsmFilterBank& c, const SteeringSet& v, const HrtfSet& h, const std::string& region,
         bool per_direction) {
        EvaluateOptions opts;
        opts.region = region_from_string(region);
        opts.per_direction = per_direction;
        MetricsReport r;
        {
          py::gil_scoped_release release;
          r = evaluate(c, v, h, opts);
        }
        return report_dict(r);
      },
      py::arg("filter"), py::arg("steering"), py::arg("hrtf"), py::arg("region") = "all",
      py::arg("per_direction") = true);

  m.def(
      "ild",
      [](const Eigen::VectorXcd& left, const Eigen::VectorXcd& right, double fs, std::size_t nfft) {
        const FrequencyAxis axis(fs, nfft);
        const ErbFilterbank bank = make_erb_filterbank(axis);
        return ild(std::span<const cplx>(left.data(), left.size()),
                   std::span<const cplx>(right.data(), right.size()), bank)
            .average;
      },
      py::arg("left"), py::arg("right"), py::arg("fs"), py::arg("nfft"),
      "Band-averaged ILD in dB of two one-sided spectra.");
  m.def(
      "itd",
      [](const std::vector<double>& left, const std::vector<double>& right, double fs, double f_max) {
        return itd(left, right, fs, f_max);
      },
      py::arg("left"), py::arg("right"), py::arg("fs"), py::arg("f_max") = 1500.0);
  m.def(
      "null_space_projection",
      [](const Eigen::MatrixXcd& v, const Eigen::VectorXcd& h, double threshold_db) {
        return null_space_projection(v, h, threshold_db);
      },
      py::arg("v"), py::arg("h"), py::arg("threshold_db") = -20.0);

  m.def(
      "render",
      [](const BsmFilterBank& c, const std::vector<std::vector<double>>& mics, std::size_t hop) {
        FrameParams fp;
        fp.frame = c.freq_axis->fft_size();
        fp.hop = hop ? hop : fp.frame / 2;
        BinauralTime y;
        {
          py::gil_scoped_release release;
          y = render_time_domain(c, mics, fp);
        }
        return py::make_tuple(y.left, y.right);
      },
      py::arg("filter"), py::arg("mics"), py::arg("hop") = 0);

  m.def("save", py::overload_cast<const SteeringSet&, const std::string&>(&save_dataset));
  m.def("save", py::overload_cast<const HrtfSet&, const std::string&>(&save_dataset));
  m.def("save", py::overload_cast<const BsmFilterBank&, const std::string&>(&save_dataset));
  m.def("load", [](const std::string& path) -> py::object {
    Dataset d = load_dataset(path);
    return std::visit([](auto&& x) { return py::cast(std::move(x)); }, std::move(d));
  });

  m.def("stack_check", [](const CArray& a) { return stack(unstack(a)); },
        "Round-trips a (F, R, C) complex array through the native layout.");

  m.def("cli", [](const std::vector<std::string>& args) { return cli::run(args); },
        py::arg("args"), "Runs the command-line front end; returns its exit code.");
}
