// Python bindings for the calibration toolkit. Clouds move across the
// boundary as (N,3) float64 arrays plus (N,) uint8 label arrays; label
// images as (H,W) uint8 arrays.

#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "semcal/io.hpp"
#include "semcal/rng.hpp"

namespace py = pybind11;
using namespace semcal;

namespace {

LabeledPointCloud cloud_from_arrays(
    const py::array_t<double, py::array::c_style | py::array::forcecast>& points,
    const py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>& labels) {
  if (points.ndim() != 2 || points.shape(1) != 3)
    throw py::value_error("points must have shape (N, 3)");
  if (labels.ndim() != 1 || labels.shape(0) != points.shape(0))
    throw py::value_error("labels must have shape (N,)");
  LabeledPointCloud cloud;
  const auto n = static_cast<std::size_t>(points.shape(0));
  cloud.reserve(n);
  const auto p = points.unchecked<2>();
  const auto l = labels.unchecked<1>();
  for (std::size_t i = 0; i < n; ++i) {
    const auto cls = class_from_id(l(static_cast<py::ssize_t>(i)));
    if (!cls)
      throw_error(ErrorCode::unknown_class,
                  "unknown class id " + std::to_string(l(static_cast<py::ssize_t>(i))));
    cloud.add({p(static_cast<py::ssize_t>(i), 0), p(static_cast<py::ssize_t>(i), 1),
               p(static_cast<py::ssize_t>(i), 2)},
              *cls);
  }
  return cloud;
}

py::array_t<double> cloud_points(const LabeledPointCloud& cloud) {
  py::array_t<double> out({static_cast<py::ssize_t>(cloud.size()), py::ssize_t{3}});
  auto view = out.mutable_unchecked<2>();
  for (std::size_t i = 0; i < cloud.size(); ++i)
    for (int c = 0; c < 3; ++c)
      view(static_cast<py::ssize_t>(i), c) = cloud.points[i][c];
  return out;
}

py::array_t<std::uint8_t> cloud_labels(const LabeledPointCloud& cloud) {
  py::array_t<std::uint8_t> out(static_cast<py::ssize_t>(cloud.size()));
  auto view = out.mutable_unchecked<1>();
  for (std::size_t i = 0; i < cloud.size(); ++i)
    view(static_cast<py::ssize_t>(i)) = to_id(cloud.labels[i]);
  return out;
}

py::array_t<std::uint8_t> image_classes(const SemanticImage& img) {
  py::array_t<std::uint8_t> out({static_cast<py::ssize_t>(img.height),
                                 static_cast<py::ssize_t>(img.width)});
  auto view = out.mutable_unchecked<2>();
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x) view(y, x) = to_id(img.at(x, y));
  return out;
}

SemanticImage image_from_array(
    const py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>& classes) {
  if (classes.ndim() != 2) throw py::value_error("class grid must have shape (H, W)");
  SemanticImage img(static_cast<int>(classes.shape(1)), static_cast<int>(classes.shape(0)));
  const auto view = classes.unchecked<2>();
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x) {
      const auto cls = class_from_id(view(y, x));
      if (!cls)
        throw_error(ErrorCode::unknown_class,
                    "unknown class id " + std::to_string(view(y, x)));
      img.at(x, y) = *cls;
    }
  return img;
}

LossTerm term_from(const std::string& kind, double delta) {
  if (kind == "l2") return LossTerm::l2();
  if (kind == "huber") return LossTerm::huber(delta);
  throw py::value_error("loss kind must be 'l2' or 'huber'");
}

}  // namespace

PYBIND11_MODULE(semcal, m) {
  m.doc() = "Semantic lidar-to-camera extrinsic calibration";

  py::register_exception<Error>(m, "SemcalError");

  py::class_<PoseParams>(m, "PoseParams")
      .def(py::init<>())
      .def(py::init<double, double, double, double, double>(), py::arg("tx"), py::arg("ty"),
           py::arg("tz"), py::arg("yaw_deg"), py::arg("pitch_deg"))
      .def_readwrite("tx", &PoseParams::tx)
      .def_readwrite("ty", &PoseParams::ty)
      .def_readwrite("tz", &PoseParams::tz)
      .def_readwrite("yaw_deg", &PoseParams::yaw_deg)
      .def_readwrite("pitch_deg", &PoseParams::pitch_deg)
      .def("__repr__", [](const PoseParams& p) {
        return "PoseParams(tx=" + format_double(p.tx) + ", ty=" + format_double(p.ty) +
               ", tz=" + format_double(p.tz) + ", yaw_deg=" + format_double(p.yaw_deg) +
               ", pitch_deg=" + format_double(p.pitch_deg) + ")";
      });

  py::class_<CameraIntrinsics>(m, "CameraIntrinsics")
      .def(py::init<>())
      .def(py::init<double, double, double, double, int, int>(), py::arg("fx"), py::arg("fy"),
           py::arg("cx"), py::arg("cy"), py::arg("width"), py::arg("height"))
      .def_readwrite("fx", &CameraIntrinsics::fx)
      .def_readwrite("fy", &CameraIntrinsics::fy)
      .def_readwrite("cx", &CameraIntrinsics::cx)
      .def_readwrite("cy", &CameraIntrinsics::cy)
      .def_readwrite("width", &CameraIntrinsics::width)
      .def_readwrite("height", &CameraIntrinsics::height);

  py::class_<RenderConfig>(m, "RenderConfig")
      .def(py::init<>())
      .def_readwrite("lambda_", &RenderConfig::lambda)
      .def_readwrite("min_radius", &RenderConfig::min_radius)
      .def_readwrite("max_radius", &RenderConfig::max_radius)
      .def_property(
          "background_class",
          [](const RenderConfig& cfg) { return to_id(cfg.background_class); },
          [](RenderConfig& cfg, int id) {
            const auto cls = class_from_id(id);
            if (!cls) throw py::value_error("unknown class id");
            cfg.background_class = *cls;
          });

  py::class_<SearchBounds>(m, "SearchBounds")
      .def(py::init<>())
      .def(py::init<double, double>(), py::arg("pos_half_range"), py::arg("ang_half_range"))
      .def_readwrite("pos_half_range", &SearchBounds::pos_half_range)
      .def_readwrite("ang_half_range", &SearchBounds::ang_half_range);

  py::class_<LabeledPointCloud>(m, "LabeledPointCloud")
      .def(py::init(&cloud_from_arrays), py::arg("points"), py::arg("labels"))
      .def("points", &cloud_points)
      .def("labels", &cloud_labels)
      .def("__len__", &LabeledPointCloud::size);

  py::class_<SemanticImage>(m, "SemanticImage")
      .def(py::init(&image_from_array), py::arg("classes"))
      .def_readonly("width", &SemanticImage::width)
      .def_readonly("height", &SemanticImage::height)
      .def("classes", &image_classes);

  py::class_<StageRecord>(m, "StageRecord")
      .def_readonly("stage", &StageRecord::stage)
      .def_readonly("loss", &StageRecord::loss);

  py::class_<CalibrationResult>(m, "CalibrationResult")
      .def_readonly("pose", &CalibrationResult::pose)
      .def_readonly("final_loss", &CalibrationResult::final_loss)
      .def_readonly("eval_count", &CalibrationResult::eval_count)
      .def_readonly("stage_history", &CalibrationResult::stage_history)
      .def_readonly("verified", &CalibrationResult::verified);

  py::class_<TrialRecord>(m, "TrialRecord")
      .def_readonly("index", &TrialRecord::index)
      .def_readonly("start", &TrialRecord::start)
      .def_readonly("result", &TrialRecord::result)
      .def_readonly("dt_cm", &TrialRecord::dt_cm)
      .def_readonly("dyaw_deg", &TrialRecord::dyaw_deg)
      .def_readonly("dpitch_deg", &TrialRecord::dpitch_deg)
      .def_readonly("accepted", &TrialRecord::accepted);

  py::class_<TrialReport>(m, "TrialReport")
      .def_readonly("trials", &TrialReport::trials)
      .def_readonly("keep", &TrialReport::keep)
      .def_readonly("mean_dt_cm", &TrialReport::mean_dt_cm)
      .def_readonly("mean_dyaw_deg", &TrialReport::mean_dyaw_deg)
      .def_readonly("mean_dpitch_deg", &TrialReport::mean_dpitch_deg)
      .def_readonly("mean_dangle_deg", &TrialReport::mean_dangle_deg)
      .def_readonly("accepted_mean_loss", &TrialReport::accepted_mean_loss)
      .def_readonly("full_mean_loss", &TrialReport::full_mean_loss);

  py::class_<SceneSpec>(m, "SceneSpec")
      .def(py::init<>())
      .def_readwrite("ground_half_extent", &SceneSpec::ground_half_extent)
      .def_readwrite("density", &SceneSpec::density)
      .def_readwrite("noise_sigma", &SceneSpec::noise_sigma)
      .def_readwrite("seed", &SceneSpec::seed)
      .def_readwrite("camera", &SceneSpec::camera)
      .def("add_box",
           [](SceneSpec& spec, double cx, double cy, double half_x, double half_y,
              double height, int cls) {
             const auto c = class_from_id(cls);
             if (!c) throw py::value_error("unknown class id");
             spec.boxes.push_back({cx, cy, half_x, half_y, height, *c});
           },
           py::arg("cx"), py::arg("cy"), py::arg("half_x"), py::arg("half_y"),
           py::arg("height"), py::arg("cls") = 3)
      .def("add_pole",
           [](SceneSpec& spec, double x, double y, double height, double radius, int cls) {
             const auto c = class_from_id(cls);
             if (!c) throw py::value_error("unknown class id");
             spec.poles.push_back({x, y, height, radius, *c});
           },
           py::arg("x"), py::arg("y"), py::arg("height"), py::arg("radius"),
           py::arg("cls") = 5)
      .def("add_strip",
           [](SceneSpec& spec, int cls,
              const std::vector<std::pair<double, double>>& polygon) {
             const auto c = class_from_id(cls);
             if (!c) throw py::value_error("unknown class id");
             StripSpec strip;
             strip.cls = *c;
             for (const auto& [x, y] : polygon) strip.polygon.emplace_back(x, y);
             spec.strips.push_back(std::move(strip));
           },
           py::arg("cls"), py::arg("polygon"));

  m.def("class_name", [](int id) {
    const auto cls = class_from_id(id);
    if (!cls) throw py::value_error("unknown class id");
    return std::string(class_name(*cls));
  });
  m.def("is_dynamic", [](int id) {
    const auto cls = class_from_id(id);
    if (!cls) throw py::value_error("unknown class id");
    return is_dynamic(*cls);
  });

  m.def("extrinsic_matrix",
        [](const PoseParams& pose) {
          const ExtrinsicMatrix e = pose_to_extrinsic(pose);
          Eigen::Matrix4d out = Eigen::Matrix4d::Identity();
          out.block<3, 3>(0, 0) = e.R;
          out.block<3, 1>(0, 3) = e.t;
          return out;
        },
        py::arg("pose"), "4x4 world-to-camera matrix for a pose");

  m.def("pose_from_extrinsic_matrix",
        [](const Eigen::Matrix4d& mat) {
          ExtrinsicMatrix e;
          e.R = mat.block<3, 3>(0, 0);
          e.t = mat.block<3, 1>(0, 3);
          e.validate();
          return pose_from_extrinsic(e);
        },
        py::arg("matrix"));

  m.def("project",
        [](const CameraIntrinsics& K, const PoseParams& pose,
           const py::array_t<double, py::array::c_style | py::array::forcecast>& points)
            -> py::array_t<double> {
          if (points.ndim() != 2 || points.shape(1) != 3)
            throw py::value_error("points must have shape (N, 3)");
          const ExtrinsicMatrix e = pose_to_extrinsic(pose);
          py::array_t<double> out({points.shape(0), py::ssize_t{3}});
          const auto in = points.unchecked<2>();
          auto view = out.mutable_unchecked<2>();
          const double nan = std::numeric_limits<double>::quiet_NaN();
          for (py::ssize_t i = 0; i < points.shape(0); ++i) {
            const auto proj = project(K, e, {in(i, 0), in(i, 1), in(i, 2)});
            view(i, 0) = proj ? proj->u : nan;
            view(i, 1) = proj ? proj->v : nan;
            view(i, 2) = proj ? proj->depth : nan;
          }
          return out;
        },
        py::arg("intrinsics"), py::arg("pose"), py::arg("points"),
        "Pixel coordinates and depth per point; NaN rows are behind the camera");

  m.def("generate_scene", &generate_scene, py::arg("spec"));
  m.def("surface_distance", &surface_distance, py::arg("spec"), py::arg("point"));

  m.def("render", &render, py::arg("cloud"), py::arg("pose"), py::arg("intrinsics"),
        py::arg("config") = RenderConfig{},
        py::call_guard<py::gil_scoped_release>());
  m.def("render_ground_truth", &render_ground_truth, py::arg("cloud"), py::arg("pose"),
        py::arg("intrinsics"), py::arg("config") = RenderConfig{},
        py::arg("label_flip_rate") = 0.0, py::arg("seed") = 0,
        py::call_guard<py::gil_scoped_release>());
  m.def("mask_spurious_sky", &mask_spurious_sky, py::arg("rendered"), py::arg("target"));
  m.def("crop_lower_half", &crop_lower_half, py::arg("image"));

  m.def("masked_loss",
        [](const SemanticImage& rendered, const SemanticImage& target, const std::string& kind,
           double delta, bool sky_valid) {
          return masked_loss(rendered, target, term_from(kind, delta), sky_valid);
        },
        py::arg("rendered"), py::arg("target"), py::arg("kind") = "l2",
        py::arg("delta") = 0.3, py::arg("sky_valid") = false);

  m.def("remove_dynamic",
        [](const LabeledPointCloud& cloud, const std::vector<int>& ids) {
          std::set<ClassId> classes;
          for (int id : ids) {
            const auto cls = class_from_id(id);
            if (!cls) throw py::value_error("unknown class id");
            classes.insert(*cls);
          }
          return remove_dynamic(cloud, classes);
        },
        py::arg("cloud"), py::arg("dynamic_ids") = std::vector<int>{10, 11, 12, 13});
  m.def("crop_radius", &crop_radius, py::arg("cloud"), py::arg("center"), py::arg("radius"));
  m.def("voxel_downsample", &voxel_downsample, py::arg("cloud"), py::arg("voxel_size"));

  m.def("calibrate",
        [](const LabeledPointCloud& cloud, const SemanticImage& target,
           const CameraIntrinsics& K, const PoseParams& guess, const SearchBounds& bounds,
           const std::string& kind, double delta, const RenderConfig& cfg, int max_evals,
           bool sky_valid) {
          CalibrateOptions opts;
          opts.bounds = bounds;
          opts.term = term_from(kind, delta);
          opts.render_cfg = cfg;
          opts.max_evals_per_stage = max_evals;
          opts.sky_valid = sky_valid;
          return calibrate(cloud, target, K, guess, opts);
        },
        py::arg("cloud"), py::arg("target"), py::arg("intrinsics"), py::arg("guess"),
        py::arg("bounds") = SearchBounds{}, py::arg("kind") = "l2", py::arg("delta") = 0.3,
        py::arg("config") = RenderConfig{}, py::arg("max_evals") = 2000,
        py::arg("sky_valid") = false, py::call_guard<py::gil_scoped_release>());

  m.def("run_protocol",
        [](const LabeledPointCloud& cloud, const SemanticImage& target,
           const CameraIntrinsics& K, const PoseParams& ground_truth, int trials, int keep,
           double offset_pos, double offset_ang, std::uint64_t seed, const std::string& kind,
           double delta, const RenderConfig& cfg, int threads) {
          ProtocolOptions opts;
          opts.trials = trials;
          opts.keep = keep;
          opts.offset_pos = offset_pos;
          opts.offset_ang = offset_ang;
          opts.seed = seed;
          opts.threads = threads;
          opts.calibrate.term = term_from(kind, delta);
          opts.calibrate.render_cfg = cfg;
          return run_protocol(cloud, target, K, ground_truth, opts);
        },
        py::arg("cloud"), py::arg("target"), py::arg("intrinsics"), py::arg("ground_truth"),
        py::arg("trials") = 30, py::arg("keep") = 10, py::arg("offset_pos") = 2.5,
        py::arg("offset_ang") = 5.0, py::arg("seed") = 0, py::arg("kind") = "l2",
        py::arg("delta") = 0.3, py::arg("config") = RenderConfig{}, py::arg("threads") = 0,
        py::call_guard<py::gil_scoped_release>());

  m.def("read_cloud", &read_cloud, py::arg("path"));
  m.def("write_cloud", &write_cloud, py::arg("cloud"), py::arg("path"));
  m.def("read_label_image", &read_label_image, py::arg("path"));
  m.def("write_label_image", &write_label_image, py::arg("image"), py::arg("path"),
        py::arg("binary") = true);
  m.def("load_scene_spec", &load_scene_spec, py::arg("path"));
}
