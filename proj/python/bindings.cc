#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "sonicguide/earcons.h"
#include "sonicguide/error.h"
#include "sonicguide/mapping.h"
#include "sonicguide/probes.h"
#include "sonicguide/simulated_operator.h"
#include "sonicguide/stream.h"
#include "sonicguide/synth.h"
#include "sonicguide/trajectory.h"
#include "sonicguide/wav.h"

namespace py = pybind11;
using namespace sonicguide;

namespace {

using FloatArray = py::array_t<float, py::array::c_style | py::array::forcecast>;

py::array_t<float> to_numpy(std::vector<float> frames) {
  auto* owned = new std::vector<float>(std::move(frames));
  py::capsule free_when_done(owned, [](void* p) { delete static_cast<std::vector<float>*>(p); });
  return py::array_t<float>({static_cast<py::ssize_t>(owned->size())}, {sizeof(float)},
                            owned->data(), free_when_done);
}

AudioBlock to_audio(const FloatArray& samples, double sample_rate) {
  if (samples.ndim() != 1) throw ValidationError("audio must be one-dimensional");
  AudioBlock a;
  a.sample_rate = sample_rate;
  a.frames.assign(samples.data(), samples.data() + samples.size());
  return a;
}

// (N, 4) rows of t, x, y, z.
std::vector<TrajectorySample> to_samples(
    const py::array_t<double, py::array::c_style | py::array::forcecast>& rows) {
  if (rows.ndim() != 2 || rows.shape(1) != 4)
    throw ValidationError("positions must have shape (N, 4): t, x, y, z");
  std::vector<TrajectorySample> out;
  const auto r = rows.unchecked<2>();
  for (py::ssize_t i = 0; i < r.shape(0); ++i)
    out.push_back({r(i, 0), make_displacement(r(i, 1), r(i, 2), r(i, 3))});
  return out;
}

template <typename T>
void def_fields(py::class_<T>& cls) {
  cls.def(py::init<>()).def("__eq__", [](const T& a, const T& b) { return a == b; });
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Psychoacoustic sonification for target guidance";

  py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
  py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
  py::register_exception<IoError>(m, "IoError", PyExc_OSError);
  py::register_exception<NoSignalError>(m, "NoSignalError", PyExc_RuntimeError);
  py::register_exception<AmbiguityError>(m, "AmbiguityError", PyExc_RuntimeError);

  py::enum_<Mode>(m, "Mode").value("D2", Mode::k2D).value("D3", Mode::k3D);
  py::enum_<ModulationBand>(m, "ModulationBand")
      .value("NONE", ModulationBand::kNone)
      .value("BEATS", ModulationBand::kBeats)
      .value("ROUGHNESS", ModulationBand::kRoughness);
  py::enum_<EarconKind>(m, "EarconKind")
      .value("CLICK", EarconKind::kClick)
      .value("TRIAD", EarconKind::kTriad)
      .value("ZONE_ENTER", EarconKind::kZoneEnter)
      .value("ZONE_EXIT", EarconKind::kZoneExit);

  py::class_<DisplacementVector> dv(m, "DisplacementVector");
  dv.def(py::init([](double x, double y, double z) { return make_displacement(x, y, z); }),
         py::arg("x") = 0.0, py::arg("y") = 0.0, py::arg("z") = 0.0)
      .def_readwrite("x", &DisplacementVector::x)
      .def_readwrite("y", &DisplacementVector::y)
      .def_readwrite("z", &DisplacementVector::z)
      .def("norm", &DisplacementVector::norm)
      .def("__eq__", [](const DisplacementVector& a, const DisplacementVector& b) { return a == b; })
      .def("__repr__", [](const DisplacementVector& d) {
        return "DisplacementVector(" + std::to_string(d.x) + ", " + std::to_string(d.y) + ", " +
               std::to_string(d.z) + ")";
      });

  py::class_<SonificationParams> sp(m, "SonificationParams");
  def_fields(sp);
  sp.def_readwrite("chroma_velocity", &SonificationParams::chroma_velocity)
      .def_readwrite("beat_rate", &SonificationParams::beat_rate)
      .def_readwrite("beat_depth", &SonificationParams::beat_depth)
      .def_readwrite("roughness_depth", &SonificationParams::roughness_depth)
      .def_readwrite("brightness", &SonificationParams::brightness)
      .def_readwrite("fullness", &SonificationParams::fullness)
      .def_readwrite("noise_gain", &SonificationParams::noise_gain);

  py::class_<MappingConfig>(m, "MappingConfig")
      .def(py::init<>())
      .def_readwrite("v_max", &MappingConfig::v_max)
      .def_readwrite("beat_rate_max", &MappingConfig::beat_rate_max)
      .def_readwrite("beat_depth_ramp", &MappingConfig::beat_depth_ramp)
      .def_readwrite("roughness_rate", &MappingConfig::roughness_rate)
      .def_readwrite("roughness_depth_max", &MappingConfig::roughness_depth_max)
      .def_readwrite("brightness_octave_shift_max", &MappingConfig::brightness_octave_shift_max)
      .def_readwrite("fullness_bandwidth_max", &MappingConfig::fullness_bandwidth_max)
      .def_readwrite("target_radius", &MappingConfig::target_radius)
      .def_readwrite("hysteresis", &MappingConfig::hysteresis)
      .def_readwrite("noise_gain_in_zone", &MappingConfig::noise_gain_in_zone)
      .def("validate", &MappingConfig::validate);

  py::class_<SynthConfig>(m, "SynthConfig")
      .def(py::init<>())
      .def_readwrite("sample_rate", &SynthConfig::sample_rate)
      .def_readwrite("block_size", &SynthConfig::block_size)
      .def_readwrite("partial_count", &SynthConfig::partial_count)
      .def_readwrite("base_frequency", &SynthConfig::base_frequency)
      .def_readwrite("envelope_center", &SynthConfig::envelope_center)
      .def_readwrite("envelope_width", &SynthConfig::envelope_width)
      .def_readwrite("smoothing_time", &SynthConfig::smoothing_time)
      .def_readwrite("master_gain", &SynthConfig::master_gain)
      .def_readwrite("noise_seed", &SynthConfig::noise_seed)
      .def("validate", &SynthConfig::validate);

  py::class_<FeatureFrame>(m, "FeatureFrame")
      .def_readonly("time", &FeatureFrame::time)
      .def_readonly("duration", &FeatureFrame::duration)
      .def_readonly("chroma_rate", &FeatureFrame::chroma_rate)
      .def_readonly("am_rate", &FeatureFrame::am_rate)
      .def_readonly("am_depth", &FeatureFrame::am_depth)
      .def_readonly("spectral_centroid", &FeatureFrame::spectral_centroid)
      .def_readonly("envelope_bandwidth", &FeatureFrame::envelope_bandwidth)
      .def_readonly("modulation_band", &FeatureFrame::modulation_band);

  py::class_<EarconEvent>(m, "EarconEvent")
      .def_readonly("kind", &EarconEvent::kind)
      .def_readonly("time", &EarconEvent::time);

  m.def("map_position", &map_position, py::arg("d"), py::arg("mapping") = MappingConfig{});
  m.def("invert_params", &invert_params, py::arg("params"), py::arg("mapping") = MappingConfig{});
  m.def("in_target_zone", &in_target_zone, py::arg("d"), py::arg("mapping") = MappingConfig{});

  m.def(
      "render_steady",
      [](const SonificationParams& params, double seconds, const SynthConfig& synth,
         const MappingConfig& mapping) {
        return to_numpy(render_steady(params, seconds, synth, mapping).frames);
      },
      py::arg("params"), py::arg("seconds"), py::arg("synth") = SynthConfig{},
      py::arg("mapping") = MappingConfig{});

  m.def(
      "render_stream",
      [](const py::array_t<double, py::array::c_style | py::array::forcecast>& positions,
         const SynthConfig& synth, const MappingConfig& mapping, Mode mode,
         std::optional<double> duration, bool earcons) {
        const auto samples = to_samples(positions);
        StreamRender r;
        {
          py::gil_scoped_release release;
          r = render_stream(samples, synth, mapping, mode, duration, earcons);
        }
        return py::make_tuple(to_numpy(std::move(r.audio.frames)), r.events);
      },
      py::arg("positions"), py::arg("synth") = SynthConfig{}, py::arg("mapping") = MappingConfig{},
      py::arg("mode") = Mode::k3D, py::arg("duration") = std::nullopt, py::arg("earcons") = true,
      "Render (N, 4) rows of t, x, y, z. Returns (audio, events).");

  m.def(
      "extract_features",
      [](const FloatArray& audio, double sample_rate) {
        return extract_features(to_audio(audio, sample_rate));
      },
      py::arg("audio"), py::arg("sample_rate") = 48000.0);

  m.def(
      "decode_position",
      [](const FloatArray& audio, double sample_rate, const MappingConfig& mapping,
         const SynthConfig& synth) {
        const AudioBlock a = to_audio(audio, sample_rate);
        py::gil_scoped_release release;
        return decode_position(a, mapping, synth);
      },
      py::arg("audio"), py::arg("sample_rate") = 48000.0, py::arg("mapping") = MappingConfig{},
      py::arg("synth") = SynthConfig{});

  m.def(
      "read_wav",
      [](const std::filesystem::path& path) {
        AudioBlock a = read_wav(path);
        return py::make_tuple(to_numpy(std::move(a.frames)), a.sample_rate);
      },
      py::arg("path"));
  m.def(
      "write_wav",
      [](const std::filesystem::path& path, const FloatArray& audio, double sample_rate) {
        write_wav(to_audio(audio, sample_rate), path);
      },
      py::arg("path"), py::arg("audio"), py::arg("sample_rate") = 48000.0);

  m.def(
      "run_simulated_operator",
      [](int trials, std::uint64_t seed, Mode mode, double analysis_window, int max_steps) {
        OperatorConfig cfg;
        cfg.trials = trials;
        cfg.seed = seed;
        cfg.mode = mode;
        cfg.analysis_window = analysis_window;
        cfg.max_steps = max_steps;
        OperatorReport report;
        {
          py::gil_scoped_release release;
          report = run_simulated_operator(cfg);
        }
        py::list rows;
        for (const auto& t : report.trials) {
          py::dict row;
          row["trial"] = t.trial;
          row["outcome"] = std::string(to_string(t.outcome));
          row["steps"] = t.steps;
          row["time_to_target"] = t.time_to_target;
          row["path_length"] = t.path_length;
          rows.append(row);
        }
        py::dict out;
        out["hit_rate"] = report.hit_rate;
        out["median_steps"] = report.median_steps;
        out["median_time"] = report.median_time;
        out["trials"] = rows;
        return out;
      },
      py::arg("trials") = 10, py::arg("seed") = 7, py::arg("mode") = Mode::k3D,
      py::arg("analysis_window") = 1.0, py::arg("max_steps") = 50);
}
