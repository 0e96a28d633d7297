#include "semcal/io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "semcal/geometry.hpp"

namespace semcal {

namespace {

[[noreturn]] void fail_parse(const std::filesystem::path& path, std::size_t line,
                             const std::string& what) {
  throw_error(ErrorCode::parse_error,
              path.string() + ":" + std::to_string(line) + ": " + what);
}

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return {};
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

std::vector<std::string> split_ws(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream stream(s);
  std::string tok;
  while (stream >> tok) out.push_back(tok);
  return out;
}

double parse_double(const std::string& tok, const std::filesystem::path& path,
                    std::size_t line, bool allow_nonfinite = false) {
  double v = 0.0;
  const auto* begin = tok.data();
  const auto* end = tok.data() + tok.size();
  const auto res = std::from_chars(begin, end, v);
  if (res.ec != std::errc{} || res.ptr != end)
    fail_parse(path, line, "expected a number, got '" + tok + "'");
  if (!allow_nonfinite && !std::isfinite(v))
    fail_parse(path, line, "non-finite value '" + tok + "'");
  return v;
}

long parse_long(const std::string& tok, const std::filesystem::path& path, std::size_t line) {
  long v = 0;
  const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (res.ec != std::errc{} || res.ptr != tok.data() + tok.size())
    fail_parse(path, line, "expected an integer, got '" + tok + "'");
  return v;
}

ClassId parse_class_token(const std::string& tok, const std::filesystem::path& path,
                          std::size_t line) {
  if (auto cls = class_from_name(tok)) return *cls;
  if (!tok.empty() && (std::isdigit(static_cast<unsigned char>(tok[0])) || tok[0] == '-')) {
    const long id = parse_long(tok, path, line);
    if (auto cls = class_from_id(id)) return *cls;
    throw_error(ErrorCode::unknown_class, path.string() + ":" + std::to_string(line) +
                                              ": unknown class id " + std::to_string(id));
  }
  throw_error(ErrorCode::unknown_class,
              path.string() + ":" + std::to_string(line) + ": unknown class '" + tok + "'");
}

std::ifstream open_input(const std::filesystem::path& path, bool binary = false) {
  std::ifstream in(path, binary ? std::ios::binary : std::ios::in);
  if (!in) throw_error(ErrorCode::io_error, "cannot open " + path.string() + " for reading");
  return in;
}

std::ofstream open_output(const std::filesystem::path& path, bool binary = false) {
  std::ofstream out(path, binary ? std::ios::binary : std::ios::out);
  if (!out) throw_error(ErrorCode::io_error, "cannot open " + path.string() + " for writing");
  return out;
}

LabeledPointCloud read_cloud_text(const std::filesystem::path& path) {
  auto in = open_input(path);
  LabeledPointCloud cloud;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const auto tokens = split_ws(line);
    if (tokens.empty()) continue;
    if (tokens.size() != 4)
      fail_parse(path, line_no, "expected 'x y z class_id'");
    const double x = parse_double(tokens[0], path, line_no);
    const double y = parse_double(tokens[1], path, line_no);
    const double z = parse_double(tokens[2], path, line_no);
    const long id = parse_long(tokens[3], path, line_no);
    const auto cls = class_from_id(id);
    if (!cls)
      throw_error(ErrorCode::unknown_class, path.string() + ":" + std::to_string(line_no) +
                                                ": unknown class id " + std::to_string(id));
    cloud.add({x, y, z}, *cls);
  }
  return cloud;
}

LabeledPointCloud read_cloud_ply(const std::filesystem::path& path) {
  auto in = open_input(path);
  std::string line;
  std::size_t line_no = 0;

  auto next_line = [&]() -> std::string {
    if (!std::getline(in, line)) fail_parse(path, line_no, "unexpected end of PLY header");
    ++line_no;
    return trim(line);
  };

  if (next_line() != "ply") fail_parse(path, line_no, "missing 'ply' magic");
  if (next_line() != "format ascii 1.0")
    fail_parse(path, line_no, "only 'format ascii 1.0' is supported");

  std::size_t vertex_count = 0;
  bool in_vertex_element = false;
  bool seen_vertex = false;
  std::vector<std::string> properties;
  while (true) {
    const std::string header = next_line();
    if (header == "end_header") break;
    const auto tokens = split_ws(header);
    if (tokens.empty() || tokens[0] == "comment") continue;
    if (tokens[0] == "element") {
      if (tokens.size() != 3) fail_parse(path, line_no, "malformed element line");
      if (tokens[1] == "vertex") {
        vertex_count = static_cast<std::size_t>(parse_long(tokens[2], path, line_no));
        in_vertex_element = true;
        seen_vertex = true;
      } else {
        if (parse_long(tokens[2], path, line_no) != 0)
          fail_parse(path, line_no, "unsupported element '" + tokens[1] + "'");
        in_vertex_element = false;
      }
      continue;
    }
    if (tokens[0] == "property") {
      if (!in_vertex_element) continue;
      if (tokens.size() != 3 || tokens[1] == "list")
        fail_parse(path, line_no, "only scalar vertex properties are supported");
      properties.push_back(tokens[2]);
      continue;
    }
    fail_parse(path, line_no, "unexpected header line '" + header + "'");
  }
  if (!seen_vertex) fail_parse(path, line_no, "missing vertex element");

  auto column = [&](const char* name) -> std::size_t {
    const auto it = std::find(properties.begin(), properties.end(), name);
    if (it == properties.end())
      fail_parse(path, line_no, std::string("missing vertex property '") + name + "'");
    return static_cast<std::size_t>(it - properties.begin());
  };
  const std::size_t ix = column("x"), iy = column("y"), iz = column("z");
  const std::size_t il = column("label");

  LabeledPointCloud cloud;
  cloud.reserve(vertex_count);
  for (std::size_t v = 0; v < vertex_count; ++v) {
    if (!std::getline(in, line)) fail_parse(path, line_no, "unexpected end of vertex data");
    ++line_no;
    const auto tokens = split_ws(line);
    if (tokens.size() != properties.size())
      fail_parse(path, line_no, "wrong number of vertex fields");
    const double x = parse_double(tokens[ix], path, line_no);
    const double y = parse_double(tokens[iy], path, line_no);
    const double z = parse_double(tokens[iz], path, line_no);
    const long id = parse_long(tokens[il], path, line_no);
    const auto cls = class_from_id(id);
    if (!cls)
      throw_error(ErrorCode::unknown_class, path.string() + ":" + std::to_string(line_no) +
                                                ": unknown class id " + std::to_string(id));
    cloud.add({x, y, z}, *cls);
  }
  return cloud;
}

}  // namespace

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

LabeledPointCloud read_cloud(const std::filesystem::path& path) {
  auto in = open_input(path);
  char magic[3] = {};
  in.read(magic, 3);
  in.close();
  if (magic[0] == 'p' && magic[1] == 'l' && magic[2] == 'y') return read_cloud_ply(path);
  return read_cloud_text(path);
}

void write_cloud(const LabeledPointCloud& cloud, const std::filesystem::path& path) {
  cloud.validate();
  auto out = open_output(path);
  if (path.extension() == ".ply") {
    out << "ply\n"
        << "format ascii 1.0\n"
        << "element vertex " << cloud.size() << "\n"
        << "property double x\n"
        << "property double y\n"
        << "property double z\n"
        << "property uchar label\n"
        << "end_header\n";
    for (std::size_t i = 0; i < cloud.size(); ++i)
      out << format_double(cloud.points[i].x()) << ' ' << format_double(cloud.points[i].y())
          << ' ' << format_double(cloud.points[i].z()) << ' '
          << static_cast<int>(to_id(cloud.labels[i])) << '\n';
  } else {
    out << "# x y z class_id\n";
    for (std::size_t i = 0; i < cloud.size(); ++i)
      out << format_double(cloud.points[i].x()) << ' ' << format_double(cloud.points[i].y())
          << ' ' << format_double(cloud.points[i].z()) << ' '
          << static_cast<int>(to_id(cloud.labels[i])) << '\n';
  }
  if (!out) throw_error(ErrorCode::io_error, "failed writing " + path.string());
}

SemanticImage read_label_image(const std::filesystem::path& path) {
  auto in = open_input(path, true);
  std::size_t token_no = 0;

  // PGM header tokens, with # comments running to end of line.
  auto next_token = [&]() -> std::string {
    std::string tok;
    int c;
    while ((c = in.get()) != EOF) {
      if (c == '#') {
        while ((c = in.get()) != EOF && c != '\n') {
        }
        continue;
      }
      if (std::isspace(c)) {
        if (!tok.empty()) break;
        continue;
      }
      tok.push_back(static_cast<char>(c));
    }
    if (tok.empty()) fail_parse(path, token_no, "truncated PGM header");
    ++token_no;
    return tok;
  };

  const std::string magic = next_token();
  if (magic != "P2" && magic != "P5")
    throw_error(ErrorCode::parse_error, path.string() + ": not a P2/P5 PGM file");
  const long width = parse_long(next_token(), path, token_no);
  const long height = parse_long(next_token(), path, token_no);
  const long maxval = parse_long(next_token(), path, token_no);
  if (width <= 0 || height <= 0)
    throw_error(ErrorCode::parse_error, path.string() + ": bad PGM dimensions");
  if (maxval < 1 || maxval > 255)
    throw_error(ErrorCode::parse_error, path.string() + ": PGM maxval must be in [1, 255]");

  SemanticImage img(static_cast<int>(width), static_cast<int>(height));
  const std::size_t n = img.pixel_count();

  auto assign = [&](std::size_t i, long value) {
    if (value < 0 || value > maxval)
      throw_error(ErrorCode::parse_error,
                  path.string() + ": pixel value " + std::to_string(value) + " exceeds maxval");
    const auto cls = class_from_id(value);
    if (!cls)
      throw_error(ErrorCode::unknown_class, path.string() + ": pixel " + std::to_string(i) +
                                                " holds unknown class id " + std::to_string(value));
    img.classes[i] = *cls;
  };

  if (magic == "P5") {
    // Single whitespace byte after maxval, then raw data.
    std::vector<unsigned char> buf(n);
    in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in.gcount()) != n)
      throw_error(ErrorCode::parse_error, path.string() + ": truncated P5 pixel data");
    for (std::size_t i = 0; i < n; ++i) assign(i, buf[i]);
  } else {
    std::size_t i = 0;
    long value = 0;
    bool in_number = false;
    int c;
    auto flush = [&] {
      if (!in_number) return;
      if (i >= n)
        throw_error(ErrorCode::parse_error,
                    path.string() + ": more pixel values than width x height");
      assign(i++, value);
      value = 0;
      in_number = false;
    };
    while ((c = in.get()) != EOF) {
      if (c == '#') {
        flush();
        while ((c = in.get()) != EOF && c != '\n') {
        }
        continue;
      }
      if (std::isspace(c)) {
        flush();
        continue;
      }
      if (!std::isdigit(c))
        throw_error(ErrorCode::parse_error, path.string() + ": invalid character in P2 data");
      value = value * 10 + (c - '0');
      if (value > 255)
        throw_error(ErrorCode::parse_error, path.string() + ": pixel value out of range");
      in_number = true;
    }
    flush();
    if (i != n)
      throw_error(ErrorCode::parse_error,
                  path.string() + ": pixel count does not match width x height");
  }
  return img;
}

void write_label_image(const SemanticImage& img, const std::filesystem::path& path,
                       bool binary) {
  img.validate();
  auto out = open_output(path, binary);
  if (binary) {
    out << "P5\n" << img.width << " " << img.height << "\n255\n";
    std::vector<unsigned char> buf(img.pixel_count());
    for (std::size_t i = 0; i < buf.size(); ++i) buf[i] = to_id(img.classes[i]);
    out.write(reinterpret_cast<const char*>(buf.data()),
              static_cast<std::streamsize>(buf.size()));
  } else {
    out << "P2\n" << img.width << " " << img.height << "\n255\n";
    for (int y = 0; y < img.height; ++y) {
      for (int x = 0; x < img.width; ++x) {
        if (x) out << ' ';
        out << static_cast<int>(to_id(img.at(x, y)));
      }
      out << '\n';
    }
  }
  if (!out) throw_error(ErrorCode::io_error, "failed writing " + path.string());
}

RigidTransform rigid_from_euler(double tx, double ty, double tz, double yaw_deg,
                                double pitch_deg, double roll_deg) {
  RigidTransform t = RigidTransform::Identity();
  t.linear() = (Eigen::AngleAxisd(deg_to_rad(yaw_deg), Eigen::Vector3d::UnitZ()) *
                Eigen::AngleAxisd(deg_to_rad(pitch_deg), Eigen::Vector3d::UnitY()) *
                Eigen::AngleAxisd(deg_to_rad(roll_deg), Eigen::Vector3d::UnitX()))
                   .toRotationMatrix();
  t.translation() = Eigen::Vector3d(tx, ty, tz);
  return t;
}

std::vector<std::pair<double, RigidTransform>> read_pose_file(
    const std::filesystem::path& path) {
  auto in = open_input(path);
  std::vector<std::pair<double, RigidTransform>> poses;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const auto tokens = split_ws(line);
    if (tokens.empty()) continue;
    if (tokens.size() != 7)
      fail_parse(path, line_no, "expected 'timestamp tx ty tz yaw pitch roll'");
    std::array<double, 7> v{};
    for (std::size_t i = 0; i < 7; ++i) v[i] = parse_double(tokens[i], path, line_no);
    poses.emplace_back(v[0], rigid_from_euler(v[1], v[2], v[3], v[4], v[5], v[6]));
  }
  return poses;
}

namespace {

struct KvEntry {
  std::string key;
  std::string value;
  std::size_t line = 0;
};

/// key = value lines; '#' starts a comment; keys may repeat.
std::vector<KvEntry> read_kv_file(const std::filesystem::path& path) {
  auto in = open_input(path);
  std::vector<KvEntry> entries;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::string text = trim(line);
    if (text.empty()) continue;
    const auto eq = text.find('=');
    if (eq == std::string::npos) fail_parse(path, line_no, "expected 'key = value'");
    const std::string key = trim(text.substr(0, eq));
    const std::string value = trim(text.substr(eq + 1));
    if (key.empty() || value.empty()) fail_parse(path, line_no, "empty key or value");
    entries.push_back({key, value, line_no});
  }
  return entries;
}

bool parse_bool(const std::string& value, const std::filesystem::path& path, std::size_t line) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  fail_parse(path, line, "expected true/false, got '" + value + "'");
}

}  // namespace

CalibrateOptions RunConfig::calibrate_options() const {
  CalibrateOptions opts;
  opts.bounds = bounds;
  opts.term = term;
  opts.render_cfg = render;
  opts.max_evals_per_stage = max_evals;
  opts.sky_valid = sky_valid;
  return opts;
}

ProtocolOptions RunConfig::protocol_options() const {
  ProtocolOptions opts;
  opts.trials = trials;
  opts.keep = keep;
  opts.offset_pos = offset_pos;
  opts.offset_ang = offset_ang;
  opts.seed = seed;
  opts.threads = threads;
  opts.calibrate = calibrate_options();
  return opts;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  RunConfig cfg;
  for (const auto& [key, value, entry_no] : read_kv_file(path)) {
    auto num = [&] { return parse_double(value, path, entry_no); };
    auto integer = [&] { return parse_long(value, path, entry_no); };
    if (key == "fx") cfg.intrinsics.fx = num();
    else if (key == "fy") cfg.intrinsics.fy = num();
    else if (key == "cx") cfg.intrinsics.cx = num();
    else if (key == "cy") cfg.intrinsics.cy = num();
    else if (key == "width") cfg.intrinsics.width = static_cast<int>(integer());
    else if (key == "height") cfg.intrinsics.height = static_cast<int>(integer());
    else if (key == "guess_tx") cfg.guess.tx = num();
    else if (key == "guess_ty") cfg.guess.ty = num();
    else if (key == "guess_tz") cfg.guess.tz = num();
    else if (key == "guess_yaw") cfg.guess.yaw_deg = num();
    else if (key == "guess_pitch") cfg.guess.pitch_deg = num();
    else if (key == "pos_half_range") cfg.bounds.pos_half_range = num();
    else if (key == "ang_half_range") cfg.bounds.ang_half_range = num();
    else if (key == "lambda") cfg.render.lambda = num();
    else if (key == "min_radius") cfg.render.min_radius = num();
    else if (key == "max_radius") cfg.render.max_radius = num();
    else if (key == "background_class")
      cfg.render.background_class = parse_class_token(value, path, entry_no);
    else if (key == "loss") {
      if (value == "l2") cfg.term.kind = LossTerm::Kind::l2;
      else if (value == "huber") cfg.term.kind = LossTerm::Kind::huber;
      else fail_parse(path, entry_no, "loss must be 'l2' or 'huber'");
    } else if (key == "huber_delta") cfg.term.delta = num();
    else if (key == "sky_valid") cfg.sky_valid = parse_bool(value, path, entry_no);
    else if (key == "d_max") cfg.d_max = num();
    else if (key == "crop_radius") cfg.crop_radius = num();
    else if (key == "dynamic_classes") {
      cfg.dynamic_classes.clear();
      std::string token;
      std::istringstream stream(value);
      while (std::getline(stream, token, ',')) {
        token = trim(token);
        if (token.empty()) continue;
        cfg.dynamic_classes.insert(parse_class_token(token, path, entry_no));
      }
    } else if (key == "max_evals") cfg.max_evals = static_cast<int>(integer());
    else if (key == "verify_trials") cfg.verify_trials = static_cast<int>(integer());
    else if (key == "verify_pos_noise") cfg.verify_noise.pos_half_range = num();
    else if (key == "verify_ang_noise") cfg.verify_noise.ang_half_range = num();
    else if (key == "seed") cfg.seed = static_cast<std::uint64_t>(integer());
    else if (key == "trials") cfg.trials = static_cast<int>(integer());
    else if (key == "keep") cfg.keep = static_cast<int>(integer());
    else if (key == "offset_pos") cfg.offset_pos = num();
    else if (key == "offset_ang") cfg.offset_ang = num();
    else if (key == "label_flip_rate") cfg.label_flip_rate = num();
    else if (key == "threads") cfg.threads = static_cast<int>(integer());
    else fail_parse(path, entry_no, "unknown config key '" + key + "'");
  }
  cfg.intrinsics.validate();
  cfg.guess.validate();
  cfg.bounds.validate();
  cfg.render.validate();
  cfg.term.validate();
  return cfg;
}

SceneSpec load_scene_spec(const std::filesystem::path& path) {
  SceneSpec spec;
  for (const auto& [key, value, entry_no] : read_kv_file(path)) {
    const auto tokens = split_ws(value);
    auto num = [&] { return parse_double(value, path, entry_no); };
    if (key == "extent") spec.ground_half_extent = num();
    else if (key == "density") spec.density = num();
    else if (key == "noise_sigma") spec.noise_sigma = num();
    else if (key == "seed")
      spec.seed = static_cast<std::uint64_t>(parse_long(value, path, entry_no));
    else if (key == "ground_class")
      spec.ground_class = parse_class_token(value, path, entry_no);
    else if (key == "camera") {
      if (tokens.size() != 5) fail_parse(path, entry_no, "camera needs 'tx ty tz yaw pitch'");
      spec.camera.tx = parse_double(tokens[0], path, entry_no);
      spec.camera.ty = parse_double(tokens[1], path, entry_no);
      spec.camera.tz = parse_double(tokens[2], path, entry_no);
      spec.camera.yaw_deg = parse_double(tokens[3], path, entry_no);
      spec.camera.pitch_deg = parse_double(tokens[4], path, entry_no);
    } else if (key == "box") {
      if (tokens.size() != 5 && tokens.size() != 6)
        fail_parse(path, entry_no, "box needs 'cx cy half_x half_y height [class]'");
      BoxSpec box;
      box.cx = parse_double(tokens[0], path, entry_no);
      box.cy = parse_double(tokens[1], path, entry_no);
      box.half_x = parse_double(tokens[2], path, entry_no);
      box.half_y = parse_double(tokens[3], path, entry_no);
      box.height = parse_double(tokens[4], path, entry_no);
      if (tokens.size() == 6) box.cls = parse_class_token(tokens[5], path, entry_no);
      spec.boxes.push_back(box);
    } else if (key == "pole") {
      if (tokens.size() != 4 && tokens.size() != 5)
        fail_parse(path, entry_no, "pole needs 'x y height radius [class]'");
      PoleSpec pole;
      pole.x = parse_double(tokens[0], path, entry_no);
      pole.y = parse_double(tokens[1], path, entry_no);
      pole.height = parse_double(tokens[2], path, entry_no);
      pole.radius = parse_double(tokens[3], path, entry_no);
      if (tokens.size() == 5) pole.cls = parse_class_token(tokens[4], path, entry_no);
      spec.poles.push_back(pole);
    } else if (key == "strip") {
      if (tokens.size() < 7 || tokens.size() % 2 == 0)
        fail_parse(path, entry_no, "strip needs 'class x1 y1 x2 y2 x3 y3 ...'");
      StripSpec strip;
      strip.cls = parse_class_token(tokens[0], path, entry_no);
      for (std::size_t i = 1; i + 1 < tokens.size(); i += 2)
        strip.polygon.emplace_back(parse_double(tokens[i], path, entry_no),
                                   parse_double(tokens[i + 1], path, entry_no));
      spec.strips.push_back(strip);
    } else fail_parse(path, entry_no, "unknown scene key '" + key + "'");
  }
  spec.validate();
  return spec;
}

void write_calibration_report(const CalibrationResult& result, const LossTerm& term,
                              const std::vector<CalibrationResult>& verify_runs,
                              const std::filesystem::path& path,
                              const std::vector<TraceRecord>& trace) {
  auto out = open_output(path);
  out << "report = calibration\n";
  out << "loss = " << (term.kind == LossTerm::Kind::l2 ? "l2" : "huber") << "\n";
  out << "huber_delta = " << format_double(term.delta) << "\n";
  out << "final_loss = " << format_double(result.final_loss) << "\n";
  out << "eval_count = " << result.eval_count << "\n";
  out << "verified = " << (result.verified ? "true" : "false") << "\n";
  out << "pose_tx_m = " << format_double(result.pose.tx) << "\n";
  out << "pose_ty_m = " << format_double(result.pose.ty) << "\n";
  out << "pose_tz_m = " << format_double(result.pose.tz) << "\n";
  out << "pose_yaw_deg = " << format_double(result.pose.yaw_deg) << "\n";
  out << "pose_pitch_deg = " << format_double(result.pose.pitch_deg) << "\n";
  out << "stages = " << result.stage_history.size() << "\n";
  for (const auto& stage : result.stage_history)
    out << "stage|" << stage.stage << "|" << format_double(stage.loss) << "\n";
  out << "verify_runs = " << verify_runs.size() << "\n";
  if (!verify_runs.empty()) {
    out << "run|index|final_loss|tx|ty|tz|yaw|pitch\n";
    for (std::size_t i = 0; i < verify_runs.size(); ++i) {
      const auto& r = verify_runs[i];
      out << "run|" << i << "|" << format_double(r.final_loss) << "|"
          << format_double(r.pose.tx) << "|" << format_double(r.pose.ty) << "|"
          << format_double(r.pose.tz) << "|" << format_double(r.pose.yaw_deg) << "|"
          << format_double(r.pose.pitch_deg) << "\n";
    }
  }
  out << "trace_records = " << trace.size() << "\n";
  if (!trace.empty()) {
    out << "trace|stage|iteration|best_loss|tx|ty|tz|yaw|pitch\n";
    for (const auto& t : trace)
      out << "trace|" << t.stage << "|" << t.iteration << "|" << format_double(t.best_loss)
          << "|" << format_double(t.pose.tx) << "|" << format_double(t.pose.ty) << "|"
          << format_double(t.pose.tz) << "|" << format_double(t.pose.yaw_deg) << "|"
          << format_double(t.pose.pitch_deg) << "\n";
  }
  if (!out) throw_error(ErrorCode::io_error, "failed writing " + path.string());
}

void write_trial_report(const TrialReport& report, const std::filesystem::path& path) {
  auto out = open_output(path);
  out << "report = evaluation\n";
  out << "trials = " << report.trials.size() << "\n";
  out << "keep = " << report.keep << "\n";
  out << "accepted_mean_dt_cm = " << format_double(report.mean_dt_cm) << "\n";
  out << "accepted_mean_abs_yaw_deg = " << format_double(report.mean_dyaw_deg) << "\n";
  out << "accepted_mean_abs_pitch_deg = " << format_double(report.mean_dpitch_deg) << "\n";
  out << "accepted_mean_abs_angle_deg = " << format_double(report.mean_dangle_deg) << "\n";
  out << "accepted_mean_loss = " << format_double(report.accepted_mean_loss) << "\n";
  out << "full_mean_loss = " << format_double(report.full_mean_loss) << "\n";
  out << "trial|index|accepted|final_loss|dt_cm|dyaw_deg|dpitch_deg|init_dx_m|init_dy_m|"
         "init_dz_m|init_dyaw_deg|init_dpitch_deg|stage1_loss|stage2_loss|stage3_loss\n";
  for (const auto& rec : report.trials) {
    out << "trial|" << rec.index << "|" << (rec.accepted ? 1 : 0) << "|"
        << format_double(rec.result.final_loss) << "|" << format_double(rec.dt_cm) << "|"
        << format_double(rec.dyaw_deg) << "|" << format_double(rec.dpitch_deg);
    for (int c = 0; c < 5; ++c) out << "|" << format_double(rec.initial_offset[c]);
    for (const auto& stage : rec.result.stage_history)
      out << "|" << format_double(stage.loss);
    out << "\n";
  }
  if (!out) throw_error(ErrorCode::io_error, "failed writing " + path.string());
}

}  // namespace semcal
