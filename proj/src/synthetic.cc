#include "texmvs/synthetic.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "texmvs/error.h"
#include "texmvs/geometry.h"
#include "texmvs/rng.h"

namespace texmvs {
namespace {

constexpr double kDegToRad = M_PI / 180.0;

std::uint64_t HashCell(std::uint64_t seed, std::int64_t i, std::int64_t j) {
  StreamRng rng({seed, static_cast<std::uint64_t>(i), static_cast<std::uint64_t>(j)});
  return rng();
}

double CellValue(std::uint64_t seed, std::int64_t i, std::int64_t j) {
  return static_cast<double>(HashCell(seed, i, j) >> 11) * 0x1.0p-53;
}

double ValueNoise(std::uint64_t seed, double u, double v) {
  const double fu = std::floor(u), fv = std::floor(v);
  const auto i = static_cast<std::int64_t>(fu);
  const auto j = static_cast<std::int64_t>(fv);
  auto smooth = [](double t) { return t * t * t * (t * (t * 6.0 - 15.0) + 10.0); };
  const double su = smooth(u - fu), sv = smooth(v - fv);
  const double a = CellValue(seed, i, j), b = CellValue(seed, i + 1, j);
  const double c = CellValue(seed, i, j + 1), d = CellValue(seed, i + 1, j + 1);
  return (a * (1 - su) + b * su) * (1 - sv) + (c * (1 - su) + d * su) * sv;
}

Eigen::Vector3d Shade(const TextureSpec& tex, double u, double v) {
  switch (tex.mode) {
    case TextureMode::kConstant:
      return tex.color_a;
    case TextureMode::kChecker: {
      const auto i = static_cast<std::int64_t>(std::floor(u / tex.cell));
      const auto j = static_cast<std::int64_t>(std::floor(v / tex.cell));
      const Eigen::Vector3d& base = ((i + j) & 1) ? tex.color_b : tex.color_a;
      const double gain = 1.0 + tex.jitter * (2.0 * CellValue(tex.seed, i, j) - 1.0);
      return (base * gain).cwiseMax(0.0).cwiseMin(1.0);
    }
    case TextureMode::kNoise: {
      double value = 0.0, amplitude = 0.5, norm = 0.0, scale = 1.0 / tex.cell;
      for (int o = 0; o < tex.octaves; ++o) {
        value += amplitude * ValueNoise(tex.seed + o, u * scale, v * scale);
        norm += amplitude;
        amplitude *= 0.5;
        scale *= 2.0;
      }
      const double s = value / norm;
      return tex.color_a * (1.0 - s) + tex.color_b * s;
    }
  }
  return tex.color_a;
}

struct PreparedPlane {
  Plane3 plane;
  Eigen::Vector3d origin, u, v;
  const SyntheticPlane* spec;
};

std::vector<PreparedPlane> PreparePlanes(const SyntheticSpec& spec) {
  std::vector<PreparedPlane> out;
  for (const SyntheticPlane& p : spec.planes) {
    const Eigen::Vector3d n = p.normal.normalized();
    Eigen::Vector3d u = p.u_axis - p.u_axis.dot(n) * n;
    if (u.norm() < 1e-9) throw Error(ErrorKind::kDegenerateGeometry, "plane u_axis parallel to normal");
    u.normalize();
    out.push_back({PlaneFromPointNormal(p.point, n), p.point, u, n.cross(u), &p});
  }
  return out;
}

bool InsideRect(const std::optional<RectSpec>& rect, double u, double v) {
  return !rect || (std::abs(u) <= rect->half_u && std::abs(v) <= rect->half_v);
}

struct Hit {
  double t = std::numeric_limits<double>::infinity();
  const PreparedPlane* plane = nullptr;
  Eigen::Vector3d point;
};

// Ray origin + t * dir with t > 0, nearest of all planes.
Hit Trace(const std::vector<PreparedPlane>& planes, const Eigen::Vector3d& origin,
          const Eigen::Vector3d& dir) {
  Hit best;
  for (const PreparedPlane& p : planes) {
    const double denom = p.plane.normal.dot(dir);
    if (std::abs(denom) < 1e-12) continue;
    const double t = -p.plane.SignedDistance(origin) / denom;
    if (!(t > 1e-9) || t >= best.t) continue;
    const Eigen::Vector3d x = origin + t * dir;
    const Eigen::Vector3d rel = x - p.origin;
    if (!InsideRect(p.spec->extent, rel.dot(p.u), rel.dot(p.v))) continue;
    best = {t, &p, x};
  }
  return best;
}

Eigen::Vector3d ShadeHit(const Hit& hit) {
  const Eigen::Vector3d rel = hit.point - hit.plane->origin;
  const double u = rel.dot(hit.plane->u), v = rel.dot(hit.plane->v);
  const SyntheticPlane& s = *hit.plane->spec;
  if (s.inner && InsideRect(s.inner, u, v)) return Shade(s.inner_texture, u, v);
  return Shade(s.texture, u, v);
}

Eigen::Matrix3d LookAtRotation(const Eigen::Vector3d& eye, const Eigen::Vector3d& target) {
  const Eigen::Vector3d z = (target - eye).normalized();
  Eigen::Vector3d down = Eigen::Vector3d::UnitY();
  if (std::abs(down.dot(z)) > 0.999) down = Eigen::Vector3d::UnitZ();
  const Eigen::Vector3d x = down.cross(z).normalized();
  const Eigen::Vector3d y = z.cross(x);
  Eigen::Matrix3d r;
  r.row(0) = x.transpose();
  r.row(1) = y.transpose();
  r.row(2) = z.transpose();
  return r;
}

Eigen::Vector3d ReadVec3(const toml::Table& t, std::string_view key, const Eigen::Vector3d& fallback) {
  const auto v = t.GetNumbers(key);
  if (!v) return fallback;
  if (v->size() != 3) throw Error(ErrorKind::kConfigError, std::string(key) + " needs 3 numbers");
  return {(*v)[0], (*v)[1], (*v)[2]};
}

std::optional<RectSpec> ReadRect(const toml::Table& t, std::string_view key) {
  const auto v = t.GetNumbers(key);
  if (!v) return std::nullopt;
  if (v->size() != 2) throw Error(ErrorKind::kConfigError, std::string(key) + " needs 2 numbers");
  return RectSpec{(*v)[0], (*v)[1]};
}

TextureMode ParseTextureMode(const std::string& name) {
  if (name == "checker") return TextureMode::kChecker;
  if (name == "noise") return TextureMode::kNoise;
  if (name == "constant") return TextureMode::kConstant;
  throw Error(ErrorKind::kConfigError, "unknown texture '" + name + "'");
}

TextureSpec ReadTexture(const toml::Table& t, const std::string& prefix, TextureSpec tex) {
  if (auto m = t.GetString(prefix + "texture")) tex.mode = ParseTextureMode(*m);
  tex.color_a = ReadVec3(t, prefix + "color_a", tex.color_a);
  tex.color_a = ReadVec3(t, prefix + "color", tex.color_a);
  tex.color_b = ReadVec3(t, prefix + "color_b", tex.color_b);
  if (auto c = t.GetNumber(prefix + "cell")) tex.cell = *c;
  if (auto j = t.GetNumber(prefix + "jitter")) tex.jitter = *j;
  if (auto o = t.GetInt(prefix + "octaves")) tex.octaves = static_cast<int>(*o);
  if (auto s = t.GetInt(prefix + "seed")) tex.seed = static_cast<std::uint64_t>(*s);
  return tex;
}

}  // namespace

void SyntheticSpec::Validate() const {
  if (width < 8 || height < 8) throw Error(ErrorKind::kConfigError, "image size must be at least 8x8");
  if (!(fov_deg > 0.0 && fov_deg < 180.0)) throw Error(ErrorKind::kConfigError, "fov_deg must lie in (0, 180)");
  if (cameras.count < 1) throw Error(ErrorKind::kConfigError, "at least one camera is required");
  if (!(cameras.radius >= 0.0)) throw Error(ErrorKind::kConfigError, "camera radius must be >= 0");
  if (planes.empty()) throw Error(ErrorKind::kConfigError, "at least one plane is required");
  if (!(noise_sigma >= 0.0)) throw Error(ErrorKind::kConfigError, "noise_sigma must be >= 0");
  if (supersample < 1 || gt_stride < 1)
    throw Error(ErrorKind::kConfigError, "supersample and gt_stride must be >= 1");
  for (const auto& p : planes) {
    for (const TextureSpec* t : {&p.texture, &p.inner_texture}) {
      if (!(t->cell > 0.0)) throw Error(ErrorKind::kConfigError, "texture cell must be positive");
      if (t->octaves < 1) throw Error(ErrorKind::kConfigError, "texture octaves must be >= 1");
    }
  }
}

SyntheticSpec ParseSyntheticSpec(const toml::Document& doc) {
  SyntheticSpec spec;
  const toml::Table& root = doc.root;
  if (auto v = root.GetInt("width")) spec.width = static_cast<int>(*v);
  if (auto v = root.GetInt("height")) spec.height = static_cast<int>(*v);
  if (auto v = root.GetNumber("fov_deg")) spec.fov_deg = *v;
  if (auto v = root.GetNumber("noise_sigma")) spec.noise_sigma = *v;
  if (auto v = root.GetInt("seed")) spec.seed = static_cast<std::uint64_t>(*v);
  if (auto v = root.GetInt("supersample")) spec.supersample = static_cast<int>(*v);
  if (auto v = root.GetInt("gt_stride")) spec.gt_stride = static_cast<int>(*v);
  spec.depth_min = root.GetNumber("depth_min");
  spec.depth_max = root.GetNumber("depth_max");
  spec.scene_size = root.GetNumber("scene_size");

  if (const toml::Table* cams = doc.FindTable("cameras")) {
    if (auto v = cams->GetInt("count")) spec.cameras.count = static_cast<int>(*v);
    if (auto v = cams->GetNumber("radius")) spec.cameras.radius = *v;
    if (auto v = cams->GetBool("include_center")) spec.cameras.include_center = *v;
    if (auto v = cams->GetNumber("phase_deg")) spec.cameras.phase_deg = *v;
    spec.cameras.center = ReadVec3(*cams, "center", spec.cameras.center);
    spec.cameras.look_at = ReadVec3(*cams, "look_at", spec.cameras.look_at);
  }
  if (const auto* planes = doc.FindTableArray("plane")) {
    for (const toml::Table& t : *planes) {
      SyntheticPlane p;
      p.point = ReadVec3(t, "point", p.point);
      p.normal = ReadVec3(t, "normal", p.normal);
      p.u_axis = ReadVec3(t, "u_axis", p.u_axis);
      p.extent = ReadRect(t, "half_extent");
      p.texture = ReadTexture(t, "", p.texture);
      p.inner = ReadRect(t, "inner_half_extent");
      TextureSpec inner_default;
      inner_default.mode = TextureMode::kConstant;
      inner_default.color_a = Eigen::Vector3d(0.5, 0.5, 0.5);
      p.inner_texture = ReadTexture(t, "inner_", inner_default);
      if (p.normal.norm() < 1e-12) throw Error(ErrorKind::kConfigError, "plane normal must be non-zero");
      spec.planes.push_back(p);
    }
  }
  return spec;
}

SyntheticSpec LoadSyntheticSpec(const std::filesystem::path& path) {
  return ParseSyntheticSpec(toml::ParseFile(path.string()));
}

std::vector<CameraView> SyntheticCameras(const SyntheticSpec& spec) {
  const CameraRingSpec& ring = spec.cameras;
  const Eigen::Vector3d axis = (ring.look_at - ring.center).normalized();
  Eigen::Vector3d a = axis.cross(Eigen::Vector3d::UnitY());
  if (a.norm() < 1e-6) a = axis.cross(Eigen::Vector3d::UnitX());
  a.normalize();
  const Eigen::Vector3d b = axis.cross(a);

  std::vector<Eigen::Vector3d> eyes;
  if (ring.include_center) eyes.push_back(ring.center);
  const int on_ring = ring.count - static_cast<int>(eyes.size());
  for (int k = 0; k < on_ring; ++k) {
    const double phi = ring.phase_deg * kDegToRad + 2.0 * M_PI * k / on_ring;
    eyes.push_back(ring.center + ring.radius * (std::cos(phi) * a + std::sin(phi) * b));
  }

  const double focal = 0.5 * spec.width / std::tan(0.5 * spec.fov_deg * kDegToRad);
  std::vector<CameraView> views;
  for (std::size_t i = 0; i < eyes.size(); ++i) {
    CameraView v;
    v.view_id = static_cast<int>(i);
    v.width = spec.width;
    v.height = spec.height;
    v.fx = v.fy = focal;
    v.cx = 0.5 * (spec.width - 1);
    v.cy = 0.5 * (spec.height - 1);
    v.rotation = LookAtRotation(eyes[i], ring.look_at);
    v.translation = -v.rotation * eyes[i];
    views.push_back(std::move(v));
  }
  return views;
}

SyntheticScene GenerateSyntheticScene(const SyntheticSpec& spec) {
  spec.Validate();
  const auto planes = PreparePlanes(spec);
  SyntheticScene out;
  out.scene.views = SyntheticCameras(spec);
  const int w = spec.width, h = spec.height, ss = spec.supersample;

  std::mt19937_64 noise_rng(spec.seed);
  std::normal_distribution<double> noise(0.0, spec.noise_sigma);

  Eigen::Vector3d lo = Eigen::Vector3d::Constant(std::numeric_limits<double>::infinity());
  Eigen::Vector3d hi = -lo;
  double dmin = std::numeric_limits<double>::infinity(), dmax = 0.0;

  for (CameraView& view : out.scene.views) {
    const Eigen::Vector3d eye = view.Center();
    const Eigen::Matrix3d to_world = view.rotation.transpose();
    view.rgb = RgbImage(w, h);
    Grid<float> depth(w, h, 0.0f);
    std::size_t hits = 0;
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        const Eigen::Vector3d ray_c = PixelRay(view, Eigen::Vector2d(x, y));
        const Hit centre = Trace(planes, eye, to_world * ray_c);
        if (centre.plane) {
          // Rays have unit z in the camera frame, so t is the z-depth.
          depth(x, y) = static_cast<float>(centre.t);
          ++hits;
        }
        Eigen::Vector3d color = Eigen::Vector3d::Zero();
        for (int sy = 0; sy < ss; ++sy) {
          for (int sx = 0; sx < ss; ++sx) {
            const Eigen::Vector2d sub(x - 0.5 + (sx + 0.5) / ss, y - 0.5 + (sy + 0.5) / ss);
            const Hit hit = Trace(planes, eye, to_world * PixelRay(view, sub));
            if (hit.plane) color += ShadeHit(hit);
          }
        }
        color /= ss * ss;
        if (spec.noise_sigma > 0.0) color.array() += noise(noise_rng);
        view.rgb(x, y) = color.cwiseMax(0.0).cwiseMin(1.0).cast<float>();
      }
    }
    if (hits == 0) {
      throw Error(ErrorKind::kDegenerateGeometry,
                  "view " + std::to_string(view.view_id) + " sees no plane");
    }
    view.gray = ToGray(view.rgb);
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        if (depth(x, y) <= 0.0f) continue;
        dmin = std::min<double>(dmin, depth(x, y));
        dmax = std::max<double>(dmax, depth(x, y));
        const Eigen::Vector3d p = Unproject(view, Eigen::Vector2d(x, y), depth(x, y));
        lo = lo.cwiseMin(p);
        hi = hi.cwiseMax(p);
        if (x % spec.gt_stride == 0 && y % spec.gt_stride == 0) out.truth.points.push_back(p);
      }
    }
    out.truth.depth.emplace_back(std::move(depth));
  }
  out.scene.depth_range = {spec.depth_min.value_or(0.9 * dmin), spec.depth_max.value_or(1.1 * dmax)};
  out.scene.scene_size = spec.scene_size.value_or((hi - lo).norm());
  if (!(out.scene.scene_size > 0.0)) out.scene.scene_size = 1.0;
  if (!(out.scene.depth_range.min > 0.0 && out.scene.depth_range.max > out.scene.depth_range.min))
    throw Error(ErrorKind::kDegenerateGeometry, "derived depth range is empty");
  return out;
}

}  // namespace texmvs
