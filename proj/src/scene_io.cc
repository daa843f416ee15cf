#include "texmvs/scene_io.h"

#include <png.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>
#include <set>
#include <sstream>

#include <Eigen/LU>

#include "texmvs/error.h"
#include "texmvs/toml.h"

namespace texmvs {
namespace fs = std::filesystem;

namespace {

static_assert(std::endian::native == std::endian::little,
              "PFM/PLY writers assume a little-endian host");

constexpr double kOrthonormalTolerance = 1e-6;

void RequireFile(const fs::path& path) {
  if (!fs::exists(path)) {
    throw Error(ErrorKind::kMissingFile, path.string() + " not found");
  }
}

struct FileCloser {
  void operator()(std::FILE* f) const { std::fclose(f); }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr OpenFile(const fs::path& path, const char* mode) {
  FilePtr f(std::fopen(path.c_str(), mode));
  if (!f) throw Error(ErrorKind::kIoError, "cannot open " + path.string());
  return f;
}

std::string FormatDouble(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// Reads the three whitespace-separated PFM header tokens.
struct PfmHeader {
  int channels = 0;
  int width = 0;
  int height = 0;
  bool little_endian = true;
};

PfmHeader ReadPfmHeader(std::istream& in, const fs::path& path) {
  PfmHeader h;
  std::string magic;
  double scale = 0.0;
  if (!(in >> magic >> h.width >> h.height >> scale)) {
    throw Error(ErrorKind::kMalformedHeader, "truncated PFM header in " + path.string());
  }
  if (magic == "Pf") {
    h.channels = 1;
  } else if (magic == "PF") {
    h.channels = 3;
  } else {
    throw Error(ErrorKind::kMalformedHeader, "bad PFM magic '" + magic + "' in " + path.string());
  }
  if (h.width <= 0 || h.height <= 0 || scale == 0.0) {
    throw Error(ErrorKind::kMalformedHeader, "bad PFM dimensions/scale in " + path.string());
  }
  h.little_endian = scale < 0.0;
  in.get();  // single whitespace before the raster
  return h;
}

std::vector<float> ReadPfmRaster(const fs::path& path, int expected_channels,
                                 int* width, int* height) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIoError, "cannot open " + path.string());
  const PfmHeader h = ReadPfmHeader(in, path);
  if (h.channels != expected_channels) {
    throw Error(ErrorKind::kMalformedHeader,
                path.string() + ": expected " + std::to_string(expected_channels) +
                    " channel(s), found " + std::to_string(h.channels));
  }
  const std::size_t row = static_cast<std::size_t>(h.width) * h.channels;
  std::vector<float> raster(row * h.height);
  // File rows run bottom-to-top.
  for (int y = h.height - 1; y >= 0; --y) {
    in.read(reinterpret_cast<char*>(raster.data() + row * y),
            static_cast<std::streamsize>(row * sizeof(float)));
  }
  if (!in) throw Error(ErrorKind::kIoError, "truncated PFM raster in " + path.string());
  if (!h.little_endian) {
    for (float& v : raster) {
      v = std::bit_cast<float>(__builtin_bswap32(std::bit_cast<std::uint32_t>(v)));
    }
  }
  *width = h.width;
  *height = h.height;
  return raster;
}

void WritePfmRaster(const float* raster, int width, int height, int channels,
                    const fs::path& path) {
  if (width <= 0 || height <= 0) {
    throw Error(ErrorKind::kIoError, "refusing to write empty PFM " + path.string());
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::kIoError, "cannot open " + path.string());
  out << (channels == 1 ? "Pf" : "PF") << "\n" << width << " " << height << "\n-1.0\n";
  const std::size_t row = static_cast<std::size_t>(width) * channels;
  for (int y = height - 1; y >= 0; --y) {
    out.write(reinterpret_cast<const char*>(raster + row * y),
              static_cast<std::streamsize>(row * sizeof(float)));
  }
  if (!out) throw Error(ErrorKind::kIoError, "write failed for " + path.string());
}

}  // namespace

Eigen::Matrix3d CameraView::K() const {
  Eigen::Matrix3d k;
  k << fx, 0.0, cx, 0.0, fy, cy, 0.0, 0.0, 1.0;
  return k;
}

Eigen::Matrix3d CameraView::KInverse() const {
  Eigen::Matrix3d k;
  k << 1.0 / fx, 0.0, -cx / fx, 0.0, 1.0 / fy, -cy / fy, 0.0, 0.0, 1.0;
  return k;
}

const CameraView& SceneBundle::ViewById(int view_id) const {
  for (const CameraView& v : views) {
    if (v.view_id == view_id) return v;
  }
  throw Error(ErrorKind::kMissingArtifact, "no view with id " + std::to_string(view_id));
}

std::size_t DepthNormalMap::CountValid() const {
  return static_cast<std::size_t>(
      std::count_if(depth.data().begin(), depth.data().end(),
                    [](float d) { return d > 0.0f; }));
}

GrayImage ToGray(const RgbImage& rgb) {
  GrayImage gray(rgb.width(), rgb.height());
  for (std::size_t i = 0; i < rgb.size(); ++i) gray[i] = Luma(rgb[i]);
  return gray;
}

std::vector<CameraView> ReadCameras(const fs::path& path) {
  RequireFile(path);
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kIoError, "cannot open " + path.string());
  std::vector<CameraView> views;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream ls(line);
    CameraView v;
    ls >> v.view_id >> v.width >> v.height >> v.fx >> v.fy >> v.cx >> v.cy;
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 3; ++c) ls >> v.rotation(r, c);
    }
    ls >> v.translation.x() >> v.translation.y() >> v.translation.z();
    const std::string where = path.string() + ":" + std::to_string(line_no);
    if (!ls) throw Error(ErrorKind::kMalformedCamera, where + ": expected 19 fields");
    std::string extra;
    if (ls >> extra) throw Error(ErrorKind::kMalformedCamera, where + ": trailing fields");
    if (v.width <= 0 || v.height <= 0 || !(v.fx > 0.0) || !(v.fy > 0.0)) {
      throw Error(ErrorKind::kMalformedCamera, where + ": non-positive size or focal");
    }
    const double ortho_err =
        (v.rotation.transpose() * v.rotation - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff();
    if (!(ortho_err <= kOrthonormalTolerance) || v.rotation.determinant() < 0.0) {
      throw Error(ErrorKind::kMalformedCamera, where + ": rotation is not orthonormal");
    }
    views.push_back(std::move(v));
  }
  return views;
}

void WriteCameras(const std::vector<CameraView>& views, const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::kIoError, "cannot open " + path.string());
  out << "# id w h fx fy cx cy r11 r12 r13 r21 r22 r23 r31 r32 r33 tx ty tz\n";
  for (const CameraView& v : views) {
    out << v.view_id << " " << v.width << " " << v.height << " " << FormatDouble(v.fx)
        << " " << FormatDouble(v.fy) << " " << FormatDouble(v.cx) << " "
        << FormatDouble(v.cy);
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 3; ++c) out << " " << FormatDouble(v.rotation(r, c));
    }
    for (int i = 0; i < 3; ++i) out << " " << FormatDouble(v.translation(i));
    out << "\n";
  }
  if (!out) throw Error(ErrorKind::kIoError, "write failed for " + path.string());
}

RgbImage ReadPng(const fs::path& path) {
  RequireFile(path);
  FilePtr f = OpenFile(path, "rb");
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw Error(ErrorKind::kIoError, "libpng init failed");
  }
  RgbImage image;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw Error(ErrorKind::kIoError, "cannot decode PNG " + path.string());
  }
  png_init_io(png, f.get());
  png_read_info(png, info);
  const int width = static_cast<int>(png_get_image_width(png, info));
  const int height = static_cast<int>(png_get_image_height(png, info));
  const int color_type = png_get_color_type(png, info);
  const int bit_depth = png_get_bit_depth(png, info);

  if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color_type == PNG_COLOR_TYPE_GRAY && bit_depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (color_type == PNG_COLOR_TYPE_GRAY || color_type == PNG_COLOR_TYPE_GRAY_ALPHA) {
    png_set_gray_to_rgb(png);
  }
  if (color_type & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
  if (bit_depth == 16) png_set_swap(png);  // host order
  png_read_update_info(png, info);

  const int out_depth = png_get_bit_depth(png, info);
  const std::size_t rowbytes = png_get_rowbytes(png, info);
  std::vector<png_byte> buffer(rowbytes * height);
  std::vector<png_bytep> rows(height);
  for (int y = 0; y < height; ++y) rows[y] = buffer.data() + rowbytes * y;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);

  image = RgbImage(width, height);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      Eigen::Vector3f& px = image(x, y);
      for (int c = 0; c < 3; ++c) {
        if (out_depth == 16) {
          std::uint16_t v;
          std::memcpy(&v, rows[y] + (x * 3 + c) * 2, 2);
          px[c] = static_cast<float>(v) / 65535.0f;
        } else {
          px[c] = static_cast<float>(rows[y][x * 3 + c]) / 255.0f;
        }
      }
    }
  }
  return image;
}

void WritePng(const RgbImage& image, const fs::path& path, int bit_depth) {
  if (bit_depth != 8 && bit_depth != 16) {
    throw Error(ErrorKind::kIoError, "PNG bit depth must be 8 or 16");
  }
  FilePtr f = OpenFile(path, "wb");
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_write_struct(&png, &info);
    throw Error(ErrorKind::kIoError, "libpng init failed");
  }
  const int width = image.width();
  const int height = image.height();
  const int bytes = bit_depth / 8;
  std::vector<png_byte> buffer(static_cast<std::size_t>(width) * height * 3 * bytes);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      for (int c = 0; c < 3; ++c) {
        const float v = std::clamp(image(x, y)[c], 0.0f, 1.0f);
        const std::size_t at = (static_cast<std::size_t>(y) * width + x) * 3 + c;
        if (bit_depth == 16) {
          const auto q = static_cast<std::uint16_t>(std::lround(v * 65535.0f));
          buffer[at * 2] = static_cast<png_byte>(q >> 8);  // PNG is big-endian
          buffer[at * 2 + 1] = static_cast<png_byte>(q & 0xff);
        } else {
          buffer[at] = static_cast<png_byte>(std::lround(v * 255.0f));
        }
      }
    }
  }
  std::vector<png_bytep> rows(height);
  for (int y = 0; y < height; ++y) {
    rows[y] = buffer.data() + static_cast<std::size_t>(y) * width * 3 * bytes;
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw Error(ErrorKind::kIoError, "cannot encode PNG " + path.string());
  }
  png_init_io(png, f.get());
  png_set_IHDR(png, info, width, height, bit_depth, PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

Grid<float> ReadPfmGray(const fs::path& path) {
  RequireFile(path);
  int w = 0, h = 0;
  std::vector<float> raster = ReadPfmRaster(path, 1, &w, &h);
  Grid<float> out(w, h);
  out.data() = std::move(raster);
  return out;
}

Grid<Eigen::Vector3f> ReadPfmColor(const fs::path& path) {
  RequireFile(path);
  int w = 0, h = 0;
  const std::vector<float> raster = ReadPfmRaster(path, 3, &w, &h);
  Grid<Eigen::Vector3f> out(w, h);
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = Eigen::Vector3f(raster[3 * i], raster[3 * i + 1], raster[3 * i + 2]);
  }
  return out;
}

void WritePfm(const Grid<float>& image, const fs::path& path) {
  WritePfmRaster(image.data().data(), image.width(), image.height(), 1, path);
}

void WritePfm(const Grid<Eigen::Vector3f>& image, const fs::path& path) {
  std::vector<float> raster(image.size() * 3);
  for (std::size_t i = 0; i < image.size(); ++i) {
    raster[3 * i] = image[i].x();
    raster[3 * i + 1] = image[i].y();
    raster[3 * i + 2] = image[i].z();
  }
  WritePfmRaster(raster.data(), image.width(), image.height(), 3, path);
}

void WriteDepthMap(const DepthNormalMap& map, const fs::path& depth_path,
                   const fs::path& normal_path) {
  WritePfm(map.depth, depth_path);
  WritePfm(map.normal, normal_path);
}

DepthNormalMap ReadDepthMap(const fs::path& depth_path, const fs::path& normal_path) {
  DepthNormalMap map;
  map.depth = ReadPfmGray(depth_path);
  map.normal = ReadPfmColor(normal_path);
  if (map.depth.width() != map.normal.width() || map.depth.height() != map.normal.height()) {
    throw Error(ErrorKind::kDimensionMismatch,
                "depth and normal maps differ in size: " + depth_path.string());
  }
  return map;
}

SceneBundle LoadScene(const fs::path& dir) {
  const fs::path cameras = dir / "cameras.txt";
  const fs::path meta = dir / "scene.toml";
  RequireFile(cameras);
  RequireFile(meta);

  SceneBundle scene;
  const toml::Document doc = toml::ParseFile(meta.string());
  const auto dmin = doc.root.GetNumber("depth_min");
  const auto dmax = doc.root.GetNumber("depth_max");
  const auto size = doc.root.GetNumber("scene_size");
  if (!dmin || !dmax || !size) {
    throw Error(ErrorKind::kConfigError,
                meta.string() + " needs depth_min, depth_max and scene_size");
  }
  if (!(*dmin > 0.0 && *dmin < *dmax && *size > 0.0)) {
    throw Error(ErrorKind::kConfigError,
                meta.string() + ": require 0 < depth_min < depth_max and scene_size > 0");
  }
  scene.depth_range = {*dmin, *dmax};
  scene.scene_size = *size;

  scene.views = ReadCameras(cameras);
  std::set<int> ids;
  for (CameraView& v : scene.views) {
    if (!ids.insert(v.view_id).second) {
      throw Error(ErrorKind::kMalformedCamera, "duplicate view id " + std::to_string(v.view_id));
    }
    v.rgb = ReadPng(dir / "images" / (std::to_string(v.view_id) + ".png"));
    if (v.rgb.width() != v.width || v.rgb.height() != v.height) {
      throw Error(ErrorKind::kDimensionMismatch,
                  "image " + std::to_string(v.view_id) + " is " +
                      std::to_string(v.rgb.width()) + "x" + std::to_string(v.rgb.height()) +
                      ", camera says " + std::to_string(v.width) + "x" +
                      std::to_string(v.height));
    }
    v.gray = ToGray(v.rgb);
  }
  return scene;
}

void SaveScene(const SceneBundle& scene, const fs::path& dir) {
  fs::create_directories(dir / "images");
  WriteCameras(scene.views, dir / "cameras.txt");
  toml::Document doc;
  doc.root.Set("depth_min", toml::Value{scene.depth_range.min});
  doc.root.Set("depth_max", toml::Value{scene.depth_range.max});
  doc.root.Set("scene_size", toml::Value{scene.scene_size});
  std::ofstream meta(dir / "scene.toml");
  if (!meta) throw Error(ErrorKind::kIoError, "cannot write scene.toml in " + dir.string());
  meta << toml::Write(doc);
  for (const CameraView& v : scene.views) {
    WritePng(v.rgb, dir / "images" / (std::to_string(v.view_id) + ".png"));
  }
}

GroundTruth LoadGroundTruth(const fs::path& dir, const SceneBundle& scene) {
  GroundTruth gt;
  for (const CameraView& v : scene.views) {
    const fs::path p = dir / ("depth_" + std::to_string(v.view_id) + ".pfm");
    if (!fs::exists(p)) {
      gt.depth.emplace_back();
      continue;
    }
    Grid<float> d = ReadPfmGray(p);
    if (d.width() != v.width || d.height() != v.height) {
      throw Error(ErrorKind::kDimensionMismatch, p.string() + " does not match its view");
    }
    gt.depth.emplace_back(std::move(d));
  }
  if (fs::exists(dir / "points.ply")) gt.points = ReadPly(dir / "points.ply").points;
  return gt;
}

void SaveGroundTruth(const GroundTruth& gt, const SceneBundle& scene, const fs::path& dir) {
  fs::create_directories(dir);
  for (std::size_t i = 0; i < gt.depth.size() && i < scene.views.size(); ++i) {
    if (gt.depth[i]) {
      WritePfm(*gt.depth[i],
               dir / ("depth_" + std::to_string(scene.views[i].view_id) + ".pfm"));
    }
  }
  if (!gt.points.empty()) {
    PointCloud cloud;
    cloud.points = gt.points;
    WritePly(cloud, dir / "points.ply");
  }
}

void WritePly(const PointCloud& cloud, const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::kIoError, "cannot open " + path.string());
  const bool has_normals = cloud.normals.size() == cloud.points.size();
  const bool has_colors = cloud.colors.size() == cloud.points.size();
  out << "ply\nformat binary_little_endian 1.0\n"
      << "element vertex " << cloud.points.size() << "\n"
      << "property float x\nproperty float y\nproperty float z\n"
      << "property float nx\nproperty float ny\nproperty float nz\n"
      << "property uchar red\nproperty uchar green\nproperty uchar blue\n"
      << "end_header\n";
  for (std::size_t i = 0; i < cloud.points.size(); ++i) {
    float xyz[6];
    for (int c = 0; c < 3; ++c) {
      xyz[c] = static_cast<float>(cloud.points[i][c]);
      xyz[3 + c] = has_normals ? cloud.normals[i][c] : 0.0f;
    }
    std::uint8_t rgb[3] = {0, 0, 0};
    if (has_colors) {
      for (int c = 0; c < 3; ++c) {
        rgb[c] = static_cast<std::uint8_t>(
            std::lround(std::clamp(cloud.colors[i][c], 0.0f, 1.0f) * 255.0f));
      }
    }
    out.write(reinterpret_cast<const char*>(xyz), sizeof(xyz));
    out.write(reinterpret_cast<const char*>(rgb), sizeof(rgb));
  }
  if (!out) throw Error(ErrorKind::kIoError, "write failed for " + path.string());
}

PointCloud ReadPly(const fs::path& path) {
  RequireFile(path);
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIoError, "cannot open " + path.string());

  // Property layout is read from the header so clouds with only x y z work.
  struct Property {
    std::string name;
    int bytes;
    bool is_float;
  };
  std::vector<Property> props;
  std::size_t count = 0;
  std::string line;
  if (!std::getline(in, line) || line != "ply") {
    throw Error(ErrorKind::kMalformedHeader, path.string() + " is not a PLY file");
  }
  bool in_vertex = false;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string word;
    ls >> word;
    if (word == "format") {
      std::string fmt;
      ls >> fmt;
      if (fmt != "binary_little_endian") {
        throw Error(ErrorKind::kMalformedHeader, "only binary_little_endian PLY is supported");
      }
    } else if (word == "element") {
      std::string name;
      ls >> name;
      in_vertex = name == "vertex";
      if (in_vertex) ls >> count;
    } else if (word == "property" && in_vertex) {
      std::string type, name;
      ls >> type >> name;
      if (type == "float" || type == "float32") {
        props.push_back({name, 4, true});
      } else if (type == "uchar" || type == "uint8") {
        props.push_back({name, 1, false});
      } else if (type == "double" || type == "float64") {
        props.push_back({name, 8, true});
      } else {
        throw Error(ErrorKind::kMalformedHeader, "unsupported PLY property type " + type);
      }
    } else if (word == "end_header") {
      break;
    }
  }
  auto index_of = [&](const std::string& name) {
    for (std::size_t i = 0; i < props.size(); ++i) {
      if (props[i].name == name) return static_cast<int>(i);
    }
    return -1;
  };
  const int ix = index_of("x"), iy = index_of("y"), iz = index_of("z");
  if (ix < 0 || iy < 0 || iz < 0) {
    throw Error(ErrorKind::kMalformedHeader, path.string() + " lacks x/y/z");
  }
  const int inx = index_of("nx"), iny = index_of("ny"), inz = index_of("nz");
  const int ir = index_of("red"), ig = index_of("green"), ib = index_of("blue");
  PointCloud cloud;
  std::vector<double> values(props.size());
  for (std::size_t n = 0; n < count; ++n) {
    for (std::size_t p = 0; p < props.size(); ++p) {
      if (props[p].bytes == 4) {
        float f;
        in.read(reinterpret_cast<char*>(&f), 4);
        values[p] = f;
      } else if (props[p].bytes == 8) {
        double d;
        in.read(reinterpret_cast<char*>(&d), 8);
        values[p] = d;
      } else {
        std::uint8_t b;
        in.read(reinterpret_cast<char*>(&b), 1);
        values[p] = b;
      }
    }
    if (!in) throw Error(ErrorKind::kIoError, "truncated PLY body in " + path.string());
    cloud.points.emplace_back(values[ix], values[iy], values[iz]);
    if (inx >= 0 && iny >= 0 && inz >= 0) {
      cloud.normals.emplace_back(values[inx], values[iny], values[inz]);
    }
    if (ir >= 0 && ig >= 0 && ib >= 0) {
      cloud.colors.emplace_back(values[ir] / 255.0, values[ig] / 255.0, values[ib] / 255.0);
    }
  }
  return cloud;
}

}  // namespace texmvs
