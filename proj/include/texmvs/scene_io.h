#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "texmvs/image.h"
#include "texmvs/scene.h"

namespace texmvs {

// Scene directory layout:
//   cameras.txt          one line per view: id w h fx fy cx cy r11..r33 tx ty tz
//   scene.toml           depth_min, depth_max, scene_size
//   images/<id>.png      RGB, 8 or 16 bit
//   gt/depth_<id>.pfm    optional ground-truth depth
//   gt/points.ply        optional ground-truth point cloud
SceneBundle LoadScene(const std::filesystem::path& dir);
void SaveScene(const SceneBundle& scene, const std::filesystem::path& dir);

GroundTruth LoadGroundTruth(const std::filesystem::path& dir,
                            const SceneBundle& scene);
void SaveGroundTruth(const GroundTruth& gt, const SceneBundle& scene,
                     const std::filesystem::path& dir);

// Text camera file; doubles are written with round-trip precision.
std::vector<CameraView> ReadCameras(const std::filesystem::path& path);
void WriteCameras(const std::vector<CameraView>& views,
                  const std::filesystem::path& path);

// PNG. Reading converts to [0, 1]; writing quantizes to 16 bit by default.
RgbImage ReadPng(const std::filesystem::path& path);
void WritePng(const RgbImage& image, const std::filesystem::path& path,
              int bit_depth = 16);

// PFM, little-endian (scale -1). Rows are stored bottom-to-top.
Grid<float> ReadPfmGray(const std::filesystem::path& path);
Grid<Eigen::Vector3f> ReadPfmColor(const std::filesystem::path& path);
void WritePfm(const Grid<float>& image, const std::filesystem::path& path);
void WritePfm(const Grid<Eigen::Vector3f>& image,
              const std::filesystem::path& path);

// Depth goes to one single-channel PFM and normals to a separate PF file.
void WriteDepthMap(const DepthNormalMap& map,
                   const std::filesystem::path& depth_path,
                   const std::filesystem::path& normal_path);
DepthNormalMap ReadDepthMap(const std::filesystem::path& depth_path,
                            const std::filesystem::path& normal_path);

struct PointCloud {
  std::vector<Eigen::Vector3d> points;
  std::vector<Eigen::Vector3f> normals;
  std::vector<Eigen::Vector3f> colors;  // [0, 1]

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
};

// Binary little-endian PLY: float x y z nx ny nz, uchar red green blue.
void WritePly(const PointCloud& cloud, const std::filesystem::path& path);
PointCloud ReadPly(const std::filesystem::path& path);

}  // namespace texmvs
