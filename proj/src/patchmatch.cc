#include "texmvs/patchmatch.h"

#include <cmath>
#include <limits>

#include "texmvs/error.h"

namespace texmvs {
namespace {

constexpr double kDegToRad = M_PI / 180.0;

enum : std::uint64_t { kInitStream = 0x11, kUpdateStream = 0x12 };

Grid<LocalPlane> ToPlanes(const DepthNormalMap& map) {
  Grid<LocalPlane> planes(map.width(), map.height());
  for (std::size_t i = 0; i < planes.size(); ++i)
    planes[i] = {map.normal[i].cast<double>(), static_cast<double>(map.depth[i])};
  return planes;
}

DepthNormalMap ToMap(const Grid<LocalPlane>& planes) {
  DepthNormalMap map(planes.width(), planes.height());
  for (std::size_t i = 0; i < planes.size(); ++i) {
    map.depth[i] = static_cast<float>(planes[i].depth);
    map.normal[i] = planes[i].normal.cast<float>();
  }
  return map;
}

}  // namespace

const char* HypothesisKindName(HypothesisKind kind) {
  switch (kind) {
    case HypothesisKind::kCurrent: return "current";
    case HypothesisKind::kPropagated: return "propagated";
    case HypothesisKind::kRandomDepth: return "random_depth";
    case HypothesisKind::kRandomNormal: return "random_normal";
    case HypothesisKind::kRandomBoth: return "random_both";
    case HypothesisKind::kPerturbedDepth: return "perturbed_depth";
    case HypothesisKind::kPerturbedNormal: return "perturbed_normal";
    case HypothesisKind::kPlanarFine: return "planar_fine";
    case HypothesisKind::kPlanarCoarse: return "planar_coarse";
  }
  return "unknown";
}

SweepDirection SweepForIteration(int iteration) {
  static constexpr SweepDirection kOrder[] = {
      SweepDirection::kLeftToRight, SweepDirection::kTopToBottom, SweepDirection::kRightToLeft,
      SweepDirection::kBottomToTop};
  return kOrder[iteration % 4];
}

std::vector<std::vector<Eigen::Vector2i>> SweepLines(int width, int height,
                                                     SweepDirection direction) {
  std::vector<std::vector<Eigen::Vector2i>> lines;
  const bool rows =
      direction == SweepDirection::kLeftToRight || direction == SweepDirection::kRightToLeft;
  const bool reverse =
      direction == SweepDirection::kRightToLeft || direction == SweepDirection::kBottomToTop;
  const int count = rows ? height : width;
  const int length = rows ? width : height;
  lines.resize(count);
  for (int i = 0; i < count; ++i) {
    auto& line = lines[i];
    line.reserve(length);
    for (int j = 0; j < length; ++j) {
      const int s = reverse ? length - 1 - j : j;
      line.emplace_back(rows ? Eigen::Vector2i(s, i) : Eigen::Vector2i(i, s));
    }
  }
  return lines;
}

void PatchMatchConfig::Validate() const {
  if (iterations < 1) throw Error(ErrorKind::kConfigError, "patchmatch.iterations must be >= 1");
  if (!(lambda_geom >= 0.0)) throw Error(ErrorKind::kConfigError, "patchmatch.lambda_geom must be >= 0");
  if (!(perturb_depth_frac >= 0.0 && perturb_depth_frac < 1.0))
    throw Error(ErrorKind::kConfigError, "patchmatch.perturb_depth_frac must lie in [0, 1)");
  if (!(perturb_normal_deg >= 0.0 && perturb_normal_deg <= 90.0))
    throw Error(ErrorKind::kConfigError, "patchmatch.perturb_normal_deg must lie in [0, 90]");
}

void PatchMatchSettings::Validate() const {
  patchmatch.Validate();
  window.Validate();
  views.Validate();
  prior.Validate();
  if (!(psi_max > 0.0)) throw Error(ErrorKind::kConfigError, "photo.psi_max must be positive");
  if (!(range.min > 0.0 && range.max > range.min))
    throw Error(ErrorKind::kConfigError, "depth range must satisfy 0 < min < max");
  if (!(scene_size > 0.0)) throw Error(ErrorKind::kConfigError, "scene size must be positive");
}

Eigen::Vector3d RandomFacingNormal(const CameraView& view, const Eigen::Vector2d& pixel,
                                   StreamRng& rng) {
  const double z = rng.Uniform(-1.0, 1.0);
  const double phi = rng.Uniform(0.0, 2.0 * M_PI);
  const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
  return FaceCamera(view, pixel, Eigen::Vector3d(r * std::cos(phi), r * std::sin(phi), z));
}

Eigen::Vector3d PerturbNormal(const CameraView& view, const Eigen::Vector2d& pixel,
                              const Eigen::Vector3d& normal, double max_deg, StreamRng& rng) {
  const Eigen::Vector3d n = normal.normalized();
  const Eigen::Vector3d helper =
      std::abs(n.x()) < 0.9 ? Eigen::Vector3d::UnitX() : Eigen::Vector3d::UnitY();
  const Eigen::Vector3d u = n.cross(helper).normalized();
  const Eigen::Vector3d v = n.cross(u);
  const double phi = rng.Uniform(0.0, 2.0 * M_PI);
  const Eigen::Vector3d axis = std::cos(phi) * u + std::sin(phi) * v;
  const double angle = rng.Uniform(0.0, max_deg) * kDegToRad;
  const Eigen::Vector3d rotated = Eigen::AngleAxisd(angle, axis) * n;
  return FaceCamera(view, pixel, rotated.normalized());
}

HypothesisSet BuildHypotheses(const CameraView& view, const Eigen::Vector2i& pixel,
                              const HypothesisInputs& inputs, const DepthRange& range,
                              const PatchMatchConfig& config, StreamRng& rng) {
  const Eigen::Vector2d p = pixel.cast<double>();
  HypothesisSet set;
  set.reserve(9);
  set.push_back({inputs.current, HypothesisKind::kCurrent});
  if (inputs.previous) {
    const auto& [plane, anchor] = *inputs.previous;
    const Plane3 cam = CameraPlane(view, anchor.cast<double>(), plane);
    if (const auto depth = DepthOfPlaneAtPixel(view, cam, p)) {
      set.push_back({{plane.normal, *depth}, HypothesisKind::kPropagated});
    }
  }
  const double random_depth = rng.Uniform(range.min, range.max);
  const Eigen::Vector3d random_normal = RandomFacingNormal(view, p, rng);
  set.push_back({{inputs.current.normal, random_depth}, HypothesisKind::kRandomDepth});
  set.push_back({{random_normal, inputs.current.depth}, HypothesisKind::kRandomNormal});
  const double both_depth = rng.Uniform(range.min, range.max);
  const Eigen::Vector3d both_normal = RandomFacingNormal(view, p, rng);
  set.push_back({{both_normal, both_depth}, HypothesisKind::kRandomBoth});
  const double eps = rng.Uniform(-config.perturb_depth_frac, config.perturb_depth_frac);
  set.push_back({{inputs.current.normal, inputs.current.depth * (1.0 + eps)},
                 HypothesisKind::kPerturbedDepth});
  set.push_back({{PerturbNormal(view, p, inputs.current.normal, config.perturb_normal_deg, rng),
                  inputs.current.depth},
                 HypothesisKind::kPerturbedNormal});
  if (inputs.planar_fine) set.push_back({*inputs.planar_fine, HypothesisKind::kPlanarFine});
  if (inputs.planar_coarse) set.push_back({*inputs.planar_coarse, HypothesisKind::kPlanarCoarse});
  return set;
}

TextureWeighting KindWeights(HypothesisKind kind, double textureness, bool enabled) {
  if (!enabled) return {1.0, 1.0};
  const TextureWeights w = ComputeTextureWeights(textureness);
  return IsPlanarKind(kind) ? TextureWeighting{w.plus, w.minus}
                            : TextureWeighting{w.minus, w.plus};
}

std::optional<HypothesisScore> ScoreHypothesis(const CostContext& ctx,
                                               const ReferencePatch& patch,
                                               const Eigen::Vector2i& pixel,
                                               const Hypothesis& hypothesis,
                                               std::span<const int> subset, double textureness) {
  const LocalPlane& plane = hypothesis.plane;
  if (!std::isfinite(plane.depth) || !plane.normal.allFinite()) return std::nullopt;
  if (plane.depth < ctx.range.min || plane.depth > ctx.range.max) return std::nullopt;
  const TextureWeighting w = KindWeights(hypothesis.kind, textureness, ctx.texture_weighting);
  const bool use_geom = !ctx.source_maps.empty() && ctx.lambda_geom > 0.0;
  const Eigen::Vector2d anchor = pixel.cast<double>();

  HypothesisScore score;
  score.rho.reserve(subset.size());
  double total = 0.0;
  for (int m : subset) {
    const CameraView& src = *ctx.sources[m];
    const auto h = PlaneHomography::Create(*ctx.ref, src, anchor, plane);
    const double rho = h ? patch.Ncc(src.gray, h->matrix()) : -1.0;
    score.rho.push_back(rho);
    double cost = w.photo * (1.0 - rho);
    if (use_geom) {
      cost += ctx.lambda_geom * w.geom *
              GeometricCost(*ctx.ref, src, *ctx.source_maps[m], pixel, plane, ctx.psi_max);
    }
    total += cost;
  }
  score.cost = subset.empty() ? 0.0 : total / static_cast<double>(subset.size());
  return score;
}

Selection EvaluateAndSelect(const CostContext& ctx, const ReferencePatch& patch,
                            const Eigen::Vector2i& pixel, std::span<const Hypothesis> hypotheses,
                            std::span<const int> subset, double textureness) {
  Selection best;
  for (int i = 0; i < static_cast<int>(hypotheses.size()); ++i) {
    auto score = ScoreHypothesis(ctx, patch, pixel, hypotheses[i], subset, textureness);
    if (!score) continue;
    if (!best.score || score->cost < best.score->cost) {
      best.index = i;
      best.score = std::move(score);
    }
  }
  return best;
}

PatchMatchResult RunPatchMatch(const CameraView& ref, std::span<const CameraView* const> sources,
                               const PatchMatchSettings& settings,
                               const PatchMatchInputs& inputs) {
  settings.Validate();
  if (sources.empty()) throw Error(ErrorKind::kNoSources, "reference view has no sources");
  if (!inputs.source_maps.empty() && inputs.source_maps.size() != sources.size())
    throw Error(ErrorKind::kDimensionMismatch, "source maps do not match sources");

  const PatchMatchConfig& pm = settings.patchmatch;
  const int w = ref.width;
  const int h = ref.height;
  const int num_sources = static_cast<int>(sources.size());
  const std::uint64_t view_key = static_cast<std::uint64_t>(ref.view_id);

  PatchMatchResult result;
  result.textureness = ComputeTextureness(ref.gray);
  result.visibility = ViewSelectionState(w, h, num_sources);

  Grid<LocalPlane> planes =
      inputs.initial ? ToPlanes(*inputs.initial) : Grid<LocalPlane>(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (planes(x, y).depth > 0.0) continue;
      StreamRng rng({pm.seed, view_key, 0, static_cast<std::uint64_t>(y) * w + x, kInitStream});
      const Eigen::Vector2d p(x, y);
      const double depth = rng.Uniform(settings.range.min, settings.range.max);
      planes(x, y) = {RandomFacingNormal(ref, p, rng), depth};
    }
  }

  std::optional<PlanarPriorContext> owned_context;
  const PlanarPriorContext* prior_context = inputs.prior_context;
  if (pm.enable_planar_priors && !prior_context) {
    owned_context = BuildPlanarPriorContext(ref, settings.prior);
    prior_context = &*owned_context;
  }

  const double hidden = HiddenEmission(settings.window, settings.views);
  CostContext ctx;
  ctx.ref = &ref;
  ctx.sources = sources;
  ctx.window = settings.window;
  ctx.psi_max = settings.psi_max;
  ctx.lambda_geom = pm.lambda_geom;
  ctx.texture_weighting = pm.enable_texture_weighting;
  ctx.range = settings.range;

  for (int iter = 1; iter <= pm.iterations; ++iter) {
    std::optional<PlanarHypotheses> priors;
    if (pm.enable_planar_priors && (iter >= 2 || inputs.initial)) {
      priors = BuildPlanarPriors(ref, *prior_context, ToMap(planes), settings.prior,
                                 settings.range, settings.scene_size, pm.seed, iter);
    }
    const bool geometric = !inputs.source_maps.empty() && 2 * iter > pm.iterations;
    ctx.source_maps = geometric ? inputs.source_maps : std::span<const DepthNormalMap* const>{};

    const auto lines = SweepLines(w, h, SweepForIteration(iter - 1));
    std::vector<std::vector<double>> densities;
    for (const auto& line : lines) {
      densities.assign(line.size(), std::vector<double>(num_sources, 0.0));
      for (std::size_t i = 0; i < line.size(); ++i) {
        const Eigen::Vector2i px = line[i];
        const int x = px.x(), y = px.y();
        StreamRng rng({pm.seed, view_key, static_cast<std::uint64_t>(iter),
                       static_cast<std::uint64_t>(y) * w + x, kUpdateStream});

        HypothesisInputs hin;
        hin.current = planes(x, y);
        if (i > 0) hin.previous.emplace(planes(line[i - 1].x(), line[i - 1].y()), line[i - 1]);
        if (priors) {
          hin.planar_fine = priors->fine(x, y);
          hin.planar_coarse = priors->coarse(x, y);
        }
        const HypothesisSet set = BuildHypotheses(ref, px, hin, settings.range, pm, rng);

        const auto weights = SourceWeights(ref, sources, px, hin.current,
                                           result.visibility.At(x, y), settings.views);
        const std::vector<int> subset =
            SampleSourceSubset(weights, settings.views.subset_size, rng);

        const ReferencePatch patch(ref.gray, x, y, settings.window);
        const double t = result.textureness.t(x, y);
        const Selection sel = EvaluateAndSelect(ctx, patch, px, set, subset, t);
        const LocalPlane& chosen = set[sel.index].plane;
        planes(x, y) = chosen;

        std::vector<double>& dens = densities[i];
        std::vector<bool> known(num_sources, false);
        if (sel.score) {
          for (std::size_t k = 0; k < subset.size(); ++k) {
            dens[subset[k]] = EvaluatePhotoLikelihood(sel.score->rho[k], settings.window).density;
            known[subset[k]] = true;
          }
        }
        for (int m = 0; m < num_sources; ++m) {
          if (known[m]) continue;
          const auto hm = PlaneHomography::Create(ref, *sources[m], px.cast<double>(), chosen);
          const double rho = hm ? patch.Ncc(sources[m]->gray, hm->matrix()) : -1.0;
          dens[m] = EvaluatePhotoLikelihood(rho, settings.window).density;
        }
      }
      UpdateVisibilityLine(result.visibility, line, densities, hidden, settings.views.gamma);
    }
  }

  result.map = ToMap(planes);
  return result;
}

}  // namespace texmvs
