#include "texmvs/config.h"

#include <algorithm>
#include <set>

#include "texmvs/error.h"

namespace texmvs {
namespace {

using toml::Table;
using toml::Value;

// Reads typed values and remembers which keys were consumed.
class Reader {
 public:
  Reader(const Table* table, std::string section) : table_(table), section_(std::move(section)) {}

  void Number(const char* key, double& out) {
    if (!table_) return;
    seen_.insert(key);
    if (auto v = table_->GetNumber(key)) out = *v;
  }
  void Int(const char* key, int& out) {
    if (!table_) return;
    seen_.insert(key);
    if (auto v = table_->GetInt(key)) out = static_cast<int>(*v);
  }
  void Seed(const char* key, std::uint64_t& out) {
    if (!table_) return;
    seen_.insert(key);
    if (auto v = table_->GetInt(key)) {
      if (*v < 0) throw Error(ErrorKind::kConfigError, section_ + "." + key + " must be >= 0");
      out = static_cast<std::uint64_t>(*v);
    }
  }
  void Bool(const char* key, bool& out) {
    if (!table_) return;
    seen_.insert(key);
    if (auto v = table_->GetBool(key)) out = *v;
  }
  void String(const char* key, std::string& out) {
    if (!table_) return;
    seen_.insert(key);
    if (auto v = table_->GetString(key)) out = *v;
  }
  void Numbers(const char* key, std::vector<double>& out) {
    if (!table_) return;
    seen_.insert(key);
    if (auto v = table_->GetNumbers(key)) out = *v;
  }

  void RejectUnknown() const {
    if (!table_) return;
    for (const auto& [key, value] : table_->entries()) {
      if (!seen_.count(key))
        throw Error(ErrorKind::kConfigError, "unknown key '" + key + "' in [" + section_ + "]");
    }
  }

 private:
  const Table* table_;
  std::string section_;
  std::set<std::string, std::less<>> seen_;
};

Value Num(double v) { return Value{v}; }
Value Int(std::int64_t v) { return Value{v}; }
Value Bool(bool v) { return Value{v}; }
Value Str(std::string v) { return Value{std::move(v)}; }
Value Nums(const std::vector<double>& v) {
  toml::Array a;
  for (double x : v) a.push_back(Value{x});
  return Value{std::move(a)};
}

const char* ThresholdModeName(RansacConfig::ThresholdMode m) {
  return m == RansacConfig::ThresholdMode::kAbsolute ? "absolute" : "scene_fraction";
}

const char* WeightingName(NeighborWeighting w) {
  return w == NeighborWeighting::kBhattacharyyaCoefficient ? "coefficient" : "distance";
}

}  // namespace

std::vector<double> EvalConfig::Thresholds(double scene_size) const {
  std::vector<double> out(taus.begin(), taus.end());
  for (double f : tau_fractions) out.push_back(f * scene_size);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

void RunConfig::Validate() const {
  window.Validate();
  if (!(psi_max > 0.0)) throw Error(ErrorKind::kConfigError, "photo.psi_max must be positive");
  views.Validate();
  patchmatch.Validate();
  prior.Validate();
  speckle.Validate();
  fill.Validate();
  fusion.Validate();
  for (const auto* list : {&eval.taus, &eval.tau_fractions, &eval.depth_error_fractions}) {
    for (double v : *list)
      if (!(v > 0.0)) throw Error(ErrorKind::kConfigError, "eval thresholds must be positive");
  }
}

PatchMatchSettings RunConfig::EffectiveSettings(const SceneBundle& scene) const {
  PatchMatchSettings s;
  s.patchmatch = patchmatch;
  s.patchmatch.enable_texture_weighting =
      patchmatch.enable_texture_weighting && ablation.texture_weighting;
  s.prior = prior;
  s.prior.use_fine = prior.use_fine && ablation.fine_superpixels;
  s.prior.use_coarse = prior.use_coarse && ablation.coarse_superpixels;
  s.prior.speckle = speckle;
  s.patchmatch.enable_planar_priors =
      patchmatch.enable_planar_priors && (s.prior.use_fine || s.prior.use_coarse);
  s.window = window;
  s.psi_max = psi_max;
  s.views = views;
  s.range = scene.depth_range;
  s.scene_size = scene.scene_size;
  return s;
}

RunConfig ParseRunConfig(const toml::Document& doc) {
  static const std::set<std::string, std::less<>> kSections = {
      "photo", "views", "patchmatch", "prior", "refine", "fusion", "eval", "ablation", "run"};
  for (const auto& [name, table] : doc.tables) {
    if (!kSections.count(name)) throw Error(ErrorKind::kConfigError, "unknown section [" + name + "]");
  }
  if (!doc.table_arrays.empty())
    throw Error(ErrorKind::kConfigError, "arrays of tables are not used in run configs");
  if (!doc.root.entries().empty())
    throw Error(ErrorKind::kConfigError, "top-level keys are not used in run configs");

  RunConfig c;
  {
    Reader r(doc.FindTable("photo"), "photo");
    r.Int("half_size", c.window.half_size);
    r.Number("sigma_spatial", c.window.sigma_spatial);
    r.Number("sigma_color", c.window.sigma_color);
    r.Number("sigma_rho", c.window.sigma_rho);
    r.Number("psi_max", c.psi_max);
    r.RejectUnknown();
  }
  {
    Reader r(doc.FindTable("views"), "views");
    r.Number("gamma", c.views.gamma);
    r.Int("subset_size", c.views.subset_size);
    r.Number("parallax_peak_deg", c.views.parallax_peak_deg);
    r.Number("parallax_sigma_deg", c.views.parallax_sigma_deg);
    r.Number("u_anchor_rho", c.views.u_anchor_rho);
    r.RejectUnknown();
  }
  {
    Reader r(doc.FindTable("patchmatch"), "patchmatch");
    r.Int("iterations", c.patchmatch.iterations);
    r.Number("lambda_geom", c.patchmatch.lambda_geom);
    r.Number("perturb_depth_frac", c.patchmatch.perturb_depth_frac);
    r.Number("perturb_normal_deg", c.patchmatch.perturb_normal_deg);
    r.Seed("seed", c.patchmatch.seed);
    r.Bool("enable_planar_priors", c.patchmatch.enable_planar_priors);
    r.Bool("enable_texture_weighting", c.patchmatch.enable_texture_weighting);
    r.RejectUnknown();
  }
  {
    Reader r(doc.FindTable("prior"), "prior");
    r.Number("fine_divisor", c.prior.fine_divisor);
    r.Number("coarse_divisor", c.prior.coarse_divisor);
    std::string mode = ThresholdModeName(c.prior.ransac.mode);
    r.String("ransac_threshold_mode", mode);
    if (mode == "absolute") {
      c.prior.ransac.mode = RansacConfig::ThresholdMode::kAbsolute;
    } else if (mode == "scene_fraction") {
      c.prior.ransac.mode = RansacConfig::ThresholdMode::kSceneFraction;
    } else {
      throw Error(ErrorKind::kConfigError, "prior.ransac_threshold_mode must be absolute or scene_fraction");
    }
    r.Number("ransac_threshold", c.prior.ransac.threshold);
    r.Number("ransac_threshold_fraction", c.prior.ransac.threshold_fraction);
    r.Int("ransac_iters", c.prior.ransac.max_iterations);
    r.Number("ransac_confidence", c.prior.ransac.confidence);
    r.Int("hist_bins", c.prior.superpixels.histogram_bins);
    r.Number("slic_compactness", c.prior.superpixels.compactness);
    r.Int("slic_iterations", c.prior.superpixels.iterations);
    std::string weighting = WeightingName(c.prior.weighting);
    r.String("neighbor_weighting", weighting);
    if (weighting == "coefficient") {
      c.prior.weighting = NeighborWeighting::kBhattacharyyaCoefficient;
    } else if (weighting == "distance") {
      c.prior.weighting = NeighborWeighting::kBhattacharyyaDistance;
    } else {
      throw Error(ErrorKind::kConfigError, "prior.neighbor_weighting must be coefficient or distance");
    }
    r.RejectUnknown();
  }
  {
    Reader r(doc.FindTable("refine"), "refine");
    r.Number("speckle_area_fraction", c.speckle.max_area_fraction);
    r.Number("speckle_continuity_fraction", c.speckle.continuity_fraction);
    r.Int("fill_radius", c.fill.window_radius);
    r.Int("fill_k_min", c.fill.k_min);
    r.Bool("fill_enable", c.fill.enable);
    r.RejectUnknown();
  }
  {
    Reader r(doc.FindTable("fusion"), "fusion");
    r.Number("max_reproj_error", c.fusion.max_reproj_error);
    r.Number("max_depth_error", c.fusion.max_depth_error);
    r.Number("max_normal_error_deg", c.fusion.max_normal_error_deg);
    r.Int("min_consistent_views", c.fusion.min_consistent_views);
    r.RejectUnknown();
  }
  {
    Reader r(doc.FindTable("eval"), "eval");
    r.Numbers("taus", c.eval.taus);
    r.Numbers("tau_fractions", c.eval.tau_fractions);
    r.Numbers("depth_error_fractions", c.eval.depth_error_fractions);
    r.Numbers("textureness_cutoffs", c.eval.textureness_cutoffs);
    r.RejectUnknown();
  }
  {
    Reader r(doc.FindTable("ablation"), "ablation");
    r.Bool("texture_weighting", c.ablation.texture_weighting);
    r.Bool("coarse_superpixels", c.ablation.coarse_superpixels);
    r.Bool("fine_superpixels", c.ablation.fine_superpixels);
    r.Bool("depth_refinement", c.ablation.depth_refinement);
    r.RejectUnknown();
  }
  {
    Reader r(doc.FindTable("run"), "run");
    r.Bool("geometric_round", c.geometric_round);
    r.String("output_dir", c.output_dir);
    r.RejectUnknown();
  }
  c.Validate();
  return c;
}

RunConfig LoadRunConfig(const std::filesystem::path& path) {
  return ParseRunConfig(toml::ParseFile(path.string()));
}

toml::Document RunConfigToToml(const RunConfig& c) {
  toml::Document doc;
  Table& photo = doc.GetOrAddTable("photo");
  photo.Set("half_size", Int(c.window.half_size));
  photo.Set("sigma_spatial", Num(c.window.sigma_spatial));
  photo.Set("sigma_color", Num(c.window.sigma_color));
  photo.Set("sigma_rho", Num(c.window.sigma_rho));
  photo.Set("psi_max", Num(c.psi_max));

  Table& views = doc.GetOrAddTable("views");
  views.Set("gamma", Num(c.views.gamma));
  views.Set("subset_size", Int(c.views.subset_size));
  views.Set("parallax_peak_deg", Num(c.views.parallax_peak_deg));
  views.Set("parallax_sigma_deg", Num(c.views.parallax_sigma_deg));
  views.Set("u_anchor_rho", Num(c.views.u_anchor_rho));

  Table& pm = doc.GetOrAddTable("patchmatch");
  pm.Set("iterations", Int(c.patchmatch.iterations));
  pm.Set("lambda_geom", Num(c.patchmatch.lambda_geom));
  pm.Set("perturb_depth_frac", Num(c.patchmatch.perturb_depth_frac));
  pm.Set("perturb_normal_deg", Num(c.patchmatch.perturb_normal_deg));
  pm.Set("seed", Int(static_cast<std::int64_t>(c.patchmatch.seed)));
  pm.Set("enable_planar_priors", Bool(c.patchmatch.enable_planar_priors));
  pm.Set("enable_texture_weighting", Bool(c.patchmatch.enable_texture_weighting));

  Table& prior = doc.GetOrAddTable("prior");
  prior.Set("fine_divisor", Num(c.prior.fine_divisor));
  prior.Set("coarse_divisor", Num(c.prior.coarse_divisor));
  prior.Set("ransac_threshold_mode", Str(ThresholdModeName(c.prior.ransac.mode)));
  prior.Set("ransac_threshold", Num(c.prior.ransac.threshold));
  prior.Set("ransac_threshold_fraction", Num(c.prior.ransac.threshold_fraction));
  prior.Set("ransac_iters", Int(c.prior.ransac.max_iterations));
  prior.Set("ransac_confidence", Num(c.prior.ransac.confidence));
  prior.Set("hist_bins", Int(c.prior.superpixels.histogram_bins));
  prior.Set("slic_compactness", Num(c.prior.superpixels.compactness));
  prior.Set("slic_iterations", Int(c.prior.superpixels.iterations));
  prior.Set("neighbor_weighting", Str(WeightingName(c.prior.weighting)));

  Table& refine = doc.GetOrAddTable("refine");
  refine.Set("speckle_area_fraction", Num(c.speckle.max_area_fraction));
  refine.Set("speckle_continuity_fraction", Num(c.speckle.continuity_fraction));
  refine.Set("fill_radius", Int(c.fill.window_radius));
  refine.Set("fill_k_min", Int(c.fill.k_min));
  refine.Set("fill_enable", Bool(c.fill.enable));

  Table& fusion = doc.GetOrAddTable("fusion");
  fusion.Set("max_reproj_error", Num(c.fusion.max_reproj_error));
  fusion.Set("max_depth_error", Num(c.fusion.max_depth_error));
  fusion.Set("max_normal_error_deg", Num(c.fusion.max_normal_error_deg));
  fusion.Set("min_consistent_views", Int(c.fusion.min_consistent_views));

  Table& eval = doc.GetOrAddTable("eval");
  eval.Set("taus", Nums(c.eval.taus));
  eval.Set("tau_fractions", Nums(c.eval.tau_fractions));
  eval.Set("depth_error_fractions", Nums(c.eval.depth_error_fractions));
  eval.Set("textureness_cutoffs", Nums(c.eval.textureness_cutoffs));

  Table& ablation = doc.GetOrAddTable("ablation");
  ablation.Set("texture_weighting", Bool(c.ablation.texture_weighting));
  ablation.Set("coarse_superpixels", Bool(c.ablation.coarse_superpixels));
  ablation.Set("fine_superpixels", Bool(c.ablation.fine_superpixels));
  ablation.Set("depth_refinement", Bool(c.ablation.depth_refinement));

  Table& run = doc.GetOrAddTable("run");
  run.Set("geometric_round", Bool(c.geometric_round));
  run.Set("output_dir", Str(c.output_dir));
  return doc;
}

std::string RunConfigToTomlString(const RunConfig& config) {
  return toml::Write(RunConfigToToml(config));
}

}  // namespace texmvs
