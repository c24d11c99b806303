// Command-line front end: denoising, wavelet zooming, and surface
// interpolation over PNG/PGM/PPM images and CSV/HGT heightmaps.

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>

#include "tdv/apps.hpp"
#include "tdv/io.hpp"

namespace {

using nlohmann::json;
using namespace tdv;

double nan_to_null_safe(double x) { return x; }

json metric_entry(double x) {
  if (std::isnan(x)) return nullptr;
  if (std::isinf(x)) return "inf";
  return nan_to_null_safe(x);
}

void write_metrics(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw error("cannot write metrics file " + path);
  out << j.dump(2) << "\n";
}

struct TraceWriter {
  std::ofstream out;
  explicit TraceWriter(const std::string& path) : out(path) {
    if (!out) throw error("cannot write trace file " + path);
    out << "iteration,energy,gap\n";
  }
  void line(int it, double e, double g) {
    out << it << "," << e << "," << (std::isnan(g) ? std::string("") : std::to_string(g)) << "\n";
  }
};

std::array<double, 3> parse_orders(const std::string& s) {
  std::array<double, 3> a{0, 0, 0};
  std::stringstream ss(s);
  std::string tok;
  for (int i = 0; i < 3 && std::getline(ss, tok, ','); ++i) a[std::size_t(i)] = std::stod(tok);
  if (a[0] <= 0 && a[1] <= 0 && a[2] <= 0)
    throw error("--orders needs at least one positive weight, got '" + s + "'");
  return a;
}

// --b2 accepts a constant in [0,1], "vary", or "identity".
void apply_b2(JointModelSpec& spec, const std::string& b2) {
  if (b2 == "vary") {
    spec.policy = BetaPolicy::Varying;
  } else if (b2 == "identity") {
    spec.policy = BetaPolicy::Identity;
  } else {
    spec.policy = BetaPolicy::Fixed;
    spec.beta = std::stod(b2);
    if (spec.beta < 0 || spec.beta > 1) throw error("--b2 constant must lie in [0,1]");
  }
}

ScalarField mean_channel(const Image& img) {
  ScalarField m = img.channels[0];
  for (std::size_t k = 1; k < img.channels.size(); ++k) axpy(1.0, img.channels[k], m);
  scale(m, 1.0 / double(img.channels.size()));
  return m;
}

void export_direction(const std::string& prefix, const VectorField& v) {
  save_csv(prefix + ".v1.csv", v.x);
  save_csv(prefix + ".v2.csv", v.y);
}

struct CommonOpts {
  std::string input, output, metrics_path, trace_path, reference_path;
  double noise = 0;
  std::uint64_t seed = 1;
};

void add_common(CLI::App* cmd, CommonOpts& c, bool image_io) {
  cmd->add_option("--input", c.input, image_io ? "input image (PNG or binary PGM/PPM)"
                                               : "input heightmap (.csv or .hgt)")
      ->required();
  cmd->add_option("--output", c.output, "output path")->required();
  cmd->add_option("--metrics", c.metrics_path, "write metrics JSON here");
  cmd->add_option("--trace", c.trace_path, "write per-iteration CSV trace here");
  cmd->add_option("--reference", c.reference_path, "reference for PSNR/SSIM");
  cmd->add_option("--noise", c.noise, "add seeded Gaussian noise (fraction of range)");
  cmd->add_option("--seed", c.seed, "RNG seed");
}

json run_metrics(const Diagnostics& diag, const std::vector<ScalarField>& out,
                 const std::vector<ScalarField>* ref) {
  json j;
  j["iterations"] = diag.iterations;
  j["final_gap"] = metric_entry(diag.final_gap);
  j["energy"] = metric_entry(diag.final_energy);
  if (ref && ref->size() == out.size()) {
    double p = 0, s = 0;
    for (std::size_t k = 0; k < out.size(); ++k) {
      p += psnr(out[k], (*ref)[k]);
      s += ssim(out[k], (*ref)[k]);
    }
    j["psnr"] = metric_entry(p / double(out.size()));
    j["ssim"] = metric_entry(s / double(out.size()));
  } else {
    j["psnr"] = nullptr;
    j["ssim"] = nullptr;
  }
  return j;
}

int cmd_denoise(const CommonOpts& c, JointModelSpec spec, const std::string& export_v,
                const std::string& export_beta) {
  Image img = load_image(c.input);
  std::vector<ScalarField> reference = img.channels;
  if (c.noise > 0)
    for (std::size_t k = 0; k < img.channels.size(); ++k)
      img.channels[k] = add_gaussian_noise(img.channels[k], c.noise, c.seed + k);

  std::unique_ptr<TraceWriter> tw;
  if (!c.trace_path.empty()) {
    tw = std::make_unique<TraceWriter>(c.trace_path);
    spec.trace = [&tw](int outer, int it, double e, double g) {
      tw->line(outer * 1000000 + it, e, g);
    };
  }

  Image out = img;
  Diagnostics diag;
  VectorField v;
  ScalarField beta;
  for (std::size_t k = 0; k < img.channels.size(); ++k) {
    DenoiseResult r = denoise_joint(img.channels[k], spec);
    out.channels[k] = std::move(r.u);
    diag = std::move(r.diag);
    v = std::move(r.v);
    beta = std::move(r.beta);
  }
  save_image(c.output, out);
  if (!export_v.empty()) export_direction(export_v, v);
  if (!export_beta.empty()) save_csv(export_beta, beta);

  if (!c.metrics_path.empty()) {
    std::vector<ScalarField>* ref = nullptr;
    std::vector<ScalarField> loaded;
    if (!c.reference_path.empty()) {
      loaded = load_image(c.reference_path).channels;
      ref = &loaded;
    } else if (c.noise > 0) {
      ref = &reference;
    }
    write_metrics(c.metrics_path, run_metrics(diag, out.channels, ref));
  }
  return 0;
}

int cmd_denoise_single(const CommonOpts& c, SingleModelSpec spec) {
  Image img = load_image(c.input);
  std::vector<ScalarField> reference = img.channels;
  if (c.noise > 0)
    for (std::size_t k = 0; k < img.channels.size(); ++k)
      img.channels[k] = add_gaussian_noise(img.channels[k], c.noise, c.seed + k);

  std::unique_ptr<TraceWriter> tw;
  if (!c.trace_path.empty()) {
    tw = std::make_unique<TraceWriter>(c.trace_path);
    spec.trace = [&tw](int it, double e, double g) { tw->line(it, e, g); };
  }

  Image out = img;
  for (std::size_t k = 0; k < img.channels.size(); ++k)
    out.channels[k] = denoise_single(img.channels[k], spec);
  save_image(c.output, out);
  if (!c.metrics_path.empty()) {
    Diagnostics diag;
    diag.iterations = spec.iters;
    std::vector<ScalarField>* ref = c.noise > 0 ? &reference : nullptr;
    std::vector<ScalarField> loaded;
    if (!c.reference_path.empty()) {
      loaded = load_image(c.reference_path).channels;
      ref = &loaded;
    }
    write_metrics(c.metrics_path, run_metrics(diag, out.channels, ref));
  }
  return 0;
}

int cmd_zoom(const CommonOpts& c, ZoomSpec spec) {
  Image low = load_image(c.input);
  Image out = low;
  const double gain = double(1 << spec.levels);  // coarse coefficients of the unknown
  for (std::size_t k = 0; k < low.channels.size(); ++k) {
    ScalarField coarse = scaled(low.channels[k], gain);
    out.channels[k] = zoom_wavelet(coarse, spec);
  }
  save_image(c.output, out);
  if (!c.metrics_path.empty()) {
    Diagnostics diag;
    diag.iterations = spec.inner * std::max(1, spec.outer);
    std::vector<ScalarField>* ref = nullptr;
    std::vector<ScalarField> loaded;
    if (!c.reference_path.empty()) {
      loaded = load_image(c.reference_path).channels;
      ref = &loaded;
    }
    write_metrics(c.metrics_path, run_metrics(diag, out.channels, ref));
  }
  return 0;
}

int cmd_surface(const CommonOpts& c, SurfaceSpec spec, const std::string& samples_path,
                const std::string& mask_mode, double density, const std::string& export_v) {
  Heightmap hm = load_heightmap(c.input);
  ScalarField values = hm.values;
  ScalarField mask = hm.valid;
  if (!samples_path.empty()) {
    Heightmap s = load_heightmap(samples_path);
    check_same_shape(s.values, values, "surface samples");
    values = s.values;
    mask = s.valid;
  } else if (!mask_mode.empty()) {
    SamplingSpec ms;
    if (mask_mode == "contours")
      ms.mode = MaskMode::Contours;
    else if (mask_mode == "random")
      ms.mode = MaskMode::Random;
    else if (mask_mode == "spiral")
      ms.mode = MaskMode::Spiral;
    else
      throw error("--mask-mode must be contours, random or spiral");
    ms.density = density;
    ms.undersampling = density;
    SamplingMask sm = make_sampling_mask(ms, values.rows(), values.cols(), c.seed, &values);
    for (std::size_t i = 0; i < mask.v.size(); ++i) mask.v[i] *= sm.mask.v[i];
  }

  SurfaceResult r = interpolate_surface(values, mask, spec);
  save_csv(c.output, r.u);
  if (!export_v.empty()) export_direction(export_v, r.v);
  if (!c.metrics_path.empty()) {
    json j;
    j["iterations"] = spec.outer * spec.inner;
    j["final_gap"] = metric_entry(r.diag.final_gap);
    j["energy"] = metric_entry(r.diag.final_energy);
    j["psnr"] = metric_entry(psnr(r.u, hm.values));
    j["ssim"] = metric_entry(ssim(r.u, hm.values));
    write_metrics(c.metrics_path, j);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Higher-order directional total variation toolbox"};
  app.require_subcommand(1);
  app.set_config("--config");

  // ---- denoise ----
  CommonOpts dc;
  JointModelSpec dspec;
  std::string d_orders = "1,0,0", d_b2 = "vary", d_export_v, d_export_beta;
  std::vector<double> d_sigma{1.8}, d_rho{2.8};
  auto* den = app.add_subcommand("denoise", "joint-model denoising with direction refinement");
  add_common(den, dc, true);
  den->add_option("--orders", d_orders, "per-order weights a1,a2,a3 (0 disables)");
  den->add_option("--eta", dspec.eta, "data fidelity weight");
  den->add_option("--b2", d_b2, "second contraction weight: constant, 'vary' or 'identity'");
  den->add_option("--sigma", d_sigma, "structure-tensor sigma schedule (one per outer pass)");
  den->add_option("--rho", d_rho, "structure-tensor rho schedule");
  den->add_option("--vgamma", dspec.v_gamma, "direction-field smoothing weight");
  den->add_option("--outer", dspec.outer, "outer direction-refinement passes");
  den->add_option("--iters", dspec.inner, "inner primal-dual iterations");
  den->add_flag("--accelerate", dspec.accelerated, "accelerated schedule (Q=1 only)");
  den->add_option("--gap-tol", dspec.gap_tol, "stop when the primal-dual gap falls below this");
  den->add_option("--export-v", d_export_v, "CSV prefix for the direction field");
  den->add_option("--export-beta", d_export_beta, "CSV path for the beta field");

  // ---- denoise-single ----
  CommonOpts sc;
  SingleModelSpec sspec;
  std::string s_weights = "I,I", s_alpha = "1,1.25", s_b2 = "vary";
  auto* sgl = app.add_subcommand("denoise-single", "single-model denoising, order q in 1..3");
  add_common(sgl, sc, true);
  sgl->add_option("--q", sspec.q, "derivative order");
  sgl->add_option("--weights", s_weights, "per-level choices, e.g. M,I (inner first)");
  sgl->add_option("--alpha", s_alpha, "dual radii alpha_0..alpha_{q-1}");
  sgl->add_option("--eta", sspec.eta, "data fidelity weight");
  sgl->add_option("--b2", s_b2, "second contraction weight: constant or 'vary'");
  sgl->add_option("--sigma", sspec.sigma, "structure-tensor sigma");
  sgl->add_option("--rho", sspec.rho, "structure-tensor rho");
  sgl->add_option("--vgamma", sspec.v_gamma, "direction-field smoothing weight");
  sgl->add_option("--iters", sspec.iters, "primal-dual iterations");

  // ---- zoom ----
  CommonOpts zc;
  ZoomSpec zspec;
  std::string z_orders = "1,0,0", z_b2 = "vary";
  auto* zoom = app.add_subcommand("zoom", "wavelet-based zooming by 2^levels");
  add_common(zoom, zc, true);
  zoom->add_option("--levels", zspec.levels, "dyadic levels (2 = 4X zoom)");
  zoom->add_option("--orders", z_orders, "per-order weights a1,a2,a3");
  zoom->add_option("--b2", z_b2, "second contraction weight: constant, 'vary' or 'identity'");
  zoom->add_option("--sigma", zspec.sigma, "structure-tensor sigma");
  zoom->add_option("--rho", zspec.rho, "structure-tensor rho");
  zoom->add_option("--outer", zspec.outer, "anisotropy refinement passes");
  zoom->add_option("--iters", zspec.inner, "primal-dual iterations per pass");

  // ---- surface ----
  CommonOpts fc;
  SurfaceSpec fspec;
  std::string f_samples, f_mask_mode, f_export_v;
  double f_density = 0.07;
  auto* srf = app.add_subcommand("surface", "interpolate a surface from scattered heights");
  add_common(srf, fc, false);
  srf->add_option("--samples", f_samples, "heightmap holding the scattered samples");
  srf->add_option("--mask-mode", f_mask_mode, "synthesise samples: contours, random or spiral");
  srf->add_option("--density", f_density,
                  "sample fraction (contours/random) or path ratio rho (spiral)");
  srf->add_option("--alpha2", fspec.alpha2, "second-order weight");
  srf->add_option("--alpha3", fspec.alpha3, "third-order weight");
  srf->add_option("--eta", fspec.eta, "data fidelity weight");
  srf->add_option("--mu", fspec.mu, "direction TV weight");
  srf->add_option("--zeta", fspec.zeta, "direction alignment weight");
  srf->add_option("--outer", fspec.outer, "alternating u/v passes");
  srf->add_option("--iters", fspec.inner, "primal-dual iterations per u pass");
  srf->add_option("--v-iters", fspec.v_inner, "primal-dual iterations per v pass");
  srf->add_option("--export-v", f_export_v, "CSV prefix for the direction field");

  CLI11_PARSE(app, argc, argv);

  try {
    if (den->parsed()) {
      dspec.a = parse_orders(d_orders);
      apply_b2(dspec, d_b2);
      if (dspec.accelerated && (dspec.a[1] > 0 || dspec.a[2] > 0))
        throw error("--accelerate requires a first-order-only model (orders a,0,0)");
      dspec.sigma_rho.clear();
      for (std::size_t i = 0; i < std::max(d_sigma.size(), d_rho.size()); ++i)
        dspec.sigma_rho.emplace_back(d_sigma[std::min(i, d_sigma.size() - 1)],
                                     d_rho[std::min(i, d_rho.size() - 1)]);
      return cmd_denoise(dc, dspec, d_export_v, d_export_beta);
    }
    if (sgl->parsed()) {
      sspec.directional.clear();
      std::stringstream ws(s_weights);
      std::string tok;
      while (std::getline(ws, tok, ',')) {
        if (tok != "I" && tok != "M") throw error("--weights entries must be I or M");
        sspec.directional.push_back(tok == "M");
      }
      sspec.alpha.clear();
      std::stringstream as(s_alpha);
      while (std::getline(as, tok, ',')) sspec.alpha.push_back(std::stod(tok));
      if (s_b2 == "vary")
        sspec.policy = BetaPolicy::Varying;
      else {
        sspec.policy = BetaPolicy::Fixed;
        sspec.beta = std::stod(s_b2);
      }
      return cmd_denoise_single(sc, sspec);
    }
    if (zoom->parsed()) {
      zspec.a = parse_orders(z_orders);
      JointModelSpec tmp;
      apply_b2(tmp, z_b2);
      zspec.policy = tmp.policy;
      zspec.beta = tmp.beta;
      return cmd_zoom(zc, zspec);
    }
    if (srf->parsed()) {
      if (!f_samples.empty() && !f_mask_mode.empty())
        throw error("--samples and --mask-mode are mutually exclusive");
      return cmd_surface(fc, fspec, f_samples, f_mask_mode, f_density, f_export_v);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
