#include "cli.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "seal/align.hpp"
#include "seal/bench.hpp"
#include "seal/container.hpp"
#include "seal/errors.hpp"
#include "seal/manifest.hpp"
#include "seal/oracle.hpp"
#include "seal/synth.hpp"
#include "seal/train.hpp"
#include "seal/visualize.hpp"

namespace seal::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

json num_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InvalidArgument("cannot open " + path.string() + " for writing");
  out << text;
}

struct AlignFlags {
  double sigma = 4.0;
  double sigma_x = 1.0;
  double sigma_y = 4.0;
  double lambda = 0.02;
  int window = 0;  // 0: derived from the kernel width
  int assign_steps = 2;
  int geodesic = 2;
  double epsilon = 1e-6;
  std::string mode = "bg-mrf";
  int threads = 1;

  void add(CLI::App* app) {
    app->add_option("--sigma", sigma, "Isotropic kernel width (pixels)");
    app->add_option("--sigma-x", sigma_x, "Biased kernel width along the edge");
    app->add_option("--sigma-y", sigma_y, "Biased kernel width across the edge");
    app->add_option("--lambda", lambda, "Smoothness weight");
    app->add_option("--window", window, "Search radius in pixels (default: ceil(3 sigma))");
    app->add_option("--assign-steps", assign_steps, "Assign rounds including the initial one");
    app->add_option("--geodesic", geodesic, "Neighbourhood size along the edge chain");
    app->add_option("--epsilon", epsilon, "Probability clamp");
    app->add_option("--mode", mode, "iso or bg-mrf")->check(CLI::IsMember({"iso", "bg-mrf"}));
    app->add_option("--threads", threads, "Worker threads for per-class alignment")
        ->check(CLI::PositiveNumber);
  }

  AlignMode align_mode() const { return mode == "iso" ? AlignMode::kIsotropic : AlignMode::kBiasedMrf; }

  AlignConfig config() const {
    AlignConfig cfg;
    cfg.sigma = sigma;
    cfg.sigma_x = sigma_x;
    cfg.sigma_y = sigma_y;
    cfg.lambda = lambda;
    cfg.assign_steps = assign_steps;
    cfg.geodesic_radius = geodesic;
    cfg.epsilon = epsilon;
    cfg.window_radius =
        window > 0 ? window : default_window_radius(align_mode() == AlignMode::kIsotropic ? sigma : sigma_y);
    cfg.validate(align_mode());
    return cfg;
  }
};

Image read_image(const fs::path& path) {
  const GridContainer g = read_container(path);
  if (g.dtype != GridDtype::kFloat32) throw InvalidArgument(path.string() + ": image must be an f32 container");
  return Image{static_cast<int>(g.num_planes), static_cast<int>(g.height), static_cast<int>(g.width), g.floats};
}

MultiLabelMap threshold_prob(const ProbMap& prob, double t) {
  MultiLabelMap out(prob.height(), prob.width(), prob.num_classes());
  for (int k = 0; k < prob.num_classes(); ++k) {
    for (int r = 0; r < prob.height(); ++r) {
      for (int c = 0; c < prob.width(); ++c) {
        if (prob.at(k, r, c) >= t) out.set(r, c, k);
      }
    }
  }
  return out;
}

ProbMap labels_as_prob(const MultiLabelMap& labels) {
  ProbMap prob(labels.height(), labels.width(), labels.num_classes());
  for (int k = 0; k < labels.num_classes(); ++k) {
    for (int r = 0; r < labels.height(); ++r) {
      for (int c = 0; c < labels.width(); ++c) {
        if (labels.has(r, c, k)) prob.set(k, r, c, 1.0F);
      }
    }
  }
  return prob;
}

std::string mapping_csv(const std::vector<Mapping>& mappings) {
  std::ostringstream out;
  out << "class,source_row,source_col,target_row,target_col\n";
  for (std::size_t k = 0; k < mappings.size(); ++k) {
    for (const MappingPair& p : mappings[k].pairs) {
      out << k << ',' << p.source.row << ',' << p.source.col << ',' << p.target.row << ','
          << p.target.col << '\n';
    }
  }
  return out.str();
}

// ---- align ---------------------------------------------------------------

struct AlignArgs {
  std::string prob, labels, out, mapping;
  AlignFlags flags;
};

int cmd_align(const AlignArgs& a) {
  const ProbMap prob = read_prob_map(a.prob);
  const MultiLabelMap noisy = read_labels(a.labels, prob.num_classes());
  if (noisy.height() != prob.height() || noisy.width() != prob.width()) {
    throw InvalidArgument("labels and probabilities differ in size");
  }
  std::vector<Mapping> mappings;
  const MultiLabelMap aligned =
      align_all_classes(noisy, prob, a.flags.config(), a.flags.align_mode(), &mappings, a.flags.threads);
  write_labels(aligned, a.out);
  if (!a.mapping.empty()) write_text(a.mapping, mapping_csv(mappings));
  std::size_t moved = 0, total = 0;
  for (const Mapping& m : mappings) {
    for (const MappingPair& p : m.pairs) {
      ++total;
      moved += p.source != p.target;
    }
  }
  std::cout << "aligned " << total << " edge pixels, " << moved << " moved\n";
  return kExitOk;
}

// ---- refine ----------------------------------------------------------------

struct RefineArgs {
  std::string manifest, out_dir;
  AlignFlags flags;
};

std::string relative_to(const fs::path& target, const fs::path& dir) {
  return fs::relative(fs::absolute(target), fs::absolute(dir)).generic_string();
}

int cmd_refine(const RefineArgs& a) {
  const DatasetManifest in = load_manifest(a.manifest);
  const fs::path out_dir(a.out_dir);
  fs::create_directories(out_dir);
  const AlignConfig cfg = a.flags.config();
  DatasetManifest out = in;
  out.base_dir = out_dir;
  int refined = 0, predicted = 0;
  for (std::size_t i = 0; i < in.images.size(); ++i) {
    const ManifestEntry& e = in.images[i];
    if (e.prob.empty()) throw InvalidArgument("image '" + e.id + "' has no prob map to refine against");
    const ProbMap prob = read_prob_map(in.resolve(e.prob));
    if (prob.num_classes() != in.num_classes()) {
      throw InvalidArgument("image '" + e.id + "': prob map class count differs from the manifest");
    }
    MultiLabelMap result;
    if (!e.label.empty()) {
      // Annotations present: refine them.
      result = align_all_classes(read_labels(in.resolve(e.label), in.num_classes()), prob, cfg,
                                 a.flags.align_mode(), nullptr, a.flags.threads);
      ++refined;
    } else {
      // No annotations: the prediction itself is the best estimate.
      result = threshold_prob(prob, 0.5);
      ++predicted;
    }
    const std::string name = e.id + "_refined.sebg";
    write_labels(result, out_dir / name);
    ManifestEntry& o = out.images[i];
    for (std::string* field : {&o.prob, &o.label, &o.image, &o.true_label}) {
      if (!field->empty()) *field = relative_to(in.resolve(*field), out_dir);
    }
    o.refined = name;
  }
  save_manifest(out, out_dir / "manifest.json");
  std::cout << "refined " << refined << " annotated images, thresholded " << predicted
            << " unannotated images\n";
  return kExitOk;
}

// ---- train -------------------------------------------------------------------

struct TrainArgs {
  std::string manifest, out_dir;
  int steps = 200;
  double lr = 1.0;
  std::uint64_t seed = 1;
  bool no_align = false;
  AlignFlags flags;
};

int cmd_train(const TrainArgs& a) {
  const DatasetManifest m = load_manifest(a.manifest);
  if (m.images.empty()) throw InvalidArgument("manifest lists no images");
  std::vector<TrainSample> samples;
  std::vector<std::string> ids;
  for (const ManifestEntry& e : m.images) {
    if (e.image.empty() || e.label.empty()) {
      throw InvalidArgument("image '" + e.id + "' needs both 'image' and 'label' for training");
    }
    TrainSample s;
    s.image = read_image(m.resolve(e.image));
    s.noisy = read_labels(m.resolve(e.label), m.num_classes());
    s.latent = s.noisy;
    samples.push_back(std::move(s));
    ids.push_back(e.id);
  }
  // Fixed visiting order derived from the seed.
  std::mt19937_64 rng(a.seed);
  for (std::size_t i = samples.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng() % i);
    std::swap(samples[i - 1], samples[j]);
    std::swap(ids[i - 1], ids[j]);
  }
  ConvLogisticPredictor predictor(m.num_classes(), samples.front().image.channels);
  SealStepOptions options;
  options.mode = a.flags.align_mode();
  options.align_labels = !a.no_align;
  options.threads = a.flags.threads;
  const std::vector<TrainLogEntry> log =
      train_alternating(samples, predictor, a.flags.config(), a.steps, a.lr, options);

  const fs::path out_dir(a.out_dir);
  fs::create_directories(out_dir);
  write_text(out_dir / "model.json", predictor.to_json() + "\n");
  std::ostringstream csv;
  csv << "step,image,loss_per_pixel\n";
  for (const TrainLogEntry& e : log) {
    csv << e.step << ',' << ids[static_cast<std::size_t>(e.sample)] << ',' << num(e.loss_per_pixel) << '\n';
  }
  write_text(out_dir / "train_log.csv", csv.str());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    write_labels(samples[i].latent, out_dir / (ids[i] + "_latent.sebg"));
  }
  std::cout << "trained " << a.steps << " steps";
  if (!log.empty()) std::cout << ", final loss/pixel " << num(log.back().loss_per_pixel);
  std::cout << '\n';
  return kExitOk;
}

// ---- eval --------------------------------------------------------------------

struct EvalArgs {
  std::string manifest, out_dir;
  std::string mode = "thin";
  std::string pred = "prob";
  std::string gt = "label";
  double tolerance = kToleranceSbd;
  int border_ignore = 5;
  int thresholds = 99;
};

std::string pr_svg(const DatasetManifest& m, const std::vector<PrCurve>& curves) {
  constexpr int kSize = 400;
  constexpr int kPad = 40;
  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kSize + 2 * kPad << "\" height=\""
      << kSize + 2 * kPad << "\">\n"
      << "<rect x=\"" << kPad << "\" y=\"" << kPad << "\" width=\"" << kSize << "\" height=\"" << kSize
      << "\" fill=\"white\" stroke=\"black\"/>\n"
      << "<text x=\"" << kPad + kSize / 2 << "\" y=\"" << kSize + 2 * kPad - 8
      << "\" text-anchor=\"middle\" font-size=\"12\">recall</text>\n"
      << "<text x=\"12\" y=\"" << kPad + kSize / 2 << "\" font-size=\"12\">precision</text>\n";
  for (std::size_t k = 0; k < curves.size(); ++k) {
    const Rgb c = m.classes[k].color;
    svg << "<polyline fill=\"none\" stroke=\"rgb(" << int(c[0]) << ',' << int(c[1]) << ',' << int(c[2])
        << ")\" points=\"";
    for (const PrPoint& p : curves[k].points) {
      if (!p.has_predictions) continue;
      svg << num(kPad + p.recall * kSize) << ',' << num(kPad + (1.0 - p.precision) * kSize) << ' ';
    }
    svg << "\"><title>" << m.classes[k].name << "</title></polyline>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

int cmd_eval(const EvalArgs& a) {
  const DatasetManifest m = load_manifest(a.manifest);
  BenchConfig cfg;
  cfg.mode = a.mode == "raw" ? BenchMode::kRaw : BenchMode::kThin;
  cfg.tolerance_fraction = a.tolerance;
  cfg.border_ignore = a.border_ignore;
  cfg.thresholds = default_thresholds(a.thresholds);
  cfg.validate();

  BenchAccumulator acc(m.num_classes(), cfg.thresholds);
  for (const ManifestEntry& e : m.images) {
    const std::string& gt_path = a.gt == "true_label" ? e.true_label : e.label;
    if (gt_path.empty()) throw InvalidArgument("image '" + e.id + "' has no '" + a.gt + "' entry");
    const MultiLabelMap gt = read_labels(m.resolve(gt_path), m.num_classes());
    ProbMap prob;
    if (a.pred == "prob") {
      if (e.prob.empty()) throw InvalidArgument("image '" + e.id + "' has no 'prob' entry");
      prob = read_prob_map(m.resolve(e.prob));
    } else {
      const std::string& path = a.pred == "refined" ? e.refined : e.label;
      if (path.empty()) throw InvalidArgument("image '" + e.id + "' has no '" + a.pred + "' entry");
      prob = labels_as_prob(read_labels(m.resolve(path), m.num_classes()));
    }
    if (prob.num_classes() != m.num_classes()) {
      throw InvalidArgument("image '" + e.id + "': prediction class count differs from the manifest");
    }
    acc = pr_accumulate(std::move(acc), prob, gt, cfg);
  }

  const fs::path out_dir(a.out_dir);
  fs::create_directories(out_dir);
  const MfResult mf = mf_ods(acc);
  std::vector<PrCurve> curves;
  std::ostringstream csv;
  csv << "class,threshold,precision,recall\n";
  json classes = json::array();
  double ap_sum = 0.0;
  int ap_count = 0;
  for (int k = 0; k < m.num_classes(); ++k) {
    curves.push_back(pr_curve(acc, k));
    for (const PrPoint& p : curves.back().points) {
      csv << m.classes[static_cast<std::size_t>(k)].name << ',' << num(p.threshold) << ','
          << num(p.precision) << ',' << num(p.recall) << '\n';
    }
    const auto ku = static_cast<std::size_t>(k);
    double ap = std::nan("");
    // Thinning can make recall non-monotone in the threshold; AP is only defined in Raw mode.
    if (mf.present[ku] && cfg.mode == BenchMode::kRaw) {
      ap = average_precision(curves.back());
      ap_sum += ap;
      ++ap_count;
    }
    classes.push_back({{"name", m.classes[ku].name},
                       {"mf", num_or_null(mf.per_class[ku])},
                       {"threshold", num_or_null(mf.best_threshold[ku])},
                       {"ap", num_or_null(ap)}});
  }
  json summary = {{"mode", a.mode},
                  {"tolerance", a.tolerance},
                  {"border_ignore", a.border_ignore},
                  {"images", m.images.size()},
                  {"classes", classes},
                  {"mean_mf", num_or_null(mf.mean)},
                  {"mean_ap", ap_count ? json(ap_sum / ap_count) : json(nullptr)}};
  write_text(out_dir / "pr.csv", csv.str());
  write_text(out_dir / "summary.json", summary.dump(2) + "\n");
  write_text(out_dir / "pr.svg", pr_svg(m, curves));
  std::cout << "MF(ODS) " << num(mf.mean) << ", AP " << (ap_count ? num(ap_sum / ap_count) : "n/a") << '\n';
  return kExitOk;
}

// ---- viz -------------------------------------------------------------------

struct VizArgs {
  std::string prob, labels, manifest, preset, out;
};

int cmd_viz(const VizArgs& a) {
  std::vector<Rgb> colors;
  if (!a.manifest.empty()) {
    colors = load_manifest(a.manifest).colors();
  } else if (!a.preset.empty()) {
    for (const ClassInfo& c : preset_palette(a.preset)) colors.push_back(c.color);
  } else {
    throw InvalidArgument("viz needs --manifest or --preset for class colours");
  }
  if (a.prob.empty() == a.labels.empty()) throw InvalidArgument("viz needs exactly one of --prob or --labels");
  const RgbImage img = !a.prob.empty()
                           ? visualize(read_prob_map(a.prob), colors)
                           : visualize(read_labels(a.labels, static_cast<int>(colors.size())), colors);
  write_png(img, a.out);
  std::cout << "wrote " << img.width << "x" << img.height << " image\n";
  return kExitOk;
}

// ---- synth -------------------------------------------------------------------

struct SynthArgs {
  std::string out_dir;
  SynthSpec spec;
};

int cmd_synth(const SynthArgs& a) {
  const DatasetManifest m = write_synth_dataset(a.spec, a.out_dir);
  std::cout << "wrote " << m.images.size() << " images\n";
  return kExitOk;
}

// ---- oracle ------------------------------------------------------------------

struct OracleArgs {
  int instances = 500;
  std::uint64_t seed = 1;
  std::string kernel = "both";
};

int cmd_oracle(const OracleArgs& a) {
  std::mt19937_64 rng(a.seed);
  int agree = 0;
  for (int i = 0; i < a.instances; ++i) {
    oracle::InstanceOptions opts;
    opts.biased = a.kernel == "biased" || (a.kernel == "both" && i % 2 == 1);
    if (oracle::check_label_equivalence(oracle::random_instance(rng, opts))) {
      ++agree;
    } else {
      std::cout << "instance " << i << ": alignment misses the exhaustive optimum\n";
    }
  }
  std::cout << agree << "/" << a.instances << " instances match the exhaustive optimum\n";
  if (agree != a.instances) throw InvariantViolation("alignment disagrees with exhaustive search");
  return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"Edge label alignment, training and benchmarking"};
  app.require_subcommand(1);

  AlignArgs align_args;
  CLI::App* align_cmd = app.add_subcommand("align", "Align noisy edge labels to a probability map");
  align_cmd->add_option("--prob", align_args.prob, "f32 probability container")->required();
  align_cmd->add_option("--labels", align_args.labels, "Bitfield label container")->required();
  align_cmd->add_option("--out", align_args.out, "Output aligned labels")->required();
  align_cmd->add_option("--mapping", align_args.mapping, "Optional CSV of pixel correspondences");
  align_args.flags.add(align_cmd);

  RefineArgs refine_args;
  CLI::App* refine_cmd = app.add_subcommand("refine", "Refine dataset labels (or threshold predictions)");
  refine_cmd->add_option("--manifest", refine_args.manifest)->required();
  refine_cmd->add_option("--out-dir", refine_args.out_dir)->required();
  refine_args.flags.add(refine_cmd);

  TrainArgs train_args;
  CLI::App* train_cmd = app.add_subcommand("train", "Train the built-in predictor with alternating alignment");
  train_cmd->add_option("--manifest", train_args.manifest)->required();
  train_cmd->add_option("--out-dir", train_args.out_dir)->required();
  train_cmd->add_option("--steps", train_args.steps)->check(CLI::NonNegativeNumber);
  train_cmd->add_option("--lr", train_args.lr, "Gradient step size");
  train_cmd->add_option("--seed", train_args.seed, "Seed for the sample order");
  train_cmd->add_flag("--no-align", train_args.no_align, "Train directly on the noisy labels");
  train_args.flags.add(train_cmd);

  EvalArgs eval_args;
  CLI::App* eval_cmd = app.add_subcommand("eval", "Precision/recall benchmark (MF ODS and AP)");
  eval_cmd->add_option("--manifest", eval_args.manifest)->required();
  eval_cmd->add_option("--out-dir", eval_args.out_dir)->required();
  eval_cmd->add_option("--mode", eval_args.mode)->check(CLI::IsMember({"thin", "raw"}));
  eval_cmd->add_option("--pred", eval_args.pred, "prob, refined or label")
      ->check(CLI::IsMember({"prob", "refined", "label"}));
  eval_cmd->add_option("--gt", eval_args.gt, "label or true_label")->check(CLI::IsMember({"label", "true_label"}));
  eval_cmd->add_option("--tolerance", eval_args.tolerance, "Match distance as a fraction of the diagonal");
  eval_cmd->add_option("--border-ignore", eval_args.border_ignore);
  eval_cmd->add_option("--thresholds", eval_args.thresholds, "Number of thresholds")->check(CLI::PositiveNumber);

  VizArgs viz_args;
  CLI::App* viz_cmd = app.add_subcommand("viz", "Colour-code a probability or label map as PNG");
  viz_cmd->add_option("--prob", viz_args.prob);
  viz_cmd->add_option("--labels", viz_args.labels);
  viz_cmd->add_option("--manifest", viz_args.manifest, "Take class colours from a manifest");
  viz_cmd->add_option("--preset", viz_args.preset, "sbd20 or cityscapes19");
  viz_cmd->add_option("--out", viz_args.out)->required();

  SynthArgs synth_args;
  CLI::App* synth_cmd = app.add_subcommand("synth", "Generate a synthetic dataset");
  synth_cmd->add_option("--out-dir", synth_args.out_dir)->required();
  synth_cmd->add_option("--seed", synth_args.spec.seed);
  synth_cmd->add_option("--images", synth_args.spec.num_images);
  synth_cmd->add_option("--height", synth_args.spec.height);
  synth_cmd->add_option("--width", synth_args.spec.width);
  synth_cmd->add_option("--classes", synth_args.spec.num_classes);
  synth_cmd->add_option("--cells", synth_args.spec.cells);
  synth_cmd->add_option("--jitter", synth_args.spec.jitter);
  synth_cmd->add_option("--sharpness", synth_args.spec.sharpness);

  OracleArgs oracle_args;
  CLI::App* oracle_cmd = app.add_subcommand("oracle", "Check alignment against exhaustive search");
  oracle_cmd->add_option("--instances", oracle_args.instances)->check(CLI::PositiveNumber);
  oracle_cmd->add_option("--seed", oracle_args.seed);
  oracle_cmd->add_option("--kernel", oracle_args.kernel)->check(CLI::IsMember({"iso", "biased", "both"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitInput;
  }

  try {
    if (align_cmd->parsed()) return cmd_align(align_args);
    if (refine_cmd->parsed()) return cmd_refine(refine_args);
    if (train_cmd->parsed()) return cmd_train(train_args);
    if (eval_cmd->parsed()) return cmd_eval(eval_args);
    if (viz_cmd->parsed()) return cmd_viz(viz_args);
    if (synth_cmd->parsed()) return cmd_synth(synth_args);
    if (oracle_cmd->parsed()) return cmd_oracle(oracle_args);
  } catch (const InfeasibleError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInfeasible;
  } catch (const InvariantViolation& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return kExitInternal;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const std::domain_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return kExitInternal;
  }
  return kExitInput;
}

int run_cli(const std::vector<std::string>& args) {
  std::vector<const char*> argv{"seal_cli"};
  for (const std::string& a : args) argv.push_back(a.c_str());
  return run_cli(static_cast<int>(argv.size()), argv.data());
}

}  // namespace seal::cli
