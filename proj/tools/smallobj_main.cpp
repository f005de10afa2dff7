// smallobj: analyze COCO datasets for small-object imbalance and build
// augmented datasets by oversampling and copy-pasting small objects.
//
// Exit codes: 0 success, 1 data/runtime error, 2 usage error.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "smallobj/smallobj.hpp"

namespace fs = std::filesystem;
using namespace smallobj;

namespace {

struct GlobalOptions {
    std::optional<std::uint64_t> seed;
    unsigned jobs = default_jobs();
    std::string out;
};

std::uint64_t resolve_seed(const GlobalOptions& g) {
    if (g.seed) return *g.seed;
    std::random_device rd;
    const std::uint64_t seed =
        (static_cast<std::uint64_t>(rd()) << 32) ^ static_cast<std::uint64_t>(rd());
    std::cerr << "seed: " << seed << " (picked at random; pass --seed to reproduce)\n";
    return seed;
}

SizeBasis parse_basis(const std::string& s) {
    if (s == "mask") return SizeBasis::mask_area;
    if (s == "bbox") return SizeBasis::bbox_area;
    throw CLI::ValidationError("--size-basis", "must be 'mask' or 'bbox'");
}

BlendPolicy parse_blend(const std::string& s) {
    if (s == "hard") return {BlendPolicy::Mode::hard, 3};
    if (s.rfind("gaussian:", 0) == 0) {
        const int k = std::stoi(s.substr(9));
        return {BlendPolicy::Mode::gaussian_edge, k};
    }
    throw CLI::ValidationError("--blend", "must be 'hard' or 'gaussian:<odd k>'");
}

fs::path default_images_dir(const fs::path& annotations) {
    return annotations.parent_path() / "images";
}

Dataset load_with_warnings(const fs::path& path) {
    LoadReport rep;
    Dataset d = load_dataset(path, &rep);
    for (const auto& w : rep.warnings) std::cerr << "warning: " << w << "\n";
    return d;
}

// ---------------------------------------------------------------- analyze --

struct AnalyzeArgs {
    std::string annotations;
    std::string basis = "mask";
    double iou_threshold = 0.7;
    bool no_force_argmax = false;
    std::vector<double> strides;
    std::vector<double> base_sizes;
    std::vector<double> ratios;
};

int run_analyze(const AnalyzeArgs& a, const GlobalOptions& g) {
    AnchorConfig cfg;
    cfg.positive_iou = a.iou_threshold;
    cfg.force_argmax = !a.no_force_argmax;
    if (!a.ratios.empty()) cfg.aspect_ratios = a.ratios;
    if (!a.strides.empty() || !a.base_sizes.empty()) {
        std::vector<double> strides = a.strides;
        std::vector<double> bases = a.base_sizes;
        if (strides.empty())
            for (const auto& lv : cfg.levels) strides.push_back(lv.stride);
        if (bases.empty())
            for (const auto& lv : cfg.levels) bases.push_back(lv.base_size);
        if (strides.size() != bases.size())
            throw CLI::ValidationError("--strides", "needs one stride per base size");
        cfg.levels.clear();
        for (std::size_t i = 0; i < strides.size(); ++i)
            cfg.levels.push_back({strides[i], bases[i]});
    }
    validate_config(cfg);

    const Dataset d = load_with_warnings(a.annotations);
    const SizeClassStats stats =
        dataset_statistics(d, cfg, parse_basis(a.basis), g.jobs);
    std::cout << stats_to_table(stats);
    if (!g.out.empty()) {
        std::ofstream os(g.out, std::ios::binary);
        if (!os) throw IoError("cannot write " + g.out);
        os << stats_to_json(stats).dump(1) << "\n";
    }
    return 0;
}

// ---------------------------------------------------------------- augment --

struct AugmentArgs {
    std::string annotations;
    std::string images;
    std::string mode = "original+aug";
    int aug_ratio = 2;
    int oversample = 1;
    std::string strategy = "all";
    int copies = 1;
    double fraction = 0.5;
    double scale_min = 0.8, scale_max = 1.2;
    double rot_min = -15.0, rot_max = 15.0;
    int margin = 5;
    int attempts = 100;
    std::string overlap = "reject";
    std::string granularity = "mask";
    std::string blend = "hard";
    std::string basis = "mask";
};

PipelinePlan make_plan(const AugmentArgs& a, const GlobalOptions& g,
                       std::uint64_t seed, bool with_aug) {
    PipelinePlan plan;
    plan.oversample_ratio = a.oversample;
    plan.seed = seed;
    plan.jobs = g.jobs;
    plan.size_basis = parse_basis(a.basis);
    if (!with_aug) return plan;

    if (a.mode == "replace") plan.mode = OutputMode::replace;
    else if (a.mode == "aug-oversample") plan.mode = OutputMode::aug_oversample;
    else if (a.mode == "original+aug") plan.mode = OutputMode::original_plus_aug;
    else throw CLI::ValidationError("--mode", "must be replace, aug-oversample or original+aug");
    plan.aug_ratio = a.aug_ratio;

    AugmentationConfig cfg;
    if (a.strategy == "single") cfg.strategy = PasteStrategy::single_object;
    else if (a.strategy == "multiple") cfg.strategy = PasteStrategy::multiple_objects;
    else if (a.strategy == "all") cfg.strategy = PasteStrategy::all_objects;
    else throw CLI::ValidationError("--strategy", "must be single, multiple or all");
    cfg.copies = a.copies;
    cfg.object_fraction = a.fraction;
    cfg.scale_min = a.scale_min;
    cfg.scale_max = a.scale_max;
    cfg.rotation_min = a.rot_min;
    cfg.rotation_max = a.rot_max;
    cfg.border_margin = a.margin;
    cfg.max_placement_attempts = a.attempts;
    if (a.overlap == "reject") cfg.overlap_policy = OverlapPolicy::reject;
    else if (a.overlap == "allow") cfg.overlap_policy = OverlapPolicy::allow;
    else throw CLI::ValidationError("--overlap", "must be reject or allow");
    if (a.granularity == "mask") cfg.overlap_granularity = OverlapGranularity::mask;
    else if (a.granularity == "bbox") cfg.overlap_granularity = OverlapGranularity::bbox;
    else throw CLI::ValidationError("--overlap-granularity", "must be mask or bbox");
    cfg.blend = parse_blend(a.blend);
    cfg.size_basis = plan.size_basis;
    cfg.seed = seed;
    try {
        validate_config(cfg);
    } catch (const std::invalid_argument& e) {
        throw CLI::ValidationError("augment", e.what());
    }
    plan.aug = cfg;
    return plan;
}

int run_build(const AugmentArgs& a, const GlobalOptions& g, bool with_aug) {
    if (g.out.empty()) throw CLI::ValidationError("--out", "output directory is required");
    const std::uint64_t seed = resolve_seed(g);
    const PipelinePlan plan = make_plan(a, g, seed, with_aug);
    const fs::path images_root =
        a.images.empty() ? default_images_dir(a.annotations) : fs::path(a.images);
    const Dataset d = load_with_warnings(a.annotations);
    const BuildResult result = build_output(d, images_root, g.out, plan);
    std::cerr << "images: " << result.report.images_in << " -> "
              << result.report.images_out << ", pastes: "
              << result.report.paste_successes << "/" << result.report.paste_attempts
              << " placed\n";
    std::cout << fs::path(g.out).string() << "\n";
    return 0;
}

// ------------------------------------------------------------------ synth --

struct SynthArgs {
    int images = 20;
    int width = 256;
    int height = 256;
    int small = 3;
    int medium = 0;
    int large = 1;
    std::vector<std::string> shapes;
};

int run_synth(const SynthArgs& a, const GlobalOptions& g) {
    if (g.out.empty()) throw CLI::ValidationError("--out", "output directory is required");
    SynthSpec spec;
    spec.images = a.images;
    spec.width = a.width;
    spec.height = a.height;
    spec.small_per_image = a.small;
    spec.medium_per_image = a.medium;
    spec.large_per_image = a.large;
    if (!a.shapes.empty()) {
        spec.palette.clear();
        for (const auto& s : a.shapes) {
            if (s == "rectangle") spec.palette.push_back(ShapeKind::rectangle);
            else if (s == "ellipse") spec.palette.push_back(ShapeKind::ellipse);
            else if (s == "triangle") spec.palette.push_back(ShapeKind::triangle);
            else throw CLI::ValidationError("--shapes", "unknown shape: " + s);
        }
    }
    const std::uint64_t seed = resolve_seed(g);
    const Dataset d = generate_synthetic_corpus(spec, seed, g.out);
    std::cerr << "wrote " << d.images.size() << " images, " << d.annotations.size()
              << " annotations\n";
    std::cout << fs::path(g.out).string() << "\n";
    return 0;
}

// --------------------------------------------------------------- validate --

struct ValidateArgs {
    std::string annotations;
    bool recompute_area = false;
};

int run_validate(const ValidateArgs& a, const GlobalOptions&) {
    LoadReport load_rep;
    const Dataset d = load_dataset(a.annotations, &load_rep);
    for (const auto& w : load_rep.warnings) std::cout << "warning: " << w << "\n";
    const ValidationReport rep = validate_dataset(d, a.recompute_area);
    for (const auto& e : rep.errors) std::cout << "error: " << e << "\n";
    for (const auto& w : rep.warnings) std::cout << "warning: " << w << "\n";
    if (!rep.clean()) {
        std::cout << rep.errors.size() << " error(s)\n";
        return 1;
    }
    std::cout << "ok: " << d.images.size() << " images, " << d.annotations.size()
              << " annotations, " << d.categories.size() << " categories\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Small-object dataset statistics and copy-paste augmentation"};
    app.require_subcommand(1);
    app.set_config("--config", "", "Read options from an INI/TOML config file");
    app.allow_config_extras(false);

    GlobalOptions g;
    app.add_option("--seed", g.seed, "Seed for all randomness (default: random, printed)")
        ->envname("SMALLOBJ_SEED");
    app.add_option("--jobs", g.jobs, "Parallel worker count (output is identical for any value)")
        ->check(CLI::Range(1u, 1024u))
        ->capture_default_str();
    app.add_option("--out", g.out, "Output file (analyze) or directory (augment/oversample/synth)");

    auto* analyze = app.add_subcommand("analyze", "Size-class and anchor-matching statistics");
    AnalyzeArgs an;
    analyze->add_option("annotations", an.annotations, "COCO annotation JSON")->required();
    analyze->add_option("--size-basis", an.basis, "Area basis: mask or bbox")->capture_default_str();
    analyze->add_option("--iou-threshold", an.iou_threshold, "Positive match IoU threshold")->capture_default_str();
    analyze->add_flag("--no-force-argmax", an.no_force_argmax, "Do not force a best-IoU match per object");
    analyze->add_option("--strides", an.strides, "Anchor strides per level")->delimiter(',');
    analyze->add_option("--base-sizes", an.base_sizes, "Anchor base sizes per level")->delimiter(',');
    analyze->add_option("--ratios", an.ratios, "Anchor aspect ratios (h/w)")->delimiter(',');

    auto* augment = app.add_subcommand("augment", "Copy-paste augmentation pipeline");
    AugmentArgs au;
    augment->add_option("annotations", au.annotations, "COCO annotation JSON")->required();
    augment->add_option("--images", au.images, "Image root (default: <annotations dir>/images)");
    augment->add_option("--mode", au.mode, "replace | aug-oversample | original+aug")->capture_default_str();
    augment->add_option("--aug-ratio", au.aug_ratio, "Copies per image for aug-oversample")->check(CLI::Range(1, 16))->capture_default_str();
    augment->add_option("--oversample", au.oversample, "Pre-oversampling ratio")->check(CLI::Range(1, 64))->capture_default_str();
    augment->add_option("--strategy", au.strategy, "single | multiple | all")->capture_default_str();
    augment->add_option("--copies", au.copies, "Pastes per selected object")->capture_default_str();
    augment->add_option("--fraction", au.fraction, "Object fraction for --strategy multiple")->capture_default_str();
    augment->add_option("--scale-min", au.scale_min)->capture_default_str();
    augment->add_option("--scale-max", au.scale_max)->capture_default_str();
    augment->add_option("--rot-min", au.rot_min, "Rotation lower bound, degrees")->capture_default_str();
    augment->add_option("--rot-max", au.rot_max, "Rotation upper bound, degrees")->capture_default_str();
    augment->add_option("--margin", au.margin, "Minimum distance to image borders, px")->capture_default_str();
    augment->add_option("--attempts", au.attempts, "Placement attempts per paste")->capture_default_str();
    augment->add_option("--overlap", au.overlap, "reject | allow")->capture_default_str();
    augment->add_option("--overlap-granularity", au.granularity, "mask | bbox")->capture_default_str();
    augment->add_option("--blend", au.blend, "hard | gaussian:<odd k>")->capture_default_str();
    augment->add_option("--size-basis", au.basis, "Area basis: mask or bbox")->capture_default_str();

    auto* oversample = app.add_subcommand("oversample", "Duplicate images containing small objects");
    AugmentArgs ov;
    oversample->add_option("annotations", ov.annotations, "COCO annotation JSON")->required();
    oversample->add_option("--images", ov.images, "Image root (default: <annotations dir>/images)");
    oversample->add_option("--ratio", ov.oversample, "Oversampling ratio")->required()->check(CLI::Range(1, 64));
    oversample->add_option("--size-basis", ov.basis, "Area basis: mask or bbox")->capture_default_str();

    auto* synth = app.add_subcommand("synth", "Generate a synthetic shape corpus");
    SynthArgs sy;
    synth->add_option("--images", sy.images)->check(CLI::Range(1, 100000))->capture_default_str();
    synth->add_option("--width", sy.width)->capture_default_str();
    synth->add_option("--height", sy.height)->capture_default_str();
    synth->add_option("--small", sy.small, "Small objects per image")->capture_default_str();
    synth->add_option("--medium", sy.medium, "Medium objects per image")->capture_default_str();
    synth->add_option("--large", sy.large, "Large objects per image")->capture_default_str();
    synth->add_option("--shapes", sy.shapes, "rectangle ellipse triangle")->delimiter(',');

    auto* validate = app.add_subcommand("validate", "Check dataset invariants");
    ValidateArgs va;
    validate->add_option("annotations", va.annotations, "COCO annotation JSON")->required();
    validate->add_flag("--recompute-area", va.recompute_area,
                       "Cross-check stored areas against rasterized masks");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (analyze->parsed()) return run_analyze(an, g);
        if (augment->parsed()) return run_build(au, g, true);
        if (oversample->parsed()) return run_build(ov, g, false);
        if (synth->parsed()) return run_synth(sy, g);
        if (validate->parsed()) return run_validate(va, g);
    } catch (const CLI::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
