// foggen: synthesize physically-based fog on clear-weather stereo imagery.
//
// Exit codes: 0 success, 1 processing error, 2 bad arguments.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "foggen/dataset.hpp"
#include "foggen/depth_pipeline.hpp"
#include "foggen/evaluation.hpp"
#include "foggen/fog.hpp"
#include "foggen/geometry.hpp"
#include "foggen/params.hpp"
#include "foggen/png_io.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::uint64_t kDefaultSeed = 1;

// A --config JSON file provides defaults that explicit flags override; it is
// applied before flag registration so --help shows the effective values.
struct ConfigDefaults {
    foggen::PipelineParams params;
    std::uint64_t seed = kDefaultSeed;
    int threads = 0;  // 0 = all hardware threads
};

ConfigDefaults load_config_defaults(int argc, char** argv) {
    ConfigDefaults defaults;
    std::string config_path;
    for (int i = 1; i < argc; ++i) {
        const std::string_view arg = argv[i];
        if (arg == "--config" && i + 1 < argc)
            config_path = argv[i + 1];
        else if (arg.rfind("--config=", 0) == 0)
            config_path = arg.substr(9);
    }
    if (config_path.empty()) return defaults;

    std::ifstream in(config_path);
    if (!in) throw std::runtime_error("cannot open config file: " + config_path);
    json doc = json::parse(in);
    if (doc.contains("seed")) defaults.seed = doc.at("seed").get<std::uint64_t>();
    if (doc.contains("threads")) defaults.threads = doc.at("threads").get<int>();
    defaults.params.merge_json(doc.dump());
    return defaults;
}

void add_param_flags(CLI::App* cmd, foggen::PipelineParams& p, std::string& config_sink) {
    cmd->add_option("--config", config_sink,
                    "JSON config file; explicit flags override its values");
    cmd->add_option("--epsilon", p.epsilon, "Photo-consistency color distance bound")
        ->capture_default_str();
    cmd->add_option("--k-hat", p.k_hat, "Target superpixel count")
        ->capture_default_str();
    cmd->add_option("--compactness", p.compactness, "Superpixel compactness weight m")
        ->capture_default_str();
    cmd->add_option("--min-valid", p.min_valid,
                    "Reliability floor P: minimum valid-depth pixels per superpixel")
        ->capture_default_str();
    cmd->add_option("--valid-fraction", p.valid_fraction,
                    "Reliability fraction of superpixel area that must have valid depth")
        ->capture_default_str();
    cmd->add_option("--ransac-max-iters", p.ransac_max_iters,
                    "Plane-fit RANSAC iteration cap")
        ->capture_default_str();
    cmd->add_option("--ransac-p", p.ransac_p,
                    "RANSAC confidence for drawing an outlier-free sample")
        ->capture_default_str();
    cmd->add_option("--theta-factor", p.theta_factor,
                    "RANSAC inlier threshold as a fraction of the median depth")
        ->capture_default_str();
    cmd->add_option("--theta-hat", p.theta_hat,
                    "Depth outlier replacement threshold in meters")
        ->capture_default_str();
    cmd->add_option("--depth-floor", p.depth_floor,
                    "Minimum completed depth in meters")
        ->capture_default_str();
    cmd->add_option("--guided-r", p.guided_radius, "Guided filter window radius")
        ->capture_default_str();
    cmd->add_option("--guided-mu", p.guided_mu, "Guided filter regularization")
        ->capture_default_str();
    cmd->add_option("--dark-channel-patch", p.dark_channel_patch,
                    "Atmospheric-light dark-channel patch size")
        ->capture_default_str();
    cmd->add_option("--light-top-fraction", p.light_top_fraction,
                    "Fraction of brightest dark-channel pixels considered for the light")
        ->capture_default_str();
    cmd->add_option("--transmission-floor", p.transmission_floor,
                    "Lower clamp on refined transmission")
        ->capture_default_str();
}

void warn_if_below_fog_bound(double beta) {
    if (beta < foggen::kFogBetaMin)
        std::cerr << "foggen: warning: beta " << beta
                  << " is below fog bound 2.996e-3 (visibility over 1 km); "
                     "processing anyway\n";
}

void ensure_parent_dir(const fs::path& p) {
    const fs::path parent = p.parent_path();
    if (!parent.empty()) fs::create_directories(parent);
}

void write_text(const fs::path& path, const std::string& text) {
    ensure_parent_dir(path);
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot create " + path.string());
    out << text;
}

// Emits to --out when given, otherwise to stdout.
void emit(const std::string& out_path, const std::string& text) {
    if (out_path.empty())
        std::cout << text;
    else
        write_text(out_path, text);
}

int resolve_threads(int threads) {
    if (threads > 0) return threads;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? static_cast<int>(hw) : 1;
}

std::vector<std::pair<std::string, std::string>> read_pair_list(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open list file: " + path.string());
    std::vector<std::pair<std::string, std::string>> pairs;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::istringstream row(line);
        std::string image, label, extra;
        if (!(row >> image)) continue;  // blank line
        if (!(row >> label) || (row >> extra))
            throw std::runtime_error(path.string() + ":" + std::to_string(lineno) +
                                     ": expected two whitespace-separated paths");
        pairs.emplace_back(std::move(image), std::move(label));
    }
    return pairs;
}

json iou_report(const foggen::ConfusionMatrix& cm) {
    json per_class = json::object();
    const auto iou = foggen::class_iou(cm);
    for (int c = 0; c < foggen::kNumClasses; ++c)
        per_class[foggen::class_name(c)] = iou[c] ? json(*iou[c]) : json();
    json doc{{"per_class_iou", per_class},
             {"mean_iou_all", foggen::mean_iou_all(cm)},
             {"evaluated_pixels", cm.total()}};
    try {
        doc["mean_iou_frequent"] = foggen::mean_iou(cm, foggen::kFrequentClasses);
    } catch (const std::runtime_error&) {
        doc["mean_iou_frequent"] = json();
    }
    return doc;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"foggen: physically-based fog synthesis on stereo imagery"};
    app.require_subcommand(1);
    app.footer(
        "PNG conventions: disparity 16-bit (0 = hole, else (v-1)/256 px);\n"
        "depth/distance 16-bit (v = round(m*256), saturating); transmission\n"
        "16-bit (v = round(t*65535)); labels 8-bit train ids (255 = void);\n"
        "instances 16-bit (class*1000 + index).\n"
        "FOGGEN_THREADS sets the worker count when --threads is absent.\n"
        "Exit codes: 0 success, 1 processing error, 2 bad arguments.");

    ConfigDefaults defaults;
    try {
        defaults = load_config_defaults(argc, argv);
    } catch (const std::exception& e) {
        std::cerr << "foggen: error: " << e.what() << "\n";
        return 1;
    }
    std::uint64_t seed = defaults.seed;
    int threads = defaults.threads;

    // --- simulate ---------------------------------------------------------
    auto* sim = app.add_subcommand(
        "simulate", "Synthesize fog on one clear-weather stereo frame");
    foggen::PipelineParams sim_params = defaults.params;
    std::string sim_config, sim_left, sim_right, sim_disp, sim_cam, sim_out;
    std::string sim_save_t, sim_save_depth, sim_save_dist;
    double sim_beta = 0.0;
    sim->add_option("--left", sim_left, "Clear left image PNG")->required();
    sim->add_option("--right", sim_right, "Right stereo image PNG")->required();
    sim->add_option("--disparity", sim_disp, "16-bit disparity PNG")->required();
    sim->add_option("--camera", sim_cam, "Camera intrinsics JSON")->required();
    sim->add_option("--beta", sim_beta, "Attenuation coefficient, 1/m")->required();
    sim->add_option("--out", sim_out, "Output foggy PNG (sidecar JSON written next to it)")
        ->required();
    sim->add_option("--save-transmission", sim_save_t, "Also write refined t as 16-bit PNG");
    sim->add_option("--save-depth", sim_save_depth, "Also write completed depth PNG");
    sim->add_option("--save-distance", sim_save_dist, "Also write scene distance PNG");
    sim->add_option("--seed", seed, "Deterministic pipeline seed")->capture_default_str();
    add_param_flags(sim, sim_params, sim_config);
    sim->callback([&] {
        warn_if_below_fog_bound(sim_beta);
        const foggen::Image left = foggen::read_image_rgb8(sim_left);
        const foggen::Image right = foggen::read_image_rgb8(sim_right);
        const foggen::ScalarField disparity = foggen::read_disparity(sim_disp);
        const foggen::CameraRig rig = foggen::read_camera_json(sim_cam);

        const foggen::FogResult res =
            foggen::simulate_fog(left, right, disparity, rig, sim_beta, sim_params, seed);

        ensure_parent_dir(sim_out);
        foggen::write_image_rgb8(sim_out, res.foggy);
        fs::path sidecar(sim_out);
        sidecar.replace_extension(".json");
        write_text(sidecar,
                   foggen::sidecar_json(sim_beta, res.light, seed, sim_params.sha256()));
        if (!sim_save_t.empty()) {
            ensure_parent_dir(sim_save_t);
            foggen::write_transmission(sim_save_t, res.transmission);
        }
        if (!sim_save_depth.empty()) {
            ensure_parent_dir(sim_save_depth);
            foggen::write_meters(sim_save_depth, res.depth);
        }
        if (!sim_save_dist.empty()) {
            ensure_parent_dir(sim_save_dist);
            foggen::write_meters(sim_save_dist, res.distance);
        }
        std::cerr << "foggen: wrote " << sim_out << " and " << sidecar.string() << "\n";
    });

    // --- dataset ----------------------------------------------------------
    auto* ds = app.add_subcommand(
        "dataset", "Build multi-beta foggy versions of a clear-weather input tree");
    foggen::PipelineParams ds_params = defaults.params;
    std::string ds_config, ds_in, ds_out, ds_allowlist;
    std::vector<double> ds_betas = {0.005, 0.01, 0.02, 0.03, 0.06};
    ds->add_option("--input", ds_in,
                   "Input root (leftImg/, rightImg/, disparity/, camera/, optional gtFine/)")
        ->required();
    ds->add_option("--output", ds_out, "Output root (one beta_* subtree per beta)")
        ->required();
    ds->add_option("--beta", ds_betas, "Attenuation coefficients, 1/m")
        ->capture_default_str();
    ds->add_option("--overcast-allowlist", ds_allowlist,
                   "File of stems passing the manual overcast-sky screening; "
                   "others are flagged in rejects.txt");
    ds->add_option("--seed", seed, "Deterministic pipeline seed")->capture_default_str();
    ds->add_option("--threads", threads, "Worker threads (0 = all hardware threads)")
        ->envname("FOGGEN_THREADS")
        ->capture_default_str();
    add_param_flags(ds, ds_params, ds_config);
    ds->callback([&] {
        for (double beta : ds_betas) warn_if_below_fog_bound(beta);
        std::optional<std::set<std::string>> allow;
        if (!ds_allowlist.empty()) {
            std::ifstream in(ds_allowlist);
            if (!in)
                throw std::runtime_error("cannot open allowlist: " + ds_allowlist);
            allow.emplace();
            std::string stem;
            while (in >> stem) allow->insert(stem);
        }
        const foggen::BuildReport report =
            foggen::build_dataset(ds_in, ds_out, ds_betas, ds_params, seed,
                                  resolve_threads(threads), allow);
        std::cerr << "foggen: " << report.stems_found << " input image(s), "
                  << report.images_written << " foggy output(s), "
                  << report.rejects.size() << " flagged in rejects.txt\n";
        for (const std::string& err : report.errors)
            std::cerr << "foggen: error: " << err << "\n";
        if (!report.ok())
            throw std::runtime_error(std::to_string(report.errors.size()) +
                                     " image(s) failed");
    });

    // --- depth ------------------------------------------------------------
    auto* dp = app.add_subcommand(
        "depth", "Run only the depth denoising/completion stage");
    foggen::PipelineParams dp_params = defaults.params;
    std::string dp_config, dp_left, dp_right, dp_disp, dp_cam, dp_out, dp_save_dist;
    dp->add_option("--left", dp_left, "Clear left image PNG")->required();
    dp->add_option("--right", dp_right, "Right stereo image PNG")->required();
    dp->add_option("--disparity", dp_disp, "16-bit disparity PNG")->required();
    dp->add_option("--camera", dp_cam, "Camera intrinsics JSON")->required();
    dp->add_option("--out", dp_out, "Output completed-depth PNG")->required();
    dp->add_option("--save-distance", dp_save_dist, "Also write scene distance PNG");
    dp->add_option("--seed", seed, "Deterministic pipeline seed")->capture_default_str();
    add_param_flags(dp, dp_params, dp_config);
    dp->callback([&] {
        const foggen::Image left = foggen::read_image_rgb8(dp_left);
        const foggen::Image right = foggen::read_image_rgb8(dp_right);
        const foggen::ScalarField disparity = foggen::read_disparity(dp_disp);
        const foggen::CameraRig rig = foggen::read_camera_json(dp_cam);
        rig.validate(left.width, left.height);

        const foggen::ScalarField depth =
            foggen::denoise_and_complete(left, right, disparity, rig, dp_params, seed);
        ensure_parent_dir(dp_out);
        foggen::write_meters(dp_out, depth);
        if (!dp_save_dist.empty()) {
            ensure_parent_dir(dp_save_dist);
            foggen::write_meters(dp_save_dist, foggen::depth_to_distance(depth, rig));
        }
        std::cerr << "foggen: wrote " << dp_out << "\n";
    });

    // --- eval -------------------------------------------------------------
    auto* ev = app.add_subcommand(
        "eval", "Score predicted label maps against ground truth (mean IoU)");
    std::string ev_pred, ev_gt, ev_dist, ev_out;
    std::vector<double> ev_edges = {0, 20, 50, 80, 120, 160, 230, 400};
    ev->add_option("--pred", ev_pred, "Prediction PNG or directory of PNGs")->required();
    ev->add_option("--gt", ev_gt, "Ground-truth PNG or directory")->required();
    ev->add_option("--distance", ev_dist,
                   "Scene distance PNG or directory; enables distance-binned IoU");
    ev->add_option("--bins", ev_edges,
                   "Finite bin edges in meters; a final open-ended bin is appended")
        ->capture_default_str();
    ev->add_option("--out", ev_out, "Write the JSON report here instead of stdout");
    ev->callback([&] {
        std::vector<std::array<fs::path, 3>> jobs;
        if (fs::is_directory(ev_pred)) {
            if (!fs::is_directory(ev_gt))
                throw std::runtime_error("--pred is a directory but --gt is not");
            std::vector<fs::path> preds;
            for (const auto& entry : fs::directory_iterator(ev_pred))
                if (entry.is_regular_file() && entry.path().extension() == ".png")
                    preds.push_back(entry.path());
            std::sort(preds.begin(), preds.end());
            if (preds.empty())
                throw std::runtime_error("no PNG files under " + ev_pred);
            for (const fs::path& p : preds) {
                const fs::path gt = fs::path(ev_gt) / p.filename();
                if (!fs::exists(gt))
                    throw std::runtime_error("missing ground truth " + gt.string());
                fs::path dist;
                if (!ev_dist.empty()) {
                    dist = fs::path(ev_dist) / p.filename();
                    if (!fs::exists(dist))
                        throw std::runtime_error("missing distance map " + dist.string());
                }
                jobs.push_back({p, gt, dist});
            }
        } else {
            jobs.push_back({fs::path(ev_pred), fs::path(ev_gt), fs::path(ev_dist)});
        }

        std::vector<double> edges = ev_edges;
        edges.push_back(std::numeric_limits<double>::infinity());

        foggen::ConfusionMatrix cm;
        std::vector<foggen::ConfusionMatrix> bin_cms(edges.size() - 1);
        for (const auto& [pred_path, gt_path, dist_path] : jobs) {
            const foggen::LabelMap pred = foggen::read_label_map(pred_path);
            const foggen::LabelMap gt = foggen::read_label_map(gt_path);
            foggen::confusion_accumulate(pred, gt, cm);
            if (!dist_path.empty()) {
                const foggen::ScalarField dist = foggen::read_meters(dist_path);
                foggen::confusion_accumulate_binned(pred, gt, dist, edges, bin_cms);
            }
        }

        json doc = iou_report(cm);
        if (!ev_dist.empty()) {
            json bins = json::array();
            for (std::size_t b = 0; b < bin_cms.size(); ++b) {
                const bool open_ended = b + 1 == bin_cms.size();
                json bin{{"lo_m", edges[b]},
                         {"hi_m", open_ended ? json() : json(edges[b + 1])},
                         {"pixels", bin_cms[b].total()}};
                bin["mean_iou"] =
                    bin_cms[b].total() > 0 ? json(foggen::mean_iou_all(bin_cms[b])) : json();
                bins.push_back(bin);
            }
            doc["per_bin"] = bins;
        }
        emit(ev_out, doc.dump(2) + "\n");
    });

    // --- bboxes -----------------------------------------------------------
    auto* bb = app.add_subcommand(
        "bboxes", "Extract tight bounding boxes from an instance map");
    std::string bb_inst, bb_out;
    bb->add_option("--instances", bb_inst, "16-bit instance PNG")->required();
    bb->add_option("--out", bb_out, "Write the JSON list here instead of stdout");
    bb->callback([&] {
        const foggen::InstanceMap inst = foggen::read_instance_map(bb_inst);
        json boxes = json::array();
        for (const foggen::BBox& b : foggen::instances_to_bboxes(inst)) {
            boxes.push_back({{"class", foggen::class_name(b.class_id)},
                             {"class_id", b.class_id},
                             {"x_min", b.x_min},
                             {"y_min", b.y_min},
                             {"x_max", b.x_max},
                             {"y_max", b.y_max}});
        }
        emit(bb_out, boxes.dump(2) + "\n");
    });

    // --- manifest ---------------------------------------------------------
    auto* mf = app.add_subcommand(
        "manifest", "Emit a mixed labeled/pseudo-labeled training stream");
    std::string mf_labeled, mf_pseudo, mf_out;
    double mf_w = 5.0;
    mf->add_option("--labeled", mf_labeled,
                   "File of human-labeled pairs: image label per line")
        ->required();
    mf->add_option("--pseudo", mf_pseudo,
                   "File of pseudo-labeled pairs: image label per line")
        ->required();
    mf->add_option("--w", mf_w, "Pseudo-to-labeled mixing ratio")->capture_default_str();
    mf->add_option("--seed", seed, "Shuffle seed")->capture_default_str();
    mf->add_option("--out", mf_out, "Write the manifest here instead of stdout");
    mf->callback([&] {
        const auto labeled = read_pair_list(mf_labeled);
        const auto pseudo = read_pair_list(mf_pseudo);
        const foggen::SslManifest manifest =
            foggen::build_ssl_manifest(labeled, pseudo, mf_w, seed);

        std::ostringstream out;
        out << json{{"lambda", manifest.lambda},
                    {"w", manifest.w},
                    {"labeled", labeled.size()},
                    {"pseudo", pseudo.size()},
                    {"entries", manifest.entries.size()}}
                   .dump()
            << "\n";
        for (const foggen::SslEntry& e : manifest.entries) {
            out << json{{"image", e.image_path},
                        {"label", e.label_path},
                        {"source", e.transferred ? "transferred" : "human"}}
                       .dump()
                << "\n";
        }
        emit(mf_out, out.str());
    });

    // --- filter-sky -------------------------------------------------------
    auto* fsc = app.add_subcommand(
        "filter-sky",
        "Check whether the estimated atmospheric light falls on a sky pixel");
    std::string fs_image, fs_labels;
    int fs_patch = 15;
    double fs_fraction = 0.001;
    fsc->add_option("--image", fs_image, "Clear-weather image PNG")->required();
    fsc->add_option("--labels", fs_labels, "Label map PNG (train ids)")->required();
    fsc->add_option("--dark-channel-patch", fs_patch, "Dark-channel patch size")
        ->capture_default_str();
    fsc->add_option("--light-top-fraction", fs_fraction, "Candidate fraction")
        ->capture_default_str();
    fsc->callback([&] {
        const foggen::Image img = foggen::read_image_rgb8(fs_image);
        const foggen::LabelMap labels = foggen::read_label_map(fs_labels);
        const foggen::AtmosphericLight light =
            foggen::estimate_atmospheric_light(img, fs_patch, fs_fraction);
        const bool accepted = foggen::sky_criterion(light, labels);
        std::cout << json{{"accepted", accepted},
                          {"pixel", {light.px, light.py}},
                          {"label",
                           foggen::class_name(labels.at(light.px, light.py))}}
                         .dump()
                  << "\n";
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    } catch (const std::exception& e) {
        std::cerr << "foggen: error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
