#include "foggen/dataset.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <fstream>
#include <map>
#include <mutex>
#include <stdexcept>
#include <thread>
#include <unordered_set>

#include "json.hpp"

#include "foggen/depth_pipeline.hpp"
#include "foggen/geometry.hpp"
#include "foggen/png_io.hpp"
#include "foggen/rng.hpp"

namespace fs = std::filesystem;

namespace foggen {
namespace {

constexpr const char* kClassNames[kNumClasses] = {
    "road",          "sidewalk",     "building", "wall",   "fence",
    "pole",          "traffic light", "traffic sign", "vegetation", "terrain",
    "sky",           "person",       "rider",    "car",    "truck",
    "bus",           "train",        "motorcycle", "bicycle"};

void fisher_yates(std::vector<std::size_t>& v, SplitMix64& rng) {
    for (std::size_t i = v.size(); i > 1; --i)
        std::swap(v[i - 1], v[rng.next_below(static_cast<std::uint32_t>(i))]);
}

std::string format_beta(double beta) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", beta);
    return buf;
}

// Atomic publish: write/copy to a sibling temp file, then rename over the
// destination so rebuilt trees never expose partial files.
template <typename WriteFn>
void write_atomic(const fs::path& dest, WriteFn&& fn) {
    fs::path tmp = dest;
    tmp += ".tmp";
    fn(tmp);
    fs::rename(tmp, dest);
}

void copy_bytes_atomic(const fs::path& src, const fs::path& dest) {
    write_atomic(dest, [&](const fs::path& tmp) {
        fs::copy_file(src, tmp, fs::copy_options::overwrite_existing);
    });
}

}  // namespace

const char* class_name(int id) {
    if (id == kVoidId) return "void";
    if (id < 0 || id >= kNumClasses)
        throw std::invalid_argument("class_name: invalid class id");
    return kClassNames[id];
}

bool sky_criterion(const AtmosphericLight& atm, const LabelMap& labels) {
    if (atm.px < 0 || atm.px >= labels.width || atm.py < 0 || atm.py >= labels.height)
        throw std::invalid_argument("sky_criterion: pixel outside label map");
    return labels.at(atm.px, atm.py) == kSkyId;
}

std::vector<BBox> instances_to_bboxes(const InstanceMap& inst) {
    std::map<std::uint16_t, BBox> boxes;  // ordered by instance id
    for (int y = 0; y < inst.height; ++y) {
        for (int x = 0; x < inst.width; ++x) {
            const std::uint16_t id = inst.at(x, y);
            if (id < 1000) continue;
            const int cls = id / 1000;
            if (cls < kFirstInstanceClass || cls > kLastInstanceClass)
                throw std::invalid_argument(
                    "instances_to_bboxes: instance id outside instance classes");
            auto [it, fresh] = boxes.try_emplace(id, BBox{cls, x, y, x, y});
            if (!fresh) {
                it->second.x_min = std::min(it->second.x_min, x);
                it->second.y_min = std::min(it->second.y_min, y);
                it->second.x_max = std::max(it->second.x_max, x);
                it->second.y_max = std::max(it->second.y_max, y);
            }
        }
    }
    std::vector<BBox> out;
    out.reserve(boxes.size());
    for (const auto& [id, box] : boxes) out.push_back(box);
    return out;
}

DatasetStats dataset_stats(std::span<const LabelMap> labels,
                           std::span<const InstanceMap> instances) {
    DatasetStats stats;
    for (const LabelMap& map : labels) {
        for (std::uint8_t id : map.ids) {
            if (id == kVoidId)
                ++stats.void_pixels;
            else if (id < kNumClasses)
                ++stats.pixel_counts[id];
            else
                throw std::invalid_argument("dataset_stats: invalid class id");
        }
    }
    for (const InstanceMap& map : instances) {
        std::unordered_set<std::uint16_t> seen;
        for (std::uint16_t id : map.ids) {
            if (id < 1000 || !seen.insert(id).second) continue;
            const int cls = id / 1000;
            if (cls < kFirstInstanceClass || cls > kLastInstanceClass)
                throw std::invalid_argument("dataset_stats: invalid instance id");
            ++stats.instance_counts[cls];
        }
    }
    return stats;
}

SslManifest build_ssl_manifest(
    const std::vector<std::pair<std::string, std::string>>& labeled,
    const std::vector<std::pair<std::string, std::string>>& pseudo, double w,
    std::uint64_t seed) {
    if (labeled.empty()) throw std::invalid_argument("build_ssl_manifest: no labeled entries");
    if (pseudo.empty()) throw std::invalid_argument("build_ssl_manifest: no pseudo entries");
    if (!(w > 0.0)) throw std::invalid_argument("build_ssl_manifest: w must be > 0");
    for (const auto* list : {&labeled, &pseudo}) {
        std::unordered_set<std::string> paths;
        for (const auto& [img, lbl] : *list)
            if (!paths.insert(img).second)
                throw std::invalid_argument("build_ssl_manifest: duplicate path " + img);
    }

    const std::size_t l = labeled.size();
    const std::size_t u = pseudo.size();

    SslManifest manifest;
    manifest.w = w;
    manifest.lambda = (static_cast<double>(l) / static_cast<double>(u)) * w;

    std::vector<std::size_t> labeled_order(l);
    for (std::size_t i = 0; i < l; ++i) labeled_order[i] = i;
    SplitMix64 lrng(hash_combine(seed, 0));
    fisher_yates(labeled_order, lrng);

    // Pseudo entries are drawn from per-epoch permutations so the stream is
    // without replacement until the pool is exhausted.
    std::vector<std::size_t> pool(u);
    std::size_t pool_pos = u;  // forces a shuffle on first draw
    std::uint64_t epoch = 0;
    auto draw_pseudo = [&]() -> const std::pair<std::string, std::string>& {
        if (pool_pos == u) {
            for (std::size_t i = 0; i < u; ++i) pool[i] = i;
            SplitMix64 prng(hash_combine(seed, ++epoch));
            fisher_yates(pool, prng);
            pool_pos = 0;
        }
        return pseudo[pool[pool_pos++]];
    };

    const std::uint64_t pseudo_total = static_cast<std::uint64_t>(std::llround(
        w * static_cast<double>(l)));
    std::uint64_t pseudo_emitted = 0;
    manifest.entries.reserve(l + pseudo_total);
    for (std::size_t i = 0; i < l; ++i) {
        const auto& [img, lbl] = labeled[labeled_order[i]];
        manifest.entries.push_back({img, lbl, false});
        const std::uint64_t target = static_cast<std::uint64_t>(std::llround(
            w * static_cast<double>(i + 1)));
        while (pseudo_emitted < target) {
            const auto& [pimg, plbl] = draw_pseudo();
            manifest.entries.push_back({pimg, plbl, true});
            ++pseudo_emitted;
        }
    }
    return manifest;
}

std::string sidecar_json(double beta, const AtmosphericLight& light, std::uint64_t seed,
                         const std::string& params_sha256) {
    nlohmann::json doc{{"beta", beta},
                       {"mor_m", beta > 0.0 ? nlohmann::json(mor_from_beta(beta))
                                            : nlohmann::json()},
                       {"atmospheric_light",
                        {{"rgb", light.color}, {"pixel", {light.px, light.py}}}},
                       {"seed", seed},
                       {"params_sha256", params_sha256}};
    return doc.dump(2) + "\n";
}

BuildReport build_dataset(const fs::path& input_root, const fs::path& output_root,
                          std::span<const double> betas, const PipelineParams& params,
                          std::uint64_t seed, int threads,
                          const std::optional<std::set<std::string>>& overcast_allowlist) {
    BuildReport report;
    if (betas.empty()) throw std::invalid_argument("build_dataset: empty beta list");

    std::vector<std::string> beta_dirs;
    for (double beta : betas) {
        if (beta < 0.0) throw std::invalid_argument("build_dataset: negative beta");
        std::string name = "beta_" + format_beta(beta);
        if (std::find(beta_dirs.begin(), beta_dirs.end(), name) != beta_dirs.end())
            throw std::invalid_argument("build_dataset: duplicate beta " + name);
        beta_dirs.push_back(std::move(name));
    }

    std::vector<std::string> stems;
    const fs::path left_dir = input_root / "leftImg";
    if (fs::is_directory(left_dir)) {
        for (const auto& entry : fs::directory_iterator(left_dir))
            if (entry.is_regular_file() && entry.path().extension() == ".png")
                stems.push_back(entry.path().stem().string());
    }
    std::sort(stems.begin(), stems.end());
    report.stems_found = static_cast<int>(stems.size());
    if (stems.empty()) {
        report.errors.push_back("no input images under " + left_dir.string());
        return report;
    }

    fs::create_directories(output_root);
    for (const std::string& dir : beta_dirs) fs::create_directories(output_root / dir);

    const std::string params_hash = params.sha256();
    std::mutex mu;
    std::atomic<std::size_t> next{0};
    std::atomic<int> written{0};

    auto process_stem = [&](const std::string& stem) {
        const fs::path left_path = left_dir / (stem + ".png");
        const fs::path right_path = input_root / "rightImg" / (stem + ".png");
        const fs::path disp_path = input_root / "disparity" / (stem + ".png");
        const fs::path cam_path = input_root / "camera" / (stem + ".json");
        const fs::path label_path =
            input_root / "gtFine" / (stem + "_labelTrainIds.png");
        const fs::path inst_path = input_root / "gtFine" / (stem + "_instanceIds.png");

        for (const fs::path* p : {&right_path, &disp_path, &cam_path})
            if (!fs::exists(*p)) throw std::runtime_error("missing file " + p->string());

        const Image left = read_image_rgb8(left_path);
        const Image right = read_image_rgb8(right_path);
        const ScalarField disparity = read_disparity(disp_path);
        const CameraRig rig = read_camera_json(cam_path);
        rig.validate(left.width, left.height);
        if (!left.same_size(right) || disparity.width != left.width ||
            disparity.height != left.height)
            throw std::runtime_error("input dimension mismatch");

        const std::uint64_t image_seed =
            hash_combine(seed, fnv1a64(stem.data(), stem.size()));

        // One depth pass per image; only the transmission/compositing stages
        // depend on beta.
        const ScalarField depth =
            denoise_and_complete(left, right, disparity, rig, params, image_seed);
        const ScalarField distance = depth_to_distance(depth, rig);
        const AtmosphericLight light = estimate_atmospheric_light(
            left, params.dark_channel_patch, params.light_top_fraction);

        std::optional<LabelMap> labels;
        if (fs::exists(label_path)) {
            labels = read_label_map(label_path);
            if (labels->width != left.width || labels->height != left.height)
                throw std::runtime_error("label map dimension mismatch");
        }

        std::vector<std::pair<std::string, std::string>> local_rejects;
        if (overcast_allowlist && !overcast_allowlist->count(stem))
            local_rejects.emplace_back(stem, "not_in_allowlist");
        if (labels && !sky_criterion(light, *labels))
            local_rejects.emplace_back(stem, "sky_criterion");

        for (std::size_t bi = 0; bi < betas.size(); ++bi) {
            const double beta = betas[bi];
            const fs::path out_dir = output_root / beta_dirs[bi];

            const ScalarField t_hat = transmission_from_distance(distance, beta);
            const ScalarField t =
                refine_transmission(t_hat, left, params.guided_radius, params.guided_mu,
                                    params.transmission_floor);
            const Image foggy = composite_fog(left, t, light.color);

            write_atomic(out_dir / (stem + "_foggy.png"),
                         [&](const fs::path& tmp) { write_image_rgb8(tmp, foggy); });

            const std::string sidecar = sidecar_json(beta, light, image_seed, params_hash);
            write_atomic(out_dir / (stem + "_foggy.json"), [&](const fs::path& tmp) {
                std::ofstream out(tmp);
                if (!out) throw std::runtime_error("cannot create " + tmp.string());
                out << sidecar;
            });

            if (fs::exists(label_path))
                copy_bytes_atomic(label_path, out_dir / label_path.filename());
            if (fs::exists(inst_path))
                copy_bytes_atomic(inst_path, out_dir / inst_path.filename());
            ++written;
        }

        if (!local_rejects.empty()) {
            std::lock_guard lock(mu);
            report.rejects.insert(report.rejects.end(), local_rejects.begin(),
                                  local_rejects.end());
        }
    };

    const int workers = std::clamp<int>(threads, 1, static_cast<int>(stems.size()));
    auto worker = [&] {
        while (true) {
            const std::size_t i = next.fetch_add(1);
            if (i >= stems.size()) return;
            try {
                process_stem(stems[i]);
            } catch (const std::exception& e) {
                std::lock_guard lock(mu);
                report.errors.push_back(stems[i] + ": " + e.what());
            }
        }
    };
    if (workers == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (int i = 0; i < workers; ++i) pool.emplace_back(worker);
        for (std::thread& t : pool) t.join();
    }

    report.images_written = written.load();
    std::sort(report.errors.begin(), report.errors.end());
    std::sort(report.rejects.begin(), report.rejects.end());

    write_atomic(output_root / "rejects.txt", [&](const fs::path& tmp) {
        std::ofstream out(tmp);
        if (!out) throw std::runtime_error("cannot create " + tmp.string());
        for (const auto& [stem, reason] : report.rejects)
            out << stem << '\t' << reason << '\n';
    });
    return report;
}

}  // namespace foggen
