#include "foggen/params.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include <openssl/evp.h>

#include "json.hpp"

namespace foggen {

using nlohmann::json;

namespace {

// Keys use the conventional parameter names from the fog literature, so
// config files read like the parameter tables they come from.
json params_to_json_obj(const PipelineParams& p) {
    json j;
    j["epsilon"] = p.epsilon;
    j["K_hat"] = p.k_hat;
    j["m"] = p.compactness;
    j["P"] = p.min_valid;
    j["lambda"] = p.valid_fraction;
    j["ransac_max_iters"] = p.ransac_max_iters;
    j["ransac_p"] = p.ransac_p;
    j["theta_factor"] = p.theta_factor;
    j["theta_hat"] = p.theta_hat;
    j["depth_floor"] = p.depth_floor;
    j["guided_r"] = p.guided_radius;
    j["guided_mu"] = p.guided_mu;
    j["dark_channel_patch"] = p.dark_channel_patch;
    j["light_top_fraction"] = p.light_top_fraction;
    j["transmission_floor"] = p.transmission_floor;
    return j;
}

}  // namespace

std::string PipelineParams::to_json() const { return params_to_json_obj(*this).dump(2); }

void PipelineParams::merge_json(const std::string& json_text) {
    const json j = json::parse(json_text);
    if (!j.is_object()) throw std::invalid_argument("params: config must be a JSON object");
    for (const auto& [key, value] : j.items()) {
        if (key == "epsilon") epsilon = value.get<double>();
        else if (key == "K_hat") k_hat = value.get<int>();
        else if (key == "m") compactness = value.get<double>();
        else if (key == "P") min_valid = value.get<int>();
        else if (key == "lambda") valid_fraction = value.get<double>();
        else if (key == "ransac_max_iters") ransac_max_iters = value.get<int>();
        else if (key == "ransac_p") ransac_p = value.get<double>();
        else if (key == "theta_factor") theta_factor = value.get<double>();
        else if (key == "theta_hat") theta_hat = value.get<double>();
        else if (key == "depth_floor") depth_floor = value.get<double>();
        else if (key == "guided_r") guided_radius = value.get<int>();
        else if (key == "guided_mu") guided_mu = value.get<double>();
        else if (key == "dark_channel_patch") dark_channel_patch = value.get<int>();
        else if (key == "light_top_fraction") light_top_fraction = value.get<double>();
        else if (key == "transmission_floor") transmission_floor = value.get<double>();
        else if (key == "seed" || key == "threads") continue;  // consumed by the CLI
        else throw std::invalid_argument("params: unknown config key \"" + key + "\"");
    }
}

PipelineParams PipelineParams::from_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("params: cannot open config file " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    PipelineParams p;
    p.merge_json(buf.str());
    return p;
}

std::string PipelineParams::sha256() const {
    const std::string canonical = params_to_json_obj(*this).dump();
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (!EVP_Digest(canonical.data(), canonical.size(), digest, &len, EVP_sha256(), nullptr))
        throw std::runtime_error("params: SHA-256 digest failed");
    static const char* hex = "0123456789abcdef";
    std::string out(len * 2, '0');
    for (unsigned int i = 0; i < len; ++i) {
        out[i * 2] = hex[digest[i] >> 4];
        out[i * 2 + 1] = hex[digest[i] & 0xF];
    }
    return out;
}

}  // namespace foggen
