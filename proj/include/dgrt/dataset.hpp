#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "dgrt/optim.hpp"
#include "dgrt/pfm.hpp"
#include "dgrt/png_io.hpp"
#include "dgrt/synthgen.hpp"

namespace dgrt {

// On-disk layout per scene directory:
//   cameras.json
//   view_<i>_rgb.png / rgb.pfm / depth.pfm / normal.pfm / albedo.pfm / mask.png
// cameras.json stores world-to-camera rotations, row-major.

inline nlohmann::json camera_to_json(const Camera& cam, int index, bool test) {
    nlohmann::json j;
    j["index"] = index;
    j["split"] = test ? "test" : "train";
    j["position"] = {cam.position.x, cam.position.y, cam.position.z};
    std::vector<double> rot(cam.orientation.m.begin(), cam.orientation.m.end());
    j["orientation"] = rot;
    j["fx"] = cam.fx;
    j["fy"] = cam.fy;
    j["cx"] = cam.cx;
    j["cy"] = cam.cy;
    j["width"] = cam.width;
    j["height"] = cam.height;
    return j;
}

inline Camera camera_from_json(const nlohmann::json& j) {
    Camera cam;
    cam.position = {j.at("position")[0], j.at("position")[1], j.at("position")[2]};
    for (int k = 0; k < 9; ++k) cam.orientation.m[k] = j.at("orientation")[k];
    cam.fx = j.at("fx");
    cam.fy = j.at("fy");
    cam.cx = j.at("cx");
    cam.cy = j.at("cy");
    cam.width = j.at("width");
    cam.height = j.at("height");
    return cam;
}

inline std::string view_stem(int index) { return "view_" + std::to_string(index); }

inline void write_dataset_scene(const std::string& dir, const std::vector<Camera>& cams,
                                const std::vector<GroundTruthView>& gts) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    nlohmann::json cj;
    cj["convention"] = "world_to_camera_row_major";
    nlohmann::json views = nlohmann::json::array();
    for (size_t i = 0; i < cams.size(); ++i)
        views.push_back(camera_to_json(cams[i], int(i), is_test_view(int(i))));
    cj["views"] = views;
    std::ofstream(dir + "/cameras.json") << cj.dump(1) << "\n";

    for (size_t i = 0; i < cams.size(); ++i) {
        const GroundTruthView& gt = gts[i];
        std::string stem = dir + "/" + view_stem(int(i));
        int w = gt.width, h = gt.height;
        write_png_radiance(stem + "_rgb.png", gt.rgb, w, h);
        write_pfm(stem + "_rgb.pfm", gt.rgb, w, h);
        write_pfm(stem + "_depth.pfm", gt.depth, w, h, 1);
        write_pfm(stem + "_normal.pfm", gt.normal, w, h);
        write_pfm(stem + "_albedo.pfm", gt.albedo, w, h);
        std::vector<uint8_t> mask(gt.mask.size());
        for (size_t k = 0; k < mask.size(); ++k) mask[k] = gt.mask[k] ? 255 : 0;
        write_png_gray8(stem + "_mask.png", mask, w, h);
    }
}

struct DatasetView {
    int index = 0;
    bool test = false;
    Camera cam;
    std::vector<Vec3> rgb;
    std::vector<double> depth;
    std::vector<Vec3> normal;
    std::vector<Vec3> albedo;
    std::vector<uint8_t> mask;
};

struct DatasetScene {
    std::vector<DatasetView> views;

    std::vector<int> train_indices() const {
        std::vector<int> out;
        for (size_t i = 0; i < views.size(); ++i)
            if (!views[i].test) out.push_back(int(i));
        return out;
    }
    std::vector<int> test_indices() const {
        std::vector<int> out;
        for (size_t i = 0; i < views.size(); ++i)
            if (views[i].test) out.push_back(int(i));
        return out;
    }
};

inline DatasetScene load_dataset_scene(const std::string& dir) {
    std::ifstream in(dir + "/cameras.json");
    if (!in) throw std::runtime_error("dataset: missing " + dir + "/cameras.json");
    nlohmann::json cj;
    in >> cj;
    DatasetScene ds;
    for (const auto& vj : cj.at("views")) {
        DatasetView v;
        v.index = vj.at("index");
        v.test = vj.at("split") == "test";
        v.cam = camera_from_json(vj);
        std::string stem = dir + "/" + view_stem(v.index);
        PfmImage rgb = read_pfm(stem + "_rgb.pfm");
        PfmImage depth = read_pfm(stem + "_depth.pfm");
        PfmImage normal = read_pfm(stem + "_normal.pfm");
        PfmImage albedo = read_pfm(stem + "_albedo.pfm");
        size_t npx = size_t(v.cam.width) * v.cam.height;
        v.rgb.resize(npx);
        v.normal.resize(npx);
        v.albedo.resize(npx);
        v.depth.resize(npx);
        for (size_t i = 0; i < npx; ++i) {
            v.rgb[i] = rgb.rgb(i);
            v.normal[i] = normal.rgb(i);
            v.albedo[i] = albedo.rgb(i);
            v.depth[i] = depth.data[i];
        }
        int mw = 0, mh = 0;
        auto m8 = read_png_gray8(stem + "_mask.png", mw, mh);
        v.mask.resize(npx);
        for (size_t i = 0; i < npx; ++i) v.mask[i] = m8[i] >= 128 ? 1 : 0;
        ds.views.push_back(std::move(v));
    }
    return ds;
}

// Train-view bundle with the prior maps the optimizer consumes. With noise
// off the priors are the synthetic ground truth; otherwise depth gets
// relative Gaussian noise and normals a bounded angular perturbation.
inline TrainView make_train_view(const DatasetView& v, bool noise = false,
                                 double depth_rel_sigma = 0.01, double normal_max_deg = 5.0,
                                 uint64_t seed = 0) {
    TrainView tv;
    tv.cam = v.cam;
    tv.gt_rgb = v.rgb;
    tv.prior.depth = v.depth;
    tv.prior.normal = v.normal;
    tv.prior.albedo = v.albedo;
    if (noise) {
        Rng rng(seed ^ (0x5eedULL + uint64_t(v.index) * 0x9e37ULL));
        for (auto& z : tv.prior.depth) z = std::max(0.0, z * (1.0 + depth_rel_sigma * rng.normal()));
        double max_rad = normal_max_deg * kPi / 180.0;
        for (auto& n : tv.prior.normal) {
            if (norm(n) < 0.5) continue;
            Vec3 axis = normalized(cross(n, Vec3{rng.normal(), rng.normal(), rng.normal()}));
            if (norm(axis) < 0.5) continue;
            double ang = max_rad * rng.uniform();
            // Rodrigues rotation of n about axis.
            n = n * std::cos(ang) + cross(axis, n) * std::sin(ang) +
                axis * dot(axis, n) * (1 - std::cos(ang));
        }
    }
    return tv;
}

}  // namespace dgrt
