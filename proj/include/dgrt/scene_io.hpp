#pragma once

#include <fstream>
#include <optional>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "dgrt/scene.hpp"

namespace dgrt {

// Scene / checkpoint file (.scene.json). Field names are frozen:
//   sh_degree, f0, background, intr[], trans[], refl[], optional iteration.
// Primitive records: mu[3], rot[4] (w,x,y,z), scale[2], opacity_logit,
// sh[(deg+1)^2][3]; interface records add trans_logit and spec_logit.

namespace scene_io_detail {

inline nlohmann::json prim_to_json(const GaussianPrimitive& g) {
    nlohmann::json j;
    j["mu"] = {g.mu.x, g.mu.y, g.mu.z};
    j["rot"] = {g.rot.w, g.rot.x, g.rot.y, g.rot.z};
    j["scale"] = {g.scale.x, g.scale.y};
    j["opacity_logit"] = g.opacity_logit;
    nlohmann::json sh = nlohmann::json::array();
    for (const auto& c : g.sh) sh.push_back({c.x, c.y, c.z});
    j["sh"] = sh;
    return j;
}

inline GaussianPrimitive prim_from_json(const nlohmann::json& j, int expect_coeffs) {
    GaussianPrimitive g;
    g.mu = {j.at("mu")[0], j.at("mu")[1], j.at("mu")[2]};
    g.rot = Quat{j.at("rot")[0], j.at("rot")[1], j.at("rot")[2], j.at("rot")[3]};
    g.scale = {j.at("scale")[0], j.at("scale")[1]};
    g.opacity_logit = j.at("opacity_logit");
    for (const auto& c : j.at("sh")) g.sh.push_back(Vec3{c[0], c[1], c[2]});
    if (int(g.sh.size()) != expect_coeffs)
        throw std::runtime_error("scene: sh block size does not match sh_degree");
    return g;
}

}  // namespace scene_io_detail

inline void save_scene(const std::string& path, const DecomposedScene& scene,
                       std::optional<int> iteration = std::nullopt) {
    using scene_io_detail::prim_to_json;
    nlohmann::json j;
    j["sh_degree"] = scene.sh_degree;
    j["f0"] = scene.f0;
    j["background"] = {scene.background.x, scene.background.y, scene.background.z};
    nlohmann::json intr = nlohmann::json::array();
    for (size_t i = 0; i < scene.intr.size(); ++i) {
        nlohmann::json p = prim_to_json(scene.intr[i]);
        p["trans_logit"] = scene.intr_attr[i].trans_logit;
        p["spec_logit"] = scene.intr_attr[i].spec_logit;
        intr.push_back(p);
    }
    j["intr"] = intr;
    nlohmann::json trans = nlohmann::json::array(), refl = nlohmann::json::array();
    for (const auto& g : scene.trans) trans.push_back(prim_to_json(g));
    for (const auto& g : scene.refl) refl.push_back(prim_to_json(g));
    j["trans"] = trans;
    j["refl"] = refl;
    if (iteration) j["iteration"] = *iteration;
    std::ofstream out(path);
    if (!out) throw std::runtime_error("scene: cannot open " + path);
    out << j.dump(1) << "\n";
}

struct LoadedScene {
    DecomposedScene scene;
    std::optional<int> iteration;
};

inline LoadedScene load_scene(const std::string& path) {
    using scene_io_detail::prim_from_json;
    std::ifstream in(path);
    if (!in) throw std::runtime_error("scene: cannot open " + path);
    nlohmann::json j;
    in >> j;
    LoadedScene out;
    DecomposedScene& s = out.scene;
    s.sh_degree = j.at("sh_degree");
    s.f0 = j.at("f0");
    s.background = {j.at("background")[0], j.at("background")[1], j.at("background")[2]};
    int nc = s.sh_coeff_count();
    for (const auto& p : j.at("intr")) {
        s.intr.push_back(prim_from_json(p, nc));
        InterfaceAttributes a;
        a.trans_logit = p.at("trans_logit");
        a.spec_logit = p.at("spec_logit");
        s.intr_attr.push_back(a);
    }
    for (const auto& p : j.at("trans")) s.trans.push_back(prim_from_json(p, nc));
    for (const auto& p : j.at("refl")) s.refl.push_back(prim_from_json(p, nc));
    if (j.contains("iteration")) out.iteration = int(j.at("iteration"));
    return out;
}

}  // namespace dgrt
