#pragma once

#include <string>

#include <json.hpp>

#include "twoplayer/plant.hpp"
#include "twoplayer/synthesis.hpp"

namespace twoplayer {

// Row-major nested arrays. Doubles are written in shortest round-trip form.
nlohmann::json matrix_to_json(const Mat& M);
// `cols_hint` gives the column count for an empty array.
Mat matrix_from_json(const nlohmann::json& j, const std::string& key, Eigen::Index cols_hint = 0);

// Plant file: {"partitions": {"n": [n1, n2], "m": [...], "k": [...]},
//              "A", "B1", "B2", "C1", "C2", "D12", "D21", optional "D11", "D22"}.
// When "n" is absent the state split is found by triangularizing (A, B2, C2).
// Throws InputError naming the offending key or shape.
TwoPlayerPlant plant_from_json(const nlohmann::json& j);
nlohmann::json plant_to_json(const TwoPlayerPlant& p);
TwoPlayerPlant load_plant(const std::string& path);
void save_plant(const TwoPlayerPlant& p, const std::string& path);

struct ControllerFile {
    StateSpace controller;
    Mat K, L, Khat, Lhat, Phi, Psi;
    double norm_optimal = 0, norm_centralized = 0, delta = 0;
    std::string realization;
};

nlohmann::json controller_to_json(const ControllerFile& c);
ControllerFile controller_from_json(const nlohmann::json& j);
void save_controller(const ControllerFile& c, const std::string& path);
ControllerFile load_controller(const std::string& path);

nlohmann::json read_json_file(const std::string& path);
void write_json_file(const nlohmann::json& j, const std::string& path);

}  // namespace twoplayer
