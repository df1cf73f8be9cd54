#include "twoplayer/plant_io.hpp"

#include <fstream>
#include <sstream>

#include "twoplayer/errors.hpp"
#include "twoplayer/sysmodel.hpp"

namespace twoplayer {

using nlohmann::json;

json matrix_to_json(const Mat& M) {
    json rows = json::array();
    for (Index i = 0; i < M.rows(); ++i) {
        json row = json::array();
        for (Index j = 0; j < M.cols(); ++j) row.push_back(M(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

Mat matrix_from_json(const json& j, const std::string& key, Index cols_hint) {
    auto bad = [&key](const std::string& why) { throw InputError("key '" + key + "': " + why); };
    if (!j.is_array()) bad("expected an array of rows");
    const Index r = static_cast<Index>(j.size());
    if (r == 0) return Mat::Zero(0, cols_hint);
    if (!j[0].is_array()) bad("expected an array of rows");
    const Index c = static_cast<Index>(j[0].size());
    Mat M(r, c);
    for (Index i = 0; i < r; ++i) {
        const json& row = j[i];
        if (!row.is_array() || static_cast<Index>(row.size()) != c) {
            std::ostringstream os;
            os << "row " << i << " has " << (row.is_array() ? row.size() : 0) << " entries, expected "
               << c;
            bad(os.str());
        }
        for (Index k = 0; k < c; ++k) {
            if (!row[k].is_number()) bad("non-numeric entry");
            M(i, k) = row[k].get<double>();
        }
    }
    return M;
}

namespace {

Split split_from_json(const json& parts, const char* name) {
    if (!parts.contains(name)) throw InputError(std::string("partitions: missing key '") + name + "'");
    const json& s = parts.at(name);
    if (!s.is_array() || s.size() != 2 || !s[0].is_number_integer() || !s[1].is_number_integer())
        throw InputError(std::string("partitions: key '") + name + "' must be two integers");
    return {s[0].get<Index>(), s[1].get<Index>()};
}

const json& require(const json& j, const char* key) {
    if (!j.contains(key)) throw InputError(std::string("missing key '") + key + "'");
    return j.at(key);
}

}  // namespace

TwoPlayerPlant plant_from_json(const json& j) {
    if (!j.is_object()) throw InputError("plant file must contain a JSON object");
    const json& parts = require(j, "partitions");
    if (!parts.is_object()) throw InputError("key 'partitions' must be an object");

    TwoPlayerPlant p;
    p.A = matrix_from_json(require(j, "A"), "A");
    const Index n = p.A.rows();
    p.B1 = matrix_from_json(require(j, "B1"), "B1");
    p.B2 = matrix_from_json(require(j, "B2"), "B2");
    p.C1 = matrix_from_json(require(j, "C1"), "C1", n);
    p.C2 = matrix_from_json(require(j, "C2"), "C2", n);
    p.D12 = matrix_from_json(require(j, "D12"), "D12", p.B2.cols());
    p.D21 = matrix_from_json(require(j, "D21"), "D21", p.B1.cols());
    for (const char* key : {"D11", "D22"}) {
        if (!j.contains(key)) continue;
        const Mat D = matrix_from_json(j.at(key), key);
        if (D.size() > 0 && D.cwiseAbs().maxCoeff() != 0.0)
            throw InputError(std::string("key '") + key + "' must be zero");
    }

    p.part.m = split_from_json(parts, "m");
    p.part.k = split_from_json(parts, "k");
    if (parts.contains("n")) {
        p.part.n = split_from_json(parts, "n");
    } else {
        if (p.A.rows() != p.A.cols() || p.B2.rows() != n || p.C2.cols() != n)
            throw InputError("matrices 'A', 'B2', 'C2' have inconsistent shapes");
        const StateSpace p22(p.A, p.B2, p.C2, Mat::Zero(p.C2.rows(), p.B2.cols()));
        const Triangularized t = triangularize_realization(p22, p.part.k.first, p.part.m.first);
        const Mat Ti = t.T.transpose();
        p.A = t.sys.A;
        p.B2 = t.sys.B;
        p.C2 = t.sys.C;
        p.B1 = Ti * p.B1;
        p.C1 = p.C1 * t.T;
        p.part.n = {t.n1, t.n2};
    }
    p.validate();
    return p;
}

json plant_to_json(const TwoPlayerPlant& p) {
    json j;
    j["partitions"] = {{"n", {p.part.n.first, p.part.n.second}},
                       {"m", {p.part.m.first, p.part.m.second}},
                       {"k", {p.part.k.first, p.part.k.second}}};
    j["A"] = matrix_to_json(p.A);
    j["B1"] = matrix_to_json(p.B1);
    j["B2"] = matrix_to_json(p.B2);
    j["C1"] = matrix_to_json(p.C1);
    j["C2"] = matrix_to_json(p.C2);
    j["D12"] = matrix_to_json(p.D12);
    j["D21"] = matrix_to_json(p.D21);
    return j;
}

json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open '" + path + "'");
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw InputError("'" + path + "' is not valid JSON: " + e.what());
    }
}

void write_json_file(const json& j, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot write '" + path + "'");
    out << j.dump(2) << '\n';
}

TwoPlayerPlant load_plant(const std::string& path) { return plant_from_json(read_json_file(path)); }

void save_plant(const TwoPlayerPlant& p, const std::string& path) {
    write_json_file(plant_to_json(p), path);
}

json controller_to_json(const ControllerFile& c) {
    json j;
    j["realization"] = c.realization;
    j["controller"] = {{"A", matrix_to_json(c.controller.A)},
                       {"B", matrix_to_json(c.controller.B)},
                       {"C", matrix_to_json(c.controller.C)},
                       {"D", matrix_to_json(c.controller.D)}};
    j["gains"] = {{"K", matrix_to_json(c.K)},       {"L", matrix_to_json(c.L)},
                  {"Khat", matrix_to_json(c.Khat)}, {"Lhat", matrix_to_json(c.Lhat)},
                  {"Phi", matrix_to_json(c.Phi)},   {"Psi", matrix_to_json(c.Psi)}};
    j["norms"] = {{"optimal", c.norm_optimal},
                  {"centralized", c.norm_centralized},
                  {"delta", c.delta}};
    return j;
}

ControllerFile controller_from_json(const json& j) {
    ControllerFile c;
    if (!j.is_object()) throw InputError("controller file must contain a JSON object");
    c.realization = j.value("realization", std::string("primary"));
    const json& k = require(j, "controller");
    const Mat A = matrix_from_json(require(k, "A"), "controller.A");
    const Mat D = matrix_from_json(require(k, "D"), "controller.D");
    c.controller = StateSpace(A, matrix_from_json(require(k, "B"), "controller.B", D.cols()),
                              matrix_from_json(require(k, "C"), "controller.C", A.rows()), D);
    const json& g = require(j, "gains");
    c.K = matrix_from_json(require(g, "K"), "gains.K");
    c.L = matrix_from_json(require(g, "L"), "gains.L");
    c.Khat = matrix_from_json(require(g, "Khat"), "gains.Khat");
    c.Lhat = matrix_from_json(require(g, "Lhat"), "gains.Lhat");
    c.Phi = matrix_from_json(require(g, "Phi"), "gains.Phi");
    c.Psi = matrix_from_json(require(g, "Psi"), "gains.Psi");
    const json& nm = require(j, "norms");
    c.norm_optimal = require(nm, "optimal").get<double>();
    c.norm_centralized = require(nm, "centralized").get<double>();
    c.delta = require(nm, "delta").get<double>();
    return c;
}

void save_controller(const ControllerFile& c, const std::string& path) {
    write_json_file(controller_to_json(c), path);
}

ControllerFile load_controller(const std::string& path) {
    return controller_from_json(read_json_file(path));
}

}  // namespace twoplayer
