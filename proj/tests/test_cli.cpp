#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "fixtures.hpp"
#include "twoplayer/cli.hpp"
#include "twoplayer/plant_io.hpp"

using namespace twoplayer;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("twoplayer_cli_" + std::to_string(reinterpret_cast<std::uintptr_t>(this)) + "_" +
                std::to_string(std::chrono::steady_clock::now().time_since_epoch().count()));
        fs::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

struct Run {
    int code;
    std::string out, err;
};

Run run(const std::vector<std::string>& args) {
    std::ostringstream out, err;
    const int code = run_cli(args, out, err);
    return {code, out.str(), err.str()};
}

std::string write_plant(const TempDir& d, const std::string& name, const TwoPlayerPlant& p) {
    const std::string f = d.file(name);
    save_plant(p, f);
    return f;
}

std::string write_text(const TempDir& d, const std::string& name, const std::string& text) {
    const std::string f = d.file(name);
    std::ofstream(f) << text;
    return f;
}

// Report without the trailing wall-time line.
std::string body(const std::string& report) {
    const auto pos = report.rfind("wall time:");
    return report.substr(0, pos);
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("check: exit codes") {
    TempDir d;
    const Run ok = run({"check", write_plant(d, "d.json", fixtures::plant_D())});
    CHECK(ok.code == 0);
    CHECK(ok.out.find("triangular_stabilizability") != std::string::npos);

    const Run u = run({"check", write_plant(d, "u.json", fixtures::plant_U())});
    CHECK(u.code == 1);
    CHECK(u.err.find("triangular_stabilizability") != std::string::npos);
    CHECK(u.err.find("no block-lower-triangular controller") != std::string::npos);
}

TEST_CASE("input errors exit 3 and name the problem") {
    TempDir d;
    nlohmann::json j = plant_to_json(fixtures::plant_D());
    j["D11"] = nlohmann::json::array({nlohmann::json::array({1.0, 0.0, 0.0, 0.0}),
                                      nlohmann::json::array({0.0, 0.0, 0.0, 0.0})});
    const std::string d11 = d.file("d11.json");
    write_json_file(j, d11);
    const Run r = run({"check", d11});
    CHECK(r.code == 3);
    CHECK(r.err.find("D11") != std::string::npos);

    nlohmann::json m = plant_to_json(fixtures::plant_D());
    m.erase("C2");
    const std::string missing = d.file("missing.json");
    write_json_file(m, missing);
    const Run rm = run({"check", missing});
    CHECK(rm.code == 3);
    CHECK(rm.err.find("C2") != std::string::npos);

    nlohmann::json s = plant_to_json(fixtures::plant_D());
    s["B2"] = nlohmann::json::array({nlohmann::json::array({1.0, 0.0})});
    const std::string shape = d.file("shape.json");
    write_json_file(s, shape);
    const Run rs = run({"check", shape});
    CHECK(rs.code == 3);
    CHECK(rs.err.find("B2") != std::string::npos);

    CHECK(run({"check", write_text(d, "bad.json", "{ not json")}).code == 3);
    CHECK(run({"check", d.file("absent.json")}).code == 3);
    CHECK(run({"frobnicate", d.file("absent.json")}).code == 3);
    CHECK(run({"synthesize", write_plant(d, "x.json", fixtures::plant_D()), "--realization", "other"})
              .code == 3);
}

TEST_CASE("synthesize: decoupled fixture and assumption failure") {
    TempDir d;
    const std::string out = d.file("k.json");
    const Run r = run({"synthesize", write_plant(d, "d.json", fixtures::plant_D()), "--out", out});
    CHECK(r.code == 0);
    const ControllerFile c = load_controller(out);
    CHECK(c.controller.states() == 4);
    CHECK(c.realization == "primary");

    CHECK(run({"synthesize", write_plant(d, "u.json", fixtures::plant_U())}).code == 1);
}

TEST_CASE("synthesize: file round trip is bitwise") {
    TempDir d;
    const std::string pf = write_plant(d, "r.json", fixtures::plant_R());
    const std::string out = d.file("k.json");
    REQUIRE(run({"synthesize", pf, "--out", out}).code == 0);
    const TwoPlayerPlant p = load_plant(pf);
    const SynthesisResult s = optimal_controller(p);
    const ControllerFile c = load_controller(out);
    CHECK(c.controller.A == s.controller.A);
    CHECK(c.controller.B == s.controller.B);
    CHECK(c.controller.C == s.controller.C);
    CHECK(c.controller.D == s.controller.D);
    CHECK(c.Khat == s.Khat);
    CHECK(c.Lhat == s.Lhat);
    CHECK(c.Phi == s.coupling.Phi);
    CHECK(c.Psi == s.coupling.Psi);

    // Writing the loaded file again reproduces it exactly.
    const std::string again = d.file("k2.json");
    save_controller(c, again);
    CHECK(read_json_file(out) == read_json_file(again));
    CHECK(load_plant(pf).A == fixtures::plant_R().A);
}

TEST_CASE("synthesize: alternative realization") {
    TempDir d;
    const std::string pf = write_plant(d, "r.json", fixtures::plant_R());
    const std::string out = d.file("alt.json");
    REQUIRE(run({"synthesize", pf, "--realization", "alternative", "--out", out}).code == 0);
    const ControllerFile c = load_controller(out);
    const SynthesisResult s = optimal_controller(load_plant(pf));
    CHECK(c.realization == "alternative");
    CHECK(c.controller.B == s.controller_alt.B);
    CHECK(markov_distance(c.controller, s.controller) <= 1e-7);
    CHECK((c.controller.B - s.controller.B).norm() > 0.0);
}

TEST_CASE("analyze reports the cost of decentralization") {
    TempDir d;
    auto values = [&](const TwoPlayerPlant& p, const std::string& name) {
        const Run r = run({"analyze", write_plant(d, name, p), "--json"});
        CHECK(r.code == 0);
        return nlohmann::json::parse(r.out)["values"];
    };
    const nlohmann::json vd = values(fixtures::plant_D(), "d.json");
    CHECK(vd["delta"].get<double>() >= 0.0);

    const nlohmann::json vg = values(fixtures::plant_degenerate(), "g.json");
    CHECK(std::abs(vg["delta"].get<double>()) <= 1e-8);

    const nlohmann::json vr = values(fixtures::plant_R(), "r.json");
    const double delta = vr["delta"].get<double>();
    CHECK(std::abs(vr["delta_trace_Y"].get<double>() - delta) <= 1e-7 * (1 + delta));
    CHECK(std::abs(vr["delta_trace_X"].get<double>() - delta) <= 1e-7 * (1 + delta));
    CHECK(std::abs(vr["delta_youla"].get<double>() - delta) <= 1e-7 * (1 + delta));
}

TEST_CASE("verify with the oracle") {
    TempDir d;
    const Run rd = run({"verify", write_plant(d, "d.json", fixtures::plant_D()), "--oracle"});
    CHECK(rd.code == 0);
    const Run rr = run({"verify", write_plant(d, "r.json", fixtures::plant_R()), "--oracle"});
    INFO(rr.out);
    CHECK(rr.code == 0);

    const Run big =
        run({"verify", write_plant(d, "big.json", fixtures::random_plant(4242, {4, 4})), "--oracle"});
    CHECK(big.code == 2);
    CHECK(big.err.find("guard") != std::string::npos);
}

TEST_CASE("reports are deterministic and json carries wall time") {
    TempDir d;
    const std::string pf = write_plant(d, "r.json", fixtures::plant_R());
    const Run a = run({"verify", pf, "--seed", "3"});
    const Run b = run({"verify", pf, "--seed", "3"});
    CHECK(a.code == 0);
    CHECK(body(a.out) == body(b.out));
    CHECK(a.out.find("wall time:") != std::string::npos);

    const Run j = run({"check", pf, "--json"});
    const nlohmann::json rep = nlohmann::json::parse(j.out);
    CHECK(rep.contains("wall_time_s"));
    CHECK(rep["status"] == "pass");
    CHECK(rep["exit_code"] == 0);
}

}  // TEST_SUITE
