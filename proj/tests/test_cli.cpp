#include "catch_amalgamated.hpp"
#include "helpers.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>
#include <unistd.h>

using namespace kpin;
namespace fs = std::filesystem;

namespace {

fs::path scratch() {
    static const fs::path dir = [] {
        fs::path p = fs::temp_directory_path() / ("kpin_cli_" + std::to_string(::getpid()));
        fs::create_directories(p);
        return p;
    }();
    return dir;
}

int run(const std::string& args) {
    const std::string cmd = std::string(KPIN_CLI_PATH) + " " + args + " 2>/dev/null >/dev/null";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string write(const std::string& name, const std::string& text) {
    const auto p = scratch() / name;
    std::ofstream(p) << text;
    return p.string();
}

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

const char* kTriangle = R"({"n": 3, "edges": [
  {"src": 1, "dst": 2, "w": 1.0}, {"src": 2, "dst": 3, "w": 1.0}, {"src": 3, "dst": 1, "w": 1.0}]})";

const char* kPair = R"({"n": 2, "edges": [{"src": 1, "dst": 2, "w": 1.0}], "omega": [0.0, 0.5]})";

}  // namespace

TEST_CASE("cli: usage errors exit with 2", "[cli]") {
    CHECK(run("") == 2);
    CHECK(run("frobnicate") == 2);
    CHECK(run("select") == 2);
    CHECK(run("select --graph " + (scratch() / "missing.json").string()) == 2);
    CHECK(run("select --graph " + write("bad.json", "{\"n\": 2, \"edges\": [{\"src\": 1, \"dst\": 5, \"w\": 1}]}")) == 2);
    CHECK(run("select --graph " + write("t.json", kTriangle) + " --algorithm magic") == 2);
    CHECK(run("select --graph " + write("t.json", kTriangle) + " --delta -1") == 2);
    CHECK(run("sweep --config " + write("c.json", "{\"bogus\": 1}") + " --out " + (scratch() / "x.csv").string()) == 2);
    CHECK(run("simulate --graph " + write("t.json", kTriangle) + " --inputs 9 --out " + (scratch() / "y.csv").string()) == 2);
    CHECK(run("check") == 2);
    CHECK(run("--help") == 0);
}

TEST_CASE("cli: select writes a certified selection", "[cli]") {
    const auto out = (scratch() / "sel.json").string();
    REQUIRE(run("select --graph " + write("t.json", kTriangle) + " --delta 0 --algorithm greedy --bound --out " + out) == 0);
    const auto j = json::parse(slurp(out));
    CHECK(j.at("S") == json::array({1}));
    CHECK(j.at("algorithm") == "greedy");
    CHECK(j.at("terminated_ok") == true);
    CHECK(j.at("bound").at("optimal_size") == 1);
}

TEST_CASE("cli: check reports oracle and parity", "[cli]") {
    const auto out = (scratch() / "chk.json").string();
    const auto log = (scratch() / "audit.jsonl").string();
    REQUIRE(run("check --graph " + write("t.json", kTriangle) + " --out " + out + " --audit-log " + log +
                " --audit-max 4") == 0);
    const auto j = json::parse(slurp(out));
    CHECK(j.at("lp").at("feasible") == true);
    CHECK(j.at("parity").at("verdict") == false);
    CHECK(j.at("parity").at("method") == "cycle");

    std::istringstream lines(slurp(log));
    std::string line;
    int count = 0;
    while (std::getline(lines, line)) {
        const auto e = json::parse(line);
        CHECK(e.at("parity") == true);
        CHECK(e.at("lp_feasible") == false);
        ++count;
    }
    CHECK(count > 0);
}

TEST_CASE("cli: simulate writes trajectory and diagnostics", "[cli]") {
    const auto out = (scratch() / "traj.csv").string();
    REQUIRE(run("simulate --graph " + write("p.json", kPair) + " --inputs 1 --theta0 zero --T 60 --stride 100 --out " + out) == 0);
    const auto csv = slurp(out);
    CHECK(csv.substr(0, csv.find('\n')) == "t,theta_1,theta_2");
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 62);
    const auto d = json::parse(slurp(out + ".json"));
    CHECK(d.at("frequency_sync").at("synchronized") == true);
    CHECK(d.at("phase_sync").at("synchronized") == false);
    CHECK(d.at("certified") == true);
    CHECK(d.at("bounds").at("sup_sinz_inf").get<double>() <= 0.5 + 1e-3);

    const auto th = write("th.json", "[0.0, 0.3]");
    CHECK(run("simulate --graph " + write("p.json", kPair) + " --inputs 1 --theta0 file --theta0-file " + th +
              " --T 10 --out " + out) == 0);
    const auto bad = write("th_bad.json", "[0.2, 0.3]");
    CHECK(run("simulate --graph " + write("p.json", kPair) + " --inputs 1 --theta0 file --theta0-file " + bad +
              " --T 10 --out " + out) == 2);
}

TEST_CASE("cli: sweep output is deterministic across thread counts", "[cli]") {
    const auto cfg = write("sweep.json", R"({"graph_kind": "cycle", "n": 6, "realizations": 3,
        "grid": [0.0, 0.2], "sample_count": 200, "master_seed": 5})");
    const auto a = (scratch() / "a.csv").string();
    const auto b = (scratch() / "b.csv").string();
    const auto summary = (scratch() / "summary.json").string();
    REQUIRE(run("sweep --config " + cfg + " --out " + a + " --threads 1 --summary " + summary) == 0);
    REQUIRE(run("sweep --config " + cfg + " --out " + b + " --threads 4") == 0);
    const auto ca = slurp(a);
    CHECK(ca == slurp(b));
    CHECK(ca.substr(0, ca.find('\n')) == kSweepCsvHeader);
    CHECK(std::count(ca.begin(), ca.end(), '\n') == 1 + 2 * 3 * 4);
    CHECK(json::parse(slurp(summary)).contains("points"));

    const auto js = (scratch() / "a.json").string();
    REQUIRE(run("sweep --config " + cfg + " --out " + js + " --format json") == 0);
    CHECK(parse_records_json(slurp(js)).size() == 24);
}
