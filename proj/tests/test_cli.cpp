// Drives the installed binary end to end: argv[1] is the executable path,
// argv[2] the shipped configs directory.  Checks the exit-code contract
// (0 success, 2 violated bound, 1 error), report determinism, thread
// invariance, flag/environment override precedence, and the sweep layout.
#define DOCTEST_CONFIG_IMPLEMENT
#include <doctest.h>

#include <deloc/io.hpp>

#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <string>
#include <sys/wait.h>

namespace fs = std::filesystem;
using deloc::io::read_text_file;
using deloc::io::write_text_file;

namespace {

std::string g_bin;
std::string g_cfg;
fs::path g_scratch;

struct RunResult {
    int code = -1;
    std::string out;
};

RunResult run_cmd(const std::string& cmd) {
    RunResult res;
    FILE* pipe = popen((cmd + " 2>&1").c_str(), "r");
    REQUIRE(pipe != nullptr);
    std::array<char, 4096> buf{};
    while (std::fgets(buf.data(), static_cast<int>(buf.size()), pipe) != nullptr)
        res.out += buf.data();
    int status = pclose(pipe);
    res.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return res;
}

std::string cfg(const std::string& name) { return g_cfg + "/" + name + ".json"; }

std::string out_dir(const std::string& name) { return (g_scratch / name).string(); }

// grabs the quoted value of a string field from a report
std::string json_str_field(const std::string& text, const std::string& key) {
    auto pos = text.find("\"" + key + "\": \"");
    REQUIRE(pos != std::string::npos);
    pos += key.size() + 5;
    auto end = text.find('"', pos);
    REQUIRE(end != std::string::npos);
    return text.substr(pos, end - pos);
}

} // namespace

TEST_CASE("good-scale fixture: identical bytes across reruns and thread counts") {
    auto a = run_cmd(g_bin + " good-scale --config " + cfg("good_scale_1d") +
                     " --out " + out_dir("gs_a"));
    auto b = run_cmd(g_bin + " good-scale --config " + cfg("good_scale_1d") +
                     " --out " + out_dir("gs_b"));
    auto c = run_cmd(g_bin + " good-scale --config " + cfg("good_scale_1d") +
                     " --out " + out_dir("gs_c") + " --threads 3");
    CHECK(a.code == 0);
    CHECK(b.code == 0);
    CHECK(c.code == 0);
    auto rep_a = read_text_file(out_dir("gs_a") + "/report.json");
    CHECK(rep_a == read_text_file(out_dir("gs_b") + "/report.json"));
    CHECK(rep_a == read_text_file(out_dir("gs_c") + "/report.json"));
    auto csv_a = read_text_file(out_dir("gs_a") + "/good_scale.csv");
    CHECK(csv_a == read_text_file(out_dir("gs_c") + "/good_scale.csv"));
    CHECK(rep_a.find("\"verdict\": \"meets\"") != std::string::npos);
    CHECK(json_str_field(rep_a, "seed") == "999");
    // the report remembers exactly which config produced it
    CHECK(json_str_field(rep_a, "config_fingerprint") ==
          std::to_string(deloc::io::fingerprint(read_text_file(cfg("good_scale_1d")))));
}

TEST_CASE("invalid zeta is a config error, not a violation: exit 1") {
    auto r = run_cmd(g_bin + " good-scale --config " + cfg("bad_zeta") + " --out " +
                     out_dir("bad_zeta"));
    CHECK(r.code == 1);
    CHECK(r.out.find("zeta") != std::string::npos);
}

TEST_CASE("unknown config fields are rejected with exit 1") {
    auto r = run_cmd(g_bin + " verify-delone --config " + cfg("bad_field") +
                     " --out " + out_dir("bad_field"));
    CHECK(r.code == 1);
    CHECK(r.out.find("unknown field") != std::string::npos);
}

TEST_CASE("violated separation claim exits 2 and still writes the report") {
    auto r = run_cmd(g_bin + " verify-delone --config " + cfg("verify_violation") +
                     " --out " + out_dir("verify_violation"));
    CHECK(r.code == 2);
    auto rep = read_text_file(out_dir("verify_violation") + "/report.json");
    CHECK(rep.find("\"ok\": false") != std::string::npos);
    CHECK(rep.find("\"uniform_discrete\": false") != std::string::npos);
}

TEST_CASE("valid separation claim exits 0") {
    auto r = run_cmd(g_bin + " verify-delone --config " + cfg("verify_lattice") +
                     " --out " + out_dir("verify_lattice"));
    CHECK(r.code == 0);
    auto rep = read_text_file(out_dir("verify_lattice") + "/report.json");
    CHECK(rep.find("\"ok\": true") != std::string::npos);
}

TEST_CASE("seed precedence: flag beats environment beats config") {
    auto env = run_cmd("DELOC_SEED=42 " + g_bin + " good-scale --config " +
                       cfg("good_scale_1d") + " --out " + out_dir("seed_env") +
                       " --trials 4");
    CHECK(env.code == 0);
    CHECK(json_str_field(read_text_file(out_dir("seed_env") + "/report.json"),
                         "seed") == "42");

    auto flag = run_cmd("DELOC_SEED=42 " + g_bin + " good-scale --config " +
                        cfg("good_scale_1d") + " --out " + out_dir("seed_flag") +
                        " --trials 4 --seed 7");
    CHECK(flag.code == 0);
    CHECK(json_str_field(read_text_file(out_dir("seed_flag") + "/report.json"),
                         "seed") == "7");

    // --trials override is visible in the report too
    auto rep = read_text_file(out_dir("seed_flag") + "/report.json");
    CHECK(rep.find("\"n_trials\": 4") != std::string::npos);
}

TEST_CASE("h sweep: one run per value, combined csv, second-order convergence") {
    auto r = run_cmd(g_bin + " sweep --config " + cfg("sweep_h_spectrum") +
                     " --out " + out_dir("sweep_h"));
    CHECK(r.code == 0);
    auto csv = read_text_file(out_dir("sweep_h") + "/combined.csv");
    REQUIRE(csv.rfind("axis,value,exit,lambda0,ipr0\n", 0) == 0);

    std::vector<double> lambda0;
    std::istringstream in(csv);
    std::string line;
    std::getline(in, line); // header
    while (std::getline(in, line)) {
        REQUIRE(line.rfind("h,", 0) == 0);
        auto last_col = line.rfind(',');
        auto prev_col = line.rfind(',', last_col - 1);
        lambda0.push_back(std::stod(line.substr(prev_col + 1, last_col - prev_col - 1)));
        CHECK(line.find(",0,") != std::string::npos); // exit column
    }
    REQUIRE(lambda0.size() == 3);
    // halving h divides the eigenvalue error by about four
    const double pi2 = 9.869604401089358;
    double e0 = pi2 - lambda0[0], e1 = pi2 - lambda0[1], e2 = pi2 - lambda0[2];
    CHECK(e0 / e1 == doctest::Approx(4.0).epsilon(0.15));
    CHECK(e1 / e2 == doctest::Approx(4.0).epsilon(0.15));
    // per-value artifacts live in their own subdirectories
    CHECK(fs::exists(out_dir("sweep_h") + "/h_0.03125/report.json"));
    CHECK(fs::exists(out_dir("sweep_h") + "/h_0.015625/eigen.csv"));
}

TEST_CASE("gen writes a loadable point set that verifies its own parameters") {
    auto g = run_cmd(g_bin + " gen --config " + cfg("gen_perturbed") + " --out " +
                     out_dir("gen"));
    CHECK(g.code == 0);
    REQUIRE(fs::exists(out_dir("gen") + "/points.txt"));
    REQUIRE(fs::exists(out_dir("gen") + "/extra.txt"));

    std::string vcfg = "{\n  \"kind\": \"verify-delone\",\n  \"model\": {\n"
                       "    \"dim\": 1,\n    \"geometry\": {\"kind\": \"file\", \"path\": \"" +
                       out_dir("gen") + "/points.txt\"}\n  },\n"
                       "  \"params\": {\"r\": 0.4, \"R\": 1.6}\n}\n";
    auto vpath = g_scratch / "verify_gen.json";
    write_text_file(vpath.string(), vcfg);
    auto v = run_cmd(g_bin + " verify-delone --config " + vpath.string() + " --out " +
                     out_dir("verify_gen"));
    CHECK(v.code == 0);
}

TEST_CASE("missing config file exits 1") {
    auto r = run_cmd(g_bin + " spectrum --config " + out_dir("nope.json"));
    CHECK(r.code == 1);
}

TEST_CASE("config kind must match the subcommand") {
    auto r = run_cmd(g_bin + " spectrum --config " + cfg("verify_lattice") +
                     " --out " + out_dir("mismatch"));
    CHECK(r.code == 1);
    CHECK(r.out.find("does not match") != std::string::npos);
}

int main(int argc, char** argv) {
    if (argc < 3) {
        std::fprintf(stderr, "usage: %s <deloc-binary> <configs-dir>\n", argv[0]);
        return 1;
    }
    g_bin = argv[1];
    g_cfg = argv[2];
    g_scratch = fs::temp_directory_path() /
                ("deloc_cli_" + std::to_string(static_cast<long>(getpid())));
    fs::remove_all(g_scratch);
    fs::create_directories(g_scratch);

    doctest::Context ctx;
    int rc = ctx.run();
    fs::remove_all(g_scratch);
    return rc;
}
