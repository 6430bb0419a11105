#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <deloc/io.hpp>
#include <deloc/rng.hpp>

#include <cstdio>
#include <filesystem>

using namespace deloc;
namespace io = deloc::io;

TEST_CASE("doubles print exactly and round-trip") {
    CHECK(io::fmt(1.0) == "1");
    CHECK(io::fmt(0.1) == "0.1");
    CHECK(io::fmt(-2.5) == "-2.5");
    // a value with no short decimal representation survives the round trip
    double ugly = 0.1 + 0.2;
    CHECK(std::stod(io::fmt(ugly)) == ugly);
    double pi = 3.141592653589793;
    CHECK(std::stod(io::fmt(pi)) == pi);
    CHECK(io::fmt(Vec{1.5, -2.0}, 2) == "1.5 -2");
    CHECK(io::fmt(Vec{1.5, -2.0}, 1) == "1.5");
}

TEST_CASE("point sets round-trip bit-exactly through text") {
    Rng rng(512);
    for (int rep = 0; rep < 50; ++rep) {
        int dim = 1 + static_cast<int>(rng.bits() % 2);
        Box w{dim, Vec{rng.uniform(-3.0, 3.0), dim == 2 ? rng.uniform(-3.0, 3.0) : 0.0},
              rng.uniform(5.0, 20.0)};
        std::vector<Vec> pts;
        size_t n = 1 + rng.bits() % 20;
        for (size_t i = 0; i < n; ++i) {
            Vec q{w.center[0] + rng.uniform(-0.49, 0.49) * w.side,
                  dim == 2 ? w.center[1] + rng.uniform(-0.49, 0.49) * w.side : 0.0};
            pts.push_back(q);
        }
        PointSet ps;
        try {
            ps = make_point_set(dim, pts, w, std::nullopt);
        } catch (const std::invalid_argument&) {
            continue; // rare duplicate draw
        }
        auto text = io::write_point_set(ps);
        auto back = io::read_point_set(text);
        CHECK(back.dim == ps.dim);
        CHECK(back.window.side == ps.window.side);
        CHECK(back.window.center[0] == ps.window.center[0]);
        CHECK(back.window.center[1] == ps.window.center[1]);
        REQUIRE(back.points.size() == ps.points.size());
        for (size_t i = 0; i < ps.points.size(); ++i) {
            CHECK(back.points[i][0] == ps.points[i][0]);
            CHECK(back.points[i][1] == ps.points[i][1]);
        }
        CHECK_FALSE(back.params.has_value());
        // serialising again reproduces the identical text
        CHECK(io::write_point_set(back) == text);
    }
}

TEST_CASE("point set text carries the delone parameters when present") {
    Box w{1, Vec{0.0, 0.0}, 10.0};
    auto ps = generate_lattice(1, 1.0, w);
    auto text = io::write_point_set(ps);
    CHECK(text.find("r=1\n") != std::string::npos);
    CHECK(text.find("R=2\n") != std::string::npos);
    auto back = io::read_point_set(text);
    REQUIRE(back.params.has_value());
    CHECK(back.params->r == 1.0);
    CHECK(back.params->R == 2.0);
}

TEST_CASE("point set parser rejects malformed input") {
    CHECK_THROWS_AS(io::read_point_set(""), std::invalid_argument);
    CHECK_THROWS_AS(io::read_point_set("dim=3\nwindow=0,10\n"), std::invalid_argument);
    CHECK_THROWS_AS(io::read_point_set("dim=1\n0.5\n"), std::invalid_argument); // no window
    CHECK_THROWS_AS(io::read_point_set("dim=1\nwindow=0,10\nr=1\n0\n"),
                    std::invalid_argument); // r without R
    CHECK_THROWS_AS(io::read_point_set("dim=2\nwindow=0 0,10\n1 2 3\n"),
                    std::invalid_argument); // extra coordinate
    CHECK_THROWS_AS(io::read_point_set("dim=1\nwindow=0,10\nnot-a-number\n"),
                    std::invalid_argument);
    // comments and blank lines are fine
    auto ok = io::read_point_set("# patch\ndim=1\nwindow=0,10\n\n# body\n0.5\n-0.5\n");
    CHECK(ok.points.size() == 2);
}

TEST_CASE("point sets survive a save/load cycle on disk") {
    Box w{2, Vec{0.5, -0.5}, 8.0};
    auto ps = generate_lattice(2, 1.0, w);
    auto path = std::filesystem::temp_directory_path() / "deloc_io_test.points";
    io::save_point_set(ps, path.string());
    auto back = io::load_point_set(path.string());
    REQUIRE(back.points.size() == ps.points.size());
    for (size_t i = 0; i < ps.points.size(); ++i) {
        CHECK(back.points[i][0] == ps.points[i][0]);
        CHECK(back.points[i][1] == ps.points[i][1]);
    }
    std::filesystem::remove(path);
    CHECK_THROWS_AS(io::load_point_set("/nonexistent/nowhere.points"), std::runtime_error);
}

TEST_CASE("sparse export lists entries 0-based with exact values") {
    SpMat A(3, 3);
    std::vector<Eigen::Triplet<double>> t;
    t.emplace_back(0, 0, 2.5);
    t.emplace_back(1, 0, -1.0);
    t.emplace_back(2, 2, 0.1);
    A.setFromTriplets(t.begin(), t.end());
    auto text = io::write_sparse(A);
    CHECK(text == "0 0 2.5\n1 0 -1\n2 2 0.1\n");
}

TEST_CASE("mode table prints one csv row per mode") {
    std::vector<ModeProfile> modes(2);
    modes[0] = {1.5, 1e-10, 0.3, 2.0};
    modes[1] = {2.5, 2e-10, 0.4, 1.0};
    auto text = io::eigen_csv(modes);
    CHECK(text.find("index,eigenvalue,residual,ipr,decay_rate") == 0);
    CHECK(text.find("\n0,1.5,1e-10,0.3,2\n") != std::string::npos);
    CHECK(text.find("\n1,2.5,2e-10,0.4,1\n") != std::string::npos);
}

TEST_CASE("good scale csv carries the verdict fields") {
    GoodScaleReport rep;
    rep.L = 20.0;
    rep.x = Vec{0.0, 0.0};
    rep.params.energy = 0.25;
    rep.params.decay_rate = 0.1;
    rep.params.zeta = 0.5;
    rep.p_exponent = 0.35;
    rep.n_trials = 100;
    rep.n_good = 93;
    rep.p_hat = 0.93;
    rep.ci = {0.88, 0.96};
    rep.threshold = 0.9;
    rep.verdict = "inconclusive";
    rep.seed = 42;
    auto header = io::good_scale_csv_header();
    auto row = io::good_scale_csv_row(rep);
    CHECK(header.find("L,") == 0);
    // same column count
    auto count = [](const std::string& s) {
        size_t c = 1;
        for (char ch : s) if (ch == ',') ++c;
        return c;
    };
    CHECK(count(header) == count(row));
    CHECK(row.find("inconclusive") != std::string::npos);
    CHECK(row.find("0.93") != std::string::npos);
}

TEST_CASE("json objects keep insertion order and print numbers exactly") {
    io::Json j = io::Json::object();
    j["zeta"] = 0.5;
    j["alpha"] = io::Json(static_cast<long>(7));
    j["name"] = "box";
    j["flag"] = true;
    j["nothing"] = io::Json();
    io::Json arr = io::Json::array();
    arr.push_back(1.5);
    arr.push_back(io::Json::object());
    j["list"] = arr;
    auto flat = j.dump();
    CHECK(flat == R"({"zeta":0.5,"alpha":7,"name":"box","flag":true,"nothing":null,"list":[1.5,{}]})");
    auto pretty = j.dump(2);
    CHECK(pretty.find("\"zeta\": 0.5") != std::string::npos);
    CHECK(pretty.find('\n') != std::string::npos);
    // exact doubles
    io::Json d = io::Json::object();
    d["v"] = 0.1 + 0.2;
    auto s = d.dump();
    auto pos = s.find(':');
    double back = std::stod(s.substr(pos + 1));
    CHECK(back == 0.1 + 0.2);
}

TEST_CASE("json strings are escaped and non-finite numbers are quoted") {
    io::Json j = io::Json::object();
    j["text"] = "a\"b\\c\nd\te";
    j["inf"] = std::numeric_limits<double>::infinity();
    j["ninf"] = -std::numeric_limits<double>::infinity();
    j["nan"] = std::numeric_limits<double>::quiet_NaN();
    auto s = j.dump();
    CHECK(s.find(R"("a\"b\\c\nd\te")") != std::string::npos);
    CHECK(s.find(R"("inf":"inf")") != std::string::npos);
    CHECK(s.find(R"("ninf":"-inf")") != std::string::npos);
    CHECK(s.find(R"("nan":"nan")") != std::string::npos);
}

TEST_CASE("text files round-trip and missing files raise") {
    auto path = std::filesystem::temp_directory_path() / "deloc_io_text.txt";
    std::string content = "line one\nline two\n";
    io::write_text_file(path.string(), content);
    CHECK(io::read_text_file(path.string()) == content);
    std::filesystem::remove(path);
    CHECK_THROWS_AS(io::read_text_file(path.string()), std::runtime_error);
}

TEST_CASE("fingerprints are stable and sensitive") {
    auto f1 = io::fingerprint("beta=0.5");
    CHECK(f1 == io::fingerprint("beta=0.5"));
    CHECK(f1 != io::fingerprint("beta=0.6"));
    CHECK(io::fingerprint("") == 14695981039346656037ull); // FNV-1a offset basis
    // frozen reference: FNV-1a of "a"
    CHECK(io::fingerprint("a") == 12638187200555641996ull);
}
