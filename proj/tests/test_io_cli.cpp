#include <catch_amalgamated.hpp>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "lsl/io.hpp"

using namespace lsl;
namespace fs = std::filesystem;

namespace {

fs::path test_dir() {
    static fs::path dir = [] {
        fs::path d = fs::temp_directory_path() / "lsl_cli_tests";
        fs::remove_all(d);
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

int run_cli(const std::string& args) {
    const std::string cmd = std::string(LSL_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    REQUIRE(in);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::size_t count_data_rows(const fs::path& p) {
    std::ifstream in(p);
    std::string line;
    std::size_t rows = 0;
    bool header_seen = false;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        if (!header_seen) {
            header_seen = true;
            continue;
        }
        ++rows;
    }
    return rows;
}

}  // namespace

TEST_CASE("format_full round-trips doubles exactly") {
    for (double v : {1.0, -0.1, 3.14159265358979, 1e-300, 123456789.123456789}) {
        CHECK(parse_double(format_full(v)) == v);
    }
}

TEST_CASE("profile CSV round trip") {
    const StarProfile p = solve_liquid_star(1.2, 7.0, 64);
    const fs::path path = test_dir() / "roundtrip.csv";
    write_profile_csv(path.string(), p);
    const StarProfile q = read_profile_csv(path.string());
    CHECK(q.gamma == p.gamma);
    CHECK(q.kappa == p.kappa);
    CHECK(q.radius == p.radius);
    REQUIRE(q.grid.size() == p.grid.size());
    for (std::size_t i = 0; i < p.grid.size(); ++i) {
        CHECK(q.grid.nodes[i] == p.grid.nodes[i]);
        CHECK(q.rho[i] == p.rho[i]);
        CHECK(q.mass[i] == p.mass[i]);
    }
}

TEST_CASE("cli steady writes N+1 rows and pins the comment header") {
    const fs::path out = test_dir() / "steady.csv";
    const int rc = run_cli("steady --gamma 1.2 --kappa 100 --n 128 --out " + out.string());
    CHECK(rc == 0);
    CHECK(count_data_rows(out) == 129);
    const std::string text = slurp(out);
    CHECK(text.rfind("# gamma=", 0) == 0);
    CHECK(text.find("# kappa=") != std::string::npos);
    CHECK(text.find("# R=") != std::string::npos);
    CHECK(text.find("y,rho,mass") != std::string::npos);
}

TEST_CASE("cli steady rejects kappa below 1 with exit code 2 and a clear message") {
    const fs::path msg = test_dir() / "err.txt";
    const std::string cmd = std::string(LSL_CLI_PATH) +
                            " steady --gamma 1.2 --kappa 0.5 --n 64 --out /dev/null 2> " +
                            msg.string();
    const int status = std::system(cmd.c_str());
    CHECK(WEXITSTATUS(status) == 2);
    const std::string text = slurp(msg);
    CHECK(text.find("kappa") != std::string::npos);
    CHECK(text.find("exceed 1") != std::string::npos);
}

TEST_CASE("cli steady gamma=6/5 output matches a golden file built from the closed form") {
    const fs::path out = test_dir() / "golden_actual.csv";
    const int rc = run_cli("steady --gamma 1.2 --kappa 4 --n 64 --out " + out.string());
    REQUIRE(rc == 0);
    // golden data rows generated from the explicit solution, formatted with
    // the same full-precision writer
    std::ifstream in(out);
    REQUIRE(in);
    std::string line;
    std::vector<std::string> rows;
    bool header_seen = false;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        if (!header_seen) {
            header_seen = true;
            continue;
        }
        rows.push_back(line);
    }
    REQUIRE(rows.size() == 65);
    const double r_kappa = explicit_radius_six_fifths(4.0);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto cols = [&] {
            std::vector<std::string> c;
            std::stringstream ss(rows[i]);
            std::string tok;
            while (std::getline(ss, tok, ',')) c.push_back(tok);
            return c;
        }();
        REQUIRE(cols.size() == 3);
        const double y = parse_double(cols[0]);
        const double rho = parse_double(cols[1]);
        const double mass = parse_double(cols[2]);
        const double yc = std::min(y, r_kappa);
        CHECK(std::abs(rho - explicit_profile_six_fifths(4.0, yc).rho) <=
              1e-8 * explicit_profile_six_fifths(4.0, yc).rho);
        if (i > 0)
            CHECK(std::abs(mass - explicit_mass_six_fifths(4.0, yc)) <=
                  1e-8 * explicit_mass_six_fifths(4.0, yc));
    }
}

TEST_CASE("cli modes: stable vs unstable summaries, eigenfunction file present") {
    const fs::path mode_csv = test_dir() / "mode.csv";
    const fs::path summary = test_dir() / "mode.json";
    int rc = run_cli("modes --gamma 1.2 --kappa 2 --n 128 --out-mode " + mode_csv.string() +
                     " --out-summary " + summary.string());
    CHECK(rc == 0);
    {
        const auto j = nlohmann::json::parse(slurp(summary));
        CHECK(j.at("unstable").get<bool>() == false);
        CHECK_FALSE(j.contains("mu0"));
    }
    rc = run_cli("modes --gamma 1.2 --kappa 10000 --n 256 --out-mode " + mode_csv.string() +
                 " --out-summary " + summary.string());
    CHECK(rc == 0);
    {
        const auto j = nlohmann::json::parse(slurp(summary));
        CHECK(j.at("unstable").get<bool>() == true);
        CHECK(j.at("mu0").get<double>() > 0.0);
        CHECK(fs::exists(mode_csv));
        const std::string text = slurp(mode_csv);
        CHECK(text.rfind("# mu_star=", 0) == 0);
        CHECK(text.find("# growth_rate=") != std::string::npos);
        CHECK(text.find("# residual=") != std::string::npos);
        CHECK(text.find("y,chi") != std::string::npos);
    }
}

TEST_CASE("cli modes with a malformed profile path exits with code 2") {
    CHECK(run_cli("modes --profile /nonexistent/path.csv --out-mode /dev/null "
                  "--out-summary /dev/null") == 2);
    // malformed content
    const fs::path bad = test_dir() / "bad_profile.csv";
    std::ofstream(bad) << "not,a,profile\n1,2\n";
    CHECK(run_cli("modes --profile " + bad.string() +
                  " --out-mode /dev/null --out-summary /dev/null") == 2);
}

TEST_CASE("cli scaling produces a sweep CSV and verdict JSON; runs are byte-identical") {
    const fs::path csv1 = test_dir() / "sweep1.csv";
    const fs::path csv2 = test_dir() / "sweep2.csv";
    const fs::path v1 = test_dir() / "verdict1.json";
    const fs::path v2 = test_dir() / "verdict2.json";
    const std::string base = "scaling --gamma 1.2 --kappa-min 100 --kappa-max 10000 "
                             "--per-decade 3 --n-base 256 ";
    CHECK(run_cli(base + "--jobs 1 --out-csv " + csv1.string() + " --out-verdict " +
                  v1.string()) == 0);
    CHECK(run_cli(base + "--jobs 4 --out-csv " + csv2.string() + " --out-verdict " +
                  v2.string()) == 0);
    // determinism across repeated runs and worker counts (the config echo
    // records the jobs value, which is allowed to differ)
    auto strip_jobs = [](std::string text) {
        std::string out;
        std::stringstream ss(text);
        std::string line;
        while (std::getline(ss, line))
            if (line.rfind("#", 0) != 0) out += line + "\n";
        return out;
    };
    CHECK(strip_jobs(slurp(csv1)) == strip_jobs(slurp(csv2)));
    CHECK(slurp(v1) == slurp(v2));
    const auto j = nlohmann::json::parse(slurp(v1));
    CHECK(j.at("gamma").get<double>() == 1.2);
    CHECK(j.at("case_id").get<int>() == 2);
    CHECK(j.contains("slopes"));
    CHECK(j.contains("pass"));
}

TEST_CASE("cli evolve and linear write diagnostics CSVs") {
    const fs::path diag = test_dir() / "diag.csv";
    CHECK(run_cli("evolve --gamma 1.2 --kappa 4 --n 200 --t-end 0.2 --sample-dt 0.05 --out " +
                  diag.string()) == 0);
    const std::string text = slurp(diag);
    CHECK(text.find("t,norm,energy,boundary_radius,max_jacobian_dev") != std::string::npos);
    CHECK(count_data_rows(diag) == 5);  // t = 0 plus 4 samples

    const fs::path lin = test_dir() / "lin.csv";
    CHECK(run_cli("linear --gamma 1.2 --kappa 1000 --n 256 --out " + lin.string()) == 0);
    CHECK(count_data_rows(lin) >= 2);
}

TEST_CASE("cli config file supplies defaults and flags override") {
    const fs::path cfg = test_dir() / "run.json";
    std::ofstream(cfg) << R"({"gamma": 1.2, "kappa": 9.0, "n": 64, "out": ")"
                       << (test_dir() / "from_cfg.csv").string() << R"("})";
    CHECK(run_cli("steady --config " + cfg.string()) == 0);
    const std::string text = slurp(test_dir() / "from_cfg.csv");
    CHECK(text.find("# kappa=9") != std::string::npos);
    // flag overrides the file value
    CHECK(run_cli("steady --config " + cfg.string() + " --kappa 16 --out " +
                  (test_dir() / "override.csv").string()) == 0);
    const std::string text2 = slurp(test_dir() / "override.csv");
    CHECK(text2.find("# kappa=16") != std::string::npos);
}

TEST_CASE("cli respects LSL_OUT_DIR for relative outputs") {
    const fs::path root = test_dir() / "outroot";
    const std::string cmd = std::string("LSL_OUT_DIR=") + root.string() + " " + LSL_CLI_PATH +
                            " steady --gamma 1.2 --kappa 3 --n 64 --out sub/prof.csv "
                            ">/dev/null 2>&1";
    CHECK(WEXITSTATUS(std::system(cmd.c_str())) == 0);
    CHECK(fs::exists(root / "sub" / "prof.csv"));
}

TEST_CASE("cli verify lists every criterion, passes by default, fails under zero tolerance") {
    const fs::path log = test_dir() / "verify.log";
    const std::string cmd =
        std::string(LSL_CLI_PATH) + " verify --jobs 2 > " + log.string() + " 2>&1";
    const auto start = std::chrono::steady_clock::now();
    const int status = std::system(cmd.c_str());
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    CHECK(WEXITSTATUS(status) == 0);
    CHECK(seconds < 300.0);  // reduced scale fits a small runtime budget
    const std::string text = slurp(log);
    for (int i = 1; i <= 12; ++i)
        CHECK(text.find("C" + std::to_string(i) + " ") != std::string::npos);

    CHECK(run_cli("verify --tol-scale 0 --jobs 2") == 1);
}

TEST_CASE("cli rayleigh prints the exponent window") {
    const fs::path out = test_dir() / "window.json";
    CHECK(run_cli("rayleigh --gamma 1.1 --window --out " + out.string()) == 0);
    const auto j = nlohmann::json::parse(slurp(out));
    CHECK(j.at("empty").get<bool>() == false);
    CHECK(j.at("window")[0].get<double>() == Catch::Approx(2.0 - 1.0 / 0.9));
}
