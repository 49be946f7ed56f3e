#include <doctest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;

namespace {

std::string binary() {
    const char* env = std::getenv("QONTROL_BIN");
    REQUIRE_MESSAGE(env != nullptr, "QONTROL_BIN must point at the qontrol binary");
    return env;
}

int run(const std::string& args) {
    const std::string cmd = binary() + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE_MESSAGE(in.good(), ("missing file: " + path.string()));
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("qontrol_test_" + std::to_string(::getpid()) + "_" +
                std::to_string(counter()));
        fs::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
    static int counter() {
        static int c = 0;
        return c++;
    }
};

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
    std::vector<std::vector<std::string>> rows;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        std::vector<std::string> fields;
        std::istringstream ls(line);
        std::string field;
        while (std::getline(ls, field, ',')) {
            fields.push_back(field);
        }
        rows.push_back(fields);
    }
    return rows;
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("analytic trajectory peaks at exactly 1 at the quarter period") {
    TempDir dir;
    const fs::path out = dir.path / "traj.csv";
    REQUIRE(run("traj --delta-e 0 --form analytic --t-end 1.0 --dt 1e-4 --out " +
                out.string()) == 0);
    const auto rows = parse_csv(slurp(out));
    CHECK(rows[0][0] == "t_over_T");
    CHECK(rows[0][6] == "p2");
    bool found = false;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        if (rows[i][0] == "0.25") {
            CHECK(rows[i][6] == "1");
            found = true;
        }
        CHECK(std::stod(rows[i][6]) <= 1.0);
    }
    CHECK(found);
    CHECK(fs::exists(out.string() + ".manifest"));
}

TEST_CASE("integrated trajectory keeps the probability sum near one") {
    TempDir dir;
    const fs::path out = dir.path / "traj.csv";
    REQUIRE(run("traj --delta-e 0 --form first --t-end 1.0 --dt 1e-4 --out " +
                out.string()) == 0);
    const auto rows = parse_csv(slurp(out));
    for (std::size_t i = 1; i < rows.size(); ++i) {
        CHECK(std::abs(std::stod(rows[i][5]) + std::stod(rows[i][6]) - 1.0) < 1e-9);
    }
}

TEST_CASE("stride thins trajectory rows") {
    TempDir dir;
    const fs::path a = dir.path / "full.csv";
    const fs::path b = dir.path / "thin.csv";
    REQUIRE(run("traj --delta-e 0 --t-end 0.25 --dt 1e-3 --out " + a.string()) == 0);
    REQUIRE(run("traj --delta-e 0 --t-end 0.25 --dt 1e-3 --stride 10 --out " +
                b.string()) == 0);
    const auto full = parse_csv(slurp(a));
    const auto thin = parse_csv(slurp(b));
    CHECK(thin.size() < full.size() / 5);
    CHECK(thin.back()[0] == full.back()[0]);  // final sample always kept
}

TEST_CASE("sweep output is byte-identical across worker counts") {
    TempDir dir;
    const fs::path w1 = dir.path / "w1.csv";
    const fs::path w4 = dir.path / "w4.csv";
    const std::string common =
        "sweep --delta-e-list 0,0.1,0.2,0.3,0.4 --thresholds 0.95,0.9,0.8,0.7 "
        "--dt 1e-3 ";
    REQUIRE(run(common + "--workers 1 --out " + w1.string()) == 0);
    REQUIRE(run(common + "--workers 4 --out " + w4.string()) == 0);
    CHECK(slurp(w1) == slurp(w4));
    const auto rows = parse_csv(slurp(w1));
    CHECK(rows[0] == std::vector<std::string>{"delta_e_over_E", "threshold", "fraction"});
    CHECK(rows.size() == 21);
}

TEST_CASE("sweep honours the extended-window flag") {
    TempDir dir;
    const fs::path out = dir.path / "ext.csv";
    REQUIRE(run("sweep --delta-e-list 0,0.2 --thresholds 0.9 --dt 1e-3 "
                "--extended-window --out " +
                out.string()) == 0);
    const auto rows = parse_csv(slurp(out));
    CHECK(rows[0].back() == "fraction_half_period");
    CHECK(rows.size() == 3);
}

TEST_CASE("effect emits the fit block on request") {
    TempDir dir;
    const fs::path out = dir.path / "effect.csv";
    REQUIRE(run("effect --delta-e 0.01 --dt 1e-4 --fit --out " + out.string()) == 0);
    const std::string text = slurp(out);
    CHECK(text.find("t_over_T,effect_percent") == 0);
    CHECK(text.find("c1=") != std::string::npos);
    CHECK(text.find("c2=") != std::string::npos);
    CHECK(text.find("c3=") != std::string::npos);
    CHECK(text.find("residual=") != std::string::npos);
    CHECK(text.find("time_unit=fraction_of_T") != std::string::npos);

    const std::string manifest = slurp(out.string() + ".manifest");
    CHECK(manifest.find("fit_c1=") != std::string::npos);
    CHECK(manifest.find("drive_rate=") != std::string::npos);
    CHECK(manifest.find("detuning_rate=") != std::string::npos);
}

TEST_CASE("series reports the radius and handles zero coupling") {
    TempDir dir;
    const fs::path out = dir.path / "coeffs.csv";
    const fs::path log = dir.path / "stdout.txt";
    std::string cmd = binary() + " series --delta-e 0 --order 80 --radius --out " +
                      out.string() + " > " + log.string() + " 2>/dev/null";
    REQUIRE(WEXITSTATUS(std::system(cmd.c_str())) == 0);
    const std::string report = slurp(log);
    CHECK(report.find("radius_over_T=") != std::string::npos);
    const double radius = std::stod(report.substr(report.find('=') + 1));
    CHECK(radius > 0.25);

    const auto rows = parse_csv(slurp(out));
    CHECK(rows[0] ==
          std::vector<std::string>{"n", "re_alpha", "im_alpha", "re_beta", "im_beta"});
    CHECK(rows.size() == 82);

    cmd = binary() + " series --delta-e 0 --coupling 0 --order 40 --radius --out " +
          out.string() + " > " + log.string() + " 2>/dev/null";
    REQUIRE(WEXITSTATUS(std::system(cmd.c_str())) == 0);
    CHECK(slurp(log).find("radius_over_T=inf") != std::string::npos);
}

TEST_CASE("config file values are applied and overridden by flags") {
    TempDir dir;
    const fs::path cfg = dir.path / "run.cfg";
    const fs::path out = dir.path / "traj.csv";
    std::ofstream(cfg) << "# canonical run\n"
                       << "delta-e=0.1\n"
                       << "method=euler\n"
                       << "t-end=0.25\n"
                       << "dt=1e-3\n"
                       << "out=" << out.string() << "\n";
    REQUIRE(run("traj --config " + cfg.string() + " --method rk4") == 0);
    const std::string manifest = slurp(out.string() + ".manifest");
    CHECK(manifest.find("method=rk4") != std::string::npos);       // flag wins
    CHECK(manifest.find("delta_e_over_E=0.1") != std::string::npos);  // file applies
    CHECK(manifest.find("t_end_over_T=0.25") != std::string::npos);
}

TEST_CASE("exit codes: invalid input, halted divergence, io failure") {
    TempDir dir;
    const fs::path out = dir.path / "x.csv";
    CHECK(run("traj --delta-e -1 --out " + out.string()) == 1);
    CHECK(run("bogus-command") == 1);
    CHECK(run("traj --delta-e 0.5 --form second --t-end 0.3 --dt 1e-4 "
              "--halt-on-divergence --out " +
              out.string()) == 2);
    // partial trajectory is still written on a halted divergence
    CHECK(fs::exists(out));
    CHECK(run("traj --delta-e 0 --t-end 0.1 --dt 1e-3 --out /nonexistent/dir/x.csv") == 3);
}

TEST_CASE("figure commands emit the canonical filenames") {
    TempDir dir;
    const fs::path d1 = dir.path / "fig1";
    REQUIRE(run("figure 1 --dt 1e-3 --out " + d1.string()) == 0);
    for (const char* name : {"figure1_traj.csv", "figure1_p1.csv", "figure1_p2.csv",
                             "figure1_sum.csv", "run_manifest.txt"}) {
        CHECK(fs::exists(d1 / name));
    }
    const std::string manifest = slurp(d1 / "run_manifest.txt");
    CHECK(manifest.find("drive_pulse_area=") != std::string::npos);

    const fs::path d2 = dir.path / "fig2";
    REQUIRE(run("figure 2 --dt 1e-3 --out " + d2.string()) == 0);
    for (const char* name : {"figure2_sweep.csv", "figure2_thr95.csv",
                             "figure2_thr90.csv", "figure2_thr80.csv",
                             "figure2_thr70.csv"}) {
        CHECK(fs::exists(d2 / name));
    }
    const auto sweep_rows = parse_csv(slurp(d2 / "figure2_sweep.csv"));
    CHECK(sweep_rows.size() == 85);  // header + 21 splittings x 4 thresholds

    const fs::path d3 = dir.path / "fig3";
    REQUIRE(run("figure 3 --dt 1e-3 --out " + d3.string()) == 0);
    CHECK(fs::exists(d3 / "figure3_effect.csv"));
    CHECK(fs::exists(d3 / "figure3_error.csv"));
}

}  // TEST_SUITE
