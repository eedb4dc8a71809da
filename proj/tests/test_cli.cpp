#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <sys/wait.h>

namespace {

namespace fs = std::filesystem;

struct RunResult {
    int exit_code;
    std::string out;
    std::string err;
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

const char* binary() { return std::getenv("BRWLAB_BIN"); }

fs::path scratch_root() {
    static const fs::path root = [] {
        auto p = fs::temp_directory_path() / "brwlab_cli_tests";
        fs::remove_all(p);
        fs::create_directories(p);
        return p;
    }();
    return root;
}

RunResult run_cli(const std::string& args) {
    static int counter = 0;
    const fs::path out_file = scratch_root() / ("stdout." + std::to_string(counter));
    const fs::path err_file = scratch_root() / ("stderr." + std::to_string(counter));
    ++counter;
    const std::string cmd = std::string(binary()) + " " + args + " >" + out_file.string() +
                            " 2>" + err_file.string();
    const int status = std::system(cmd.c_str());
    RunResult r;
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = slurp(out_file);
    r.err = slurp(err_file);
    return r;
}

} // namespace

TEST_CASE("usage and per-command help", "[cli]") {
    if (!binary()) SKIP("BRWLAB_BIN not set");
    const auto bare = run_cli("");
    CHECK(bare.exit_code == 0);
    CHECK(bare.out.find("usage: brwlab") != std::string::npos);
    for (const std::string cmd :
         {"oracle-grid", "couple", "verify-corollary", "verify-counts", "simulate"}) {
        const auto r = run_cli(cmd + " --help");
        CHECK(r.exit_code == 0);
        CHECK(r.out.find(cmd) != std::string::npos);
        CHECK(r.out.find("--seed") != std::string::npos);
    }
}

TEST_CASE("config errors exit with code 2", "[cli]") {
    if (!binary()) SKIP("BRWLAB_BIN not set");
    CHECK(run_cli("frobnicate").exit_code == 2);
    const auto unknown_key = run_cli("couple --frobnicate 7");
    CHECK(unknown_key.exit_code == 2);
    CHECK(unknown_key.err.find("unknown config key 'frobnicate'") != std::string::npos);
    CHECK(run_cli("couple --alpha 2").exit_code == 2);
    CHECK(run_cli("couple --kind nowhere").exit_code == 2);
    CHECK(run_cli("couple --kind AxisShift1 --pi 0.5").exit_code == 2);
    CHECK(run_cli("oracle-grid --kernel generalized").exit_code == 2);
    CHECK(run_cli("oracle-grid --law 0.5,0.6").exit_code == 2);
    CHECK(run_cli("simulate --mode nonsense").exit_code == 2);
    CHECK(run_cli("couple --seed").exit_code == 2); // flag without a value
}

TEST_CASE("unwritable output directory exits with code 5", "[cli]") {
    if (!binary()) SKIP("BRWLAB_BIN not set");
    const auto r = run_cli("oracle-grid --n 1 --out-dir /proc/not_allowed");
    CHECK(r.exit_code == 5);
}

TEST_CASE("oracle-grid writes the grid and the audit report", "[cli]") {
    if (!binary()) SKIP("BRWLAB_BIN not set");
    const fs::path dir = scratch_root() / "grid";
    const auto r = run_cli("oracle-grid --n 2 --kernel strict --out-dir " + dir.string());
    REQUIRE(r.exit_code == 0);
    const std::string csv = slurp(dir / "oracle_grid.csv");
    CHECK(csv.rfind("x,y,p\n", 0) == 0);
    CHECK(csv.find("\n0,0,") != std::string::npos);
    const std::string report = slurp(dir / "oracle_grid_report.json");
    CHECK(report.find("\"violations\": 0") != std::string::npos);
    CHECK(report.find("\"command\": \"oracle-grid\"") != std::string::npos);

    SECTION("single-interior-site grid reports a vacuous audit") {
        const auto v = run_cli("oracle-grid --n 1 --out-dir " + (scratch_root() / "g1").string());
        CHECK(v.exit_code == 0);
        CHECK(slurp(scratch_root() / "g1" / "oracle_grid_report.json").find("\"vacuous\": true") !=
              std::string::npos);
    }
}

TEST_CASE("couple writes replica rows and verdicts", "[cli]") {
    if (!binary()) SKIP("BRWLAB_BIN not set");
    const fs::path dir = scratch_root() / "couple";
    const auto r =
        run_cli("couple --kind DiagShift --n 2 --replicas 300 --out-dir " + dir.string());
    REQUIRE(r.exit_code == 0);
    const std::string csv = slurp(dir / "couple_replicas.csv");
    CHECK(csv.rfind("replica,seed,kind,S,T0,T1,U,U0,U1,tau0,tau1,censor0,censor1,max_population\n",
                    0) == 0);
    const std::string report = slurp(dir / "couple_report.json");
    CHECK(report.find("\"pathwise\"") != std::string::npos);
    CHECK(report.find("\"exceptions\": 0") != std::string::npos);
    CHECK(report.find("\"verdicts\"") != std::string::npos);
}

TEST_CASE("verify-counts skips incomparable pairs but reports them", "[cli]") {
    if (!binary()) SKIP("BRWLAB_BIN not set");
    const fs::path dir = scratch_root() / "counts";
    const auto r = run_cli(
        "verify-counts --kernel strict --t 3 --replicas 400 "
        "--pairs \"(1,0)->(2,0);(2,1)->(2,2)\" --out-dir " +
        dir.string());
    REQUIRE(r.exit_code == 0);
    const std::string report = slurp(dir / "counts_report.json");
    // (2,0) is even, unreachable at odd t; (2,1) -> (2,2) mixes parities.
    CHECK(report.find("\"skipped\": true") != std::string::npos);
    CHECK(r.err.find("skipped") != std::string::npos);
}

TEST_CASE("simulate covers the three modes", "[cli]") {
    if (!binary()) SKIP("BRWLAB_BIN not set");
    const fs::path d1 = scratch_root() / "sim_hit";
    auto r = run_cli("simulate --mode hitting --n 2 --replicas 50 --out-dir " + d1.string());
    REQUIRE(r.exit_code == 0);
    CHECK(slurp(d1 / "simulate_replicas.csv").rfind("replica,", 0) == 0);

    const fs::path d2 = scratch_root() / "sim_counts";
    r = run_cli("simulate --mode counts --t 3 --probes \"(1,0);(0,1)\" --replicas 50 --out-dir " +
                d2.string());
    REQUIRE(r.exit_code == 0);

    const fs::path d3 = scratch_root() / "sim_ct";
    r = run_cli("simulate --mode ct --lambda 0.2 --ct-t 0.5 --probes \"(0,0)\" --replicas 50 "
                "--out-dir " +
                d3.string());
    REQUIRE(r.exit_code == 0);
    CHECK(slurp(d3 / "simulate_report.json").find("\"mode\": \"ct\"") != std::string::npos);
}

TEST_CASE("reruns with one seed are byte-identical", "[cli]") {
    if (!binary()) SKIP("BRWLAB_BIN not set");
    const fs::path dir = scratch_root() / "det";
    const std::string args =
        "couple --kind AxisShift1 --n 2 --replicas 500 --seed 7 --out-dir " + dir.string();
    REQUIRE(run_cli(args).exit_code == 0);
    const std::string csv1 = slurp(dir / "couple_replicas.csv");
    const std::string json1 = slurp(dir / "couple_report.json");
    REQUIRE(run_cli(args).exit_code == 0);
    CHECK(slurp(dir / "couple_replicas.csv") == csv1);
    CHECK(slurp(dir / "couple_report.json") == json1);

    SECTION("a different seed changes the replica table") {
        const std::string args9 =
            "couple --kind AxisShift1 --n 2 --replicas 500 --seed 9 --out-dir " + dir.string();
        REQUIRE(run_cli(args9).exit_code == 0);
        CHECK(slurp(dir / "couple_replicas.csv") != csv1);
    }
}

TEST_CASE("config file values are overridden by flags", "[cli]") {
    if (!binary()) SKIP("BRWLAB_BIN not set");
    const fs::path cfg = scratch_root() / "grid.cfg";
    std::ofstream(cfg) << "n = 2\nkernel = strict\nseed = 3\n";
    const fs::path dir = scratch_root() / "overlay";
    const auto r = run_cli("oracle-grid --config " + cfg.string() + " --n 3 --out-dir " +
                           dir.string());
    REQUIRE(r.exit_code == 0);
    const std::string report = slurp(dir / "oracle_grid_report.json");
    CHECK(report.find("\"n\": 3") != std::string::npos);      // flag wins
    CHECK(report.find("\"seed\": 3") != std::string::npos);   // file value survives
    CHECK(run_cli("oracle-grid --config /missing.cfg").exit_code == 2);
}
