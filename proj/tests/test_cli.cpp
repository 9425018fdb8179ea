// End-to-end checks of the command-line binary: exit-code contract, JSON
// config merging with flag precedence, byte-level determinism, sweep grid
// ordering, fault-injection isolation in the verify battery, and the CSV
// float format (17 significant digits).

#include <catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <sys/wait.h>

namespace fs = std::filesystem;

namespace {

struct CliResult {
    int code = -1;
    std::string out;
};

const char* cli_path() { return GRADBLOW_CLI_PATH; }

CliResult run_cli(const std::string& args) {
    const std::string cmd =
        std::string(cli_path()) + " " + args + " 2>" + "/tmp/gradblow_cli_stderr.txt";
    FILE* p = popen(cmd.c_str(), "r");
    REQUIRE(p != nullptr);
    std::string out;
    char buf[4096];
    std::size_t k = 0;
    while ((k = fread(buf, 1, sizeof buf, p)) > 0) out.append(buf, k);
    const int status = pclose(p);
    CliResult r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = out;
    return r;
}

std::string slurp(const fs::path& path) {
    std::ifstream f(path);
    REQUIRE(f.good());
    std::string s((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    return s;
}

std::string last_stderr() { return slurp("/tmp/gradblow_cli_stderr.txt"); }

fs::path fresh_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / "gradblow_cli_tests" / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

bool contains(const std::string& hay, const std::string& needle) {
    return hay.find(needle) != std::string::npos;
}

} // namespace

TEST_CASE("invalid configurations exit with code 2 and a reason") {
    const CliResult a = run_cli("constants -p 3");
    REQUIRE(a.code == 2);
    REQUIRE(contains(last_stderr(), "p > 3"));

    const CliResult b = run_cli("constants --mu -1");
    REQUIRE(b.code == 2);

    const CliResult c = run_cli("nonexistent-subcommand");
    REQUIRE(c.code == 2);

    const CliResult d = run_cli("constants --config /no/such/file.json");
    REQUIRE(d.code == 2);

    const CliResult e = run_cli("shoot --mode bogus");
    REQUIRE(e.code == 2);
}

TEST_CASE("constants command emits the derived values as JSON") {
    const CliResult r = run_cli("constants -p 5 --mu 1");
    REQUIRE(r.code == 0);
    REQUIRE(contains(r.out, "\"kappa\": 0.7071067811865476"));
    REQUIRE(contains(r.out, "\"beta\": 0.75"));
    REQUIRE(contains(r.out, "\"b\": 13.506378494179474"));
    REQUIRE(contains(r.out, "\"consistency_rel\""));
}

TEST_CASE("stdout is byte-identical across repeated runs") {
    const CliResult a = run_cli("constants -p 7 --mu 2");
    const CliResult b = run_cli("constants -p 7 --mu 2");
    REQUIRE(a.code == 0);
    REQUIRE(a.out == b.out);
    REQUIRE_FALSE(a.out.empty());

    const CliResult c = run_cli("verify");
    const CliResult d = run_cli("verify");
    REQUIRE(c.code == 0);
    REQUIRE(c.out == d.out);
}

TEST_CASE("verify passes clean and isolates an injected quadrature fault") {
    const CliResult ok = run_cli("verify");
    REQUIRE(ok.code == 0);
    REQUIRE(contains(ok.out, "\"all_pass\": true"));

    const CliResult bad = run_cli("verify --inject-weight-fault");
    REQUIRE(bad.code == 1);
    REQUIRE(contains(bad.out, "\"all_pass\": false"));
    // The fault lives in the Gaussian rule: moment and orthogonality items
    // fail, while the independently integrated identities still pass.
    auto item_passed = [&](const std::string& name) {
        const auto pos = bad.out.find("\"name\": \"" + name + "\"");
        REQUIRE(pos != std::string::npos);
        const auto pass_pos = bad.out.find("\"pass\": ", pos);
        REQUIRE(pass_pos != std::string::npos);
        return bad.out.compare(pass_pos + 8, 4, "true") == 0;
    };
    REQUIRE_FALSE(item_passed("moment_sq"));
    REQUIRE_FALSE(item_passed("moment_cube"));
    REQUIRE_FALSE(item_passed("orthogonality"));
    REQUIRE(item_passed("c2_identity"));
    REQUIRE(item_passed("constants_consistency"));
    REQUIRE(item_passed("residual_trend"));
}

TEST_CASE("config file fills unset flags and explicit flags win") {
    const fs::path dir = fresh_dir("config_merge");
    const fs::path cfg = dir / "cfg.json";
    std::ofstream(cfg) << "{\"p\": 4.0, \"mu\": 2.0}\n";

    const CliResult a = run_cli("constants --config " + cfg.string());
    REQUIRE(a.code == 0);
    REQUIRE(contains(a.out, "\"p\": 4.0"));
    REQUIRE(contains(a.out, "\"mu\": 2.0"));

    const CliResult b = run_cli("constants --config " + cfg.string() + " -p 7");
    REQUIRE(b.code == 0);
    REQUIRE(contains(b.out, "\"p\": 7.0"));
    REQUIRE(contains(b.out, "\"mu\": 2.0"));

    std::ofstream(cfg) << "{\"p\": \"not-a-number\"}\n";
    const CliResult c = run_cli("constants --config " + cfg.string());
    REQUIRE(c.code == 2);
}

TEST_CASE("sweep emits a sorted grid, invariant under config permutation") {
    const fs::path dir = fresh_dir("sweep");
    const fs::path cfg1 = dir / "a.json";
    const fs::path cfg2 = dir / "b.json";
    std::ofstream(cfg1) << "{\"grid\": {\"p\": [5.0, 4.0, 7.0], \"mu\": [2.0, 1.0]}}\n";
    std::ofstream(cfg2) << "{\"grid\": {\"mu\": [1.0, 2.0], \"p\": [7.0, 4.0, 5.0]}}\n";

    const CliResult a = run_cli("sweep --config " + cfg1.string());
    const CliResult b = run_cli("sweep --config " + cfg2.string());
    REQUIRE(a.code == 0);
    REQUIRE(a.out == b.out);

    // Header plus 6 rows, lexicographically ordered in (p, mu).
    REQUIRE(contains(a.out, "p,mu,A,s0,d0,d1,q,kappa,beta,B,b,a,c0_tilde,c2_tilde"));
    const auto p4 = a.out.find("\n4,");
    const auto p5 = a.out.find("\n5,");
    const auto p7 = a.out.find("\n7,");
    REQUIRE(p4 != std::string::npos);
    REQUIRE(p5 != std::string::npos);
    REQUIRE(p7 != std::string::npos);
    REQUIRE(p4 < p5);
    REQUIRE(p5 < p7);

    // Floats carry 17 significant digits.
    REQUIRE(contains(a.out, "0.7071067811865475"));
}

TEST_CASE("sweep with probes reports immediate boundary exits") {
    const fs::path dir = fresh_dir("sweep_probe");
    const fs::path cfg = dir / "probe.json";
    std::ofstream(cfg) << "{\"grid\": {\"p\": [5.0], \"mu\": [1.0], \"d0\": [2.0]},"
                          " \"probe\": true, \"horizon\": 2.0}\n";
    const CliResult r = run_cli("sweep --config " + cfg.string());
    REQUIRE(r.code == 0);
    // Trailing columns: s_star = 50 (exit at s0), component v0, sign +1.
    REQUIRE(contains(r.out, ",50,v0,1,"));
}

TEST_CASE("ode command reports attractor fits and writes the trace") {
    const fs::path dir = fresh_dir("ode");
    const CliResult r =
        run_cli("ode --s0 1e6 --s-end 1e8 --out-dir " + (dir / "out").string());
    REQUIRE(r.code == 0);
    REQUIRE(contains(r.out, "\"blew_away\": false"));
    REQUIRE(contains(r.out, "\"exponent\""));
    const std::string csv = slurp(dir / "out" / "modes_ode.csv");
    REQUIRE(csv.rfind("s,w0,w2\n", 0) == 0);
    REQUIRE(csv.size() > 1000);
}

TEST_CASE("simulate smoke run writes deterministic artifacts") {
    const fs::path dir = fresh_dir("simulate");
    const std::string args = "simulate --s0 50 --s-end 50.2 --d0 0.1 --snapshot 50.1";
    const CliResult a = run_cli(args + " --out-dir " + (dir / "one").string());
    REQUIRE(a.code == 0);
    REQUIRE(contains(a.out, "\"termination\": \"horizon\""));
    const CliResult b = run_cli(args + " --out-dir " + (dir / "two").string());
    REQUIRE(a.out == b.out);

    const std::string csv1 = slurp(dir / "one" / "modes.csv");
    const std::string csv2 = slurp(dir / "two" / "modes.csv");
    REQUIRE(csv1 == csv2);
    REQUIRE(csv1.rfind("s,v0,v1,v2,vminus,ve,ds,sup_w,sup_v\n", 0) == 0);
    REQUIRE(fs::exists(dir / "one" / "snapshot_0.csv"));
    const std::string side = slurp(dir / "one" / "snapshot_0.json");
    REQUIRE(contains(side, "\"config_hash\""));
}

TEST_CASE("help exits cleanly") {
    REQUIRE(run_cli("--help").code == 0);
    REQUIRE(run_cli("simulate --help").code == 0);
}
