// End-to-end tests that drive the built command line binary. Every case runs
// the real executable, captures both streams, and checks exit codes alongside
// the parsed table contents.

#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include <sys/wait.h>

namespace {

namespace fs = std::filesystem;

struct CliResult {
    int code;
    std::string out;
    std::string err;
};

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

fs::path scratch_dir() {
    const fs::path dir = fs::temp_directory_path() / "ksh-cli-tests";
    fs::create_directories(dir);
    return dir;
}

CliResult run_cli(const std::string& args) {
    static int counter = 0;
    const fs::path dir = scratch_dir();
    const fs::path out_path = dir / ("stdout-" + std::to_string(counter) + ".txt");
    const fs::path err_path = dir / ("stderr-" + std::to_string(counter) + ".txt");
    ++counter;
    const std::string cmd = std::string(KSH_CLI_PATH) + " " + args + " > " + out_path.string() +
                            " 2> " + err_path.string();
    const int raw = std::system(cmd.c_str());
    REQUIRE(raw != -1);
    REQUIRE(WIFEXITED(raw));
    return CliResult{WEXITSTATUS(raw), slurp(out_path), slurp(err_path)};
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : s) {
        if (ch == sep) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += ch;
        }
    }
    out.push_back(cur);
    return out;
}

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    std::size_t col(const std::string& name) const {
        for (std::size_t i = 0; i < header.size(); ++i)
            if (header[i] == name) return i;
        FAIL("missing column " << name);
        return 0;
    }

    double num(std::size_t row, const std::string& name) const {
        return std::stod(rows.at(row).at(col(name)));
    }

    const std::string& cell(std::size_t row, const std::string& name) const {
        return rows.at(row).at(col(name));
    }
};

Table parse_csv(const std::string& text) {
    Table t;
    for (const std::string& line : split(text, '\n')) {
        if (line.empty()) continue;
        if (t.header.empty())
            t.header = split(line, ',');
        else
            t.rows.push_back(split(line, ','));
    }
    REQUIRE(!t.header.empty());
    for (const auto& row : t.rows) REQUIRE(row.size() == t.header.size());
    return t;
}

}  // namespace

TEST_CASE("norms on the circle emit a full grid with flat defects") {
    const auto res = run_cli("norms --group s1 --h quadratic --tau2 1 --lambda-max 3");
    REQUIRE(res.code == 0);

    const Table t = parse_csv(res.out);
    REQUIRE(t.header ==
            std::vector<std::string>{"group", "h_family", "h_params", "hbar", "tau1", "tau2",
                                     "lambda", "h_lambda", "log_a2_shifted", "defect",
                                     "quad_err"});
    REQUIRE(t.rows.size() == 7);

    std::vector<std::string> labels;
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        labels.push_back(t.cell(i, "lambda"));
        CHECK(std::abs(t.num(i, "defect")) < 1e-8);
        CHECK(t.num(i, "quad_err") < 1e-6);
        CHECK(t.cell(i, "group") == "s1");
        CHECK(t.cell(i, "h_family") == "quadratic");
    }
    REQUIRE(labels == std::vector<std::string>{"-3", "-2", "-1", "0", "1", "2", "3"});

    // The manifest rides on stderr when the table itself goes to stdout.
    const auto manifest = nlohmann::json::parse(res.err);
    CHECK(manifest.at("rows_written").get<std::size_t>() == 7);
    CHECK(manifest.at("version").get<std::string>() == "0.1.0");
    CHECK(manifest.at("max_quad_err").get<double>() < 1e-6);
    CHECK(manifest.at("config").at("group").get<std::string>() == "s1");
}

TEST_CASE("norms cover product grids for the rank one compact group") {
    const auto res = run_cli(
        "norms --group su2 --h quadratic --tau2 0.5,2 --hbar 1,0.25 --lambda-max 2");
    REQUIRE(res.code == 0);
    const Table t = parse_csv(res.out);
    REQUIRE(t.rows.size() == 12);  // 3 weights x 2 tau2 x 2 hbar
    for (std::size_t i = 0; i < t.rows.size(); ++i)
        CHECK(std::abs(t.num(i, "defect")) < 1e-6);
}

TEST_CASE("configuration mistakes exit with the dedicated status") {
    CHECK(run_cli("norms --group s1 --tau2 0").code == 2);
    CHECK(run_cli("norms --group s1 --tau2 1,,2").code == 2);
    CHECK(run_cli("norms --group s1 --no-such-flag 1").code == 2);
    CHECK(run_cli("norms --group so3").code == 2);
    CHECK(run_cli("norms --group a:0").code == 2);
    CHECK(run_cli("norms --group s1 --h quartic:-1").code == 2);
    CHECK(run_cli("norms --group s1 --format yaml").code == 2);
    CHECK(run_cli("").code == 2);
    CHECK(run_cli("--help").code == 0);

    const auto ver = run_cli("--version");
    CHECK(ver.code == 0);
    CHECK(ver.out.find("0.1.0") != std::string::npos);
}

TEST_CASE("numeric failures exit with status 3 and name the weight") {
    // A concave profile passes construction and fails the convexity audit.
    const auto res = run_cli("norms --group s1 --h radial:-1 --tau2 1 --lambda-max 0");
    CHECK(res.code == 3);
    CHECK(res.err.find("lambda=(0)") != std::string::npos);

    // An impossible accuracy demand trips the tolerance gate.
    const auto tol = run_cli("norms --group s1 --h quadratic --tau2 1 --tol 1e-18");
    CHECK(tol.code == 3);
    CHECK(tol.err.find("exceeds") != std::string::npos);
}

TEST_CASE("b1-fit recovers the closed form coefficient on the circle") {
    const auto res = run_cli("b1-fit --group s1 --h quartic:0.1 --lambda-max 1");
    REQUIRE(res.code == 0);
    const Table t = parse_csv(res.out);
    REQUIRE(t.rows.size() == 3);
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        CHECK(!t.cell(i, "b1_closed").empty());
        CHECK(t.num(i, "rel_gap") < 0.05);
    }

    const auto flat = run_cli("b1-fit --group s1 --h quadratic --lambda-max 0");
    REQUIRE(flat.code == 0);
    const Table ft = parse_csv(flat.out);
    REQUIRE(ft.rows.size() == 1);
    CHECK(std::abs(ft.num(0, "b1_fit")) < 1e-4);
}

TEST_CASE("b1-fit leaves the closed form blank off the circle and guards grids") {
    const auto res = run_cli("b1-fit --group su2 --h quartic:0.1 --lambda-max 0");
    REQUIRE(res.code == 0);
    const Table t = parse_csv(res.out);
    REQUIRE(t.rows.size() == 1);
    CHECK(t.cell(0, "b1_closed").empty());
    CHECK(t.cell(0, "rel_gap").empty());
    CHECK(std::stod(t.cell(0, "residual")) >= 0.0);

    CHECK(run_cli("b1-fit --group s1 --h quartic:0.1 --tau2 5,10").code == 2);
    CHECK(run_cli("b1-fit --group s1 --h quartic:0.1 --tau2 5,10,20").code == 2);
    CHECK(run_cli("b1-fit --group s1 --h quartic:0.1 --tau2 5,10,8,40").code == 2);
}

TEST_CASE("semiclassical gaps shrink along the default hbar ladder") {
    // The leading correction dominates at the vacuum weight, where the gap
    // must fall monotonically; higher weights can cross zero at moderate
    // hbar, so they are not part of the guarantee.
    for (const std::string& group : {"s1", "su2"}) {
        const auto res = run_cli("semiclassical --group " + group +
                                 " --h quartic:0.1 --tau2 1,2 --lambda-max 0");
        REQUIRE(res.code == 0);
        const Table t = parse_csv(res.out);
        REQUIRE(t.rows.size() == 8);  // 2 tau2 x 4 hbar
        for (std::size_t base = 0; base < t.rows.size(); base += 4) {
            for (std::size_t j = 1; j < 4; ++j) {
                CHECK(t.cell(base + j, "tau2") == t.cell(base, "tau2"));
                CHECK(t.num(base + j, "abs_gap") < t.num(base + j - 1, "abs_gap"));
            }
        }
    }
}

TEST_CASE("stardefect reports flat conjugation error for the quadratic profile") {
    const auto res = run_cli("stardefect --group s1 --h quadratic -N 12 --m 1,2 --tau2 1");
    REQUIRE(res.code == 0);
    const Table t = parse_csv(res.out);
    REQUIRE(t.rows.size() == 2);
    for (std::size_t i = 0; i < t.rows.size(); ++i)
        CHECK(t.num(i, "star_defect") < 1e-8);

    CHECK(run_cli("stardefect --group su2 --h quadratic").code == 2);
    CHECK(run_cli("stardefect --group s1 --h quadratic -N 12 --m 9").code == 2);
}

TEST_CASE("covariance residuals vanish at machine precision") {
    const auto res = run_cli(
        "covariance --group s1 --h quartic:0.1 -N 12 --samples 10 --seed 7 --tau2 1");
    REQUIRE(res.code == 0);
    const Table t = parse_csv(res.out);
    REQUIRE(t.rows.size() == 10);
    for (std::size_t i = 0; i < t.rows.size(); ++i)
        CHECK(t.num(i, "covariance_defect") < 1e-12);

    CHECK(run_cli("covariance --group a:2 --h quadratic").code == 2);
}

TEST_CASE("validate passes healthy models and flags the degenerate profile") {
    const auto good = run_cli("validate --group su2 --h quartic:0.1");
    REQUIRE(good.code == 0);
    const Table gt = parse_csv(good.out);
    REQUIRE(gt.rows.size() >= 6);
    for (std::size_t i = 0; i < gt.rows.size(); ++i)
        CHECK(gt.cell(i, "status") == "pass");

    const auto bad = run_cli("validate --group s1 --h radial:0,0.25");
    REQUIRE(bad.code == 4);
    const Table bt = parse_csv(bad.out);
    bool convexity_failed = false;
    for (std::size_t i = 0; i < bt.rows.size(); ++i)
        if (bt.cell(i, "check") == "convexity-certificate")
            convexity_failed = bt.cell(i, "status") == "fail";
    CHECK(convexity_failed);
}

TEST_CASE("file output is byte reproducible with the manifest kept aside") {
    const fs::path dir = scratch_dir();
    const fs::path a = dir / "run-a.csv";
    const fs::path b = dir / "run-b.csv";
    const std::string args = "norms --group su2 --h quartic:0.1 --tau2 1,4 --lambda-max 1 --out ";

    REQUIRE(run_cli(args + a.string()).code == 0);
    REQUIRE(run_cli(args + b.string()).code == 0);

    const std::string body_a = slurp(a);
    REQUIRE(!body_a.empty());
    REQUIRE(body_a == slurp(b));

    const auto manifest = nlohmann::json::parse(slurp(a.string() + ".manifest.json"));
    const Table t = parse_csv(body_a);
    CHECK(manifest.at("rows_written").get<std::size_t>() == t.rows.size());
    CHECK(manifest.at("config").at("h").get<std::string>() == "quartic:0.1");
}

TEST_CASE("json format embeds the manifest and the rows") {
    const auto res = run_cli("norms --group s1 --h quadratic --tau2 1 --lambda-max 1 "
                             "--format json");
    REQUIRE(res.code == 0);
    const auto doc = nlohmann::json::parse(res.out);
    CHECK(doc.at("manifest").at("version").get<std::string>() == "0.1.0");
    const auto& rows = doc.at("rows");
    REQUIRE(rows.size() == 3);
    for (const auto& row : rows)
        CHECK(std::abs(std::stod(row.at("defect").get<std::string>())) < 1e-8);
}
