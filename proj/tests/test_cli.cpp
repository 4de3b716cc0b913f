#include <catch2/catch_amalgamated.hpp>

#include <epp/basis.hpp>
#include <epp/states.hpp>

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#ifndef CLI_BINARY_PATH
#error "CLI_BINARY_PATH must point at the built command line tool"
#endif

namespace {

struct RunResult {
    int exit_code;
    std::string out;
    std::string err;
};

std::string slurp(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

RunResult run_cli(const std::string& args) {
    static int counter = 0;
    std::string tag = "/tmp/epp_cli_test_" + std::to_string(++counter);
    std::string out = tag + ".out", err = tag + ".err";
    std::string cmd = std::string(CLI_BINARY_PATH) + " " + args + " > " + out + " 2> " + err;
    int status = std::system(cmd.c_str());
    int code = (status >= 0 && WIFEXITED(status)) ? WEXITSTATUS(status) : -1;
    RunResult r{code, slurp(out), slurp(err)};
    std::remove(out.c_str());
    std::remove(err.c_str());
    return r;
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) out.push_back(field);
    return out;
}

std::vector<std::string> lines_of(const std::string& text) {
    std::vector<std::string> out;
    std::stringstream ss(text);
    std::string line;
    while (std::getline(ss, line)) out.push_back(line);
    return out;
}

}  // namespace

TEST_CASE("supersinglet command: headers, values, reruns") {
    RunResult r = run_cli("supersinglet --n 3");
    REQUIRE(r.exit_code == 0);
    auto ls = lines_of(r.out);
    REQUIRE(ls.size() == 2);
    REQUIRE(ls[0] == "N,best_epp,probability,entropy");
    auto row = split_csv(ls[1]);
    REQUIRE(row[0] == "3");
    REQUIRE(std::stod(row[1]) == Catch::Approx(1.0 / 3).margin(1e-9));
    REQUIRE(std::stod(row[2]) == Catch::Approx(1.0 / 3).margin(1e-9));
    REQUIRE(std::stod(row[3]) == Catch::Approx(1.0).margin(1e-9));

    RunResult again = run_cli("supersinglet --n 3");
    REQUIRE(again.out == r.out);  // byte identical
}

TEST_CASE("quench command is deterministic and sorted") {
    std::string args = "quench --t-max 1 --dt 0.5 --blocks 4,2";
    RunResult r = run_cli(args);
    REQUIRE(r.exit_code == 0);
    RunResult again = run_cli(args);
    REQUIRE(again.out == r.out);

    auto ls = lines_of(r.out);
    REQUIRE(ls[0] == "t,delta_A,delta_B,entropy,probability,epp");
    REQUIRE(ls.size() == 7);  // 2 blocks x 3 times
    // block-major, time-minor ordering with ascending block widths
    auto r1 = split_csv(ls[1]), r4 = split_csv(ls[4]);
    REQUIRE(r1[1] == "2");
    REQUIRE(r4[1] == "4");
    REQUIRE(std::stod(r1[0]) == 0.0);
    REQUIRE(std::stod(split_csv(ls[3])[0]) == 1.0);
}

TEST_CASE("groundstate command warns about fields outside the two-flip window") {
    RunResult r = run_cli("groundstate");
    REQUIRE(r.exit_code == 0);
    REQUIRE(r.err.empty());
    auto ls = lines_of(r.out);
    REQUIRE(ls[0] == "delta_A,entropy,probability,epp");
    REQUIRE(ls.size() == 12);  // widths 2..12

    RunResult warned = run_cli("groundstate --field -0.2 --delta-max 3");
    REQUIRE(warned.exit_code == 0);
    REQUIRE(warned.err.find("window") != std::string::npos);
    REQUIRE(lines_of(warned.out).size() == 3);
}

TEST_CASE("sweep output does not depend on the worker count") {
    std::string grid = "--gamma -0.05:0.05:0.05 --field -0.05:0.05:0.05";
    RunResult solo = run_cli("sweep " + grid);
    REQUIRE(solo.exit_code == 0);
    RunResult threaded = run_cli("sweep " + grid + " --workers 3");
    REQUIRE(threaded.exit_code == 0);
    REQUIRE(solo.out == threaded.out);

    auto ls = lines_of(solo.out);
    REQUIRE(ls[0] == "gamma,h,parity,degeneracy,max_entropy,max_probability,epp");
    REQUIRE(ls.size() == 10);  // 3 x 3 grid
    // the isotropic zero-field point: odd parity, epp = 1/18
    auto mid = split_csv(ls[5]);
    REQUIRE(mid[0] == "0");
    REQUIRE(mid[1] == "0");
    REQUIRE(mid[2] == "-1");
    REQUIRE(std::stod(mid[6]) == Catch::Approx(1.0 / 18).margin(1e-9));
}

TEST_CASE("--out writes exactly what stdout would carry") {
    std::string path = "/tmp/epp_cli_out_test.csv";
    RunResult direct = run_cli("supersinglet --n 4");
    RunResult filed = run_cli("supersinglet --n 4 --out " + path);
    REQUIRE(filed.exit_code == 0);
    REQUIRE(filed.out.empty());
    REQUIRE(slurp(path) == direct.out);
    std::remove(path.c_str());
}

TEST_CASE("search command round-trips library states") {
    {
        std::ofstream f("/tmp/epp_cli_ss3.state");
        epp::write_state_file(f, epp::supersinglet({3, 3}));
    }
    RunResult r = run_cli("search --state /tmp/epp_cli_ss3.state --region-a 1 --region-b 2");
    REQUIRE(r.exit_code == 0);
    auto ls = lines_of(r.out);
    REQUIRE(ls[0] == "row_kind,j,mu,nu,probability,entropy,epp");
    REQUIRE(ls.size() == 5);  // three candidates + best
    auto best = split_csv(ls.back());
    REQUIRE(best[0] == "best");
    REQUIRE(best[1] == "1");
    REQUIRE(best[2] == "1+2");
    REQUIRE(best[3] == "1+2");
    // matches the dedicated supersinglet command
    auto ss = split_csv(lines_of(run_cli("supersinglet --n 3").out)[1]);
    REQUIRE(std::stod(best[6]) == Catch::Approx(std::stod(ss[1])).margin(1e-9));
    REQUIRE(std::stod(best[4]) == Catch::Approx(std::stod(ss[2])).margin(1e-9));
    REQUIRE(std::stod(best[5]) == Catch::Approx(std::stod(ss[3])).margin(1e-9));
    std::remove("/tmp/epp_cli_ss3.state");
}

TEST_CASE("search on a bell pair and on a product state") {
    {
        epp::Vec v = epp::Vec::Zero(4);
        v[1] = 1.0 / std::sqrt(2.0);
        v[2] = 1.0 / std::sqrt(2.0);
        std::ofstream f("/tmp/epp_cli_bell.state");
        epp::write_state_file(f, epp::PureState(epp::BasisKind::full(2), v));
    }
    RunResult bell = run_cli("search --state /tmp/epp_cli_bell.state --region-a 1 --region-b 2");
    REQUIRE(bell.exit_code == 0);
    auto best = split_csv(lines_of(bell.out).back());
    REQUIRE(best[0] == "best");
    REQUIRE(std::stod(best[6]) == Catch::Approx(1.0).margin(1e-9));
    std::remove("/tmp/epp_cli_bell.state");

    {
        epp::Vec v = epp::Vec::Zero(16);
        v[6] = 1.0;  // |1>|2> for two ququarts
        std::ofstream f("/tmp/epp_cli_prod.state");
        epp::write_state_file(f, epp::PureState(epp::BasisKind::qudit(2, 4), v));
    }
    RunResult prod = run_cli("search --state /tmp/epp_cli_prod.state --region-a 1 --region-b 2");
    REQUIRE(prod.exit_code == 0);
    auto ls = lines_of(prod.out);
    REQUIRE(ls.size() == 2);
    REQUIRE(ls[1] == "best,-,-,-,0,0,0");
    std::remove("/tmp/epp_cli_prod.state");
}

TEST_CASE("usage errors exit with 2") {
    REQUIRE(run_cli("supersinglet --n 9").exit_code == 2);
    REQUIRE(run_cli("supersinglet").exit_code == 2);
    REQUIRE(run_cli("search --region-a 1 --region-b 2").exit_code == 2);
    REQUIRE(run_cli("frobnicate").exit_code == 2);
    REQUIRE(run_cli("quench --dt 0").exit_code == 2);
    REQUIRE(run_cli("groundstate --delta-max 40").exit_code == 2);
    REQUIRE(run_cli("--help").exit_code == 0);
}

TEST_CASE("malformed state files exit with 3") {
    {
        std::ofstream f("/tmp/epp_cli_bad.state");
        f << "basis full 2\n0 bogus 0\n";
    }
    RunResult bad = run_cli("search --state /tmp/epp_cli_bad.state --region-a 1 --region-b 2");
    REQUIRE(bad.exit_code == 3);
    REQUIRE(bad.err.find("line 2") != std::string::npos);
    std::remove("/tmp/epp_cli_bad.state");

    RunResult missing =
        run_cli("search --state /tmp/epp_cli_nonexistent.state --region-a 1 --region-b 2");
    REQUIRE(missing.exit_code == 3);
}
