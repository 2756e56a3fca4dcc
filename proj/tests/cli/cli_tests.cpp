// End-to-end checks that drive the real binary: synth -> train (twice,
// byte-identical models) -> disaggregate -> evaluate -> viz, plus the
// documented exit codes for usage and data errors.
//
// Usage: cli_tests <nilmtree-binary> <fixtures-dir>

#include <sys/wait.h>
#include <unistd.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

int g_failures = 0;
std::string g_bin;
fs::path g_tmp;

void check(bool ok, const std::string& what) {
    std::cout << (ok ? "  ok: " : "  FAILED: ") << what << "\n";
    if (!ok) ++g_failures;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::size_t line_count(const fs::path& p) {
    std::ifstream in(p);
    std::size_t n = 0;
    std::string line;
    while (std::getline(in, line))
        if (!line.empty()) ++n;
    return n;
}

// runs the binary with `args`, captures combined output, returns exit code
int run(const std::string& args) {
    fs::path log = g_tmp / "run.log";
    std::string cmd = "\"" + g_bin + "\" " + args + " > \"" + log.string() + "\" 2>&1";
    int status = std::system(cmd.c_str());
    if (status == -1) return -1;
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

void expect_exit(const std::string& args, int want) {
    int got = run(args);
    check(got == want, "exit " + std::to_string(want) + " from: " + args +
                           (got == want ? "" : " (got " + std::to_string(got) + ")"));
    if (got != want) std::cout << slurp(g_tmp / "run.log") << "\n";
}

}  // namespace

int main(int argc, char** argv) {
    if (argc < 3) {
        std::cerr << "usage: cli_tests <nilmtree-binary> <fixtures-dir>\n";
        return 2;
    }
    g_bin = argv[1];
    fs::path fixtures = argv[2];
    g_tmp = fs::temp_directory_path() / ("nilmtree_cli_" + std::to_string(::getpid()));
    fs::remove_all(g_tmp);
    fs::create_directories(g_tmp);

    std::string house = (g_tmp / "house.csv").string();
    std::string schema = (g_tmp / "house.schema.json").string();
    std::string cfg = (fixtures / "house4.cfg").string();

    std::cout << "synth\n";
    expect_exit("synth --config \"" + cfg + "\" --out \"" + house + "\"", 0);
    check(fs::exists(house), "house.csv written");
    check(fs::exists(schema), "schema written next to it");
    check(line_count(house) == 3001, "header + one row per sample");

    std::cout << "train determinism\n";
    std::string model_a = (g_tmp / "modelA").string();
    std::string model_b = (g_tmp / "modelB").string();
    std::string train_args = "train --data \"" + house + "\" --schema \"" + schema +
                             "\" --w 8 --k 16 --seed 3 --out \"";
    expect_exit(train_args + model_a + "\"", 0);
    expect_exit(train_args + model_b + "\"", 0);
    check(fs::exists(fs::path(model_a) / "tree.json"), "model has tree.json");
    check(fs::exists(fs::path(model_a) / "manifest.txt"), "model has manifest.txt");
    std::string tree_a = slurp(fs::path(model_a) / "tree.json");
    check(!tree_a.empty() && tree_a == slurp(fs::path(model_b) / "tree.json"),
          "same seed gives byte-identical trees");

    std::cout << "disaggregate\n";
    std::string est = (g_tmp / "estimates.csv").string();
    expect_exit("disaggregate --model \"" + model_a + "\" --data \"" + house + "\" --schema \"" +
                    schema + "\" --out \"" + est + "\"",
                0);
    check(fs::exists(est), "estimates.csv written");
    std::ifstream ein(est);
    std::string header;
    std::getline(ein, header);
    check(header.rfind("timestamp,aggregate,", 0) == 0, "estimates header shape");
    check(line_count(est) == 601, "one row per test sample (0.2 of 3000)");

    std::cout << "evaluate\n";
    expect_exit("evaluate --result \"" + est + "\" --out \"" + g_tmp.string() + "\"", 0);
    check(fs::exists(g_tmp / "report.csv"), "report.csv written");
    check(fs::exists(g_tmp / "report.txt"), "report.txt written");
    check(line_count(g_tmp / "report.csv") == 7, "4 devices + average + micro + header");

    std::cout << "viz\n";
    expect_exit("viz --model \"" + model_a + "\" --out \"" + g_tmp.string() + "\"", 0);
    check(slurp(g_tmp / "tree.dot").rfind("digraph", 0) == 0, "dot output");
    check(fs::exists(g_tmp / "powerlets.txt"), "powerlet summary written");

    std::cout << "error paths\n";
    expect_exit("disaggregate --data \"" + house + "\"", 2);
    expect_exit("train --data \"" + (g_tmp / "nope.csv").string() + "\"", 3);
    expect_exit("train --no-such-flag", 2);

    fs::remove_all(g_tmp);
    if (g_failures != 0) {
        std::cout << g_failures << " check(s) failed\n";
        return 1;
    }
    std::cout << "all cli checks passed\n";
    return 0;
}
