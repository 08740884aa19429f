#include <gtest/gtest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include "../support.hpp"

namespace {

namespace fs = std::filesystem;

int cli(const std::string& args) {
    const std::string cmd = std::string(CVA_CLI) + " -q " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

// copy of the data directory with one file replaced
fs::path data_with(const std::string& file, const std::string& text) {
    const auto dir = cva::test::scratch("data_" + file);
    fs::create_directories(dir);
    for (const char* f : {"curve.csv", "cds_mid.csv", "cds_high.csv", "swaption_vols.csv"}) {
        fs::copy_file(cva::test::data(f), dir / f, fs::copy_options::overwrite_existing);
    }
    cva::test::write_text(dir / file, text);
    return dir;
}

}  // namespace

TEST(cli, list_presets) {
    EXPECT_EQ(cli("--list-presets"), 0);
}

TEST(cli, csv_output_is_byte_identical) {
    const auto a = cva::test::scratch("cli_a.csv");
    const auto b = cva::test::scratch("cli_b.csv");
    const std::string args = "--paths 200 --seed 9 --set rho_bar_C=-0.2,0.2 --out ";
    ASSERT_EQ(cli(args + a.string()), 0);
    ASSERT_EQ(cli(args + b.string()), 0);
    const auto text = slurp(a);
    EXPECT_EQ(text, slurp(b));
    EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 3);
    EXPECT_NE(text.find(",200,9\n"), std::string::npos);
}

TEST(cli, lgd_override_zeroes_rows) {
    const auto out = cva::test::scratch("cli_lgd.csv");
    ASSERT_EQ(cli("--paths 200 --lgd 0 0 --out " + out.string()), 0);
    std::istringstream rows(slurp(out));
    std::string line;
    std::getline(rows, line);
    int n = 0;
    while (std::getline(rows, line)) {
        EXPECT_NE(line.find(",0.000000,0.000000,0.000000,0.000000,"), std::string::npos) << line;
        ++n;
    }
    EXPECT_EQ(n, 1);
}

TEST(cli, exit_codes) {
    EXPECT_EQ(cli("--paths 200 --set data_dir=/no/such/dir"), 2);
    EXPECT_EQ(cli("--paths 200 --set rho_bar_C=0.9 rho_bar_I=same"), 3);
    const auto bad = data_with("cds_high.csv", "maturity_years,spread_bps\n1,234\n2,1000000\n");
    EXPECT_EQ(cli("--paths 200 --set data_dir=" + bad.string()), 4);
    EXPECT_EQ(cli("--paths 200 --set nonsense=1"), 1);
    EXPECT_EQ(cli("--preset table99"), 1);
}

TEST(cli, path_dump) {
    const auto file = cva::test::scratch("cli_paths.bin");
    std::filesystem::remove(file);
    ASSERT_EQ(cli("--paths 200 --set dump_paths_count=7 --dump-paths " + file.string()), 0);
    const auto ps = cva::read_paths_binary(file);
    EXPECT_EQ(ps.n_paths, 8u);  // rounded up to whole antithetic pairs
    EXPECT_EQ(ps.n_nodes, 521u);
    EXPECT_EQ(ps.seed, 20090526u);
}
