#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "tns/driver.hpp"

using namespace tns;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("tns_test_" + name);
    fs::remove_all(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<std::vector<double>> read_csv(const fs::path& p, std::string& header) {
    std::ifstream in(p);
    std::getline(in, header);
    std::vector<std::vector<double>> rows;
    std::string line;
    while (std::getline(in, line)) {
        std::vector<double> row;
        std::stringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) row.push_back(std::stod(cell));
        rows.push_back(row);
    }
    return rows;
}

}  // namespace

TEST_CASE("run spec text round trip") {
    RunSpec spec;
    spec.n_cells = 4;
    spec.scheme.scheme = Scheme::CNLE;
    spec.scheme.convective = ConvectiveCase::RotationalBernoulli;
    spec.scheme.nu = 0.037;
    spec.scheme.T = 2.5;
    spec.scheme.N = 17;
    spec.scheme.C_cnle = 0.3;
    spec.datum = "random-trig";
    spec.seed = 123456789012345ULL;
    spec.degree = 3;
    spec.amplitude = 0.7;
    spec.out_dir = "some dir/run 1";
    spec.local_energy = false;
    spec.cn_threshold = 2.0;
    std::stringstream ss;
    write_run_spec(spec, ss);
    const RunSpec back = parse_run_spec(ss);
    std::stringstream again;
    write_run_spec(back, again);
    CHECK(again.str() == ss.str());
    CHECK(back.scheme.nu == spec.scheme.nu);
    CHECK(back.seed == spec.seed);
    CHECK(back.out_dir == spec.out_dir);
    CHECK(back.scheme.convective == ConvectiveCase::RotationalBernoulli);
}

TEST_CASE("config validation") {
    std::istringstream unknown("[mesh]\nn_cells = 2\nwidth = 3\n");
    CHECK_THROWS_AS((void)parse_run_spec(unknown), ConfigError);
    std::istringstream bad_number("[scheme]\nnu = fast\n");
    CHECK_THROWS_AS((void)parse_run_spec(bad_number), ConfigError);
    std::istringstream negative("[scheme]\nnu = -0.1\n");
    CHECK_THROWS_AS((void)parse_run_spec(negative), ConfigError);
    std::istringstream bad_preset("[datum]\npreset = vortex\n");
    CHECK_THROWS_AS((void)parse_run_spec(bad_preset), ConfigError);

    std::istringstream study("[study]\nlevels = 2,3,4\nalpha = 0.4\n");
    CHECK_THROWS_AS((void)parse_study_spec(study), ConfigError);
    std::istringstream relaxed("[study]\nlevels = 2,3\nalpha = 0.4\nstrict = false\n");
    CHECK(parse_study_spec(relaxed).alpha == 0.4);
    std::istringstream one("[study]\nlevels = 3\n");
    CHECK_THROWS_AS((void)parse_study_spec(one), ConfigError);
    std::istringstream cnab("[scheme]\nscheme = CNAB\n[study]\nlevels = 2,3\nalpha = 0.4\n");
    CHECK(parse_study_spec(cnab).levels == std::vector<int>{2, 3});
}

TEST_CASE("study step counts") {
    StudySpec s;
    s.base.scheme.T = 1.0;
    s.C = 0.05;
    s.alpha = 0.6;
    const double h = std::sqrt(3.0) * M_PI;
    CHECK(s.steps_for(h) == static_cast<int>(std::lround(1.0 / (0.05 * std::pow(h, 0.6)))));
    s.C = 1e6;
    CHECK(s.steps_for(h) == 1);
}

TEST_CASE("single run writes reproducible artifacts") {
    const fs::path dir = scratch("run");
    RunSpec spec;
    spec.n_cells = 2;
    spec.datum = "sine-shear";
    spec.scheme.N = 8;
    spec.out_dir = dir.string();
    const RunOutcome out = run_single(spec);
    for (const char* f : {"summary.csv", "report.tsv", "report.json", "metadata.json", "spec.ini", "trajectory.json"})
        CHECK(fs::exists(dir / f));
    std::string header;
    const auto rows = read_csv(dir / "summary.csv", header);
    CHECK(header == kSummaryHeader);
    CHECK(rows.size() == 8);
    for (const auto& r : rows) CHECK(std::abs(r[4]) <= 1e-8);
    CHECK(rows.back()[0] == 1.0);

    const std::string first = slurp(dir / "summary.csv");
    const std::string report = slurp(dir / "report.tsv");
    const RunSpec echoed = load_run_spec((dir / "spec.ini").string());
    (void)run_single(echoed);
    CHECK(slurp(dir / "summary.csv") == first);
    CHECK(slurp(dir / "report.tsv") == report);

    const DiagnosticsReport again = rerender_report(dir.string());
    CHECK(slurp(dir / "report.tsv") == report);
    CHECK(again.gap_l2 == out.report.gap_l2);
    fs::remove_all(dir);
}

TEST_CASE("trajectory dump round trip") {
    RunSpec spec;
    spec.n_cells = 2;
    spec.scheme.N = 3;
    const RunOutcome out = run_single(spec, false);
    std::stringstream ss;
    write_trajectory(out.trajectory, spec, ss);
    const StoredRun back = read_trajectory(ss);
    CHECK(back.trajectory.steps() == 3);
    for (int m = 0; m <= 3; ++m) CHECK((back.trajectory.velocity[m] - out.trajectory.velocity[m]).norm() == 0.0);
    CHECK(back.trajectory.times == out.trajectory.times);
    std::istringstream junk("{\"format\": 1}");
    CHECK_THROWS_AS((void)read_trajectory(junk), ConfigError);
}

TEST_CASE("zero datum gives zero norm columns") {
    const fs::path dir = scratch("zero");
    RunSpec spec;
    spec.n_cells = 2;
    spec.datum = "zero";
    spec.scheme.N = 2;
    spec.out_dir = dir.string();
    (void)run_single(spec);
    std::string header;
    for (const auto& r : read_csv(dir / "summary.csv", header))
        for (int c = 1; c <= 4; ++c) CHECK(r[c] == 0.0);
    fs::remove_all(dir);
}

TEST_CASE("CNAB study with a violated restriction records the breakdown") {
    const fs::path dir = scratch("cnab_study");
    StudySpec spec;
    spec.base.scheme.scheme = Scheme::CNAB;
    spec.base.scheme.T = 2.0e4;
    spec.base.scheme.c1 = 2.0;
    spec.base.local_energy = false;
    spec.base.out_dir = dir.string();
    spec.levels = {2, 3};
    spec.C = 500.0;
    const StudyTable table = run_study(spec);
    REQUIRE(table.rows.size() == 2);
    CHECK_FALSE(table.rows[0].cnab_recursion_ok);
    CHECK_FALSE(table.rows[0].coupling.cnab_ok);
    CHECK(fs::exists(dir / "study.csv"));
    CHECK(fs::exists(dir / "level_2" / "trajectory.json"));
    fs::remove_all(dir);
}

TEST_CASE("self-check suite passes") {
    for (const auto& c : run_checks()) {
        INFO(c.name << " = " << c.value);
        CHECK(c.passed);
    }
}
