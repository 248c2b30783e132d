#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace {

namespace fs = std::filesystem;

const fs::path kWorkDir = fs::temp_directory_path() / "specmap_cli_tests";

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const fs::path& path, const std::string& body) {
    fs::create_directories(path.parent_path());
    std::ofstream out(path);
    out << body;
}

int run(const std::string& args) {
    const std::string command = std::string(SPECMAP_CLI_PATH) + " " + args + " 2>/dev/null";
    const int status = std::system(command.c_str());
    return WEXITSTATUS(status);
}

struct Fixture {
    Fixture() {
        fs::remove_all(kWorkDir);
        fs::create_directories(kWorkDir);
        write_file(kWorkDir / "spike.json",
                   R"({"M":60,"N":120,"sigma":1.0,"spikes":[{"value":4.0,"multiplicity":1}]})");
        write_file(kWorkDir / "mp.json", R"({"M":50,"N":200,"sigma":1.0,"spikes":[]})");
        write_file(kWorkDir / "bad.json", R"({"M":4,"N":2,"sigma":1.0,"spikes":[]})");
    }
};

}  // namespace

TEST_CASE_FIXTURE(Fixture, "support writes the profile schema and a density grid") {
    const fs::path out = kWorkDir / "out_support";
    REQUIRE(run("support --scenario " + (kWorkDir / "mp.json").string() + " --out " +
                out.string()) == 0);
    const std::string json = slurp(out / "support.json");
    CHECK(json.find("\"Q\": 1") != std::string::npos);
    CHECK(json.find("\"x_minus\": 0.25") != std::string::npos);
    CHECK(json.find("\"mass_den\": 50") != std::string::npos);
    const std::string csv = slurp(out / "density.csv");
    CHECK(csv.rfind("x,density\n", 0) == 0);
}

TEST_CASE_FIXTURE(Fixture, "density is zero across the gap in the CSV") {
    const fs::path out = kWorkDir / "out_gap";
    REQUIRE(run("spiked --scenario " + (kWorkDir / "spike.json").string() + " --out " +
                out.string()) == 0);
    REQUIRE(run("support --scenario " + (kWorkDir / "spike.json").string() + " --out " +
                out.string() + " --grid 128") == 0);
    std::istringstream csv(slurp(out / "density.csv"));
    std::string line;
    std::getline(csv, line);  // header
    int zero_rows_between = 0;
    while (std::getline(csv, line)) {
        const auto comma = line.find(',');
        const double x = std::stod(line.substr(0, comma));
        const double d = std::stod(line.substr(comma + 1));
        if (x > 3.2 && x < 4.8 && d == 0.0) ++zero_rows_between;  // inside the gap
    }
    CHECK(zero_rows_between > 5);
}

TEST_CASE_FIXTURE(Fixture, "exit codes") {
    SUBCASE("scenario errors exit 2") {
        CHECK(run("support --scenario " + (kWorkDir / "bad.json").string() + " --out " +
                  (kWorkDir / "o1").string()) == 2);
        CHECK(run("support --scenario " + (kWorkDir / "missing.json").string() + " --out " +
                  (kWorkDir / "o2").string()) == 2);
    }
    SUBCASE("single-cluster separation exits 4") {
        CHECK(run("separation --scenario " + (kWorkDir / "mp.json").string() + " --out " +
                  (kWorkDir / "o3").string() + " --trials 2") == 4);
    }
    SUBCASE("thresholds inside a cluster exit 4") {
        CHECK(run("separation --scenario " + (kWorkDir / "spike.json").string() + " --out " +
                  (kWorkDir / "o4").string() + " --trials 2 --a 1.0 --b 1.1") == 4);
    }
    SUBCASE("malformed N grid exits 2") {
        CHECK(run("convergence --scenario " + (kWorkDir / "spike.json").string() + " --out " +
                  (kWorkDir / "o5").string() + " --trials 2 --n-grid 100,abc") == 2);
    }
    SUBCASE("unusable output directory exits 2") {
        CHECK(run("support --scenario " + (kWorkDir / "mp.json").string() +
                  " --out /dev/null/nested") == 2);
    }
    SUBCASE("grid resolution below 16 exits 2") {
        CHECK(run("support --scenario " + (kWorkDir / "mp.json").string() + " --out " +
                  (kWorkDir / "o6").string() + " --grid 8") == 2);
    }
}

TEST_CASE_FIXTURE(Fixture, "repeated runs with a fixed seed are byte-identical") {
    const std::string scenario = (kWorkDir / "spike.json").string();
    const fs::path out1 = kWorkDir / "rep1";
    const fs::path out2 = kWorkDir / "rep2";
    REQUIRE(run("separation --scenario " + scenario + " --out " + out1.string() +
                " --trials 12 --seed 7") == 0);
    REQUIRE(run("separation --scenario " + scenario + " --out " + out2.string() +
                " --trials 12 --seed 7") == 0);
    CHECK(slurp(out1 / "separation.json") == slurp(out2 / "separation.json"));

    REQUIRE(run("convergence --scenario " + scenario + " --out " + out1.string() +
                " --trials 4 --seed 9 --n-grid 60,120") == 0);
    REQUIRE(run("convergence --scenario " + scenario + " --out " + out2.string() +
                " --trials 4 --seed 9 --n-grid 60,120") == 0);
    CHECK(slurp(out1 / "convergence.json") == slurp(out2 / "convergence.json"));
    CHECK(slurp(out1 / "convergence.csv") == slurp(out2 / "convergence.csv"));
}
