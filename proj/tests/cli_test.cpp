#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>
#include <sys/wait.h>

#include "cli/commands.hpp"
#include "cli/structure_file.hpp"
#include <gptcloak/gpt.hpp>
#include <gptcloak/errors.hpp>

using namespace gptcloak;
using namespace gptcloak::cli;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        std::random_device rd;
        path = fs::temp_directory_path() / ("gptcloak_cli_test_" + std::to_string(rd()));
        fs::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
    fs::path operator/(const std::string& name) const { return path / name; }
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
    std::vector<std::vector<std::string>> rows;
    std::istringstream in(slurp(p));
    std::string line;
    while (std::getline(in, line)) {
        std::vector<std::string> cells;
        std::size_t start = 0;
        while (true) {
            const std::size_t comma = line.find(',', start);
            cells.push_back(line.substr(start, comma - start));
            if (comma == std::string::npos) break;
            start = comma + 1;
        }
        rows.push_back(std::move(cells));
    }
    return rows;
}

struct Run {
    int status;
    std::string out;
    std::string err;
};

Run invoke(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int status = run(args, out, err);
    return {status, out.str(), err.str()};
}

void write_structure(const fs::path& p, const RadialLayeredStructure& s) { write_structure_file(p, {s, {}}); }

}  // namespace

TEST_CASE("structure files round-trip bit for bit") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0.01, 10.0);
    for (int trial = 0; trial < 50; ++trial) {
        const int n = 1 + trial % 5;
        std::vector<double> radii, sigma;
        double r = 2.0 + u(rng);
        for (int j = 0; j < n; ++j) {
            radii.push_back(r);
            r *= 0.9 * u(rng) / 10.0 + 0.05;
            sigma.push_back(u(rng) / 3.0);
        }
        const StructureFile in{RadialLayeredStructure(radii, sigma, u(rng)),
                               StructureMetadata{.order = n, .core = "fixed=0.5", .converged = true,
                                                 .iterations = 4, .generator = "test \"quoted\""}};
        const StructureFile out = parse_structure_file(format_structure_file(in));
        CHECK(out.structure == in.structure);
        CHECK(out.metadata.order == in.metadata.order);
        CHECK(out.metadata.core == in.metadata.core);
        CHECK(out.metadata.converged == in.metadata.converged);
        CHECK(out.metadata.iterations == in.metadata.iterations);
        CHECK(out.metadata.generator == in.metadata.generator);
    }
}

TEST_CASE("structure files print 17 significant digits") {
    const std::string text = format_structure_file({RadialLayeredStructure({2.0, 1.0}, {0.5, 3.0}), {}});
    CHECK(text.find("5.0000000000000000e-01") != std::string::npos);
    CHECK(text.find("\"radii\": [2.0000000000000000e+00, 1.0000000000000000e+00]") != std::string::npos);
}

TEST_CASE("malformed structure files are rejected") {
    CHECK_THROWS_AS(parse_structure_file("not json"), FileError);
    CHECK_THROWS_AS(parse_structure_file("[1, 2]"), FileError);
    CHECK_THROWS_AS(parse_structure_file(R"({"format":"other","version":1,"background":1,"radii":[1],"conductivities":[2]})"),
                    FileError);
    CHECK_THROWS_AS(parse_structure_file(R"({"format":"gptcloak-structure","version":2,"background":1,"radii":[1],"conductivities":[2]})"),
                    FileError);
    CHECK_THROWS_AS(parse_structure_file(R"({"format":"gptcloak-structure","version":1,"background":1,"conductivities":[2]})"),
                    FileError);
    CHECK_THROWS_AS(parse_structure_file(R"({"format":"gptcloak-structure","version":1,"background":1,"radii":[1,2],"conductivities":[2,3]})"),
                    FileError);
    CHECK_THROWS_AS(parse_structure_file(R"({"format":"gptcloak-structure","version":1,"background":1,"radii":["a"],"conductivities":[2]})"),
                    FileError);
    CHECK_NOTHROW(parse_structure_file(R"({"format":"gptcloak-structure","version":1,"background":1,"radii":[1],"conductivities":[2]})"));
}

TEST_CASE("atomic writes leave no temporary files behind") {
    TempDir dir;
    write_file_atomic(dir / "a.txt", "one\n");
    write_file_atomic(dir / "a.txt", "two\n");
    CHECK(slurp(dir / "a.txt") == "two\n");
    CHECK(std::distance(fs::directory_iterator(dir.path), fs::directory_iterator{}) == 1);
    CHECK_THROWS_AS(write_file_atomic(dir / "missing" / "a.txt", "x"), FileError);
}

TEST_CASE("flag value parsing") {
    CHECK(parse_core("free").kind() == CoreKind::Free);
    CHECK(parse_core("insulated").kind() == CoreKind::Insulated);
    CHECK(parse_core("fixed=5").value() == 5.0);
    CHECK(parse_core("fixed=0").kind() == CoreKind::Insulated);
    CHECK_THROWS_AS(parse_core("fixed=-1"), ConfigError);
    CHECK_THROWS_AS(parse_core("fixed="), ConfigError);
    CHECK_THROWS_AS(parse_core("fixed=2x"), ConfigError);
    CHECK_THROWS_AS(parse_core("Free"), ConfigError);

    CHECK(parse_list("--rho-list", "0.1,0.05,0.025") == std::vector<double>{0.1, 0.05, 0.025});
    CHECK_THROWS_AS(parse_list("--rho-list", "0.1,,0.2"), ConfigError);
    CHECK_THROWS_AS(parse_list("--rho-list", ""), ConfigError);
    CHECK_THROWS_AS(parse_list("--rho-list", "nan"), ConfigError);
    try {
        parse_list("--radii", "2,x");
        FAIL("expected a ConfigError");
    } catch (const ConfigError& e) {
        CHECK(e.field() == "--radii");
        CHECK(std::string(e.what()).starts_with("--radii: "));
    }
}

TEST_CASE("gpt subcommand") {
    TempDir dir;
    SUBCASE("single disk gives 4 pi") {
        write_structure(dir / "disk.json", RadialLayeredStructure({2.0}, {3.0}));
        const Run r = invoke({"gpt", "--structure", (dir / "disk.json").string(), "--kmax", "1", "--out", (dir / "g.csv").string()});
        REQUIRE(r.status == 0);
        const auto rows = read_csv(dir / "g.csv");
        REQUIRE(rows.size() == 2);
        CHECK(rows[0] == std::vector<std::string>{"k", "M_k"});
        CHECK(rows[1][0] == "1");
        CHECK(rows[1][1].starts_with("12.566370"));
        CHECK(std::stod(rows[1][1]) == doctest::Approx(4 * std::numbers::pi).epsilon(1e-14));
    }
    SUBCASE("homogeneous structure gives zeros") {
        write_structure(dir / "h.json", RadialLayeredStructure({2.0, 1.0}, {1.0, 1.0}));
        REQUIRE(invoke({"gpt", "--structure", (dir / "h.json").string(), "--kmax", "4", "--out", (dir / "g.csv").string()}).status == 0);
        const auto rows = read_csv(dir / "g.csv");
        REQUIRE(rows.size() == 5);
        for (std::size_t i = 1; i < rows.size(); ++i) CHECK(std::stod(rows[i][1]) == 0.0);
    }
    SUBCASE("default kmax is 50") {
        write_structure(dir / "disk.json", RadialLayeredStructure({2.0}, {3.0}));
        REQUIRE(invoke({"gpt", "--structure", (dir / "disk.json").string(), "--out", (dir / "g.csv").string()}).status == 0);
        CHECK(read_csv(dir / "g.csv").size() == 51);
    }
}

TEST_CASE("CSV output is deterministic and LF terminated") {
    TempDir dir;
    write_structure(dir / "s.json", RadialLayeredStructure({2.0, 1.5, 0.7}, {0.3, 4.0, 1.7}));
    const std::string s = (dir / "s.json").string();
    for (const auto& args : std::vector<std::vector<std::string>>{
             {"gpt", "--structure", s, "--kmax", "20"},
             {"dtn", "--structure", s, "--rho", "0.2", "--s", "2", "--kmax", "20"},
             {"field", "--structure", s, "--mode", "2", "--grid", "21"},
             {"pushforward", "--structure", s, "--rho", "0.3", "--grid", "21"}}) {
        auto a = args, b = args;
        a.insert(a.end(), {"--out", (dir / "a.csv").string()});
        b.insert(b.end(), {"--out", (dir / "b.csv").string()});
        REQUIRE(invoke(a).status == 0);
        REQUIRE(invoke(b).status == 0);
        const std::string text = slurp(dir / "a.csv");
        CHECK(text == slurp(dir / "b.csv"));
        CHECK(text.find('\r') == std::string::npos);
        CHECK(text.back() == '\n');
    }
}

TEST_CASE("dtn subcommand") {
    TempDir dir;
    write_structure(dir / "disk.json", RadialLayeredStructure({2.0}, {3.0}));
    const Run r = invoke({"dtn", "--structure", (dir / "disk.json").string(), "--rho", "0.1", "--s", "2", "--kmax", "50",
                       "--out", (dir / "d.csv").string()});
    REQUIRE(r.status == 0);
    const auto rows = read_csv(dir / "d.csv");
    REQUIRE(rows.size() == 53);
    CHECK(rows[0] == std::vector<std::string>{"k", "delta_k"});
    CHECK(rows[1][0] == "1");
    CHECK(std::stod(rows[1][1]) == doctest::Approx(5.0251e-3).epsilon(1e-4));
    CHECK(rows[51][0] == "sup_norm");
    CHECK(std::stod(rows[51][1]) == std::stod(rows[1][1]));
    CHECK(rows[52][0] == "tail_bound");
    CHECK(std::stod(rows[52][1]) > 0.0);
    CHECK(r.out.find("sup_norm=") != std::string::npos);

    SUBCASE("no analytic tail leaves the cell empty") {
        write_structure(dir / "small.json", RadialLayeredStructure({1.0}, {3.0}));
        REQUIRE(invoke({"dtn", "--structure", (dir / "small.json").string(), "--rho", "0.6", "--s", "1", "--kmax", "5",
                     "--out", (dir / "d.csv").string()})
                    .status == 0);
        const auto small = read_csv(dir / "d.csv");
        CHECK(small.back() == std::vector<std::string>{"tail_bound", ""});
    }
    SUBCASE("geometry violations fail") {
        const Run bad = invoke({"dtn", "--structure", (dir / "disk.json").string(), "--rho", "1", "--s", "2", "--out",
                             (dir / "d.csv").string()});
        CHECK(bad.status == kExitFailure);
        CHECK(bad.err.find("B_s") != std::string::npos);
    }
}

TEST_CASE("design subcommand") {
    TempDir dir;
    const fs::path out = dir / "d3.json";
    const Run r = invoke({"design", "--order", "3", "--core", "free", "--out", out.string()});
    REQUIRE(r.status == 0);
    CHECK(r.out.find("converged=true\n") != std::string::npos);
    CHECK(r.out.find("iterations=") != std::string::npos);
    REQUIRE(fs::exists(report_path(out)));

    const StructureFile file = read_structure_file(out);
    CHECK(file.metadata.order == 3);
    CHECK(file.metadata.core == "free");
    CHECK(file.structure.radii()[1] == doctest::Approx(2.0 - 1.0 / 3.0));

    SUBCASE("first N GPTs vanish and the round trip reproduces them exactly") {
        REQUIRE(invoke({"gpt", "--structure", out.string(), "--kmax", "6", "--out", (dir / "g.csv").string()}).status == 0);
        const auto rows = read_csv(dir / "g.csv");
        const std::string report = slurp(report_path(out));
        for (int k = 1; k <= 3; ++k) {
            const double m = std::stod(rows[static_cast<std::size_t>(k)][1]);
            CHECK(std::abs(m) / (2 * std::numbers::pi * k * std::pow(2.0, 2 * k)) <= 1e-10);
            CHECK(m == gpt(file.structure, k));
        }
        for (int k = 4; k <= 6; ++k) CHECK(std::abs(std::stod(rows[static_cast<std::size_t>(k)][1])) > 1.0);
        CHECK(report.find("\"converged\": true") != std::string::npos);
        CHECK(report.find("\"residual_history\"") != std::string::npos);
    }
    SUBCASE("low modes of the DtN perturbation vanish") {
        REQUIRE(invoke({"dtn", "--structure", out.string(), "--rho", "0.1", "--kmax", "6", "--out", (dir / "t.csv").string()})
                    .status == 0);
        const auto rows = read_csv(dir / "t.csv");
        for (int k = 1; k <= 3; ++k) CHECK(std::abs(std::stod(rows[static_cast<std::size_t>(k)][1])) <= 1e-10);
    }
    SUBCASE("decay slope is 2N+2") {
        const Run d = invoke({"decay", "--structure", out.string(), "--out", (dir / "c.csv").string()});
        REQUIRE(d.status == 0);
        const auto pos = d.out.find("slope=");
        REQUIRE(pos != std::string::npos);
        CHECK(std::stod(d.out.substr(pos + 6)) == doctest::Approx(8.0).epsilon(0.025));
        const auto rows = read_csv(dir / "c.csv");
        REQUIRE(rows.size() == 4);
        CHECK(rows[0] == std::vector<std::string>{"rho", "sup_norm"});
    }
    SUBCASE("explicit radii") {
        const fs::path o = dir / "r.json";
        REQUIRE(invoke({"design", "--order", "1", "--core", "fixed=3", "--radii", "2,1.4142135623730951", "--out", o.string()})
                    .status == 0);
        CHECK(read_structure_file(o).structure.conductivities()[0] == doctest::Approx(2 * std::sqrt(3.0) - 3.0));
    }
}

TEST_CASE("exit statuses") {
    TempDir dir;
    const std::string o = (dir / "x.json").string();
    SUBCASE("nonconvergence") {
        const Run r = invoke({"design", "--order", "6", "--core", "free", "--max-iterations", "1", "--out", o});
        CHECK(r.status == kExitFailure);
        CHECK(r.out.find("converged=false") != std::string::npos);
        CHECK(r.err.find("did not converge") != std::string::npos);
    }
    SUBCASE("invalid configurations name the field") {
        struct Case {
            std::vector<std::string> args;
            std::string field;
        };
        for (const Case& c : std::vector<Case>{
                 {{"design", "--order", "0", "--core", "free", "--out", o}, "--order"},
                 {{"design", "--order", "2", "--core", "soft", "--out", o}, "--core"},
                 {{"design", "--order", "2", "--core", "free", "--radii", "2,1", "--out", o}, "--radii"},
                 {{"design", "--order", "1", "--core", "free", "--radii", "1,2", "--out", o}, "--radii"},
                 {{"design", "--order", "1", "--core", "free", "--tolerance", "0", "--out", o}, "--tolerance"},
                 {{"gpt", "--structure", o, "--kmax", "0", "--out", o}, "--kmax"},
                 {{"dtn", "--structure", o, "--rho", "-1", "--out", o}, "--rho"},
                 {{"decay", "--structure", o, "--rho-list", "0.1", "--out", o}, "--rho-list"},
                 {{"decay", "--structure", o, "--rho-list", "0.1,abc", "--out", o}, "--rho-list"},
                 {{"field", "--structure", o, "--mode", "0", "--out", o}, "--mode"},
                 {{"field", "--structure", o, "--mode", "1", "--grid", "1", "--out", o}, "--grid"},
                 {{"pushforward", "--structure", o, "--rho", "1.5", "--out", o}, "--rho"}}) {
            const Run r = invoke(c.args);
            CHECK(r.status == kExitConfig);
            CHECK(r.err.find(c.field) != std::string::npos);
        }
    }
    SUBCASE("usage errors") {
        CHECK(invoke({}).status == kExitConfig);
        CHECK(invoke({"bogus"}).status == kExitConfig);
        CHECK(invoke({"gpt", "--out", o}).status == kExitConfig);
        CHECK(invoke({"--help"}).status == 0);
    }
    SUBCASE("missing and malformed files") {
        CHECK(invoke({"gpt", "--structure", (dir / "nope.json").string(), "--out", o}).status == kExitFile);
        write_file_atomic(dir / "bad.json", "{");
        CHECK(invoke({"gpt", "--structure", (dir / "bad.json").string(), "--out", o}).status == kExitFile);
    }
    SUBCASE("degenerate fits are reported distinctly") {
        write_structure(dir / "h.json", RadialLayeredStructure({2.0}, {1.0}));
        const Run r = invoke({"decay", "--structure", (dir / "h.json").string(), "--out", (dir / "c.csv").string()});
        CHECK(r.status == kExitDegenerateFit);
        CHECK(r.err.find("degenerate fit") != std::string::npos);
    }
}

TEST_CASE("field subcommand") {
    TempDir dir;
    SUBCASE("homogeneous mode 1 reproduces x") {
        write_structure(dir / "h.json", RadialLayeredStructure({2.0, 1.0}, {1.0, 1.0}));
        REQUIRE(invoke({"field", "--structure", (dir / "h.json").string(), "--mode", "1", "--grid", "11", "--out",
                     (dir / "f.csv").string()})
                    .status == 0);
        const auto rows = read_csv(dir / "f.csv");
        REQUIRE(rows.size() == 122);
        CHECK(rows[0] == std::vector<std::string>{"x", "y", "u"});
        for (std::size_t i = 1; i < rows.size(); ++i) {
            CHECK(std::stod(rows[i][2]) == doctest::Approx(std::stod(rows[i][0])).epsilon(1e-12));
        }
    }
    SUBCASE("insulated core samples are empty") {
        REQUIRE(invoke({"design", "--order", "2", "--core", "insulated", "--out", (dir / "i.json").string()}).status == 0);
        REQUIRE(invoke({"field", "--structure", (dir / "i.json").string(), "--mode", "1", "--grid", "41", "--out",
                     (dir / "f.csv").string()})
                    .status == 0);
        const auto rows = read_csv(dir / "f.csv");
        int empty = 0;
        for (std::size_t i = 1; i < rows.size(); ++i) {
            const double r = std::hypot(std::stod(rows[i][0]), std::stod(rows[i][1]));
            if (r < 1.0) {
                CHECK(rows[i][2].empty());
                ++empty;
            } else {
                CHECK_FALSE(rows[i][2].empty());
            }
        }
        CHECK(empty > 0);
    }
    SUBCASE("continuity across interfaces") {
        write_structure(dir / "s.json", RadialLayeredStructure({2.0, 1.2}, {5.0, 0.2}));
        double previous_jump = 0.0;
        for (int n : {101, 201, 401}) {
            REQUIRE(invoke({"field", "--structure", (dir / "s.json").string(), "--mode", "1", "--grid", std::to_string(n),
                         "--out", (dir / "f.csv").string()})
                        .status == 0);
            const auto rows = read_csv(dir / "f.csv");
            // middle row y = 0
            double jump = 0.0;
            const std::size_t base = 1 + static_cast<std::size_t>(n) * static_cast<std::size_t>(n / 2);
            for (int ix = 1; ix < n; ++ix) {
                const std::size_t i = base + static_cast<std::size_t>(ix);
                jump = std::max(jump, std::abs(std::stod(rows[i][2]) - std::stod(rows[i - 1][2])));
            }
            if (previous_jump > 0.0) CHECK(jump < 0.6 * previous_jump);
            previous_jump = jump;
        }
    }
}

TEST_CASE("pushforward subcommand") {
    TempDir dir;
    write_structure(dir / "s.json", RadialLayeredStructure({2.0, 1.5, 1.0}, {0.4, 3.0, 1.8}));
    REQUIRE(invoke({"pushforward", "--structure", (dir / "s.json").string(), "--rho", "0.2", "--grid", "41", "--out",
                 (dir / "p.csv").string()})
                .status == 0);
    const auto rows = read_csv(dir / "p.csv");
    CHECK(rows[0] == std::vector<std::string>{"x", "y", "a11", "a12", "a22"});
    std::size_t outer = 0;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const double x = std::stod(rows[i][0]), y = std::stod(rows[i][1]);
        CHECK(std::hypot(x, y) <= 2.0);
        const double a11 = std::stod(rows[i][2]), a12 = std::stod(rows[i][3]), a22 = std::stod(rows[i][4]);
        CHECK(a11 > 0.0);
        CHECK(a11 * a22 - a12 * a12 > 0.0);
        if (std::hypot(x, y) >= 1.5) {
            CHECK(rows[i][2] == "1");
            CHECK(rows[i][3] == "0");
            CHECK(rows[i][4] == "1");
            ++outer;
        }
    }
    CHECK(outer > 0);
}

TEST_CASE("installed executable") {
    TempDir dir;
    const std::string out = (dir / "d.json").string();
    const std::string log = (dir / "log.txt").string();
    const std::string cmd = std::string(GPTCLOAK_CLI_PATH) + " design --order 2 --core free --out " + out + " > " + log;
    const int status = std::system(cmd.c_str());
    REQUIRE(status != -1);
    CHECK(WEXITSTATUS(status) == 0);
    CHECK(slurp(log).find("converged=true") != std::string::npos);

    const std::string bad = std::string(GPTCLOAK_CLI_PATH) + " design --order 0 --core free --out " + out + " 2> " + log;
    const int bad_status = std::system(bad.c_str());
    CHECK(WEXITSTATUS(bad_status) == kExitConfig);
}
