#include "cbnlearn/cli.hpp"
#include "cbnlearn/io.hpp"

#include <doctest.h>

#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace cbnlearn;

namespace {

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result run(std::vector<std::string> args) {
    args.insert(args.begin(), "cbnlearn");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

std::string scenario(const std::string& name) { return std::string(CBNLEARN_SOURCE_DIR) + "/scenarios/" + name; }

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() / ("cbnlearn_cli_" + std::to_string(reinterpret_cast<std::uintptr_t>(this)));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string operator/(const std::string& name) const { return (path / name).string(); }
};

/// Value columns of the belief table row for a variable.
std::string row_of(const std::string& table, const std::string& name) {
    std::istringstream is(table);
    std::string line;
    while (std::getline(is, line))
        if (line.rfind(name + " ", 0) == 0) return line.substr(line.find_first_not_of(' ', name.size()));
    return {};
}

} // namespace

TEST_CASE("usage errors exit with 1") {
    CHECK(run({}).code == kExitUsage);
    CHECK(run({"teleport"}).code == kExitUsage);
    CHECK(run({"gen-data", "--obs", "5"}).code == kExitUsage);
    CHECK(run({"infer", "--cbn", "x", "--method", "magic"}).code == kExitUsage);
    const auto help = run({"--help"});
    CHECK(help.code == kExitOk);
    CHECK(help.out.find("discover") != std::string::npos);
}

TEST_CASE("data errors exit with 2") {
    TempDir dir;
    CHECK(run({"gen-data", "--scenario", dir / "missing", "--obs", "5", "--out", dir / "d.csv"}).code == kExitData);

    write_file(dir / "bad.scenario", "variable A doable\ncpt A 1: 0.5\n");
    const auto bad = run({"gen-data", "--scenario", dir / "bad.scenario", "--obs", "5", "--out", dir / "d.csv"});
    CHECK(bad.code == kExitData);
    CHECK(bad.err.find("line 2") != std::string::npos);
}

TEST_CASE("gen-data is deterministic") {
    TempDir dir;
    const auto a = run({"gen-data", "--scenario", scenario("living_room.scenario"), "--obs", "500", "--seed", "42",
                        "--out", dir / "a.csv"});
    const auto b = run({"gen-data", "--scenario", scenario("living_room.scenario"), "--obs", "500", "--seed", "42",
                        "--out", dir / "b.csv"});
    REQUIRE(a.code == 0);
    REQUIRE(b.code == 0);
    const auto text = read_file(dir / "a.csv");
    CHECK(text == read_file(dir / "b.csv"));
    CHECK(parse_dataset_csv(text).size() == 500);
}

TEST_CASE("end-to-end workflow") {
    TempDir dir;
    const std::string truth = scenario("living_room.scenario");
    REQUIRE(run({"gen-data", "--scenario", truth, "--obs", "500", "--seed", "7", "--out", dir / "d.csv"}).code == 0);

    const auto discovered = run({"discover", "--scenario", truth, "--data", dir / "d.csv", "--alpha", "0.05",
                                 "--interventions", "20", "--seed", "7", "--nd", "Pr,Pow,T", "--out", dir / "g.dot",
                                 "--raw", dir / "raw.dot"});
    REQUIRE_MESSAGE(discovered.code == 0, discovered.err);
    const auto learned = parse_dot(read_file(dir / "g.dot"));
    CHECK(learned.diagram.has_arrow(learned.diagram.id("H"), learned.diagram.id("T")));
    CHECK_FALSE(learned.diagram.doable(learned.diagram.id("T")));
    CHECK(read_file(dir / "raw.dot").find("nd_candidate") != std::string::npos);

    const auto compared = run({"compare", "--learned", dir / "g.dot", "--truth", truth, "--dot", dir / "diff.dot"});
    REQUIRE(compared.code == 0);
    CHECK(compared.out.find("precision ") != std::string::npos);
    CHECK(compared.out.find("recall ") != std::string::npos);
    CHECK(read_file(dir / "diff.dot").find("digraph comparison") != std::string::npos);

    // fit the true structure so the lamp question has a definite answer
    const auto truth_scm = build_scenario(parse_scenario(read_file(truth)));
    write_file(dir / "truth.dot", render_dot(LearnedGraph{truth_scm.diagram(), {}}));
    const auto fitted = run({"fit", "--scenario", truth, "--structure", dir / "truth.dot", "--data", dir / "d.csv",
                             "--out", dir / "net.scenario", "--augment", "--seed", "3"});
    REQUIRE_MESSAGE(fitted.code == 0, fitted.err);

    const auto prior = run({"infer", "--cbn", dir / "net.scenario"});
    const auto lamp_off = run({"infer", "--cbn", dir / "net.scenario", "--evidence", "L=0", "--method", "bp"});
    const auto lamp_off_enum = run({"infer", "--cbn", dir / "net.scenario", "--evidence", "L=0", "--method", "enum"});
    REQUIRE(prior.code == 0);
    REQUIRE(lamp_off.code == 0);
    CHECK(lamp_off.out == lamp_off_enum.out);
    CHECK(lamp_off.out.rfind("variable", 0) == 0);
    CHECK(row_of(lamp_off.out, "L") == "1.0000   0.0000");
    CHECK(std::stod(row_of(lamp_off.out, "P")) > std::stod(row_of(prior.out, "P")));
    CHECK(row_of(lamp_off.out, "W") == row_of(prior.out, "W"));

    CHECK(run({"infer", "--cbn", dir / "net.scenario", "--evidence", "L=2"}).code == kExitUsage);
    CHECK(run({"infer", "--cbn", dir / "net.scenario", "--evidence", "Q=1"}).code == kExitData);
}

TEST_CASE("belief propagation is refused on a looped network") {
    TempDir dir;
    write_file(dir / "diamond.scenario",
               "variable A doable\nvariable B doable\nvariable C doable\nvariable D doable\n"
               "parents B: A\nparents C: A\nparents D: B C\n"
               "cpt A : 0.5\ncpt B 0: 0.2\ncpt B 1: 0.7\ncpt C 0: 0.4\ncpt C 1: 0.9\n"
               "cpt D 00: 0.1\ncpt D 01: 0.5\ncpt D 10: 0.6\ncpt D 11: 0.95\n");
    CHECK(run({"infer", "--cbn", dir / "diamond.scenario", "--method", "bp"}).code == kExitData);
    CHECK(run({"infer", "--cbn", dir / "diamond.scenario", "--method", "enum"}).code == kExitOk);
    CHECK(run({"infer", "--cbn", dir / "diamond.scenario"}).code == kExitOk);
}
