// End-to-end checks of the command-line surface via subprocesses.

#include "ghzlhv/model.hpp"
#include "ghzlhv/search.hpp"

#include <doctest.h>
#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <string>
#include <sys/wait.h>

using namespace ghzlhv;

namespace {

const std::string kDataDir = GHZLHV_DATA_DIR;
const std::string kCli = GHZLHV_CLI_PATH;

struct CommandResult {
    int exit_code = -1;
    std::string output;
};

CommandResult run_cli(const std::string& args) {
    std::string command = "GHZLHV_TABLE_FILE='" + kDataDir + "/canonical-table.txt' '" + kCli +
                          "' " + args + " 2>/dev/null";
    CommandResult result;
    FILE* pipe = popen(command.c_str(), "r");
    REQUIRE(pipe != nullptr);
    char buf[4096];
    size_t got;
    while ((got = fread(buf, 1, sizeof(buf), pipe)) > 0) {
        result.output.append(buf, got);
    }
    int status = pclose(pipe);
    result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return result;
}

}  // namespace

TEST_CASE("predict json output round-trips as fit targets with objective 0") {
    std::string targets_path = "cli-roundtrip-targets.json";
    CommandResult predict = run_cli("predict --model pinned --format json --out " + targets_path);
    REQUIRE(predict.exit_code == 0);

    CommandResult fit = run_cli("fit --targets " + targets_path + " --format json");
    REQUIRE(fit.exit_code == 0);
    auto summary = nlohmann::json::parse(fit.output);
    CHECK(summary.at("objective").get<double>() < 1e-9);
    CHECK(summary.at("metric") == "l1");
    std::remove(targets_path.c_str());
}

TEST_CASE("machine-readable outputs are byte-identical across invocations") {
    for (const char* args : {"predict --model pinned --format json",
                             "sample --model pinned --context yyx --n 5000 --seed 11 --format json",
                             "compare --data-file --format csv"}) {
        std::string a = args;
        if (a.find("--data-file") != std::string::npos) {
            a = "compare --data '" + kDataDir + "/pan-aggregates.json' --format csv";
        }
        CommandResult first = run_cli(a);
        CommandResult second = run_cli(a);
        CHECK(first.exit_code == 0);
        CHECK(first.output == second.output);
        CHECK_FALSE(first.output.empty());
    }
}

TEST_CASE("exit code contract") {
    CHECK(run_cli("predict --context zzz").exit_code == 2);       // usage error
    CHECK(run_cli("sample --model pinned --context yyx --n 0").exit_code == 2);
    CHECK(run_cli("predict --no-such-flag").exit_code == 2);
    CHECK(run_cli("compare --data /no/such/file.json").exit_code == 2);
    CHECK(run_cli("predict --model pinned --context yyx").exit_code == 0);
}

TEST_CASE("search-table reproduces the pinned table from the bundled profile") {
    CommandResult r = run_cli("search-table --constraints '" + kDataDir +
                              "/default-constraints.json' --limit 2 --format json");
    REQUIRE(r.exit_code == 0);
    auto doc = nlohmann::json::parse(r.output);
    REQUIRE(doc.at("tables").size() == 1);  // the profile pins the table uniquely
    CHECK(doc.at("partial") == false);

    UniformTable pinned = load_table(kDataDir + "/canonical-table.txt");
    std::vector<InstructionSet> sets;
    for (const auto& text : doc.at("tables")[0]) {
        sets.push_back(parse_instruction_set(text.get<std::string>()));
    }
    CHECK(UniformTable::from_sets(sets) == pinned);
}

TEST_CASE("bundled constraints file matches the built-in profile") {
    TableConstraints bundled = load_constraints(kDataDir + "/default-constraints.json");
    TableConstraints builtin = default_table_constraints();
    CHECK(bundled.uniform_single_marginals == builtin.uniform_single_marginals);
    CHECK(bundled.uniform_pair_marginals == builtin.uniform_pair_marginals);
    CHECK(bundled.required_members == builtin.required_members);
    CHECK(bundled.context_counts == builtin.context_counts);
}

TEST_CASE("fit emits a loadable model file") {
    std::string model_path = "cli-fit-model.txt";
    std::string targets_path = "cli-fit-targets.json";
    REQUIRE(run_cli("qm --format json --out " + targets_path).exit_code == 0);
    CommandResult fit =
        run_cli("fit --targets " + targets_path + " --model-out " + model_path + " --format json");
    REQUIRE(fit.exit_code == 0);

    ModelDistribution fitted = load_model(model_path);  // validates on load
    CommandResult mermin = run_cli("mermin --model " + model_path + " --format json");
    CHECK(mermin.exit_code == 0);
    auto doc = nlohmann::json::parse(mermin.output);
    CHECK(doc.at("value").get<double>() <= 2.0 + 1e-9);
    std::remove(model_path.c_str());
    std::remove(targets_path.c_str());
}
