#include "ghzlhv/search.hpp"

#include <doctest.h>

#include <algorithm>
#include <fstream>
#include <string>
#include <vector>

using namespace ghzlhv;

namespace {

const std::string kPinnedTablePath = std::string(GHZLHV_DATA_DIR) + "/canonical-table.txt";

std::vector<int> member_ranks(const UniformTable& t) {
    std::vector<int> out;
    for (InstructionSet s : t.members()) out.push_back(s.code());
    return out;
}

}  // namespace

TEST_CASE("default profile search finds the pinned table first") {
    SearchResult result = search_tables(default_table_constraints(), 3);
    REQUIRE(result.tables.size() >= 1);
    CHECK_FALSE(result.partial);

    // The committed data file is exactly the first (lexicographically
    // minimal) solution, and contains the eight caption-listed sets.
    UniformTable pinned = load_table(kPinnedTablePath);
    CHECK(result.tables.front() == pinned);
    for (InstructionSet s : caption_required_sets()) {
        CHECK(result.tables.front().contains(s));
    }
    CHECK(verify_table(result.tables.front(), default_table_constraints()).all_pass());

    // Deterministic: a second run returns the same tables in the same order.
    SearchResult again = search_tables(default_table_constraints(), 3);
    REQUIRE(again.tables.size() == result.tables.size());
    for (size_t i = 0; i < result.tables.size(); ++i) {
        CHECK(again.tables[i] == result.tables[i]);
    }
}

TEST_CASE("the default profile pins the table uniquely") {
    SearchResult result = search_tables(default_table_constraints(), 100);
    CHECK_FALSE(result.partial);
    CHECK(result.tables.size() == 1);

    // Even without the required-members constraint the outcome counts and
    // marginals admit exactly one table.
    TableConstraints no_required = default_table_constraints();
    no_required.required_members = 0;
    SearchResult wide = search_tables(no_required, 100);
    CHECK(wide.tables.size() == 1);
    CHECK(wide.tables.front() == result.tables.front());
}

TEST_CASE("the pinned table saturates the deterministic Mermin bound") {
    // Independent characterization: the unique solution is the set of the
    // 32 deterministic strategies whose Mermin combination equals +2.
    UniformTable pinned = load_table(kPinnedTablePath);
    uint64_t mermin_mask = 0;
    for (InstructionSet s : all_instruction_sets()) {
        auto sign = [&](const char* ctx) { return outcome_of(s, parse_context(ctx)).product(); };
        int m = sign("xxx") - sign("xyy") - sign("yxy") - sign("yyx");
        if (m == 2) mermin_mask |= uint64_t(1) << s.code();
    }
    CHECK(pinned.mask() == mermin_mask);
}

TEST_CASE("infeasible constraint profiles return empty results") {
    // All 32 members on one yyx outcome: contradicts uniform marginals (and
    // is impossible outright, only 8 sets produce a given yyx outcome).
    TableConstraints packed;
    packed.uniform_single_marginals = true;
    packed.uniform_pair_marginals = true;
    Context yyx = parse_context("yyx");
    for (int o = 0; o < 8; ++o) {
        packed.set_count(yyx, Outcome(yyx, o), Outcome(yyx, o).name() == "RRV'" ? 32 : 0);
    }
    SearchResult r1 = search_tables(packed, 5);
    CHECK(r1.tables.empty());
    CHECK_FALSE(r1.partial);

    // Requiring all 64 sets exceeds the table size.
    TableConstraints everything;
    everything.required_members = ~uint64_t(0);
    SearchResult r2 = search_tables(everything, 5);
    CHECK(r2.tables.empty());
}

TEST_CASE("inconsistent count profiles are rejected") {
    TableConstraints c;
    Context yyx = parse_context("yyx");
    for (int o = 0; o < 8; ++o) c.set_count(yyx, Outcome(yyx, o), 1);  // sums to 8, not 32
    CHECK_THROWS_AS(search_tables(c, 1), ValidationError);

    TableConstraints big;
    big.set_count(yyx, Outcome(yyx, 0), 33);
    CHECK_THROWS_AS(search_tables(big, 1), ValidationError);
}

TEST_CASE("marginal-only search: every returned table re-verifies") {
    TableConstraints marginals;
    marginals.uniform_single_marginals = true;
    marginals.uniform_pair_marginals = true;
    SearchResult result = search_tables(marginals, 40);
    CHECK(result.tables.size() == 40);

    std::vector<std::vector<int>> ranks;
    for (const auto& t : result.tables) {
        CHECK(verify_table(t, marginals).all_pass());
        ranks.push_back(member_ranks(t));
    }
    // Emission order is lexicographic on the member rank lists.
    for (size_t i = 1; i < ranks.size(); ++i) {
        CHECK(ranks[i - 1] < ranks[i]);
    }
}

TEST_CASE("node budget produces a partial result flag") {
    SearchResult result = search_tables(default_table_constraints(), 10, 50);
    CHECK(result.partial);
    CHECK(result.nodes_explored > 0);
}

TEST_CASE("verify_table reports the failing constraint") {
    UniformTable pinned = load_table(kPinnedTablePath);
    TableConstraints constraints = default_table_constraints();

    SUBCASE("missing required member -> C4") {
        // Swap one caption set out for a non-member.
        InstructionSet required = caption_required_sets().front();
        REQUIRE(pinned.contains(required));
        uint64_t mask = pinned.mask() & ~(uint64_t(1) << required.code());
        for (int code = 0; code < 64; ++code) {
            if (!((pinned.mask() >> code) & 1)) {
                mask |= uint64_t(1) << code;
                break;
            }
        }
        ConstraintReport report = verify_table(UniformTable(mask), constraints);
        CHECK_FALSE(report.all_pass());
        bool c4_failed = false;
        for (const auto& check : report.failures()) {
            if (check.id == "C4") {
                c4_failed = true;
                CHECK(check.detail.find(required.to_string()) != std::string::npos);
            }
        }
        CHECK(c4_failed);
    }

    SUBCASE("first 32 sets in canonical order fail") {
        UniformTable first32(0x00000000FFFFFFFFull);
        ConstraintReport report = verify_table(first32, constraints);
        CHECK_FALSE(report.all_pass());
        CHECK_FALSE(report.failures().empty());
    }

    SUBCASE("pinned table passes everything") {
        ConstraintReport report = verify_table(pinned, constraints);
        CHECK(report.all_pass());
        CHECK(report.failures().empty());
    }
}

TEST_CASE("canonical_table loads and re-verifies the data file") {
    UniformTable table = canonical_table(kPinnedTablePath);
    CHECK(table.members().size() == 32);

    CHECK_THROWS_AS(canonical_table(std::string(GHZLHV_DATA_DIR) + "/no-such-file.txt"),
                    ParseError);

    // A well-formed table that fails verification is an integrity error.
    std::string bogus_path = "bogus-canonical.txt";
    save_table(bogus_path, UniformTable(0x00000000FFFFFFFFull));
    CHECK_THROWS_AS(canonical_table(bogus_path), IntegrityError);
    std::remove(bogus_path.c_str());
}

TEST_CASE("constraint profiles round trip through JSON") {
    TableConstraints original = default_table_constraints();
    nlohmann::json j = constraints_to_json(original);
    TableConstraints back = constraints_from_json(j);

    CHECK(back.uniform_single_marginals == original.uniform_single_marginals);
    CHECK(back.uniform_pair_marginals == original.uniform_pair_marginals);
    CHECK(back.required_members == original.required_members);
    CHECK(back.context_counts == original.context_counts);

    CHECK_THROWS_AS(constraints_from_json(nlohmann::json::object()), ParseError);
    nlohmann::json bad = j;
    bad["context_counts"]["yyx"]["RRV'"] = -2;
    CHECK_THROWS_AS(constraints_from_json(bad), ParseError);
}
