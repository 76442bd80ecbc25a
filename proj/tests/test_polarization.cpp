#include "ghzlhv/polarization.hpp"

#include <doctest.h>

#include <set>
#include <string>

using namespace ghzlhv;

TEST_CASE("value signs and bases") {
    CHECK(pol_sign(Pol::HPrime) == 1);
    CHECK(pol_sign(Pol::VPrime) == -1);
    CHECK(pol_sign(Pol::R) == 1);
    CHECK(pol_sign(Pol::L) == -1);
    CHECK(pol_is_linear(Pol::HPrime));
    CHECK(pol_is_linear(Pol::VPrime));
    CHECK_FALSE(pol_is_linear(Pol::R));
    CHECK(pol_basis(Pol::L) == Basis::y);
}

TEST_CASE("context parsing and round trip") {
    Context yyx = parse_context("yyx");
    CHECK(yyx.basis(0) == Basis::y);
    CHECK(yyx.basis(1) == Basis::y);
    CHECK(yyx.basis(2) == Basis::x);
    CHECK(yyx.name() == "yyx");

    std::set<std::string> names;
    for (Context ctx : all_contexts()) {
        names.insert(ctx.name());
        CHECK(parse_context(ctx.name()) == ctx);
    }
    CHECK(names.size() == 8);

    CHECK_THROWS_AS(parse_context("zzz"), ParseError);
    CHECK_THROWS_AS(parse_context("yy"), ParseError);
    CHECK_THROWS_WITH_AS(parse_context("yzx"), doctest::Contains("position 2"), ParseError);
}

TEST_CASE("instruction set enumeration is complete and canonical") {
    const auto& all = all_instruction_sets();
    CHECK(all.size() == 64);

    std::set<std::string> texts;
    for (InstructionSet s : all) {
        std::string text = s.to_string();
        texts.insert(text);
        CHECK(parse_instruction_set(text) == s);  // print/parse round trip
    }
    CHECK(texts.size() == 64);

    // Lexicographic in the label order H' < V', R < L (not ASCII), photon 1
    // most significant; the rank coincides with the code.
    CHECK(all.front().to_string() == "H'R|H'R|H'R");
    auto label_rank = [](const InstructionSet& s) {
        std::array<int, 6> key{};
        for (int i = 0; i < 3; ++i) {
            key[2 * i] = s.x_value(i) == Pol::HPrime ? 0 : 1;
            key[2 * i + 1] = s.y_value(i) == Pol::R ? 0 : 1;
        }
        return key;
    };
    for (size_t i = 1; i < all.size(); ++i) {
        CHECK(label_rank(all[i - 1]) < label_rank(all[i]));
        CHECK(all[i - 1].code() < all[i].code());
    }
    CHECK(texts.count("H'R|H'R|V'L") == 1);
}

TEST_CASE("instruction set parsing errors") {
    CHECK_THROWS_AS(parse_instruction_set("H'R|H'R"), ParseError);
    CHECK_THROWS_AS(parse_instruction_set("HR|H'R|V'L"), ParseError);
    CHECK_THROWS_WITH_AS(parse_instruction_set("H'R|RH'|V'L"), doctest::Contains("position 2"),
                         ParseError);
    CHECK_THROWS_AS(parse_instruction_set("H'R|H'R|V'Lx"), ParseError);
}

TEST_CASE("outcome_of worked examples") {
    Context yyx = parse_context("yyx");
    CHECK(outcome_of(parse_instruction_set("H'R|H'R|V'L"), yyx).name() == "RRV'");
    CHECK(outcome_of(parse_instruction_set("H'R|H'R|H'L"), yyx).name() == "RRH'");

    Context xxx = parse_context("xxx");
    Outcome o = outcome_of(parse_instruction_set("V'L|V'L|V'L"), xxx);
    CHECK(o.name() == "V'V'V'");
    CHECK(o.product() == -1);
}

TEST_CASE("outcome product is the product of the value signs") {
    Context yyx = parse_context("yyx");
    CHECK(parse_outcome("RRV'", yyx).product() == -1);
    CHECK(parse_outcome("RLH'", yyx).product() == -1);
    CHECK(parse_outcome("H'H'H'", parse_context("xxx")).product() == 1);

    for (Context ctx : all_contexts()) {
        for (int bits = 0; bits < 8; ++bits) {
            Outcome o(ctx, bits);
            int expected = 1;
            for (int i = 0; i < 3; ++i) expected *= pol_sign(o.value(i));
            CHECK(o.product() == expected);
            CHECK(outcome_product(o) == expected);
        }
    }
}

TEST_CASE("outcome parsing and basis mismatch") {
    Context yyx = parse_context("yyx");
    Outcome o = parse_outcome("RRH'", yyx);
    CHECK(o.value(0) == Pol::R);
    CHECK(o.value(2) == Pol::HPrime);
    CHECK(o.name() == "RRH'");

    CHECK_THROWS_WITH_AS(parse_outcome("RRH'", parse_context("xxx")),
                         doctest::Contains("position 1"), ParseError);
    CHECK_THROWS_WITH_AS(parse_outcome("RRR", yyx), doctest::Contains("position 3"), ParseError);
    CHECK_THROWS_AS(parse_outcome("RRH'L", yyx), ParseError);

    for (Context ctx : all_contexts()) {
        for (int bits = 0; bits < 8; ++bits) {
            Outcome original(ctx, bits);
            CHECK(parse_outcome(original.name(), ctx) == original);
        }
    }
}

TEST_CASE("readout is deterministic and local to each photon") {
    // Changing the basis choice at other photons never changes photon i's
    // reported value; exhaustive over 64 sets x 8x8 context pairs.
    for (InstructionSet s : all_instruction_sets()) {
        for (int photon = 0; photon < 3; ++photon) {
            for (Context a : all_contexts()) {
                for (Context b : all_contexts()) {
                    if (a.basis(photon) != b.basis(photon)) continue;
                    CHECK(outcome_of(s, a).value(photon) == outcome_of(s, b).value(photon));
                }
            }
        }
    }
}

TEST_CASE("xxx product equals the product of the X signs") {
    Context xxx = parse_context("xxx");
    for (InstructionSet s : all_instruction_sets()) {
        int expected =
            pol_sign(s.x_value(0)) * pol_sign(s.x_value(1)) * pol_sign(s.x_value(2));
        CHECK(outcome_of(s, xxx).product() == expected);
        CHECK(s.x_product() == expected);
    }
}
