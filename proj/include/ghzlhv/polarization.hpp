#pragma once

// Core value types for the three-photon polarization model: basis choices,
// polarization values, measurement contexts, instruction sets and outcomes.
// Everything here is an immutable value wrapping a few bits.
//
// Conventions (fixed, not configurable):
//   linear basis   x: H' = +1, V' = -1   (45 / -45 degree polarization)
//   circular basis y: R  = +1, L  = -1   (right / left handed)
//   photons are indexed 0..2 in code; user-facing text uses 1..3.
//
// Canonical orderings: H' < V', R < L, photon 0 before photon 1 before
// photon 2. Instruction sets therefore sort by the bit word
// (x1 y1 x2 y2 x3 y3) with 0 = positive label, which coincides with
// lexicographic order of their text form "X1Y1|X2Y2|X3Y3".

#include <array>
#include <compare>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace ghzlhv {

class ParseError : public std::runtime_error {
  public:
    explicit ParseError(const std::string& msg) : std::runtime_error(msg) {}
};

class ValidationError : public std::runtime_error {
  public:
    explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

enum class Basis : uint8_t { x = 0, y = 1 };

inline char basis_letter(Basis b) { return b == Basis::x ? 'x' : 'y'; }

enum class Pol : uint8_t {
    HPrime = 0,  // linear, +1
    VPrime = 1,  // linear, -1
    R = 2,       // circular, +1
    L = 3,       // circular, -1
};

inline int pol_sign(Pol v) {
    return (v == Pol::HPrime || v == Pol::R) ? +1 : -1;
}

inline bool pol_is_linear(Pol v) { return v == Pol::HPrime || v == Pol::VPrime; }

inline Basis pol_basis(Pol v) { return pol_is_linear(v) ? Basis::x : Basis::y; }

inline std::string_view pol_label(Pol v) {
    switch (v) {
        case Pol::HPrime: return "H'";
        case Pol::VPrime: return "V'";
        case Pol::R: return "R";
        case Pol::L: return "L";
    }
    return "?";
}

// The value a basis reports for a given sign bit (0 -> +1 label, 1 -> -1 label).
inline Pol basis_value(Basis b, int negative_bit) {
    if (b == Basis::x) {
        return negative_bit ? Pol::VPrime : Pol::HPrime;
    }
    return negative_bit ? Pol::L : Pol::R;
}

// One of the eight basis triples, e.g. "yyx" = circular on photons 1,2 and
// linear on photon 3.
class Context {
  public:
    constexpr Context() : code_(0) {}
    constexpr Context(Basis b1, Basis b2, Basis b3)
        : code_(static_cast<uint8_t>((static_cast<int>(b1) << 2) |
                                     (static_cast<int>(b2) << 1) |
                                     static_cast<int>(b3))) {}

    static constexpr int count = 8;

    constexpr Basis basis(int photon) const {
        return static_cast<Basis>((code_ >> (2 - photon)) & 1);
    }

    // 0 = "xxx" .. 7 = "yyy"; stable index used for arrays and file output.
    constexpr int index() const { return code_; }

    static constexpr Context from_index(int idx) {
        Context c;
        c.code_ = static_cast<uint8_t>(idx & 7);
        return c;
    }

    std::string name() const {
        std::string s(3, '?');
        for (int i = 0; i < 3; ++i) s[i] = basis_letter(basis(i));
        return s;
    }

    friend constexpr auto operator<=>(Context, Context) = default;

  private:
    uint8_t code_;
};

inline Context parse_context(std::string_view name) {
    if (name.size() != 3) {
        throw ParseError("context '" + std::string(name) + "' must be 3 characters of x/y");
    }
    uint8_t code = 0;
    for (int i = 0; i < 3; ++i) {
        char c = name[i];
        if (c != 'x' && c != 'y') {
            throw ParseError("context '" + std::string(name) + "': invalid basis letter at position " +
                             std::to_string(i + 1));
        }
        code = static_cast<uint8_t>((code << 1) | (c == 'y' ? 1 : 0));
    }
    return Context::from_index(code);
}

inline const std::array<Context, 8>& all_contexts() {
    static const std::array<Context, 8> all = [] {
        std::array<Context, 8> a{};
        for (int i = 0; i < 8; ++i) a[i] = Context::from_index(i);
        return a;
    }();
    return all;
}

// A complete pre-assignment of both measurement answers to each photon:
// X_i in {H',V'} for a linear measurement and Y_i in {R,L} for a circular
// one. Stored as a 6-bit word (x1 y1 x2 y2 x3 y3), 1 = negative label.
class InstructionSet {
  public:
    constexpr InstructionSet() : code_(0) {}

    static constexpr int count = 64;

    static constexpr InstructionSet from_code(int code) {
        InstructionSet s;
        s.code_ = static_cast<uint8_t>(code & 63);
        return s;
    }

    // Rank in the canonical (lexicographic) enumeration.
    constexpr int code() const { return code_; }

    constexpr int x_bit(int photon) const { return (code_ >> (5 - 2 * photon)) & 1; }
    constexpr int y_bit(int photon) const { return (code_ >> (4 - 2 * photon)) & 1; }

    constexpr Pol x_value(int photon) const { return x_bit(photon) ? Pol::VPrime : Pol::HPrime; }
    constexpr Pol y_value(int photon) const { return y_bit(photon) ? Pol::L : Pol::R; }

    constexpr Pol value_for(int photon, Basis b) const {
        return b == Basis::x ? x_value(photon) : y_value(photon);
    }

    constexpr int x_product() const {
        return (x_bit(0) ^ x_bit(1) ^ x_bit(2)) ? -1 : +1;
    }

    std::string to_string() const {
        std::string s;
        for (int i = 0; i < 3; ++i) {
            if (i) s += '|';
            s += pol_label(x_value(i));
            s += pol_label(y_value(i));
        }
        return s;
    }

    friend constexpr auto operator<=>(InstructionSet, InstructionSet) = default;

  private:
    uint8_t code_;
};

inline const std::array<InstructionSet, 64>& all_instruction_sets() {
    static const std::array<InstructionSet, 64> all = [] {
        std::array<InstructionSet, 64> a{};
        for (int i = 0; i < 64; ++i) a[i] = InstructionSet::from_code(i);
        return a;
    }();
    return all;
}

namespace detail {

// Reads one polarization token (H', V', R, L) starting at pos; advances pos.
inline Pol read_pol_token(std::string_view text, size_t& pos, int photon_position) {
    auto fail = [&](const std::string& what) -> Pol {
        throw ParseError("'" + std::string(text) + "': " + what + " at position " +
                         std::to_string(photon_position));
    };
    if (pos >= text.size()) return fail("missing polarization value");
    char c = text[pos];
    if (c == 'R') {
        ++pos;
        return Pol::R;
    }
    if (c == 'L') {
        ++pos;
        return Pol::L;
    }
    if (c == 'H' || c == 'V') {
        if (pos + 1 >= text.size() || text[pos + 1] != '\'') {
            return fail(std::string("'") + c + "' must be followed by a prime");
        }
        pos += 2;
        return c == 'H' ? Pol::HPrime : Pol::VPrime;
    }
    return fail(std::string("unknown polarization letter '") + c + "'");
}

}  // namespace detail

inline InstructionSet parse_instruction_set(std::string_view text) {
    int code = 0;
    size_t pos = 0;
    for (int i = 0; i < 3; ++i) {
        if (i) {
            if (pos >= text.size() || text[pos] != '|') {
                throw ParseError("'" + std::string(text) + "': expected '|' before photon " +
                                 std::to_string(i + 1));
            }
            ++pos;
        }
        Pol xv = detail::read_pol_token(text, pos, i + 1);
        if (!pol_is_linear(xv)) {
            throw ParseError("'" + std::string(text) + "': X value must be H' or V' at position " +
                             std::to_string(i + 1));
        }
        Pol yv = detail::read_pol_token(text, pos, i + 1);
        if (pol_is_linear(yv)) {
            throw ParseError("'" + std::string(text) + "': Y value must be R or L at position " +
                             std::to_string(i + 1));
        }
        code = (code << 2) | (pol_sign(xv) < 0 ? 2 : 0) | (pol_sign(yv) < 0 ? 1 : 0);
    }
    if (pos != text.size()) {
        throw ParseError("'" + std::string(text) + "': trailing characters after photon 3");
    }
    return InstructionSet::from_code(code);
}

// The reading the three detectors produce in one context. Carries its
// context so basis consistency stays checkable.
class Outcome {
  public:
    constexpr Outcome() : ctx_(), bits_(0) {}
    constexpr Outcome(Context ctx, int bits) : ctx_(ctx), bits_(static_cast<uint8_t>(bits & 7)) {}

    constexpr Context context() const { return ctx_; }

    // 0..7; bit for photon i is 1 when that photon reports the -1 value.
    constexpr int index() const { return bits_; }

    constexpr int bit(int photon) const { return (bits_ >> (2 - photon)) & 1; }

    Pol value(int photon) const { return basis_value(ctx_.basis(photon), bit(photon)); }

    // Product of the three value signs, +1 or -1.
    constexpr int product() const {
        int parity = (bits_ ^ (bits_ >> 1) ^ (bits_ >> 2)) & 1;
        return parity ? -1 : +1;
    }

    std::string name() const {
        std::string s;
        for (int i = 0; i < 3; ++i) s += pol_label(value(i));
        return s;
    }

    friend constexpr auto operator<=>(Outcome, Outcome) = default;

  private:
    Context ctx_;
    uint8_t bits_;
};

inline int outcome_product(const Outcome& o) { return o.product(); }

// Deterministic readout: photon i reports X_i under a linear setting and
// Y_i under a circular one, independent of the other photons' settings.
constexpr Outcome outcome_of(InstructionSet s, Context ctx) {
    int bits = 0;
    for (int i = 0; i < 3; ++i) {
        int b = ctx.basis(i) == Basis::x ? s.x_bit(i) : s.y_bit(i);
        bits = (bits << 1) | b;
    }
    return Outcome(ctx, bits);
}

inline Outcome parse_outcome(std::string_view labels, Context ctx) {
    size_t pos = 0;
    int bits = 0;
    for (int i = 0; i < 3; ++i) {
        Pol v = detail::read_pol_token(labels, pos, i + 1);
        if (pol_basis(v) != ctx.basis(i)) {
            throw ParseError("'" + std::string(labels) + "': basis mismatch at position " +
                             std::to_string(i + 1) + " (" + std::string(pol_label(v)) +
                             " is not a " + basis_letter(ctx.basis(i)) + "-basis value)");
        }
        bits = (bits << 1) | (pol_sign(v) < 0 ? 1 : 0);
    }
    if (pos != labels.size()) {
        throw ParseError("'" + std::string(labels) + "': trailing characters after photon 3");
    }
    return Outcome(ctx, bits);
}

}  // namespace ghzlhv
