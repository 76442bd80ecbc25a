#pragma once

// Probability distributions over the 64 instruction sets, uniform 32-set
// tables, induced outcome distributions and marginals. All probabilities in
// this layer are exact rationals; floating point only appears downstream.

#include "ghzlhv/polarization.hpp"
#include "ghzlhv/rational.hpp"

#include <array>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace ghzlhv {

// Distribution over one context's eight outcomes, exact rationals.
// display_den remembers the natural common denominator of the source model
// (32 for a uniform table) so fractions print the way they are quoted,
// e.g. "6/32" instead of "3/16".
struct OutcomeDistribution {
    Context context;
    std::array<Rational, 8> probs{};
    BigInt display_den = 0;

    const Rational& prob(const Outcome& o) const { return probs[o.index()]; }

    void validate() const {
        Rational sum = 0;
        for (const auto& p : probs) {
            if (p < 0) throw ValidationError("outcome distribution has a negative probability");
            sum += p;
        }
        if (sum != 1) throw ValidationError("outcome distribution does not sum to 1");
    }
};

// Same shape with double entries; used for quantum predictions and for
// measured per-outcome fractions.
struct RealOutcomeDistribution {
    Context context;
    std::array<double, 8> probs{};
};

inline RealOutcomeDistribution to_real(const OutcomeDistribution& d) {
    RealOutcomeDistribution r;
    r.context = d.context;
    for (int i = 0; i < 8; ++i) r.probs[i] = to_double(d.probs[i]);
    return r;
}

// A probability distribution over all 64 instruction sets.
class ModelDistribution {
  public:
    ModelDistribution() { weights_.fill(Rational(0)); }

    explicit ModelDistribution(std::array<Rational, 64> weights) : weights_(std::move(weights)) {
        validate();
    }

    static ModelDistribution point_mass(InstructionSet s) {
        std::array<Rational, 64> w;
        w.fill(Rational(0));
        w[s.code()] = 1;
        return ModelDistribution(std::move(w));
    }

    static ModelDistribution uniform_over_all() {
        std::array<Rational, 64> w;
        w.fill(Rational(1, 64));
        return ModelDistribution(std::move(w));
    }

    const Rational& weight(InstructionSet s) const { return weights_[s.code()]; }
    const std::array<Rational, 64>& weights() const { return weights_; }

    // Least common denominator of the nonzero weights; used for display.
    BigInt common_denominator() const {
        BigInt l = 1;
        for (const auto& w : weights_) {
            if (w != 0) l = lcm_bigint(l, rational_den(w));
        }
        return l;
    }

    void validate() const {
        Rational sum = 0;
        for (const auto& w : weights_) {
            if (w < 0) throw ValidationError("model distribution has a negative weight");
            sum += w;
        }
        if (sum != 1) throw ValidationError("model distribution weights do not sum to 1");
    }

  private:
    std::array<Rational, 64> weights_;
};

// P(outcome | context) = sum of the weights of the instruction sets that
// produce the outcome. Exact.
inline OutcomeDistribution outcome_distribution(const ModelDistribution& m, Context ctx) {
    OutcomeDistribution d;
    d.context = ctx;
    d.probs.fill(Rational(0));
    for (InstructionSet s : all_instruction_sets()) {
        d.probs[outcome_of(s, ctx).index()] += m.weight(s);
    }
    d.display_den = m.common_denominator();
    return d;
}

// Marginal of one photon's reported value for the given basis. Well defined
// without a context because the readout of photon i never depends on the
// other photons' settings.
inline std::map<Pol, Rational> single_marginal(const ModelDistribution& m, int photon, Basis basis) {
    std::map<Pol, Rational> out{{basis_value(basis, 0), Rational(0)},
                                {basis_value(basis, 1), Rational(0)}};
    for (InstructionSet s : all_instruction_sets()) {
        out[s.value_for(photon, basis)] += m.weight(s);
    }
    return out;
}

// Joint marginal of two distinct photons' reported values.
inline std::map<std::pair<Pol, Pol>, Rational> pair_marginal(const ModelDistribution& m, int photon_i,
                                                             int photon_j, Basis basis_i,
                                                             Basis basis_j) {
    if (photon_i == photon_j) {
        throw ValidationError("pair marginal requires two distinct photons");
    }
    std::map<std::pair<Pol, Pol>, Rational> out;
    for (int bi = 0; bi < 2; ++bi) {
        for (int bj = 0; bj < 2; ++bj) {
            out[{basis_value(basis_i, bi), basis_value(basis_j, bj)}] = 0;
        }
    }
    for (InstructionSet s : all_instruction_sets()) {
        out[{s.value_for(photon_i, basis_i), s.value_for(photon_j, basis_j)}] += m.weight(s);
    }
    return out;
}

// Expectation of the three-reading sign product in one context. Exact.
inline Rational model_expectation(const ModelDistribution& m, Context ctx) {
    Rational e = 0;
    for (InstructionSet s : all_instruction_sets()) {
        e += m.weight(s) * outcome_of(s, ctx).product();
    }
    return e;
}

// Uniform distribution over exactly 32 distinct instruction sets, the shape
// of the published table. Membership is a 64-bit mask indexed by canonical
// rank, so iteration order is always canonical.
class UniformTable {
  public:
    static constexpr int size = 32;

    explicit UniformTable(uint64_t member_mask) : mask_(member_mask) {
        if (popcount(mask_) != size) {
            throw ValidationError("a uniform table must contain exactly 32 instruction sets, got " +
                                  std::to_string(popcount(mask_)));
        }
    }

    static UniformTable from_sets(const std::vector<InstructionSet>& sets) {
        uint64_t mask = 0;
        for (InstructionSet s : sets) {
            uint64_t bit = uint64_t(1) << s.code();
            if (mask & bit) {
                throw ValidationError("duplicate instruction set in table: " + s.to_string());
            }
            mask |= bit;
        }
        return UniformTable(mask);
    }

    uint64_t mask() const { return mask_; }

    bool contains(InstructionSet s) const { return (mask_ >> s.code()) & 1; }

    std::vector<InstructionSet> members() const {
        std::vector<InstructionSet> out;
        out.reserve(size);
        for (int code = 0; code < 64; ++code) {
            if ((mask_ >> code) & 1) out.push_back(InstructionSet::from_code(code));
        }
        return out;
    }

    ModelDistribution to_distribution() const {
        std::array<Rational, 64> w;
        w.fill(Rational(0));
        for (int code = 0; code < 64; ++code) {
            if ((mask_ >> code) & 1) w[code] = Rational(1, 32);
        }
        return ModelDistribution(std::move(w));
    }

    friend auto operator<=>(const UniformTable&, const UniformTable&) = default;

  private:
    static int popcount(uint64_t v) {
        int n = 0;
        for (; v; v &= v - 1) ++n;
        return n;
    }

    uint64_t mask_;
};

// The instruction sets admitted by the original local-realistic argument:
// fixed values obeying Y1*Y2*X3 = Y1*X2*Y3 = X1*Y2*Y3 = -1, which forces
// X1*X2*X3 = -1.
inline std::vector<InstructionSet> pan_lr_admissible_sets() {
    std::vector<InstructionSet> out;
    for (InstructionSet s : all_instruction_sets()) {
        int yyx = pol_sign(s.y_value(0)) * pol_sign(s.y_value(1)) * pol_sign(s.x_value(2));
        int yxy = pol_sign(s.y_value(0)) * pol_sign(s.x_value(1)) * pol_sign(s.y_value(2));
        int xyy = pol_sign(s.x_value(0)) * pol_sign(s.y_value(1)) * pol_sign(s.y_value(2));
        if (yyx == -1 && yxy == -1 && xyy == -1) out.push_back(s);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Table file format: header "ghz-lhv-table v1", optional '#' comments,
// exactly 32 lines of instruction sets in canonical text form.
// ---------------------------------------------------------------------------

inline constexpr std::string_view kTableFileHeader = "ghz-lhv-table v1";

inline UniformTable read_table(std::istream& in, const std::string& source_name = "<stream>") {
    std::string line;
    if (!std::getline(in, line) || line != kTableFileHeader) {
        throw ParseError(source_name + ": missing table header '" + std::string(kTableFileHeader) +
                         "'");
    }
    std::vector<InstructionSet> sets;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        size_t start = line.find_first_not_of(" \t\r");
        if (start == std::string::npos) continue;
        size_t end = line.find_last_not_of(" \t\r");
        std::string token = line.substr(start, end - start + 1);
        if (token[0] == '#') continue;
        try {
            sets.push_back(parse_instruction_set(token));
        } catch (const ParseError& e) {
            throw ParseError(source_name + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
    if (sets.size() != UniformTable::size) {
        throw ParseError(source_name + ": expected 32 instruction sets, found " +
                         std::to_string(sets.size()));
    }
    try {
        return UniformTable::from_sets(sets);
    } catch (const ValidationError& e) {
        throw ParseError(source_name + ": " + e.what());
    }
}

inline UniformTable load_table(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ParseError("cannot open table file '" + path + "'");
    }
    return read_table(in, path);
}

inline void write_table(std::ostream& out, const UniformTable& table,
                        const std::string& comment = "") {
    out << kTableFileHeader << "\n";
    if (!comment.empty()) out << "# " << comment << "\n";
    for (InstructionSet s : table.members()) {
        out << s.to_string() << "\n";
    }
}

inline void save_table(const std::string& path, const UniformTable& table,
                       const std::string& comment = "") {
    std::ofstream out(path);
    if (!out) {
        throw ParseError("cannot write table file '" + path + "'");
    }
    write_table(out, table, comment);
}

// ---------------------------------------------------------------------------
// Weighted model file format: header "ghz-lhv-model v1", lines of
// "<instruction set> <weight>" with exact rational weights. Zero weights may
// be omitted. Used to persist fit results.
// ---------------------------------------------------------------------------

inline constexpr std::string_view kModelFileHeader = "ghz-lhv-model v1";

inline ModelDistribution read_model(std::istream& in, const std::string& source_name = "<stream>") {
    std::string line;
    if (!std::getline(in, line) || line != kModelFileHeader) {
        throw ParseError(source_name + ": missing model header '" + std::string(kModelFileHeader) +
                         "'");
    }
    std::array<Rational, 64> w;
    w.fill(Rational(0));
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        size_t start = line.find_first_not_of(" \t\r");
        if (start == std::string::npos) continue;
        if (line[start] == '#') continue;
        std::istringstream ls(line);
        std::string set_text, weight_text;
        if (!(ls >> set_text >> weight_text)) {
            throw ParseError(source_name + ":" + std::to_string(line_no) +
                             ": expected '<set> <weight>'");
        }
        try {
            InstructionSet s = parse_instruction_set(set_text);
            w[s.code()] = Rational(weight_text);
        } catch (const std::exception& e) {
            throw ParseError(source_name + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
    try {
        return ModelDistribution(std::move(w));
    } catch (const ValidationError& e) {
        throw ParseError(source_name + ": " + e.what());
    }
}

inline ModelDistribution load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ParseError("cannot open model file '" + path + "'");
    }
    std::string first;
    std::getline(in, first);
    in.seekg(0);
    if (first == kTableFileHeader) {
        return read_table(in, path).to_distribution();
    }
    if (first == kModelFileHeader) {
        return read_model(in, path);
    }
    throw ParseError(path + ": expected a '" + std::string(kTableFileHeader) + "' or '" +
                     std::string(kModelFileHeader) + "' header");
}

inline void write_model(std::ostream& out, const ModelDistribution& m,
                        const std::string& comment = "") {
    out << kModelFileHeader << "\n";
    if (!comment.empty()) out << "# " << comment << "\n";
    for (InstructionSet s : all_instruction_sets()) {
        if (m.weight(s) != 0) {
            out << s.to_string() << " " << format_rational(m.weight(s)) << "\n";
        }
    }
}

}  // namespace ghzlhv
