#pragma once

// Measured-data ingestion, model-vs-quantum comparison and seeded Monte
// Carlo coincidence sampling.

#include "ghzlhv/model.hpp"
#include "ghzlhv/polarization.hpp"
#include "ghzlhv/rational.hpp"

#include <json.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace ghzlhv {

// Measured aggregate for one context: total fraction of the quantum-allowed
// outcomes, total fraction of spurious outcomes, quoted one-sigma
// uncertainty of the predicted fraction.
struct AggregateRecord {
    double predicted = 0;
    double spurious = 0;
    double sigma = 0;
};

struct ExperimentRecord {
    Context context;
    std::optional<std::array<double, 8>> outcome_fractions;
    std::optional<AggregateRecord> aggregate;
};

// Sign of the product the GHZ prediction fixes in one of the four main
// contexts: -1 for yyx, yxy, xyy; +1 for xxx.
inline int qm_predicted_sign(Context ctx) {
    std::string name = ctx.name();
    if (name == "yyx" || name == "yxy" || name == "xyy") return -1;
    if (name == "xxx") return +1;
    throw ValidationError("context " + name + " has no definite quantum product sign");
}

// Total probability carried by the outcomes with the given product sign.
inline Rational aggregate_fraction(const OutcomeDistribution& d, int sign) {
    Rational total = 0;
    for (int o = 0; o < 8; ++o) {
        if (Outcome(d.context, o).product() == sign) total += d.probs[o];
    }
    return total;
}

inline double aggregate_fraction(const RealOutcomeDistribution& d, int sign) {
    double total = 0;
    for (int o = 0; o < 8; ++o) {
        if (Outcome(d.context, o).product() == sign) total += d.probs[o];
    }
    return total;
}

// (1/2) sum |a - b| over the eight outcomes of a shared context.
inline Rational total_variation(const OutcomeDistribution& a, const OutcomeDistribution& b) {
    if (a.context != b.context) {
        throw ValidationError("total variation requires distributions over the same context");
    }
    Rational sum = 0;
    for (int o = 0; o < 8; ++o) {
        Rational diff = a.probs[o] - b.probs[o];
        sum += diff < 0 ? -diff : diff;
    }
    return sum / 2;
}

inline double total_variation(const RealOutcomeDistribution& a, const RealOutcomeDistribution& b) {
    if (a.context != b.context) {
        throw ValidationError("total variation requires distributions over the same context");
    }
    double sum = 0;
    for (int o = 0; o < 8; ++o) sum += std::abs(a.probs[o] - b.probs[o]);
    return sum / 2;
}

enum class Winner { model, qm, tie };

inline std::string winner_name(Winner w) {
    switch (w) {
        case Winner::model: return "model";
        case Winner::qm: return "qm";
        case Winner::tie: return "tie";
    }
    return "?";
}

struct ContextComparison {
    Context context;
    double measured_predicted = 0;  // measured fraction of quantum-allowed outcomes
    double measured_sigma = 0;      // quoted uncertainty, 0 when not given
    double model_predicted = 0;     // model aggregate on the quantum-predicted sign
    double qm_predicted = 0;
    double model_deviation = 0;
    double qm_deviation = 0;
    double model_z = 0;  // deviation in units of the quoted sigma (0 when no sigma)
    double qm_z = 0;
    std::optional<double> model_total_variation;  // only with per-outcome data
    std::optional<double> qm_total_variation;
    Winner winner = Winner::tie;
};

struct ComparisonReport {
    std::vector<ContextComparison> contexts;
    double model_average_deviation = 0;
    double qm_average_deviation = 0;
    Winner overall_winner = Winner::tie;
};

namespace detail {

inline const RealOutcomeDistribution* find_context(const std::vector<RealOutcomeDistribution>& ds,
                                                   Context ctx) {
    for (const auto& d : ds) {
        if (d.context == ctx) return &d;
    }
    return nullptr;
}

}  // namespace detail

// Per-context absolute deviation of each prediction's aggregate fraction
// from the measured one, averaged over the four main contexts. The quoted
// uncertainties are carried through as z-scores but do not affect the
// winner flags; the winner is decided on point values.
inline ComparisonReport compare_models(const std::vector<ExperimentRecord>& records,
                                       const std::vector<RealOutcomeDistribution>& model_predictions,
                                       const std::vector<RealOutcomeDistribution>& qm_predictions) {
    ComparisonReport report;
    std::string missing;
    double model_sum = 0;
    double qm_sum = 0;
    int covered = 0;

    for (const char* name : {"yyx", "yxy", "xyy", "xxx"}) {
        Context ctx = parse_context(name);
        const ExperimentRecord* record = nullptr;
        for (const auto& r : records) {
            if (r.context == ctx) {
                record = &r;
                break;
            }
        }
        const RealOutcomeDistribution* model = detail::find_context(model_predictions, ctx);
        const RealOutcomeDistribution* qm = detail::find_context(qm_predictions, ctx);
        if (record == nullptr || model == nullptr || qm == nullptr) {
            missing += std::string(missing.empty() ? "" : ", ") + name;
            continue;
        }

        int sign = qm_predicted_sign(ctx);
        ContextComparison cc;
        cc.context = ctx;
        if (record->aggregate) {
            cc.measured_predicted = record->aggregate->predicted;
            cc.measured_sigma = record->aggregate->sigma;
        } else {
            // Aggregate form is derivable from complete per-outcome data.
            RealOutcomeDistribution measured{ctx, *record->outcome_fractions};
            cc.measured_predicted = aggregate_fraction(measured, sign);
        }
        cc.model_predicted = aggregate_fraction(*model, sign);
        cc.qm_predicted = aggregate_fraction(*qm, sign);
        cc.model_deviation = std::abs(cc.model_predicted - cc.measured_predicted);
        cc.qm_deviation = std::abs(cc.qm_predicted - cc.measured_predicted);
        if (cc.measured_sigma > 0) {
            cc.model_z = cc.model_deviation / cc.measured_sigma;
            cc.qm_z = cc.qm_deviation / cc.measured_sigma;
        }
        if (record->outcome_fractions) {
            RealOutcomeDistribution measured{ctx, *record->outcome_fractions};
            cc.model_total_variation = total_variation(*model, measured);
            cc.qm_total_variation = total_variation(*qm, measured);
        }
        cc.winner = cc.model_deviation < cc.qm_deviation
                        ? Winner::model
                        : (cc.qm_deviation < cc.model_deviation ? Winner::qm : Winner::tie);
        report.contexts.push_back(cc);
        model_sum += cc.model_deviation;
        qm_sum += cc.qm_deviation;
        ++covered;
    }

    if (!missing.empty()) {
        throw ValidationError("comparison is missing data or predictions for context(s): " + missing);
    }
    report.model_average_deviation = model_sum / covered;
    report.qm_average_deviation = qm_sum / covered;
    report.overall_winner =
        report.model_average_deviation < report.qm_average_deviation
            ? Winner::model
            : (report.qm_average_deviation < report.model_average_deviation ? Winner::qm
                                                                            : Winner::tie);
    return report;
}

// ---------------------------------------------------------------------------
// Monte Carlo coincidence sampling.
// ---------------------------------------------------------------------------

struct SampleResult {
    Context context;
    std::array<uint64_t, 8> counts{};
    uint64_t n = 0;
    uint64_t seed = 0;

    double fraction(int outcome_index) const {
        return static_cast<double>(counts[outcome_index]) / static_cast<double>(n);
    }
};

// n independent draws of instruction sets, each mapped through the
// deterministic readout. The generator is std::mt19937_64 (64-bit Mersenne
// Twister, identical output on every platform); draws map a raw 64-bit
// value through the exact inverse CDF over the cumulative weights in
// canonical order, so results are bit-reproducible for a fixed seed.
inline SampleResult monte_carlo_sample(const ModelDistribution& m, Context ctx, uint64_t n,
                                       uint64_t seed) {
    if (n < 1) throw ValidationError("sample size must be at least 1");

    // Threshold for rank k: ceil(2^64 * cumulative_weight(k)), clamped into
    // uint64 range; a draw u selects the first rank with u < threshold.
    const BigInt two64 = BigInt(1) << 64;
    std::array<uint64_t, 64> thresholds{};
    std::array<int, 64> outcome_index{};
    Rational cum = 0;
    int last_nonzero = 0;
    for (int code = 0; code < 64; ++code) {
        InstructionSet s = InstructionSet::from_code(code);
        if (m.weight(s) != 0) last_nonzero = code;
        cum += m.weight(s);
        BigInt scaled_num = rational_num(cum) * two64;
        BigInt den = rational_den(cum);
        BigInt t = (scaled_num + den - 1) / den;  // ceil
        thresholds[code] = t >= two64 ? ~uint64_t(0) : t.convert_to<uint64_t>();
        outcome_index[code] = outcome_of(s, ctx).index();
    }

    SampleResult result;
    result.context = ctx;
    result.n = n;
    result.seed = seed;
    std::mt19937_64 rng(seed);
    for (uint64_t i = 0; i < n; ++i) {
        uint64_t u = rng();
        auto it = std::upper_bound(thresholds.begin(), thresholds.end(), u);
        int code = it == thresholds.end() ? last_nonzero : static_cast<int>(it - thresholds.begin());
        ++result.counts[outcome_index[code]];
    }
    return result;
}

// ---------------------------------------------------------------------------
// Experiment data files. Schema:
// {"experiments": [{"context": "yyx",
//                   "aggregate": {"predicted": 0.85, "spurious": 0.15, "sigma": 0.04},
//                   "outcomes": {"RRV'": 0.25, ...}}]}
// "aggregate" and "outcomes" are each optional, but at least one must be
// present. Outcomes not listed are taken as zero. Unknown keys are ignored.
// ---------------------------------------------------------------------------

namespace detail {

inline double fraction_field(const nlohmann::json& j, const std::string& path) {
    if (!j.is_number()) throw ValidationError(path + ": expected a number");
    double v = j.get<double>();
    if (!(v >= 0.0 && v <= 1.0)) {
        throw ValidationError(path + ": value " + std::to_string(v) + " outside [0,1]");
    }
    return v;
}

}  // namespace detail

inline std::vector<ExperimentRecord> parse_records(const nlohmann::json& doc,
                                                   const std::string& source_name = "<json>") {
    if (!doc.is_object() || !doc.contains("experiments")) {
        throw ValidationError(source_name + ": expected an object with an \"experiments\" array");
    }
    const auto& experiments = doc.at("experiments");
    if (!experiments.is_array()) {
        throw ValidationError(source_name + ": experiments: expected an array");
    }

    std::vector<ExperimentRecord> records;
    for (size_t i = 0; i < experiments.size(); ++i) {
        std::string path = "experiments[" + std::to_string(i) + "]";
        const auto& e = experiments[i];
        if (!e.is_object()) throw ValidationError(path + ": expected an object");
        if (!e.contains("context") || !e.at("context").is_string()) {
            throw ValidationError(path + ".context: expected a string");
        }
        ExperimentRecord record;
        try {
            record.context = parse_context(e.at("context").get<std::string>());
        } catch (const ParseError& err) {
            throw ValidationError(path + ".context: " + err.what());
        }

        if (e.contains("aggregate")) {
            const auto& a = e.at("aggregate");
            if (!a.is_object()) throw ValidationError(path + ".aggregate: expected an object");
            AggregateRecord agg;
            if (!a.contains("predicted")) {
                throw ValidationError(path + ".aggregate.predicted: missing");
            }
            agg.predicted = detail::fraction_field(a.at("predicted"), path + ".aggregate.predicted");
            if (a.contains("spurious")) {
                agg.spurious = detail::fraction_field(a.at("spurious"), path + ".aggregate.spurious");
            }
            if (a.contains("sigma")) {
                if (!a.at("sigma").is_number() || a.at("sigma").get<double>() < 0) {
                    throw ValidationError(path + ".aggregate.sigma: expected a non-negative number");
                }
                agg.sigma = a.at("sigma").get<double>();
            }
            record.aggregate = agg;
        }

        if (e.contains("outcomes")) {
            const auto& o = e.at("outcomes");
            if (!o.is_object()) throw ValidationError(path + ".outcomes: expected an object");
            std::array<double, 8> fractions{};
            fractions.fill(0.0);
            double sum = 0;
            for (const auto& [name, value] : o.items()) {
                Outcome outcome(record.context, 0);
                try {
                    outcome = parse_outcome(name, record.context);
                } catch (const ParseError& err) {
                    throw ValidationError(path + ".outcomes." + name + ": " + err.what());
                }
                double f = detail::fraction_field(value, path + ".outcomes." + name);
                fractions[outcome.index()] = f;
                sum += f;
            }
            if (std::abs(sum - 1.0) > 0.02) {
                throw ValidationError(path + ".outcomes: fractions sum to " + std::to_string(sum) +
                                      ", expected 1 within 0.02");
            }
            record.outcome_fractions = fractions;
        }

        if (!record.aggregate && !record.outcome_fractions) {
            throw ValidationError(path + ": needs \"aggregate\" and/or \"outcomes\"");
        }
        records.push_back(record);
    }
    return records;
}

inline std::vector<ExperimentRecord> ingest_records(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open data file '" + path + "'");
    std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (content.find_first_not_of(" \t\r\n") == std::string::npos) {
        return {};  // an empty file carries no records
    }
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(content);
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(path + ": " + e.what());
    }
    return parse_records(doc, path);
}

// Measured per-outcome fractions as a distribution-shaped target (for fits
// and total-variation comparisons); empty when the record has none.
inline std::optional<RealOutcomeDistribution> record_target(const ExperimentRecord& record) {
    if (!record.outcome_fractions) return std::nullopt;
    return RealOutcomeDistribution{record.context, *record.outcome_fractions};
}

}  // namespace ghzlhv
