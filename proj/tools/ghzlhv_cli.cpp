// ghz-lhv: command-line surface over the instruction-set model, the GHZ
// quantum predictions, table reconstruction, fitting and sampling.
//
// Exit codes: 0 success, 2 usage/validation error, 1 internal error.

#include "ghzlhv/lp.hpp"
#include "ghzlhv/model.hpp"
#include "ghzlhv/polarization.hpp"
#include "ghzlhv/qm.hpp"
#include "ghzlhv/search.hpp"
#include "ghzlhv/stats.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace ghzlhv;

namespace {

enum class Format { text, csv, json };

std::string fmt6(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    if (std::string_view(buf) == "-0.000000") return "0.000000";
    return buf;
}

// Searches the usual spots for the pinned canonical table. An explicitly
// set GHZLHV_TABLE_FILE always wins, even if missing.
std::string pinned_table_path() {
    if (const char* env = std::getenv("GHZLHV_TABLE_FILE")) {
        return env;
    }
    std::vector<std::string> candidates;
    candidates.push_back("data/canonical-table.txt");
    std::error_code ec;
    fs::path exe = fs::read_symlink("/proc/self/exe", ec);
    if (!ec) {
        for (const char* rel : {"../data/canonical-table.txt", "../../data/canonical-table.txt"}) {
            candidates.push_back((exe.parent_path() / rel).lexically_normal().string());
        }
    }
    for (const auto& c : candidates) {
        std::error_code exists_ec;
        if (fs::exists(c, exists_ec)) return c;
    }
    std::string tried;
    for (const auto& c : candidates) tried += "\n  " + c;
    throw ValidationError("cannot locate the pinned table; tried:" + tried +
                          "\nset GHZLHV_TABLE_FILE or pass --model <path>");
}

// --model pinned | <path>. "pinned" loads and re-verifies the canonical
// table; a path may name a table file or a weighted model file.
ModelDistribution load_model_source(const std::string& source) {
    if (source == "pinned") {
        return canonical_table(pinned_table_path()).to_distribution();
    }
    return load_model(source);
}

struct OutputTarget {
    std::string path;  // empty = stdout

    void write(const std::string& content) const {
        if (path.empty()) {
            std::cout << content;
            return;
        }
        std::ofstream out(path);
        if (!out) throw ValidationError("cannot write output file '" + path + "'");
        out << content;
    }
};

std::vector<Context> resolve_contexts(const std::vector<std::string>& names) {
    std::vector<Context> out;
    if (names.empty()) {
        for (Context ctx : all_contexts()) out.push_back(ctx);
        return out;
    }
    for (const auto& name : names) out.push_back(parse_context(name));
    return out;
}

// Fit-target schema shared by predict/qm JSON output and compare/fit input.
json distributions_to_json(const std::vector<OutcomeDistribution>& exact,
                           const std::vector<RealOutcomeDistribution>& real) {
    json experiments = json::array();
    for (const auto& d : exact) {
        json outcomes = json::object();
        json exact_fractions = json::object();
        for (int o = 0; o < 8; ++o) {
            std::string name = Outcome(d.context, o).name();
            outcomes[name] = to_double(d.probs[o]);
            exact_fractions[name] = format_rational(d.probs[o], d.display_den);
        }
        experiments.push_back(
            {{"context", d.context.name()}, {"outcomes", outcomes}, {"exact", exact_fractions}});
    }
    for (const auto& d : real) {
        json outcomes = json::object();
        for (int o = 0; o < 8; ++o) outcomes[Outcome(d.context, o).name()] = d.probs[o];
        experiments.push_back({{"context", d.context.name()}, {"outcomes", outcomes}});
    }
    return json{{"experiments", experiments}};
}

int cmd_predict(const std::string& model_source, const std::vector<std::string>& context_names,
                Format format, const OutputTarget& out) {
    ModelDistribution model = load_model_source(model_source);
    std::vector<Context> contexts = resolve_contexts(context_names);
    std::vector<OutcomeDistribution> dists;
    for (Context ctx : contexts) dists.push_back(outcome_distribution(model, ctx));

    std::ostringstream text;
    if (format == Format::json) {
        text << distributions_to_json(dists, {}).dump(2) << "\n";
    } else if (format == Format::csv) {
        text << "context,outcome,fraction,value\n";
        for (const auto& d : dists) {
            for (int o = 0; o < 8; ++o) {
                text << d.context.name() << "," << Outcome(d.context, o).name() << ","
                     << format_rational(d.probs[o], d.display_den) << ","
                     << fmt6(to_double(d.probs[o])) << "\n";
            }
        }
    } else {
        for (const auto& d : dists) {
            text << "context " << d.context.name() << "\n";
            for (int o = 0; o < 8; ++o) {
                text << Outcome(d.context, o).name() << " "
                     << format_rational(d.probs[o], d.display_den) << " "
                     << fmt6(to_double(d.probs[o])) << "\n";
            }
        }
    }
    out.write(text.str());
    return 0;
}

int cmd_qm(const std::vector<std::string>& context_names, Format format, const OutputTarget& out) {
    std::vector<Context> contexts = resolve_contexts(context_names);
    std::vector<RealOutcomeDistribution> dists;
    for (Context ctx : contexts) dists.push_back(qm_outcome_distribution(ctx));

    std::ostringstream text;
    if (format == Format::json) {
        text << distributions_to_json({}, dists).dump(2) << "\n";
    } else if (format == Format::csv) {
        text << "context,outcome,value\n";
        for (const auto& d : dists) {
            for (int o = 0; o < 8; ++o) {
                text << d.context.name() << "," << Outcome(d.context, o).name() << ","
                     << fmt6(d.probs[o]) << "\n";
            }
        }
    } else {
        for (const auto& d : dists) {
            text << "context " << d.context.name()
                 << " expectation " << fmt6(expectation_product(d.context)) << "\n";
            for (int o = 0; o < 8; ++o) {
                text << Outcome(d.context, o).name() << " " << fmt6(d.probs[o]) << "\n";
            }
        }
    }
    out.write(text.str());
    return 0;
}

ComparisonReport build_comparison(const std::string& data_path, const std::string& model_source) {
    std::vector<ExperimentRecord> records = ingest_records(data_path);
    ModelDistribution model = load_model_source(model_source);
    std::vector<RealOutcomeDistribution> model_dists;
    std::vector<RealOutcomeDistribution> qm_dists;
    for (Context ctx : all_contexts()) {
        model_dists.push_back(to_real(outcome_distribution(model, ctx)));
        qm_dists.push_back(qm_outcome_distribution(ctx));
    }
    return compare_models(records, model_dists, qm_dists);
}

std::string comparison_csv(const ComparisonReport& report) {
    std::ostringstream csv;
    csv << "context,model_dev,qm_dev,winner\n";
    for (const auto& c : report.contexts) {
        csv << c.context.name() << "," << fmt6(c.model_deviation) << "," << fmt6(c.qm_deviation)
            << "," << winner_name(c.winner) << "\n";
    }
    csv << "average," << fmt6(report.model_average_deviation) << ","
        << fmt6(report.qm_average_deviation) << "," << winner_name(report.overall_winner) << "\n";
    return csv.str();
}

json comparison_json(const ComparisonReport& report) {
    json contexts = json::array();
    for (const auto& c : report.contexts) {
        json entry{{"context", c.context.name()},
                   {"measured_predicted", c.measured_predicted},
                   {"measured_sigma", c.measured_sigma},
                   {"model_predicted", c.model_predicted},
                   {"qm_predicted", c.qm_predicted},
                   {"model_deviation", c.model_deviation},
                   {"qm_deviation", c.qm_deviation},
                   {"model_z", c.model_z},
                   {"qm_z", c.qm_z},
                   {"winner", winner_name(c.winner)}};
        if (c.model_total_variation) entry["model_total_variation"] = *c.model_total_variation;
        if (c.qm_total_variation) entry["qm_total_variation"] = *c.qm_total_variation;
        contexts.push_back(entry);
    }
    return json{{"contexts", contexts},
                {"model_average_deviation", report.model_average_deviation},
                {"qm_average_deviation", report.qm_average_deviation},
                {"winner", winner_name(report.overall_winner)}};
}

int cmd_compare(const std::string& data_path, const std::string& model_source, Format format,
                const OutputTarget& out) {
    ComparisonReport report = build_comparison(data_path, model_source);
    std::ostringstream text;
    if (format == Format::json) {
        text << comparison_json(report).dump(2) << "\n";
    } else if (format == Format::csv) {
        text << comparison_csv(report);
    } else {
        text << "context measured model qm model_dev qm_dev model_z qm_z winner\n";
        for (const auto& c : report.contexts) {
            text << c.context.name() << " " << fmt6(c.measured_predicted) << " "
                 << fmt6(c.model_predicted) << " " << fmt6(c.qm_predicted) << " "
                 << fmt6(c.model_deviation) << " " << fmt6(c.qm_deviation) << " " << fmt6(c.model_z)
                 << " " << fmt6(c.qm_z) << " " << winner_name(c.winner) << "\n";
        }
        text << "average model_dev " << fmt6(report.model_average_deviation) << " qm_dev "
             << fmt6(report.qm_average_deviation) << " winner "
             << winner_name(report.overall_winner) << "\n";
    }
    out.write(text.str());
    return 0;
}

int cmd_fit(const std::string& targets_path, const std::string& metric_name_in, Format format,
            const OutputTarget& out, const std::string& model_out) {
    FitMetric metric;
    if (metric_name_in == "l1") {
        metric = FitMetric::l1;
    } else if (metric_name_in == "linf") {
        metric = FitMetric::linf;
    } else {
        throw ValidationError("unknown metric '" + metric_name_in + "' (expected l1 or linf)");
    }

    std::vector<ExperimentRecord> records = ingest_records(targets_path);
    std::vector<RealOutcomeDistribution> targets;
    for (const auto& r : records) {
        if (auto t = record_target(r)) targets.push_back(*t);
    }
    if (targets.empty()) {
        throw ValidationError(targets_path + ": no per-outcome fractions usable as fit targets");
    }

    FitResult fit = fit_distribution(targets, metric);
    for (const auto& w : fit.warnings) std::cerr << "warning: " << w << "\n";

    json residuals = json::object();
    for (const auto& r : fit.residuals) {
        json per_ctx = json::object();
        for (int o = 0; o < 8; ++o) per_ctx[Outcome(r.context, o).name()] = r.probs[o];
        residuals[r.context.name()] = per_ctx;
    }
    json model_weights = json::object();
    json support = json::array();
    for (InstructionSet s : all_instruction_sets()) {
        if (fit.model.weight(s) != 0) {
            model_weights[s.to_string()] = format_rational(fit.model.weight(s));
            support.push_back(s.to_string());
        }
    }
    json summary{{"objective", fit.objective},
                 {"metric", metric_name(fit.metric)},
                 {"lp_iterations", fit.lp_iterations},
                 {"residuals", residuals},
                 {"model", model_weights},
                 {"support", support}};
    if (!fit.warnings.empty()) summary["warnings"] = fit.warnings;

    if (!model_out.empty()) {
        std::ofstream mo(model_out);
        if (!mo) throw ValidationError("cannot write model file '" + model_out + "'");
        write_model(mo, fit.model,
                    "fit result, metric " + metric_name(fit.metric) + ", objective " +
                        fmt6(fit.objective));
    }

    std::ostringstream text;
    if (format == Format::text) {
        text << "objective " << fmt6(fit.objective) << " metric " << metric_name(fit.metric)
             << " support " << support.size() << " lp_iterations " << fit.lp_iterations << "\n";
    } else {
        text << summary.dump(2) << "\n";
    }
    out.write(text.str());
    return 0;
}

int cmd_search(const std::string& constraints_path, size_t limit, uint64_t node_budget,
               Format format, const OutputTarget& out, const std::string& table_out) {
    TableConstraints constraints =
        constraints_path.empty() ? default_table_constraints() : load_constraints(constraints_path);
    SearchResult result = search_tables(constraints, limit, node_budget);

    if (!table_out.empty() && !result.tables.empty()) {
        save_table(table_out, result.tables.front(),
                   "first table satisfying " +
                       (constraints_path.empty() ? std::string("the default constraint profile")
                                                 : constraints_path) +
                       "; lexicographically minimal");
    }

    std::ostringstream text;
    if (format == Format::json) {
        json tables = json::array();
        for (const auto& t : result.tables) {
            json members = json::array();
            for (InstructionSet s : t.members()) members.push_back(s.to_string());
            tables.push_back(members);
        }
        text << json{{"tables", tables},
                     {"partial", result.partial},
                     {"nodes_explored", result.nodes_explored}}
                    .dump(2)
             << "\n";
    } else {
        text << "found " << result.tables.size() << " table(s), explored "
             << result.nodes_explored << " nodes" << (result.partial ? ", budget exhausted" : "")
             << "\n";
        for (size_t i = 0; i < result.tables.size(); ++i) {
            text << "table " << i + 1 << "\n";
            for (InstructionSet s : result.tables[i].members()) {
                text << s.to_string() << "\n";
            }
        }
    }
    out.write(text.str());
    return 0;
}

int cmd_sample(const std::string& model_source, const std::string& context_name, uint64_t n,
               uint64_t seed, Format format, const OutputTarget& out) {
    ModelDistribution model = load_model_source(model_source);
    Context ctx = parse_context(context_name);
    SampleResult sample = monte_carlo_sample(model, ctx, n, seed);

    std::ostringstream text;
    if (format == Format::json) {
        json counts = json::object();
        json fractions = json::object();
        for (int o = 0; o < 8; ++o) {
            std::string name = Outcome(ctx, o).name();
            counts[name] = sample.counts[o];
            fractions[name] = sample.fraction(o);
        }
        text << json{{"context", ctx.name()},
                     {"n", sample.n},
                     {"seed", sample.seed},
                     {"counts", counts},
                     {"fractions", fractions}}
                    .dump(2)
             << "\n";
    } else if (format == Format::csv) {
        text << "context,outcome,count,fraction\n";
        for (int o = 0; o < 8; ++o) {
            text << ctx.name() << "," << Outcome(ctx, o).name() << "," << sample.counts[o] << ","
                 << fmt6(sample.fraction(o)) << "\n";
        }
    } else {
        text << "context " << ctx.name() << " n " << sample.n << " seed " << sample.seed << "\n";
        for (int o = 0; o < 8; ++o) {
            text << Outcome(ctx, o).name() << " " << sample.counts[o] << " "
                 << fmt6(sample.fraction(o)) << "\n";
        }
    }
    out.write(text.str());
    return 0;
}

int cmd_mermin(const std::string& model_source, bool use_qm, Format format,
               const OutputTarget& out) {
    MainContextExpectations e;
    std::string source;
    if (use_qm) {
        e = main_expectations_qm();
        source = "qm";
    } else {
        e = main_expectations(load_model_source(model_source));
        source = model_source;
    }
    double value = mermin_value(e);

    std::ostringstream text;
    if (format == Format::json) {
        text << json{{"value", value},
                     {"source", source},
                     {"expectations",
                      {{"xxx", e.xxx}, {"xyy", e.xyy}, {"yxy", e.yxy}, {"yyx", e.yyx}}}}
                    .dump(2)
             << "\n";
    } else {
        text << "mermin " << fmt6(value) << " (xxx " << fmt6(e.xxx) << ", xyy " << fmt6(e.xyy)
             << ", yxy " << fmt6(e.yxy) << ", yyx " << fmt6(e.yyx) << ")\n";
    }
    out.write(text.str());
    return 0;
}

// Figure-style three-series bar data: per context and outcome, one row per
// available series (qm and model always; experiment when per-outcome
// fractions were measured).
std::string bar_data_csv(const std::vector<ExperimentRecord>& records,
                         const ModelDistribution& model) {
    std::ostringstream csv;
    csv << "context,outcome,series,value\n";
    for (const char* name : {"yyx", "yxy", "xyy", "xxx"}) {
        Context ctx = parse_context(name);
        RealOutcomeDistribution qm = qm_outcome_distribution(ctx);
        OutcomeDistribution lhv = outcome_distribution(model, ctx);
        const ExperimentRecord* record = nullptr;
        for (const auto& r : records) {
            if (r.context == ctx) record = &r;
        }
        for (int o = 0; o < 8; ++o) {
            std::string outcome = Outcome(ctx, o).name();
            csv << ctx.name() << "," << outcome << ",qm," << fmt6(qm.probs[o]) << "\n";
            if (record && record->outcome_fractions) {
                csv << ctx.name() << "," << outcome << ",experiment,"
                    << fmt6((*record->outcome_fractions)[o]) << "\n";
            }
            csv << ctx.name() << "," << outcome << ",model," << fmt6(to_double(lhv.probs[o]))
                << "\n";
        }
    }
    return csv.str();
}

// Top-level "note" field of a data file, if any; echoed into the report so
// data provenance travels with the numbers.
std::string data_file_note(const std::string& path) {
    std::ifstream in(path);
    if (!in) return "";
    json doc;
    try {
        in >> doc;
    } catch (const json::exception&) {
        return "";
    }
    return doc.is_object() ? doc.value("note", "") : "";
}

int cmd_report(const std::string& data_path, const std::string& model_source,
               const std::string& out_dir) {
    std::vector<ExperimentRecord> records = ingest_records(data_path);
    ModelDistribution model = load_model_source(model_source);
    ComparisonReport report = build_comparison(data_path, model_source);
    std::string note = data_file_note(data_path);

    fs::create_directories(out_dir);
    fs::path dir(out_dir);
    {
        std::ofstream f(dir / "comparison.csv");
        if (!f) throw ValidationError("cannot write " + (dir / "comparison.csv").string());
        if (!note.empty()) f << "# " << note << "\n";
        f << comparison_csv(report);
    }
    {
        std::ofstream f(dir / "bars.csv");
        if (!f) throw ValidationError("cannot write " + (dir / "bars.csv").string());
        f << bar_data_csv(records, model);
    }
    std::cout << "wrote " << (dir / "comparison.csv").string() << " and "
              << (dir / "bars.csv").string() << "\n";
    if (!note.empty()) std::cout << "data note: " << note << "\n";
    std::cout << "average deviation: model " << fmt6(report.model_average_deviation) << ", qm "
              << fmt6(report.qm_average_deviation) << ", winner "
              << winner_name(report.overall_winner) << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"instruction-set model vs GHZ quantum predictions"};
    app.require_subcommand(1);

    std::map<std::string, Format> format_names{
        {"text", Format::text}, {"csv", Format::csv}, {"json", Format::json}};

    // Shared option storage; each subcommand registers the flags it uses.
    Format format = Format::text;
    std::string out_path;
    std::string model_source = "pinned";
    std::vector<std::string> context_names;
    std::string data_path;
    uint64_t seed = 1;

    auto add_common = [&](CLI::App* cmd, bool with_model) {
        cmd->add_option("--format", format, "output format")
            ->transform(CLI::CheckedTransformer(format_names, CLI::ignore_case))
            ->default_val("text");
        cmd->add_option("--out", out_path, "write output to this file instead of stdout");
        if (with_model) {
            cmd->add_option("--model", model_source,
                            "model source: 'pinned' or a table/model file path")
                ->default_val("pinned");
        }
    };

    CLI::App* predict = app.add_subcommand("predict", "exact model outcome fractions per context");
    add_common(predict, true);
    predict->add_option("--context", context_names, "context name (repeatable; default: all 8)");

    CLI::App* qm = app.add_subcommand("qm", "quantum outcome probabilities per context");
    add_common(qm, false);
    qm->add_option("--context", context_names, "context name (repeatable; default: all 8)");

    CLI::App* compare = app.add_subcommand("compare", "compare model and quantum predictions "
                                                      "against measured fractions");
    add_common(compare, true);
    compare->add_option("--data", data_path, "experiment data JSON file")->required();

    std::string metric = "l1";
    std::string model_out;
    CLI::App* fit = app.add_subcommand("fit", "best-fit instruction-set distribution to targets");
    add_common(fit, false);
    fit->add_option("--targets", data_path, "target fractions JSON file")->required();
    fit->add_option("--metric", metric, "fit metric: l1 or linf")->default_val("l1");
    fit->add_option("--model-out", model_out, "write the fitted model to this file");

    size_t limit = 1;
    uint64_t node_budget = 500'000'000;
    std::string constraints_path;
    std::string table_out;
    CLI::App* search = app.add_subcommand("search-table", "search for tables satisfying a "
                                                          "constraint profile");
    add_common(search, false);
    search->add_option("--constraints", constraints_path,
                       "constraints JSON file (default: built-in profile)");
    search->add_option("--limit", limit, "maximum number of tables to return")->default_val(1);
    search->add_option("--node-budget", node_budget, "deterministic search node budget")
        ->default_val(500'000'000);
    search->add_option("--table-out", table_out, "write the first table found to this file");

    uint64_t n = 0;
    std::string sample_context;
    CLI::App* sample = app.add_subcommand("sample", "seeded Monte Carlo coincidence counts");
    add_common(sample, true);
    sample->add_option("--context", sample_context, "context name")->required();
    sample->add_option("--n", n, "number of draws")->required();
    sample->add_option("--seed", seed, "PRNG seed (mt19937_64)")->default_val(1);

    bool use_qm = false;
    CLI::App* mermin = app.add_subcommand("mermin", "Mermin functional value");
    add_common(mermin, true);
    mermin->add_flag("--qm", use_qm, "evaluate the quantum expectations instead of a model")
        ->excludes(mermin->get_option("--model"));

    std::string report_dir;
    CLI::App* report = app.add_subcommand("report", "write comparison and bar-chart data files");
    report->add_option("--data", data_path, "experiment data JSON file")->required();
    report->add_option("--model", model_source, "model source: 'pinned' or a file path")
        ->default_val("pinned");
    report->add_option("--out", report_dir, "output directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    OutputTarget out{out_path};
    try {
        if (app.got_subcommand(predict)) {
            return cmd_predict(model_source, context_names, format, out);
        }
        if (app.got_subcommand(qm)) {
            return cmd_qm(context_names, format, out);
        }
        if (app.got_subcommand(compare)) {
            return cmd_compare(data_path, model_source, format, out);
        }
        if (app.got_subcommand(fit)) {
            return cmd_fit(data_path, metric, format, out, model_out);
        }
        if (app.got_subcommand(search)) {
            return cmd_search(constraints_path, limit, node_budget, format, out, table_out);
        }
        if (app.got_subcommand(sample)) {
            return cmd_sample(model_source, sample_context, n, seed, format, out);
        }
        if (app.got_subcommand(mermin)) {
            return cmd_mermin(model_source, use_qm, format, out);
        }
        if (app.got_subcommand(report)) {
            return cmd_report(data_path, model_source, report_dir);
        }
        std::cerr << "error: no subcommand selected\n";
        return 2;
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const IntegrityError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 1;
    }
}
