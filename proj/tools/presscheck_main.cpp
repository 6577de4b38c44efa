#include <exception>
#include <iostream>

#include <CLI11.hpp>

#include "presscheck/errors.hpp"
#include "presscheck/fixture.hpp"
#include "presscheck/pipeline.hpp"
#include "presscheck/util.hpp"

using namespace presscheck;

namespace {

void print_report(const std::string& label, const EvalReport& report) {
    std::cout << label << ":";
    for (const auto& name : metric_names()) {
        const MetricSummary& m = report.metrics.at(name);
        std::cout << "  " << name << " " << util::fmt_double(m.mean, 3);
        if (report.n_trials > 1)
            std::cout << " +/- " << util::fmt_double(m.ci_half_width, 3);
    }
    std::cout << "  (" << report.n_trials << (report.n_trials == 1 ? " trial)" : " trials)")
              << "\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Staged lie-detection pipeline for Diplomacy press"};
    app.require_subcommand(1);

    std::string config_path = "config.json";
    std::string power_override, mock_override, out_override;
    std::uint64_t seed_override = 0;
    bool seed_set = false;
    app.add_option("--config", config_path, "Run configuration file")
        ->envname("PRESSCHECK_CONFIG");
    app.add_option("--power", power_override, "Focus power (overrides config)");
    app.add_option("--mock", mock_override, "Mock script directory (overrides config)");
    app.add_option("--out", out_override, "Output directory (overrides config)");
    auto* seed_opt = app.add_option("--seed", seed_override, "Root seed (overrides config)");

    auto* gen = app.add_subcommand("gen-fixture",
                                   "Write a self-contained offline data bundle");
    std::string gen_dir = "data";
    std::uint64_t gen_seed = 20230601;
    gen->add_option("--dir", gen_dir, "Bundle directory");
    gen->add_option("--seed", gen_seed, "Generator seed");

    auto* ingest = app.add_subcommand("ingest", "Build the conversation corpus");
    auto* suggest = app.add_subcommand("suggest", "Run the suggestion stage");
    auto* feedback = app.add_subcommand("feedback", "Collect feedback");
    bool feedback_human = false;
    feedback->add_flag("--human", feedback_human,
                       "Ingest the configured human feedback file instead of querying a model");

    auto* modify = app.add_subcommand("modify", "Run the modification stage");
    std::string modify_source;
    modify->add_option("--feedback-source", modify_source,
                       "Feedback source to condition on (default: the feedback model)");

    auto* ablate = app.add_subcommand("ablate", "Run a feedback ablation");
    std::string ablate_kind = "no_feedback";
    std::string ablate_source;
    ablate->add_option("--kind", ablate_kind, "no_feedback | permuted")
        ->check(CLI::IsMember({"no_feedback", "permuted"}));
    ablate->add_option("--feedback-source", ablate_source, "Source for the permuted ablation");

    auto* round2 = app.add_subcommand("round2", "Second feedback/modification round");
    std::string round2_source;
    round2->add_option("--feedback-source", round2_source,
                       "Round-1 feedback source (default: the feedback model)");

    auto* consistency = app.add_subcommand("consistency", "Pairwise feedback consistency");
    std::vector<std::string> consistency_sources;
    consistency->add_option("--sources", consistency_sources,
                            "Feedback sources to compare (default: all collected)");

    auto* report = app.add_subcommand("report", "Assemble the report bundle");

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen->parsed()) {
            auto paths = fixture::generate_reference_fixture(gen_dir, gen_seed);
            std::cout << "bundle written to " << paths.root.string() << "\n"
                      << "run with: presscheck --config " << paths.config.string()
                      << " <subcommand>\n";
            return 0;
        }

        RunConfig cfg = load_config(config_path);
        if (!power_override.empty()) cfg.focus_power = parse_power(power_override);
        if (!mock_override.empty()) cfg.mock_dir = mock_override;
        if (!out_override.empty()) cfg.out_dir = out_override;
        if (seed_opt->count() > 0) {
            cfg.seed = seed_override;
            seed_set = true;
        }
        (void)seed_set;
        Pipeline pipeline(cfg);

        if (ingest->parsed()) {
            const Corpus& c = pipeline.cmd_ingest();
            std::cout << c.conversations.size() << " conversations, " << c.total_messages
                      << " messages\n";
        } else if (suggest->parsed()) {
            StageResult r = pipeline.cmd_suggest();
            print_report(r.label, r.report);
        } else if (feedback->parsed()) {
            if (feedback_human) {
                for (const auto& r : pipeline.cmd_feedback_human()) {
                    std::cout << r.source << ": " << r.rows.size() << " rows";
                    if (!r.missing_ids.empty())
                        std::cout << " (" << r.missing_ids.size() << " conversations missing)";
                    std::cout << "\n";
                    for (const auto& id : r.missing_ids) std::cout << "  missing: " << id << "\n";
                }
            } else {
                FeedbackResult r = pipeline.cmd_feedback_model();
                std::cout << r.source << ": " << r.rows.size() << " feedback texts\n";
            }
        } else if (modify->parsed()) {
            std::string source =
                modify_source.empty() ? cfg.feedback_model.name : modify_source;
            StageResult r = pipeline.cmd_modify(source);
            print_report(r.label, r.report);
        } else if (ablate->parsed()) {
            AblationKind kind = ablate_kind == "no_feedback" ? AblationKind::NoFeedback
                                                             : AblationKind::Permuted;
            std::string source =
                ablate_source.empty() ? cfg.feedback_model.name : ablate_source;
            StageResult r = pipeline.cmd_ablate(kind, source);
            print_report(r.label, r.report);
        } else if (round2->parsed()) {
            std::string source =
                round2_source.empty() ? cfg.feedback_model.name : round2_source;
            auto r = pipeline.cmd_round2(source);
            print_report(r.modify2.label, r.modify2.report);
        } else if (consistency->parsed()) {
            ConsistencyResult r = pipeline.cmd_consistency(consistency_sources);
            if (!r.histogram.empty()) {
                std::cout << "human configuration histogram (consistent pairs -> conversations):";
                for (const auto& [k, v] : r.histogram) std::cout << "  " << k << ": " << v;
                std::cout << "\n";
            }
            for (const auto& [source, stats] : r.lengths) {
                std::cout << source << ": mean " << util::fmt_double(stats.mean, 1)
                          << " words, median " << util::fmt_double(stats.median, 1) << ", "
                          << stats.outliers.size() << " outliers\n";
            }
        } else if (report->parsed()) {
            auto dir = pipeline.cmd_report();
            std::cout << "report bundle written to " << dir.string() << "\n";
        }
        return 0;
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return 1;
    }
}
