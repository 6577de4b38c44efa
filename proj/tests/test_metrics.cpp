#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "presscheck/errors.hpp"
#include "presscheck/metrics.hpp"
#include "support/helpers.hpp"

using namespace presscheck;

namespace {

/// Independent oracle: per-message tally from first principles, with no
/// shared code with the metrics implementation.
struct NaiveTally {
    double lying_f1 = 0.0;
    double macro_f1 = 0.0;
    double lying_precision = 0.0;
    double lying_recall = 0.0;
};

NaiveTally naive_scores(const std::vector<bool>& truth, const std::vector<bool>& predicted) {
    int tp = 0, fp = 0, fn = 0, tn = 0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        if (truth[i] && predicted[i]) tp++;
        if (!truth[i] && predicted[i]) fp++;
        if (truth[i] && !predicted[i]) fn++;
        if (!truth[i] && !predicted[i]) tn++;
    }
    auto div = [](double a, double b) { return b == 0 ? 0.0 : a / b; };
    NaiveTally t;
    t.lying_precision = div(tp, tp + fp);
    t.lying_recall = div(tp, tp + fn);
    t.lying_f1 = div(2.0 * t.lying_precision * t.lying_recall,
                     t.lying_precision + t.lying_recall);
    double tr_p = div(tn, tn + fn);
    double tr_r = div(tn, tn + fp);
    double tr_f1 = div(2.0 * tr_p * tr_r, tr_p + tr_r);
    t.macro_f1 = (t.lying_f1 + tr_f1) / 2.0;
    return t;
}

Corpus one_conversation_corpus(const std::vector<bool>& truth) {
    std::set<int> lies;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        if (truth[i]) lies.insert(static_cast<int>(i));
    }
    Corpus corpus;
    corpus.conversations.push_back(
        testsupport::tiny_conversation("c-1", static_cast<int>(truth.size()), lies));
    corpus.total_messages = truth.size();
    return corpus;
}

}  // namespace

TEST_CASE("f1_scores matches the hand-computed example") {
    Scores s = f1_scores({2, 1, 1, 6});
    CHECK(s.lying_precision == doctest::Approx(2.0 / 3.0));
    CHECK(s.lying_recall == doctest::Approx(2.0 / 3.0));
    CHECK(s.lying_f1 == doctest::Approx(2.0 / 3.0));
    CHECK(s.truthful_f1 == doctest::Approx(6.0 / 7.0));
    CHECK(s.macro_f1 == doctest::Approx(16.0 / 21.0));
}

TEST_CASE("perfect predictor scores 1.0 everywhere") {
    Scores s = f1_scores({5, 0, 0, 10});
    CHECK(s.macro_f1 == doctest::Approx(1.0));
    CHECK(s.lying_f1 == doctest::Approx(1.0));
    CHECK(s.lying_precision == doctest::Approx(1.0));
    CHECK(s.lying_recall == doctest::Approx(1.0));
}

TEST_CASE("degenerate 0/0 cases follow the zero convention") {
    Scores s = f1_scores({0, 0, 3, 7});
    CHECK(s.lying_f1 == 0.0);
    CHECK(s.lying_precision == 0.0);
    CHECK(s.lying_recall == 0.0);
}

TEST_CASE("score counts message-level confusion over the corpus") {
    Corpus corpus = one_conversation_corpus({false, true, false, true, false});

    SUBCASE("ground-truth predictions are perfect") {
        Predictions p = {{"c-1", {1, 3}}};
        Confusion c = score(p, corpus);
        CHECK(c.tp == 2);
        CHECK(c.fp == 0);
        CHECK(c.fn == 0);
        CHECK(c.tn == 3);
        CHECK(f1_scores(c).lying_f1 == doctest::Approx(1.0));
    }
    SUBCASE("empty predictions miss every lie") {
        Confusion c = score({}, corpus);
        CHECK(c.tp == 0);
        CHECK(c.fn == 2);
        CHECK(c.tn == 3);
    }
    SUBCASE("unknown conversation id is rejected") {
        Predictions p = {{"nope", {0}}};
        CHECK_THROWS_AS(static_cast<void>(score(p, corpus)), UnknownConversation);
    }
    SUBCASE("confusion partitions the corpus") {
        Predictions p = {{"c-1", {0, 1}}};
        Confusion c = score(p, corpus);
        CHECK(c.total() == 5);
    }
}

TEST_CASE("metrics match the brute-force oracle exhaustively up to 10 messages") {
    // Every corpus size, every ground-truth labeling, every prediction set.
    long mismatches = 0;
    long checked = 0;
    for (int n = 1; n <= 10; ++n) {
        for (unsigned truth_bits = 0; truth_bits < (1u << n); ++truth_bits) {
            std::vector<bool> truth(n);
            for (int i = 0; i < n; ++i) truth[i] = (truth_bits >> i) & 1;
            Corpus corpus = one_conversation_corpus(truth);

            for (unsigned pred_bits = 0; pred_bits < (1u << n); ++pred_bits) {
                std::set<int> predicted;
                std::vector<bool> pred(n);
                for (int i = 0; i < n; ++i) {
                    pred[i] = (pred_bits >> i) & 1;
                    if (pred[i]) predicted.insert(i);
                }
                Scores s = f1_scores(score({{"c-1", predicted}}, corpus));
                NaiveTally oracle = naive_scores(truth, pred);
                ++checked;
                if (s.lying_f1 != oracle.lying_f1 || s.macro_f1 != oracle.macro_f1 ||
                    s.lying_precision != oracle.lying_precision ||
                    s.lying_recall != oracle.lying_recall) {
                    ++mismatches;
                }
            }
        }
    }
    CHECK(checked > 1'000'000);
    CHECK(mismatches == 0);
}

TEST_CASE("aggregate_trials reproduces the derived CI") {
    std::vector<Scores> trials;
    for (double v : {0.50, 0.52, 0.48, 0.51, 0.49}) {
        Scores s;
        s.macro_f1 = v;
        s.lying_f1 = v;
        trials.push_back(s);
    }
    EvalReport report = aggregate_trials(trials);
    CHECK(report.n_trials == 5);
    CHECK(report.metrics["macro_f1"].mean == doctest::Approx(0.50));
    // s = 0.0158, t(0.975, 4) = 2.776 -> half-width 0.0196
    CHECK(report.metrics["macro_f1"].ci_half_width == doctest::Approx(0.0196).epsilon(0.01));
}

TEST_CASE("aggregate_trials flags degenerate inputs") {
    Scores s;
    s.macro_f1 = 0.4;

    SUBCASE("five identical trials have zero half-width") {
        EvalReport report = aggregate_trials({s, s, s, s, s});
        CHECK(report.metrics["macro_f1"].ci_half_width == 0.0);
        CHECK(report.zero_variance);
    }
    SUBCASE("single trial is flagged") {
        EvalReport report = aggregate_trials({s});
        CHECK(report.single_trial);
        CHECK(report.metrics["macro_f1"].mean == doctest::Approx(0.4));
        CHECK(report.metrics["macro_f1"].ci_half_width == 0.0);
    }
}

TEST_CASE("student t quantile agrees with tabulated values") {
    CHECK(student_t_quantile(0.975, 4) == doctest::Approx(2.7764).epsilon(1e-3));
    CHECK(student_t_quantile(0.975, 999) == doctest::Approx(1.9623).epsilon(1e-3));
}

TEST_CASE("random_baseline endpoints") {
    Corpus corpus = one_conversation_corpus({true, false, false, true, false, false});

    SUBCASE("q=0 never predicts a lie") {
        EvalReport r = random_baseline(corpus, 0.0, 7, 50);
        CHECK(r.metrics["lying_f1"].mean == 0.0);
        CHECK(r.metrics["lying_recall"].mean == 0.0);
    }
    SUBCASE("q=1 predicts everything; recall 1, precision = prevalence") {
        EvalReport r = random_baseline(corpus, 1.0, 7, 50);
        CHECK(r.metrics["lying_recall"].mean == doctest::Approx(1.0));
        CHECK(r.metrics["lying_precision"].mean == doctest::Approx(2.0 / 6.0));
    }
    SUBCASE("seeded runs are reproducible") {
        EvalReport a = random_baseline(corpus, 0.5, 42, 200);
        EvalReport b = random_baseline(corpus, 0.5, 42, 200);
        CHECK(a.metrics["lying_f1"].mean == b.metrics["lying_f1"].mean);
    }
}

TEST_CASE("pearson handles the derived example and degenerate inputs") {
    CHECK(pearson({1, 2, 3, 4}, {2, 1, 4, 3}) == doctest::Approx(0.6));
    CHECK(pearson({1, 2, 3}, {3, 5, 7}) == doctest::Approx(1.0));
    CHECK(pearson({1, 2, 3}, {7, 5, 3}) == doctest::Approx(-1.0));
    CHECK_THROWS_AS(static_cast<void>(pearson({1, 1, 1}, {1, 2, 3})), DegenerateInput);
}

TEST_CASE("adding a correctly predicted truthful message never hurts macro") {
    Confusion base{3, 2, 1, 10};
    Scores before = f1_scores(base);
    base.tn += 1;
    Scores after = f1_scores(base);
    CHECK(after.macro_f1 >= before.macro_f1);
    CHECK(after.lying_f1 == before.lying_f1);
}
