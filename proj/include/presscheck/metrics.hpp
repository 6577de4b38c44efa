#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "presscheck/dataset.hpp"

namespace presscheck {

/// Message-level confusion counts; the positive class is "lie".
struct Confusion {
    long tp = 0;
    long fp = 0;
    long fn = 0;
    long tn = 0;

    long total() const { return tp + fp + fn + tn; }
    Confusion& operator+=(const Confusion& other);
};

struct Scores {
    double macro_f1 = 0.0;
    double lying_f1 = 0.0;
    double lying_precision = 0.0;
    double lying_recall = 0.0;
    double truthful_f1 = 0.0;
};

/// Names of the four reported metrics, in emission order.
const std::vector<std::string>& metric_names();
double metric_value(const Scores& s, const std::string& name);

using Predictions = std::map<std::string, std::set<int>>;

/// Scores predictions against sender-label ground truth over every message
/// in the corpus. Conversations absent from `predictions` count as all-truthful
/// predictions; ids absent from the corpus raise UnknownConversation.
Confusion score(const Predictions& predictions, const Corpus& corpus);

/// Precision/recall/F1 with the 0/0 -> 0 convention; macro-F1 is the
/// unweighted mean of the lie-class and truthful-class F1.
Scores f1_scores(const Confusion& c);

/// Student-t upper quantile, e.g. student_t_quantile(0.975, 4) = 2.776.
double student_t_quantile(double p, int dof);

struct MetricSummary {
    double mean = 0.0;
    double ci_half_width = 0.0;  // t(0.975, n-1) * s / sqrt(n)
    std::vector<double> values;
};

struct EvalReport {
    std::map<std::string, MetricSummary> metrics;  // keyed by metric name
    int n_trials = 1;
    bool single_trial = false;   // CI undefined, reported as 0
    bool zero_variance = false;  // all trials identical
    std::string group;           // optional grouping key
};

EvalReport aggregate_trials(const std::vector<Scores>& trials);

/// Monte-Carlo baseline: every message predicted as a lie with probability q.
EvalReport random_baseline(const Corpus& corpus, double q, std::uint64_t seed, int reps);

/// Sample Pearson correlation; throws DegenerateInput on constant vectors.
double pearson(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace presscheck
