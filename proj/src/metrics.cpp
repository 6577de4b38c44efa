#include "presscheck/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <boost/math/distributions/students_t.hpp>

#include "presscheck/errors.hpp"
#include "presscheck/util.hpp"

namespace presscheck {

namespace {

double safe_ratio(double num, double den) { return den == 0.0 ? 0.0 : num / den; }

double f1(double precision, double recall) {
    return precision + recall == 0.0 ? 0.0 : 2.0 * precision * recall / (precision + recall);
}

}  // namespace

Confusion& Confusion::operator+=(const Confusion& other) {
    tp += other.tp;
    fp += other.fp;
    fn += other.fn;
    tn += other.tn;
    return *this;
}

const std::vector<std::string>& metric_names() {
    static const std::vector<std::string> names = {"macro_f1", "lying_f1", "lying_precision",
                                                   "lying_recall"};
    return names;
}

double metric_value(const Scores& s, const std::string& name) {
    if (name == "macro_f1") return s.macro_f1;
    if (name == "lying_f1") return s.lying_f1;
    if (name == "lying_precision") return s.lying_precision;
    if (name == "lying_recall") return s.lying_recall;
    if (name == "truthful_f1") return s.truthful_f1;
    throw Error("unknown metric '" + name + "'");
}

Confusion score(const Predictions& predictions, const Corpus& corpus) {
    for (const auto& [id, unused] : predictions) {
        if (!corpus.find(id)) throw UnknownConversation(id);
    }

    Confusion c;
    static const std::set<int> kEmpty;
    for (const auto& convo : corpus.conversations) {
        auto it = predictions.find(convo.id);
        const std::set<int>& predicted = it == predictions.end() ? kEmpty : it->second;
        std::set<int> truth = ground_truth(convo);
        for (const auto& m : convo.messages) {
            bool is_lie = truth.count(m.index) > 0;
            bool said_lie = predicted.count(m.index) > 0;
            if (is_lie && said_lie) ++c.tp;
            else if (!is_lie && said_lie) ++c.fp;
            else if (is_lie && !said_lie) ++c.fn;
            else ++c.tn;
        }
    }
    return c;
}

Scores f1_scores(const Confusion& c) {
    Scores s;
    s.lying_precision = safe_ratio(static_cast<double>(c.tp), static_cast<double>(c.tp + c.fp));
    s.lying_recall = safe_ratio(static_cast<double>(c.tp), static_cast<double>(c.tp + c.fn));
    s.lying_f1 = f1(s.lying_precision, s.lying_recall);

    double truthful_precision =
        safe_ratio(static_cast<double>(c.tn), static_cast<double>(c.tn + c.fn));
    double truthful_recall =
        safe_ratio(static_cast<double>(c.tn), static_cast<double>(c.tn + c.fp));
    s.truthful_f1 = f1(truthful_precision, truthful_recall);

    s.macro_f1 = (s.lying_f1 + s.truthful_f1) / 2.0;
    return s;
}

double student_t_quantile(double p, int dof) {
    boost::math::students_t dist(dof);
    return boost::math::quantile(dist, p);
}

EvalReport aggregate_trials(const std::vector<Scores>& trials) {
    if (trials.empty()) throw Error("aggregate_trials needs at least one trial");

    EvalReport report;
    report.n_trials = static_cast<int>(trials.size());
    report.single_trial = trials.size() == 1;
    report.zero_variance = true;

    for (const auto& name : metric_names()) {
        MetricSummary summary;
        for (const auto& t : trials) summary.values.push_back(metric_value(t, name));

        double mean = 0.0;
        for (double v : summary.values) mean += v;
        mean /= static_cast<double>(summary.values.size());
        summary.mean = mean;

        if (summary.values.size() > 1) {
            double ss = 0.0;
            for (double v : summary.values) ss += (v - mean) * (v - mean);
            double sd = std::sqrt(ss / static_cast<double>(summary.values.size() - 1));
            if (sd > 0.0) {
                report.zero_variance = false;
                double t = student_t_quantile(0.975, static_cast<int>(summary.values.size()) - 1);
                summary.ci_half_width = t * sd / std::sqrt(static_cast<double>(summary.values.size()));
            }
        }
        report.metrics[name] = std::move(summary);
    }
    return report;
}

EvalReport random_baseline(const Corpus& corpus, double q, std::uint64_t seed, int reps) {
    if (q < 0.0 || q > 1.0) throw Error("probability q must be in [0, 1]");
    if (reps < 1) throw Error("reps must be >= 1");

    std::mt19937_64 rng(seed);
    std::bernoulli_distribution flip(q);

    std::vector<Scores> trials;
    trials.reserve(static_cast<std::size_t>(reps));
    for (int rep = 0; rep < reps; ++rep) {
        Confusion c;
        for (const auto& convo : corpus.conversations) {
            std::set<int> truth = ground_truth(convo);
            for (const auto& m : convo.messages) {
                bool is_lie = truth.count(m.index) > 0;
                bool said_lie = q == 1.0 ? true : (q == 0.0 ? false : flip(rng));
                if (is_lie && said_lie) ++c.tp;
                else if (!is_lie && said_lie) ++c.fp;
                else if (is_lie && !said_lie) ++c.fn;
                else ++c.tn;
            }
        }
        trials.push_back(f1_scores(c));
    }
    EvalReport report = aggregate_trials(trials);
    report.group = "random-q" + util::fmt_double(q, 2);
    return report;
}

double pearson(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size()) throw Error("pearson inputs must have equal length");
    if (x.size() < 2) throw Error("pearson needs at least two points");

    double n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;

    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx == 0.0) throw DegenerateInput("x is constant");
    if (syy == 0.0) throw DegenerateInput("y is constant");
    return sxy / std::sqrt(sxx * syy);
}

}  // namespace presscheck
