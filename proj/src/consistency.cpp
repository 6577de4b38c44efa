#include "presscheck/consistency.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "presscheck/errors.hpp"
#include "presscheck/util.hpp"

namespace presscheck {

namespace {

std::pair<std::string, std::string> canonical_pair(const std::string& a, const std::string& b) {
    return a <= b ? std::make_pair(a, b) : std::make_pair(b, a);
}

/// Linear-interpolation quantile over a sorted vector.
double quantile_sorted(const std::vector<double>& sorted, double p) {
    if (sorted.empty()) return 0.0;
    if (sorted.size() == 1) return sorted[0];
    double rank = p * static_cast<double>(sorted.size() - 1);
    std::size_t lo = static_cast<std::size_t>(std::floor(rank));
    std::size_t hi = static_cast<std::size_t>(std::ceil(rank));
    double frac = rank - static_cast<double>(lo);
    return sorted[lo] * (1.0 - frac) + sorted[hi] * frac;
}

int require_pair(const ConsistencyMatrix& m, const std::string& a, const std::string& b) {
    auto v = m.value(a, b);
    if (!v) {
        throw IncompleteMatrix(m.conversation_id + " missing pair (" + a + ", " + b + ")");
    }
    return *v;
}

int consistent_pair_count(const ConsistencyMatrix& m, const std::vector<std::string>& sources) {
    if (sources.size() != 3)
        throw Error("configuration analysis expects exactly 3 human sources");
    return require_pair(m, sources[0], sources[1]) + require_pair(m, sources[0], sources[2]) +
           require_pair(m, sources[1], sources[2]);
}

}  // namespace

std::optional<int> ConsistencyMatrix::value(const std::string& a, const std::string& b) const {
    auto it = pairs.find(canonical_pair(a, b));
    if (it == pairs.end()) return std::nullopt;
    return it->second;
}

void ConsistencyMatrix::set(const std::string& a, const std::string& b, int v) {
    if (a == b) throw Error("consistency matrix diagonal is undefined");
    if (v != 0 && v != 1) throw Error("consistency values are 0 or 1");
    pairs[canonical_pair(a, b)] = v;
}

int parse_verdict(const std::string& raw) {
    std::size_t seen = 0;
    std::size_t i = 0;
    while (i < raw.size() && seen < 5) {
        while (i < raw.size() && std::isspace(static_cast<unsigned char>(raw[i]))) ++i;
        std::size_t start = i;
        while (i < raw.size() && !std::isspace(static_cast<unsigned char>(raw[i]))) ++i;
        if (i == start) break;
        std::string token;
        for (std::size_t k = start; k < i; ++k) {
            if (std::isalpha(static_cast<unsigned char>(raw[k])))
                token.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(raw[k]))));
        }
        if (token == "yes") return 0;  // contradiction -> inconsistent
        if (token == "no") return 1;   // no contradiction -> consistent
        ++seen;
    }
    throw UnparseableVerdict(raw.substr(0, 80));
}

int judge_pair(const Feedback& f1, const Feedback& f2, const ModelSpec& judge,
               Gateway& gateway, const TemplateConfig& tpl) {
    const Feedback* first = &f1;
    const Feedback* second = &f2;
    if (second->source < first->source) std::swap(first, second);

    PromptBundle bundle = render_judge(first->text, second->text, tpl);
    RequestMeta meta;
    meta.conversation_id = first->conversation_id;
    meta.stage = StageKind::Judge;
    StageRecord record = gateway.invoke(bundle, judge, meta, 1);
    return parse_verdict(record.raw_output);
}

std::map<int, int> configuration_histogram(const std::vector<ConsistencyMatrix>& matrices,
                                           const std::vector<std::string>& human_sources) {
    std::map<int, int> histogram = {{0, 0}, {1, 0}, {2, 0}, {3, 0}};
    for (const auto& m : matrices) ++histogram[consistent_pair_count(m, human_sources)];
    return histogram;
}

double all_inconsistent_fraction(const std::vector<ConsistencyMatrix>& matrices,
                                 const std::vector<std::string>& human_sources) {
    if (matrices.empty()) return 0.0;
    auto histogram = configuration_histogram(matrices, human_sources);
    return static_cast<double>(histogram[0]) / static_cast<double>(matrices.size());
}

double median_of(std::vector<double> values) {
    if (values.empty()) return 0.0;
    std::sort(values.begin(), values.end());
    return quantile_sorted(values, 0.5);
}

LengthStats length_stats(const std::vector<Feedback>& feedback) {
    LengthStats stats;
    stats.count = feedback.size();
    if (feedback.empty()) return stats;

    std::vector<double> lengths;
    lengths.reserve(feedback.size());
    for (const auto& f : feedback)
        lengths.push_back(static_cast<double>(util::word_count(f.text)));

    double sum = 0.0;
    for (double v : lengths) sum += v;
    stats.mean = sum / static_cast<double>(lengths.size());

    std::sort(lengths.begin(), lengths.end());
    stats.median = quantile_sorted(lengths, 0.5);
    stats.q1 = quantile_sorted(lengths, 0.25);
    stats.q3 = quantile_sorted(lengths, 0.75);

    double iqr = stats.q3 - stats.q1;
    double lo = stats.q1 - 1.5 * iqr;
    double hi = stats.q3 + 1.5 * iqr;
    for (double v : lengths) {
        if (v < lo || v > hi) stats.outliers.push_back(v);
    }
    return stats;
}

std::vector<ConsistencyBucket> bucket_by_consistency(
    const std::vector<ConsistencyMatrix>& matrices,
    const std::vector<std::string>& human_sources,
    const std::map<std::string, double>& metric_per_conversation) {
    std::map<int, ConsistencyBucket> buckets;
    for (const auto& m : matrices) {
        auto metric = metric_per_conversation.find(m.conversation_id);
        if (metric == metric_per_conversation.end()) continue;
        int key = consistent_pair_count(m, human_sources);
        ConsistencyBucket& bucket = buckets[key];
        bucket.key = key;
        bucket.conversation_ids.push_back(m.conversation_id);
        bucket.values.push_back(metric->second);
    }

    std::vector<ConsistencyBucket> out;
    for (auto& [key, bucket] : buckets) {
        double sum = 0.0;
        for (double v : bucket.values) sum += v;
        bucket.mean = bucket.values.empty() ? 0.0 : sum / static_cast<double>(bucket.values.size());
        bucket.median = median_of(bucket.values);
        out.push_back(std::move(bucket));
    }
    return out;
}

std::vector<ConsistencyBucket> bucket_by_pair(
    const std::vector<ConsistencyMatrix>& matrices, const std::string& source_a,
    const std::string& source_b, const std::map<std::string, double>& metric_per_conversation) {
    std::map<int, ConsistencyBucket> buckets;
    for (const auto& m : matrices) {
        auto metric = metric_per_conversation.find(m.conversation_id);
        if (metric == metric_per_conversation.end()) continue;
        int key = require_pair(m, source_a, source_b);
        ConsistencyBucket& bucket = buckets[key];
        bucket.key = key;
        bucket.conversation_ids.push_back(m.conversation_id);
        bucket.values.push_back(metric->second);
    }

    std::vector<ConsistencyBucket> out;
    for (auto& [key, bucket] : buckets) {
        double sum = 0.0;
        for (double v : bucket.values) sum += v;
        bucket.mean = bucket.values.empty() ? 0.0 : sum / static_cast<double>(bucket.values.size());
        bucket.median = median_of(bucket.values);
        out.push_back(std::move(bucket));
    }
    return out;
}

}  // namespace presscheck
