#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "presscheck/gateway.hpp"

namespace presscheck {

/// One feedback text bound to a conversation, attributed to a human
/// annotator id or a model id.
struct Feedback {
    std::string conversation_id;
    std::string source;
    std::string text;
};

/// All feedback for one conversation, keyed by source id.
struct FeedbackSet {
    std::string conversation_id;
    std::map<std::string, std::string> entries;  // source -> text
};

/// Symmetric pairwise consistency for one conversation:
/// 1 = consistent, 0 = contradiction found. Keys hold source ids in
/// lexicographic order; the diagonal is undefined and never stored.
struct ConsistencyMatrix {
    std::string conversation_id;
    std::map<std::pair<std::string, std::string>, int> pairs;

    std::optional<int> value(const std::string& a, const std::string& b) const;
    void set(const std::string& a, const std::string& b, int v);
};

/// Asks the judge once per unordered pair (inputs passed in canonical source
/// order) and converts the leading Yes/No: Yes (contradiction) -> 0,
/// No -> 1. Throws UnparseableVerdict when neither appears in the first
/// five tokens.
int judge_pair(const Feedback& f1, const Feedback& f2, const ModelSpec& judge,
               Gateway& gateway, const TemplateConfig& tpl);

/// Verdict parsing alone; exposed for tests.
int parse_verdict(const std::string& raw);

/// Histogram over the number of consistent pairs {0,1,2,3} among the three
/// named human sources, one count per conversation.
std::map<int, int> configuration_histogram(const std::vector<ConsistencyMatrix>& matrices,
                                           const std::vector<std::string>& human_sources);

/// Fraction of conversations whose three human pairs are all inconsistent.
double all_inconsistent_fraction(const std::vector<ConsistencyMatrix>& matrices,
                                 const std::vector<std::string>& human_sources);

struct LengthStats {
    double mean = 0.0;
    double median = 0.0;
    double q1 = 0.0;
    double q3 = 0.0;
    std::vector<double> outliers;  // beyond 1.5 * IQR
    std::size_t count = 0;
};

/// Word counts use whitespace splitting.
LengthStats length_stats(const std::vector<Feedback>& feedback);

struct ConsistencyBucket {
    int key = 0;  // consistent-pair count, or a pair's 0/1 value
    std::vector<std::string> conversation_ids;
    std::vector<double> values;
    double median = 0.0;
    double mean = 0.0;
};

/// Groups per-conversation metric values by the number of consistent pairs
/// among `human_sources` (buckets 0..3).
std::vector<ConsistencyBucket> bucket_by_consistency(
    const std::vector<ConsistencyMatrix>& matrices,
    const std::vector<std::string>& human_sources,
    const std::map<std::string, double>& metric_per_conversation);

/// Groups by one chosen pair's 0/1 value (buckets 0 and 1).
std::vector<ConsistencyBucket> bucket_by_pair(
    const std::vector<ConsistencyMatrix>& matrices, const std::string& source_a,
    const std::string& source_b, const std::map<std::string, double>& metric_per_conversation);

double median_of(std::vector<double> values);

}  // namespace presscheck
