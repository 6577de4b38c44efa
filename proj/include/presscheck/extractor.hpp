#pragma once

#include <cstddef>
#include <filesystem>
#include <set>
#include <string>
#include <vector>

namespace presscheck {

/// Provenance of one accepted index: the token span that produced it.
struct MatchedSpan {
    int index = 0;
    std::size_t begin = 0;  // byte offset into the raw text
    std::size_t end = 0;
};

struct DroppedIndex {
    int index = 0;
    std::string reason;  // e.g. "out of range (conversation has 2 messages)"
};

struct Extraction {
    std::set<int> indices;             // strictly ascending by set ordering
    std::vector<DroppedIndex> dropped;
    std::vector<MatchedSpan> matched_spans;
};

/// Maps free-form model output to the message indices it claims are lies.
/// Deterministic and total: ambiguity is resolved by the rules, never by failure.
Extraction extract(const std::string& raw, int n_messages);

// -- audit harness -------------------------------------------------------------

struct AuditItem {
    std::string id;
    std::string raw_output;
    int n_messages = 1;
    std::set<int> expected;
};

struct AuditMismatch {
    std::string id;
    std::set<int> expected;
    std::set<int> actual;
    std::vector<MatchedSpan> spans;
};

struct AuditReport {
    std::size_t total = 0;
    std::size_t exact_matches = 0;
    std::vector<AuditMismatch> mismatches;

    double exact_match_rate() const {
        return total == 0 ? 0.0 : static_cast<double>(exact_matches) / static_cast<double>(total);
    }
};

AuditReport audit_corpus(const std::vector<AuditItem>& items);

/// Labels file: CSV rows (id, n_messages, expected indices space-joined, raw text).
std::vector<AuditItem> load_audit_items(const std::filesystem::path& path);

}  // namespace presscheck
