#include "presscheck/extractor.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <regex>

#include "presscheck/diplomacy.hpp"
#include "presscheck/errors.hpp"
#include "presscheck/util.hpp"

namespace presscheck {

namespace {

// Phrases that declare the whole output lie-free.
const std::vector<std::string> kNoLiePhrases = {
    "no messages are lies", "no message is a lie",    "there are no lies",
    "there is no lie",      "none of the messages",   "no lies in this conversation",
};

// A sentence only contributes indices when one of these stems appears.
const std::vector<std::string> kLieStems = {
    "lie",   "lies",      "lied",       "lying",     "deceptive",
    "deception", "dishonest", "deceit", "deceitful", "untruthful",
};

// Local negation: the sentence is talking a prediction down, not making one.
const std::vector<std::string> kNegationPhrases = {
    "not a lie", "no lie", "no lies", "not lies", "not lying",
    "not deceptive", "truthful", "honest",
};

const std::map<std::string, int> kWordNumbers = {
    {"zero", 0},   {"one", 1},    {"two", 2},       {"three", 3},     {"four", 4},
    {"five", 5},   {"six", 6},    {"seven", 7},     {"eight", 8},     {"nine", 9},
    {"ten", 10},   {"eleven", 11}, {"twelve", 12},   {"thirteen", 13}, {"fourteen", 14},
    {"fifteen", 15}, {"sixteen", 16}, {"seventeen", 17}, {"eighteen", 18}, {"nineteen", 19},
    {"twenty", 20},
};

struct Token {
    std::string text;  // lowercased, alnum only
    std::size_t begin = 0;
    std::size_t end = 0;
    bool is_number = false;
    long value = 0;
};

std::vector<Token> tokenize(std::string_view text, std::size_t base_offset) {
    std::vector<Token> tokens;
    std::size_t i = 0;
    while (i < text.size()) {
        if (!std::isalnum(static_cast<unsigned char>(text[i]))) {
            ++i;
            continue;
        }
        std::size_t start = i;
        while (i < text.size() && (std::isalnum(static_cast<unsigned char>(text[i])) ||
                                   text[i] == '\'')) {
            ++i;
        }
        Token t;
        t.begin = base_offset + start;
        t.end = base_offset + i;
        t.text = util::to_lower(text.substr(start, i - start));
        t.is_number = !t.text.empty() &&
                      std::all_of(t.text.begin(), t.text.end(),
                                  [](char c) { return std::isdigit(static_cast<unsigned char>(c)); });
        if (t.is_number) {
            if (t.text.size() > 7) {
                t.is_number = false;  // garbage, not a message index
            } else {
                t.value = std::stol(t.text);
            }
        }
        tokens.push_back(std::move(t));
    }
    return tokens;
}

std::string normalized_phrase_text(const std::vector<Token>& tokens) {
    std::string out = " ";
    for (const auto& t : tokens) {
        out += t.text;
        out += ' ';
    }
    return out;
}

bool contains_phrase(const std::string& normalized, const std::string& phrase) {
    return normalized.find(" " + phrase + " ") != std::string::npos;
}

/// Blanks out lines shaped "{i}: {Power}: ..." so quoted conversation echoes
/// never contribute indices. Offsets are preserved.
std::string suppress_conversation_echoes(const std::string& raw) {
    std::string out = raw;
    std::size_t line_start = 0;
    while (line_start < out.size()) {
        std::size_t line_end = out.find('\n', line_start);
        if (line_end == std::string::npos) line_end = out.size();

        std::string_view line(out.data() + line_start, line_end - line_start);
        std::size_t p = 0;
        while (p < line.size() && std::isspace(static_cast<unsigned char>(line[p]))) ++p;
        std::size_t digits_start = p;
        while (p < line.size() && std::isdigit(static_cast<unsigned char>(line[p]))) ++p;
        bool echo = p > digits_start && p < line.size() && line[p] == ':';
        if (echo) {
            ++p;
            while (p < line.size() && line[p] == ' ') ++p;
            std::size_t name_start = p;
            while (p < line.size() && std::isalpha(static_cast<unsigned char>(line[p]))) ++p;
            echo = p > name_start && p < line.size() && line[p] == ':';
            if (echo) {
                std::string name(line.substr(name_start, p - name_start));
                try {
                    parse_power(name);
                } catch (const UnknownPower&) {
                    echo = false;
                }
            }
        }
        if (echo) {
            for (std::size_t i = line_start; i < line_end; ++i) out[i] = ' ';
        }
        line_start = line_end + 1;
    }
    return out;
}

struct Sentence {
    std::size_t begin = 0;
    std::size_t end = 0;
};

std::vector<Sentence> split_sentences(const std::string& text) {
    std::vector<Sentence> sentences;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= text.size(); ++i) {
        bool boundary = i == text.size() || text[i] == '.' || text[i] == '!' ||
                        text[i] == '?' || text[i] == '\n';
        if (!boundary) continue;
        if (i > start) sentences.push_back({start, i});
        start = i + 1;
    }
    return sentences;
}

struct Mention {
    long last_positive = -1;  // byte offset of the latest positive mention
    long last_negated = -1;
    std::vector<MatchedSpan> spans;
};

bool preceded_by_message_word(const std::vector<Token>& tokens, std::size_t i) {
    for (std::size_t back = 1; back <= 2 && back <= i; ++back) {
        const std::string& prev = tokens[i - back].text;
        if (prev == "message" || prev == "messages" || prev == "number" || prev == "numbers")
            return true;
    }
    return false;
}

}  // namespace

Extraction extract(const std::string& raw, int n_messages) {
    Extraction result;
    if (raw.empty()) return result;

    std::string text = suppress_conversation_echoes(raw);
    std::vector<Token> all_tokens = tokenize(text, 0);
    std::string normalized_all = normalized_phrase_text(all_tokens);

    for (const auto& phrase : kNoLiePhrases) {
        if (contains_phrase(normalized_all, phrase)) return result;
    }

    std::map<long, Mention> mentions;
    static const std::regex kRange(R"((\d{1,4})\s*-\s*(\d{1,4}))");

    for (const Sentence& s : split_sentences(text)) {
        std::string_view sentence(text.data() + s.begin, s.end - s.begin);
        std::vector<Token> tokens = tokenize(sentence, s.begin);
        std::string normalized = normalized_phrase_text(tokens);

        bool has_stem = std::any_of(kLieStems.begin(), kLieStems.end(), [&](const auto& stem) {
            return contains_phrase(normalized, stem);
        });
        if (!has_stem) continue;

        bool negated = std::any_of(kNegationPhrases.begin(), kNegationPhrases.end(),
                                   [&](const auto& p) { return contains_phrase(normalized, p); });

        std::vector<std::pair<long, MatchedSpan>> found;
        for (std::size_t i = 0; i < tokens.size(); ++i) {
            const Token& t = tokens[i];
            if (t.is_number) {
                found.push_back({t.value, MatchedSpan{static_cast<int>(t.value), t.begin, t.end}});
            } else if (auto word = kWordNumbers.find(t.text);
                       word != kWordNumbers.end() && preceded_by_message_word(tokens, i)) {
                found.push_back(
                    {word->second, MatchedSpan{word->second, t.begin, t.end}});
            }
        }

        // Expand "2-4" style ranges to the intermediate indices.
        std::string sentence_str(sentence);
        for (std::sregex_iterator it(sentence_str.begin(), sentence_str.end(), kRange), end;
             it != end; ++it) {
            long lo = std::stol((*it)[1].str());
            long hi = std::stol((*it)[2].str());
            if (lo >= hi || hi - lo > 30) continue;
            std::size_t match_begin = s.begin + static_cast<std::size_t>(it->position(0));
            std::size_t match_end = match_begin + static_cast<std::size_t>(it->length(0));
            for (long v = lo + 1; v < hi; ++v) {
                found.push_back({v, MatchedSpan{static_cast<int>(v), match_begin, match_end}});
            }
        }

        for (const auto& [value, span] : found) {
            Mention& m = mentions[value];
            if (negated) {
                m.last_negated = static_cast<long>(s.begin);
            } else {
                m.last_positive = static_cast<long>(s.begin);
                m.spans.push_back(span);
            }
        }
    }

    std::map<int, std::string> dropped;
    for (const auto& [value, mention] : mentions) {
        if (mention.last_positive < 0 || mention.last_negated >= mention.last_positive) continue;
        if (value >= n_messages) {
            dropped.emplace(static_cast<int>(value),
                            "out of range (conversation has " + std::to_string(n_messages) +
                                " messages)");
            continue;
        }
        result.indices.insert(static_cast<int>(value));
        for (const auto& span : mention.spans) result.matched_spans.push_back(span);
    }
    for (const auto& [index, reason] : dropped) result.dropped.push_back({index, reason});

    std::sort(result.matched_spans.begin(), result.matched_spans.end(),
              [](const MatchedSpan& a, const MatchedSpan& b) { return a.begin < b.begin; });
    return result;
}

AuditReport audit_corpus(const std::vector<AuditItem>& items) {
    AuditReport report;
    report.total = items.size();
    for (const auto& item : items) {
        Extraction e = extract(item.raw_output, item.n_messages);
        if (e.indices == item.expected) {
            ++report.exact_matches;
        } else {
            report.mismatches.push_back({item.id, item.expected, e.indices, e.matched_spans});
        }
    }
    return report;
}

std::vector<AuditItem> load_audit_items(const std::filesystem::path& path) {
    auto rows = util::csv_decode(util::read_file(path));
    std::vector<AuditItem> items;
    for (std::size_t r = 0; r < rows.size(); ++r) {
        const auto& row = rows[r];
        if (r == 0 && !row.empty() && row[0] == "id") continue;  // header
        if (row.size() < 4)
            throw SchemaError("audit row " + std::to_string(r + 1) + " needs 4 fields");
        AuditItem item;
        item.id = row[0];
        item.n_messages = std::stoi(row[1]);
        for (const auto& tok : tokenize(row[2], 0)) {
            if (tok.is_number) item.expected.insert(static_cast<int>(tok.value));
        }
        item.raw_output = row[3];
        items.push_back(std::move(item));
    }
    return items;
}

}  // namespace presscheck
