#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "docflow/api_registry.hpp"
#include "docflow/errors.hpp"
#include "docflow/io.hpp"
#include "docflow/json_canon.hpp"
#include "docflow/text.hpp"

namespace docflow {

// Rule-based intent scorer over a weighted keyword lexicon. The lexicon
// lives in a JSON data file (category name -> [{pattern, weight}...]) so the
// scoring behavior is data, not code; the class itself is a deterministic
// substitute for a learned classifier and can be swapped out behind the same
// call shape.

struct IntentRanking {
    // all 8 categories, scores non-increasing, summing to 1
    std::vector<std::pair<IntentCategory, double>> ranked;

    double score_of(IntentCategory c) const {
        for (const auto& [cat, s] : ranked)
            if (cat == c) return s;
        return 0.0;
    }
    IntentCategory top() const { return ranked.front().first; }
};

inline json to_json(const IntentRanking& r) {
    json arr = json::array();
    for (const auto& [cat, score] : r.ranked)
        arr.push_back(json{{"category", to_string(cat)}, {"score", score}});
    return arr;
}

struct WeightedPattern {
    std::string pattern;
    double weight = 1.0;
};

class IntentClassifier {
public:
    static IntentClassifier from_json(const json& lexicon) {
        if (!lexicon.is_object()) throw Error("lexicon: top level must be an object");
        IntentClassifier c;
        for (auto it = lexicon.begin(); it != lexicon.end(); ++it) {
            auto cat = intent_category_from_string(it.key());
            if (!cat) throw Error("lexicon: unknown category " + it.key());
            if (!it.value().is_array())
                throw Error("lexicon: category " + it.key() + " must map to an array");
            for (const json& e : it.value()) {
                if (!e.is_object() || !e.contains("pattern") || !e.contains("weight") ||
                    !e.at("pattern").is_string() || !e.at("weight").is_number())
                    throw Error("lexicon: entries need string pattern and numeric weight");
                WeightedPattern wp{e.at("pattern").get<std::string>(),
                                   e.at("weight").get<double>()};
                if (wp.pattern.empty()) throw Error("lexicon: empty pattern");
                if (wp.weight <= 0.0) throw Error("lexicon: weight must be positive");
                c.lexicon_[*cat].push_back(std::move(wp));
            }
        }
        return c;
    }

    static IntentClassifier from_file(const std::string& path) {
        json j;
        try {
            j = json::parse(read_text_file(path));
        } catch (const json::exception& e) {
            throw Error("lexicon: invalid JSON in " + path + ": " + e.what());
        }
        return from_json(j);
    }

    IntentRanking classify(const std::string& sub_instruction) const {
        if (sub_instruction.empty()) throw Error("classify requires non-empty text");
        IntentRanking out;
        std::vector<double> raw;
        const auto cats = all_intent_categories();
        for (IntentCategory cat : cats) {
            double score = 0.0;
            auto it = lexicon_.find(cat);
            if (it != lexicon_.end())
                for (const WeightedPattern& wp : it->second)
                    if (contains_ci(sub_instruction, wp.pattern)) score += wp.weight;
            raw.push_back(score);
        }
        // softmax, guarded against overflow
        const double m = *std::max_element(raw.begin(), raw.end());
        double sum = 0.0;
        for (double& s : raw) {
            s = std::exp(s - m);
            sum += s;
        }
        for (std::size_t i = 0; i < cats.size(); ++i)
            out.ranked.push_back({cats[i], raw[i] / sum});
        // non-increasing scores; stable sort keeps enum order on ties
        std::stable_sort(out.ranked.begin(), out.ranked.end(),
                         [](const auto& a, const auto& b) { return a.second > b.second; });
        return out;
    }

    static std::vector<IntentCategory> top_k(const IntentRanking& ranking, int k = 3) {
        if (k < 1 || k > static_cast<int>(ranking.ranked.size()))
            throw Error("top_k: k must be between 1 and " +
                        std::to_string(ranking.ranked.size()));
        std::vector<IntentCategory> out;
        for (int i = 0; i < k; ++i)
            out.push_back(ranking.ranked[static_cast<std::size_t>(i)].first);
        return out;
    }

    std::size_t pattern_count() const {
        std::size_t n = 0;
        for (const auto& [cat, v] : lexicon_) n += v.size();
        return n;
    }

private:
    IntentClassifier() = default;
    std::map<IntentCategory, std::vector<WeightedPattern>> lexicon_;
};

} // namespace docflow
