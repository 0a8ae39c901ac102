#include <doctest.h>

#include <cmath>
#include <set>
#include <string>

#include "docflow/intent_classifier.hpp"
#include "helpers.hpp"

using namespace docflow;

namespace {

const IntentClassifier& clf() {
    static IntentClassifier c =
        IntentClassifier::from_file(std::string(DOCFLOW_DATA_DIR) + "/intent_lexicon.json");
    return c;
}

void check_ranking_invariants(const IntentRanking& r) {
    REQUIRE(r.ranked.size() == 8);
    std::set<IntentCategory> seen;
    double sum = 0.0;
    for (std::size_t i = 0; i < r.ranked.size(); ++i) {
        seen.insert(r.ranked[i].first);
        sum += r.ranked[i].second;
        REQUIRE(r.ranked[i].second >= 0.0);
        REQUIRE(r.ranked[i].second <= 1.0);
        if (i > 0) REQUIRE(r.ranked[i - 1].second >= r.ranked[i].second);
    }
    REQUIRE(seen.size() == 8);
    REQUIRE(std::abs(sum - 1.0) < 1e-6);
}

} // namespace

TEST_CASE("rankings cover all categories, non-increasing, normalized") {
    for (const char* text :
         {"Add a table with 2 rows", "make it pop", "保存文档", "x", "Delete the image and save"}) {
        IntentRanking r = clf().classify(text);
        check_ranking_invariants(r);
    }
}

TEST_CASE("frozen classification examples") {
    CHECK(clf().classify("add headers Dept, Staff, Age to the table").top() ==
          IntentCategory::TableOperation);
    CHECK(clf().classify("make the second paragraph bold").top() ==
          IntentCategory::FormatStyleEditing);
}

TEST_CASE("empty text is rejected; unknown text falls back to near-uniform") {
    CHECK_THROWS_AS(clf().classify(""), Error);

    IntentRanking r = clf().classify("do something");
    check_ranking_invariants(r);
    for (const auto& [cat, score] : r.ranked) CHECK(score == doctest::Approx(0.125));
    // ties broken by category declaration order
    auto top3 = IntentClassifier::top_k(r, 3);
    REQUIRE(top3.size() == 3);
    CHECK(top3[0] == IntentCategory::ContentCreation);
    CHECK(top3[1] == IntentCategory::ContentModification);
    CHECK(top3[2] == IntentCategory::TableOperation);
}

TEST_CASE("top_k bounds and sizes") {
    IntentRanking r = clf().classify("merge the cells in the table");
    CHECK(IntentClassifier::top_k(r, 3).size() == 3);
    auto all = IntentClassifier::top_k(r, 8);
    CHECK(all.size() == 8);
    CHECK(std::set<IntentCategory>(all.begin(), all.end()).size() == 8);
    CHECK_THROWS_AS(IntentClassifier::top_k(r, 0), Error);
    CHECK_THROWS_AS(IntentClassifier::top_k(r, 9), Error);
}

TEST_CASE("classification is deterministic") {
    const std::string text = "Add a pie chart and make the title bold";
    IntentRanking a = clf().classify(text);
    IntentRanking b = clf().classify(text);
    REQUIRE(a.ranked.size() == b.ranked.size());
    for (std::size_t i = 0; i < a.ranked.size(); ++i) {
        CHECK(a.ranked[i].first == b.ranked[i].first);
        CHECK(a.ranked[i].second == b.ranked[i].second); // bitwise
    }
}

TEST_CASE("hand-labeled fixture agreement is at least 90 percent") {
    json fixture = json::parse(
        read_text_file(std::string(DOCFLOW_FIXTURE_DIR) + "/intent_fixture.json"));
    REQUIRE(fixture.at("cases").size() == 50);
    int agree = 0;
    std::set<std::string> labels_seen;
    for (const json& c : fixture.at("cases")) {
        const std::string text = c.at("text").get<std::string>();
        const std::string label = c.at("label").get<std::string>();
        labels_seen.insert(label);
        IntentRanking r = clf().classify(text);
        check_ranking_invariants(r);
        if (to_string(r.top()) == label) {
            ++agree;
        } else {
            MESSAGE("disagreement: \"" << text << "\" labeled " << label << " but classified "
                                       << to_string(r.top()));
        }
    }
    CHECK(labels_seen.size() == 8); // every category represented
    CHECK(agree >= 45);
}

TEST_CASE("top-3 intents always yield a non-empty API candidate set") {
    static Registry r = default_registry();
    Rng rng(derive_seed(7700, {"intent", "coverage"}));
    json fixture = json::parse(
        read_text_file(std::string(DOCFLOW_FIXTURE_DIR) + "/intent_fixture.json"));
    std::vector<std::string> texts;
    for (const json& c : fixture.at("cases")) texts.push_back(c.at("text").get<std::string>());
    for (int i = 0; i < 60; ++i) texts.push_back(docflow::testing::random_text(rng));
    texts.push_back("zzzz qqqq");
    for (const std::string& t : texts) {
        auto top3 = IntentClassifier::top_k(clf().classify(t), 3);
        auto apis = r.apis_for_intents(top3, 3);
        CHECK_FALSE(apis.empty());
    }
}

TEST_CASE("lexicon validation rejects malformed inputs") {
    CHECK_THROWS_AS(IntentClassifier::from_json(json::array()), Error);
    CHECK_THROWS_AS(IntentClassifier::from_json(json{{"bogus_category", json::array()}}), Error);
    CHECK_THROWS_AS(
        IntentClassifier::from_json(json{{"table_operation", json::array({json{{"pattern", ""}, {"weight", 1.0}}})}}),
        Error);
    CHECK_THROWS_AS(
        IntentClassifier::from_json(json{{"table_operation", json::array({json{{"pattern", "x"}, {"weight", -1.0}}})}}),
        Error);
    CHECK_THROWS_AS(IntentClassifier::from_file("/nonexistent/lexicon.json"), Error);

    // a minimal valid lexicon classifies with the remaining categories silent
    IntentClassifier tiny = IntentClassifier::from_json(
        json{{"chart_operation", json::array({json{{"pattern", "chart"}, {"weight", 2.0}}})}});
    CHECK(tiny.classify("add a chart").top() == IntentCategory::ChartOperation);
    check_ranking_invariants(tiny.classify("add a chart"));
}
