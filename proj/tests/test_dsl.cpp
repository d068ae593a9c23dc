#include <random>

#include "cbt/dsl.hpp"
#include "doctest.h"
#include "tree_gen.hpp"

using namespace cbt;

namespace {

dsl::SourcePos error_pos(const std::string& text) {
    try {
        dsl::parse(text);
    } catch (const dsl::ParseError& e) {
        return e.pos();
    }
    FAIL("expected a parse error for: " << text);
    return {};
}

std::string error_message(const std::string& text) {
    try {
        dsl::parse(text);
    } catch (const dsl::ParseError& e) {
        return e.message();
    }
    return {};
}

}  // namespace

TEST_SUITE("dsl") {

TEST_CASE("parallel-sync of two actions") {
    const auto t = dsl::parse("(parallel-sync (action Navigate) (action Seek))");
    CHECK(t.kind == NodeKind::ParallelSync);
    REQUIRE(t.children.size() == 2);
    CHECK(t.children[0].kind == NodeKind::Action);
    CHECK(t.children[0].leaf_ref == "Navigate");
    CHECK(t.children[1].leaf_ref == "Seek");
    CHECK(t.children[1].id == "0.1");
}

TEST_CASE("single-child mutex is accepted") {
    const auto t = dsl::parse("(parallel-mutex (child :priority 1 (action MonitorPeople)))");
    REQUIRE(t.children.size() == 1);
    CHECK(t.children[0].base_priority == 1);
}

TEST_CASE("empty operator is reported at its own position") {
    CHECK(error_message("(seq)") == "operator requires \xE2\x89\xA5" "1 child");
    CHECK(error_pos("(seq)") == dsl::SourcePos{1, 1});
    CHECK(error_pos("(fallback\n  (action A)\n  (seq))") == dsl::SourcePos{3, 3});
}

TEST_CASE("canonical text") {
    CHECK(dsl::serialize(dsl::parse("(action Navigate)")) == "(action Navigate)\n");
    const auto t = dsl::parse("(parallel :threshold 2 (action A) (action B) (action C))");
    const auto text = dsl::serialize(t);
    CHECK(text.find(":threshold 2") != std::string::npos);
    CHECK(text == "(parallel :threshold 2\n  (action A)\n  (action B)\n  (action C))\n");
}

TEST_CASE("explicit ids, comments and whitespace") {
    const auto t = dsl::parse("; a tree\n(seq :id \"root\"\n   (condition   Ready) ; trailing\n (action Go))");
    CHECK(t.id == "root");
    CHECK(t.children[0].id == "0.0");
    CHECK(t.children[1].kind == NodeKind::Action);
    CHECK(dsl::serialize(t).find(":id \"root\"") != std::string::npos);

    const auto doc = dsl::parse_document("(seq\n  (action A)\n  (action B))");
    CHECK(doc.spans.at("0.1") == dsl::SourcePos{3, 3});
}

TEST_CASE("planted grammar errors carry positions") {
    struct Planted {
        std::string text;
        dsl::SourcePos pos;
    };
    const Planted cases[] = {
        {"(seq (action A)", {1, 1}},                      // missing ')'
        {"(seq (action A)))", {1, 17}},                   // stray ')'
        {"(sequence (action A))", {1, 2}},                // unknown form
        {"(action)", {1, 1}},                             // leaf arity
        {"(action A B)", {1, 1}},                         // leaf arity
        {"(action 9lives)", {1, 9}},                      // bad name
        {"(seq :id \"x\" (action A :id \"x\"))", {1, 14}},  // duplicate id
        {"(parallel :threshold two (action A))", {1, 22}},
        {"(seq :threshold 1 (action A))", {1, 6}},        // option not allowed
        {"(parallel-mutex (action A))", {1, 17}},         // missing (child ...)
        {"(seq :id x (action A))", {1, 10}},              // id must be a string
        {"", {1, 1}},
        {"(seq (action A)) (action B)", {1, 18}},
        {"(action \"A)", {1, 9}},
    };
    for (const auto& c : cases) {
        CAPTURE(c.text);
        CHECK(error_pos(c.text) == c.pos);
    }
}

TEST_CASE("round trip over randomized trees") {
    std::mt19937_64 rng(2024);
    for (int i = 0; i < 500; ++i) {
        NodeSpec t = testgen::random_tree(rng, 4, 12);
        const auto text = dsl::serialize(t);
        CAPTURE(text);
        const auto back = dsl::parse(text);
        CHECK(back == t);
        CHECK(dsl::serialize(back) == text);
    }
}

}  // TEST_SUITE
