#include <cmath>
#include <limits>

#include "cbt/core.hpp"
#include "doctest.h"

using namespace cbt;

TEST_SUITE("core") {

TEST_CASE("progress stays inside the unit interval") {
    CHECK(Progress(0.0).value() == 0.0);
    CHECK(Progress(1.0).value() == 1.0);
    CHECK_THROWS_AS(Progress(-0.01), std::out_of_range);
    CHECK_THROWS_AS(Progress(1.0000001), std::out_of_range);
    CHECK_THROWS_AS(Progress(std::numeric_limits<double>::quiet_NaN()), std::out_of_range);
    CHECK_FALSE(Progress::make(2.0).has_value());
    CHECK(Progress::make(0.25)->value() == 0.25);
    CHECK(Progress(0.2) < Progress(0.3));
}

TEST_CASE("status codes round-trip") {
    for (Status s : {Status::Success, Status::Failure, Status::Running}) {
        CHECK(status_from_code(status_code(s)) == s);
    }
    CHECK_THROWS_AS(status_from_code('X'), std::invalid_argument);
}

TEST_CASE("resource catalog interns case-sensitively") {
    ResourceCatalog cat;
    const auto a = cat.intern("speaker");
    CHECK(cat.intern("speaker") == a);
    CHECK(cat.intern("Speaker") != a);

    ResourceCatalog two;
    two.intern("speaker");
    two.intern("wheels");
    CHECK(two.size() == 2);
    CHECK(two.name(*two.find("wheels")) == "wheels");
    CHECK_FALSE(two.find("arm").has_value());
    CHECK_THROWS_AS(two.intern(""), std::invalid_argument);
}

TEST_CASE("resource set algebra") {
    ResourceCatalog cat;
    const auto s = cat.make_set({"speaker"});
    const auto w = cat.make_set({"wheels"});
    const auto sw = cat.make_set({"speaker", "wheels"});
    CHECK(s.disjoint(w));
    CHECK_FALSE(s.disjoint(sw));
    CHECK(s.united(w) == sw);
    CHECK(sw.intersected(s) == s);
    CHECK(ResourceSet{}.disjoint(sw));
    CHECK(cat.names(sw) == std::vector<std::string>{"speaker", "wheels"});
}

TEST_CASE("default ids are preorder paths") {
    NodeSpec t = sequence({action("A"), fallback({condition("C"), action("B")})});
    assign_default_ids(t);
    CHECK(t.id == "0");
    CHECK(t.children[0].id == "0.0");
    CHECK(t.children[1].id == "0.1");
    CHECK(t.children[1].children[1].id == "0.1.1");
    CHECK(node_count(t) == 5);
    CHECK(tree_depth(t) == 3);

    NodeSpec named = sequence({action("A", "first")});
    assign_default_ids(named);
    CHECK(named.children[0].id == "first");
}

TEST_CASE("validation reports structural problems") {
    NodeSpec single = action("Navigate");
    assign_default_ids(single);
    CHECK(validate_tree(single, [](const NodeSpec&) { return true; }).ok());

    NodeSpec empty = sequence({});
    assign_default_ids(empty);
    CHECK(validate_tree(empty).has(ValidationIssue::Kind::EmptyOperator, "0"));

    NodeSpec dup = sequence({action("A", "n1"), action("B", "n1")});
    assign_default_ids(dup);
    CHECK(validate_tree(dup).has(ValidationIssue::Kind::DuplicateId, "n1"));

    NodeSpec threshold = parallel({action("A"), action("B")}, 3);
    assign_default_ids(threshold);
    CHECK(validate_tree(threshold).has(ValidationIssue::Kind::ThresholdOutOfRange, "0"));
    NodeSpec zero = parallel({action("A")}, 0);
    assign_default_ids(zero);
    CHECK(validate_tree(zero).has(ValidationIssue::Kind::ThresholdOutOfRange, "0"));

    NodeSpec stray = sequence({with_priority(action("A"), 2)});
    assign_default_ids(stray);
    CHECK(validate_tree(stray).has(ValidationIssue::Kind::MisplacedField, "0.0"));

    NodeSpec leafy = action("A");
    leafy.children.push_back(action("B"));
    assign_default_ids(leafy);
    CHECK(validate_tree(leafy).has(ValidationIssue::Kind::LeafWithChildren, "0"));

    NodeSpec unbound = sequence({action("Known"), action("Unknown")});
    assign_default_ids(unbound);
    const auto report = validate_tree(unbound, [](const NodeSpec& n) { return n.leaf_ref == "Known"; });
    CHECK(report.has(ValidationIssue::Kind::UnregisteredLeaf, "0.1"));
    CHECK_FALSE(report.has(ValidationIssue::Kind::UnregisteredLeaf, "0.0"));
    CHECK(report.to_string().find("Unknown") != std::string::npos);

    NodeSpec anonymous = action("A");
    CHECK(validate_tree(anonymous).has(ValidationIssue::Kind::EmptyId));
}

}  // TEST_SUITE
