#pragma once

// S-expression tree format (.cbt files).
//
//   (seq child+)            (fallback child+)
//   (parallel [:threshold INT] child+)
//   (parallel-sync [:threshold INT] child+)
//   (parallel-mutex (child [:priority INT] subtree)+)
//   (action NAME)           (condition NAME)
//
// Any node form accepts `:id "text"`; without it the node gets its preorder
// path ("0", "0.1", ...). `;` starts a line comment.

#include <map>
#include <stdexcept>
#include <string>
#include <string_view>

#include "cbt/core.hpp"

namespace cbt::dsl {

struct SourcePos {
    int line = 1;
    int column = 1;
    friend bool operator==(const SourcePos&, const SourcePos&) = default;
};

class ParseError : public std::runtime_error {
public:
    ParseError(std::string message, SourcePos pos);

    const std::string& message() const noexcept { return message_; }
    SourcePos pos() const noexcept { return pos_; }

private:
    std::string message_;
    SourcePos pos_;
};

struct TreeDocument {
    std::string source;
    NodeSpec root;
    std::map<std::string, SourcePos> spans;  ///< node id -> opening paren
};

TreeDocument parse_document(std::string text);
NodeSpec parse(std::string_view text);

/// Canonical text: two-space indentation, one child per line, `:id` only
/// where it differs from the preorder path. Ids must already be assigned.
std::string serialize(const NodeSpec& root);

bool is_valid_name(std::string_view name);

}  // namespace cbt::dsl
