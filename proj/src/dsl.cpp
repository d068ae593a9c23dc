#include "cbt/dsl.hpp"

#include <cctype>
#include <charconv>
#include <sstream>
#include <unordered_map>

namespace cbt::dsl {

ParseError::ParseError(std::string message, SourcePos pos)
    : std::runtime_error(std::to_string(pos.line) + ":" + std::to_string(pos.column) + ": " + message),
      message_(std::move(message)),
      pos_(pos) {}

bool is_valid_name(std::string_view name) {
    if (name.empty()) return false;
    auto head = static_cast<unsigned char>(name.front());
    if (!(std::isalpha(head) || head == '_')) return false;
    for (char ch : name.substr(1)) {
        auto c = static_cast<unsigned char>(ch);
        if (!(std::isalnum(c) || c == '_' || c == '-')) return false;
    }
    return true;
}

namespace {

struct Expr {
    enum class Kind { List, Symbol, String } kind = Kind::Symbol;
    std::string text;
    std::vector<Expr> items;
    SourcePos pos;
};

class Reader {
public:
    explicit Reader(std::string_view src) : src_(src) {}

    Expr read_document() {
        skip_blank();
        if (at_end()) throw ParseError("empty document", here());
        Expr e = read_expr();
        skip_blank();
        if (!at_end()) throw ParseError("unexpected text after the tree", here());
        return e;
    }

private:
    std::string_view src_;
    std::size_t i_ = 0;
    SourcePos pos_;

    bool at_end() const { return i_ >= src_.size(); }
    char peek() const { return src_[i_]; }
    SourcePos here() const { return pos_; }

    void advance() {
        if (src_[i_] == '\n') {
            ++pos_.line;
            pos_.column = 1;
        } else {
            ++pos_.column;
        }
        ++i_;
    }

    void skip_blank() {
        while (!at_end()) {
            char c = peek();
            if (c == ';') {
                while (!at_end() && peek() != '\n') advance();
            } else if (std::isspace(static_cast<unsigned char>(c))) {
                advance();
            } else {
                break;
            }
        }
    }

    static bool is_delim(char c) {
        return c == '(' || c == ')' || c == '"' || c == ';' || std::isspace(static_cast<unsigned char>(c));
    }

    Expr read_expr() {
        Expr e;
        e.pos = here();
        char c = peek();
        if (c == ')') throw ParseError("unbalanced ')'", e.pos);
        if (c == '(') {
            e.kind = Expr::Kind::List;
            advance();
            for (;;) {
                skip_blank();
                if (at_end()) throw ParseError("unbalanced '(': missing ')'", e.pos);
                if (peek() == ')') {
                    advance();
                    return e;
                }
                e.items.push_back(read_expr());
            }
        }
        if (c == '"') {
            e.kind = Expr::Kind::String;
            advance();
            for (;;) {
                if (at_end()) throw ParseError("unterminated string", e.pos);
                char ch = peek();
                if (ch == '"') {
                    advance();
                    return e;
                }
                if (ch == '\n') throw ParseError("newline in string", here());
                if (ch == '\\') {
                    advance();
                    if (at_end()) throw ParseError("unterminated string", e.pos);
                    ch = peek();
                    if (ch != '"' && ch != '\\') throw ParseError("unknown escape in string", here());
                }
                e.text += ch;
                advance();
            }
        }
        e.kind = Expr::Kind::Symbol;
        while (!at_end() && !is_delim(peek())) {
            e.text += peek();
            advance();
        }
        return e;
    }
};

const std::unordered_map<std::string_view, NodeKind> kForms = {
    {"seq", NodeKind::Sequence},
    {"fallback", NodeKind::Fallback},
    {"parallel", NodeKind::Parallel},
    {"parallel-sync", NodeKind::ParallelSync},
    {"parallel-mutex", NodeKind::ParallelMutex},
    {"action", NodeKind::Action},
    {"condition", NodeKind::Condition},
};

std::string_view form_name(NodeKind k) {
    for (const auto& [name, kind] : kForms) {
        if (kind == k) return name;
    }
    return "?";
}

bool is_keyword(const Expr& e) { return e.kind == Expr::Kind::Symbol && e.text.size() > 1 && e.text[0] == ':'; }

int parse_int(const Expr& e) {
    int v = 0;
    const char* first = e.text.data();
    const char* last = first + e.text.size();
    if (e.kind != Expr::Kind::Symbol || e.text.empty()) throw ParseError("expected an integer", e.pos);
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last) throw ParseError("expected an integer, got '" + e.text + "'", e.pos);
    return v;
}

struct Options {
    std::optional<std::string> id;
    std::optional<int> threshold;
    std::optional<int> priority;
    std::vector<const Expr*> positional;
};

Options split_options(const Expr& list, std::string_view form, bool allow_threshold, bool allow_priority,
                      bool allow_id) {
    Options out;
    for (std::size_t i = 1; i < list.items.size(); ++i) {
        const Expr& item = list.items[i];
        if (!is_keyword(item)) {
            out.positional.push_back(&item);
            continue;
        }
        if (i + 1 >= list.items.size()) throw ParseError("option " + item.text + " needs a value", item.pos);
        const Expr& value = list.items[++i];
        if (item.text == ":id" && allow_id) {
            if (out.id) throw ParseError("option :id given twice", item.pos);
            if (value.kind != Expr::Kind::String) throw ParseError(":id expects a string", value.pos);
            if (value.text.empty()) throw ParseError(":id must not be empty", value.pos);
            out.id = value.text;
        } else if (item.text == ":threshold" && allow_threshold) {
            if (out.threshold) throw ParseError("option :threshold given twice", item.pos);
            out.threshold = parse_int(value);
        } else if (item.text == ":priority" && allow_priority) {
            if (out.priority) throw ParseError("option :priority given twice", item.pos);
            out.priority = parse_int(value);
        } else {
            throw ParseError("option " + item.text + " not allowed in (" + std::string(form) + ")", item.pos);
        }
    }
    return out;
}

struct Builder {
    NodeSpec build(const Expr& e) {
        if (e.kind != Expr::Kind::List) throw ParseError("expected a node form '(...)'", e.pos);
        if (e.items.empty()) throw ParseError("empty form '()'", e.pos);
        const Expr& head = e.items.front();
        if (head.kind != Expr::Kind::Symbol) throw ParseError("form must start with a name", head.pos);
        auto it = kForms.find(head.text);
        if (it == kForms.end()) throw ParseError("unknown form '" + head.text + "'", head.pos);

        NodeSpec node;
        node.kind = it->second;
        const bool threshold_ok = node.kind == NodeKind::Parallel || node.kind == NodeKind::ParallelSync;
        Options opts = split_options(e, head.text, threshold_ok, false, true);
        node.success_threshold = opts.threshold;

        if (is_leaf(node.kind)) {
            if (opts.positional.size() != 1) {
                throw ParseError("(" + head.text + ") takes exactly one NAME", e.pos);
            }
            const Expr& name = *opts.positional.front();
            if (name.kind != Expr::Kind::Symbol || !is_valid_name(name.text)) {
                throw ParseError("invalid leaf name '" + name.text + "'", name.pos);
            }
            node.leaf_ref = name.text;
        } else {
            if (opts.positional.empty()) throw ParseError("operator requires \xE2\x89\xA5" "1 child", e.pos);
            for (const Expr* child : opts.positional) {
                if (node.kind == NodeKind::ParallelMutex) {
                    node.children.push_back(build_mutex_child(*child));
                } else {
                    node.children.push_back(build(*child));
                }
            }
        }
        if (opts.id) node.id = *opts.id;
        return node;
    }

    NodeSpec build_mutex_child(const Expr& e) {
        if (e.kind != Expr::Kind::List || e.items.empty() || e.items.front().kind != Expr::Kind::Symbol ||
            e.items.front().text != "child") {
            throw ParseError("parallel-mutex children must be (child [:priority INT] subtree)", e.pos);
        }
        Options opts = split_options(e, "child", false, true, false);
        if (opts.positional.size() != 1) throw ParseError("(child) takes exactly one subtree", e.pos);
        NodeSpec sub = build(*opts.positional.front());
        sub.base_priority = opts.priority;
        return sub;
    }
};

// Walks the expression tree in the same order as the builder to pair each
// node with its source position after default ids have been assigned.
void collect_spans(const Expr& e, const NodeSpec& node, std::vector<std::pair<const NodeSpec*, SourcePos>>& out) {
    out.emplace_back(&node, e.pos);
    if (is_leaf(node.kind)) return;
    std::size_t child = 0;
    for (std::size_t i = 1; i < e.items.size(); ++i) {
        const Expr& item = e.items[i];
        if (is_keyword(item)) {
            ++i;
            continue;
        }
        const Expr* sub = &item;
        if (node.kind == NodeKind::ParallelMutex) {
            for (std::size_t j = 1; j < item.items.size(); ++j) {
                if (is_keyword(item.items[j])) {
                    ++j;
                    continue;
                }
                sub = &item.items[j];
            }
        }
        collect_spans(*sub, node.children[child++], out);
    }
}

std::string quote(std::string_view s) {
    std::string out = "\"";
    for (char c : s) {
        if (c == '"' || c == '\\') out += '\\';
        out += c;
    }
    out += '"';
    return out;
}

void write_node(std::ostringstream& os, const NodeSpec& n, const std::string& path, int indent) {
    const std::string pad(static_cast<std::size_t>(indent), ' ');
    os << pad << '(' << form_name(n.kind);
    if (n.id != path) os << " :id " << quote(n.id);
    if (n.success_threshold) os << " :threshold " << *n.success_threshold;
    if (is_leaf(n.kind)) {
        os << ' ' << n.leaf_ref << ')';
        return;
    }
    for (std::size_t i = 0; i < n.children.size(); ++i) {
        const auto& c = n.children[i];
        const auto cpath = child_path(path, i);
        os << '\n';
        if (n.kind == NodeKind::ParallelMutex) {
            os << pad << "  (child";
            if (c.base_priority) os << " :priority " << *c.base_priority;
            os << '\n';
            write_node(os, c, cpath, indent + 4);
            os << ')';
        } else {
            write_node(os, c, cpath, indent + 2);
        }
    }
    os << ')';
}

}  // namespace

TreeDocument parse_document(std::string text) {
    TreeDocument doc;
    doc.source = std::move(text);
    Reader reader(doc.source);
    Expr top = reader.read_document();
    doc.root = Builder{}.build(top);
    assign_default_ids(doc.root);

    std::vector<std::pair<const NodeSpec*, SourcePos>> spans;
    collect_spans(top, doc.root, spans);
    for (const auto& [node, pos] : spans) {
        if (!doc.spans.emplace(node->id, pos).second) {
            throw ParseError("duplicate :id '" + node->id + "'", pos);
        }
    }
    return doc;
}

NodeSpec parse(std::string_view text) { return parse_document(std::string(text)).root; }

std::string serialize(const NodeSpec& root) {
    std::ostringstream os;
    write_node(os, root, "0", 0);
    os << '\n';
    return os.str();
}

}  // namespace cbt::dsl
