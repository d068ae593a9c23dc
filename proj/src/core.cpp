#include "cbt/core.hpp"

#include <algorithm>
#include <sstream>
#include <unordered_map>

namespace cbt {

std::string_view to_string(Status s) {
    switch (s) {
    case Status::Success: return "Success";
    case Status::Failure: return "Failure";
    case Status::Running: return "Running";
    }
    return "?";
}

char status_code(Status s) {
    switch (s) {
    case Status::Success: return 'S';
    case Status::Failure: return 'F';
    case Status::Running: return 'R';
    }
    return '?';
}

Status status_from_code(char c) {
    switch (c) {
    case 'S': return Status::Success;
    case 'F': return Status::Failure;
    case 'R': return Status::Running;
    default: throw std::invalid_argument(std::string("unknown status code '") + c + "'");
    }
}

Progress::Progress(double value) : value_(value) {
    // NaN fails both comparisons.
    if (!(value >= 0.0 && value <= 1.0)) {
        throw std::out_of_range("progress " + std::to_string(value) + " outside [0, 1]");
    }
}

std::optional<Progress> Progress::make(double value) noexcept {
    if (!(value >= 0.0 && value <= 1.0)) return std::nullopt;
    return Progress(value);
}

bool ResourceSet::disjoint(const ResourceSet& other) const {
    const auto& small = size() <= other.size() ? ids_ : other.ids_;
    const auto& large = size() <= other.size() ? other.ids_ : ids_;
    return std::none_of(small.begin(), small.end(), [&](ResourceId id) { return large.contains(id); });
}

ResourceSet ResourceSet::united(const ResourceSet& other) const {
    ResourceSet out = *this;
    out |= other;
    return out;
}

ResourceSet ResourceSet::intersected(const ResourceSet& other) const {
    ResourceSet out;
    for (auto id : ids_) {
        if (other.contains(id)) out.insert(id);
    }
    return out;
}

ResourceSet& ResourceSet::operator|=(const ResourceSet& other) {
    ids_.insert(other.ids_.begin(), other.ids_.end());
    return *this;
}

ResourceId ResourceCatalog::intern(std::string_view token) {
    if (token.empty()) throw std::invalid_argument("resource token must be nonempty");
    if (auto it = index_.find(token); it != index_.end()) return it->second;
    ResourceId id{static_cast<std::uint32_t>(names_.size())};
    names_.emplace_back(token);
    index_.emplace(std::string(token), id);
    return id;
}

std::optional<ResourceId> ResourceCatalog::find(std::string_view token) const {
    if (auto it = index_.find(token); it != index_.end()) return it->second;
    return std::nullopt;
}

const std::string& ResourceCatalog::name(ResourceId id) const {
    if (!registered(id)) throw std::out_of_range("resource id not in catalog");
    return names_[id.index];
}

ResourceSet ResourceCatalog::make_set(std::initializer_list<std::string_view> tokens) {
    ResourceSet out;
    for (auto t : tokens) out.insert(intern(t));
    return out;
}

std::vector<std::string> ResourceCatalog::names(const ResourceSet& set) const {
    std::vector<std::string> out;
    for (auto id : set) out.push_back(name(id));
    std::sort(out.begin(), out.end());
    return out;
}

std::string_view to_string(NodeKind k) {
    switch (k) {
    case NodeKind::Sequence: return "Sequence";
    case NodeKind::Fallback: return "Fallback";
    case NodeKind::Parallel: return "Parallel";
    case NodeKind::ParallelSync: return "ParallelSync";
    case NodeKind::ParallelMutex: return "ParallelMutex";
    case NodeKind::Action: return "Action";
    case NodeKind::Condition: return "Condition";
    }
    return "?";
}

bool is_leaf(NodeKind k) noexcept { return k == NodeKind::Action || k == NodeKind::Condition; }

bool is_parallel(NodeKind k) noexcept {
    return k == NodeKind::Parallel || k == NodeKind::ParallelSync || k == NodeKind::ParallelMutex;
}

namespace {

NodeSpec make_leaf(NodeKind kind, std::string name, std::string id) {
    NodeSpec n;
    n.kind = kind;
    n.leaf_ref = std::move(name);
    n.id = std::move(id);
    return n;
}

NodeSpec make_op(NodeKind kind, std::vector<NodeSpec> children, std::string id) {
    NodeSpec n;
    n.kind = kind;
    n.children = std::move(children);
    n.id = std::move(id);
    return n;
}

}  // namespace

NodeSpec action(std::string name, std::string id) { return make_leaf(NodeKind::Action, std::move(name), std::move(id)); }
NodeSpec condition(std::string name, std::string id) { return make_leaf(NodeKind::Condition, std::move(name), std::move(id)); }
NodeSpec sequence(std::vector<NodeSpec> c, std::string id) { return make_op(NodeKind::Sequence, std::move(c), std::move(id)); }
NodeSpec fallback(std::vector<NodeSpec> c, std::string id) { return make_op(NodeKind::Fallback, std::move(c), std::move(id)); }

NodeSpec parallel(std::vector<NodeSpec> c, std::optional<int> threshold, std::string id) {
    auto n = make_op(NodeKind::Parallel, std::move(c), std::move(id));
    n.success_threshold = threshold;
    return n;
}

NodeSpec parallel_sync(std::vector<NodeSpec> c, std::optional<int> threshold, std::string id) {
    auto n = make_op(NodeKind::ParallelSync, std::move(c), std::move(id));
    n.success_threshold = threshold;
    return n;
}

NodeSpec parallel_mutex(std::vector<NodeSpec> c, std::string id) {
    return make_op(NodeKind::ParallelMutex, std::move(c), std::move(id));
}

NodeSpec with_priority(NodeSpec node, int base_priority) {
    node.base_priority = base_priority;
    return node;
}

std::string child_path(std::string_view parent_path, std::size_t index) {
    std::string out(parent_path);
    out += '.';
    out += std::to_string(index);
    return out;
}

namespace {

void assign_ids(NodeSpec& node, const std::string& path) {
    if (node.id.empty()) node.id = path;
    for (std::size_t i = 0; i < node.children.size(); ++i) {
        assign_ids(node.children[i], child_path(path, i));
    }
}

}  // namespace

void assign_default_ids(NodeSpec& root) { assign_ids(root, "0"); }

std::size_t node_count(const NodeSpec& root) {
    std::size_t n = 1;
    for (const auto& c : root.children) n += node_count(c);
    return n;
}

std::size_t tree_depth(const NodeSpec& root) {
    std::size_t d = 0;
    for (const auto& c : root.children) d = std::max(d, tree_depth(c));
    return d + 1;
}

void for_each_node(const NodeSpec& root, const std::function<void(const NodeSpec&)>& fn) {
    fn(root);
    for (const auto& c : root.children) for_each_node(c, fn);
}

std::string_view to_string(ValidationIssue::Kind k) {
    using K = ValidationIssue::Kind;
    switch (k) {
    case K::DuplicateId: return "duplicate id";
    case K::EmptyOperator: return "empty operator";
    case K::LeafWithChildren: return "leaf with children";
    case K::ThresholdOutOfRange: return "threshold out of range";
    case K::UnregisteredLeaf: return "unregistered leaf";
    case K::MisplacedField: return "misplaced field";
    case K::EmptyId: return "empty id";
    }
    return "?";
}

bool ValidationReport::has(ValidationIssue::Kind kind, std::string_view node_id) const {
    return std::any_of(issues.begin(), issues.end(), [&](const ValidationIssue& i) {
        return i.kind == kind && (node_id.empty() || i.node_id == node_id);
    });
}

std::string ValidationReport::to_string() const {
    std::ostringstream os;
    for (const auto& i : issues) {
        os << cbt::to_string(i.kind) << " at '" << i.node_id << "': " << i.message << '\n';
    }
    return os.str();
}

namespace {

struct Validator {
    const std::function<bool(const NodeSpec&)>& is_registered;
    ValidationReport report;
    std::unordered_map<std::string, int> seen;

    void add(ValidationIssue::Kind k, const NodeSpec& n, std::string msg) {
        report.issues.push_back({k, n.id, std::move(msg)});
    }

    void visit(const NodeSpec& n, const NodeSpec* parent) {
        using K = ValidationIssue::Kind;
        if (n.id.empty()) {
            add(K::EmptyId, n, "node has no id");
        } else if (++seen[n.id] == 2) {
            add(K::DuplicateId, n, "id '" + n.id + "' used more than once");
        }

        if (is_leaf(n.kind)) {
            if (!n.children.empty()) add(K::LeafWithChildren, n, "leaf nodes take no children");
            if (n.leaf_ref.empty()) {
                add(K::UnregisteredLeaf, n, "leaf has no behavior binding");
            } else if (is_registered && !is_registered(n)) {
                add(K::UnregisteredLeaf, n, "no registered behavior named '" + n.leaf_ref + "'");
            }
        } else {
            if (n.children.empty()) add(K::EmptyOperator, n, "operator requires at least one child");
            if (!n.leaf_ref.empty()) add(K::MisplacedField, n, "operators take no behavior binding");
        }

        if (n.success_threshold) {
            if (n.kind != NodeKind::Parallel && n.kind != NodeKind::ParallelSync) {
                add(K::MisplacedField, n, "success threshold only applies to parallel and parallel-sync");
            } else if (*n.success_threshold < 1 ||
                       *n.success_threshold > static_cast<int>(n.children.size())) {
                add(K::ThresholdOutOfRange, n,
                    "threshold " + std::to_string(*n.success_threshold) + " not in [1, " +
                        std::to_string(n.children.size()) + "]");
            }
        }
        if (n.base_priority) {
            if (parent == nullptr || parent->kind != NodeKind::ParallelMutex) {
                add(K::MisplacedField, n, "base priority only applies to children of parallel-mutex");
            } else if (*n.base_priority < 0) {
                add(K::MisplacedField, n, "base priority must be non-negative");
            }
        }
        for (const auto& c : n.children) visit(c, &n);
    }
};

}  // namespace

ValidationReport validate_tree(const NodeSpec& root, const std::function<bool(const NodeSpec&)>& is_registered) {
    Validator v{is_registered, {}, {}};
    v.visit(root, nullptr);
    return std::move(v.report);
}

}  // namespace cbt
