#include "cbt/trace.hpp"

#include <sstream>

#include "json.hpp"

#include "cbt/dsl.hpp"

namespace cbt {

using nlohmann::json;

std::string_view to_string(EventKind e) {
    switch (e) {
    case EventKind::Ticked: return "ticked";
    case EventKind::Paused: return "paused";
    case EventKind::Halted: return "halted";
    }
    return "?";
}

std::string_view to_string(RunResult r) {
    switch (r) {
    case RunResult::Success: return "success";
    case RunResult::Failure: return "failure";
    case RunResult::Timeout: return "timeout";
    }
    return "?";
}

std::vector<const TraceEvent*> Trace::at(int tick) const {
    std::vector<const TraceEvent*> out;
    for (const auto& e : events) {
        if (e.tick == tick) out.push_back(&e);
    }
    return out;
}

std::string event_to_json(const TraceEvent& e) {
    json j = json::object();
    j["tick"] = e.tick;
    j["node"] = e.node;
    j["event"] = to_string(e.event);
    j["status"] = e.status ? json(std::string(1, status_code(*e.status))) : json(nullptr);
    j["progress"] = e.progress;
    j["resources"] = e.resources;
    return j.dump();
}

std::string to_jsonl(const Trace& trace) {
    std::ostringstream os;
    os << json{{"tree", dsl::serialize(trace.tree)}}.dump() << '\n';
    for (const auto& e : trace.events) os << event_to_json(e) << '\n';
    if (trace.result) {
        os << json{{"result", to_string(*trace.result)}, {"ticks", trace.ticks}}.dump() << '\n';
    }
    return os.str();
}

namespace {

EventKind event_from_string(const std::string& s) {
    if (s == "ticked") return EventKind::Ticked;
    if (s == "paused") return EventKind::Paused;
    if (s == "halted") return EventKind::Halted;
    throw TraceFormatError("unknown event '" + s + "'");
}

RunResult result_from_string(const std::string& s) {
    if (s == "success") return RunResult::Success;
    if (s == "failure") return RunResult::Failure;
    if (s == "timeout") return RunResult::Timeout;
    throw TraceFormatError("unknown result '" + s + "'");
}

}  // namespace

Trace trace_from_jsonl(std::string_view text) {
    Trace trace;
    bool have_tree = false;
    std::istringstream in{std::string(text)};
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const std::string where = "trace line " + std::to_string(lineno) + ": ";
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& ex) {
            throw TraceFormatError(where + ex.what());
        }
        if (!j.is_object()) throw TraceFormatError(where + "expected a JSON object");
        if (trace.result) throw TraceFormatError(where + "content after the result line");
        try {
            if (j.contains("tree")) {
                if (have_tree || !trace.events.empty()) throw TraceFormatError(where + "tree header must come first");
                trace.tree = dsl::parse(j.at("tree").get<std::string>());
                have_tree = true;
            } else if (j.contains("result")) {
                trace.result = result_from_string(j.at("result").get<std::string>());
                trace.ticks = j.at("ticks").get<int>();
            } else {
                if (!have_tree) throw TraceFormatError(where + "missing tree header");
                TraceEvent e;
                e.tick = j.at("tick").get<int>();
                e.node = j.at("node").get<std::string>();
                e.event = event_from_string(j.at("event").get<std::string>());
                const auto& st = j.at("status");
                if (!st.is_null()) {
                    auto code = st.get<std::string>();
                    if (code.size() != 1) throw TraceFormatError(where + "bad status");
                    e.status = status_from_code(code[0]);
                }
                if ((e.event == EventKind::Ticked) != e.status.has_value()) {
                    throw TraceFormatError(where + "status must be set exactly on ticked events");
                }
                e.progress = j.at("progress").get<double>();
                if (!Progress::make(e.progress)) throw TraceFormatError(where + "progress outside [0, 1]");
                e.resources = j.at("resources").get<std::vector<std::string>>();
                if (!trace.events.empty() && e.tick < trace.events.back().tick) {
                    throw TraceFormatError(where + "ticks out of order");
                }
                trace.events.push_back(std::move(e));
            }
        } catch (const json::exception& ex) {
            throw TraceFormatError(where + ex.what());
        } catch (const dsl::ParseError& ex) {
            throw TraceFormatError(where + "tree header: " + ex.what());
        } catch (const std::invalid_argument& ex) {
            throw TraceFormatError(where + ex.what());
        }
    }
    if (!have_tree) throw TraceFormatError("trace has no tree header");
    if (!trace.result && !trace.events.empty()) trace.ticks = trace.events.back().tick + 1;
    return trace;
}

TreeIndex::TreeIndex(const NodeSpec& root) {
    auto visit = [this](auto&& self, const NodeSpec& n, const NodeSpec* parent) -> void {
        nodes.push_back({&n, parent});
        for (const auto& c : n.children) self(self, c, &n);
    };
    visit(visit, root, nullptr);
}

const TreeIndex::Entry* TreeIndex::find(std::string_view id) const {
    for (const auto& e : nodes) {
        if (e.node->id == id) return &e;
    }
    return nullptr;
}

}  // namespace cbt
