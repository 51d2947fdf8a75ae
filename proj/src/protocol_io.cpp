#include "fluctwork/protocol_io.hpp"

#include <fstream>
#include <iterator>
#include <map>
#include <optional>
#include <sstream>
#include <vector>

#include <json.hpp>

#include "fluctwork/errors.hpp"

namespace fluctwork {

using nlohmann::json;

namespace {

// Input iterator that counts newlines as the JSON lexer consumes them.
class LineCountingIterator {
public:
    using iterator_category = std::input_iterator_tag;
    using value_type = char;
    using difference_type = std::ptrdiff_t;
    using pointer = const char*;
    using reference = const char&;

    LineCountingIterator() = default;
    LineCountingIterator(const char* p, std::size_t* line) : p_(p), line_(line) {}

    reference operator*() const { return *p_; }
    LineCountingIterator& operator++() {
        if (*p_ == '\n') ++*line_;
        ++p_;
        return *this;
    }
    LineCountingIterator operator++(int) {
        auto copy = *this;
        ++*this;
        return copy;
    }
    friend bool operator==(const LineCountingIterator& a, const LineCountingIterator& b) {
        return a.p_ == b.p_;
    }

private:
    const char* p_ = nullptr;
    std::size_t* line_ = nullptr;
};

[[noreturn]] void fail_at(std::size_t line, const std::string& what) {
    throw ValidationError("line " + std::to_string(line) + ": " + what);
}

std::vector<double> read_levels(const json& j, std::size_t line, const char* what) {
    if (!j.is_array() || j.empty()) fail_at(line, std::string(what) + " must be a non-empty array");
    std::vector<double> out;
    for (const json& x : j) {
        if (!x.is_number()) fail_at(line, std::string(what) + " must contain only numbers");
        out.push_back(x.get<double>());
    }
    return out;
}

Spectrum make_spectrum(std::vector<double> levels, std::size_t line) {
    try {
        return Spectrum(std::move(levels));
    } catch (const ValidationError& e) {
        fail_at(line, e.what());
    }
}

}  // namespace

Protocol parse_protocol(std::string_view text) {
    std::size_t line = 1;
    std::map<std::string, std::size_t> key_lines;
    std::vector<std::size_t> step_lines;
    std::string top_key;

    auto callback = [&](int depth, json::parse_event_t event, json& parsed) {
        if (depth == 1 && event == json::parse_event_t::key) {
            top_key = parsed.get<std::string>();
            key_lines[top_key] = line;
        } else if (depth == 2 && top_key == "steps" &&
                   (event == json::parse_event_t::object_start || event == json::parse_event_t::value)) {
            step_lines.push_back(line);
        }
        return true;
    };

    json doc;
    try {
        doc = json::parse(LineCountingIterator(text.data(), &line),
                          LineCountingIterator(text.data() + text.size(), &line), callback);
    } catch (const json::parse_error& e) {
        throw ValidationError(std::string("protocol file: ") + e.what());
    }

    if (!doc.is_object()) throw ValidationError("line 1: protocol must be a JSON object");
    for (const auto& [key, value] : doc.items())
        if (key != "beta" && key != "initial_levels" && key != "steps")
            fail_at(key_lines[key], "unknown key \"" + key + "\"");
    for (const char* key : {"beta", "initial_levels", "steps"})
        if (!doc.contains(key)) throw ValidationError(std::string("protocol is missing \"") + key + "\"");

    if (!doc["beta"].is_number()) fail_at(key_lines["beta"], "beta must be a number");
    std::optional<InverseTemperature> beta;
    try {
        beta.emplace(doc["beta"].get<double>());
    } catch (const ValidationError& e) {
        fail_at(key_lines["beta"], e.what());
    }

    const std::size_t init_line = key_lines["initial_levels"];
    Spectrum initial = make_spectrum(read_levels(doc["initial_levels"], init_line, "initial_levels"),
                                     init_line);

    const json& raw_steps = doc["steps"];
    if (!raw_steps.is_array()) fail_at(key_lines["steps"], "steps must be an array");

    std::vector<ProtocolStep> steps;
    for (std::size_t i = 0; i < raw_steps.size(); ++i) {
        const json& s = raw_steps[i];
        const std::size_t at = i < step_lines.size() ? step_lines[i] : key_lines["steps"];
        if (s.is_string()) {
            if (s.get<std::string>() != "thermalize")
                fail_at(at, "unknown step \"" + s.get<std::string>() + "\"");
            steps.emplace_back(Thermalize{});
            continue;
        }
        if (!s.is_object() || s.size() != 1)
            fail_at(at, "a step is \"thermalize\", {\"quench\": [...]} or {\"quasistatic\": [...]}");
        const auto& [kind, levels] = *s.items().begin();
        if (kind != "quench" && kind != "quasistatic") fail_at(at, "unknown step kind \"" + kind + "\"");
        Spectrum target = make_spectrum(read_levels(levels, at, kind.c_str()), at);
        if (target.dimension() != initial.dimension())
            fail_at(at, "dimension mismatch: " + kind + " to " + std::to_string(target.dimension()) +
                            " levels, initial spectrum has " + std::to_string(initial.dimension()));
        if (kind == "quench")
            steps.emplace_back(Quench{std::move(target)});
        else
            steps.emplace_back(QuasiStatic{std::move(target)});
    }

    const std::size_t bad = Protocol::first_noncanonical_step(steps);
    if (bad != steps.size()) {
        const std::size_t at = bad < step_lines.size() ? step_lines[bad] : key_lines["steps"];
        if (std::holds_alternative<Thermalize>(steps[bad]))
            fail_at(at, "non-canonical order: thermalize must directly follow a quench");
        fail_at(at, "non-canonical order: the previous quench was not followed by thermalize");
    }
    return Protocol(*beta, std::move(initial), std::move(steps));
}

Protocol load_protocol(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open protocol file " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    try {
        return parse_protocol(buf.str());
    } catch (const ValidationError& e) {
        throw ValidationError(path.string() + ": " + e.what());
    }
}

namespace {

std::string levels_json(const Spectrum& s) {
    std::string out = "[";
    for (std::size_t k = 0; k < s.dimension(); ++k) {
        if (k) out += ", ";
        out += json(s[k]).dump();
    }
    return out + "]";
}

}  // namespace

std::string protocol_to_json(const Protocol& p) {
    std::string out = "{\n  \"beta\": " + json(p.beta().value()).dump() + ",\n";
    out += "  \"initial_levels\": " + levels_json(p.initial()) + ",\n";
    out += "  \"steps\": [";
    bool first = true;
    for (const ProtocolStep& step : p.steps()) {
        out += first ? "\n    " : ",\n    ";
        first = false;
        if (const auto* q = std::get_if<Quench>(&step))
            out += "{\"quench\": " + levels_json(q->target) + "}";
        else if (const auto* q = std::get_if<QuasiStatic>(&step))
            out += "{\"quasistatic\": " + levels_json(q->target) + "}";
        else
            out += "\"thermalize\"";
    }
    out += first ? "]\n}\n" : "\n  ]\n}\n";
    return out;
}

}  // namespace fluctwork
