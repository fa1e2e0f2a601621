#include "riskforge/schema.hpp"

#include <regex>
#include <set>

namespace riskforge {

std::string_view to_string(SchemaMode mode) noexcept {
    return mode == SchemaMode::CrossSector ? "cross_sector" : "case_study";
}

namespace {

std::string escape_pointer(const std::string& token) {
    std::string out;
    for (char c : token) {
        if (c == '~') out += "~0";
        else if (c == '/') out += "~1";
        else out.push_back(c);
    }
    return out;
}

bool has_type(const json& doc, const std::string& type) {
    if (type == "object") return doc.is_object();
    if (type == "array") return doc.is_array();
    if (type == "string") return doc.is_string();
    if (type == "boolean") return doc.is_boolean();
    if (type == "null") return doc.is_null();
    if (type == "number") return doc.is_number();
    if (type == "integer") {
        if (doc.is_number_integer()) return true;
        if (doc.is_number_float()) {
            const double v = doc.get<double>();
            return v == static_cast<double>(static_cast<long long>(v));
        }
        return false;
    }
    return false;
}

class Validator {
public:
    explicit Validator(SchemaMode mode) : mode_(mode) {}

    void run(const json& schema, const json& doc, const std::string& path) {
        if (schema.is_boolean()) {
            if (!schema.get<bool>()) fail(path, "no value allowed here");
            return;
        }
        if (!schema.is_object()) return;

        if (auto it = schema.find("type"); it != schema.end()) {
            bool ok = false;
            if (it->is_string()) {
                ok = has_type(doc, it->get<std::string>());
            } else if (it->is_array()) {
                for (const auto& t : *it) ok = ok || has_type(doc, t.get<std::string>());
            }
            if (!ok) {
                fail(path, "expected type " + it->dump() + ", got " + std::string(doc.type_name()));
                return;
            }
        }
        if (auto it = schema.find("enum"); it != schema.end()) {
            bool found = false;
            for (const auto& candidate : *it) found = found || candidate == doc;
            if (!found) fail(path, "value " + doc.dump() + " not in " + it->dump());
        }
        if (auto it = schema.find("const"); it != schema.end() && *it != doc) {
            fail(path, "expected " + it->dump());
        }
        if (auto it = schema.find("anyOf"); it != schema.end()) {
            bool any = false;
            for (const auto& sub : *it) {
                Validator probe(mode_);
                probe.run(sub, doc, path);
                if (probe.violations_.empty()) {
                    any = true;
                    break;
                }
            }
            if (!any) fail(path, "does not match any allowed alternative");
        }

        if (doc.is_string()) check_string(schema, doc.get<std::string>(), path);
        if (doc.is_number()) check_number(schema, doc.get<double>(), path);
        if (doc.is_array()) check_array(schema, doc, path);
        if (doc.is_object()) check_object(schema, doc, path);
    }

    std::vector<Violation> take() { return std::move(violations_); }

private:
    void fail(const std::string& path, std::string message) {
        violations_.push_back({path, std::move(message)});
    }

    void check_string(const json& schema, const std::string& value, const std::string& path) {
        const std::size_t len = utf8_length(value);
        if (auto it = schema.find("minLength"); it != schema.end() && len < it->get<std::size_t>()) {
            fail(path, "string shorter than " + it->dump());
        }
        if (auto it = schema.find("maxLength"); it != schema.end() && len > it->get<std::size_t>()) {
            fail(path, "string longer than " + it->dump());
        }
        if (auto it = schema.find("pattern"); it != schema.end()) {
            const std::regex re(it->get<std::string>(), std::regex::ECMAScript);
            if (!std::regex_search(value, re)) fail(path, "does not match pattern " + it->dump());
        }
    }

    void check_number(const json& schema, double value, const std::string& path) {
        if (auto it = schema.find("minimum"); it != schema.end() && value < it->get<double>()) {
            fail(path, "below minimum " + it->dump());
        }
        if (auto it = schema.find("maximum"); it != schema.end() && value > it->get<double>()) {
            fail(path, "above maximum " + it->dump());
        }
    }

    void check_array(const json& schema, const json& doc, const std::string& path) {
        const std::size_t n = doc.size();
        auto exact = schema.find("x-cross-sector-items");
        if (mode_ == SchemaMode::CrossSector && exact != schema.end()) {
            if (n != exact->get<std::size_t>()) {
                fail(path, "expected exactly " + exact->dump() + " items, got " + std::to_string(n));
            }
        } else {
            if (auto it = schema.find("minItems"); it != schema.end() && n < it->get<std::size_t>()) {
                fail(path, "expected at least " + it->dump() + " items, got " + std::to_string(n));
            }
            if (auto it = schema.find("maxItems"); it != schema.end() && n > it->get<std::size_t>()) {
                fail(path, "expected at most " + it->dump() + " items, got " + std::to_string(n));
            }
        }
        if (auto it = schema.find("uniqueItems"); it != schema.end() && it->get<bool>()) {
            std::set<std::string> seen;
            for (const auto& item : doc) {
                if (!seen.insert(canonical(item)).second) {
                    fail(path, "items are not unique");
                    break;
                }
            }
        }
        if (auto it = schema.find("items"); it != schema.end()) {
            for (std::size_t i = 0; i < n; ++i) run(*it, doc[i], path + "/" + std::to_string(i));
        }
    }

    void check_object(const json& schema, const json& doc, const std::string& path) {
        if (auto it = schema.find("required"); it != schema.end()) {
            for (const auto& name : *it) {
                const std::string key = name.get<std::string>();
                if (!doc.contains(key)) fail(path + "/" + escape_pointer(key), "required property missing");
            }
        }
        const json* props = nullptr;
        if (auto it = schema.find("properties"); it != schema.end()) props = &*it;
        auto additional = schema.find("additionalProperties");

        for (auto& [key, value] : doc.items()) {
            const std::string child = path + "/" + escape_pointer(key);
            if (props && props->contains(key)) {
                run((*props)[key], value, child);
            } else if (additional != schema.end()) {
                if (additional->is_boolean() && !additional->get<bool>()) {
                    fail(child, "property not allowed");
                } else {
                    run(*additional, value, child);
                }
            }
        }
    }

    SchemaMode mode_;
    std::vector<Violation> violations_;
};

}  // namespace

std::vector<Violation> validate_schema(const json& schema, const json& doc, SchemaMode mode) {
    Validator v(mode);
    v.run(schema, doc, "");
    return v.take();
}

}  // namespace riskforge
