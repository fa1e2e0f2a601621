#pragma once

#include "riskforge/common.hpp"

#include <string>
#include <vector>

namespace riskforge {

// Output cardinality regime. Schemas encode the case-study bounds with
// minItems/maxItems; arrays tagged `"x-cross-sector-items": N` must hold
// exactly N items in cross-sector mode.
enum class SchemaMode { CaseStudy, CrossSector };

std::string_view to_string(SchemaMode mode) noexcept;

struct Violation {
    std::string path;  // JSON Pointer into the validated document, "" is the root
    std::string message;
};

/// Validates a document against a JSON Schema subset: type, enum, const,
/// properties, required, additionalProperties, items, minItems, maxItems,
/// uniqueItems, minLength, maxLength, pattern, minimum, maximum, anyOf.
/// Every violation is collected, not just the first.
std::vector<Violation> validate_schema(const json& schema, const json& doc,
                                       SchemaMode mode = SchemaMode::CaseStudy);

}  // namespace riskforge
