// Copyright 2026 The v2gq Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <variant>

#include "v2gq/csp.hpp"
#include "v2gq/model.hpp"
#include "v2gq/scenario.hpp"
#include "v2gq/v2g.hpp"

namespace v2gq {

inline constexpr int kSchemaVersion = 1;

/// A loaded instance file: a V2G or CSP instance, optionally with scenarios.
struct Instance {
    std::variant<V2GInstance, CSPInstance> data;
    std::optional<ScenarioSet> scenarios;

    bool is_csp() const { return std::holds_alternative<CSPInstance>(data); }
    const V2GInstance& v2g() const;
    const CSPInstance& csp() const;  // throws InputError for a V2G instance

    bool operator==(const Instance&) const = default;
};

/// JSON text with a `schema_version` field. Throws ParseError with the line
/// for malformed text and the field path for missing or mistyped fields, and
/// InvariantError naming the field for values that break an invariant.
Instance parse_instance(std::string_view text, const std::string& source = "<instance>");
Instance load_instance(const std::filesystem::path& path);

std::string serialize_instance(const Instance& instance);
/// Throws IoError naming the path.
void save_instance(const Instance& instance, const std::filesystem::path& path);

/// Model the instance describes: the stochastic expectation when scenarios
/// are present, otherwise the CSP model or the mode-dispatched V2G model.
StructuredModel build_instance_model(const Instance& instance, const ModelOptions& opts = {});

/// Assignment file: a JSON object mapping variable names to values.
Assignment parse_assignment(std::string_view text, const std::string& source = "<assignment>");
Assignment load_assignment(const std::filesystem::path& path);
std::string serialize_assignment(const Assignment& a);

/// Whole file as a string; IoError naming the path on failure.
std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view text);

}  // namespace v2gq
