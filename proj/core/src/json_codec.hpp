#pragma once

#include "json.hpp"
#include "kanto/project.hpp"

namespace kanto::detail {

using ordered_json = nlohmann::ordered_json;

ordered_json meta_to_json(const AnnotationMeta& meta);
AnnotationMeta meta_from_json(const ordered_json& j);

}  // namespace kanto::detail
