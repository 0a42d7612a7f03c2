#pragma once

#include <json.hpp>

namespace finq {

/// Insertion-ordered JSON keeps wire documents, traces and reports stable.
using Json = nlohmann::ordered_json;

}  // namespace finq
