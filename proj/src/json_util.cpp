#include "lta/json_util.hpp"

namespace lta {

StrictObject::StrictObject(const Json& obj, std::string context)
    : obj_(obj), context_(std::move(context)) {
    if (!obj_.is_object()) throw ValidationError(context_ + ": expected a JSON object");
}

bool StrictObject::has(const std::string& key) const { return obj_.contains(key); }

const Json& StrictObject::require(const std::string& key) {
    auto it = obj_.find(key);
    if (it == obj_.end()) throw ValidationError(context_ + ": missing required key '" + key + "'");
    seen_.insert(key);
    return *it;
}

const Json* StrictObject::optional(const std::string& key) {
    auto it = obj_.find(key);
    if (it == obj_.end()) return nullptr;
    seen_.insert(key);
    return &*it;
}

void StrictObject::finish() const {
    std::string unknown;
    for (auto it = obj_.begin(); it != obj_.end(); ++it) {
        if (!seen_.count(it.key())) {
            if (!unknown.empty()) unknown += ", ";
            unknown += "'" + it.key() + "'";
        }
    }
    if (!unknown.empty()) throw ValidationError(context_ + ": unknown key(s) " + unknown);
}

}  // namespace lta
