#pragma once

#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "lta/error.hpp"

namespace lta {

using Json = nlohmann::json;

// Reads keys out of a JSON object and rejects any key that was never asked for.
class StrictObject {
public:
    StrictObject(const Json& obj, std::string context);

    bool has(const std::string& key) const;
    const Json& require(const std::string& key);
    const Json* optional(const std::string& key);

    template <typename T>
    T get(const std::string& key) {
        const Json& v = require(key);
        try {
            return v.get<T>();
        } catch (const nlohmann::json::exception&) {
            throw ValidationError(context_ + ": key '" + key + "' has the wrong type");
        }
    }

    template <typename T>
    T get_or(const std::string& key, T fallback) {
        const Json* v = optional(key);
        if (v == nullptr) return fallback;
        try {
            return v->get<T>();
        } catch (const nlohmann::json::exception&) {
            throw ValidationError(context_ + ": key '" + key + "' has the wrong type");
        }
    }

    // Throws naming every key that was present but never read.
    void finish() const;

    const std::string& context() const { return context_; }

private:
    const Json& obj_;
    std::string context_;
    std::set<std::string> seen_;
};

}  // namespace lta
